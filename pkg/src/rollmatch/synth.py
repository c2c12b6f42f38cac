"""Deterministic generation of the five-layout fixture corpus.

Each layout reproduces one firm's real header row verbatim, including its
quirks ("Total.1", "unnamed.2", "14,50%", two columns literally named
"Archive"), its value formatting (currency style, grouping separators, date
style, missing-value marker), and its decoy columns, so the generated corpus
preserves the ambiguity structure a matcher has to survive.  Ground truth
and the cross-layout cluster truth are known by construction.

All randomness flows from one seeded generator consumed in a fixed order:
identical seeds give byte-identical output.
"""

from __future__ import annotations

import csv
import io
import os
import random
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Callable

import yaml

from .ingest import SourceTable, load_table
from .optimizer import GroundTruth

# ---------------------------------------------------------------------------
# Value formatting per layout
# ---------------------------------------------------------------------------

_MONTH_ABBR = ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"]


def fmt_dot_group(v: float) -> str:
    return f"{int(round(v)):,}".replace(",", ".")


def fmt_comma_group(v: float) -> str:
    return f"{int(round(v)):,}"


def fmt_comma_decimal(v: float) -> str:
    return f"{v:.2f}".replace(".", ",")


def fmt_dot_decimal(v: float) -> str:
    return f"{v:.2f}"


def fmt_plain_int(v: float) -> str:
    return str(int(round(v)))


def fmt_one_decimal(v: float) -> str:
    return f"{v:.1f}"


def fmt_dmy(d: date) -> str:
    return f"{d.day}-{d.month}-{d.year}"


def fmt_dmy_pad_yy(d: date) -> str:
    return f"{d.day:02d}-{d.month:02d}-{d.year % 100:02d}"


def fmt_dmy_pad(d: date) -> str:
    return f"{d.day:02d}-{d.month:02d}-{d.year}"


def fmt_d_mon_y(d: date) -> str:
    return f"{d.day}-{_MONTH_ABBR[d.month - 1]}-{d.year}"


# Cell payload: rendered text plus the logical value for round-trip checks.
Cell = tuple[str, tuple[str, object] | None]


def num_cell(value: float, fmt: Callable[[float], str], as_int: bool = False) -> Cell:
    v = float(int(round(value))) if as_int else round(float(value), 2)
    return fmt(v), ("numeric", v)


def date_cell(d: date, fmt: Callable[[date], str]) -> Cell:
    return fmt(d), ("date", d)


def text_cell(s: str) -> Cell:
    return s, None


def missing(marker: str) -> Cell:
    return marker, None


# ---------------------------------------------------------------------------
# Shared pools
# ---------------------------------------------------------------------------

TENANT_BASES = [
    "NeuroLogic 21", "Stonebridge Partners", "Nuvion Consulting", "Enovix Utilities",
    "Calyx Analytics", "Harborview Logistics", "Quantafin Capital", "Bluewater Media",
    "Arcadia Foods", "Novatrix Software", "Heliodor Energy", "Westgate Retail",
    "Polaris Legal", "Vantage Engineering", "Meridian Health", "Cobalt Studios",
    "Lighthouse Insurance", "Oakfield Properties", "Zephyr Mobility", "Granite Trading",
    "Silverbirch Finance", "Atlas Interim", "Brightpath Education", "Kestrel Security",
]
TENANT_SUFFIXES = ["B.V.", "N.V.", "GmbH", "Ltd."]

STREETS = [
    "Prinsengracht 110-112", "Parkweg 2", "Keizersgracht 44", "Zuidas Boulevard 18",
    "Stationsplein 7", "Herengracht 250", "Wilhelminakade 91", "Marktstraat 12",
    "Lange Voorhout 33", "Museumplein 5",
]
CITIES = [
    "Apeldoorn", "Amsterdam", "Rotterdam", "Utrecht", "Eindhoven",
    "Groningen", "Haarlem", "Leiden", "Zwolle", "Breda",
]

FLOORS_JLL = ["GF", "1st", "2nd", "3rd", "4th", "5th", "6th", "7th"]
FLOORS_SAVILLS = ["GF", "1", "2", "3", "4", "-1,2,3 and 4", "1 and 2"]
FLOORS_CBRE = ["GF", "1st", "2nd", "3rd", "4th", "5th"]

#: Mean anonymized rent rate (eur per square meter) and its per-layout spread.
RATE_MEAN = 250.0
RATE_SIGMA = {"JLL": 40.0, "SAVILLS": 44.0, "CBRE": 46.0, "EDIF": 48.0, "PARK15": 50.0}


# ---------------------------------------------------------------------------
# Logical lease records
# ---------------------------------------------------------------------------


def _rand_date(rng: random.Random, year_lo: int, year_hi: int, first_of_month: bool) -> date:
    year = rng.randint(year_lo, year_hi)
    month = rng.randint(1, 12)
    day = 1 if first_of_month else rng.randint(1, 28)
    return date(year, month, day)


def _base_record(rng: random.Random, fmt: str) -> dict:
    """Draw one logical lease in a fixed order (determinism contract)."""
    rec: dict = {}
    rec["tenant"] = f"{rng.choice(TENANT_BASES)} {rng.choice(TENANT_SUFFIXES)}"
    rec["street"] = rng.choice(STREETS)
    rec["city"] = rng.choice(CITIES)
    rec["unit"] = f"{rng.randint(1, 80):04d}"

    # Office sizes differ per firm: JLL lists large single-tenant buildings,
    # CBRE small multi-tenant units.
    if fmt == "JLL":
        rec["office"] = rng.randint(3400, 5000)
    elif fmt == "SAVILLS":
        rec["office"] = rng.randint(300, 2500)
    elif fmt == "CBRE":
        rec["office"] = rng.randint(200, 900)
    else:
        rec["office"] = rng.randint(300, 4500)
    rec["archive"] = rng.randint(10, 200) if fmt != "SAVILLS" else rng.randint(10, 500)
    rec["archive_missing"] = rng.random()
    rec["restaurant"] = rng.randint(40, 400) if rng.random() < 0.15 else None
    rec["total"] = rec["office"] + rec["archive"] + (rec["restaurant"] or 0)
    rec["nla"] = rng.randint(300, 5200)

    rate = rng.gauss(RATE_MEAN, RATE_SIGMA[fmt])
    rec["rate"] = rate
    rec["parking"] = rng.randint(0, 60)
    rec["parking_small"] = rng.randint(0, 10)
    rec["parking_missing"] = rng.random()

    rec["comm"] = _rand_date(rng, 2006, 2020, first_of_month=fmt in ("CBRE", "PARK15"))
    duration = rng.randint(5, 15)
    rec["expiry"] = date(rec["comm"].year + duration, rec["comm"].month, rec["comm"].day) - timedelta(days=1)
    rec["break"] = date(rec["comm"].year + rng.randint(2, max(2, duration - 2)), rec["comm"].month, rec["comm"].day)
    rec["break_missing"] = rng.random()
    rec["next_index"] = date(rng.randint(2024, 2026), rng.choice([1, 1, 6, 7]), 1)

    rec["notice"] = rng.choice([3, 6, 12, 12])
    rec["vat"] = rng.random() < 0.7
    rec["floor_jll"] = rng.choice(FLOORS_JLL)
    rec["floor_savills"] = rng.choice(FLOORS_SAVILLS)
    rec["floor_cbre"] = rng.choice(FLOORS_CBRE)
    rec["floor_int"] = rng.randint(0, 12)
    rec["usage_office"] = rng.random() < 0.8

    # Noise-column draws (values kept outside every template range so decoy
    # columns are rejected on value evidence, not luck).
    rec["zone_a"] = rng.randint(6200, 19000)
    rec["zone_b"] = round(rng.uniform(5600.0, 9900.0), 2)
    rec["zone_c"] = rng.randint(21000, 45000)
    rec["parking_rent"] = rng.randint(6000, 30000)
    rec["pp_rate"] = rng.randint(700, 1400)
    rec["archive_rate"] = rng.randint(40, 75)
    rec["security"] = 0.0 if rng.random() < 0.8 else round(rng.uniform(5600.0, 45000.0), 2)
    rec["vat_comp"] = round(rng.uniform(500.0, 5000.0), 2)
    rec["vat_comp_missing"] = rng.random()
    rec["wault"] = round(rng.uniform(0.5, 12.0), 1)
    rec["wault2"] = round(rng.uniform(0.5, 12.0), 1)
    rec["lease_term_rem"] = round(rng.uniform(0.5, 12.0), 1)
    rec["total_size_noise"] = rng.randint(6000, 20000)
    rec["option_n"] = rng.choice(["n", "1", "2", "99"])
    rec["guarantee_missing"] = rng.random()
    rec["restaurant_missing"] = rng.random()
    rec["misc"] = rng.random()
    return rec


# ---------------------------------------------------------------------------
# Layouts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ColumnSpec:
    """One layout column: verbatim header, target role (or None for noise),
    a renderer from the logical record, and an optional cluster-truth key."""

    header: str
    role: str | None
    render: Callable[[dict], Cell]
    cluster_key: str | None = None

    @property
    def truth_key(self) -> str | None:
        return self.role if self.role is not None else self.cluster_key


@dataclass(frozen=True)
class LayoutSpec:
    format_id: str
    missing_marker: str
    columns: tuple[ColumnSpec, ...]


def _jll_layout() -> LayoutSpec:
    mk = "-"

    def col(header, role, render, cluster_key=None):
        return ColumnSpec(header, role, render, cluster_key)

    cols = (
        col("Tenant", "tenant_name", lambda r: text_cell(r["tenant"])),
        col("Floor", "floor", lambda r: text_cell(r["floor_jll"])),
        col("Total", "total_area", lambda r: num_cell(r["total"], fmt_dot_group, as_int=True)),
        col("Office/Business space", "office_area", lambda r: num_cell(r["office"], fmt_dot_group, as_int=True)),
        col("Archive", "archive_area", lambda r: missing(mk) if r["archive_missing"] < 0.2 else num_cell(r["archive"], fmt_dot_group, as_int=True)),
        col("Restaurant", None, lambda r: missing(mk) if r["restaurant"] is None else num_cell(r["restaurant"], fmt_dot_group, as_int=True)),
        col("pp", "parking_spaces", lambda r: num_cell(r["parking"], fmt_plain_int, as_int=True)),
        col("Total.1", "passing_rent_pa", lambda r: num_cell(r["total"] * r["rate"], lambda v: "€ " + fmt_comma_group(v), as_int=True)),
        col("Office+Restaurant", None, lambda r: num_cell((r["office"] + (r["restaurant"] or 0)) * r["rate"], lambda v: "€ " + fmt_comma_group(v), as_int=True)),
        col("Office", None, lambda r: num_cell(r["office"] * r["rate"], lambda v: "€ " + fmt_comma_group(v), as_int=True), cluster_key="office_rent"),
        col("Archive", None, lambda r: missing(mk) if r["archive_missing"] < 0.2 else num_cell(r["archive"] * r["rate"], lambda v: "€ " + fmt_comma_group(v), as_int=True)),
        col("unnamed.1", None, lambda r: num_cell(r["zone_a"], lambda v: "€ " + fmt_comma_group(v), as_int=True)),
        col("Restaurant*", None, lambda r: missing(mk) if r["restaurant"] is None else num_cell(r["restaurant"] * r["rate"], lambda v: "€ " + fmt_comma_group(v), as_int=True)),
        col("unnamed.2", None, lambda r: num_cell(r["zone_b"], lambda v: "€ " + fmt_dot_decimal(v))),
        col("Parking", None, lambda r: num_cell(r["parking_rent"], lambda v: "€ " + fmt_dot_group(v), as_int=True)),
        col("unnamed.3", None, lambda r: num_cell(r["zone_c"], lambda v: "€ " + fmt_dot_group(v), as_int=True)),
        col("Commencement", "commencement_date", lambda r: date_cell(r["comm"], fmt_dmy)),
        col("Expiry", "expiry_date", lambda r: date_cell(r["expiry"], fmt_dmy)),
        col("Break", "break_date", lambda r: missing(mk) if r["break_missing"] < 0.3 else date_cell(r["break"], fmt_dmy)),
        col("Tenant option(s)", None, lambda r: text_cell(f"{r['option_n']}*5"), cluster_key="options"),
        col("Notice Period", "notice_period", lambda r: text_cell(f"{r['notice']} months")),
        col("Notice given", None, lambda r: text_cell("No" if r["misc"] < 0.9 else "Yes")),
        col("WAULT", None, lambda r: num_cell(r["wault"], fmt_one_decimal)),
        col("WAULB", None, lambda r: num_cell(r["wault2"], fmt_one_decimal)),
        col("first index", "next_index_date", lambda r: date_cell(r["next_index"], fmt_dmy)),
        col("Yes/No", "vat_liable", lambda r: text_cell("Yes" if r["vat"] else "No")),
        col("% comp", None, lambda r: missing(mk)),
        col("Guarantee", None, lambda r: missing("n.a.") if r["guarantee_missing"] < 0.7 else text_cell("Bank guarantee")),
        col("Comments", None, lambda r: missing(mk) if r["misc"] < 0.6 else text_cell("1-5"), cluster_key="comments"),
    )
    return LayoutSpec("JLL", mk, cols)


def _savills_layout() -> LayoutSpec:
    mk = ""

    def col(header, role, render, cluster_key=None):
        return ColumnSpec(header, role, render, cluster_key)

    cols = (
        col("Property code", None, lambda r: text_cell(f"WEB{int(r['zone_a']) % 900:03d}")),
        col("Property / Address", "property_name", lambda r: text_cell(f"{r['street']} te {r['city']}")),
        col("Floor", "floor", lambda r: text_cell(r["floor_savills"])),
        col("Unit number Savills", "unit_id", lambda r: text_cell(r["unit"])),
        col("Tenant", "tenant_name", lambda r: text_cell(r["tenant"])),
        col("Leased space", "usage", lambda r: text_cell("Office" if r["usage_office"] else "Office, storage")),
        col("Office space sq m", "office_area", lambda r: num_cell(r["office"], fmt_plain_int, as_int=True)),
        col("Storage space sq m", "archive_area", lambda r: missing(mk) if r["archive_missing"] < 0.15 else num_cell(r["archive"], fmt_plain_int, as_int=True)),
        col("Total Area sq m", "total_area", lambda r: num_cell(r["office"] + r["archive"], fmt_plain_int, as_int=True)),
        col("Total rent office space/y", None, lambda r: num_cell(r["office"] * r["rate"], fmt_comma_decimal), cluster_key="office_rent"),
        col("Total annual rent", "passing_rent_pa", lambda r: num_cell((r["office"] + r["archive"]) * r["rate"], fmt_comma_decimal)),
        col("Payment period (m/q)", None, lambda r: text_cell("Q" if r["misc"] < 0.8 else "M")),
        col("VAT liable (y/n)", "vat_liable", lambda r: text_cell("Y" if r["vat"] else "N")),
        col("VAT comp (€)", None, lambda r: missing(mk) if r["vat_comp_missing"] < 0.9 else num_cell(r["vat_comp"], fmt_comma_decimal), cluster_key="vat_comp"),
        col("Start date lease", "commencement_date", lambda r: date_cell(r["comm"], fmt_dmy)),
        col("Notice period", "notice_period", lambda r: text_cell(str(r["notice"]))),
        col("Break option date", "break_date", lambda r: missing(mk) if r["break_missing"] < 0.25 else date_cell(r["break"], fmt_dmy)),
        col("Notice period Break option", None, lambda r: missing(mk) if r["misc"] < 0.8 else text_cell("6")),
        col("Expiry date", "expiry_date", lambda r: date_cell(r["expiry"], fmt_dmy)),
        col("Next index date", "next_index_date", lambda r: date_cell(r["next_index"], fmt_dmy)),
        col("Option period", None, lambda r: text_cell(f"{r['option_n']}x5"), cluster_key="options"),
        col("Type of Security", None, lambda r: text_cell("Bank Guarantee" if r["misc"] < 0.6 else "Deposit"), cluster_key="security_type"),
        col("Security Amount", None, lambda r: num_cell(r["security"], fmt_comma_decimal)),
        col("CPI Indices (2000=100, 2006=100, 2015=100)", None, lambda r: text_cell("2015=100")),
        col("Comments", None, lambda r: missing(mk), cluster_key="comments"),
    )
    return LayoutSpec("SAVILLS", mk, cols)


def _cbre_layout() -> LayoutSpec:
    mk = ""

    def col(header, role, render, cluster_key=None):
        return ColumnSpec(header, role, render, cluster_key)

    cols = (
        col("Tenant", "tenant_name", lambda r: text_cell(r["tenant"].replace("B.V.", "BV").replace("N.V.", "NV"))),
        col("Floor(s)", "floor", lambda r: text_cell(r["floor_cbre"])),
        col("Office (sq m)", "office_area", lambda r: num_cell(r["office"], fmt_plain_int, as_int=True)),
        col("Archive (sq m)", "archive_area", lambda r: missing(mk) if r["archive_missing"] < 0.5 else num_cell(r["archive"], fmt_plain_int, as_int=True)),
        col("PP", "parking_spaces", lambda r: num_cell(r["parking_small"], fmt_plain_int, as_int=True)),
        col("Rent office (€/sqm)", "rent_per_sqm", lambda r: num_cell(r["rate"], fmt_plain_int, as_int=True)),
        col("Rent Archive (€/sqm)", None, lambda r: missing(mk) if r["archive_missing"] < 0.7 else num_cell(r["archive_rate"], fmt_plain_int, as_int=True)),
        col("Rent PP (€/PP)", None, lambda r: num_cell(r["pp_rate"], fmt_comma_group, as_int=True)),
        col("Annual rent (excl. VAT)", "passing_rent_pa", lambda r: num_cell((r["office"] + r["archive"]) * r["rate"], fmt_comma_group, as_int=True)),
        col("VAT compensation", None, lambda r: missing(mk) if r["vat_comp_missing"] < 0.85 else num_cell(r["vat_comp"], fmt_comma_group, as_int=True), cluster_key="vat_comp"),
        col("Total annual rent (excl. VAT)", None, lambda r: num_cell((r["office"] + r["archive"]) * r["rate"], fmt_comma_group, as_int=True)),
        col("VAT", "vat_liable", lambda r: text_cell("Y" if r["vat"] else "N")),
        col("Start date", "commencement_date", lambda r: date_cell(r["comm"], fmt_dmy_pad_yy)),
        col("Next index", "next_index_date", lambda r: date_cell(r["next_index"], fmt_dmy_pad_yy)),
        col("Termination date", "expiry_date", lambda r: date_cell(r["expiry"], fmt_dmy_pad_yy)),
        col("Remaining lease term", None, lambda r: num_cell(r["lease_term_rem"], fmt_one_decimal)),
        col("Notice period", "notice_period", lambda r: text_cell(f"{r['notice']} months")),
        col("Options/Extensions", None, lambda r: text_cell(f"{r['option_n'].upper()} * 5 years"), cluster_key="options"),
    )
    return LayoutSpec("CBRE", mk, cols)


def _edif_layout() -> LayoutSpec:
    mk = "-"

    def col(header, role, render, cluster_key=None):
        return ColumnSpec(header, role, render, cluster_key)

    cols = (
        col("EDIF ID", None, lambda r: text_cell(f"{int(r['zone_a']) % 10000:04d}")),
        col("Property ID No.", None, lambda r: text_cell(f"P{int(r['zone_c']) % 900:03d}")),
        col("Property Name", "property_name", lambda r: text_cell(r["city"])),
        col("Country", None, lambda r: text_cell("Netherlands")),
        col("Demise ID No.", None, lambda r: text_cell(f"D{int(r['zone_b']) % 900:03d}")),
        col("Floor", "floor", lambda r: num_cell(r["floor_int"], fmt_plain_int, as_int=True)),
        col("Tenant ID No.", None, lambda r: text_cell(f"T{int(r['zone_a']) % 9000:04d}")),
        col("Tenant Name", "tenant_name", lambda r: text_cell(r["tenant"])),
        col("Use", "usage", lambda r: text_cell("Office" if r["usage_office"] else "Storage")),
        col("NLA (Sqm)", "total_area", lambda r: num_cell(r["nla"], fmt_dot_group, as_int=True)),
        col("Parking Spaces", "parking_spaces", lambda r: missing(mk) if r["parking_missing"] < 0.5 else num_cell(r["parking"], fmt_plain_int, as_int=True)),
        col("Lease Start Date", "commencement_date", lambda r: date_cell(r["comm"], fmt_d_mon_y)),
        col("Break Date", "break_date", lambda r: missing(mk) if r["break_missing"] < 0.4 else date_cell(r["break"], fmt_d_mon_y)),
        col("Expiry Date", "expiry_date", lambda r: date_cell(r["expiry"], fmt_d_mon_y)),
        col("Earliest Expiry Date", None, lambda r: date_cell(r["expiry"], fmt_d_mon_y)),
        col("Contracted Rent at Reporting Date (€ psqm pm)", None, lambda r: num_cell(r["rate"] / 12.0, fmt_comma_decimal)),
        col("Contracted Rent at Reporting Date (€ per unit pm)", None, lambda r: missing(mk) if r["misc"] < 0.95 else num_cell(r["rate"] * 30.0, fmt_comma_decimal)),
        col("Contracted Annual Rent (€ pa)", "passing_rent_pa", lambda r: num_cell(r["nla"] * r["rate"], fmt_dot_group, as_int=True)),
        col("TOTAL", None, lambda r: num_cell(r["nla"] * r["rate"] * 1.029, fmt_dot_group, as_int=True)),
        col("14,50%", None, lambda r: num_cell(r["nla"] * r["rate"] * 0.0145, fmt_dot_group, as_int=True)),
    )
    return LayoutSpec("EDIF", mk, cols)


def _park15_layout() -> LayoutSpec:
    mk = "-"

    def col(header, role, render, cluster_key=None):
        return ColumnSpec(header, role, render, cluster_key)

    cols = (
        col("ID", None, lambda r: text_cell(str(int(r["zone_a"]) % 97 + 1))),
        col("Address", "property_name", lambda r: text_cell(r["street"])),
        col("Tenant", "tenant_name", lambda r: text_cell(r["tenant"])),
        col("Brand", None, lambda r: text_cell(r["tenant"].rsplit(" ", 1)[0])),
        col("Contractual size (sqm)", "total_area", lambda r: num_cell(r["nla"], fmt_plain_int, as_int=True)),
        col("LFA/GFA", None, lambda r: missing(mk)),
        col("Total size (sqm LFA NEN2580)", None, lambda r: num_cell(r["total_size_noise"], fmt_plain_int, as_int=True)),
        col("Start date", "commencement_date", lambda r: date_cell(r["comm"], fmt_dmy_pad)),
        col("Expiry date", "expiry_date", lambda r: date_cell(r["expiry"], fmt_dmy_pad)),
        col("Break date", "break_date", lambda r: missing(mk) if r["break_missing"] < 0.3 else date_cell(r["break"], fmt_dmy_pad)),
        col("WALL (to break)", None, lambda r: num_cell(r["wault"], fmt_one_decimal)),
        col("WALL (to expiry)", None, lambda r: num_cell(r["wault2"], fmt_one_decimal)),
        col("Option periods", None, lambda r: text_cell(f"{r['option_n']}*5"), cluster_key="options"),
        col("Extension periods", None, lambda r: text_cell("n*5")),
        col("Notice periods (months)", "notice_period", lambda r: text_cell(str(r["notice"]))),
        col("Total gross annual rent", "passing_rent_pa", lambda r: num_cell(r["nla"] * r["rate"], lambda v: "€ " + fmt_comma_group(v), as_int=True)),
        col("Next index date", "next_index_date", lambda r: date_cell(r["next_index"], fmt_dmy_pad)),
        col("VAT liable", "vat_liable", lambda r: text_cell("Yes" if r["vat"] else "No")),
        col("Type", None, lambda r: text_cell("Deposit" if r["misc"] < 0.7 else "Bank guarantee"), cluster_key="security_type"),
        col("Amount", None, lambda r: num_cell(r["security"] if r["security"] > 0 else r["zone_c"], lambda v: "€ " + fmt_comma_group(v), as_int=True)),
        col("Terminated lease", None, lambda r: text_cell("No" if r["misc"] < 0.9 else "Yes")),
        col("Comments", None, lambda r: missing(mk), cluster_key="comments"),
    )
    return LayoutSpec("PARK15", mk, cols)


def default_layouts() -> list[LayoutSpec]:
    return [_jll_layout(), _savills_layout(), _cbre_layout(), _edif_layout(), _park15_layout()]


def layouts_by_id(format_ids: list[str] | None = None) -> list[LayoutSpec]:
    all_layouts = {l.format_id: l for l in default_layouts()}
    if format_ids is None:
        return list(all_layouts.values())
    try:
        return [all_layouts[f.upper()] for f in format_ids]
    except KeyError as exc:
        raise ValueError(f"unknown layout {exc}; known: {sorted(all_layouts)}") from exc


# ---------------------------------------------------------------------------
# Dataset generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpectedCell:
    document: str
    column_index: int
    header: str
    row: int
    kind: str  # "numeric" | "date"
    value: object


@dataclass
class GeneratedDataset:
    documents: list[SourceTable]
    ground_truth: GroundTruth
    cluster_truth: list[tuple[str, dict[str, str]]]
    expected_cells: list[ExpectedCell]

    def write(self, out_dir) -> list[str]:
        """Write CSVs, manifest, and both truth files; returns written paths."""
        os.makedirs(out_dir, exist_ok=True)
        paths: list[str] = []
        manifest: dict = {"documents": []}
        for doc in self.documents:
            filename = f"{doc.name}.csv"
            path = os.path.join(out_dir, filename)
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(self._raw_headers[doc.name])
            for row in doc.cells:
                writer.writerow(row)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
            manifest["documents"].append({"path": filename, "format_id": doc.format_id})
            paths.append(path)
        manifest_path = os.path.join(out_dir, "manifest.yaml")
        with open(manifest_path, "w", encoding="utf-8") as fh:
            fh.write(yaml.safe_dump(manifest, sort_keys=False))
        paths.append(manifest_path)
        truth_path = os.path.join(out_dir, "ground_truth.csv")
        with open(truth_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.ground_truth.to_csv())
        paths.append(truth_path)
        cluster_path = os.path.join(out_dir, "cluster_truth.csv")
        with open(cluster_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(cluster_truth_to_csv(self.cluster_truth))
        paths.append(cluster_path)
        return paths

    # Raw (pre-dedup) header rows per document, needed to re-emit the CSVs
    # with the duplicate literal headers the layouts carry.
    _raw_headers: dict = field(default_factory=dict)


def cluster_truth_to_csv(sets: list[tuple[str, dict[str, str]]]) -> str:
    formats = ["JLL", "SAVILLS", "CBRE", "EDIF", "PARK15"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["set_name"] + formats)
    for name, mapping in sets:
        writer.writerow([name] + [mapping.get(f, "NA") for f in formats])
    return buf.getvalue()


def _build_truth(layouts: list[LayoutSpec]) -> tuple[GroundTruth, list[tuple[str, dict[str, str]]]]:
    entries: dict[tuple[str, str], str] = {}
    cluster_members: dict[str, dict[str, str]] = {}
    for layout in layouts:
        seen: dict[str, int] = {}
        for spec in layout.columns:
            header = spec.header
            if header in seen:
                seen[header] += 1
                header = f"{header}.{seen[header]}"
            else:
                seen[header] = 0
            if spec.role is not None:
                entries[(layout.format_id, header)] = spec.role
            key = spec.truth_key
            if key is not None and layout.format_id not in cluster_members.setdefault(key, {}):
                cluster_members[key][layout.format_id] = header
    cluster_truth = [
        (key, members)
        for key, members in sorted(cluster_members.items())
        if len(members) >= 2
    ]
    return GroundTruth(entries=entries), cluster_truth


def generate_dataset(
    layouts: list[LayoutSpec] | None = None,
    docs_per_layout: int = 4,
    rows_per_doc: int = 40,
    seed: int = 42,
) -> GeneratedDataset:
    """Generate the fixture corpus with truth known by construction."""
    if docs_per_layout < 1:
        raise ValueError("docs_per_layout must be at least 1")
    if rows_per_doc < 1:
        raise ValueError("rows_per_doc must be at least 1")
    layouts = layouts if layouts is not None else default_layouts()
    rng = random.Random(seed)
    documents: list[SourceTable] = []
    expected: list[ExpectedCell] = []
    raw_headers: dict[str, list[str]] = {}

    for layout in layouts:
        for d in range(docs_per_layout):
            doc_name = f"{layout.format_id.lower()}_{d:02d}"
            headers = [c.header for c in layout.columns]
            rows: list[list[str]] = []
            for r in range(rows_per_doc):
                rec = _base_record(rng, layout.format_id)
                row: list[str] = []
                for c_idx, spec in enumerate(layout.columns):
                    cell, exp = spec.render(rec)
                    row.append(cell)
                    if exp is not None:
                        expected.append(
                            ExpectedCell(
                                document=doc_name,
                                column_index=c_idx,
                                header=spec.header,
                                row=r,
                                kind=exp[0],
                                value=exp[1],
                            )
                        )
                rows.append(row)
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(headers)
            for row in rows:
                writer.writerow(row)
            table = load_table(buf.getvalue(), layout.format_id, name=doc_name)
            documents.append(table)
            raw_headers[doc_name] = headers

    ground_truth, cluster_truth = _build_truth(layouts)
    ds = GeneratedDataset(
        documents=documents,
        ground_truth=ground_truth,
        cluster_truth=cluster_truth,
        expected_cells=expected,
    )
    ds._raw_headers = raw_headers
    return ds


def generate_verbatim_dataset(
    schema_attributes: list,
    docs_per_layout: int = 1,
    rows_per_doc: int = 20,
    seed: int = 7,
) -> GeneratedDataset:
    """Sanity-ceiling corpus: headers copied verbatim from attribute synonyms.

    One document per layout role set, with only mapped columns; a matcher
    with any sensible configuration should reach F1 = 1.0 on it.
    """
    base = default_layouts()
    verbatim_layouts: list[LayoutSpec] = []
    synonym_of = {a.name: (a.synonyms[0] if a.synonyms else a.name) for a in schema_attributes}
    for layout in base:
        cols = []
        seen_roles: set[str] = set()
        for spec in layout.columns:
            if spec.role is None or spec.role in seen_roles or spec.role not in synonym_of:
                continue
            seen_roles.add(spec.role)
            cols.append(ColumnSpec(synonym_of[spec.role], spec.role, spec.render, None))
        verbatim_layouts.append(LayoutSpec(layout.format_id, layout.missing_marker, tuple(cols)))
    return generate_dataset(
        layouts=verbatim_layouts,
        docs_per_layout=docs_per_layout,
        rows_per_doc=rows_per_doc,
        seed=seed,
    )
