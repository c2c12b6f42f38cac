"""Automated integration baseline: cluster join-able columns across documents
and outer-union all rows into one wide table.

Tenancy-schedule rows carry no shared keys across firms, so full disjunction
degenerates to a cluster-aligned outer union: every input row appears once,
filling only the clusters its document has columns for.  Column similarity
comes from a pluggable provider; the default is a deterministic blend of
header-token overlap and parsed-type agreement (an embedding-based provider
can be slotted in through the same interface).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Iterable

from .ingest import ColumnProfile, SourceTable, profile_table
from .tables import MaterializedTable


@dataclass(frozen=True, order=True)
class ColumnRef:
    format_id: str
    document_id: str
    header: str


#: Similarity provider signature: two column profiles -> score in [0, 1].
SimilarityProvider = Callable[[ColumnProfile, ColumnProfile], float]


def dominant_type(profile: ColumnProfile) -> str:
    """Coarse parsed type of a column: 'date', 'numeric', or 'text'."""
    n = len(profile.values_nonmissing)
    if n == 0:
        return "text"
    date_frac = len(profile.date_values) / n
    num_frac = len(profile.numeric_values) / n
    if date_frac >= 0.5 and date_frac >= num_frac:
        return "date"
    if num_frac >= 0.5:
        return "numeric"
    return "text"


def default_similarity(a: ColumnProfile, b: ColumnProfile) -> float:
    """0.6 * header-token Jaccard + 0.4 * dominant-type agreement."""
    ta, tb = a.tokens, b.tokens
    if not ta and not tb:
        jaccard = 1.0
    elif not ta or not tb:
        jaccard = 0.0
    else:
        jaccard = len(ta & tb) / len(ta | tb)
    agreement = 1.0 if dominant_type(a) == dominant_type(b) else 0.0
    return 0.6 * jaccard + 0.4 * agreement


@dataclass
class ColumnClustering:
    """Partition of all column refs; every ref is in exactly one cluster."""

    clusters: list[tuple[ColumnRef, ...]]
    representatives: list[str]

    def cluster_of(self, ref: ColumnRef) -> int:
        for i, cluster in enumerate(self.clusters):
            if ref in cluster:
                return i
        raise KeyError(ref)


class _UnionFind:
    def __init__(self, items: list[ColumnRef]):
        self.parent = {item: item for item in items}

    def find(self, x: ColumnRef) -> ColumnRef:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: ColumnRef, b: ColumnRef) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # Attach the lexicographically larger root under the smaller one
            # so representatives are order-independent.
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def cluster_columns(
    documents: list[SourceTable],
    threshold: float = 0.7,
    provider: SimilarityProvider = default_similarity,
) -> ColumnClustering:
    """Group join-able columns by transitive closure of provider similarity.

    Edges exist between cross-document columns whose similarity reaches the
    threshold; edges are applied in decreasing-similarity order and an edge
    is skipped when it would pull two columns of the same document into one
    cluster (within-document columns never merge).  The representative of a
    cluster is its lexicographically smallest cleaned header.
    """
    refs: list[ColumnRef] = []
    profiles: dict[ColumnRef, ColumnProfile] = {}
    for table in documents:
        doc_id = table.name or table.format_id
        for prof in profile_table(table):
            ref = ColumnRef(format_id=table.format_id, document_id=doc_id, header=prof.header_raw)
            refs.append(ref)
            profiles[ref] = prof

    edges: list[tuple[float, ColumnRef, ColumnRef]] = []
    for i, a in enumerate(refs):
        for b in refs[i + 1 :]:
            if a.document_id == b.document_id:
                continue
            sim = provider(profiles[a], profiles[b])
            if sim >= threshold:
                edges.append((sim, a, b))
    edges.sort(key=lambda e: (-e[0], e[1], e[2]))

    uf = _UnionFind(refs)
    members: dict[ColumnRef, set[str]] = {ref: {ref.document_id} for ref in refs}
    for _, a, b in edges:
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        if members[ra] & members[rb]:
            continue  # would merge two columns of one document
        uf.union(a, b)
        root = uf.find(a)
        other = rb if root == ra else ra
        members[root] = members[ra] | members[rb]
        members.pop(other, None)

    grouped: dict[ColumnRef, list[ColumnRef]] = {}
    for ref in refs:
        grouped.setdefault(uf.find(ref), []).append(ref)
    clusters = [tuple(sorted(group)) for group in grouped.values()]
    clusters.sort(key=lambda cluster: (min(profiles[r].header_clean for r in cluster), cluster[0]))
    representatives = [min(profiles[r].header_clean for r in cluster) for cluster in clusters]
    return ColumnClustering(clusters=clusters, representatives=representatives)


def integrate_fd(documents: list[SourceTable], clustering: ColumnClustering) -> MaterializedTable:
    """Outer union of all rows, aligned on the column clusters.

    One output column per cluster (named by its representative, with
    positional suffixes when representatives collide) plus a leading
    format_id provenance column.  Each row fills only the clusters its
    document has columns for; raw cell values are copied verbatim,
    structural absences are null.
    """
    cluster_index: dict[ColumnRef, int] = {}
    for i, cluster in enumerate(clustering.clusters):
        for ref in cluster:
            cluster_index[ref] = i

    names: list[str] = []
    seen: dict[str, int] = {}
    for rep in clustering.representatives:
        if rep in seen:
            seen[rep] += 1
            names.append(f"{rep}.{seen[rep]}")
        else:
            seen[rep] = 0
            names.append(rep)

    rows: list[list[str | None]] = []
    for table in documents:
        doc_id = table.name or table.format_id
        col_to_cluster: dict[int, int] = {}
        for c, header in enumerate(table.headers):
            ref = ColumnRef(format_id=table.format_id, document_id=doc_id, header=header)
            col_to_cluster[c] = cluster_index[ref]
        for r in range(table.row_count):
            row: list[str | None] = [None] * len(clustering.clusters)
            for c in range(table.col_count):
                row[col_to_cluster[c]] = table.cells[r][c]
            rows.append([table.format_id] + row)

    return MaterializedTable(name="integrated", columns=["format_id"] + names, rows=rows)


# ---------------------------------------------------------------------------
# Cluster-level evaluation
# ---------------------------------------------------------------------------


class ClusterTruthError(ValueError):
    """Cluster ground truth references unknown columns."""


def load_cluster_truth(text: str) -> list[tuple[str, dict[str, str]]]:
    """Parse the cluster ground truth CSV: set_name, then one header per format.

    'NA' (or empty) marks a format that lacks the column.  Returns
    (set_name, {format_id: header}) in file order.
    """
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows:
        raise ClusterTruthError("empty cluster ground truth")
    header = rows[0]
    if not header or header[0] != "set_name":
        raise ClusterTruthError("cluster truth must start with a 'set_name' column")
    formats = header[1:]
    out: list[tuple[str, dict[str, str]]] = []
    for row in rows[1:]:
        name = row[0]
        mapping = {
            fmt: cell.strip()
            for fmt, cell in zip(formats, row[1:])
            if cell.strip() and cell.strip().upper() != "NA"
        }
        out.append((name, mapping))
    return out


def truth_sets_to_refs(
    truth_sets: list[tuple[str, dict[str, str]]], documents: list[SourceTable]
) -> list[set[ColumnRef]]:
    """Expand format-level truth sets to per-document column refs."""
    refs_by_format: dict[tuple[str, str], list[ColumnRef]] = {}
    for table in documents:
        doc_id = table.name or table.format_id
        for header in table.headers:
            ref = ColumnRef(format_id=table.format_id, document_id=doc_id, header=header)
            refs_by_format.setdefault((table.format_id, header), []).append(ref)
    out: list[set[ColumnRef]] = []
    for name, mapping in truth_sets:
        expanded: set[ColumnRef] = set()
        for fmt, header in mapping.items():
            key = (fmt, header)
            if key not in refs_by_format:
                raise ClusterTruthError(f"cluster set '{name}' references unknown column {key}")
            expanded.update(refs_by_format[key])
        out.append(expanded)
    return out


@dataclass(frozen=True)
class ClusterEvalResult:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


def evaluate_clusters(
    clustering: ColumnClustering, truth_sets: list[set[ColumnRef]]
) -> ClusterEvalResult:
    """Pairwise scoring restricted to columns appearing in the truth sets.

    A pair of columns is positive in truth when some truth set contains
    both, and positive in the prediction when they share a cluster.
    """
    universe: list[ColumnRef] = sorted({ref for s in truth_sets for ref in s})
    set_of: dict[ColumnRef, int] = {}
    for i, s in enumerate(truth_sets):
        for ref in s:
            if ref in set_of:
                raise ClusterTruthError(f"column {ref} appears in two truth sets")
            set_of[ref] = i
    cluster_of: dict[ColumnRef, int] = {}
    for i, cluster in enumerate(clustering.clusters):
        for ref in cluster:
            cluster_of[ref] = i

    tp = fp = fn = 0
    for i, a in enumerate(universe):
        for b in universe[i + 1 :]:
            same_truth = set_of[a] == set_of[b]
            same_cluster = cluster_of.get(a) is not None and cluster_of.get(a) == cluster_of.get(b)
            if same_cluster and same_truth:
                tp += 1
            elif same_cluster and not same_truth:
                fp += 1
            elif same_truth and not same_cluster:
                fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return ClusterEvalResult(precision=precision, recall=recall, f1=f1, tp=tp, fp=fp, fn=fn)
