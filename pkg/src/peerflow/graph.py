"""Weighted co-authorship network and its per-node stochastic view.

A paper with x authors strengthens every pair of its authors by 1/(x-1);
pair weights are the sum of those contributions over all shared papers.
Outgoing weights are then normalized per node into a probability
distribution for the particle walk.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .corpus import AuthorKey, PaperRecord
from .errors import GraphDecodeError, ValidationError

__all__ = [
    "CoauthGraph",
    "StochasticGraph",
    "paper_tie_strength",
    "build_graph",
    "normalize_out_edges",
    "write_graph",
    "read_graph",
]


def paper_tie_strength(author_count: int) -> float:
    """Pairwise tie strength contributed by one paper with the given number
    of distinct authors: 1/(x-1). A single-author paper creates no pair, so
    its tie strength is 0."""
    if author_count <= 0:
        raise ValidationError(f"author count must be >= 1, got {author_count}")
    if author_count == 1:
        return 0.0
    return 1.0 / (author_count - 1)


def _pair(i: str, j: str) -> tuple[str, str]:
    return (i, j) if i < j else (j, i)


@dataclass
class CoauthGraph:
    """Undirected weighted author graph.

    ``weights`` stores each undirected edge once under the lexicographically
    ordered pair of canonical names. All stored weights are positive and
    symmetric by construction; self-loops never occur.
    """

    nodes: dict[str, AuthorKey] = field(default_factory=dict)
    weights: dict[tuple[str, str], float] = field(default_factory=dict)
    paper_count: int = 0

    def weight(self, i: str, j: str) -> float:
        return self.weights.get(_pair(i, j), 0.0)

    def neighbors(self, i: str) -> list[str]:
        out = set()
        for (a, b) in self.weights:
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return sorted(out)

    @property
    def edge_count(self) -> int:
        return len(self.weights)


def build_graph(corpus: list[PaperRecord]) -> CoauthGraph:
    """Build the co-authorship graph from a corpus.

    Pair contributions are accumulated as exact rationals and rounded to
    float64 once at the end, so the result is bit-identical under any
    permutation of the corpus. Duplicate authors on one paper are already
    deduplicated by PaperRecord, so x counts distinct authors.
    """
    nodes: dict[str, AuthorKey] = {}
    acc: dict[tuple[str, str], Fraction] = {}
    for record in corpus:
        authors = record.authors
        for a in authors:
            prior = nodes.get(a.canonical)
            # deterministic display choice independent of corpus order
            if prior is None or a.display < prior.display:
                nodes[a.canonical] = a
        x = len(authors)
        if x < 2:
            continue
        m = Fraction(1, x - 1)
        for ai in range(x):
            for aj in range(ai + 1, x):
                key = _pair(authors[ai].canonical, authors[aj].canonical)
                acc[key] = acc.get(key, Fraction(0)) + m
    weights = {key: float(value) for key, value in sorted(acc.items())}
    return CoauthGraph(nodes=nodes, weights=weights, paper_count=len(corpus))


@dataclass
class StochasticGraph:
    """Directed view of the co-authorship graph: per node, the outgoing
    probability distribution over neighbors. Isolated nodes have an empty
    distribution and absorb walkers."""

    nodes: dict[str, AuthorKey] = field(default_factory=dict)
    out: dict[str, list[tuple[str, float]]] = field(default_factory=dict)

    def out_edges(self, i: str) -> list[tuple[str, float]]:
        return self.out.get(i, [])

    def is_dangling(self, i: str) -> bool:
        return not self.out.get(i)

    def __contains__(self, canonical: str) -> bool:
        return canonical in self.nodes


def normalize_out_edges(graph: CoauthGraph) -> StochasticGraph:
    """Normalize each node's outgoing raw weights to a probability
    distribution. The denominator is summed over lexicographically sorted
    neighbor keys so repeated builds are reproducible bit-for-bit."""
    adjacency: dict[str, dict[str, float]] = {c: {} for c in graph.nodes}
    for (i, j), w in graph.weights.items():
        adjacency[i][j] = w
        adjacency[j][i] = w
    out: dict[str, list[tuple[str, float]]] = {}
    for node in graph.nodes:
        targets = sorted(adjacency[node])
        total = 0.0
        for t in targets:
            total += adjacency[node][t]
        out[node] = [(t, adjacency[node][t] / total) for t in targets] if targets else []
    return StochasticGraph(nodes=dict(graph.nodes), out=out)


# --------------------------------------------------------------------------
# Graph file codec
# --------------------------------------------------------------------------
#
# Text format, tab-separated fields:
#   coauth-graph v1 nodes=<n> edges=<m> papers=<p>
#   N\t<canonical>\t<display>
#   E\t<i>\t<j>\t<weight>          (i < j lexicographically, 12 significant digits)

_HEADER_PREFIX = "coauth-graph v1 "


def write_graph(graph: CoauthGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"{_HEADER_PREFIX}nodes={len(graph.nodes)} edges={graph.edge_count}"
            f" papers={graph.paper_count}\n"
        )
        for canonical in sorted(graph.nodes):
            fh.write(f"N\t{canonical}\t{graph.nodes[canonical].display}\n")
        for (i, j) in sorted(graph.weights):
            fh.write(f"E\t{i}\t{j}\t{graph.weights[(i, j)]:.12g}\n")


def read_graph(path) -> CoauthGraph:
    """Decode a graph file, enforcing the stored invariants: declared counts,
    positive weights, no self-loops, i < j ordering (which makes asymmetric
    duplicate edges unrepresentable), and no undeclared endpoints."""
    nodes: dict[str, AuthorKey] = {}
    weights: dict[tuple[str, str], float] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith(_HEADER_PREFIX):
            raise GraphDecodeError(f"bad header: {header!r}", line=1)
        try:
            fields = dict(part.split("=") for part in header[len(_HEADER_PREFIX):].split())
            n_nodes, n_edges = int(fields["nodes"]), int(fields["edges"])
            n_papers = int(fields.get("papers", 0))
        except (ValueError, KeyError) as exc:
            raise GraphDecodeError(f"bad header counts: {header!r}", line=1) from exc
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if parts[0] == "N" and len(parts) == 3:
                _, canonical, display = parts
                if canonical in nodes:
                    raise GraphDecodeError(f"duplicate node {canonical!r}", line=lineno)
                nodes[canonical] = AuthorKey(canonical, display)
            elif parts[0] == "E" and len(parts) == 4:
                _, i, j, w_str = parts
                try:
                    w = float(w_str)
                except ValueError as exc:
                    raise GraphDecodeError(f"bad weight {w_str!r}", line=lineno) from exc
                if i == j:
                    raise GraphDecodeError(f"self-loop on {i!r}", line=lineno)
                if not i < j:
                    raise GraphDecodeError(
                        f"edge endpoints out of order: {i!r} !< {j!r}", line=lineno
                    )
                if i not in nodes or j not in nodes:
                    raise GraphDecodeError("edge references undeclared node", line=lineno)
                if w <= 0:
                    raise GraphDecodeError(f"non-positive weight {w}", line=lineno)
                if (i, j) in weights:
                    raise GraphDecodeError(f"duplicate edge {i!r}-{j!r}", line=lineno)
                weights[(i, j)] = w
            else:
                raise GraphDecodeError(f"unrecognized line {line!r}", line=lineno)
    if len(nodes) != n_nodes or len(weights) != n_edges:
        raise GraphDecodeError(
            f"header declares nodes={n_nodes} edges={n_edges}, "
            f"found {len(nodes)}/{len(weights)}"
        )
    return CoauthGraph(nodes=nodes, weights=weights, paper_count=n_papers)
