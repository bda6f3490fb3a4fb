"""Pre-print-specific influence over the co-authorship network.

Energy-carrying particles are seeded at the authors cited by a manuscript,
then walk the stochastic graph, depositing their current energy at every
node they visit and losing a fixed fraction of it per hop. The accumulated
node energies, normalized, are that manuscript's influence landscape.

Two evaluation routes are provided: a Monte-Carlo simulation of the walk
(run_diffusion) and its exact expectation (expected_influence), computed by
iterative mass propagation. The second serves as the verification oracle
for the first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import AuthorKey, CitedWork, PaperRecord
from .errors import ValidationError
from .graph import StochasticGraph

__all__ = [
    "DiffusionConfig",
    "SeedVector",
    "InfluenceMap",
    "Ranking",
    "seed_particles",
    "run_diffusion",
    "expected_influence",
    "normalize_influence",
    "rank_referees",
    "format_influence_report",
]


@dataclass(frozen=True)
class DiffusionConfig:
    """Knobs of the particle walk.

    ``decay`` is the fraction of a particle's energy lost per hop; particles
    retire once their energy magnitude drops below ``energy_floor`` (pure
    multiplicative decay never reaches zero exactly). Manuscript authors can
    optionally be seeded with negative-energy particles to depress their own
    neighborhood's influence.
    """

    particles_per_mention: int = 10
    initial_energy: float = 1.0
    decay: float = 0.5
    energy_floor: float = 1e-4
    rng_seed: int = 0
    author_penalty_enabled: bool = False
    author_penalty_energy: float = -1.0

    def __post_init__(self):
        if not (0.0 < self.decay <= 1.0):
            raise ValidationError(f"decay must be in (0, 1], got {self.decay}")
        if self.energy_floor <= 0.0:
            raise ValidationError(f"energy floor must be > 0, got {self.energy_floor}")
        if self.particles_per_mention < 1:
            raise ValidationError(
                f"particles per mention must be >= 1, got {self.particles_per_mention}"
            )
        if not (-1.0 <= self.author_penalty_energy <= 0.0):
            raise ValidationError(
                f"author penalty energy must be in [-1, 0], got {self.author_penalty_energy}"
            )


@dataclass
class SeedVector:
    """Initial particle placement.

    ``groups`` maps a node to its particle cohorts as (count, energy) pairs;
    positive cohorts come from citation mentions, negative ones from the
    author penalty. ``unmatched`` reports referenced authors that have no
    node in the graph and were skipped.
    """

    groups: dict[str, list[tuple[int, float]]] = field(default_factory=dict)
    unmatched: list[str] = field(default_factory=list)

    def add(self, node: str, count: int, energy: float) -> None:
        self.groups.setdefault(node, []).append((count, energy))

    def mass(self, node: str) -> float:
        return sum(count * energy for count, energy in self.groups.get(node, []))

    def net(self) -> dict[str, float]:
        """Net seed mass per node (expectation-mode seed vector)."""
        return {node: self.mass(node) for node in self.groups}

    @property
    def total_mass(self) -> float:
        return sum(self.mass(node) for node in self.groups)

    def __bool__(self) -> bool:
        return bool(self.groups)


def seed_particles(
    graph: StochasticGraph,
    references: list[CitedWork],
    manuscript_authors: list[AuthorKey],
    cfg: DiffusionConfig,
) -> SeedVector:
    """Place particles on the graph for one manuscript.

    Every mention of an author across the reference list earns that author's
    node ``particles_per_mention`` particles of ``initial_energy``. When the
    penalty is enabled, each manuscript author present in the graph
    additionally receives ``particles_per_mention`` penalty-energy particles.
    """
    mentions: dict[str, int] = {}
    unmatched: list[str] = []
    seen_unmatched: set[str] = set()
    for work in references:
        for author in work.authors:
            if author.canonical in graph:
                mentions[author.canonical] = mentions.get(author.canonical, 0) + 1
            elif author.canonical not in seen_unmatched:
                seen_unmatched.add(author.canonical)
                unmatched.append(author.display)

    seed = SeedVector(unmatched=unmatched)
    for node in sorted(mentions):
        seed.add(node, mentions[node] * cfg.particles_per_mention, cfg.initial_energy)
    if cfg.author_penalty_enabled and cfg.author_penalty_energy != 0.0:
        for author in manuscript_authors:
            if author.canonical in graph:
                seed.add(author.canonical, cfg.particles_per_mention, cfg.author_penalty_energy)
    return seed


# --------------------------------------------------------------------------
# Shared indexing helpers
# --------------------------------------------------------------------------


class _Indexed:
    """Array view of a StochasticGraph: nodes in sorted canonical order,
    per-node neighbor index arrays and cumulative probabilities."""

    def __init__(self, graph: StochasticGraph):
        self.names = sorted(graph.nodes)
        self.index = {name: i for i, name in enumerate(self.names)}
        self.targets: list[np.ndarray] = []
        self.cum_probs: list[np.ndarray] = []
        self.probs: list[np.ndarray] = []
        for name in self.names:
            edges = graph.out_edges(name)
            self.targets.append(np.array([self.index[t] for t, _ in edges], dtype=np.int64))
            p = np.array([p for _, p in edges], dtype=np.float64)
            self.probs.append(p)
            self.cum_probs.append(np.cumsum(p))

    def is_dangling(self, i: int) -> bool:
        return self.targets[i].size == 0


def _deposit_schedule(e0: float, cfg: DiffusionConfig) -> list[float]:
    """Per-event deposit amounts for one particle: schedule[0] is the seed
    deposit, schedule[h] the (pre-decay) energy deposited on hop h. Decay
    happens after each hop's deposit, so hop 1 re-deposits the seed energy
    and the particle retires once its post-decay magnitude falls below the
    floor."""
    schedule = [e0]
    energy = e0
    keep = 1.0 - cfg.decay
    if abs(energy) < cfg.energy_floor:
        return schedule
    while True:
        schedule.append(energy)
        energy *= keep
        if abs(energy) < cfg.energy_floor:
            return schedule
        if len(schedule) > 1_000_000:
            raise ValidationError("decay/floor combination yields an unreasonable walk length")


# --------------------------------------------------------------------------
# Monte-Carlo walk
# --------------------------------------------------------------------------


def run_diffusion(
    graph: StochasticGraph, seed: SeedVector, cfg: DiffusionConfig
) -> dict[str, float]:
    """Simulate the particle walk and return accumulated node energy.

    Deterministic for a given ``rng_seed``: the root seed sequence spawns one
    child stream per seed cohort, in (node, energy-descending) order, and
    particle i of a cohort consumes row i of that stream's pre-drawn uniform
    matrix. Cohorts are therefore independent and may run in parallel without
    changing any bit of the result.
    """
    if not seed:
        return {}
    idx = _Indexed(graph)
    for node in seed.groups:
        if node not in idx.index:
            raise ValidationError(f"seed mass on node absent from graph: {node!r}")

    deposits = np.zeros(len(idx.names), dtype=np.float64)
    cohorts: list[tuple[int, int, float]] = []
    for node in sorted(seed.groups):
        for count, energy in sorted(seed.groups[node], key=lambda g: -g[1]):
            cohorts.append((idx.index[node], count, energy))

    root = np.random.SeedSequence(cfg.rng_seed)
    streams = root.spawn(len(cohorts))
    for (start, count, e0), stream in zip(cohorts, streams):
        _walk_cohort(idx, start, count, e0, cfg, np.random.default_rng(stream), deposits)

    return {idx.names[i]: float(deposits[i]) for i in range(len(idx.names)) if deposits[i] != 0.0}


def _walk_cohort(
    idx: _Indexed,
    start: int,
    count: int,
    e0: float,
    cfg: DiffusionConfig,
    rng: np.random.Generator,
    deposits: np.ndarray,
) -> None:
    """Walk one cohort of identical particles in lockstep.

    All particles of a cohort share the same energy at every hop (decay
    depends on hop count only), so per hop we sample every particle's move,
    bincount arrivals, and deposit arrivals x energy.
    """
    schedule = _deposit_schedule(e0, cfg)
    deposits[start] += count * schedule[0]
    if idx.is_dangling(start) or len(schedule) == 1:
        return
    max_hops = len(schedule)  # schedule[1:] are the post-seed deposit energies
    uniforms = rng.random((count, max_hops))
    pos = np.full(count, start, dtype=np.int64)
    active = np.arange(count)
    for hop in range(1, max_hops + 1):
        if active.size == 0:
            break
        # sample each active particle's next node from its current node's
        # cumulative distribution
        cur = pos[active]
        draws = uniforms[active, hop - 1]
        nxt = np.empty(active.size, dtype=np.int64)
        for node in np.unique(cur):
            mask = cur == node
            choice = np.searchsorted(idx.cum_probs[node], draws[mask], side="right")
            choice = np.minimum(choice, idx.targets[node].size - 1)
            nxt[mask] = idx.targets[node][choice]
        pos[active] = nxt
        energy = schedule[hop] if hop < len(schedule) else schedule[-1] * (1.0 - cfg.decay)
        # hop h deposits the pre-decay energy, which equals schedule[h-1]
        deposits += np.bincount(nxt, minlength=deposits.size).astype(np.float64) * schedule[hop - 1]
        dangling = np.array([idx.is_dangling(int(p)) for p in nxt], dtype=bool)
        active = active[~dangling]


# --------------------------------------------------------------------------
# Exact expectation (verification oracle)
# --------------------------------------------------------------------------


def expected_influence(
    graph: StochasticGraph, seed: SeedVector | dict[str, float], ds: float
) -> dict[str, float]:
    """Exact expected node energy of the walk, by iterative mass propagation.

    Propagates the seed mass front through the transition probabilities,
    depositing the front at every hop and shrinking it by (1 - ds), until the
    remaining undelivered mass is below 1e-12. Dangling nodes absorb their
    arrivals. Equivalent to s + Pt (I - (1-ds) Pt)^-1 s without forming any
    matrix inverse.
    """
    if not (0.0 < ds <= 1.0):
        raise ValidationError(f"decay must be in (0, 1], got {ds}")
    net = seed.net() if isinstance(seed, SeedVector) else dict(seed)
    if not net:
        return {}
    idx = _Indexed(graph)
    for node in net:
        if node not in idx.index:
            raise ValidationError(f"seed mass on node absent from graph: {node!r}")

    n = len(idx.names)
    # flattened edge arrays for vectorized front propagation
    src = np.concatenate(
        [np.full(idx.targets[i].size, i, dtype=np.int64) for i in range(n)]
        or [np.empty(0, dtype=np.int64)]
    )
    dst = np.concatenate([idx.targets[i] for i in range(n)] or [np.empty(0, dtype=np.int64)])
    p = np.concatenate([idx.probs[i] for i in range(n)] or [np.empty(0, dtype=np.float64)])

    front = np.zeros(n, dtype=np.float64)
    for node, mass in net.items():
        front[idx.index[node]] = mass
    d = front.copy()
    keep = 1.0 - ds
    residual = 1e-12
    max_iter = 100_000
    for _ in range(max_iter):
        moved = np.zeros(n, dtype=np.float64)
        if src.size:
            np.add.at(moved, dst, front[src] * p)
        d += moved
        front = moved * keep
        # remaining future deposits are bounded by |front| x sum_k keep^k
        bound = np.abs(front).sum() * (1.0 / ds)
        if bound < residual:
            break
    else:
        raise ValidationError("expected-value propagation failed to converge")
    return {idx.names[i]: float(d[i]) for i in range(n) if d[i] != 0.0}


# --------------------------------------------------------------------------
# Normalization and ranking
# --------------------------------------------------------------------------


@dataclass
class InfluenceMap:
    """Normalized influence shares, descending with lexicographic tie-break.

    Only nodes with positive influence appear; entries sum to 1 whenever the
    map is non-empty.
    """

    entries: list[tuple[AuthorKey, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def get(self, canonical: str) -> float:
        for key, value in self.entries:
            if key.canonical == canonical:
                return value
        return 0.0

    def authors(self) -> list[AuthorKey]:
        return [key for key, _ in self.entries]

    @property
    def total(self) -> float:
        return math.fsum(v for _, v in self.entries)


def normalize_influence(
    energy: dict[str, float], keys: dict[str, AuthorKey] | None = None
) -> InfluenceMap:
    """Normalize node energies into influence shares.

    Negative energies (possible under the author penalty) are clamped to 0
    first; the remainder is divided by its total. A zero total yields the
    empty map. ``keys`` supplies display names; canonical-only keys are
    synthesized when absent.
    """
    clamped = {node: e for node, e in energy.items() if e > 0.0}
    total = math.fsum(clamped[node] for node in sorted(clamped))
    if total <= 0.0:
        return InfluenceMap()
    entries = []
    for node in sorted(clamped):
        key = keys.get(node) if keys else None
        entries.append((key or AuthorKey(node, node), clamped[node] / total))
    entries.sort(key=lambda item: (-item[1], item[0].canonical))
    return InfluenceMap(entries=entries)


@dataclass
class Ranking:
    """Referee ranking for one manuscript plus its diagnostics."""

    influence: InfluenceMap
    unmatched: list[str] = field(default_factory=list)
    excluded: list[AuthorKey] = field(default_factory=list)


def rank_referees(
    graph: StochasticGraph,
    record: PaperRecord,
    cfg: DiffusionConfig,
    exact: bool = False,
) -> Ranking:
    """Rank candidate referees for a manuscript.

    Seeds the graph from the record's references, runs the walk (the exact
    expectation when ``exact``), normalizes, and sorts. The manuscript's own
    authors are removed from the energy vector before normalization, so they
    can never appear in the roster regardless of the penalty setting.
    """
    if not record.references:
        raise ValidationError(f"record {record.identifier!r} has no references to seed from")
    seed = seed_particles(graph, record.references, record.authors, cfg)
    if not seed.groups:
        return Ranking(influence=InfluenceMap(), unmatched=seed.unmatched)
    if exact:
        energy = expected_influence(graph, seed, cfg.decay)
    else:
        energy = run_diffusion(graph, seed, cfg)
    excluded = []
    for author in record.authors:
        if author.canonical in energy:
            del energy[author.canonical]
        if author.canonical in graph:
            excluded.append(author)
    influence = normalize_influence(energy, keys=graph.nodes)
    return Ranking(influence=influence, unmatched=seed.unmatched, excluded=excluded)


def format_influence_report(influence: InfluenceMap) -> str:
    """Render an influence map as '<canonical> <share>' lines, descending,
    five decimal places."""
    return "\n".join(f"{key.canonical} {value:.5f}" for key, value in influence)
