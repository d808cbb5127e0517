"""Causal-diamond epsilon-nets: verification, greedy construction, doubling.

A net is an ordered list of vertex pairs (p, q); the diamond of a pair is
J(p, q) = J+(p) & J-(q) in a given space. Ordering matters downstream
(induced measures depend on it), so nets are sequences, not sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import CoveredFiniteSpace, FiniteLorentzSpace
from .errors import Uncoverable

ALL_CANDIDATES = "all"
CHRONOLOGICAL_CANDIDATES = "chronological"


@dataclass(frozen=True)
class DiamondNet:
    pairs: tuple[tuple[int, int], ...]
    epsilon: float

    def __len__(self) -> int:
        return len(self.pairs)

    def vertices(self) -> tuple[int, ...]:
        """V(S): all diamond vertices, ascending, deduplicated."""
        seen = set()
        for p, q in self.pairs:
            seen.add(p)
            seen.add(q)
        return tuple(sorted(seen))


@dataclass(frozen=True)
class NetCheck:
    ok: bool
    uncovered: tuple[int, ...]
    oversized: tuple[tuple[int, int], ...]


def diamond_mask(space: FiniteLorentzSpace, p: int, q: int) -> np.ndarray:
    return space.causal[p, :] & space.causal[:, q]


def verify_net(space: FiniteLorentzSpace, subset: Sequence[int], net: DiamondNet) -> NetCheck:
    """Check coverage of `subset` and the tau <= epsilon size bound."""
    idx = np.array(sorted(set(subset)), dtype=int)
    covered = np.zeros(space.n, dtype=bool)
    oversized = []
    for p, q in net.pairs:
        covered |= diamond_mask(space, p, q)
        if space.tau(p, q) > net.epsilon + space.tol:
            oversized.append((p, q))
    uncovered = tuple(int(i) for i in idx[~covered[idx]])
    return NetCheck(ok=not uncovered and not oversized,
                    uncovered=uncovered, oversized=tuple(oversized))


def default_candidates(space: FiniteLorentzSpace, epsilon: float,
                       mode: str = ALL_CANDIDATES) -> list[tuple[int, int]]:
    """Admissible diamonds: causal pairs with tau <= epsilon.

    ALL includes degenerate (x, x) diamonds, needed to cover chronologically
    isolated points; CHRONOLOGICAL restricts to tau > 0.
    """
    ok = space.causal & (space.tau_matrix() <= epsilon + space.tol)
    if mode == CHRONOLOGICAL_CANDIDATES:
        ok = ok & space.chron
    return [(int(p), int(q)) for p, q in np.argwhere(ok)]


def _candidate_masks(space: FiniteLorentzSpace, candidates, subset_idx):
    """Boolean matrix: candidate x subset membership."""
    m = np.empty((len(candidates), len(subset_idx)), dtype=bool)
    for r, (p, q) in enumerate(candidates):
        m[r, :] = diamond_mask(space, p, q)[subset_idx]
    return m


def greedy_net(space: FiniteLorentzSpace, subset: Sequence[int], epsilon: float,
               candidates: Optional[Sequence[tuple[int, int]]] = None,
               seed_pairs: Sequence[tuple[int, int]] = (),
               candidate_mode: str = ALL_CANDIDATES) -> DiamondNet:
    """Greedy maximum-new-coverage cover of `subset` by admissible diamonds.

    `seed_pairs` are prepended unconditionally (used for net nesting across
    cover levels). Ties break by (p, q) ascending; output is deterministic.
    """
    subset_idx = np.array(sorted(set(subset)), dtype=int)
    if candidates is None:
        candidates = default_candidates(space, epsilon, candidate_mode)
    candidates = sorted(set(candidates))

    chosen: list[tuple[int, int]] = []
    covered = np.zeros(len(subset_idx), dtype=bool)
    for p, q in seed_pairs:
        chosen.append((p, q))
        covered |= diamond_mask(space, p, q)[subset_idx]

    if covered.all():
        return DiamondNet(pairs=tuple(chosen), epsilon=epsilon)

    masks = _candidate_masks(space, candidates, subset_idx)
    reachable = covered | masks.any(axis=0)
    if not reachable.all():
        missing = [int(i) for i in subset_idx[~reachable]]
        raise Uncoverable(missing)

    active = np.ones(len(candidates), dtype=bool)
    while not covered.all():
        gains = (masks & ~covered[None, :]).sum(axis=1)
        gains[~active] = 0
        best = int(np.argmax(gains))  # argmax takes the first max: (p, q) ascending
        if gains[best] == 0:
            missing = [int(i) for i in subset_idx[~covered]]
            raise Uncoverable(missing)
        chosen.append(candidates[best])
        covered |= masks[best]
        active[best] = False
    return DiamondNet(pairs=tuple(chosen), epsilon=epsilon)


def exact_min_cover(universe_size: int, sets: Sequence[np.ndarray]) -> Optional[list[int]]:
    """Smallest subfamily of boolean masks covering range(universe_size).

    Exhaustive (increasing cardinality); intended for universes <= ~12.
    Returns indices into `sets`, or None if even the full family fails.
    """
    full = np.zeros(universe_size, dtype=bool)
    for s in sets:
        full |= s
    if not full.all():
        return None
    for k in range(1, len(sets) + 1):
        for combo in itertools.combinations(range(len(sets)), k):
            acc = np.zeros(universe_size, dtype=bool)
            for i in combo:
                acc |= sets[i]
            if acc.all():
                return list(combo)
    return None


def doubling_constant(space: FiniteLorentzSpace, subset: Sequence[int],
                      exact_threshold: int = 12, return_details: bool = False):
    """Smallest N with: every diamond J(x,y) inside `subset` is covered by N
    half-tau-size diamonds with vertices in `subset`.

    Exact covers are computed when the diamond has <= exact_threshold points;
    larger diamonds get the greedy upper bound and the result is an estimate.
    """
    sub = sorted(set(subset))
    sub_set = set(sub)
    sub_arr = np.array(sub, dtype=int)
    exact = True
    worst = 1
    per_diamond = []
    for x in sub:
        for y in sub:
            if not space.causal[x, y]:
                continue
            mask = diamond_mask(space, x, y)
            members = [int(i) for i in np.flatnonzero(mask)]
            if not set(members).issubset(sub_set):
                continue  # only diamonds contained in the subset are constrained
            half = space.tau(x, y) / 2.0
            cand = [(int(p), int(q)) for p in sub for q in sub
                    if space.causal[p, q] and space.tau(p, q) <= half + space.tol]
            if not cand:
                raise Uncoverable(members)
            local = np.array(members, dtype=int)
            masks = [diamond_mask(space, p, q)[local] for p, q in cand]
            if len(members) <= exact_threshold:
                cover = exact_min_cover(len(members), masks)
                if cover is None:
                    raise Uncoverable(members)
                count = len(cover)
            else:
                net = greedy_net(space, members, half, candidates=cand)
                count = len(net)
                exact = False
            per_diamond.append(((x, y), count))
            worst = max(worst, count)
    if return_details:
        return worst, {"exact": exact, "per_diamond": per_diamond}
    return worst


@dataclass(frozen=True)
class NetGrowthTable:
    rows: tuple[tuple[int, float, int], ...]  # (cover level k, epsilon, cardinality)
    nets: dict  # (k, epsilon) -> DiamondNet

    def cardinality(self, k: int, epsilon: float) -> int:
        for kk, e, c in self.rows:
            if kk == k and e == epsilon:
                return c
        raise KeyError((k, epsilon))


def net_growth_profile(cov: CoveredFiniteSpace, epsilons: Sequence[float],
                       candidate_mode: str = ALL_CANDIDATES) -> NetGrowthTable:
    """Greedy nets per (cover level, epsilon), nested across levels.

    The level-k net reuses the level-(k-1) net as a seed, so vertex sets are
    nested in k for each fixed epsilon.
    """
    space = cov.space
    rows = []
    nets = {}
    for eps in epsilons:
        prev_pairs: tuple[tuple[int, int], ...] = ()
        for k in range(cov.depth):
            net = greedy_net(space, cov.level(k), eps,
                             seed_pairs=prev_pairs, candidate_mode=candidate_mode)
            rows.append((k, float(eps), len(net)))
            nets[(k, float(eps))] = net
            prev_pairs = net.pairs
    return NetGrowthTable(rows=tuple(rows), nets=nets)
