"""Causal sets as finite Lorentzian pre-length spaces.

ell(x, y) counts relation steps along the longest chain from x to y (so
ell(x, x) = 0 and unrelated pairs sit at -inf); sprinkling samples product
spacetimes uniformly and pulls back the causal order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .core import FiniteLorentzSpace, build_space
from .corr import min_distortion
from .errors import CycleDetected, EmptyRegion, ShapeMismatch
from .extended import NEG_INF
from .geometry import Point, ProductGenerator, _ell_matrix, point_label


@dataclass(frozen=True)
class CausalSet:
    """Elements plus a cover (Hasse-style) relation; order is its transitive closure."""

    elements: tuple[str, ...]
    covers: tuple[tuple[int, int], ...]

    @property
    def n(self) -> int:
        return len(self.elements)


def build_causet(elements: Sequence[str], covers: Sequence[tuple[int, int]]) -> CausalSet:
    n = len(elements)
    for a, b in covers:
        if not (0 <= a < n and 0 <= b < n):
            raise ShapeMismatch(f"cover pair ({a}, {b}) out of range")
        if a == b:
            raise CycleDetected(f"self-loop at element {a}")
    c = CausalSet(elements=tuple(elements), covers=tuple(sorted(set((int(a), int(b)) for a, b in covers))))
    _topological_order(c)  # raises on cycles
    return c


def _topological_order(c: CausalSet) -> list[int]:
    indeg = [0] * c.n
    out: dict[int, list[int]] = {i: [] for i in range(c.n)}
    for a, b in c.covers:
        out[a].append(b)
        indeg[b] += 1
    queue = sorted(i for i in range(c.n) if indeg[i] == 0)
    order = []
    from heapq import heapify, heappop, heappush
    heapify(queue)
    while queue:
        v = heappop(queue)
        order.append(v)
        for w in out[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heappush(queue, w)
    if len(order) != c.n:
        raise CycleDetected("cover relation contains a cycle")
    return order


def chain_ell(c: CausalSet) -> FiniteLorentzSpace:
    """Longest-chain step counts by dynamic programming over a topological order."""
    order = _topological_order(c)
    n = c.n
    parents: dict[int, list[int]] = {i: [] for i in range(n)}
    for a, b in c.covers:
        parents[b].append(a)
    D = np.full((n, n), NEG_INF)
    np.fill_diagonal(D, 0.0)
    for v in order:
        for u in parents[v]:
            # every chain to u extends by one step to v
            reach = D[:, u] > NEG_INF
            D[reach, v] = np.maximum(D[reach, v], D[reach, u] + 1.0)
    return build_space(c.elements, D)


def order_relation(c: CausalSet) -> np.ndarray:
    """Reflexive reachability matrix of the causet order."""
    space = chain_ell(c)
    return space.causal.copy()


def sprinkle(gen: ProductGenerator, region: tuple[float, float], count: int,
             seed: int):
    """Uniform seeded sample of the product region with the induced order.

    Times are uniform in [t-, t+], fiber sites uniform over the fiber; the
    returned site map realizes each element as its sample point.
    """
    lo, hi = region
    if not (gen.t_range[0] - 1e-12 <= lo < hi <= gen.t_range[1] + 1e-12):
        raise EmptyRegion(f"region {region} outside generator range {gen.t_range}")
    if count < 1:
        raise EmptyRegion("count must be >= 1")
    rng = np.random.default_rng(seed)
    ts = np.sort(rng.uniform(lo, hi, size=count))
    sites = rng.integers(0, gen.fiber.n, size=count)
    points: list[Point] = [(float(t), int(s)) for t, s in zip(ts, sites)]

    ell = _ell_matrix(gen, points)
    strict = np.isfinite(ell)
    np.fill_diagonal(strict, False)
    # covers = strict relation minus two-step compositions (transitive reduction)
    two_step = (strict.astype(np.uint8) @ strict.astype(np.uint8)) > 0
    covers = [(int(a), int(b)) for a, b in np.argwhere(strict & ~two_step)]
    labels = [f"e{k}|{point_label(gen, p)}" for k, p in enumerate(points)]
    causet = build_causet(labels, covers)
    site_map = {k: points[k] for k in range(count)}
    return causet, site_map


def faithful_embed_check(c: CausalSet, space: FiniteLorentzSpace,
                         mapping: Union[dict[int, int], Callable[[int], int]],
                         one_directional: bool = False) -> dict:
    """Order preservation of element -> point maps.

    Default checks both directions (x <= y iff phi(x) <= phi(y));
    one_directional keeps only the forward implication, the literal reading.
    """
    if isinstance(mapping, dict):
        get = mapping.get
    else:
        def get(i, _f=mapping):
            return _f(i)
    phi = []
    for i in range(c.n):
        j = get(i)
        if j is None or not (0 <= j < space.n):
            raise ShapeMismatch(f"element {i} has no valid image")
        phi.append(int(j))
    rel = order_relation(c)
    forward, reverse = [], []
    for a in range(c.n):
        for b in range(c.n):
            if a == b:
                continue
            if rel[a, b] and not space.causal[phi[a], phi[b]]:
                forward.append((a, b))
            if not one_directional and space.causal[phi[a], phi[b]] and not rel[a, b]:
                reverse.append((a, b))
    faithful = not forward and not reverse
    return {"faithful": faithful,
            "witnesses": {"forward": forward, "reverse": reverse}}


def _restriction_space(gen: ProductGenerator, points: Sequence[Point]) -> FiniteLorentzSpace:
    labels = [f"e{k}|{point_label(gen, p)}" for k, p in enumerate(points)]
    return build_space(labels, _ell_matrix(gen, points))


def hauptvermutung_trial(gen_a: ProductGenerator, gen_b: ProductGenerator,
                         counts: Sequence[int], seed: int,
                         region: Union[tuple[float, float], None] = None) -> dict:
    """Desk-scale evidence runs: sprinkle into A, transport sites into B.

    Both generators must share the fiber label set so the site transport is
    the identity on (t, site). Reports, per count, the distortion between
    the two sampled-spacetime restrictions and between the chain-ell spaces;
    distortion tending to zero is evidence for isometry, a floor against.
    """
    if gen_a.fiber.labels != gen_b.fiber.labels:
        raise ShapeMismatch("generators must share a fiber label set for site transport")
    if region is None:
        lo = max(gen_a.t_range[0], gen_b.t_range[0])
        hi = min(gen_a.t_range[1], gen_b.t_range[1])
        region = (lo, hi)
    rows = []
    master = np.random.default_rng(seed)
    for count in counts:
        sub_seed = int(master.integers(0, 2**63 - 1))
        causet, site_map = sprinkle(gen_a, region, count, sub_seed)
        points = [site_map[k] for k in range(count)]
        space_a = _restriction_space(gen_a, points)
        space_b = _restriction_space(gen_b, points)
        _, tau_dis = min_distortion(space_a, space_b, mode="heuristic", seed=sub_seed)

        chain_a = chain_ell(causet)
        # order induced by B on the same transported sites
        strict_b = np.isfinite(space_b.ell)
        np.fill_diagonal(strict_b, False)
        two = (strict_b.astype(np.uint8) @ strict_b.astype(np.uint8)) > 0
        covers_b = [(int(a), int(b)) for a, b in np.argwhere(strict_b & ~two)]
        chain_b = chain_ell(build_causet(causet.elements, covers_b))
        _, chain_dis = min_distortion(chain_a, chain_b, mode="heuristic", seed=sub_seed)

        rows.append({"count": int(count), "seed": sub_seed,
                     "tau_distortion": float(tau_dis),
                     "chain_distortion": float(chain_dis)})
    return {"region": list(region), "rows": rows}
