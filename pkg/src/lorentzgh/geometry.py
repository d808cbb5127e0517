"""Continuous generators: Lorentzian products over finite metric fibers.

The closed-form time separation of the scaled product  -C^2 dt^2 + h  over a
finite fiber drives sampling, explicit grid nets, and the nested-cone family
(cone scale 1 + 1/n). Warped metrics -beta dt^2 + omega(t)^2 h0 exist only
for the cone-domination check; their tau has no closed form here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import FiniteLorentzSpace, build_space, DEFAULT_TOL
from .errors import (AxiomViolation, EmptyPlan, EpsilonTooLarge, NotAFiberNet,
                     ShapeMismatch, UnsupportedMetricFamily)
from .extended import NEG_INF
from .nets import DiamondNet


@dataclass(frozen=True)
class FiniteMetricFiber:
    labels: tuple[str, ...]
    d: np.ndarray

    @property
    def n(self) -> int:
        return len(self.labels)

    def scaled(self, factor: float) -> "FiniteMetricFiber":
        return build_fiber(self.labels, self.d * factor)


def build_fiber(labels: Sequence[str], d, tol: float = DEFAULT_TOL) -> FiniteMetricFiber:
    """Validate the metric axioms exhaustively and freeze the matrix."""
    d = np.array(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] != len(labels):
        raise ShapeMismatch(f"need a square matrix matching {len(labels)} labels")
    if (d < -tol).any() or np.isnan(d).any() or np.isinf(d).any():
        raise AxiomViolation("codomain", None, "fiber distances must be finite and nonnegative")
    if (np.abs(np.diagonal(d)) > tol).any():
        i = int(np.argmax(np.abs(np.diagonal(d)) > tol))
        raise AxiomViolation("diagonal", i, "fiber metric must vanish on the diagonal")
    if (np.abs(d - d.T) > tol).any():
        i, j = (int(v) for v in np.argwhere(np.abs(d - d.T) > tol)[0])
        raise AxiomViolation("symmetry", (i, j), "fiber metric must be symmetric")
    tri = d[:, :, None] + d[None, :, :] < d[:, None, :] - tol
    if tri.any():
        i, j, k = (int(v) for v in np.argwhere(tri)[0])
        raise AxiomViolation("triangle", (i, j, k), "fiber triangle inequality violated")
    d.flags.writeable = False
    return FiniteMetricFiber(labels=tuple(labels), d=d)


def circle_fiber(n: int, radius: float = 1.0) -> FiniteMetricFiber:
    """n equally spaced points on a circle with the geodesic (arc) metric."""
    step = 2 * math.pi * radius / n
    idx = np.arange(n)
    k = np.abs(idx[:, None] - idx[None, :])
    k = np.minimum(k, n - k)
    return build_fiber([f"s{i}" for i in range(n)], k * step)


def segment_fiber(n: int, length: float = 1.0) -> FiniteMetricFiber:
    """n equally spaced points on a geodesic segment of the given length."""
    xs = np.linspace(0.0, length, n)
    return build_fiber([f"s{i}" for i in range(n)], np.abs(xs[:, None] - xs[None, :]))


CONE_SCALE_LIMIT = "inf"


@dataclass(frozen=True)
class ProductGenerator:
    """Slab generator for ell((t,x),(t',x')) = sqrt(C^2 (t'-t)^2 - d(x,x')^2).

    cone_scale C is either explicit or (1 + 1/n) via `family_index` n; the
    family limit n = inf gives C = 1.
    """

    fiber: FiniteMetricFiber
    cone_scale: float
    t_range: tuple[float, float]
    family_index: Optional[Union[int, str]] = None

    def __post_init__(self):
        if not (self.cone_scale > 0):
            raise ShapeMismatch("cone_scale must be positive")
        if not (self.t_range[0] < self.t_range[1]):
            raise ShapeMismatch("t_range must be a nonempty interval")


def product_family(fiber: FiniteMetricFiber, n: Union[int, str],
                   t_range: tuple[float, float] = (-1.0, 1.0),
                   fiber_perturbation: Optional[Callable[[FiniteMetricFiber], FiniteMetricFiber]] = None,
                   ) -> ProductGenerator:
    """Member Y_n of the nested-cone family, cone scale 1 + 1/n (n = 'inf' -> 1).

    The fiber-perturbation rate is the caller's choice; by default the fiber
    is held fixed across n.
    """
    if n == CONE_SCALE_LIMIT:
        scale = 1.0
    else:
        if not (isinstance(n, int) and n >= 1):
            raise ShapeMismatch("family index must be a positive integer or 'inf'")
        scale = 1.0 + 1.0 / n
    fib = fiber_perturbation(fiber) if fiber_perturbation else fiber
    return ProductGenerator(fiber=fib, cone_scale=scale, t_range=t_range, family_index=n)


Point = tuple[float, int]  # (time, fiber site index)


_NULL_SNAP = 8 * np.finfo(float).eps


def product_ell(gen: ProductGenerator, p: Point, q: Point) -> float:
    """Extended time separation of the product; NEG_INF off the causal cone.

    Pairs within a few ulps of the null boundary snap to an exact 0: the
    sqrt otherwise amplifies 1-ulp input noise to ~1e-9 values that break
    downstream reverse-triangle checks on grid-aligned samples.
    """
    t, i = p
    s, j = q
    dt = s - t
    if dt < 0:
        return NEG_INF
    d = gen.fiber.d[i, j]
    c = gen.cone_scale
    margin = c * dt - d
    scale = _NULL_SNAP * max(c * dt, d)
    if margin < -scale:
        return NEG_INF
    if margin <= scale:
        return 0.0
    return math.sqrt(max(c * c * dt * dt - d * d, 0.0))


def product_tau(gen: ProductGenerator, p: Point, q: Point) -> float:
    """max(0, product_ell); the pre asks points to sit inside t_range."""
    for t, i in (p, q):
        if not (gen.t_range[0] - 1e-12 <= t <= gen.t_range[1] + 1e-12):
            raise ShapeMismatch(f"time {t} outside generator range {gen.t_range}")
        if not (0 <= i < gen.fiber.n):
            raise ShapeMismatch(f"fiber index {i} out of range")
    return max(0.0, product_ell(gen, p, q))


def _ell_matrix(gen: ProductGenerator, points: Sequence[Point]) -> np.ndarray:
    ts = np.array([p[0] for p in points])
    sites = np.array([p[1] for p in points], dtype=int)
    dt = ts[None, :] - ts[:, None]
    d = gen.fiber.d[np.ix_(sites, sites)]
    c = gen.cone_scale
    margin = c * dt - d
    scale = _NULL_SNAP * np.maximum(c * np.abs(dt), d)
    causal = (dt >= 0) & (margin >= -scale)
    val = np.sqrt(np.maximum(c * c * dt * dt - d * d, 0.0))
    val[(dt >= 0) & (np.abs(margin) <= scale)] = 0.0
    return np.where(causal, val, NEG_INF)


@dataclass(frozen=True)
class SamplePlan:
    """Discretization: а time grid plus a choice of fiber sites.

    A non-None seed jitters interior grid times uniformly within a fifth of
    the step (order preserving), for irregular-sample variants.
    """

    time_step: float
    fiber_sites: Union[str, tuple[int, ...]] = "all"
    seed: Optional[int] = None

    def __post_init__(self):
        if not (self.time_step > 0):
            raise ShapeMismatch("time_step must be positive")


@dataclass(frozen=True)
class SampledSpace:
    """A sampled product: the finite space plus its generating points."""

    space: FiniteLorentzSpace
    points: tuple[Point, ...]
    generator: ProductGenerator

    def index_of(self, point: Point, tol: float = 1e-12) -> int:
        for k, (t, i) in enumerate(self.points):
            if i == point[1] and abs(t - point[0]) <= tol:
                return k
        raise KeyError(point)


def point_label(gen: ProductGenerator, p: Point) -> str:
    return f"({p[0]!r},{gen.fiber.labels[p[1]]})"


def sample_spacetime(gen: ProductGenerator, plan: SamplePlan,
                     t_window: Optional[tuple[float, float]] = None,
                     extra_points: Sequence[Point] = ()) -> SampledSpace:
    """Sample the time grid x fiber sites and validate the resulting space.

    `t_window` restricts the grid inside the generator range; `extra_points`
    adjoins e.g. grid-net vertices so nets embed into the sample.
    """
    lo, hi = t_window if t_window is not None else gen.t_range
    if not (gen.t_range[0] - 1e-12 <= lo < hi <= gen.t_range[1] + 1e-12):
        raise ShapeMismatch(f"window {(lo, hi)} outside generator range {gen.t_range}")
    m = int(math.floor((hi - lo) / plan.time_step + 1e-9)) + 1
    times = [lo + k * plan.time_step for k in range(m)]
    if plan.seed is not None and m > 2:
        rng = np.random.default_rng(plan.seed)
        jitter = rng.uniform(-plan.time_step / 5, plan.time_step / 5, size=m - 2)
        times = [times[0]] + [t + j for t, j in zip(times[1:-1], jitter)] + [times[-1]]
    sites = range(gen.fiber.n) if plan.fiber_sites == "all" else plan.fiber_sites
    sites = list(sites)
    if not times or not sites:
        raise EmptyPlan("plan resolves to no sample points")
    points = [(t, s) for t in times for s in sites]
    for p in extra_points:
        if all(not (abs(p[0] - t) <= 1e-12 and p[1] == s) for t, s in points):
            points.append((float(p[0]), int(p[1])))
    labels = [point_label(gen, p) for p in points]
    space = build_space(labels, _ell_matrix(gen, points))
    return SampledSpace(space=space, points=tuple(points), generator=gen)


# ---------------------------------------------------------------------------
# explicit grid nets for the slab
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridNet:
    """Grid net as raw product points (pre-embedding)."""

    vertex_points: tuple[Point, ...]
    pairs: tuple[tuple[int, int], ...]  # indices into vertex_points
    epsilon: float                       # exact in-generator tau of each diamond
    columns: int                         # diamonds per fiber site

    def __len__(self) -> int:
        return len(self.pairs)


def _check_fiber_net(gen: ProductGenerator, fiber_net: Sequence[int], radius: float) -> None:
    net = sorted(set(fiber_net))
    if not net:
        raise NotAFiberNet(None, "empty fiber net")
    dmin = gen.fiber.d[:, net].min(axis=1)
    bad = np.flatnonzero(dmin >= radius)
    if bad.size:
        raise NotAFiberNet(int(bad[0]))


def _grid(gen: ProductGenerator, t_lo: float, t_hi: float, epsilon: float,
          fiber_net: Sequence[int]) -> GridNet:
    c = gen.cone_scale
    _check_fiber_net(gen, fiber_net, c * epsilon / 3.0)
    step = epsilon / 3.0
    # each diamond J(x_{i-1,j}, x_{i+2,j}) robustly covers the time window
    # [t_i, t_{i+1}] of width step, so spanning [t_lo, t_hi] takes
    # ceil((t_hi - t_lo)/step) columns
    columns = max(1, math.ceil((t_hi - t_lo) / step - 1e-12))
    net_sites = sorted(set(fiber_net))
    if t_lo - step < gen.t_range[0] - 1e-12 or t_lo + (columns + 1) * step > gen.t_range[1] + 1e-12:
        raise ShapeMismatch("grid vertices would leave the generator t_range")
    vertices: list[Point] = []
    index: dict[tuple[int, int], int] = {}
    for i in range(-1, columns + 2):
        for j, s in enumerate(net_sites):
            index[(i, j)] = len(vertices)
            vertices.append((t_lo + i * step, s))
    pairs = [(index[(i - 1, j)], index[(i + 2, j)])
             for i in range(columns) for j in range(len(net_sites))]
    return GridNet(vertex_points=tuple(vertices), pairs=tuple(pairs),
                   epsilon=c * epsilon, columns=columns)


def grid_net_product(gen: ProductGenerator, t_minus: float, t_plus: float,
                     epsilon: float, fiber_net: Sequence[int]) -> GridNet:
    """Slab-covering net of axis-aligned diamonds on the epsilon/3 time grid.

    Vertices are (t_minus + i*eps/3, s_j) with diamonds J(x_{i-1,j}, x_{i+2,j});
    the fiber net must be a (C*eps/3)-net. Every diamond has in-generator
    tau = C*eps exactly (recorded as the net's epsilon).
    """
    if not (0 < epsilon <= t_minus):
        raise EpsilonTooLarge(f"need 0 < epsilon <= t_minus, got {epsilon} vs {t_minus}")
    if not (t_minus < t_plus):
        raise ShapeMismatch("need t_minus < t_plus")
    return _grid(gen, t_minus, t_plus, epsilon, fiber_net)


def slab_net(gen: ProductGenerator, t_lo: float, t_hi: float, epsilon: float,
             fiber_net: Sequence[int]) -> GridNet:
    """Grid net for an arbitrary slab inside t_range (vertices may dip below t_lo)."""
    if not (t_lo < t_hi):
        raise ShapeMismatch("need t_lo < t_hi")
    if epsilon <= 0:
        raise EpsilonTooLarge("epsilon must be positive")
    return _grid(gen, t_lo, t_hi, epsilon, fiber_net)


def uncovered_samples(gen: ProductGenerator, net: GridNet,
                      points: Sequence[Point]) -> list[int]:
    """Indices of `points` not inside any net diamond (direct membership scan)."""
    ts = np.array([p[0] for p in points])
    sites = np.array([p[1] for p in points], dtype=int)
    c = gen.cone_scale
    covered = np.zeros(len(points), dtype=bool)
    for a, b in net.pairs:
        t1, s1 = net.vertex_points[a]
        t2, s2 = net.vertex_points[b]
        d1 = gen.fiber.d[s1, sites]
        d2 = gen.fiber.d[s2, sites]
        inside = (ts >= t1) & (c * (ts - t1) >= d1) & (ts <= t2) & (c * (t2 - ts) >= d2)
        covered |= inside
    return [int(i) for i in np.flatnonzero(~covered)]


def embed_net(net: GridNet, sampled: SampledSpace) -> DiamondNet:
    """Resolve grid-net vertices to indices of a sample that contains them."""
    lookup = {}
    for k, (t, s) in enumerate(sampled.points):
        lookup[(round(t, 12), s)] = k
    pairs = []
    for a, b in net.pairs:
        ka = lookup.get((round(net.vertex_points[a][0], 12), net.vertex_points[a][1]))
        kb = lookup.get((round(net.vertex_points[b][0], 12), net.vertex_points[b][1]))
        if ka is None or kb is None:
            raise ShapeMismatch("sample does not contain a net vertex; pass extra_points")
        pairs.append((ka, kb))
    return DiamondNet(pairs=tuple(pairs), epsilon=net.epsilon)


def net_vertex_points(net: GridNet) -> tuple[Point, ...]:
    used = sorted({i for pair in net.pairs for i in pair})
    return tuple(net.vertex_points[i] for i in used)


# ---------------------------------------------------------------------------
# cone domination for warped metrics -beta dt^2 + omega(t)^2 h0
# ---------------------------------------------------------------------------


def cone_dominates(coarse: tuple[float, FiniteMetricFiber],
                   fine: tuple[Union[float, Callable], Union[float, Callable]],
                   t_samples: Sequence[float] = (0.0,),
                   direction_samples: int = 32,
                   seed: int = 0) -> dict:
    """Check that rho_C-causal directions are causal for -beta dt^2 + omega^2 h0.

    Constant beta/omega get the analytic certificate (inf beta / sup omega^2
    >= C^2); otherwise directions |v_x| <= C (with v_t = 1) are sampled per
    (t, site), always including the extreme ray |v_x| = C.
    """
    c, fiber = coarse
    beta, omega = fine
    analytic = not callable(beta) and not callable(omega)
    if analytic:
        b, w = float(beta), float(omega)
        if not (0 < b <= 1):
            raise UnsupportedMetricFamily(f"beta must lie in (0, 1], got {b}")
        if not (w > 0):
            raise UnsupportedMetricFamily(f"omega must be positive, got {w}")
        holds = b / (w * w) >= c * c
        return {"holds": bool(holds), "witness": None if holds else (t_samples[0], 0, c),
                "certificate": "analytic"}

    beta_f = beta if callable(beta) else (lambda t, s, _b=float(beta): _b)
    omega_f = omega if callable(omega) else (lambda t, _w=float(omega): _w)
    rng = np.random.default_rng(seed)
    for t in t_samples:
        w = float(omega_f(t))
        if not (w > 0):
            raise UnsupportedMetricFamily(f"omega({t}) must be positive")
        vx = np.concatenate([[0.0, c], rng.uniform(0.0, c, size=max(0, direction_samples - 2))])
        for s in range(fiber.n):
            b = float(beta_f(t, s))
            if not (0 < b <= 1):
                raise UnsupportedMetricFamily(f"beta({t}, site {s}) must lie in (0, 1]")
            bad = vx[b < (w * w) * vx * vx - 1e-15]
            if bad.size:
                return {"holds": False, "witness": (float(t), int(s), float(bad[0])),
                        "certificate": "sampled"}
    return {"holds": True, "witness": None, "certificate": "sampled"}
