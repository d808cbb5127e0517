"""Finite Lorentzian pre-length spaces.

A space is a labeled point set with an extended-time matrix `ell` whose
entries live in {-inf} union [0, inf). Construction validates the reverse
triangle inequality and the nonnegative diagonal; causal relation tables
are cached eagerly so downstream operations are table lookups.

All types are immutable after construction and every operation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (AxiomViolation, CapExceeded, EmptySubset, PrePDPRequired,
                     ShapeMismatch, SizeMismatch)
from .extended import gap_matrix

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class FiniteLorentzSpace:
    """Point labels plus the extended time separation matrix.

    `tol` is the equality tolerance for finite entries; constructed
    (exact) matrices work with any tol, float-sampled ones need slack.
    """

    labels: tuple[str, ...]
    ell: np.ndarray
    tol: float = DEFAULT_TOL
    # cached relation tables, filled by build_space
    chron: np.ndarray = field(repr=False, default=None)
    causal: np.ndarray = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def tau(self, i: int, j: int) -> float:
        return max(0.0, self.ell[i, j])

    def tau_matrix(self) -> np.ndarray:
        return np.maximum(0.0, self.ell)

    def future(self, i: int) -> np.ndarray:
        """J+(i) as a boolean mask."""
        return self.causal[i, :]

    def past(self, i: int) -> np.ndarray:
        """J-(i) as a boolean mask."""
        return self.causal[:, i]

    def diamond(self, p: int, q: int) -> np.ndarray:
        """J(p, q) = J+(p) & J-(q) as a boolean mask."""
        return self.causal[p, :] & self.causal[:, q]

    def chron_future(self, i: int) -> np.ndarray:
        return self.chron[i, :]

    def chron_past(self, i: int) -> np.ndarray:
        return self.chron[:, i]

    def chron_diamond(self, p: int, q: int) -> np.ndarray:
        """I(p, q) as a boolean mask."""
        return self.chron[p, :] & self.chron[:, q]

    def restrict(self, indices: Sequence[int]) -> "FiniteLorentzSpace":
        """Subspace on `indices` (order preserved); revalidation is unnecessary."""
        idx = list(indices)
        sub = self.ell[np.ix_(idx, idx)].copy()
        return _finish(tuple(self.labels[i] for i in idx), sub, self.tol)


def _finish(labels, ell, tol) -> FiniteLorentzSpace:
    """Attach relation tables without re-running axiom checks."""
    ell = np.asarray(ell, dtype=float)
    ell.flags.writeable = False
    chron = ell > 0.0
    causal = np.isfinite(ell)
    chron.flags.writeable = False
    causal.flags.writeable = False
    return FiniteLorentzSpace(labels=tuple(labels), ell=ell, tol=tol,
                              chron=chron, causal=causal)


def validate_matrix(ell: np.ndarray, tol: float) -> None:
    """Raise AxiomViolation on codomain, diagonal or reverse-triangle failures."""
    n = ell.shape[0]
    if np.isnan(ell).any() or np.isposinf(ell).any():
        bad = np.argwhere(np.isnan(ell) | np.isposinf(ell))[0]
        raise AxiomViolation("codomain", tuple(int(v) for v in bad),
                             "entries must lie in {-inf} union [0, inf)")
    finite = np.isfinite(ell)
    neg = finite & (ell < -tol)
    if neg.any():
        bad = np.argwhere(neg)[0]
        raise AxiomViolation("codomain", tuple(int(v) for v in bad),
                             "negative finite entry")
    diag = np.diagonal(ell)
    bad_diag = ~np.isfinite(diag) | (diag < -tol)
    if bad_diag.any():
        i = int(np.argmax(bad_diag))
        raise AxiomViolation("diagonal", i, f"ell[{i}][{i}] must be >= 0")
    # reverse triangle: ell[i,j] + ell[j,k] <= ell[i,k]; -inf absorbs on the left.
    # chunked over i to keep the (n, n, n) broadcast out of memory
    block = max(1, int(2_000_000 // max(n * n, 1)) or 1)
    for start in range(0, n, block):
        stop = min(start + block, n)
        lhs = ell[start:stop, :, None] + ell[None, :, :]
        rhs = ell[start:stop, None, :]
        viol = lhs > rhs + tol
        if viol.any():
            i, j, k = (int(v) for v in np.argwhere(viol)[0])
            raise AxiomViolation("reverse-triangle", (start + i, j, k),
                                 f"ell[{start + i}][{j}] + ell[{j}][{k}] > ell[{start + i}][{k}]")


def build_space(labels: Sequence[str], ell, tol: float = DEFAULT_TOL) -> FiniteLorentzSpace:
    """Validate axioms and return the space with cached relation tables."""
    ell = np.array(ell, dtype=float)
    if ell.ndim != 2 or ell.shape[0] != ell.shape[1]:
        raise ShapeMismatch(f"ell must be square, got shape {ell.shape}")
    if ell.shape[0] != len(labels):
        raise ShapeMismatch(f"{len(labels)} labels but {ell.shape[0]}x{ell.shape[1]} matrix")
    if len(set(labels)) != len(labels):
        raise ShapeMismatch("labels must be unique")
    validate_matrix(ell, tol)
    return _finish(labels, ell, tol)


@dataclass(frozen=True)
class CausalityReport:
    chronological: bool
    causal: bool
    pdp: bool
    witnesses: dict

    def __eq__(self, other):
        if not isinstance(other, CausalityReport):
            return NotImplemented
        return (self.chronological, self.causal, self.pdp) == \
               (other.chronological, other.causal, other.pdp)


def _indistinguishable_pairs(space: FiniteLorentzSpace) -> list[tuple[int, int]]:
    """Pairs i<j with identical ell-rows and ell-columns (within tol)."""
    ell, tol, n = space.ell, space.tol, space.n
    if n <= 64:
        rows = gap_matrix(ell[:, None, :], ell[None, :, :])   # (i, j, z)
        cols = gap_matrix(ell.T[:, None, :], ell.T[None, :, :])
        eq = (rows <= tol).all(axis=2) & (cols <= tol).all(axis=2)
        return [(int(i), int(j)) for i, j in np.argwhere(np.triu(eq, 1))]
    out = []
    for i in range(n):
        row_i, col_i = ell[i, :], ell[:, i]
        for j in range(i + 1, n):
            if (gap_matrix(row_i, ell[j, :]) <= tol).all() and \
               (gap_matrix(col_i, ell[:, j]) <= tol).all():
                out.append((i, j))
    return out


def causality_class(space: FiniteLorentzSpace) -> CausalityReport:
    """Exhaustive scan for the chronological / causal / PDP conditions."""
    diag = np.diagonal(space.ell)
    chron_bad = [int(i) for i in np.flatnonzero(diag > space.tol)]

    sym = (space.causal & space.causal.T).copy()
    np.fill_diagonal(sym, False)
    causal_bad = [(int(i), int(j)) for i, j in np.argwhere(sym) if i < j]

    pdp_bad = _indistinguishable_pairs(space)

    return CausalityReport(
        chronological=not chron_bad,
        causal=not causal_bad,
        pdp=not pdp_bad,
        witnesses={"chronological": chron_bad, "causal": causal_bad, "pdp": pdp_bad},
    )


def quotient_tau_indistinguishable(space: FiniteLorentzSpace):
    """Collapse ell-indistinguishable points.

    Classes are connected components of the pairwise indistinguishability
    relation (a true equivalence for exact inputs); the representative is
    the lowest original index. Returns (quotient space, projection array).
    """
    n = space.n
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in _indistinguishable_pairs(space):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    roots = sorted({find(i) for i in range(n)})
    class_of_root = {r: c for c, r in enumerate(roots)}
    projection = np.array([class_of_root[find(i)] for i in range(n)], dtype=int)
    ell_q = space.ell[np.ix_(roots, roots)].copy()
    labels_q = tuple(space.labels[r] for r in roots)
    return _finish(labels_q, ell_q, space.tol), projection


def classify_special_points(space: FiniteLorentzSpace) -> dict[str, Optional[int]]:
    """Locate the spacelike-boundary and null-infinity points, if present.

    Requires (PDP); each pattern can match at most one point then. A
    1-point space returns all None (the patterns are vacuous there).
    """
    if not causality_class(space).pdp:
        raise PrePDPRequired("space must satisfy the point distinction property")
    result: dict[str, Optional[int]] = {"i0": None, "n_plus": None, "n_minus": None}
    n, ell, tol = space.n, space.ell, space.tol
    if n < 2:
        return result
    for p in range(n):
        if ell[p, p] > tol:
            continue
        others = [x for x in range(n) if x != p]
        col = ell[others, p]
        row = ell[p, others]
        if np.isneginf(col).all() and np.isneginf(row).all():
            result["i0"] = p
        elif (np.abs(col) <= tol).all() and np.isneginf(row).all():
            result["n_plus"] = p
        elif np.isneginf(col).all() and (np.abs(row) <= tol).all():
            result["n_minus"] = p
    return result


def timelike_diameter(space: FiniteLorentzSpace, subset: Sequence[int]) -> float:
    """sup of tau over subset x subset."""
    idx = list(subset)
    if not idx:
        raise EmptySubset("timelike diameter of the empty set")
    return max(0.0, float(space.ell[np.ix_(idx, idx)].max()))


def _entries_match(x: float, y: float, tol: float) -> bool:
    if x == y:  # covers -inf == -inf and exact finite hits
        return True
    if np.isneginf(x) or np.isneginf(y):
        return False
    return abs(x - y) <= tol


def _iso_extend(a, b, order, pos, image, used, tol):
    if pos == len(order):
        return True
    i = order[pos]
    ea, eb = a.ell, b.ell
    assigned = order[:pos]
    for cand in range(b.n):
        if used[cand]:
            continue
        if not _entries_match(ea[i, i], eb[cand, cand], tol):
            continue
        ok = True
        for j in assigned:
            fj = image[j]
            if not _entries_match(ea[i, j], eb[cand, fj], tol) or \
               not _entries_match(ea[j, i], eb[fj, cand], tol):
                ok = False
                break
        if not ok:
            continue
        image[i] = cand
        used[cand] = True
        if _iso_extend(a, b, order, pos + 1, image, used, tol):
            return True
        used[cand] = False
        image[i] = -1
    return False


def isometry_search(a: FiniteLorentzSpace, b: FiniteLorentzSpace,
                    cap: int = 24, tol: float = 0.0) -> Optional[dict[int, int]]:
    """Search for an ell-preserving bijection a -> b; None if there is none.

    Exact mode only (|a| = |b| <= cap); larger instances should fall back
    to corr.min_distortion for near-isometry evidence. Backtracking with
    row/column signature pruning; result is deterministic (lexicographically
    least image over the search order).
    """
    if a.n != b.n:
        raise SizeMismatch(f"|a| = {a.n} != |b| = {b.n}")
    if a.n > cap:
        raise CapExceeded(f"exact mode size cap exceeded ({a.n} > {cap})")
    if a.n == 0:
        return {}

    def signature(space, i):
        row = np.sort(space.ell[i, :])
        col = np.sort(space.ell[:, i])
        return row, col

    sig_a = [signature(a, i) for i in range(a.n)]
    sig_b = [signature(b, i) for i in range(b.n)]
    # quick multiset obstruction: each a-point needs at least one b-point
    # with matching sorted row/col profile
    counts = []
    for i in range(a.n):
        c = sum(1 for j in range(b.n)
                if (gap_matrix(sig_a[i][0], sig_b[j][0]) <= tol).all()
                and (gap_matrix(sig_a[i][1], sig_b[j][1]) <= tol).all())
        if c == 0:
            return None
        counts.append(c)

    order = sorted(range(a.n), key=lambda i: counts[i])
    image = [-1] * a.n
    used = [False] * b.n
    if _iso_extend(a, b, order, 0, image, used, tol):
        return {i: image[i] for i in range(a.n)}
    return None


@dataclass(frozen=True)
class CoveredFiniteSpace:
    """A space with a basepoint and an increasing exhaustion by index subsets."""

    space: FiniteLorentzSpace
    basepoint: int
    cover: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = self.space.n
        if not self.cover:
            raise ShapeMismatch("cover must have at least one level")
        prev: set[int] = set()
        seen: set[int] = set()
        for k, level in enumerate(self.cover):
            s = set(level)
            if not s.issuperset(prev):
                raise ShapeMismatch(f"cover level {k} does not contain level {k - 1}")
            if self.basepoint not in s:
                raise ShapeMismatch(f"basepoint {self.basepoint} missing from cover level {k}")
            if any(i < 0 or i >= n for i in s):
                raise ShapeMismatch(f"cover level {k} has out-of-range indices")
            prev = s
            seen |= s
        if seen != set(range(n)):
            raise ShapeMismatch("union of cover levels must equal the whole point set")

    @property
    def depth(self) -> int:
        return len(self.cover)

    def level(self, k: int) -> tuple[int, ...]:
        return self.cover[k]


def covered(space: FiniteLorentzSpace, basepoint: int,
            cover: Sequence[Sequence[int]]) -> CoveredFiniteSpace:
    return CoveredFiniteSpace(space=space, basepoint=basepoint,
                              cover=tuple(tuple(sorted(set(level))) for level in cover))
