import numpy as np
import pytest

from conftest import chain_space, layered_space, random_chain, random_causet_space, union_space
from lorentzgh import (build_space, causality_class, classify_special_points, covered,
                       isometry_search, quotient_tau_indistinguishable, timelike_diameter)
from lorentzgh.core import CoveredFiniteSpace
from lorentzgh.errors import (AxiomViolation, CapExceeded, EmptySubset,
                              PrePDPRequired, ShapeMismatch, SizeMismatch)
from lorentzgh.extended import NEG_INF as NI, gap, add, INF_GAP
from lorentzgh import serialize as ser


def test_extended_conventions():
    assert add(NI, 3.0) == NI
    assert add(NI, NI) == NI
    assert gap(NI, NI) == 0.0
    assert gap(NI, 2.0) == INF_GAP
    assert gap(1.0, 1.5) == 0.5


class TestBuildSpace:
    def test_saturated_chain(self):
        s = build_space(["a", "b", "c"], [[0, 1, 2], [NI, 0, 1], [NI, NI, 0]])
        assert s.tau(0, 2) == 2.0

    def test_reverse_triangle_rejected(self):
        with pytest.raises(AxiomViolation) as exc:
            build_space(["a", "b", "c"], [[0, 1, 1.5], [NI, 0, 1], [NI, NI, 0]])
        assert exc.value.kind == "reverse-triangle"
        assert exc.value.witness == (0, 1, 2)

    def test_neg_inf_absorbs_on_the_left(self):
        # ell(a,b) = -inf, ell(b,c) = 3, ell(a,c) = -inf is fine
        build_space(["a", "b", "c"], [[0, NI, NI], [NI, 0, 3], [NI, NI, 0]])

    def test_negative_diagonal_rejected(self):
        with pytest.raises(AxiomViolation) as exc:
            build_space(["a", "b"], [[-1, NI], [NI, 0]])
        assert exc.value.kind in ("diagonal", "codomain")

    def test_positive_diagonal_forced_out_by_triangle(self):
        # with +inf excluded, 2*ell(x,x) <= ell(x,x) forces a zero diagonal;
        # non-chronological spaces are represented by symmetric zero pairs
        with pytest.raises(AxiomViolation) as exc:
            build_space(["a"], [[2.0]])
        assert exc.value.kind == "reverse-triangle"
        s = build_space(["a", "b"], [[0, 0], [0, 0]])
        assert not causality_class(s).causal

    def test_plus_inf_rejected(self):
        with pytest.raises(AxiomViolation):
            build_space(["a", "b"], [[0, float("inf")], [NI, 0]])

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            build_space(["a", "b"], [[0, 1, 2], [NI, 0, 1], [NI, NI, 0]])

    def test_randomized_families_validate(self, rng):
        for _ in range(200):
            random_chain(rng)
            random_causet_space(rng)
            union_space(rng)


class TestCausality:
    def test_chain_all_flags(self):
        s = chain_space([0, 1, 2])
        rep = causality_class(s)
        assert rep.chronological and rep.causal and rep.pdp
        assert not any(rep.witnesses.values())

    def test_symmetric_zero_pair_not_causal(self):
        s = build_space(["a", "b"], [[0, 0], [0, 0]])
        rep = causality_class(s)
        assert not rep.causal
        assert (0, 1) in rep.witnesses["causal"]

    def test_duplicate_rows_break_pdp(self):
        s = layered_space(np.random.default_rng(3), layers=2, width=2)
        rep = causality_class(s)
        assert not rep.pdp
        assert rep.witnesses["pdp"]


class TestQuotient:
    def test_merges_duplicates(self):
        s = build_space(["a", "b", "b2", "c"],
                        [[0, 1, 1, 2], [NI, 0, 0, 1], [NI, 0, 0, 1], [NI, NI, NI, 0]])
        q, proj = quotient_tau_indistinguishable(s)
        assert q.n == 3
        assert proj[1] == proj[2]

    def test_identity_on_pdp_space(self):
        s = chain_space([0, 1, 3])
        q, proj = quotient_tau_indistinguishable(s)
        assert q.n == s.n
        assert (proj == np.arange(s.n)).all()

    def test_four_point_two_classes(self):
        # exactly two of four points share rows/cols; re-quotient is identity
        s = layered_space(np.random.default_rng(5), layers=3, width=1, span=3.0)
        arr = s.ell.copy()
        ell = np.full((4, 4), NI)
        ell[:3, :3] = arr
        ell[3, 3] = 0.0
        ell[3, :3] = arr[1, :]
        ell[:3, 3] = arr[:, 1]
        ell[3, 1] = 0.0
        ell[1, 3] = 0.0
        s4 = build_space(["x", "y", "z", "y2"], ell)
        q, proj = quotient_tau_indistinguishable(s4)
        assert q.n == 3
        q2, proj2 = quotient_tau_indistinguishable(q)
        assert q2.n == q.n and (proj2 == np.arange(q.n)).all()

    def test_always_pdp_and_causal(self, rng):
        for _ in range(300):
            s = layered_space(rng, layers=int(rng.integers(2, 4)),
                              width=int(rng.integers(1, 3)))
            q, _ = quotient_tau_indistinguishable(s)
            rep = causality_class(q)
            assert rep.pdp and rep.causal


class TestSpecialPoints:
    def test_i0(self):
        s = build_space(["x", "y", "i0"], [[0, 1, NI], [NI, 0, NI], [NI, NI, 0]])
        assert classify_special_points(s)["i0"] == 2

    def test_n_plus(self):
        s = build_space(["x", "y", "np"], [[0, NI, 0], [NI, 0, 0], [NI, NI, 0]])
        out = classify_special_points(s)
        assert out["n_plus"] == 2 and out["i0"] is None

    def test_n_minus(self):
        s = build_space(["nm", "x", "y"], [[0, 0, 0], [NI, 0, NI], [NI, NI, 0]])
        assert classify_special_points(s)["n_minus"] == 0

    def test_absent_on_sampled_slab(self):
        from lorentzgh import ProductGenerator, SamplePlan, sample_spacetime, segment_fiber
        gen = ProductGenerator(fiber=segment_fiber(3, 1.0), cone_scale=1.0, t_range=(0.0, 1.0))
        s = sample_spacetime(gen, SamplePlan(time_step=0.5)).space
        out = classify_special_points(s)
        assert out == {"i0": None, "n_plus": None, "n_minus": None}

    def test_requires_pdp(self, rng):
        s = layered_space(rng, layers=2, width=2)
        with pytest.raises(PrePDPRequired):
            classify_special_points(s)

    def test_at_most_one_each(self, rng):
        for _ in range(50):
            s = random_causet_space(rng)
            if causality_class(s).pdp:
                out = classify_special_points(s)
                assert all(v is None or isinstance(v, int) for v in out.values())


class TestDiameter:
    def test_chain(self):
        assert timelike_diameter(chain_space([0, 1, 2]), [0, 1, 2]) == 2.0

    def test_singleton(self):
        assert timelike_diameter(chain_space([0.0]), [0]) == 0.0

    def test_empty(self):
        with pytest.raises(EmptySubset):
            timelike_diameter(chain_space([0, 1]), [])

    def test_sampled_slab(self):
        from lorentzgh import SamplePlan, circle_fiber, product_family, sample_spacetime
        gen = product_family(circle_fiber(8), "inf", t_range=(-1.0, 1.0))
        s = sample_spacetime(gen, SamplePlan(time_step=1 / 8), t_window=(0.0, 0.5))
        d = timelike_diameter(s.space, range(s.space.n))
        assert 0.5 <= d <= 0.5 + 1e-12


class TestIsometry:
    def test_self_permutation(self, rng):
        for _ in range(20):
            s = random_chain(rng)
            perm = rng.permutation(s.n)
            ell = s.ell[np.ix_(perm, perm)]
            t = build_space([f"r{i}" for i in range(s.n)], ell)
            f = isometry_search(s, t)
            assert f is not None
            for i in range(s.n):
                for j in range(s.n):
                    assert t.ell[f[i], f[j]] == s.ell[i, j]

    def test_none_for_different_scale(self):
        a = build_space(["a", "b"], [[0, 1], [NI, 0]])
        b = build_space(["a", "b"], [[0, 2], [NI, 0]])
        assert isometry_search(a, b) is None

    def test_identical_samplings(self):
        from lorentzgh import ProductGenerator, SamplePlan, sample_spacetime, segment_fiber
        gen = ProductGenerator(fiber=segment_fiber(3, 1.0), cone_scale=1.0, t_range=(0.0, 2.0))
        s1 = sample_spacetime(gen, SamplePlan(time_step=0.5)).space
        s2 = sample_spacetime(gen, SamplePlan(time_step=0.5)).space
        f = isometry_search(s1, s2)
        assert f is not None

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatch):
            isometry_search(chain_space([0, 1]), chain_space([0, 1, 2]))

    def test_cap(self):
        s = chain_space(np.arange(6.0))
        with pytest.raises(CapExceeded):
            isometry_search(s, s, cap=4)

    def test_isometric_spaces_share_causality_class(self, rng):
        for _ in range(30):
            a = random_causet_space(rng)
            perm = rng.permutation(a.n)
            b = build_space([f"r{i}" for i in range(a.n)], a.ell[np.ix_(perm, perm)])
            if isometry_search(a, b) is not None:
                assert causality_class(a) == causality_class(b)


class TestCovered:
    def test_validation(self):
        s = chain_space([0, 1, 2])
        cov = covered(s, 0, [[0, 1], [0, 1, 2]])
        assert cov.depth == 2
        with pytest.raises(ShapeMismatch):
            covered(s, 0, [[0, 1]])  # union misses point 2
        with pytest.raises(ShapeMismatch):
            covered(s, 2, [[0, 1], [0, 1, 2]])  # basepoint missing at level 0
        with pytest.raises(ShapeMismatch):
            CoveredFiniteSpace(space=s, basepoint=0, cover=((0, 1, 2), (0, 1)))


class TestJsonRoundTrip:
    def test_bit_exact(self, rng):
        for _ in range(30):
            s = random_chain(rng)
            text = ser.dumps(ser.space_to_dict(s))
            back = ser.space_from_dict(ser.loads(text))
            assert back.labels == s.labels
            assert (back.ell == s.ell).all()  # bit-exact incl. -inf

    def test_neg_inf_as_string(self):
        s = chain_space([0, 1])
        text = ser.dumps(ser.space_to_dict(s))
        assert '"-inf"' in text


def test_reverse_triangle_invariant_exhaustive(rng):
    # for every valid space and ordered triple: ell(x,y) + ell(y,z) <= ell(x,z)
    for _ in range(50):
        s = random_causet_space(rng)
        n = s.n
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    assert add(s.ell[i, j], s.ell[j, k]) <= s.ell[i, k] + 1e-12
