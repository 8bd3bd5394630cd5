import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isobayes.errors import StateError
from isobayes.grid import GridSpec, RegressionDataset, compute_bin_stats, is_monotone
from isobayes.immersion import (ImmersionKind, immersion_values, iota_at, iota_lower_at,
                                iota_upper_at, isotonize_surface, pava_1d)

from oracles import brute_immersion


def stats_from_counts(counts):
    """BinStats whose cell counts are exactly ``counts`` (points at cell centres)."""
    counts = np.asarray(counts, dtype=int)
    J = counts.shape
    pts = []
    for idx in np.ndindex(*J):
        centre = [(i + 0.5) / Jk for i, Jk in zip(idx, J)]
        pts.extend([centre] * counts[idx])
    x = np.array(pts, dtype=float).reshape(-1, len(J))
    return compute_bin_stats(RegressionDataset(x, np.zeros(len(x))), GridSpec(J))


def centre(j, J):
    return tuple((jk - 0.5) / Jk for jk, Jk in zip(j, J))


class TestExamples:
    def test_two_cell_pool(self):
        s = stats_from_counts([1, 1])
        theta = np.array([2.0, 1.0])
        assert iota_lower_at(theta, s, (0.25,)) == 1.5
        assert iota_upper_at(theta, s, (0.25,)) == 1.5
        assert iota_at("average", theta, s, (0.25,)) == 1.5

    def test_monotone_identity_small(self):
        s = stats_from_counts([1, 1])
        theta = np.array([1.0, 2.0])
        assert iota_lower_at(theta, s, (0.75,)) == 2.0
        assert iota_upper_at(theta, s, (0.75,)) == 2.0

    def test_constant_field(self):
        s = stats_from_counts([[1, 3, 0], [2, 0, 5]])
        theta = np.full((2, 3), 0.7)
        for kind in ImmersionKind:
            for j in np.ndindex(2, 3):
                x0 = centre(tuple(i + 1 for i in j), (2, 3))
                assert iota_at(kind, theta, s, x0) == pytest.approx(0.7, rel=1e-15)

    def test_surface_example(self):
        s = stats_from_counts([1, 1, 1])
        out = isotonize_surface(np.array([3.0, 1.0, 2.0]), s, "lower")
        assert out.theta.tolist() == [2.0, 2.0, 2.0]

    def test_lower_can_exceed_upper_with_empty_cells(self):
        # with an empty cell the two maps see different feasible sets; find a witness
        rng = np.random.default_rng(0)
        found = False
        for _ in range(2000):
            counts = rng.integers(0, 2, size=(3, 3))
            if counts.sum() == 0:
                continue
            s = stats_from_counts(counts)
            theta = rng.standard_normal((3, 3))
            lo, up = immersion_values(theta[None], s, (2, 2))
            if lo[0] > up[0]:
                found = True
                break
        assert found

    def test_dispatch(self):
        s = stats_from_counts([[1, 2], [3, 1]])
        theta = np.array([[0.3, -1.0], [2.0, 0.1]])
        x0 = (0.3, 0.8)
        lo, up = iota_lower_at(theta, s, x0), iota_upper_at(theta, s, x0)
        assert iota_at(ImmersionKind.LOWER, theta, s, x0) == lo
        assert iota_at(2, theta, s, x0) == up
        assert iota_at("average", theta, s, x0) == (lo + up) / 2


class TestErrors:
    def test_no_data(self):
        s = stats_from_counts([0, 0])
        with pytest.raises(StateError):
            iota_lower_at(np.zeros(2), s, (0.5,))

    def test_shape_mismatch(self):
        s = stats_from_counts([1, 1])
        with pytest.raises(ValueError):
            immersion_values(np.zeros((1, 3)), s, (1,))

    def test_kind_parse(self):
        assert ImmersionKind.parse("3") is ImmersionKind.AVERAGE
        assert ImmersionKind.parse("Upper") is ImmersionKind.UPPER
        assert ImmersionKind.LOWER.zb_kind == 1
        with pytest.raises(ValueError):
            ImmersionKind.parse("median")


class TestPava:
    def test_examples(self):
        assert pava_1d([1, 2, 3], [1, 1, 1]).tolist() == [1, 2, 3]
        assert pava_1d([2, 1], [1, 1]).tolist() == [1.5, 1.5]
        assert pava_1d([3, 1, 2], [1, 1, 1]).tolist() == [2, 2, 2]

    def test_weights(self):
        assert pava_1d([2, 1], [3, 1]).tolist() == [1.75, 1.75]
        with pytest.raises(ValueError):
            pava_1d([1, 2], [1, 0])


@st.composite
def surface_case(draw, full_support):
    d = draw(st.integers(1, 3))
    J = tuple(draw(st.integers(1, 5 if d < 3 else 3)) for _ in range(d))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    lo = 1 if full_support else 0
    counts = rng.integers(lo, 4, size=J)
    if counts.sum() == 0:
        counts.flat[0] = 1
    return counts, rng.standard_normal(J)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(surface_case(full_support=False))
    def test_surface_is_monotone(self, case):
        counts, theta = case
        s = stats_from_counts(counts)
        for kind in ("lower", "upper"):
            assert is_monotone(isotonize_surface(theta, s, kind).theta)

    @settings(max_examples=60, deadline=None)
    @given(surface_case(full_support=True))
    def test_identity_and_order(self, case):
        counts, theta = case
        s = stats_from_counts(counts)
        mono = theta.copy()
        for ax in range(mono.ndim):
            mono = np.cumsum(np.abs(mono), axis=ax)
        for kind in ("lower", "upper"):
            assert np.allclose(isotonize_surface(mono, s, kind).theta, mono, rtol=1e-12, atol=1e-12)
        lo = isotonize_surface(theta, s, "lower").theta
        up = isotonize_surface(theta, s, "upper").theta
        assert np.all(lo <= up)

    @settings(max_examples=40, deadline=None)
    @given(surface_case(full_support=False), st.floats(0, 10), st.floats(-5, 5))
    def test_affine_equivariance(self, case, a, b):
        counts, theta = case
        s = stats_from_counts(counts)
        j0 = tuple((k + 1) // 2 + 1 if k > 1 else 1 for k in counts.shape)
        lo, up = immersion_values(theta[None], s, j0)
        lo2, up2 = immersion_values((a * theta + b)[None], s, j0)
        assert lo2[0] == pytest.approx(a * lo[0] + b, abs=1e-9)
        assert up2[0] == pytest.approx(a * up[0] + b, abs=1e-9)

    @pytest.mark.parametrize("seed", range(3))
    def test_brute_force_2d(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(30):
            counts = rng.integers(0, 3, size=(3, 4))
            if counts.sum() == 0:
                continue
            s = stats_from_counts(counts)
            theta = rng.standard_normal((5, 3, 4))
            for j0 in np.ndindex(3, 4):
                j0 = tuple(i + 1 for i in j0)
                lo, up = immersion_values(theta, s, j0)
                for b in range(theta.shape[0]):
                    bl, bu = brute_immersion(theta[b], counts, j0)
                    assert lo[b] == pytest.approx(bl, rel=1e-12, abs=1e-12)
                    assert up[b] == pytest.approx(bu, rel=1e-12, abs=1e-12)

    def test_brute_force_3d(self):
        rng = np.random.default_rng(11)
        counts = rng.integers(0, 2, size=(2, 3, 2))
        s = stats_from_counts(counts)
        theta = rng.standard_normal((4, 2, 3, 2))
        for j0 in np.ndindex(2, 3, 2):
            j0 = tuple(i + 1 for i in j0)
            lo, up = immersion_values(theta, s, j0)
            for b in range(4):
                bl, bu = brute_immersion(theta[b], counts, j0)
                assert lo[b] == pytest.approx(bl, abs=1e-12)
                assert up[b] == pytest.approx(bu, abs=1e-12)

    def test_pava_agreement_1d(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            J = int(rng.integers(1, 30))
            counts = rng.integers(1, 6, size=J)
            s = stats_from_counts(counts)
            theta = rng.standard_normal(J)
            ref = pava_1d(theta, counts)
            lo = isotonize_surface(theta, s, "lower").theta
            up = isotonize_surface(theta, s, "upper").theta
            assert np.max(np.abs(lo - ref)) <= 1e-12
            assert np.max(np.abs(up - ref)) <= 1e-12

    def test_batch_equals_single(self):
        rng = np.random.default_rng(2)
        s = stats_from_counts(rng.integers(0, 3, size=(4, 4)))
        theta = rng.standard_normal((7, 4, 4))
        lo, up = immersion_values(theta, s, (2, 3))
        for b in range(7):
            l1, u1 = immersion_values(theta[b:b + 1], s, (2, 3))
            assert l1[0] == lo[b] and u1[0] == up[b]
