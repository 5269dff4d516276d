"""
Tests for rectangular lattices: norms, enumeration, spectra and pair counts.
"""

import math

import numpy as np
import pytest

from src.models.lattice import (
    EllipseLattice,
    LatticeVector,
    Side,
    enumerate_vectors,
    multiplicity_r,
    multiplicity_violations,
    norm_spectrum,
    pair_near_count,
    radial_shells,
    squared_norm,
    vector_arrays,
)
from src.utils.errors import DomainError, ResourceError, UsageError


def box_norms(lat, limit):
    """All squared primal norms ≤ limit from a plain box scan."""
    n_max = int(math.sqrt(limit)) + 1
    m_max = int(math.sqrt(limit) / lat.alpha) + 1
    n, m = np.meshgrid(np.arange(-n_max, n_max + 1), np.arange(-m_max, m_max + 1), indexing="ij")
    q = n.ravel().astype(np.float64) ** 2 + m.ravel().astype(np.float64) ** 2 * lat.gamma
    return np.sort(q[q <= limit])


class TestLattice:
    def test_derived_constants(self):
        lat = EllipseLattice(2.0)
        assert lat.gamma == 4.0
        assert lat.beta == 0.5
        assert lat.kappa == 0.25
        assert lat.det_d == 2.0

    def test_presets(self):
        assert EllipseLattice.from_preset("golden").alpha == pytest.approx((1 + math.sqrt(5)) / 2)
        assert EllipseLattice.resolve("sqrt2").label == "sqrt2"
        assert EllipseLattice.resolve("1.5").alpha == 1.5
        assert EllipseLattice.resolve(2.0).alpha == 2.0

    def test_invalid_alpha(self):
        with pytest.raises(DomainError):
            EllipseLattice(0.0)
        with pytest.raises(DomainError):
            EllipseLattice(float("nan"))
        with pytest.raises(UsageError):
            EllipseLattice.from_preset("pi")
        with pytest.raises(UsageError):
            EllipseLattice.resolve("not-a-number")


class TestSquaredNorm:
    def test_examples(self):
        lat = EllipseLattice(math.sqrt(2.0))
        assert squared_norm((0, 0), lat) == 0.0
        assert squared_norm((3, 0), lat) == 9.0
        assert squared_norm((1, 2), lat) == pytest.approx(9.0)

    def test_dual_side(self):
        lat = EllipseLattice(2.0)
        assert squared_norm((1, 2), lat, Side.DUAL) == 1.0 + 4 * 0.25


class TestEnumeration:
    def test_unit_dual_ball(self):
        vectors = enumerate_vectors(EllipseLattice(1.0), Side.DUAL, 1.0)
        assert len(vectors) == 5
        assert {(v.n, v.m) for v in vectors} == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}

    def test_alpha_two(self):
        vectors = enumerate_vectors(EllipseLattice(2.0), Side.PRIMAL, 2.0)
        assert {(v.n, v.m) for v in vectors} == {(0, 0), (1, 0), (-1, 0), (2, 0), (-2, 0), (0, 1), (0, -1)}

    @pytest.mark.parametrize("alpha", [0.3, 1.0, math.e])
    def test_small_radius_is_origin_only(self, alpha):
        vectors = enumerate_vectors(EllipseLattice(alpha), Side.PRIMAL, 0.25)
        assert [(v.n, v.m) for v in vectors] == [(0, 0)]

    def test_sorted_by_norm(self, lattice_e):
        vectors = enumerate_vectors(lattice_e, Side.PRIMAL, 12.0)
        norms = [v.squared_norm for v in vectors]
        assert norms == sorted(norms)
        assert all(isinstance(v, LatticeVector) for v in vectors)

    def test_primitive_first_quadrant(self, lattice_e):
        vectors = enumerate_vectors(lattice_e, Side.DUAL, 10.0, quadrant_primitive=True)
        assert vectors
        for v in vectors:
            assert v.n >= 0 and v.m >= 0
            assert math.gcd(v.n, v.m) == 1

    def test_nested_radii(self, lattice_sqrt2):
        big = {(v.n, v.m) for v in enumerate_vectors(lattice_sqrt2, Side.PRIMAL, 9.0)}
        small = {(v.n, v.m) for v in enumerate_vectors(lattice_sqrt2, Side.PRIMAL, 6.5)}
        filtered = {key for key in big if squared_norm(key, lattice_sqrt2) <= 6.5 ** 2}
        assert filtered == small

    def test_matches_box_scan(self, lattice_e):
        _, _, sq = vector_arrays(lattice_e, Side.PRIMAL, 15.0)
        np.testing.assert_array_equal(np.sort(sq), box_norms(lattice_e, 225.0))

    def test_budget(self, lattice_e):
        with pytest.raises(ResourceError):
            vector_arrays(lattice_e, Side.PRIMAL, 1e4, max_vectors=1000)

    def test_negative_radius(self, lattice_e):
        with pytest.raises(DomainError):
            vector_arrays(lattice_e, Side.PRIMAL, -1.0)

    def test_radial_shells_reproduce_full_sum(self, lattice_e):
        norms, weights = radial_shells(lattice_e, Side.DUAL, 8.0)
        _, _, sq = vector_arrays(lattice_e, Side.DUAL, 8.0)
        full = np.sqrt(sq[sq > 0])
        assert weights.sum() == len(full)
        assert np.sum(weights * np.cos(norms)) == pytest.approx(np.sum(np.cos(full)), rel=1e-12)


class TestMultiplicity:
    @pytest.mark.parametrize("v, r", [((0, 0), 1), ((3, 0), 2), ((0, -2), 2), ((1, 2), 4), ((-1, -2), 4)])
    def test_multiplicity_r(self, v, r):
        assert multiplicity_r(v) == r


class TestSpectrum:
    def test_square_lattice_small(self):
        table = norm_spectrum(EllipseLattice(1.0), Side.PRIMAL, 2.0)
        assert table.squared_norms.tolist() == [0.0, 1.0, 2.0]
        assert table.multiplicities.tolist() == [1, 4, 4]
        assert table.min_gap == 1.0

    @pytest.mark.parametrize("preset", ["two_pow_quarter", "e"])
    def test_no_extra_multiplicities(self, preset):
        table = norm_spectrum(EllipseLattice.from_preset(preset), Side.PRIMAL, 1e4)
        assert multiplicity_violations(table) == 0
        assert set(table.multiplicities[1:].tolist()) <= {2, 4}

    def test_square_lattice_has_coincidences(self):
        table = norm_spectrum(EllipseLattice(1.0), Side.PRIMAL, 100.0)
        assert multiplicity_violations(table) > 0
        row = table.squared_norms.tolist().index(25.0)
        assert table.multiplicities[row] == 12

    def test_total_matches_box_scan(self, lattice_sqrt2):
        table = norm_spectrum(lattice_sqrt2, Side.PRIMAL, 400.0)
        assert table.total_vectors() == len(box_norms(lattice_sqrt2, 400.0))

    def test_delta_at_tie_rule(self):
        # norms 10 and 13 are consecutive; 11.5 is their midpoint
        table = norm_spectrum(EllipseLattice(1.0), Side.PRIMAL, 20.0)
        assert table.delta_at(11.5) == 1.0
        assert table.delta_at(11.6) == 3.0
        assert table.delta_at(-5.0) == 1.0

    def test_frame_columns(self, lattice_e):
        frame = norm_spectrum(lattice_e, Side.DUAL, 10.0).to_frame()
        assert list(frame.columns) == ["squared_norm", "n", "m", "multiplicity"]

    def test_invalid_cutoff(self, lattice_e):
        with pytest.raises(DomainError):
            norm_spectrum(lattice_e, Side.PRIMAL, 0.0)


class TestPairNearCount:
    def test_zero_delta_is_diagonal(self, lattice_e):
        R = 200.0
        table = norm_spectrum(lattice_e, Side.PRIMAL, 2 * R)
        q = table.squared_norms
        inside = (q >= R) & (q <= 2 * R)
        expected = int(np.sum(table.multiplicities[inside] ** 2))
        assert pair_near_count(lattice_e, R, 0.0) == expected

    def test_matches_double_loop(self, lattice_sqrt2):
        R, delta = 100.0, 1.0
        q = box_norms(lattice_sqrt2, 2 * R + delta)
        k = q[(q >= R) & (q <= 2 * R)]
        expected = int(np.sum((q[None, :] >= k[:, None]) & (q[None, :] <= k[:, None] + delta)))
        assert pair_near_count(lattice_sqrt2, R, delta) == expected

    def test_growth_is_linear(self, lattice_sqrt2):
        counts = [pair_near_count(lattice_sqrt2, R, 2.0) / (R * 2.0) for R in (100.0, 200.0, 400.0, 800.0)]
        assert max(counts) / min(counts) < 2.0

    def test_invalid_arguments(self, lattice_e):
        with pytest.raises(DomainError):
            pair_near_count(lattice_e, 0.0, 1.0)
        with pytest.raises(DomainError):
            pair_near_count(lattice_e, 10.0, -1.0)
