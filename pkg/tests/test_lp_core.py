"""Dyadic partition, block restriction and spectral derivative."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from besovlab.errors import InvalidParameterError, ResolutionError
from besovlab.grid import Grid, GridFunction
from besovlab.lp_core import (
    apply_block,
    build_partition,
    eval_block_symbol,
    partition_for,
    smooth_step,
    spectral_derivative,
)


@pytest.fixture(scope="module")
def part():
    return build_partition(8)


def _unit_sum(part, r):
    return sum(part.symbol(j, r) for j in range(part.J + 1))


class TestSmoothStep:
    def test_endpoints(self):
        assert smooth_step(np.array([-1.0, 0.0]))[1] == 0.0
        assert np.all(smooth_step(np.array([1.0, 2.0])) == 1.0)

    @given(st.floats(0.0, 1.0))
    def test_symmetry(self, y):
        assert smooth_step(np.array([y]))[0] + smooth_step(np.array([1 - y]))[0] == pytest.approx(1.0, abs=1e-14)

    def test_monotone(self):
        v = smooth_step(np.linspace(0, 1, 1001))
        assert np.all(np.diff(v) >= 0)


class TestBuildPartition:
    def test_plateau_and_support(self, part):
        assert part.phi0(0.5) == 1.0
        assert part.phi0(1.0) == 1.0
        assert part.phi0(2.0) == 0.0
        assert part.phi0(3.0) == 0.0

    def test_first_block_at_two(self, part):
        assert eval_block_symbol(part, 1, 2.0) == 1.0

    def test_unity_at_3_7(self, part):
        assert abs(_unit_sum(part, 3.7) - 1.0) < 1e-12

    @pytest.mark.parametrize("J", [0, -1, 2.5])
    def test_invalid_J(self, J):
        with pytest.raises(InvalidParameterError):
            build_partition(J)

    def test_invalid_profile(self):
        with pytest.raises(InvalidParameterError):
            build_partition(4, profile=0.0)

    def test_identifier_names_profile(self):
        assert "exp(-2/x)" in build_partition(3, 2.0).identifier

    def test_dilation(self, part):
        r = np.linspace(0, 8, 257)
        for j in range(2, part.J + 1):
            assert np.allclose(part.symbol(j, r * 2.0 ** (j - 1)), part.symbol(1, r), atol=1e-15)

    @pytest.mark.parametrize("profile", [0.5, 1.0, 3.0])
    def test_unity_for_other_profiles(self, profile):
        p = build_partition(6, profile)
        r = np.linspace(0, 2.0 ** 6, 5001)
        assert np.max(np.abs(_unit_sum(p, r) - 1)) < 1e-12


class TestPartitionInvariants:
    @settings(max_examples=300)
    @given(st.floats(0.0, 2.0 ** 8))
    def test_partition_of_unity(self, r):
        part = build_partition(8)
        assert abs(float(_unit_sum(part, r)) - 1.0) < 1e-12

    @settings(max_examples=200)
    @given(st.floats(0.0, 600.0), st.integers(0, 8), st.integers(0, 8))
    def test_non_adjacent_disjoint(self, r, j, k):
        if abs(j - k) < 2:
            return
        part = build_partition(8)
        assert part.symbol(j, r) * part.symbol(k, r) == 0.0

    @given(st.floats(0.0, 600.0), st.integers(0, 8))
    def test_range(self, r, j):
        v = float(build_partition(8).symbol(j, r))
        assert 0.0 <= v <= 1.0

    @given(st.floats(-100, 100), st.floats(-100, 100), st.floats(0, 2 * math.pi), st.integers(0, 8))
    def test_radial(self, a, b, theta, j):
        part = build_partition(8)
        R = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        xi = np.array([a, b])
        assert abs(eval_block_symbol(part, j, xi) - eval_block_symbol(part, j, R @ xi)) < 1e-12

    def test_support_of_blocks(self, part):
        for j in range(1, part.J + 1):
            lo, hi = part.support(j)
            r = np.concatenate([np.linspace(0, lo, 50), np.linspace(hi, 4 * hi, 50)])
            assert np.all(part.symbol(j, r) == 0.0)


class TestEvalBlockSymbol:
    def test_zero_frequency(self, part):
        assert eval_block_symbol(part, 3, 0.0) == 0.0

    def test_outside_phi0(self, part):
        assert eval_block_symbol(part, 0, 4.0) == 0.0

    def test_block_two_at_four(self, part):
        assert eval_block_symbol(part, 2, 4.0) == 1.0

    def test_vector_argument(self, part):
        assert eval_block_symbol(part, 2, [0.0, 4.0]) == 1.0

    @pytest.mark.parametrize("j", [-1, 9])
    def test_out_of_range(self, part, j):
        with pytest.raises(InvalidParameterError):
            eval_block_symbol(part, j, 1.0)


class TestApplyBlock:
    grid = Grid(1, 64)

    def test_constant_block0(self):
        f = GridFunction(self.grid, np.full(64, 2.5))
        out = apply_block(f, build_partition(4), 0)
        assert np.allclose(out.values, 2.5, atol=1e-14)

    @pytest.mark.parametrize("j", [1, 2, 3, 4])
    def test_constant_higher_blocks(self, j):
        f = GridFunction(self.grid, np.full(64, 2.5))
        assert np.max(np.abs(apply_block(f, build_partition(4), j).values)) < 1e-14

    def test_exponential_mode(self):
        x = self.grid.coords()[0]
        part = build_partition(4)
        f = GridFunction(self.grid, np.exp(4j * x))
        out = apply_block(f, part, 2)
        assert np.allclose(out.values, part.symbol(2, 4.0) * np.exp(4j * x), atol=1e-13)

    def test_real_in_real_out(self):
        x = self.grid.coords()[0]
        f = GridFunction(self.grid, np.cos(3 * x) + np.sin(7 * x))
        out = apply_block(f, build_partition(4), 2)
        assert out.is_real and np.isrealobj(out.values)

    def test_reconstruction(self):
        rng = np.random.default_rng(3)
        g = Grid(2, 64)
        c = (rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)) * (g.index_max() <= 10)
        f = GridFunction(g, np.fft.ifftn(c).real)
        part = build_partition(4)
        total = sum(apply_block(f, part, j).values for j in range(part.J + 1))
        assert np.max(np.abs(total - f.values)) <= 1e-10 * np.max(np.abs(f.values))

    def test_unresolved_block(self):
        f = GridFunction(Grid(1, 16), np.zeros(16))
        with pytest.raises(ResolutionError) as exc:
            apply_block(f, build_partition(6), 5)
        assert exc.value.required_n >= 64


class TestPartitionFor:
    @pytest.mark.parametrize("d,N", [(1, 64), (2, 128), (3, 32)])
    def test_covers_lattice(self, d, N):
        g = Grid(d, N)
        p = partition_for(g)
        assert 2.0 ** p.J >= math.sqrt(d) * g.nyquist
        assert np.max(np.abs(_unit_sum(p, g.kmag()) - 1)) < 1e-12


class TestSpectralDerivative:
    grid = Grid(1, 64)

    def test_sine(self):
        x = self.grid.coords()[0]
        d = spectral_derivative(GridFunction(self.grid, np.sin(3 * x)), 0)
        assert np.max(np.abs(d.values - 3 * np.cos(3 * x))) < 1e-12

    def test_constant(self):
        d = spectral_derivative(GridFunction(self.grid, np.full(64, 4.0)), 0)
        assert np.max(np.abs(d.values)) < 1e-14

    def test_other_axis(self):
        g = Grid(2, 32)
        x1, x2 = g.coords()
        f = GridFunction(g, np.broadcast_to(np.cos(2 * x2), g.shape).copy())
        assert np.max(np.abs(spectral_derivative(f, 0).values)) < 1e-13

    def test_bad_axis(self):
        with pytest.raises(InvalidParameterError):
            spectral_derivative(GridFunction(self.grid, np.zeros(64)), 1)
