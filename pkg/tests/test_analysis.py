import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twoscale_pic.analysis import (
    density_discrepancy,
    moments,
    read_snapshot_csv,
    reconstruct,
    rotate,
    to_profile,
    write_moments_csv,
    write_snapshot_csv,
)
from twoscale_pic.core import H1Kind, ParticleEnsemble, Representation, ScenarioConfig, sample_initial
from twoscale_pic.field import RadialGrid
from twoscale_pic.scenarios import preset
from twoscale_pic.simulate import noise_floor

G, F = Representation.SLOW_PROFILE_G, Representation.PHYSICAL_F


def profile(n=100, seed=0):
    rng = np.random.default_rng(seed)
    return ParticleEnsemble.from_pairs(rng.normal(size=n), rng.normal(size=n), 1 / (2 * n), G)


class TestReconstruct:
    def test_identity(self):
        g = profile()
        f = reconstruct(g, 0.0)
        assert f.label is F
        assert np.array_equal(f.pos, g.pos) and np.array_equal(f.vel, g.vel)

    def test_quarter_turn(self):
        g = profile()
        f = reconstruct(g, math.pi / 2)
        np.testing.assert_allclose(f.pos, g.vel, atol=1e-15)
        np.testing.assert_allclose(f.vel, -g.pos, atol=1e-15)

    def test_full_turn(self):
        g = profile()
        f = reconstruct(g, 2 * math.pi)
        assert np.max(np.abs(f.pos - g.pos)) <= 1e-12 and np.max(np.abs(f.vel - g.vel)) <= 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-1e3, 1e3))
    def test_inverse(self, tau):
        g = profile(20)
        back = to_profile(reconstruct(g, tau), tau)
        assert back.label is G
        assert np.max(np.abs(back.pos - g.pos)) <= 1e-12
        assert np.max(np.abs(back.vel - g.vel)) <= 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-1e3, 1e3), st.integers(0, 1000))
    def test_isometry_and_emittance(self, tau, seed):
        g = profile(20, seed)
        f = reconstruct(g, tau)
        m0, m1 = moments(g), moments(f)
        assert abs(m1.second_moment_sum - m0.second_moment_sum) <= 1e-12 * max(1.0, m0.second_moment_sum)
        assert abs(m1.emittance - m0.emittance) <= 1e-9 * max(1.0, m0.emittance)
        assert np.array_equal(f.weight, g.weight)

    def test_requires_profile(self):
        with pytest.raises(ValueError):
            reconstruct(profile().with_coords(np.zeros(200), np.zeros(200), F), 0.1)

    def test_rotate_keeps_label_by_default(self):
        assert rotate(profile(), 0.3).label is G


class TestMoments:
    def test_pair(self):
        m = moments(ParticleEnsemble.from_pairs([1.0], [0.0], 0.5, F))
        assert (m.r2, m.v2, m.emittance, m.mean_r, m.weight_sum) == (1.0, 0.0, 0.0, 0.0, 1.0)

    def test_scaling(self):
        g = profile()
        a, b = moments(g), moments(g.with_coords(2 * g.pos, 2 * g.vel))
        for name in ("r2", "v2", "rv", "emittance"):
            assert getattr(b, name) == pytest.approx(4 * getattr(a, name), rel=1e-12)

    def test_mirrored_means_are_exactly_zero(self):
        m = moments(profile(1001, 3))
        assert m.mean_r == 0.0 and m.mean_v == 0.0

    def test_semi_gaussian_sample(self):
        c = ScenarioConfig(epsilon=0.01, h1_kind=H1Kind.ZERO, t_end=1.0, n_particles=100_000)
        m = moments(sample_initial(c))
        assert m.r2 == pytest.approx(0.75**2 / 2, rel=0.05)
        assert m.v2 == pytest.approx(c.vth**2, rel=0.05)
        assert m.weight_sum == pytest.approx(1.0, rel=1e-13) and m.emittance >= 0


class TestDensityDiscrepancy:
    grid = RadialGrid.uniform(41, 2.0)

    def test_identical(self):
        f = reconstruct(profile(), 0.4)
        assert density_discrepancy(f, f.copy(), self.grid) == 0.0

    def test_one_particle_moved_one_cell(self):
        # Pair on node j: density w/dq at +-q_j.  Moving only the +q_j particle to
        # q_{j+1} splits the symmetrized density into w/(2 dq) on four nodes, so
        # the difference is w/(2 dq) on four nodes: ratio 2 / (2 sqrt 2).
        j = self.grid.center + 5
        x0, dq = self.grid.nodes[j], self.grid.spacing
        a = ParticleEnsemble([x0, -x0], [0.0, 0.0], [0.5, 0.5], F)
        b = ParticleEnsemble([x0 + dq, -x0], [0.0, 0.0], [0.5, 0.5], F)
        assert density_discrepancy(a, b, self.grid) == pytest.approx(1 / math.sqrt(2), rel=1e-12)

    def test_positive_for_distinct_samples(self):
        f = reconstruct(profile(), 0.0)
        g = reconstruct(profile(seed=1), 0.0)
        d1, d2 = density_discrepancy(f, g, self.grid), density_discrepancy(g, f, self.grid)
        assert d1 > 0 and d2 > 0

    def test_zero_reference(self):
        a = ParticleEnsemble([0.1, -0.1], [0.0, 0.0], [0.0, 0.0], F)
        with pytest.raises(ValueError):
            density_discrepancy(a, a, self.grid)

    def test_noise_floor(self):
        c = preset("semi-gaussian-eps001").config.replace(n_particles=100_000)
        assert noise_floor(c) < 0.05


def test_snapshot_round_trip(tmp_path):
    g = profile(10)
    path = tmp_path / "snap.csv"
    write_snapshot_csv(g, path, t=1.25, tau=125.0)
    assert path.read_text().splitlines()[0] == "# t=1.25 tau=125.0 representation=G"
    back, meta = read_snapshot_csv(path)
    assert meta == {"t": 1.25, "tau": 125.0, "representation": "G"}
    assert np.array_equal(back.pos, g.pos) and np.array_equal(back.weight, g.weight)
    assert back.label is G


def test_moments_csv(tmp_path):
    g = profile(10)
    path = tmp_path / "m.csv"
    write_moments_csv([(0.0, moments(g)), (0.5, moments(g))], path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("t,mean_r,mean_v,r2") and len(lines) == 3
