import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_field
from hnls import norms, solutions
from hnls.integrator import SolverConfig, Trajectory, evolve
from hnls.model import EquationParams
from hnls.norms import NormKind, NormRequest, norm
from hnls.spectral import Field, Grid

G = Grid(512, 40.0)
GAUSS = Field(G, np.exp(-G.x**2 / 2) + 0j)


class TestNormRequest:
    @pytest.mark.parametrize("kw", [dict(s=-1.0), dict(theta=1.5), dict(theta=-0.1), dict(s=np.nan)])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            NormRequest(NormKind.Hs, **kw)

    def test_kind_from_string(self):
        assert NormRequest("L2").kind is NormKind.L2


class TestNorms:
    def test_theta_zero_weighted_is_l2(self, rng):
        u = random_field(G, rng)
        assert norm(u, NormRequest(NormKind.WeightedMuDot, theta=0.0)) == pytest.approx(
            norm(u, NormRequest(NormKind.L2)), rel=1e-14)
        assert norm(u, NormRequest(NormKind.WeightedMu, theta=0.0)) == pytest.approx(
            norm(u, NormRequest(NormKind.L2)), rel=1e-14)

    def test_gaussian_moments(self):
        assert norms.l2_sq(GAUSS) == pytest.approx(np.sqrt(np.pi), abs=1e-10)
        assert norms.mu_dot_sq(GAUSS, 1.0) == pytest.approx(np.sqrt(np.pi) / 2, abs=1e-10)
        # Fourier side: |u_hat|^2 = exp(-xi^2), so the Hdot^1 norm is the same moment
        assert norms.hs_dot_sq(GAUSS, 1.0) == pytest.approx(np.sqrt(np.pi) / 2, abs=1e-10)
        assert norms.hs_sq(GAUSS, 1.0) == pytest.approx(1.5 * np.sqrt(np.pi), abs=1e-10)

    def test_s_zero_is_l2(self, rng):
        u = random_field(G, rng)
        assert norm(u, NormRequest(NormKind.Hs, s=0.0)) == pytest.approx(np.sqrt(norms.l2_sq(u)), rel=1e-12)

    def test_xstheta_is_sum(self, rng):
        u = random_field(G, rng)
        req = NormRequest(NormKind.Xstheta, s=2.0, theta=0.5)
        expected = norm(u, NormRequest(NormKind.Hs, s=2.0)) + norm(u, NormRequest(NormKind.WeightedMu, theta=0.5))
        assert norm(u, req) == pytest.approx(expected, rel=1e-14)

    def test_holder_interpolation_random_fields(self, rng):
        g = Grid(256, 30.0)
        worst = np.inf
        for i in range(1000):
            u = random_field(g, rng, ("noise", "smooth", "mixed")[i % 3])
            a, b = np.sqrt(norms.l2_sq(u)), np.sqrt(norms.mu_dot_sq(u, 1.0))
            for th in np.round(np.arange(1, 10) * 0.1, 10):
                lhs = np.sqrt(norms.mu_dot_sq(u, th))
                worst = min(worst, (a ** (1 - th) * b**th - lhs) / lhs)
        assert worst >= -1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31), st.floats(0, 1))
    def test_inhomogeneous_weight_monotone_in_theta(self, seed, theta):
        u = random_field(G, np.random.default_rng(seed))
        assert norms.mu_sq(u, theta) <= norms.mu_sq(u, 1.0) * (1 + 1e-14)

    @pytest.mark.parametrize("s", [0.6, 1.0, 2.0])
    def test_sobolev_embedding_surrogate(self, rng, s):
        g = Grid(256, 30.0)
        cs = norms.sobolev_embedding_constant(g, s)
        for i in range(200):
            u = random_field(g, rng, ("noise", "smooth", "mixed")[i % 3])
            assert np.max(np.abs(u.values)) <= cs * np.sqrt(norms.hs_sq(u, s)) * (1 + 1e-12)

    def test_endpoint_continuity(self, rng):
        g = Grid(256, 30.0)
        u = random_field(g, rng)
        one = norms.mu_dot_sq(u, 1.0)
        # |0|^(2 theta) drops from 1 to 0 once theta > 0; the grid point x = 0 carries weight dx
        origin = g.x == 0
        zero = norms.mu_dot_sq(u, 0.0) - np.sum(np.abs(u.values[origin]) ** 2) * g.dx
        gaps0 = [abs(norms.mu_dot_sq(u, h) - zero) for h in (1e-2, 1e-3, 1e-4, 1e-5)]
        gaps1 = [abs(norms.mu_dot_sq(u, 1 - h) - one) for h in (1e-2, 1e-3, 1e-4, 1e-5)]
        for gaps in (gaps0, gaps1):
            assert all(b < a for a, b in zip(gaps, gaps[1:]))
            assert gaps[-1] < 1e-3 * max(zero, one)


class TestInvariants:
    def test_I1_basic(self, grid, rng):
        assert norms.invariant_I1(Field.zeros(grid)) == 0
        assert norms.invariant_I1(Field(grid, np.ones(grid.n))) == pytest.approx(grid.length, rel=1e-14)
        u = random_field(grid, rng)
        assert norms.invariant_I1(u) == pytest.approx(norm(u, NormRequest(NormKind.L2)) ** 2, rel=1e-14)

    def test_I2_rejects_without_energy(self, grid):
        with pytest.raises(ValueError, match="b\\*e"):
            norms.invariant_I2(Field.zeros(grid), EquationParams(b=1, e=0))

    def test_I2_real_field_has_no_twist_term(self):
        u = Field(G, np.exp(-G.x**2) * (1 + G.x) + 0j)
        with_c3 = norms.invariant_I2(u, EquationParams(a=2.0, b=1, c=1.0, d=0.5, e=1))
        without = norms.invariant_I2(u, EquationParams(a=0.0, b=1, c=0.0, d=0.5, e=1))
        assert with_c3 == pytest.approx(without, rel=1e-13)

    def test_I2_explicit_gaussian(self):
        # C1 = 3, C2 = -1/2, C3 = 0; int |u_x|^2 = sqrt(pi)/2, int |u|^4 = sqrt(pi/2)
        p = EquationParams(a=0, b=1, c=0, d=0, e=1)
        expected = 3 * np.sqrt(np.pi) / 2 - 0.5 * np.sqrt(np.pi / 2)
        assert norms.invariant_I2(GAUSS, p) == pytest.approx(expected, abs=1e-10)

    def test_I2_twist_term_sign(self):
        # u = g exp(i k x): Im int u conj(u_x) = -k int g^2
        k = 4 * G.dxi
        u = Field(G, GAUSS.values * np.exp(1j * k * G.x))
        p = EquationParams(a=1.0, b=1.0, c=0.0, d=1.0, e=1.0)  # C3 = -2, C1 = 3, C2 = -1
        grad = np.sqrt(np.pi) / 2 + k**2 * np.sqrt(np.pi)
        expected = 3 * grad - np.sqrt(np.pi / 2) + (-2) * (-k * np.sqrt(np.pi))
        assert norms.invariant_I2(u, p) == pytest.approx(expected, abs=1e-10)

    def test_I2_drift_along_trajectory(self):
        g = Grid(256, 40.0)
        p = EquationParams(1.0, 1.0, 1.0, 1.0, 1.0)
        traj = evolve(solutions.gaussian(g, 0.8, 1.2), p, SolverConfig(dt=2e-3, t_end=0.5, record_every=25))
        I2 = np.array([r.I2 for r in traj.diagnostics])
        assert np.max(np.abs(I2 - I2[0])) / abs(I2[0]) <= 1e-8


class TestMixedNorm:
    def _const(self, kappa, T, n_t=11):
        g = Grid(16, 3.0)
        times = np.linspace(0, T, n_t)
        return Trajectory(times, [Field(g, np.full(g.n, kappa)) for _ in times]), g

    @pytest.mark.parametrize("p,q", [(2, 2), (4, np.inf), (1, 3), (np.inf, 2)])
    def test_constant_field_separable(self, p, q):
        kappa, T = 0.7 + 0.4j, 2.0
        traj, g = self._const(kappa, T)
        expected = abs(kappa) * (g.length ** (1 / p) if p != np.inf else 1) * (T ** (1 / q) if q != np.inf else 1)
        assert norms.mixed_norm(traj, p, q) == pytest.approx(expected, rel=1e-13)

    def test_p_q_two_is_space_time_l2(self, rng):
        g = Grid(32, 5.0)
        times = np.linspace(0, 1, 9)
        frames = [random_field(g, rng) for _ in times]
        traj = Trajectory(times, frames)
        w = norms.trapezoid_weights(times)
        direct = np.sqrt(sum(wi * norms.l2_sq(f) for wi, f in zip(w, frames)))
        assert norms.mixed_norm(traj, 2, 2) == pytest.approx(direct, rel=1e-13)

    def test_single_frame(self, rng):
        g = Grid(32, 5.0)
        u = random_field(g, rng)
        traj = Trajectory([0.0], [u])
        assert norms.mixed_norm(traj, 4, np.inf) == pytest.approx(
            (np.sum(np.abs(u.values) ** 4) * g.dx) ** 0.25, rel=1e-14)

    def test_rejects_nonuniform_and_bad_exponents(self):
        g = Grid(16, 1.0)
        f = Field.zeros(g)
        with pytest.raises(ValueError, match="uniform"):
            norms.mixed_norm(Trajectory([0, 0.1, 0.3], [f, f, f]), 2, 2)
        with pytest.raises(ValueError):
            norms.mixed_norm(Trajectory([0.0], [f]), 0.5, 2)


class TestDiagnostics:
    def test_record_and_csv(self):
        p = EquationParams(0, 1, 0, 0.5, 0.5)
        rec = norms.diagnose(GAUSS, 0.25, p, thetas=(0.0, 0.5))
        assert rec.I1 == pytest.approx(rec.l2**2, rel=1e-14)
        assert rec.csv_header() == ["t", "I1", "I2", "l2", "h1dot", "h2dot", "mu_dot_0", "mu_dot_0.5",
                                    "x2theta_0", "x2theta_0.5", "edge_mass"]
        row = rec.csv_row()
        assert len(row) == len(rec.csv_header())
        assert all(float(v) >= 0 for v in row if v != "" and row.index(v) != 2)

    def test_missing_I2_is_blank(self):
        rec = norms.diagnose(GAUSS, 0.0, EquationParams(b=1, d=1))
        assert rec.I2 is None
        assert rec.csv_row()[2] == ""

    def test_edge_mass(self):
        assert norms.edge_mass(GAUSS) < 1e-100
        assert norms.edge_mass(Field.zeros(G)) == 0.0
        flat = Field(G, np.ones(G.n) + 0j)
        assert norms.edge_mass(flat) == pytest.approx(0.1, abs=2 / G.n)
