"""Tests for the elliptic-point theory and the Bishop disc solver."""

import numpy as np
import pytest

from leviflat import bishop as B
from leviflat import continuation as C
from leviflat import geometry as G
from leviflat.calculus import DiscField, DiscGrid
from leviflat.errors import (
    AdaptationFailure,
    NegativeGamma,
    NoContraction,
    TheodorsenDiverged,
)
from leviflat.scenarios import make_scenario


@pytest.fixture(scope="module")
def grid():
    return DiscGrid(64, 32)


class TestClassification:
    def test_ranges(self):
        assert B.classify_point(0.0) == "elliptic"
        assert B.classify_point(0.99) == "elliptic"
        assert B.classify_point(1.0) == "parabolic"
        assert B.classify_point(2.0) == "hyperbolic"

    def test_negative_gamma(self):
        with pytest.raises(NegativeGamma):
            B.classify_point(-0.1)


class TestAdaptedModels:
    def test_ball_poles_validate(self):
        sc = make_scenario("ball")
        for pole in sc.poles:
            rep = B.validate_adapted(pole.model)
            assert rep["passed"]

    def test_perturbed_poles_validate(self):
        sc = make_scenario("perturbed-ball")
        for pole in sc.poles:
            assert B.validate_adapted(pole.model)["passed"]

    def test_bad_quadric_match_rejected(self):
        """A model whose defining pair has a spurious linear term fails."""
        sc = make_scenario("ball")
        model = sc.poles[0].model

        def bad_rho(w):
            w = np.asarray(w, dtype=float)
            base = model.rho(w)
            base = np.array(base, copy=True)
            base[..., 0] = base[..., 0] + 0.1 * w[..., 0]  # linear defect
            return base

        bad = B.EllipticPointModel(gamma=0.0, chart=model.chart, rho=bad_rho)
        with pytest.raises(AdaptationFailure):
            B.validate_adapted(bad)

    def test_nonvanishing_deformation_rejected(self):
        quad = make_scenario("model-quadric", gamma=0.3)
        const_A = lambda z: np.broadcast_to(
            0.05 * np.eye(2, dtype=complex), np.shape(z)[:-1] + (2, 2))
        chart = G.AmbientChart(J=G.j_from_deformation(const_A), A_fn=const_A)
        bad = B.EllipticPointModel(gamma=0.3, chart=chart,
                                   rho=quad.surface.rho_pair)
        with pytest.raises(AdaptationFailure):
            B.validate_adapted(bad)

    def test_dilation_shrinks_deformation(self):
        sc = make_scenario("perturbed-ball")
        model = sc.poles[0].model
        pts = np.random.default_rng(0).uniform(-1, 1, (32, 4))
        n0 = np.max(np.linalg.norm(model.chart.deformation_at(pts),
                                   axis=(-2, -1)))
        small = B.dilate(model, 0.01)
        n1 = np.max(np.linalg.norm(small.chart.deformation_at(pts),
                                   axis=(-2, -1)))
        # A vanishes linearly at the center, so the dilated norm drops
        assert n1 < 0.2 * n0
        assert small.delta == pytest.approx(0.01)

    def test_dilated_j_is_almost_complex(self):
        sc = make_scenario("perturbed-ball")
        small = B.dilate(sc.poles[0].model, 0.25)
        pts = np.random.default_rng(1).uniform(-1, 1, (8, 4))
        J = small.chart.J(pts)
        assert np.max(np.abs(np.einsum("...ij,...jk->...ik", J, J)
                             + np.eye(4))) < 1e-12

    def test_choose_dilation(self):
        sc = make_scenario("perturbed-ball")
        delta = B.choose_dilation(sc.poles[0].model, target=0.02)
        pts = np.random.default_rng(2).uniform(-1, 1, (32, 4))
        A = B.dilate(sc.poles[0].model, delta).chart.deformation_at(pts)
        assert np.max(np.linalg.norm(A, axis=(-2, -1))) <= 0.02


class TestEllipseMap:
    def test_round_case(self):
        _, c = B.ellipse_map(0.0, 0.49)
        assert c[1] == pytest.approx(0.7, abs=1e-13)
        assert np.max(np.abs(c[2:])) < 1e-12 if len(c) > 2 else True

    def test_half_gamma_corner_value(self):
        # for gamma = 0.5, r = 1 the map sends 1 to the semi-minor vertex
        _, c = B.ellipse_map(0.5, 1.0)
        z1 = np.sum(np.asarray(c))
        assert z1 == pytest.approx(np.sqrt(2.0 / 3.0), abs=1e-10)

    @pytest.mark.parametrize("gamma,r", [(0.0, 1.0), (0.3, 0.5), (0.5, 1.0),
                                         (0.8, 0.25)])
    def test_boundary_on_ellipse(self, gamma, r):
        _, c = B.ellipse_map(gamma, r)
        th = np.linspace(0, 2 * np.pi, 181)
        z = np.polyval(np.asarray(c)[::-1], np.exp(1j * th))
        P = np.abs(z) ** 2 + gamma * np.real(z ** 2)
        assert np.max(np.abs(P - r)) < 1e-8

    def test_normalization(self):
        _, c = B.ellipse_map(0.4, 0.7)
        assert abs(c[0]) < 1e-13          # z(0) = 0
        assert np.imag(c[1]) == pytest.approx(0.0, abs=1e-12)
        assert np.real(c[1]) > 0          # z'(0) > 0

    def test_invalid_parameters(self):
        with pytest.raises(NegativeGamma):
            B.ellipse_map(1.0, 1.0)
        with pytest.raises(ValueError):
            B.ellipse_map(0.5, -1.0)


class TestModelFamily:
    def test_round_family_exact(self, grid):
        discs = B.model_family(0.0, [0.25, 0.5, 1.0], grid)
        for disc, r in zip(discs, [0.25, 0.5, 1.0]):
            ref = DiscField.from_taylor(grid, [0.0, np.sqrt(r)])
            assert (disc.f[0] - ref).sup_norm() < 1e-8
            assert abs(disc.f[1].values[0, 0] - r) < 1e-12

    def test_boundary_residuals(self, grid):
        discs = B.model_family(0.5, np.linspace(0.2, 1.0, 5), grid)
        for disc in discs:
            assert disc.diagnostics["boundary_residual"] < 1e-8

    def test_maximal_rank_in_r(self, grid):
        """d(disc)/dr has a nonvanishing z2 component (finite differences)."""
        r = 0.5
        dr = 1e-5
        d0, d1 = B.model_family(0.5, [r, r + dr], grid)
        dz2 = (d1.f[1].values - d0.f[1].values) / dr
        assert np.min(np.abs(dz2)) > 0.5

    def test_monotone_r_required(self, grid):
        with pytest.raises(ValueError):
            B.model_family(0.3, [0.5, 0.25], grid)


class TestPsiOperator:
    def chart(self, strength=0.05):
        A0 = np.array([[0.35, 0.20 + 0.10j], [0.15 - 0.05j, 0.30]])

        def A_fn(z):
            z = np.asarray(z, dtype=float)
            z2 = z[..., 2] + 1j * z[..., 3]
            return strength * (1.0 - z2 ** 2)[..., None, None] * A0

        return G.AmbientChart(J=G.j_from_deformation(A_fn), A_fn=A_fn)

    def test_roundtrip(self, grid):
        chart = self.chart()
        f1 = DiscField.from_function(grid, lambda z: 0.3 * z + 0.1 * z ** 2)
        f2 = DiscField.from_function(grid, lambda z: 0.2 + 0.05 * z)
        h = B.psi_apply(chart, (f1, f2))
        back = B.psi_inverse(chart, h, verify=False)
        assert (back[0] - f1).sup_norm() < 1e-11
        assert (back[1] - f2).sup_norm() < 1e-11

    def test_inverse_gives_j_holomorphic_disc(self, grid):
        chart = self.chart()
        h1 = DiscField.from_taylor(grid, [0.1, 0.3, 0.05])
        h2 = DiscField.from_taylor(grid, [0.2, 0.05])
        f = B.psi_inverse(chart, (h1, h2))   # verify=True checks Eq. 2
        vals = np.stack([f[0].values, f[1].values])
        assert B.cr_residual_values(chart, grid, vals) < 1e-8

    def test_identity_for_standard_structure(self, grid):
        sc = make_scenario("ball")
        h1 = DiscField.from_taylor(grid, [0.0, 0.5])
        h2 = DiscField.from_taylor(grid, [0.3])
        f = B.psi_inverse(sc.chart, (h1, h2))
        assert (f[0] - h1).sup_norm() < 1e-14
        assert (f[1] - h2).sup_norm() < 1e-14

    def test_no_contraction_for_large_deformation(self, grid):
        chart = self.chart(strength=6.0)
        h1 = DiscField.from_taylor(grid, [0.0, 1.0])
        h2 = DiscField.from_taylor(grid, [0.0])   # A is largest near z2 = 0
        with pytest.raises(NoContraction):
            B.psi_inverse_values(
                chart, grid,
                np.stack([h1.values, h2.values]))

    def test_batched_consistency(self, grid):
        chart = self.chart()
        h = np.stack([
            np.stack([DiscField.from_taylor(grid, [0.1 * k, 0.3]).values,
                      DiscField.from_taylor(grid, [0.2]).values])
            for k in range(3)])
        batch = B.psi_inverse_values(chart, grid, h)
        for k in range(3):
            single = B.psi_inverse_values(chart, grid, h[k])
            assert np.max(np.abs(batch[k] - single)) < 1e-12


class TestProbeDisc:
    def test_center_conditions(self):
        sc = make_scenario("perturbed-ball")
        p = np.array([0.1, 0.2, -0.1, 0.05])
        t = np.array([1.0, 0.3, -0.2, 0.4])
        scale = 1e-2
        vals, grid = B.probe_disc(sc.chart, p, t, scale=scale)
        center = np.stack([grid.center_value(vals[..., k]) for k in range(2)],
                          -1)
        assert np.max(np.abs(G.to_real(center[None, :])[0] - p)) < 1e-10
        # real x-directional derivative at the center equals scale * t
        pts = G.to_real(vals)                      # (R, T, 4)
        dx = np.array([2.0 * np.real(grid.center_dz(pts[..., k] + 0j))
                       for k in range(4)])
        assert np.max(np.abs(dx - scale * t)) < 1e-9


class TestBishopSolve:
    def test_ball_disc_is_flat(self):
        sc = make_scenario("ball")
        leaves = C.reference_leaves(sc)
        grid = DiscGrid(64, 32)
        t = 0.3
        disc = B.bishop_solve(sc, sc.surface,
                              C._initial_guess(sc, leaves, t, grid, 24),
                              C.make_pinset(sc, leaves, t))
        assert disc.diagnostics["boundary_residual"] < 1e-10
        assert disc.diagnostics["cr_residual"] < 1e-8
        assert disc.diagnostics["mu"] == 0
        # flat disc: z2 constant, z1 a rotation of a real multiple of zeta
        c2 = disc.h_coeffs[1]
        assert np.max(np.abs(c2[1:])) < 1e-9
        c1 = disc.h_coeffs[0]
        assert np.max(np.abs(c1[np.arange(len(c1)) != 1])) < 1e-9

    def test_pin_is_interpolated(self):
        sc = make_scenario("ball")
        leaves = C.reference_leaves(sc)
        grid = DiscGrid(64, 32)
        t = 0.4
        pins = C.make_pinset(sc, leaves, t)
        disc = B.bishop_solve(sc, sc.surface,
                              C._initial_guess(sc, leaves, t, grid, 24), pins)
        f_at_one = disc.boundary_at(np.array([0.0]))[0]
        assert np.linalg.norm(f_at_one - pins.point) < 1e-9
