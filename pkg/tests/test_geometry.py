"""Tests for the ambient geometry module (Levi forms, deformation tensors,
exhaustion functions, areas)."""

import numpy as np
import pytest

from leviflat import geometry as G
from leviflat.calculus import DiscField, DiscGrid
from leviflat.errors import (
    FieldDomainError,
    NotNormalized,
    SingularMatrix,
)


def standard_chart():
    return G.AmbientChart(
        J=lambda z: np.broadcast_to(G.J_ST, np.shape(z)[:-1] + (4, 4)))


def perturbed_chart(eps=0.05):
    A0 = np.array([[0.35, 0.20 + 0.10j], [0.15 - 0.05j, 0.30]])

    def A_fn(z):
        z = np.asarray(z, dtype=float)
        z2 = z[..., 2] + 1j * z[..., 3]
        return eps * (1.0 - z2 ** 2)[..., None, None] * A0

    return G.AmbientChart(J=G.j_from_deformation(A_fn), A_fn=A_fn)


class TestStructures:
    def test_j_squared(self):
        assert np.allclose(G.J_ST @ G.J_ST, -np.eye(4))

    def test_complex_real_roundtrip(self):
        z = np.array([1 + 2j, -0.5 + 0.25j])
        assert np.allclose(G.to_complex(G.to_real(z)), z)

    def test_deformation_roundtrip(self):
        """A -> J via j_from_deformation -> A via pointwise recovery."""
        chart = perturbed_chart()
        rng = np.random.default_rng(0)
        pts = rng.uniform(-0.8, 0.8, (10, 4))
        A_direct = chart.A_fn(pts)
        A_rec = G.deformation_tensor_values(chart.J(pts))
        assert np.max(np.abs(A_direct - A_rec)) < 1e-12

    def test_check_invariants(self):
        chart = perturbed_chart()
        rng = np.random.default_rng(1)
        rep = chart.check_invariants(rng.uniform(-0.7, 0.7, (16, 4)))
        assert rep["j_square_error"] < 1e-10
        assert rep["taming_min"] > 0

    def test_antilinear_to_real(self):
        A = np.array([[1 + 2j, 0.5], [0, -1j]])
        U = G.antilinear_to_real(A)
        rng = np.random.default_rng(2)
        v = rng.standard_normal(4)
        lhs = G.to_complex((U @ v)[None, :])[0]
        rhs = A @ np.conj(G.to_complex(v[None, :])[0])
        assert np.allclose(lhs, rhs)

    def test_deformation_tensor_normalization_guard(self):
        chart = perturbed_chart()

        # J(p) differs from the standard structure away from the poles
        with pytest.raises(NotNormalized):
            G.deformation_tensor(chart, np.array([0.0, 0.0, 0.3, 0.0]))

        # at the pole the perturbation vanishes and normalization holds
        dt = G.deformation_tensor(chart, np.array([0.0, 0.0, 1.0, 0.0]))
        assert dt.norm_at(np.array([0.0, 0.0, 1.0, 0.0])) < 1e-12

    def test_singular_matrix_guard(self):
        # J = -J_st makes J_st + J singular
        bad = G.AmbientChart(
            J=lambda z: np.broadcast_to(-G.J_ST, np.shape(z)[:-1] + (4, 4)))
        with pytest.raises(SingularMatrix):
            G.deformation_tensor_values(bad.J(np.zeros((1, 4))))


class TestLeviForm:
    def test_flat_quadratic(self):
        chart = standard_chart()
        rho = lambda z: z[..., 0] ** 2 + z[..., 1] ** 2
        val = G.levi_form(chart, rho, np.zeros(4), np.array([1.0, 0, 0, 0]))
        assert val == pytest.approx(4.0, abs=1e-8)

    def test_levi_is_laplacian_for_standard_j(self):
        # for J_st the Levi form along e_{x1} equals the z1-Laplacian
        chart = standard_chart()
        rho = lambda z: np.exp(z[..., 0]) + z[..., 1] ** 2
        p = np.zeros(4)
        val = G.levi_form(chart, rho, p, np.array([1.0, 0, 0, 0]))
        assert val == pytest.approx(1.0 + 2.0, abs=1e-6)

    def test_quadratic_scaling_in_direction(self):
        chart = standard_chart()
        rho = lambda z: np.sum(np.asarray(z) ** 2, axis=-1)
        p = np.zeros(4)
        t = np.array([1.0, 0.5, -0.2, 0.3])
        v1 = G.levi_form(chart, rho, p, t)
        v2 = G.levi_form(chart, rho, p, 2 * t)
        assert v2 == pytest.approx(4 * v1, rel=1e-8)

    def test_harmonic_direction_vanishes(self):
        # |z2|^4 has vanishing Levi form in the z1 directions
        chart = standard_chart()
        rho = lambda z: (z[..., 2] ** 2 + z[..., 3] ** 2) ** 2
        val = G.levi_form(chart, rho, np.array([0.3, 0.1, 0.0, 0.0]),
                          np.array([1.0, 0, 0, 0]))
        assert abs(val) < 1e-8

    def test_tangent_vector_input(self):
        chart = standard_chart()
        rho = lambda z: z[..., 0] ** 2 + z[..., 1] ** 2
        tv = G.TangentVector(np.zeros(4), np.array([1.0, 0, 0, 0]))
        assert G.levi_form(chart, rho, None, tv) == pytest.approx(4.0,
                                                                  abs=1e-8)

    def test_via_disc_cross_check(self):
        chart = perturbed_chart()
        rho = lambda z: (z[..., 0] ** 2 + 2 * z[..., 1] ** 2
                         + 0.5 * z[..., 2] ** 2 + z[..., 3] ** 2)
        p = np.array([0.1, 0.2, -0.1, 0.05])
        t = np.array([1.0, 0.3, -0.2, 0.4])
        v1 = G.levi_form(chart, rho, p, t)
        v2 = G.levi_form_via_disc(chart, rho, p, t)
        assert abs(v1 - v2) < 1e-6


class TestPshAndExhaustion:
    def test_check_plurisubharmonic_pass(self):
        chart = standard_chart()
        rho = lambda z: np.sum(np.asarray(z) ** 2, axis=-1)
        rng = np.random.default_rng(3)
        samples = [(rng.uniform(-0.5, 0.5, 4), rng.standard_normal(4))
                   for _ in range(8)]
        rep = G.check_plurisubharmonic(chart, rho, samples)
        assert rep.passed
        assert rep.positive_fraction == 1.0

    def test_check_plurisubharmonic_fail(self):
        chart = standard_chart()
        rho = lambda z: -z[..., 0] ** 2 - z[..., 1] ** 2
        samples = [(np.zeros(4), np.array([1.0, 0, 0, 0]))]
        rep = G.check_plurisubharmonic(chart, rho, samples)
        assert not rep.passed

    def test_df_exhaustion_closed_form(self):
        """-(-r e^{-A psi})^eta against a hand-evaluated value."""
        chart = G.AmbientChart(
            J=lambda z: np.broadcast_to(G.J_ST, np.shape(z)[:-1] + (4, 4)),
            defining_r=lambda z: np.sum(np.asarray(z) ** 2, axis=-1) - 1.0,
            psi=lambda z: np.sum(np.asarray(z) ** 2, axis=-1))
        fn = G.df_exhaustion(chart, A=1.0, eta=0.5)
        p = np.array([0.5, 0.5, 0.5, 0.0])   # r = -0.25, psi = 0.75
        expected = -(0.25 * np.exp(-0.75)) ** 0.5
        assert fn(p) == pytest.approx(expected, abs=1e-14)

    def test_df_exhaustion_domain_guard(self):
        chart = G.AmbientChart(
            J=lambda z: np.broadcast_to(G.J_ST, np.shape(z)[:-1] + (4, 4)),
            defining_r=lambda z: np.sum(np.asarray(z) ** 2, axis=-1) - 1.0,
            psi=lambda z: np.sum(np.asarray(z) ** 2, axis=-1))
        fn = G.df_exhaustion(chart, A=1.0, eta=0.5)
        with pytest.raises(FieldDomainError):
            fn(np.array([2.0, 0, 0, 0]))

    def test_df_exhaustion_parameter_validation(self):
        chart = G.AmbientChart(
            J=lambda z: np.broadcast_to(G.J_ST, np.shape(z)[:-1] + (4, 4)),
            defining_r=lambda z: -np.ones(np.shape(z)[:-1]),
            psi=lambda z: np.zeros(np.shape(z)[:-1]))
        with pytest.raises(ValueError):
            G.df_exhaustion(chart, A=-1.0, eta=0.5)
        with pytest.raises(ValueError):
            G.df_exhaustion(chart, A=1.0, eta=1.5)


class TestAreas:
    def test_unit_disc_area(self):
        grid = DiscGrid(64, 32)
        f1 = DiscField.from_taylor(grid, [0.0, 1.0])
        f2 = DiscField.from_taylor(grid, [0.3])
        assert G.disc_area((f1, f2)) == pytest.approx(np.pi, abs=1e-10)

    def test_scaled_disc_area(self):
        grid = DiscGrid(64, 32)
        f1 = DiscField.from_taylor(grid, [0.0, 0.8])
        f2 = DiscField.from_taylor(grid, [0.0])
        assert G.disc_area((f1, f2)) == pytest.approx(0.64 * np.pi, abs=1e-10)

    def test_area_is_parametrization_invariant(self):
        # same image disc under a Moebius reparametrization
        grid = DiscGrid(64, 32)
        a = 0.3
        f1 = DiscField.from_function(grid, lambda z: (z + a) / (1 + a * z))
        f2 = DiscField.from_taylor(grid, [0.0])
        assert G.disc_area((f1, f2)) == pytest.approx(np.pi, abs=1e-8)
