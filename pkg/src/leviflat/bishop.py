"""Elliptic-point local theory and the nonlinear Bishop disc solver.

Complex points of a real two-sphere are classified by the invariant gamma of
the normal form z2 = z1 conj(z1) + gamma Re(z1^2); near an elliptic point
(gamma < 1) the model disc family consists of conformal maps onto the
sublevel ellipses of P(z) = |z|^2 + gamma Re(z^2), computed by Theodorsen
iteration.  J-holomorphy is enforced through the resolution operator
Psi: f -> h = f + T(A(f) dbar(conj f)), whose inverse is a contraction for
small deformation tensors; the Bishop solver runs Gauss-Newton on the Taylor
coefficients of the holomorphic unknown h with a three-point boundary gauge.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .calculus import BoundaryField, DiscField, DiscGrid, conjugate
from .errors import (
    AdaptationFailure,
    DiscSolveFailed,
    MaxIterations,
    NegativeGamma,
    NewtonStalled,
    NoContraction,
    ResidualTooLarge,
    TheodorsenDiverged,
    WindingChanged,
)
from .geometry import AmbientChart, to_complex, to_real

DEFAULT_N_TAYLOR = 24


# --- surface patches and complex-point models ---------------------------------


@dataclass
class SurfacePatch:
    """Defining data of the real two-sphere (or a local piece of it).

    rho_pair maps points (..., 4) to the two defining functions (rho1, rho2);
    the surface is {rho_pair = 0}.  project sends nearby points onto the
    surface, to_uv gives global surface coordinates (angle u, height v) used
    for leaf bookkeeping, parametrization/area_elements trace the sphere for
    quadrature.  gamma is the complex-point invariant when the patch is
    centered at one.
    """

    rho_pair: Callable
    rho_grad: Callable
    gamma: Optional[float] = None
    parametrization: Optional[Callable] = None
    area_elements: Optional[Callable] = None
    to_uv: Optional[Callable] = None
    project: Optional[Callable] = None
    poles: list = field(default_factory=list)

    def tangent_basis(self, z):
        """Orthonormal basis of T S^2 = ker(d rho) at surface points (..., 4)."""
        G = self.rho_grad(z)                       # (..., 2, 4)
        _, svals, vh = np.linalg.svd(G)
        if np.min(svals[..., -1]) <= 1e-8:
            raise AdaptationFailure("defining gradients are rank deficient")
        return np.swapaxes(vh[..., 2:, :], -2, -1)  # (..., 4, 2)


@dataclass
class EllipticPointModel:
    """Adapted-coordinate model of a complex point on the sphere."""

    gamma: float
    chart: AmbientChart
    rho: Callable          # adapted defining pair, (..., 4) -> (..., 2)
    delta: float = 1.0

    def __post_init__(self):
        if self.gamma < 0:
            raise NegativeGamma(f"gamma = {self.gamma} < 0")


def classify_point(gamma: float) -> str:
    """'elliptic' (gamma < 1), 'parabolic' (= 1) or 'hyperbolic' (> 1)."""
    if gamma < 0:
        raise NegativeGamma(f"gamma = {gamma} < 0")
    if gamma < 1.0:
        return "elliptic"
    if gamma == 1.0:
        return "parabolic"
    return "hyperbolic"


def quadric_height(gamma):
    """The normal-form quadratic P(z) = |z|^2 + gamma Re(z^2)."""
    def P(z1):
        z1 = np.asarray(z1, dtype=complex)
        return np.abs(z1) ** 2 + gamma * np.real(z1 ** 2)
    return P


def validate_adapted(model: EllipticPointModel, tol=1e-6) -> dict:
    """Check the adapted-coordinate normalization clauses at the model center.

    Verifies that the deformation tensor vanishes at the center, that its
    first column vanishes to second order along {z2 = 0}, and that the
    defining pair agrees with the normal-form quadric up to o(|z1|^2).
    """
    chart = model.chart
    origin = np.zeros(4)
    a0 = np.max(np.abs(chart.deformation_at(origin)))
    if a0 > 1e-10:
        raise AdaptationFailure(
            f"deformation tensor does not vanish at the center (|A| = {a0:.3e})")

    # first column of A restricted to {z2 = 0}: value and z1-derivatives at 0
    h = 1e-4
    col = lambda z: chart.deformation_at(z)[..., :, 0]
    d_first = max(
        np.max(np.abs((col(np.array([h, 0, 0, 0])) - col(np.array([-h, 0, 0, 0])))
                      / (2 * h))),
        np.max(np.abs((col(np.array([0, h, 0, 0])) - col(np.array([0, -h, 0, 0])))
                      / (2 * h))),
    )
    if d_first > tol:
        raise AdaptationFailure(
            f"first column of A is not o(|z|) on z2 = 0 (slope {d_first:.3e})")

    # rho on the normal-form quadric graph must be o(|z1|^2)
    P = quadric_height(model.gamma)
    angles = np.exp(1j * np.linspace(0, 2 * np.pi, 8, endpoint=False))
    ratios = []
    for radius in (1e-2, 1e-3, 1e-4):
        z1 = radius * angles
        pts = to_real(np.stack([z1, P(z1).astype(complex)], axis=-1))
        ratios.append(float(np.max(np.abs(model.rho(pts))) / radius ** 2))
    if not (ratios[-1] <= 0.5 * ratios[0] + 1e-12):
        raise AdaptationFailure(
            f"defining pair does not match the quadric to o(|z1|^2): {ratios}")
    return {"a_at_center": float(a0), "first_column_slope": float(d_first),
            "quadric_ratios": ratios, "passed": True}


def dilate(model: EllipticPointModel, delta: float) -> EllipticPointModel:
    """Push the model through the non-isotropic dilation (z1, z2) -> (z1/sqrt(delta), z2/delta)."""
    if not (0 < delta <= 1):
        raise ValueError("delta must lie in (0, 1]")
    if delta == 1.0:
        return model
    d4 = np.array([delta ** -0.5, delta ** -0.5, 1.0 / delta, 1.0 / delta])
    inv4 = 1.0 / d4
    chart = model.chart

    def pull(z):
        return np.asarray(z, dtype=float) * inv4

    def J_new(z):
        return (d4[:, None] * chart.J(pull(z))) * inv4[None, :]

    A_new = None
    if chart.A_fn is not None:
        dc = np.array([delta ** -0.5, 1.0 / delta])

        def A_new(z):
            return (dc[:, None] * chart.A_fn(pull(z))) * (1.0 / dc)[None, :]

    chart_new = replace(
        chart,
        J=J_new,
        A_fn=A_new,
        defining_r=(None if chart.defining_r is None
                    else lambda z: chart.defining_r(pull(z)) / delta),
        psi=None if chart.psi is None else (lambda z: chart.psi(pull(z))),
        r_grad=None,
    )
    rho_new = lambda z: model.rho(pull(z)) / delta
    return EllipticPointModel(gamma=model.gamma, chart=chart_new,
                              rho=rho_new, delta=model.delta * delta)


def choose_dilation(model: EllipticPointModel, target=0.1, radius=1.0) -> float:
    """Dilation parameter delta making ||A|| <= target on the working polydisc."""
    rng = np.random.default_rng(7)
    pts = rng.uniform(-radius, radius, size=(64, 4))
    delta = 1.0
    for _ in range(40):
        norms = np.linalg.norm(
            dilate(model, delta).chart.deformation_at(pts), axis=(-2, -1))
        if np.max(norms) <= target:
            return delta
        delta *= 0.5
    raise DiscSolveFailed("no dilation achieves the contraction regime")


# --- Theodorsen conformal map onto the model ellipse ---------------------------


def ellipse_map(gamma: float, r: float, n_theta: int = 512, tol: float = 1e-12,
                max_iter: int = 200):
    """Conformal map of the unit disc onto the ellipse {P < r}, P = |z|^2 + gamma Re z^2.

    Returns (phi, coeffs): the boundary correspondence phi(theta_j) and the
    Taylor coefficients of the map, normalized by z(0) = 0, z'(0) > 0.
    Boundary polar form R(phi) = sqrt(r / (1 + gamma cos 2 phi)); the
    correspondence is the Theodorsen fixed point phi = theta + K(log R(phi)),
    K the circle conjugation operator.
    """
    if not (0 <= gamma < 1):
        raise NegativeGamma(f"gamma = {gamma} outside the elliptic range [0, 1)")
    if r <= 0:
        raise ValueError("r must be positive")

    def fixed_point(n, phi_start):
        theta = 2.0 * np.pi * np.arange(n) / n
        phi = theta.copy() if phi_start is None else phi_start
        damping = 1.0
        prev_change = np.inf
        # escalating damping handles maps outside the epsilon-condition regime
        for _ in range(8 * max_iter):
            log_R = 0.5 * np.log(r / (1.0 + gamma * np.cos(2.0 * phi)))
            conj = conjugate(BoundaryField.from_samples(log_R.astype(complex)))
            phi_new = theta + np.real(conj.samples())
            change = float(np.max(np.abs(phi_new - phi)))
            if change > prev_change and damping > 1.0 / 32.0:
                damping *= 0.5
            phi = phi + damping * (phi_new - phi)
            prev_change = change
            if change <= tol:
                return phi
        raise TheodorsenDiverged(f"no fixed point after {8 * max_iter} iterations")

    # eccentric ellipses have slowly decaying map coefficients; refine the
    # sampling until the aliased negative-mode mass is negligible
    phi = None
    n = n_theta
    while True:
        phi = fixed_point(n, phi)
        boundary = np.sqrt(r / (1.0 + gamma * np.cos(2.0 * phi))) \
            * np.exp(1j * phi)
        F = np.fft.fft(boundary) / n
        tail = np.max(np.abs(F[n // 2 + 1:]))
        if tail <= 1e-9:
            break
        if n >= 32 * n_theta:
            raise TheodorsenDiverged(
                f"boundary values are not holomorphic "
                f"(negative-mode mass {tail:.3e} at {n} samples)")
        # warm start on the doubled grid: phi - theta is periodic and smooth
        offset = phi - 2.0 * np.pi * np.arange(n) / n
        n *= 2
        theta_f = 2.0 * np.pi * np.arange(n) / n
        phi = theta_f + np.real(BoundaryField.from_samples(
            offset.astype(complex)).samples(theta_f))

    coeffs = F[:n // 2].copy()
    coeffs[0] = 0.0                       # z(0) = 0
    alpha = -np.angle(coeffs[1])          # z'(0) > 0
    coeffs *= np.exp(1j * alpha * np.arange(len(coeffs)))
    coeffs = np.real_if_close(coeffs, tol=1e3)
    ncut = max(8, int(np.max(np.nonzero(np.abs(coeffs) > 1e-15)[0])) + 1)
    return phi, coeffs[:ncut]


# --- Bishop discs ---------------------------------------------------------------


@dataclass
class BishopDisc:
    """A J-holomorphic disc attached to the sphere along its boundary."""

    f: tuple                 # pair of DiscField components (z1, z2)
    h_coeffs: tuple          # Taylor coefficients of the holomorphic preimage
    t: float                 # family parameter
    diagnostics: dict = field(default_factory=dict)

    @property
    def grid(self):
        return self.f[0].grid

    def values(self):
        """Complex samples, shape (2, R, n_theta)."""
        return np.stack([self.f[0].values, self.f[1].values])

    def points(self):
        """Real 4-vector samples at all grid nodes, shape (R, n_theta, 4)."""
        return to_real(np.stack([self.f[0].values, self.f[1].values], axis=-1))

    def boundary_points(self):
        return self.points()[-1]

    def boundary_at(self, theta):
        """Trig-interpolated boundary points at angles theta, real (len, 4)."""
        z = np.stack([self.f[0].eval_boundary(theta),
                      self.f[1].eval_boundary(theta)], axis=-1)
        return to_real(z)


def model_family(gamma: float, r_list, grid: DiscGrid | None = None) -> list:
    """The one-parameter family of model discs (z_{1,r}(zeta), r) on the quadric."""
    if classify_point(gamma) != "elliptic":
        raise NegativeGamma(
            f"model family requires an elliptic point, gamma = {gamma}")
    r_list = np.asarray(r_list, dtype=float)
    if np.any(r_list <= 0) or np.any(np.diff(r_list) <= 0):
        raise ValueError("r_list must be positive and increasing")
    if grid is None:
        grid = DiscGrid()
    P = quadric_height(gamma)
    out = []
    for r in r_list:
        _, coeffs = ellipse_map(gamma, float(r))
        f1 = DiscField.from_taylor(grid, coeffs)
        f2 = DiscField.from_taylor(grid, [complex(r)])
        bres = float(np.max(np.abs(P(f1.boundary_values) - r)))
        out.append(BishopDisc(
            f=(f1, f2),
            h_coeffs=(coeffs, np.array([complex(r)])),
            t=float(r),
            diagnostics={"boundary_residual": bres, "cr_residual": 0.0}))
    return out


# --- the resolution operator Psi and its inverse --------------------------------


def _psi_rhs(chart: AmbientChart, grid: DiscGrid, vals):
    """T(A(f) dbar(conj f)) for stacked values vals, shape (..., 2, R, n_theta)."""
    dz_vals = grid.dz_apply(vals)
    dbar_conj = np.conj(dz_vals)
    pts = to_real(np.moveaxis(vals, -3, -1))
    A = chart.deformation_at(pts)
    q_pt = np.einsum("...ij,...j->...i", A,
                     np.moveaxis(dbar_conj, -3, -1))
    q = np.moveaxis(q_pt, -1, -3)
    return grid.cg_apply(q)


def psi_apply_values(chart: AmbientChart, grid: DiscGrid, vals):
    return vals + _psi_rhs(chart, grid, vals)


def psi_inverse_values(chart: AmbientChart, grid: DiscGrid, hvals,
                       tol=1e-12, max_iter=100):
    """Fixed point f = h - T(A(f) dbar(conj f)), batched over leading axes."""
    f = hvals.copy()
    prev = np.inf
    growth = 0
    for _ in range(max_iter):
        f_new = hvals - _psi_rhs(chart, grid, f)
        change = float(np.max(np.abs(f_new - f)))
        f = f_new
        if change <= tol:
            return f
        growth = growth + 1 if change > prev else 0
        if growth >= 5:
            raise NoContraction(
                f"psi inverse iteration diverging (change {change:.3e})")
        prev = change
    raise NoContraction(f"psi inverse: no convergence in {max_iter} iterations")


def cr_residual_values(chart: AmbientChart, grid: DiscGrid, vals):
    """sup |dbar f + A(f) dbar(conj f)| (the J-holomorphy defect)."""
    dbar_vals = grid.dbar_apply(vals)
    dbar_conj = np.conj(grid.dz_apply(vals))
    pts = to_real(np.moveaxis(vals, -3, -1))
    A = chart.deformation_at(pts)
    q = np.moveaxis(
        np.einsum("...ij,...j->...i", A, np.moveaxis(dbar_conj, -3, -1)),
        -1, -3)
    return float(np.max(np.abs(dbar_vals + q)))


def psi_apply(chart: AmbientChart, f_pair) -> tuple:
    grid = f_pair[0].grid
    vals = np.stack([f_pair[0].values, f_pair[1].values])
    h = psi_apply_values(chart, grid, vals)
    return (DiscField(grid, h[0]), DiscField(grid, h[1]))


def psi_inverse(chart: AmbientChart, h_pair, tol=1e-12, max_iter=100,
                verify=True) -> tuple:
    grid = h_pair[0].grid
    hvals = np.stack([h_pair[0].values, h_pair[1].values])
    f = psi_inverse_values(chart, grid, hvals, tol=tol, max_iter=max_iter)
    if verify:
        res = cr_residual_values(chart, grid, f)
        if res > 1e-8:
            raise ResidualTooLarge(f"J-holomorphy residual {res:.3e} > 1e-8")
    return (DiscField(grid, f[0]), DiscField(grid, f[1]))


# --- local probe discs (Levi-form oracle) ---------------------------------------


def _normalizing_frame(Jp, t):
    """Real 4x4 L with columns (t, Jt, v, Jv); L^-1 J(p) L = J_st."""
    t = np.asarray(t, dtype=float)
    cols = [t, Jp @ t]
    best, best_res = None, -1.0
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1.0
        Q = np.stack(cols, axis=1)
        res = e - Q @ np.linalg.lstsq(Q, e, rcond=None)[0]
        nr = np.linalg.norm(res)
        if nr > best_res:
            best, best_res = e, nr
    cols += [best, Jp @ best]
    L = np.stack(cols, axis=1)
    if abs(np.linalg.det(L)) < 1e-12:
        raise DiscSolveFailed("degenerate normalizing frame")
    return L


def probe_disc(chart: AmbientChart, p, t, scale=1e-2, grid=None):
    """Small J-holomorphic disc f with f(0) = p and df(0) e1 = scale * t.

    Returns (ambient complex samples (R, n_theta, 2), grid).  Built by the
    resolution-operator inverse in linear coordinates normalizing J(p) to the
    standard structure, with a Newton correction of the center conditions.
    """
    p = np.asarray(p, dtype=float)
    if grid is None:
        grid = DiscGrid(32, 16)
    L = _normalizing_frame(chart.J(p), t)
    Linv = np.linalg.inv(L)

    def J_loc(zl):
        pts = p + scale * np.einsum("ij,...j->...i", L, np.asarray(zl))
        return np.einsum("ij,...jk,kl->...il", Linv, chart.J(pts), L)

    loc_chart = AmbientChart(J=J_loc)
    zpow = np.stack([np.ones_like(grid.zeta), grid.zeta])   # (2, R, T)

    def solve(params):
        # params (..., 8): complex (c0, c1, d0, d1) packed as real pairs
        params = np.asarray(params)
        cc = params[..., 0::2] + 1j * params[..., 1::2]      # (..., 4)
        h = np.empty(params.shape[:-1] + (2,) + grid.zeta.shape, dtype=complex)
        h[..., 0, :, :] = np.einsum("...n,nrt->...rt", cc[..., 0:2], zpow)
        h[..., 1, :, :] = np.einsum("...n,nrt->...rt", cc[..., 2:4], zpow)
        try:
            return psi_inverse_values(loc_chart, grid, h)
        except NoContraction as exc:
            raise DiscSolveFailed(str(exc)) from exc

    def center_residual(f):
        # center value and holomorphic derivative of both components
        c = np.stack([grid.center_value(f[..., k, :, :]) for k in range(2)], -1)
        d = np.stack([grid.center_dz(f[..., k, :, :]) for k in range(2)], -1)
        return np.stack([c[..., 0].real, c[..., 0].imag, c[..., 1].real,
                         c[..., 1].imag, (d[..., 0] - 1.0).real,
                         (d[..., 0]).imag, d[..., 1].real, d[..., 1].imag], -1)

    x = np.array([0, 0, 0, 0, 1, 0, 0, 0], dtype=float)  # h = (zeta, 0)
    for _ in range(8):
        f = solve(x)
        r = center_residual(f)
        if np.max(np.abs(r)) <= 1e-12:
            break
        h_fd = 1e-7
        batch = x[None, :] + h_fd * np.eye(8)
        rb = center_residual(solve(batch))
        Jac = (rb - r[None, :]).T / h_fd
        x = x - np.linalg.solve(Jac, r)
    else:
        f = solve(x)
        if np.max(np.abs(center_residual(f))) > 1e-9:
            raise DiscSolveFailed("probe disc center correction stalled")

    amb = p + scale * np.einsum("ij,...j->...i", L,
                                to_real(np.moveaxis(f, 0, -1)))
    return to_complex(amb), grid


# --- the Gauss-Newton Bishop solver ----------------------------------------------


@dataclass
class PinSet:
    """Gauge data for bishop_solve: f(1) pinned to `point` on a reference leaf,
    f(e^{+-2 pi i/3}) constrained to the leaves behind member2/member3."""

    point: np.ndarray
    member2: Callable
    member3: Callable
    tangent_basis: np.ndarray   # (4, 2) basis of T S^2 at the pin point


def _coeffs_to_vals(coeffs, zpow):
    """(..., 2, N+1) complex coefficients to stacked values (..., 2, R, T)."""
    return np.einsum("...cn,nrt->...crt", coeffs, zpow)


def _pack(coeffs):
    n = coeffs.shape[-1]
    out = np.empty(coeffs.shape[:-2] + (4 * n,))
    flat = coeffs.reshape(coeffs.shape[:-2] + (2 * n,))
    out[..., 0::2] = flat.real
    out[..., 1::2] = flat.imag
    return out


def _unpack(x, n):
    flat = x[..., 0::2] + 1j * x[..., 1::2]
    return flat.reshape(x.shape[:-1] + (2, n))


def bishop_solve(scenario, surface: SurfacePatch, init: BishopDisc,
                 pins: PinSet, n_taylor: int = DEFAULT_N_TAYLOR,
                 newton_tol: float = 1e-10, max_iter: int = 25,
                 fd_step: float = 1e-6, check_winding: bool = True) -> BishopDisc:
    """Solve the Bishop boundary problem rho(Psi^{-1}(h)) = 0 with 4 gauge rows.

    Gauss-Newton on the truncated Taylor coefficients of the holomorphic
    unknown h; residual = the two defining functions at the boundary samples,
    stacked with the pin rows of `pins`; forward-difference Jacobian with
    damped (backtracking) steps.
    """
    chart = scenario.chart
    grid = init.grid
    n = n_taylor + 1
    zpow = np.stack([grid.zeta ** k for k in range(n)])

    coeffs = np.zeros((2, n), dtype=complex)
    for c, init_c in zip(coeffs, init.h_coeffs):
        m = min(n, len(init_c))
        c[:m] = init_c[:m]
    x = _pack(coeffs)

    theta_pins = np.array([2 * np.pi / 3, -2 * np.pi / 3])
    pin_phase = np.exp(1j * np.outer(theta_pins, grid.modes)) / grid.n_theta
    tb = pins.tangent_basis

    def residual(xb):
        vals = _coeffs_to_vals(_unpack(xb, n), zpow)
        f = psi_inverse_values(chart, grid, vals)
        bdry = f[..., -1, :]                       # (..., 2, T) complex
        pts = to_real(np.moveaxis(bdry, -2, -1))   # (..., T, 4)
        rho = surface.rho_pair(pts)                # (..., T, 2)
        F = np.fft.fft(bdry, axis=-1)
        at_pins = np.einsum("pm,...cm->...pc", pin_phase, F)  # (..., 2 pins, 2)
        p_pts = to_real(at_pins)                   # (..., 2, 4)
        f1 = pts[..., 0, :]                        # theta = 0 is a grid node
        g12 = np.einsum("...i,ik->...k", f1 - pins.point, tb)
        g3 = pins.member2(p_pts[..., 0, :])
        g4 = pins.member3(p_pts[..., 1, :])
        parts = [rho.reshape(rho.shape[:-2] + (-1,)), g12,
                 g3[..., None], g4[..., None]]
        return np.concatenate(parts, axis=-1), f

    r0, f0 = residual(x)
    best = float(np.max(np.abs(r0)))
    iters = 0
    while best > newton_tol:
        if iters >= max_iter:
            raise MaxIterations(
                f"no convergence in {max_iter} Gauss-Newton iterations "
                f"(residual {best:.3e})")
        iters += 1
        steps = fd_step * np.maximum(1.0, np.abs(x))
        batch = x[None, :] + np.diag(steps)
        rb, _ = residual(batch)
        J = (rb - r0[None, :]).T / steps[None, :]
        dx = np.linalg.lstsq(J, -r0, rcond=None)[0]
        for k in range(9):
            xt = x + dx * 0.5 ** k
            rt, ft = residual(xt)
            if float(np.max(np.abs(rt))) < best:
                x, r0, f0 = xt, rt, ft
                best = float(np.max(np.abs(r0)))
                break
        else:
            raise NewtonStalled(
                f"no residual decrease after 8 halvings (residual {best:.3e})")

    cr = cr_residual_values(chart, grid, f0)
    if cr > 1e-8:
        raise ResidualTooLarge(f"J-holomorphy residual {cr:.3e} > 1e-8")
    bres = float(np.max(np.abs(
        surface.rho_pair(to_real(np.moveaxis(f0[..., -1, :], -2, -1))))))
    disc = BishopDisc(
        f=(DiscField(grid, f0[0]), DiscField(grid, f0[1])),
        h_coeffs=tuple(_unpack(x, n)),
        t=init.t,
        diagnostics={"newton_iters": iters, "boundary_residual": bres,
                     "cr_residual": cr})
    if check_winding:
        from .continuation import maslov_index
        mu = maslov_index(disc, surface)
        disc.diagnostics["mu"] = mu
        if mu != 0:
            raise WindingChanged(f"winding mu = {mu} differs from 0")
    return disc
