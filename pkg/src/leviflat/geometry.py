"""Ambient differential geometry: almost complex structures, Levi forms,
plurisubharmonicity, bounded exhaustion functions, symplectic areas.

Points of the ambient chart are real 4-vectors (x1, y1, x2, y2) identified
with (z1, z2) in C^2.  All field evaluators are numpy-vectorized over leading
axes.  Derivatives of scalar fields are taken by central finite differences
with a two-step Richardson consistency guard; scenario fields are smooth
closed-form expressions, so no symbolic machinery is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    FieldDomainError,
    NotNormalized,
    SingularMatrix,
    StepTooLarge,
)

DEFAULT_FD_STEP = 1e-4
RICHARDSON_RTOL = 1e-3


def standard_j(n=2):
    """The standard complex structure on R^(2n) in (x1, y1, ..., xn, yn) order."""
    J = np.zeros((2 * n, 2 * n))
    for k in range(n):
        J[2 * k, 2 * k + 1] = -1.0
        J[2 * k + 1, 2 * k] = 1.0
    return J


J_ST = standard_j(2)

STANDARD_OMEGA = np.zeros((4, 4))
STANDARD_OMEGA[0, 1] = STANDARD_OMEGA[2, 3] = 1.0
STANDARD_OMEGA[1, 0] = STANDARD_OMEGA[3, 2] = -1.0


def to_complex(v):
    """Real (..., 2n) vectors to complex (..., n)."""
    v = np.asarray(v, dtype=float)
    return v[..., 0::2] + 1j * v[..., 1::2]


def to_real(z):
    """Complex (..., n) vectors to real (..., 2n)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def antilinear_to_real(A):
    """Real matrix of the anti-linear map v -> A conj(v), A complex (..., n, n)."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[-1]
    U = np.zeros(A.shape[:-2] + (2 * n, 2 * n))
    re, im = A.real, A.imag
    for j in range(n):
        for k in range(n):
            U[..., 2 * j, 2 * k] = re[..., j, k]
            U[..., 2 * j, 2 * k + 1] = im[..., j, k]
            U[..., 2 * j + 1, 2 * k] = im[..., j, k]
            U[..., 2 * j + 1, 2 * k + 1] = -re[..., j, k]
    return U


def j_from_deformation(A_fn):
    """Almost complex structure field built from a deformation tensor field.

    Inverts u = -(J_st + J)^(-1) (J_st - J): with u(v) = A conj(v) this is
    J = J_st (I + u)(I - u)^(-1), valid while ||u|| < 1.
    """
    def J(z):
        z = np.asarray(z, dtype=float)
        U = antilinear_to_real(A_fn(z))
        n2 = U.shape[-1]
        I = np.eye(n2)
        jst = standard_j(n2 // 2)
        return jst @ (I + U) @ np.linalg.inv(I - U)
    return J


@dataclass
class AmbientChart:
    """Coordinate chart of the ambient almost complex 4-manifold.

    J maps points (..., 4) to real matrices (..., 4, 4); omega is a constant
    antisymmetric matrix or a matrix field; defining_r is the boundary
    defining function (r < 0 inside); psi an optional strictly
    plurisubharmonic weight.
    """

    J: Callable[[np.ndarray], np.ndarray]
    omega: np.ndarray | Callable[[np.ndarray], np.ndarray] = field(
        default_factory=lambda: STANDARD_OMEGA.copy())
    defining_r: Optional[Callable[[np.ndarray], np.ndarray]] = None
    psi: Optional[Callable[[np.ndarray], np.ndarray]] = None
    r_grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    box: tuple = ((-1.5, 1.5),) * 4
    # optional closed-form deformation tensor field, (..., 4) -> (..., 2, 2);
    # when present the disc solvers use it instead of inverting J pointwise
    A_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def deformation_at(self, z):
        """Deformation tensor samples at points z (closed form if available)."""
        if self.A_fn is not None:
            return self.A_fn(z)
        return deformation_tensor_values(self.J(z))

    def omega_at(self, z):
        if callable(self.omega):
            return self.omega(z)
        return np.broadcast_to(self.omega, np.shape(z)[:-1] + (4, 4))

    def grad_r(self, z, h=DEFAULT_FD_STEP):
        if self.r_grad is not None:
            return self.r_grad(z)
        return fd_gradient(self.defining_r, z, h)

    def check_invariants(self, samples, rng=None, tol=1e-10):
        """J^2 = -I, taming and closedness checks at sample points."""
        samples = np.atleast_2d(samples)
        J = self.J(samples)
        jj = np.einsum("...ij,...jk->...ik", J, J)
        err = np.max(np.abs(jj + np.eye(J.shape[-1])))
        if err > tol:
            raise SingularMatrix(f"J^2 + I deviates by {err:.3e}")
        rng = rng or np.random.default_rng(0)
        v = rng.standard_normal(samples.shape)
        om = self.omega_at(samples)
        jv = np.einsum("...ij,...j->...i", J, v)
        tame = np.einsum("...i,...ij,...j->...", v, om, jv)
        if np.min(tame) <= 0:
            raise SingularMatrix("taming condition omega(v, Jv) > 0 violated")
        return {"j_square_error": float(err), "taming_min": float(np.min(tame))}


@dataclass
class TangentVector:
    base: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if not (np.all(np.isfinite(self.base)) and np.all(np.isfinite(self.v))):
            raise ValueError("tangent vector entries must be finite")


@dataclass
class DeformationTensor:
    """Complex matrix field A with u(z) v = A(z) conj(v) encoding J - J_st."""

    A: Callable[[np.ndarray], np.ndarray]
    base_point: np.ndarray

    def norm_at(self, z):
        return np.linalg.norm(self.A(z), axis=(-2, -1))


def deformation_tensor_values(J_values):
    """Deformation tensor samples from J samples (..., 2n, 2n)."""
    J_values = np.asarray(J_values, dtype=float)
    n2 = J_values.shape[-1]
    jst = standard_j(n2 // 2)
    S = jst + J_values
    det = np.linalg.det(S)
    if np.any(np.abs(det) < 1e-12):
        raise SingularMatrix("J_st + J(z) is numerically singular")
    U = -np.linalg.solve(S, np.broadcast_to(jst, J_values.shape) - J_values)
    n = n2 // 2
    A = np.zeros(J_values.shape[:-2] + (n, n), dtype=complex)
    for k in range(n):
        e = np.zeros(n2)
        e[2 * k] = 1.0  # real unit vector for the k-th complex coordinate
        col = np.einsum("...ij,j->...i", U, e)
        A[..., :, k] = to_complex(col)
    return A


def deformation_tensor(chart: AmbientChart, p) -> DeformationTensor:
    """Deformation tensor field of chart.J, normalized to vanish at p."""
    p = np.asarray(p, dtype=float)
    Jp = chart.J(p)
    dev = np.max(np.abs(Jp - standard_j(Jp.shape[-1] // 2)))
    if dev > 1e-10:
        raise NotNormalized(
            f"J(p) deviates from the standard structure by {dev:.3e}")

    def A(z):
        return deformation_tensor_values(chart.J(z))

    return DeformationTensor(A=A, base_point=p)


# --- finite-difference scalar calculus ---------------------------------------


def fd_gradient(f, z, h=DEFAULT_FD_STEP):
    z = np.asarray(z, dtype=float)
    grad = np.empty(z.shape)
    for i in range(z.shape[-1]):
        dz = np.zeros(z.shape[-1])
        dz[i] = h
        grad[..., i] = (f(z + dz) - f(z - dz)) / (2 * h)
    return grad


def _directional(f, z, d, h):
    """Directional derivative of scalar f along (possibly non-unit) d."""
    return (f(z + h * d) - f(z - h * d)) / (2 * h)


def _levi_form_step(chart, rho, p, t, h):
    """One finite-difference evaluation of -d(J* d rho)(X, JX) at step h."""
    p = np.asarray(p, dtype=float)
    t = np.asarray(t, dtype=float)

    def dr_along(z, w):
        # d(rho)(w) at points z, w fixed vector or field values
        return np.sum(fd_gradient(rho, z, h) * w, axis=-1)

    def beta_x(z):
        # (J* d rho)(X) with X constant = t
        Jz = chart.J(z)
        jt = np.einsum("...ij,...j->...i", Jz, np.broadcast_to(t, z.shape))
        return dr_along(z, jt)

    def beta_y(z):
        # (J* d rho)(Y) with Y = J t; J(JY) = -t exactly
        return -dr_along(z, np.broadcast_to(t, z.shape))

    Jp = chart.J(p)
    y_p = Jp @ t

    term1 = _directional(beta_y, p, t, h)
    term2 = _directional(beta_x, p, y_p, h)

    # [X, Y](p) = directional derivative of z -> J(z) t along t
    JtD = (np.einsum("...ij,j->...i", chart.J(p + h * t), t)
           - np.einsum("...ij,j->...i", chart.J(p - h * t), t)) / (2 * h)
    bracket_term = np.sum(fd_gradient(rho, p, h) * (Jp @ JtD), axis=-1)

    return -(term1 - term2 - bracket_term)


def levi_form(chart: AmbientChart, rho, p, t, h_fd=DEFAULT_FD_STEP,
              check=True):
    """Levi form -d(J* d rho)(X, JX) at p in direction t (constant extension)."""
    if isinstance(t, TangentVector):
        p, t = t.base, t.v
    v1 = _levi_form_step(chart, rho, p, t, h_fd)
    if not check:
        return float(v1)
    v2 = _levi_form_step(chart, rho, p, t, h_fd / 2.0)
    scale = max(1.0, abs(v2))
    if abs(v1 - v2) / scale > RICHARDSON_RTOL:
        raise StepTooLarge(
            f"Richardson disagreement {abs(v1 - v2) / scale:.3e} at h={h_fd:g}")
    return float((4.0 * v2 - v1) / 3.0)


def levi_form_via_disc(chart: AmbientChart, rho, p, t, scale=1e-2,
                       grid=None):
    """Levi form via a small J-holomorphic probe disc: Delta(rho o f)(0).

    Independent oracle for levi_form; builds the disc with the resolution
    operator's inverse in coordinates linearly normalized so J(p) = J_st.
    """
    from .bishop import probe_disc  # local import, bishop depends on geometry

    if isinstance(t, TangentVector):
        p, t = t.base, t.v
    p = np.asarray(p, dtype=float)
    t = np.asarray(t, dtype=float)
    f_vals, grid = probe_disc(chart, p, t, scale=scale, grid=grid)
    # f_vals: complex (..., R, n_theta, 2) ambient samples of the disc
    pts = to_real(f_vals)
    g = rho(pts)
    lap = grid.laplacian_at_center(np.real(g))
    return float(lap) / scale**2


@dataclass
class PshReport:
    min_value: float
    argmin: tuple
    passed: bool
    values: np.ndarray
    positive_fraction: float


def check_plurisubharmonic(chart: AmbientChart, rho, samples,
                           tol=-1e-8, h_fd=DEFAULT_FD_STEP) -> PshReport:
    """Evaluate the Levi form on (point, tangent) samples; pass iff min >= tol."""
    if len(samples) == 0:
        raise ValueError("samples must be nonempty")
    vals = np.array([
        levi_form(chart, rho, p, t, h_fd=h_fd) for p, t in samples])
    imin = int(np.argmin(vals))
    return PshReport(
        min_value=float(vals[imin]),
        argmin=samples[imin],
        passed=bool(vals[imin] >= tol),
        values=vals,
        positive_fraction=float(np.mean(vals > 0)),
    )


def df_exhaustion(chart: AmbientChart, A: float, eta: float):
    """Bounded exhaustion candidate -(-r e^(-A psi))^eta on {r < 0}."""
    if chart.psi is None:
        raise ValueError("chart has no plurisubharmonic weight psi")
    if not (A >= 0 and 0 < eta <= 1):
        raise ValueError("need A >= 0 and eta in (0, 1]")

    def field_fn(z):
        r = chart.defining_r(z)
        if np.any(r >= 0):
            raise FieldDomainError("exhaustion evaluated where r >= 0")
        return -np.power(-r * np.exp(-A * chart.psi(z)), eta)

    return field_fn


# --- symplectic areas ---------------------------------------------------------


def disc_area(disc, omega=None):
    """Integral of the pullback of omega over a disc (pair of DiscFields)."""
    f1, f2 = disc
    grid = f1.grid
    if omega is None:
        omega = STANDARD_OMEGA
    dth1, drh1 = grid._dtheta_drho(f1.values)
    dth2, drh2 = grid._dtheta_drho(f2.values)
    u = to_real(np.stack([drh1, drh2], axis=-1))   # (R, nt, 4)
    v = to_real(np.stack([dth1, dth2], axis=-1))
    if callable(omega):
        pts = to_real(np.stack([f1.values, f2.values], axis=-1))
        om = omega(pts)
    else:
        om = omega
    integrand = np.einsum("...i,...ij,...j->...", u,
                          np.broadcast_to(om, u.shape + (4,)), v)
    # area weights carry a rho factor; the pullback integrand needs d rho d theta
    return float(np.sum(integrand / grid.rho[:, None] * grid.area_weights))


def sphere_area_bound(surface, omega=None):
    """Upper bound int_{S^2} |omega| by quadrature on the surface atlas."""
    if omega is None:
        omega = STANDARD_OMEGA
    total = 0.0
    for pts, du, dv, w in surface.area_elements():
        if callable(omega):
            om = omega(pts)
        else:
            om = np.broadcast_to(omega, pts.shape[:-1] + (4, 4))
        vals = np.abs(np.einsum("...i,...ij,...j->...", du, om, dv))
        total += float(np.sum(vals * w))
    return total
