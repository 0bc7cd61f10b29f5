"""Built-in geometric scenarios: ambient charts, spheres, and pole models.

Each scenario packages an ambient chart (almost complex structure, symplectic
form, boundary defining function, plurisubharmonic weight), the two-sphere as
a SurfacePatch in ambient coordinates, and adapted-coordinate models of its
complex (pole) points ready for the elliptic-point theory.

Catalog:
  ball          |z1|^2 + |z2|^2 = 1 with the standard structure; the filling
                is the family of flat discs {z2 = c}.
  weak-m2       |z1|^2 + |z2|^4 = 1, standard structure; weakly Levi-convex
                along {z2 = 0}, the stress case for bounded exhaustions.
  perturbed-ball  the ball with deformation tensor eps (1 - z2^2) A0, a small
                almost complex perturbation vanishing at both poles.
  model-quadric   the non-compact local model x2 = |z1|^2 + gamma Re(z1^2),
                standard structure, one elliptic point at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .bishop import EllipticPointModel, SurfacePatch
from .errors import ConfigError
from .geometry import (
    AmbientChart,
    J_ST,
    STANDARD_OMEGA,
    j_from_deformation,
    to_complex,
    to_real,
)

PERTURBATION_MATRIX = np.array([
    [0.35, 0.20 + 0.10j],
    [0.15 - 0.05j, 0.30],
])


@dataclass
class PoleInfo:
    """A complex point of the sphere with its adapted coordinate chart."""

    location: np.ndarray
    model: EllipticPointModel
    to_adapted: Callable       # ambient real 4-vectors -> adapted
    from_adapted: Callable
    gamma: float


@dataclass
class Scenario:
    name: str
    chart: AmbientChart
    surface: SurfacePatch
    poles: list
    params: dict = field(default_factory=dict)


def _standard_J(z):
    return np.broadcast_to(J_ST, np.shape(z)[:-1] + (4, 4)).copy()


def _zero_A(z):
    return np.zeros(np.shape(z)[:-1] + (2, 2), dtype=complex)


def _ball_type(name: str, m: int, A_fn=None, eps: float = 0.0) -> Scenario:
    """Sphere {|z1|^2 + |z2|^{2m} = 1, y2 = 0} in the domain r < 0."""

    def r(z):
        z = np.asarray(z, dtype=float)
        return (z[..., 0] ** 2 + z[..., 1] ** 2
                + (z[..., 2] ** 2 + z[..., 3] ** 2) ** m - 1.0)

    def r_grad(z):
        z = np.asarray(z, dtype=float)
        R = z[..., 2] ** 2 + z[..., 3] ** 2
        g = np.empty(z.shape)
        g[..., 0] = 2 * z[..., 0]
        g[..., 1] = 2 * z[..., 1]
        g[..., 2] = 2 * m * z[..., 2] * R ** (m - 1)
        g[..., 3] = 2 * m * z[..., 3] * R ** (m - 1)
        return g

    def psi(z):
        z = np.asarray(z, dtype=float)
        return np.sum(z ** 2, axis=-1)

    if A_fn is None:
        J = _standard_J
        A_fn = _zero_A
    else:
        J = j_from_deformation(A_fn)

    chart = AmbientChart(J=J, omega=STANDARD_OMEGA.copy(), defining_r=r,
                         psi=psi, r_grad=r_grad, A_fn=A_fn)

    def rho_pair(z):
        z = np.asarray(z, dtype=float)
        return np.stack([z[..., 3], r(z)], axis=-1)

    def rho_grad(z):
        z = np.asarray(z, dtype=float)
        g1 = np.zeros(z.shape)
        g1[..., 3] = 1.0
        return np.stack([g1, r_grad(z)], axis=-2)

    def to_uv(z):
        z = np.asarray(z, dtype=float)
        return np.stack([np.arctan2(z[..., 1], z[..., 0]), z[..., 2]], axis=-1)

    def project(z):
        z = np.asarray(z, dtype=float)
        out = z.copy()
        out[..., 3] = 0.0
        a = out[..., 0] ** 2 + out[..., 1] ** 2
        b = out[..., 2] ** (2 * m)
        if m == 1:
            u = 1.0 / (a + b)
        else:  # m = 2: s^2 a + s^4 b = 1, stable root of the quadratic in s^2
            u = 2.0 / (a + np.sqrt(a ** 2 + 4.0 * b))
        s = np.sqrt(u)
        out[..., 0] *= s
        out[..., 1] *= s
        out[..., 2] *= s
        return out

    def parametrization(phi, alpha):
        phi = np.asarray(phi, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        g = np.sqrt(np.clip(1.0 - np.cos(phi) ** (2 * m), 0.0, None))
        pts = np.empty(np.broadcast(phi, alpha).shape + (4,))
        pts[..., 0] = g * np.cos(alpha)
        pts[..., 1] = g * np.sin(alpha)
        pts[..., 2] = np.cos(phi)
        pts[..., 3] = 0.0
        return pts

    def area_elements(n_phi=64, n_alpha=128):
        nodes, weights = np.polynomial.legendre.leggauss(n_phi)
        alpha = 2.0 * np.pi * np.arange(n_alpha) / n_alpha
        dalpha = 2.0 * np.pi / n_alpha
        panels = []
        for lo, hi in ((0.0, np.pi / 2), (np.pi / 2, np.pi)):
            phi = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
            wphi = 0.5 * (hi - lo) * weights
            P, A = np.meshgrid(phi, alpha, indexing="ij")
            pts = parametrization(P, A)
            c, s = np.cos(P), np.sin(P)
            g = np.sqrt(np.clip(1.0 - c ** (2 * m), 0.0, None))
            gp = m * c ** (2 * m - 1) * s / np.where(g > 0, g, 1.0)
            du = np.stack([gp * np.cos(A), gp * np.sin(A), -s,
                           np.zeros_like(P)], axis=-1)
            dv = np.stack([-g * np.sin(A), g * np.cos(A),
                           np.zeros_like(P), np.zeros_like(P)], axis=-1)
            w = wphi[:, None] * dalpha * np.ones_like(P)
            panels.append((pts, du, dv, w))
        return panels

    surface = SurfacePatch(
        rho_pair=rho_pair, rho_grad=rho_grad, gamma=0.0,
        parametrization=parametrization, area_elements=area_elements,
        to_uv=to_uv, project=project)

    poles = [_ball_pole(chart, m, A_fn, sign) for sign in (+1, -1)]
    surface.poles = [p.location for p in poles]
    return Scenario(name=name, chart=chart, surface=surface, poles=poles,
                    params={"m": m, "eps": eps})


def _ball_pole(chart: AmbientChart, m: int, A_fn, sign: int) -> PoleInfo:
    """Adapted model at the pole (0, sign): w1 = z1, w2 = 2m (1 - sign z2)."""
    location = np.array([0.0, 0.0, float(sign), 0.0])
    scale = 2.0 * m

    def to_adapted(z):
        z = np.asarray(z, dtype=float)
        w = np.empty(z.shape)
        w[..., 0] = z[..., 0]
        w[..., 1] = z[..., 1]
        w[..., 2] = scale * (1.0 - sign * z[..., 2])
        w[..., 3] = -scale * sign * z[..., 3]
        return w

    def from_adapted(w):
        w = np.asarray(w, dtype=float)
        z = np.empty(w.shape)
        z[..., 0] = w[..., 0]
        z[..., 1] = w[..., 1]
        z[..., 2] = sign * (1.0 - w[..., 2] / scale)
        z[..., 3] = -sign * w[..., 3] / scale
        return z

    # dw/dz = diag(1, -sign * scale) as a complex-linear map
    d4 = np.array([1.0, 1.0, -sign * scale, -sign * scale])
    inv4 = 1.0 / d4
    dc = np.array([1.0, -sign * scale])

    def J_adapted(w):
        return (d4[:, None] * chart.J(from_adapted(w))) * inv4[None, :]

    A_adapted = None
    if A_fn is not None:
        def A_adapted(w):
            return (dc[:, None] * A_fn(from_adapted(w))) * (1.0 / dc)[None, :]

    model_chart = AmbientChart(
        J=J_adapted, omega=chart.omega,
        defining_r=lambda w: chart.defining_r(from_adapted(w)),
        psi=None if chart.psi is None else (lambda w: chart.psi(from_adapted(w))),
        A_fn=A_adapted)

    def rho_adapted(w):
        # normal-form pair: (-r(z), Im w2), Im w2 = -scale * sign * y2
        z = np.asarray(from_adapted(w))
        return np.stack([-chart.defining_r(z),
                         -scale * sign * z[..., 3]], axis=-1)

    model = EllipticPointModel(gamma=0.0, chart=model_chart, rho=rho_adapted)
    return PoleInfo(location=location, model=model, to_adapted=to_adapted,
                    from_adapted=from_adapted, gamma=0.0)


def _perturbation_A(eps: float):
    def A_fn(z):
        z = np.asarray(z, dtype=float)
        z2 = z[..., 2] + 1j * z[..., 3]
        return eps * (1.0 - z2 ** 2)[..., None, None] * PERTURBATION_MATRIX
    return A_fn


def _model_quadric(gamma: float) -> Scenario:
    """Non-compact local model x2 = |z1|^2 + gamma Re(z1^2), standard J."""

    def P(z):
        z = np.asarray(z, dtype=float)
        return (z[..., 0] ** 2 + z[..., 1] ** 2
                + gamma * (z[..., 0] ** 2 - z[..., 1] ** 2))

    def rho_pair(z):
        z = np.asarray(z, dtype=float)
        return np.stack([z[..., 2] - P(z), z[..., 3]], axis=-1)

    def rho_grad(z):
        z = np.asarray(z, dtype=float)
        g1 = np.zeros(z.shape)
        g1[..., 0] = -2.0 * (1.0 + gamma) * z[..., 0]
        g1[..., 1] = -2.0 * (1.0 - gamma) * z[..., 1]
        g1[..., 2] = 1.0
        g2 = np.zeros(z.shape)
        g2[..., 3] = 1.0
        return np.stack([g1, g2], axis=-2)

    def to_uv(z):
        z = np.asarray(z, dtype=float)
        return np.stack([np.arctan2(z[..., 1], z[..., 0]), z[..., 2]], axis=-1)

    def psi(z):
        z = np.asarray(z, dtype=float)
        return np.sum(z ** 2, axis=-1)

    chart = AmbientChart(J=_standard_J, omega=STANDARD_OMEGA.copy(),
                         defining_r=lambda z: P(np.asarray(z, float))
                         - np.asarray(z, float)[..., 2],
                         psi=psi, A_fn=_zero_A)
    surface = SurfacePatch(rho_pair=rho_pair, rho_grad=rho_grad, gamma=gamma,
                           to_uv=to_uv)
    identity = lambda z: np.asarray(z, dtype=float).copy()
    model = EllipticPointModel(gamma=gamma, chart=chart, rho=rho_pair)
    pole = PoleInfo(location=np.zeros(4), model=model, to_adapted=identity,
                    from_adapted=identity, gamma=gamma)
    surface.poles = [pole.location]
    return Scenario(name="model-quadric", chart=chart, surface=surface,
                    poles=[pole], params={"gamma": gamma})


def make_scenario(name: str, **params) -> Scenario:
    """Build a catalog scenario by name; unknown names raise ConfigError."""
    if name == "ball":
        return _ball_type("ball", m=1)
    if name == "weak-m2":
        return _ball_type("weak-m2", m=2)
    if name == "perturbed-ball":
        eps = float(params.get("eps", 0.05))
        if not (0 <= eps <= 0.1):
            raise ConfigError(f"perturbed-ball needs eps in [0, 0.1], got {eps}")
        return _ball_type("perturbed-ball", m=1, A_fn=_perturbation_A(eps),
                          eps=eps)
    if name == "model-quadric":
        gamma = float(params.get("gamma", 0.5))
        if not (0 <= gamma < 1):
            raise ConfigError(
                f"model-quadric needs an elliptic gamma in [0, 1), got {gamma}")
        return _model_quadric(gamma)
    raise ConfigError(f"unknown scenario '{name}'")


SCENARIO_NAMES = ("ball", "weak-m2", "perturbed-ball", "model-quadric")
