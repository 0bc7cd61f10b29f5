"""Continuation of the Bishop disc family and assembly of the filling.

The sphere minus its two complex points carries a characteristic line field
(directions tangent to the sphere and complex-tangent to the boundary
hypersurface); its integral leaves run from one complex point to the other
and every attached disc boundary crosses each leaf once.  Three fixed leaves
provide the pin gauge shared by the two disc families grown out of the
elliptic-point models; the families are glued at a common parameter value
and assembled into the Levi-flat filling hypersurface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .bishop import BishopDisc, DEFAULT_N_TAYLOR, PinSet, bishop_solve
from .calculus import DiscGrid
from .errors import (
    BlowUp,
    ClosedLeafDetected,
    ComplexPointProximity,
    DiscSolveFailed,
    FrameDegenerate,
    LeafStalled,
    MaxIterations,
    NewtonStalled,
    NoContraction,
    NoMatch,
    ResidualTooLarge,
    StepUnderflow,
)
from .geometry import disc_area, levi_form, to_complex, to_real

POLE_TRIM = 0.05
LEAF_ANGLES = (0.0, 2.0 * np.pi / 3.0, -2.0 * np.pi / 3.0)


# --- characteristic line field and leaves --------------------------------------


def characteristic_field(scenario, z, trim=POLE_TRIM):
    """Unit direction spanning T S^2 intersected with the complex tangent.

    The line is the null space of the rows {grad rho1, grad rho2, J^T grad r};
    raises ComplexPointProximity when the null space degenerates or z is
    within `trim` of a complex point.
    """
    z = np.asarray(z, dtype=float)
    for pole in scenario.surface.poles:
        if np.min(np.linalg.norm(z - pole, axis=-1)) < trim:
            raise ComplexPointProximity(
                f"point within {trim} of the complex point at {pole}")
    G = scenario.surface.rho_grad(z)                      # (..., 2, 4)
    Jt_gr = np.einsum("...ji,...j->...i", scenario.chart.J(z),
                      scenario.chart.grad_r(z))
    rows = np.concatenate([G, Jt_gr[..., None, :]], axis=-2)
    _, svals, vh = np.linalg.svd(rows)
    if np.min(svals[..., -1]) < 1e-6:
        raise ComplexPointProximity(
            f"characteristic line degenerates (sigma_3 = {np.min(svals[..., -1]):.3e})")
    return vh[..., -1, :]


@dataclass
class CharacteristicLeaf:
    """An integral curve of the characteristic field, from one pole to the other.

    points run from the p-side to the q-side; u/v are the surface coordinates
    of the points, with u unwrapped along the leaf; t is the leaf parameter
    (normalized v-height, 0 at the p pole and 1 at the q pole).
    """

    points: np.ndarray
    u: np.ndarray
    v: np.ndarray
    t: np.ndarray
    v_p: float
    v_q: float

    def point_at(self, t):
        t = float(t)
        coords = [np.interp(t, self.t, self.points[:, k]) for k in range(4)]
        return np.asarray(coords)

    def angle_at_height(self, v):
        """Leaf angle u at height(s) v (interpolated, unwrapped)."""
        order = np.argsort(self.v)
        return np.interp(v, self.v[order], self.u[order])

    def membership(self, surface):
        """Residual function z -> wrapped angle offset from the leaf."""
        order = np.argsort(self.v)
        v_tab, u_tab = self.v[order], self.u[order]

        def member(z):
            uv = surface.to_uv(np.asarray(z, dtype=float))
            u_leaf = np.interp(uv[..., 1], v_tab, u_tab)
            d = uv[..., 0] - u_leaf
            return (d + np.pi) % (2.0 * np.pi) - np.pi

        return member


def height_to_t(scenario, v):
    """Leaf parameter from the surface height coordinate v."""
    v_p = scenario.surface.to_uv(scenario.poles[0].location)[1]
    v_q = scenario.surface.to_uv(scenario.poles[-1].location)[1]
    return (v_p - np.asarray(v)) / (v_p - v_q)


def t_to_height(scenario, t):
    v_p = scenario.surface.to_uv(scenario.poles[0].location)[1]
    v_q = scenario.surface.to_uv(scenario.poles[-1].location)[1]
    return v_p - np.asarray(t) * (v_p - v_q)


def integrate_leaf(scenario, start, step=5e-3, max_steps=20000,
                   trim=POLE_TRIM) -> CharacteristicLeaf:
    """Integrate the characteristic field from near pole p to near pole q.

    Fourth-order Runge-Kutta on the unit line field with a closed-form
    surface projection after every step; the line field is oriented by
    continuity (initially toward the q pole).
    """
    surface = scenario.surface
    p_pole, q_pole = scenario.poles[0].location, scenario.poles[-1].location
    z = surface.project(np.asarray(start, dtype=float))
    prev_dir = (q_pole - p_pole)
    prev_dir = prev_dir / np.linalg.norm(prev_dir)
    pts = [z]

    def rhs(y, ref):
        d = characteristic_field(scenario, y, trim=trim * 0.5)
        if np.dot(d, ref) < 0:
            d = -d
        return d

    for n in range(max_steps):
        try:
            k1 = rhs(z, prev_dir)
            k2 = rhs(surface.project(z + 0.5 * step * k1), k1)
            k3 = rhs(surface.project(z + 0.5 * step * k2), k2)
            k4 = rhs(surface.project(z + step * k3), k3)
        except ComplexPointProximity:
            break
        z = surface.project(z + step * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0)
        prev_dir = k1
        pts.append(z)
        if np.linalg.norm(z - q_pole) < trim:
            break
        if n > 10 and np.linalg.norm(z - pts[0]) < 0.5 * step:
            raise ClosedLeafDetected("leaf returned to its starting point")
    else:
        raise LeafStalled(f"leaf did not reach the target pole in {max_steps} steps")
    if np.linalg.norm(pts[-1] - q_pole) > 2 * trim:
        raise LeafStalled("leaf terminated away from the target pole")

    pts = np.asarray(pts)
    uv = surface.to_uv(pts)
    u = np.unwrap(uv[:, 0])
    v = uv[:, 1]
    v_p = float(surface.to_uv(p_pole)[1])
    v_q = float(surface.to_uv(q_pole)[1])
    t = (v_p - v) / (v_p - v_q)
    return CharacteristicLeaf(points=pts, u=u, v=v, t=t, v_p=v_p, v_q=v_q)


def reference_leaves(scenario, angles=LEAF_ANGLES, t_start=0.02):
    """The three pinned leaves, started on a small circle around pole p."""
    leaves = []
    v0 = t_to_height(scenario, t_start)
    for ang in angles:
        # seed with the surface point at height v0 and angle ang
        seed = _point_at(scenario, v0, ang)
        leaf = integrate_leaf(scenario, seed)
        leaves.append(leaf)
    return leaves


def _point_at(scenario, v, ang):
    """A surface point near height v with angle u = ang (ball-type spheres)."""
    guess = np.array([0.3 * np.cos(ang), 0.3 * np.sin(ang), v, 0.0])
    return scenario.surface.project(guess)


def make_pinset(scenario, leaves, t) -> PinSet:
    point = leaves[0].point_at(t)
    point = scenario.surface.project(point)
    tb = scenario.surface.tangent_basis(point)
    return PinSet(point=point,
                  member2=leaves[1].membership(scenario.surface),
                  member3=leaves[2].membership(scenario.surface),
                  tangent_basis=tb)


# --- per-disc monitor ------------------------------------------------------------


def maslov_index(disc: BishopDisc, surface) -> int:
    """Winding (in half-turns) of the sphere tangent plane around the disc.

    At each boundary sample the real tangent plane of the sphere projects to
    a real line in the complex normal of the disc; the index counts the half
    turns of that line as the boundary is traversed.  Zero for every disc of
    a regular filling family.
    """
    grid = disc.grid
    vals = disc.values()
    g = grid.dz_apply(vals)[..., -1, :]        # (2, T) boundary d_zeta f
    g = np.moveaxis(g, 0, -1)                  # (T, 2)
    norms = np.linalg.norm(g, axis=-1)
    if np.min(norms) < 1e-12:
        raise FrameDegenerate("disc tangent vanishes on the boundary")
    n = np.stack([-np.conj(g[..., 1]), np.conj(g[..., 0])], axis=-1) \
        / norms[..., None]
    pts = disc.boundary_points()
    tb = surface.tangent_basis(pts)            # (T, 4, 2)
    tau = to_complex(np.moveaxis(tb, -1, -2).reshape(pts.shape[0], 2, 4))
    # tau: (T, 2 basis vectors, 2 complex components)
    xi = np.einsum("tbi,ti->tb", tau, np.conj(n))
    pick = np.argmax(np.abs(xi), axis=-1)
    xi = xi[np.arange(len(pick)), pick]
    if np.min(np.abs(xi)) < 1e-10:
        raise FrameDegenerate("sphere tangent projects trivially to the normal")
    # squaring removes the real-line sign ambiguity; the index is the winding
    # of xi^2 in half turns of the line
    sq = np.append(xi ** 2, xi[0] ** 2)
    total = np.sum(np.angle(sq[1:] / sq[:-1]))
    return int(np.round(total / (2.0 * np.pi)))


def hopf_coefficient(disc: BishopDisc, chart) -> float:
    """min over theta of d/d rho (r o f) at the boundary (transversality)."""
    grid = disc.grid
    r_vals = chart.defining_r(disc.points())
    return float(np.min(grid.d_rho[-1] @ r_vals))


def leaf_crossings(disc: BishopDisc, surface, leaf: CharacteristicLeaf) -> int:
    """Number of transversal crossings of the disc boundary with a leaf."""
    member = leaf.membership(surface)
    w = member(disc.boundary_points())
    s = np.where(w >= 0, 1, -1)        # zeros (exact hits) count as positive
    s_next = np.roll(s, -1)
    jumps = np.abs(np.roll(w, -1) - w)
    return int(np.sum((s != s_next) & (jumps < np.pi)))


def monitor(disc: BishopDisc, scenario, leaves) -> dict:
    grid = disc.grid
    max_grad = float(np.max(np.abs(grid.dz_apply(disc.values()))))
    return {
        "mu": maslov_index(disc, scenario.surface),
        "area": disc_area(disc.f, scenario.chart.omega),
        "a_min": hopf_coefficient(disc, scenario.chart),
        "max_grad": max_grad,
        "boundary_leaf_crossings": leaf_crossings(disc, scenario.surface,
                                                  leaves[0]),
    }


def collar_decay(disc: BishopDisc, chart, rho_range=(0.9, 0.99),
                 exponent=4.0 / 3.0) -> float:
    """min over the collar of |r o f| / (1 - rho)^exponent (positive = decay bound)."""
    grid = disc.grid
    mask = (grid.rho >= rho_range[0]) & (grid.rho <= rho_range[1])
    if not np.any(mask):
        raise ValueError("no radial nodes in the collar range")
    r_vals = np.abs(chart.defining_r(disc.points()))[mask]
    denom = (1.0 - grid.rho[mask])[:, None] ** exponent
    return float(np.min(r_vals / denom))


# --- the family continuation -------------------------------------------------------


@dataclass
class DiscFamily:
    discs: list
    t_values: np.ndarray
    monitors: list
    side: str


def _initial_guess(scenario, leaves, t, grid, n_taylor) -> BishopDisc:
    """Flat-circle seed through the leaf-1 pin at parameter t."""
    from .calculus import DiscField

    pin = leaves[0].point_at(t)
    pin = scenario.surface.project(pin)
    z1 = pin[0] + 1j * pin[1]
    c1 = np.zeros(n_taylor + 1, dtype=complex)
    c1[1] = z1                     # boundary circle through the pin at zeta = 1
    c2 = np.array([pin[2] + 1j * pin[3]])
    return BishopDisc(
        f=(DiscField.from_taylor(grid, c1), DiscField.from_taylor(grid, c2)),
        h_coeffs=(c1, c2), t=float(t))


def continue_family(scenario, leaves, t_start, t_stop, grid=None,
                    n_taylor=DEFAULT_N_TAYLOR, newton_tol=1e-10,
                    max_dt=0.025, min_dt=1e-4, grad_cap_factor=1e3,
                    grad_cap=None, side="p") -> DiscFamily:
    """March the pinned Bishop family from t_start to t_stop (snapped exactly).

    Predictor: previous disc's Taylor coefficients.  Step control: halve on
    solver failure (StepUnderflow below min_dt), grow gently on easy solves.
    BlowUp is raised when the disc gradient exceeds grad_cap_factor times its
    initial value.
    """
    if grid is None:
        grid = DiscGrid()
    direction = 1.0 if t_stop >= t_start else -1.0
    dt = max_dt
    t = float(t_start)
    guess = _initial_guess(scenario, leaves, t, grid, n_taylor)
    discs, t_values, monitors = [], [], []
    grad_ref = None

    def solve_at(t_target, seed):
        pins = make_pinset(scenario, leaves, t_target)
        seed = BishopDisc(f=seed.f, h_coeffs=seed.h_coeffs, t=float(t_target))
        return bishop_solve(scenario, scenario.surface, seed, pins,
                            n_taylor=n_taylor, newton_tol=newton_tol)

    disc = solve_at(t, guess)
    while True:
        m = monitor(disc, scenario, leaves)
        if grad_ref is None:
            grad_ref = m["max_grad"]
        cap = grad_cap if grad_cap is not None \
            else grad_cap_factor * max(grad_ref, 1e-12)
        if m["max_grad"] > cap:
            raise BlowUp(m["max_grad"], disc.t)
        discs.append(disc)
        t_values.append(disc.t)
        monitors.append(m)
        if disc.t == float(t_stop):
            break
        while True:
            t_next = disc.t + direction * dt
            if direction * (t_next - t_stop) >= 0:
                t_next = float(t_stop)      # snap the junction exactly
            try:
                nxt = solve_at(t_next, disc)
                break
            except (NewtonStalled, MaxIterations, NoContraction,
                    ResidualTooLarge, DiscSolveFailed):
                dt *= 0.5
                if dt < min_dt:
                    raise StepUnderflow(
                        f"continuation step fell below {min_dt} at t = {disc.t}")
        iters = nxt.diagnostics.get("newton_iters", 0)
        if iters <= 3:
            dt = min(max_dt, dt * 1.5)
        elif iters > 8:
            dt = max(min_dt, dt * 0.5)
        disc = nxt
    return DiscFamily(discs=discs, t_values=np.asarray(t_values),
                      monitors=monitors, side=side)


# --- gluing and assembly -----------------------------------------------------------


def _sample_rings(disc: BishopDisc, radii=(0.3, 0.5, 0.7, 0.9, 0.97, 1.0)):
    grid = disc.grid
    pts = disc.points()
    rows = [int(np.argmin(np.abs(grid.rho - r))) for r in radii]
    return pts[sorted(set(rows))].reshape(-1, 4)


def disc_hausdorff(d1: BishopDisc, d2: BishopDisc) -> float:
    """Symmetric Hausdorff distance between sample rings of two discs."""
    a, b = _sample_rings(d1), _sample_rings(d2)
    D = cdist(a, b)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


@dataclass
class FillingResult:
    discs: list
    t_values: np.ndarray
    monitors: list
    junction_t: float
    glue_distance: float
    metadata: dict = field(default_factory=dict)

    def cloud(self):
        """Point cloud (n, 7): columns (t, rho, theta, x1, y1, x2, y2)."""
        rows = []
        for disc, t in zip(self.discs, self.t_values):
            grid = disc.grid
            pts = disc.points()
            T, R = np.meshgrid(grid.theta, grid.rho)
            col_t = np.full(pts.shape[:2], t)
            rows.append(np.concatenate(
                [col_t[..., None], R[..., None], T[..., None], pts],
                axis=-1).reshape(-1, 7))
        return np.concatenate(rows, axis=0)

    def boundary_cloud(self):
        """Boundary trace points (n, 7), same columns as cloud()."""
        cl = self.cloud()
        return cl[np.isclose(cl[:, 1], 1.0)]


def glue(family_p: DiscFamily, family_q: DiscFamily, tol=1e-5) -> FillingResult:
    """Join the two families at their common snapped parameter value."""
    t_star_p = family_p.t_values[-1]
    t_star_q = family_q.t_values[-1]
    if abs(t_star_p - t_star_q) > 1e-12:
        raise NoMatch(
            f"families end at different parameters {t_star_p} vs {t_star_q}")
    d = disc_hausdorff(family_p.discs[-1], family_q.discs[-1])
    if d > tol:
        raise NoMatch(f"junction discs are {d:.3e} apart (tolerance {tol:g})")
    discs = list(family_p.discs) + list(family_q.discs[-2::-1])
    t_values = np.concatenate([family_p.t_values,
                               family_q.t_values[-2::-1]])
    monitors = list(family_p.monitors) + list(family_q.monitors[-2::-1])
    return FillingResult(discs=discs, t_values=t_values, monitors=monitors,
                         junction_t=float(t_star_p), glue_distance=d)


def assemble_hypersurface(family_p: DiscFamily, family_q: DiscFamily,
                          tol=1e-5) -> FillingResult:
    return glue(family_p, family_q, tol=tol)


# --- Levi-flatness certificate ------------------------------------------------------


def _disc_tangents(disc: BishopDisc):
    """Real angular tangent directions of the disc at all grid nodes, (R, T, 4)."""
    grid = disc.grid
    vals = disc.values()
    dth = np.stack([grid._dtheta_drho(vals[k])[0] for k in range(2)], axis=-1)
    return to_real(dth)


def levi_certificate(result: FillingResult, chart, n_samples=40,
                     n_neighbors=40, seed=0, h_fd=1e-3):
    """Levi form of the assembled hypersurface at random interior samples.

    The hypersurface is reconstructed locally: nearest neighbors of each
    sample give a PCA normal and a quadratic graph fit, whose defining
    function feeds the ambient Levi form in the disc tangent direction (a
    complex tangent direction of the hypersurface).
    """
    n_discs = len(result.discs)
    grid0 = result.discs[0].grid
    per_disc = grid0.n_radial * grid0.n_theta
    cloud = result.cloud()
    tangents = np.concatenate(
        [_disc_tangents(d).reshape(-1, 4) for d in result.discs], axis=0)
    pts = cloud[:, 3:]
    # samples away from the boundary and the caps
    interior = ((cloud[:, 1] > 0.15) & (cloud[:, 1] < 0.9)
                & (cloud[:, 0] > result.t_values.min() + 0.05)
                & (cloud[:, 0] < result.t_values.max() - 0.05))
    idx_pool = np.flatnonzero(interior)
    rng = np.random.default_rng(seed)
    picks = rng.choice(idx_pool, size=min(n_samples, len(idx_pool)),
                       replace=False)
    values = []
    for i in picks:
        x0 = pts[i]
        # neighbors drawn from the sample's disc and its two family
        # neighbors, so the point set is genuinely three-dimensional
        di = int(i // per_disc)
        lo, hi = max(0, di - 1), min(n_discs, di + 2)
        block = pts[lo * per_disc:hi * per_disc]
        dist = np.linalg.norm(block - x0, axis=1)
        radius = 0.12
        nb = np.flatnonzero(dist < radius)
        while len(nb) < n_neighbors and radius < 1.0:
            radius *= 1.5
            nb = np.flatnonzero(dist < radius)
        Q = block[nb] - x0
        # PCA: smallest principal direction is the hypersurface normal
        _, _, vh = np.linalg.svd(Q - Q.mean(axis=0))
        normal = vh[-1]
        tang = vh[:-1]
        xi = Q @ tang.T               # (k, 3) tangential coordinates
        eta = Q @ normal
        # quadratic graph fit eta = q(xi)
        cols = [np.ones(len(xi)), xi[:, 0], xi[:, 1], xi[:, 2],
                xi[:, 0] ** 2, xi[:, 1] ** 2, xi[:, 2] ** 2,
                xi[:, 0] * xi[:, 1], xi[:, 0] * xi[:, 2], xi[:, 1] * xi[:, 2]]
        M = np.stack(cols, axis=1)
        coef, *_ = np.linalg.lstsq(M, eta, rcond=None)

        def r_loc(z):
            d = np.asarray(z, dtype=float) - x0
            s = np.einsum("...i,i->...", d, normal)
            x = np.einsum("...i,ji->...j", d, tang)
            q = (coef[0] + coef[1] * x[..., 0] + coef[2] * x[..., 1]
                 + coef[3] * x[..., 2]
                 + coef[4] * x[..., 0] ** 2 + coef[5] * x[..., 1] ** 2
                 + coef[6] * x[..., 2] ** 2
                 + coef[7] * x[..., 0] * x[..., 1]
                 + coef[8] * x[..., 0] * x[..., 2]
                 + coef[9] * x[..., 1] * x[..., 2])
            return s - q

        X = tangents[i]
        nX = np.linalg.norm(X)
        if nX < 1e-12:
            raise FrameDegenerate("vanishing disc tangent at a sample point")
        values.append(levi_form(chart, r_loc, x0, X / nX, h_fd=h_fd,
                                check=False))
    return np.asarray(values)
