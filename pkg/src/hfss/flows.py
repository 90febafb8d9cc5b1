"""Time integrators producing candidate global weak solutions of the heat flow.

Four schemes share one trajectory container: an explicit projection scheme
for the constrained flow  du/dt = lap u + u |grad u|^2,  a Ginzburg-Landau
penalized relaxation without the pointwise constraint, constant-in-time
trajectories from (numerically) weakly harmonic data, and explicit
Landau-Lifshitz dynamics  du/dt = u x lap u - lambda u x (u x lap u).

Every trajectory records a full-resolution energy ledger: E_m at every step
and the dissipation increment d_m = ||u_{m+1} - u_m||^2_{L2} / dt, so the
discrete energy inequality can be checked over every window afterwards even
when field snapshots are stored on a strided grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
from numba import njit

from .errors import (
    ConfigError,
    ConstraintViolationError,
    InstabilityError,
    NotWeaklyHarmonicError,
    StepSizeError,
    StorageError,
    ValidationError,
)
from .fields import DirectorField, h1_norm, weak_harmonicity_score
from .mesh import BallMesh, integrate, l2_inner

SCHEMES = ("projection", "penalized", "constant", "landau-lifshitz")

# Explicit 7-point diffusion is stable for dt <= h^2/6; Landau-Lifshitz
# additionally divides by the damping strength when lambda > 1.
EXPLICIT_CFL = 1.0 / 6.0


@dataclass(frozen=True)
class SchemeConfig:
    """Parameters of one flow run.

    stride/dense_prefix control snapshot storage: all steps up to
    dense_prefix are kept (restarts and splices happen there), then every
    stride-th step, plus the final step and any step listed in extra_store.
    """

    scheme: str
    dt: float
    horizon: float
    eps: float | None = None
    lambda_damp: float = 0.0
    stride: int = 1
    dense_prefix: int = 8
    gate_tol: float | None = None
    extra_store: tuple = ()

    def n_steps(self) -> int:
        m = int(round(self.horizon / self.dt))
        if abs(m * self.dt - self.horizon) > 1e-9 * max(self.horizon, 1.0):
            raise ConfigError("horizon must be an integer multiple of dt")
        return m

    def validate(self, mesh: BallMesh) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.dt <= 0.0:
            raise ConfigError("dt must be positive")
        if self.horizon < 10.0 * self.dt:
            raise ConfigError("horizon too small: need horizon >= 10 dt")
        self.n_steps()
        if self.stride < 1 or self.dense_prefix < 0:
            raise ConfigError("stride must be >= 1 and dense_prefix >= 0")
        bound = explicit_dt_bound(mesh, self.scheme, self.lambda_damp)
        if bound is not None and self.dt > bound * (1.0 + 1e-12):
            raise ConfigError(
                f"dt={self.dt:.3e} violates the stability bound {bound:.3e} "
                f"for scheme {self.scheme!r}"
            )
        if self.scheme == "penalized":
            if self.eps is None:
                raise ConfigError("penalized scheme requires eps")
            if self.eps < 2.0 * mesh.h:
                raise ConfigError("penalization length must satisfy eps >= 2h")

    def params(self) -> dict:
        out = asdict(self)
        out["extra_store"] = list(self.extra_store)
        return out


def explicit_dt_bound(mesh: BallMesh, scheme: str, lambda_damp: float = 0.0):
    """Largest stable dt for the explicit schemes, None for constant."""
    if scheme == "constant":
        return None
    bound = EXPLICIT_CFL * mesh.h**2
    if scheme == "landau-lifshitz" and lambda_damp > 1.0:
        bound /= lambda_damp
    return bound


class Trajectory:
    """Uniform time grid, strided snapshots, and the energy ledger.

    Snapshot arrays are treated as immutable once stored; constant
    trajectories share a single array across all times.
    """

    def __init__(self, mesh, dt, n_steps, scheme, params, stored_steps,
                 snapshots, energy, dissipation, dense_prefix, *,
                 validate=True):
        self.mesh = mesh
        self.dt = float(dt)
        self.n_steps = int(n_steps)
        self.scheme = scheme
        self.params = dict(params)
        self.stored_steps = np.array(sorted(set(int(m) for m in stored_steps)))
        self.snapshots = dict(snapshots)
        self.energy = np.asarray(energy, dtype=float)
        self.dissipation = np.asarray(dissipation, dtype=float)
        self.dense_prefix = int(dense_prefix)
        self._ledger_g = None
        if validate:
            self._validate()

    def _validate(self):
        m_total = self.n_steps
        if self.energy.shape != (m_total + 1,) or self.dissipation.shape != (m_total,):
            raise ValidationError("ledger lengths do not match the step count")
        if self.stored_steps[0] != 0 or self.stored_steps[-1] != m_total:
            raise ValidationError("first and final snapshots must be stored")
        if set(self.snapshots) != set(self.stored_steps.tolist()):
            raise ValidationError("snapshot dict does not match stored steps")
        prefix = range(min(self.dense_prefix, m_total) + 1)
        if not all(m in self.snapshots for m in prefix):
            raise ValidationError("dense prefix is not fully stored")

    @property
    def horizon(self) -> float:
        return self.n_steps * self.dt

    def time(self, m: int) -> float:
        return m * self.dt

    @property
    def stored_times(self) -> np.ndarray:
        return self.stored_steps * self.dt

    def has_step(self, m: int) -> bool:
        return m in self.snapshots

    def snapshot(self, m: int) -> np.ndarray:
        try:
            return self.snapshots[int(m)]
        except KeyError:
            raise StorageError(f"step {m} is not stored") from None

    def snapshot_field(self, m: int) -> DirectorField:
        return DirectorField(self.mesh, self.snapshot(m), validate=False)

    def initial(self) -> np.ndarray:
        return self.snapshot(0)

    def ledger_g(self) -> np.ndarray:
        """G_m = E_m + sum_{r<m} d_r; the energy inequality says G never rises."""
        if self._ledger_g is None:
            cum = np.concatenate([[0.0], np.cumsum(self.dissipation)])
            self._ledger_g = self.energy + cum
        return self._ledger_g

    def __repr__(self):
        return (f"Trajectory(scheme={self.scheme!r}, n={self.mesh.n}, "
                f"dt={self.dt:.3e}, steps={self.n_steps})")


def _stored_steps(cfg: SchemeConfig, m_total: int):
    stored = set(range(0, min(cfg.dense_prefix, m_total) + 1))
    stored.update(range(0, m_total + 1, cfg.stride))
    stored.update(int(m) for m in cfg.extra_store if 0 <= int(m) <= m_total)
    stored.add(m_total)
    return sorted(stored)


def _vec_norm(values: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("...i,...i->...", values, values))


# Interior nodes never touch the outermost lattice layer, so the stencil
# kernels below work on core views (plain slices, no shifted copies) and
# zero the result outside the interior with a precomputed float mask.


def _core_mask(mesh: BallMesh) -> np.ndarray:
    cached = getattr(mesh, "_core_interior_f", None)
    if cached is None:
        cached = mesh.interior[1:-1, 1:-1, 1:-1].astype(float)
        cached.setflags(write=False)
        mesh._core_interior_f = cached
    return cached


def _lap_raw(values: np.ndarray, mesh: BallMesh) -> np.ndarray:
    core = _core_mask(mesh)
    if values.ndim == 4:
        core = core[..., None]
    c = values[1:-1, 1:-1, 1:-1]
    acc = (values[2:, 1:-1, 1:-1] + values[:-2, 1:-1, 1:-1]
           + values[1:-1, 2:, 1:-1] + values[1:-1, :-2, 1:-1]
           + values[1:-1, 1:-1, 2:] + values[1:-1, 1:-1, :-2]
           - 6.0 * c)
    acc *= core / mesh.h**2
    out = np.zeros_like(values)
    out[1:-1, 1:-1, 1:-1] = acc
    return out


def _grad_sq_raw(values: np.ndarray, mesh: BallMesh) -> np.ndarray:
    """|grad u|^2 from central differences (twice the energy density)."""
    dx = values[2:, 1:-1, 1:-1] - values[:-2, 1:-1, 1:-1]
    dy = values[1:-1, 2:, 1:-1] - values[1:-1, :-2, 1:-1]
    dz = values[1:-1, 1:-1, 2:] - values[1:-1, 1:-1, :-2]
    acc = (np.einsum("...i,...i->...", dx, dx)
           + np.einsum("...i,...i->...", dy, dy)
           + np.einsum("...i,...i->...", dz, dz))
    acc *= _core_mask(mesh) / (2.0 * mesh.h) ** 2
    out = np.zeros(values.shape[:3])
    out[1:-1, 1:-1, 1:-1] = acc
    return out


def _renormalize(v: np.ndarray, original: np.ndarray, mesh: BallMesh) -> np.ndarray:
    """Project v back to the sphere on interior nodes; keep original elsewhere.

    Off-interior entries are taken verbatim from the original array so the
    boundary band stays bit-identical across the whole trajectory.
    """
    norms = _vec_norm(v)
    smallest = norms[mesh.interior].min()
    if smallest < 0.5:
        raise StepSizeError(
            f"renormalization ill-posed: min |v| = {smallest:.3f} < 0.5; reduce dt"
        )
    safe = np.where(mesh.interior, norms, 1.0)
    return np.where(mesh.interior[..., None], v / safe[..., None], original)


@njit(cache=True)
def _projection_kernel(u, out, ii, jj, kk, inv_h2, inv_4h2, dt):
    """Fused explicit projection step over the interior index list.

    Writes the renormalized next state into out (pre-filled with u so band
    and exterior entries stay bit-identical). Returns (sum of |grad u|^2
    over interior, sum of squared nodal moves, min |v| before renorm).
    Scalar loops keep the arithmetic order fixed, so repeated runs are
    bit-identical.
    """
    e2_sum = 0.0
    move = 0.0
    smallest = 1e300
    for p in range(ii.shape[0]):
        i = ii[p]
        j = jj[p]
        k = kk[p]
        e2 = 0.0
        for c in range(3):
            dx = u[i + 1, j, k, c] - u[i - 1, j, k, c]
            dy = u[i, j + 1, k, c] - u[i, j - 1, k, c]
            dz = u[i, j, k + 1, c] - u[i, j, k - 1, c]
            e2 += dx * dx + dy * dy + dz * dz
        e2 *= inv_4h2
        e2_sum += e2
        v0 = 0.0
        v1 = 0.0
        v2 = 0.0
        nrm = 0.0
        for c in range(3):
            lap = (u[i + 1, j, k, c] + u[i - 1, j, k, c]
                   + u[i, j + 1, k, c] + u[i, j - 1, k, c]
                   + u[i, j, k + 1, c] + u[i, j, k - 1, c]
                   - 6.0 * u[i, j, k, c]) * inv_h2
            vc = u[i, j, k, c] + dt * (lap + u[i, j, k, c] * e2)
            if c == 0:
                v0 = vc
            elif c == 1:
                v1 = vc
            else:
                v2 = vc
            nrm += vc * vc
        nv = np.sqrt(nrm)
        if nv < smallest:
            smallest = nv
        o0 = v0 / nv
        o1 = v1 / nv
        o2 = v2 / nv
        d0 = o0 - u[i, j, k, 0]
        d1 = o1 - u[i, j, k, 1]
        d2 = o2 - u[i, j, k, 2]
        move += d0 * d0 + d1 * d1 + d2 * d2
        out[i, j, k, 0] = o0
        out[i, j, k, 1] = o1
        out[i, j, k, 2] = o2
    return e2_sum, move, smallest


@njit(cache=True)
def _grad_sq_sum_kernel(u, ii, jj, kk, inv_4h2):
    e2_sum = 0.0
    for p in range(ii.shape[0]):
        i = ii[p]
        j = jj[p]
        k = kk[p]
        e2 = 0.0
        for c in range(3):
            dx = u[i + 1, j, k, c] - u[i - 1, j, k, c]
            dy = u[i, j + 1, k, c] - u[i, j - 1, k, c]
            dz = u[i, j, k + 1, c] - u[i, j, k - 1, c]
            e2 += dx * dx + dy * dy + dz * dz
        e2_sum += e2 * inv_4h2
    return e2_sum


def _interior_indices(mesh: BallMesh):
    cached = getattr(mesh, "_interior_ijk", None)
    if cached is None:
        idx = np.argwhere(mesh.interior)
        cached = (np.ascontiguousarray(idx[:, 0]),
                  np.ascontiguousarray(idx[:, 1]),
                  np.ascontiguousarray(idx[:, 2]))
        mesh._interior_ijk = cached
    return cached


def _projection_step_raw(u, mesh, dt):
    ii, jj, kk = _interior_indices(mesh)
    out = u.copy()
    e2_sum, _, smallest = _projection_kernel(
        u, out, ii, jj, kk, 1.0 / mesh.h**2, 1.0 / (2.0 * mesh.h) ** 2, dt)
    if smallest < 0.5:
        raise StepSizeError(
            f"renormalization ill-posed: min |v| = {smallest:.3f} < 0.5; reduce dt"
        )
    return out, e2_sum


def _penalized_step_raw(w, mesh, dt, eps):
    mag2 = np.einsum("...i,...i->...", w, w)
    if mag2[mesh.domain].max() > 4.0:
        raise InstabilityError("penalized state blew up: |w| > 2")
    lap = _lap_raw(w, mesh)
    react = ((1.0 - mag2) / eps**2)[..., None] * w
    react[~mesh.interior] = 0.0
    return np.where(mesh.interior[..., None], w + dt * (lap + react), w)


def _landau_lifshitz_step_raw(u, mesh, dt, lambda_damp):
    lap = _lap_raw(u, mesh)
    precession = np.cross(u, lap)
    rhs = precession - lambda_damp * np.cross(u, precession)
    v = u + dt * rhs
    return _renormalize(v, u, mesh)


def _check_explicit_dt(mesh, dt, scheme, lambda_damp=0.0):
    bound = explicit_dt_bound(mesh, scheme, lambda_damp)
    if dt <= 0.0 or dt > bound * (1.0 + 1e-12):
        raise ConfigError(f"dt={dt:.3e} outside (0, {bound:.3e}] for {scheme}")


def step_projection(u: DirectorField, dt: float) -> DirectorField:
    """One explicit step of the constrained heat flow, then renormalize."""
    _check_explicit_dt(u.mesh, dt, "projection")
    out, _ = _projection_step_raw(u.values, u.mesh, dt)
    return DirectorField(u.mesh, out, validate=False)


def step_penalized(w: np.ndarray, mesh: BallMesh, dt: float, eps: float) -> np.ndarray:
    """One explicit Ginzburg-Landau step; |w| is only approximately 1."""
    _check_explicit_dt(mesh, dt, "penalized")
    if eps < 2.0 * mesh.h:
        raise ConfigError("penalization length must satisfy eps >= 2h")
    return _penalized_step_raw(np.asarray(w, dtype=float), mesh, dt, eps)


def step_landau_lifshitz(u: DirectorField, dt: float, lambda_damp: float) -> DirectorField:
    """One explicit Landau-Lifshitz step (precession + damping), renormalized."""
    _check_explicit_dt(u.mesh, dt, "landau-lifshitz", lambda_damp)
    out = _landau_lifshitz_step_raw(u.values, u.mesh, dt, lambda_damp)
    return DirectorField(u.mesh, out, validate=False)


def _project_to_sphere(w: np.ndarray, mesh: BallMesh) -> np.ndarray:
    return _renormalize(w, w, mesh)


def run_flow(a: DirectorField, cfg: SchemeConfig) -> Trajectory:
    """Integrate a scheme from datum a and populate the energy ledger.

    The penalized scheme evolves an unconstrained field; its reported
    snapshots (after t=0) are projected to the sphere and the worst
    projection defect is recorded in the trajectory parameters.
    """
    mesh = a.mesh
    cfg.validate(mesh)
    if a.norm_defect() > 1e-9:
        raise ConstraintViolationError("initial datum violates the unit-norm constraint")
    if cfg.scheme == "constant":
        return constant_trajectory(a, cfg)

    m_total = cfg.n_steps()
    stored = _stored_steps(cfg, m_total)
    stored_set = set(stored)
    energy_series = np.empty(m_total + 1)
    dissipation = np.empty(m_total)
    snapshots = {}
    params = cfg.params()

    def half_energy(e2):
        return 0.5 * float(e2[mesh.interior].sum() * mesh.weight)

    def record(m, reported, prev):
        if m > 0:
            diff = reported - prev
            dissipation[m - 1] = l2_inner(diff, diff, mesh) / cfg.dt
        if m in stored_set:
            snapshots[m] = reported

    state = a.values.copy()

    if cfg.scheme == "projection":
        ii, jj, kk = _interior_indices(mesh)
        inv_h2 = 1.0 / mesh.h**2
        inv_4h2 = 1.0 / (2.0 * mesh.h) ** 2
        half_weight = 0.5 * mesh.weight
        record(0, state, None)
        for m in range(m_total):
            new = state.copy()
            e2_sum, move, smallest = _projection_kernel(
                state, new, ii, jj, kk, inv_h2, inv_4h2, cfg.dt)
            if smallest < 0.5:
                raise StepSizeError(
                    f"renormalization ill-posed at step {m}: "
                    f"min |v| = {smallest:.3f} < 0.5; reduce dt"
                )
            energy_series[m] = half_weight * e2_sum
            dissipation[m] = move * mesh.weight / cfg.dt
            if (m + 1) in stored_set:
                snapshots[m + 1] = new
            state = new
        energy_series[m_total] = half_weight * _grad_sq_sum_kernel(
            state, ii, jj, kk, inv_4h2)
    elif cfg.scheme == "landau-lifshitz":
        energy_series[0] = half_energy(_grad_sq_raw(state, mesh))
        record(0, state, None)
        for m in range(m_total):
            new = _landau_lifshitz_step_raw(state, mesh, cfg.dt, cfg.lambda_damp)
            energy_series[m + 1] = half_energy(_grad_sq_raw(new, mesh))
            record(m + 1, new, state)
            state = new
    else:  # penalized
        projection_defect = 0.0
        reported = state  # datum is already on the sphere; keep it bit-exact
        energy_series[0] = half_energy(_grad_sq_raw(reported, mesh))
        record(0, reported, None)
        for m in range(m_total):
            state = _penalized_step_raw(state, mesh, cfg.dt, cfg.eps)
            defect = np.abs(_vec_norm(state)[mesh.interior] - 1.0).max()
            projection_defect = max(projection_defect, float(defect))
            new_reported = _project_to_sphere(state, mesh)
            energy_series[m + 1] = half_energy(_grad_sq_raw(new_reported, mesh))
            record(m + 1, new_reported, reported)
            reported = new_reported
        params["projection_defect"] = projection_defect

    return Trajectory(mesh, cfg.dt, m_total, cfg.scheme, params, stored,
                      snapshots, energy_series, dissipation, cfg.dense_prefix)


def default_gate_tol(a: DirectorField) -> float:
    """Weak-harmonicity gate threshold: 10 h^2 ||a||_H1.

    The residual of a genuinely harmonic map is pure discretization error,
    so the threshold shrinks at the same O(h^2) rate.
    """
    return 10.0 * a.mesh.h**2 * h1_norm(a)


def constant_trajectory(a: DirectorField, cfg: SchemeConfig) -> Trajectory:
    """Constant-in-time trajectory u(t) = a, admitted only past the gate.

    A constant path is a weak solution only when the datum is weakly
    harmonic; the gate compares the normalized weak-form residual against
    gate_tol (default 10 h^2 ||a||_H1) and rejects otherwise.
    """
    mesh = a.mesh
    if cfg.scheme != "constant":
        raise ConfigError("constant_trajectory requires scheme='constant'")
    cfg.validate(mesh)
    score = weak_harmonicity_score(a)
    threshold = cfg.gate_tol if cfg.gate_tol is not None else default_gate_tol(a)
    if score > threshold:
        raise NotWeaklyHarmonicError(
            f"weak-harmonicity gate failed: residual {score:.3e} > {threshold:.3e}"
        )
    m_total = cfg.n_steps()
    stored = _stored_steps(cfg, m_total)
    values = a.values.copy()
    values.setflags(write=False)
    snapshots = {m: values for m in stored}
    e0 = 0.5 * integrate(_grad_sq_raw(values, mesh), mesh)
    params = cfg.params()
    params.update(gate_score=score, gate_threshold=threshold)
    return Trajectory(mesh, cfg.dt, m_total, "constant", params, stored,
                      snapshots, np.full(m_total + 1, e0), np.zeros(m_total),
                      cfg.dense_prefix)


def energy_inequality_check(traj: Trajectory, m: int, s: int) -> float:
    """Residual E_{m+s} + sum_{r=m}^{m+s-1} d_r - E_m of the energy inequality.

    Admissible iff the residual stays below the ledger tolerance; the check
    is meaningful for every start index m including m = 0.
    """
    if m < 0 or s < 0 or m + s > traj.n_steps:
        raise ValidationError("energy inequality indices out of range")
    g = traj.ledger_g()
    return float(g[m + s] - g[m])


def energy_inequality_sweep(traj: Trajectory):
    """Worst energy-inequality residual over all step windows (m, m+s).

    Returns (residual, m, s) for the maximizing window; a single suffix-max
    scan covers all O(M^2) pairs.
    """
    g = traj.ledger_g()
    suffix = np.maximum.accumulate(g[::-1])[::-1]
    gaps = suffix - g
    m = int(np.argmax(gaps))
    m_end = m + int(np.argmax(g[m:]))
    return float(gaps[m]), m, m_end - m
