"""Sphere-valued director fields and their static energetics.

A director field assigns one unit 3-vector to every node of a ball mesh
(interior + band). Energies, tension fields and the weak-form residuals of
the harmonic map equation  laplacian(u) + u |grad u|^2 = 0  are evaluated
with the mesh module's central-difference operators. Throughout, |grad u|^2
is taken as twice the energy density so the energy and the tension are
computed from the same discrete gradient.
"""

from __future__ import annotations

import numpy as np

from .errors import ConstraintViolationError, InvalidTestFieldError, ValidationError
from .mesh import BallMesh, gradient, integrate, l2_inner, laplacian, shifted

# Construction-time tolerance on | |u| - 1 |; operations re-check at the
# looser runtime tolerance below before differentiating.
UNIT_NORM_TOL = 1e-12
UNIT_NORM_RUNTIME_TOL = 1e-9


class DirectorField:
    """One unit vector per mesh node; values off the domain are zero."""

    __slots__ = ("mesh", "values")

    def __init__(self, mesh: BallMesh, values: np.ndarray, *, validate: bool = True):
        values = np.array(values, dtype=float)
        if values.shape != (mesh.n, mesh.n, mesh.n, 3):
            raise ValidationError(
                f"director field values must have shape {(mesh.n,) * 3 + (3,)}, "
                f"got {values.shape}"
            )
        values[~mesh.domain] = 0.0
        self.mesh = mesh
        self.values = values
        if validate:
            if not np.isfinite(values[mesh.domain]).all():
                raise ConstraintViolationError("non-finite values on the mesh domain")
            defect = self.norm_defect()
            if defect > UNIT_NORM_TOL:
                raise ConstraintViolationError(
                    f"unit-norm defect {defect:.3e} exceeds {UNIT_NORM_TOL:.0e}"
                )

    def norm_defect(self) -> float:
        """Max over domain nodes of | |u| - 1 |."""
        norms = np.linalg.norm(self.values[self.mesh.domain], axis=-1)
        return float(np.abs(norms - 1.0).max())

    def copy(self) -> "DirectorField":
        return DirectorField(self.mesh, self.values, validate=False)

    def __repr__(self) -> str:
        return f"DirectorField(mesh={self.mesh!r})"


def normalize_field(mesh: BallMesh, raw: np.ndarray) -> DirectorField:
    """Pointwise-normalize a vector field on the domain into a director field."""
    norms = np.linalg.norm(raw, axis=-1)
    if np.any((norms < 1e-14) & mesh.domain):
        raise ConstraintViolationError("cannot normalize a (near-)zero vector")
    safe = np.where(mesh.domain, norms, 1.0)
    return DirectorField(mesh, raw / safe[..., None])


def _require_unit(u: DirectorField) -> None:
    defect = u.norm_defect()
    if defect > UNIT_NORM_RUNTIME_TOL:
        raise ConstraintViolationError(
            f"unit-norm defect {defect:.3e} exceeds runtime tolerance"
        )


def energy_density(u: DirectorField) -> np.ndarray:
    """e(x) = 1/2 sum_{i,alpha} (d u^i / d x^alpha)^2 on interior nodes."""
    _require_unit(u)
    grad = gradient(u.values, u.mesh)
    return 0.5 * np.einsum("...ia,...ia->...", grad, grad)


def energy(u: DirectorField) -> float:
    """Dirichlet energy E(u) = integral of the energy density."""
    return integrate(energy_density(u), u.mesh)


def h1_norm(u: DirectorField) -> float:
    """Gradient seminorm, normalized so that E(u) = 1/2 ||u||^2."""
    return float(np.sqrt(max(2.0 * energy(u), 0.0)))


def tension(u: DirectorField) -> np.ndarray:
    """tau(u) = laplacian(u) + u |grad u|^2, the constrained negative energy gradient."""
    _require_unit(u)
    lap = laplacian(u.values, u.mesh)
    e2 = 2.0 * energy_density(u)
    out = lap + u.values * e2[..., None]
    out[~u.mesh.interior] = 0.0
    return out


def tangent_project(eta: np.ndarray, u: DirectorField) -> np.ndarray:
    """Project a test field onto the tangent planes of u: eta - (eta . u) u."""
    coef = np.einsum("...i,...i->...", eta, u.values)
    return eta - coef[..., None] * u.values


def weak_harmonic_residual(u: DirectorField, tests) -> np.ndarray:
    """Weak-form residuals of the harmonic map equation against test fields.

    Each test is tangent-projected before use and must vanish identically on
    the boundary band. Returns one residual
        r[eta] = integral( sum_a d_a u . d_a eta - |grad u|^2 (u . eta) )
    per test.
    """
    _require_unit(u)
    mesh = u.mesh
    grad_u = gradient(u.values, mesh)
    e2 = 2.0 * energy_density(u)
    out = []
    for eta in tests:
        if np.any(eta[mesh.band] != 0.0):
            raise InvalidTestFieldError("test field does not vanish on the band")
        eta_t = tangent_project(eta, u)
        grad_eta = gradient(eta_t, mesh)
        pairing = np.einsum("...ia,...ia->...", grad_u, grad_eta)
        zeroth = e2 * np.einsum("...i,...i->...", u.values, eta_t)
        out.append(integrate(pairing - zeroth, mesh))
    return np.asarray(out)


def weak_harmonicity_score(u: DirectorField, tests=None) -> float:
    """Max residual normalized by the H1 seminorm of the projected test.

    Degenerate tests (projection collapses them) are skipped. For a truly
    weakly harmonic map the score is pure discretization error, O(h^2).
    """
    mesh = u.mesh
    if tests is None:
        tests = default_test_fields(mesh)
    grad_u = gradient(u.values, mesh)
    e2 = np.einsum("...ia,...ia->...", grad_u, grad_u)
    score = 0.0
    for eta in tests:
        if np.any(eta[mesh.band] != 0.0):
            raise InvalidTestFieldError("test field does not vanish on the band")
        eta_t = tangent_project(eta, u)
        grad_eta = gradient(eta_t, mesh)
        seminorm = np.sqrt(max(integrate(
            np.einsum("...ia,...ia->...", grad_eta, grad_eta), mesh), 0.0))
        if seminorm < 1e-12:
            continue
        pairing = np.einsum("...ia,...ia->...", grad_u, grad_eta)
        zeroth = e2 * np.einsum("...i,...i->...", u.values, eta_t)
        residual = integrate(pairing - zeroth, mesh)
        score = max(score, abs(residual) / seminorm)
    return score


def _monomial_exponents(degree: int):
    """Graded-lexicographic exponent triples (a, b, c) with a+b+c <= degree."""
    out = []
    for total in range(degree + 1):
        for a in range(total, -1, -1):
            for b in range(total - a, -1, -1):
                out.append((a, b, total - a - b))
    return out


def default_test_fields(mesh: BallMesh, degree: int = 2):
    """Cutoff monomial test fields, unit L2 norm, vanishing on band and beyond.

    The cutoff (1 - |x|^2)^2 is clipped to zero outside the interior; being
    C^1 at the sphere, the clip only perturbs residuals at O(h^2).
    """
    cutoff = np.where(mesh.interior, (1.0 - mesh.radius**2) ** 2, 0.0)
    x, y, z = mesh.coords[..., 0], mesh.coords[..., 1], mesh.coords[..., 2]
    tests = []
    for a, b, c in _monomial_exponents(degree):
        profile = cutoff * (x**a) * (y**b) * (z**c)
        for i in range(3):
            eta = np.zeros(mesh.coords.shape)
            eta[..., i] = profile
            scale = np.sqrt(l2_inner(eta, eta, mesh))
            tests.append(eta / scale)
    return tests


def shell_test_fields(mesh: BallMesh, r_lo: float, r_hi: float, degree: int = 1):
    """Test fields supported in the spherical shell r_lo <= |x| <= r_hi."""
    r = mesh.radius
    bump = np.where((r >= r_lo) & (r <= r_hi) & mesh.interior,
                    ((r - r_lo) * (r_hi - r)) ** 2, 0.0)
    x, y, z = mesh.coords[..., 0], mesh.coords[..., 1], mesh.coords[..., 2]
    tests = []
    for a, b, c in _monomial_exponents(degree):
        profile = bump * (x**a) * (y**b) * (z**c)
        for i in range(3):
            eta = np.zeros(mesh.coords.shape)
            eta[..., i] = profile
            scale = np.sqrt(l2_inner(eta, eta, mesh))
            if scale < 1e-14:
                continue
            tests.append(eta / scale)
    return tests


def stationarity_residual(u: DirectorField):
    """Inner-variation residual R_k and its volume-integrated absolute size.

    R_k = sum_j d_k |d_j u|^2 - 2 sum_j d_j <d_j u, d_k u>, built from nested
    central differences. The outer derivatives need the inner products one
    cell away, so R is only defined (and returned nonzero) on interior nodes
    whose 6-neighbors are all interior.

    Returns (R, sizes) where R has shape (n, n, n, 3) and sizes[k] is the
    integral of |R_k|.
    """
    _require_unit(u)
    mesh = u.mesh
    grad = gradient(u.values, mesh)
    q = np.einsum("...ij,...ik->...jk", grad, grad)
    trace_q = np.einsum("...jj->...", q)
    valid = mesh.safe_interior(1)

    def d_axis(scalar, axis):
        return (shifted(scalar, axis, 1) - shifted(scalar, axis, -1)) / (2.0 * mesh.h)

    R = np.zeros(u.values.shape)
    for k in range(3):
        term = d_axis(trace_q, k)
        for j in range(3):
            term = term - 2.0 * d_axis(q[..., j, k], j)
        R[..., k] = np.where(valid, term, 0.0)
    sizes = np.array([integrate(np.abs(R[..., k]), mesh) for k in range(3)])
    return R, sizes


def stationarity_identity_defect(u: DirectorField) -> float:
    """Max over safe nodes of |R_k + 2 <tension(u), d_k u>|.

    The continuum identity sum_j d_j <d_j u, d_k u> = <lap u, d_k u>
    + 1/2 d_k |grad u|^2 makes this O(h^2) for smooth fields.
    """
    mesh = u.mesh
    R, _ = stationarity_residual(u)
    tau = tension(u)
    grad = gradient(u.values, mesh)
    cross = np.einsum("...i,...ik->...k", tau, grad)
    defect = np.abs(R + 2.0 * cross)
    safe = mesh.safe_interior(2)
    return float(defect[safe].max())
