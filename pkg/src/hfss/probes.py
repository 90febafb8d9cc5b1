"""Bounded probe functionals used to compare and separate trajectories.

A probe is phi(v) = tanh(<v, g>_L2) for a fixed bounded probe field g:
|phi| <= 1, strictly increasing in the inner product, and Lipschitz in the
L2 norm with constant ||g||_L2. The finitely truncated family of signed
monomial probes is the default separating family; whether it actually
separates the snapshots of a given run is checked a posteriori.
"""

from __future__ import annotations

import numpy as np

from .errors import MeshMismatchError, ValidationError
from .fields import DirectorField, _monomial_exponents
from .mesh import BallMesh, l2_inner, l2_norm, same_mesh


class ProbeFunctional:
    """phi(v) = tanh(<v, g>_L2) for a fixed probe field g (zero off interior)."""

    __slots__ = ("mesh", "g", "label")

    def __init__(self, mesh: BallMesh, g: np.ndarray, label: str = "probe"):
        g = np.array(g, dtype=float)
        if g.shape != (mesh.n, mesh.n, mesh.n, 3):
            raise ValidationError("probe field shape does not match the mesh")
        if not np.isfinite(g).all():
            raise ValidationError("probe field must be finite")
        g[~mesh.interior] = 0.0
        g.setflags(write=False)
        self.mesh = mesh
        self.g = g
        self.label = label

    def inner(self, values: np.ndarray) -> float:
        return l2_inner(values, self.g, self.mesh)

    def value(self, u) -> float:
        values = u.values if isinstance(u, DirectorField) else u
        return float(np.tanh(self.inner(values)))

    __call__ = value

    def negated(self) -> "ProbeFunctional":
        label = self.label[1:] if self.label.startswith("-") else "-" + self.label
        return ProbeFunctional(self.mesh, -self.g, label)

    def lipschitz_bound(self) -> float:
        """||g||_L2 bounds |phi(v) - phi(w)| / ||v - w||_L2 since |tanh'| <= 1."""
        return float(np.sqrt(l2_inner(self.g, self.g, self.mesh)))

    def __repr__(self) -> str:
        return f"ProbeFunctional({self.label!r})"


def evaluate_probe(probe: ProbeFunctional, u: DirectorField) -> float:
    """Evaluate a probe on a director field defined on the same mesh."""
    if not same_mesh(probe.mesh, u.mesh):
        raise MeshMismatchError("probe and field live on different meshes")
    return probe.value(u)


def make_aligned_probe(a: DirectorField) -> ProbeFunctional:
    """Probe maximized over unit-norm fields exactly at a.

    With g proportional to a (interior restriction, zero-extended) and v
    unit-norm, <v, g> <= <a, g> pointwise by Cauchy-Schwarz with equality
    iff v = a, and tanh is increasing. g is scaled to unit L2 norm: the
    maximality is scale-invariant, while keeping <a, g> = ||a|| ~ 2 out of
    tanh saturation preserves usable separation margins between nearby
    trajectories.
    """
    if a.norm_defect() > 1e-9:
        raise ValidationError("aligned probe requires a unit-norm field")
    scale = l2_norm(a.values, a.mesh)
    if scale <= 0.0:
        raise ValidationError("aligned probe requires a nonzero field")
    return ProbeFunctional(a.mesh, a.values / scale, "aligned")


def monomial_probes(mesh: BallMesh, degree: int = 2):
    """Signed monomial probe family x^a y^b z^c e_i, +/-, graded-lex order.

    Degree 2 gives 10 monomials x 3 axes x 2 signs = 60 probes.
    """
    x, y, z = mesh.coords[..., 0], mesh.coords[..., 1], mesh.coords[..., 2]
    probes = []
    for a, b, c in _monomial_exponents(degree):
        profile = (x**a) * (y**b) * (z**c)
        for i in range(3):
            g = np.zeros(mesh.coords.shape)
            g[..., i] = profile
            base = f"x^{a}y^{b}z^{c}e{i + 1}"
            probes.append(ProbeFunctional(mesh, g, "+" + base))
            probes.append(ProbeFunctional(mesh, -g, "-" + base))
    return probes


class ProbeFamily:
    """Ordered, finitely truncated family of probes."""

    def __init__(self, members):
        self.members = tuple(members)
        if not self.members:
            raise ValidationError("probe family must be non-empty")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, k):
        return self.members[k]

    def separates(self, fields, gap: float = 1e-12) -> bool:
        """True if every pair of the given snapshots differs on some probe."""
        vals = np.array([[p.value(f) for p in self.members] for f in fields])
        m = len(fields)
        for i in range(m):
            for j in range(i + 1, m):
                if np.max(np.abs(vals[i] - vals[j])) <= gap:
                    return False
        return True


def default_probe_family(mesh: BallMesh, degree: int = 2) -> ProbeFamily:
    return ProbeFamily(monomial_probes(mesh, degree))
