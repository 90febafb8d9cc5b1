"""Named analytic initial data for the flows.

The built-ins cover the regimes the solvers are exercised in: a constant map
(zero energy), the smooth harmonic great-circle map (sin x1, 0, cos x1), the
singular weakly harmonic equator map x/|x|, and smooth non-harmonic
perturbations of a constant. Every constructor normalizes pointwise, so the
unit-norm constraint holds to round-off at all domain nodes.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .fields import DirectorField, normalize_field
from .mesh import BallMesh

DATUM_NAMES = ("constant", "great-circle", "equator", "bump",
               "perturbed-circle", "random", "custom-file")


def constant_map(mesh: BallMesh, direction=(0.0, 0.0, 1.0)) -> DirectorField:
    direction = np.asarray(direction, dtype=float)
    raw = np.broadcast_to(direction, mesh.coords.shape).copy()
    return normalize_field(mesh, raw)


def great_circle_map(mesh: BallMesh) -> DirectorField:
    """u = (sin x1, 0, cos x1): smooth, harmonic, energy density 1/2."""
    x1 = mesh.coords[..., 0]
    raw = np.stack([np.sin(x1), np.zeros_like(x1), np.cos(x1)], axis=-1)
    return normalize_field(mesh, raw)


def equator_map(mesh: BallMesh) -> DirectorField:
    """u = x/|x|: the singular weakly harmonic, non-stationary map.

    Evaluable at every node because cell centers avoid the origin.
    """
    return normalize_field(mesh, mesh.coords.copy())


def perturbed_circle_map(mesh: BallMesh, amplitude: float = 0.3) -> DirectorField:
    """Great-circle map tilted by a smooth low-frequency field.

    Smooth and non-harmonic, but close enough to the harmonic great circle
    that the flow only dissipates the perturbation's share of the energy.
    """
    if not 0.0 < amplitude < 0.9:
        raise ConfigError("perturbed-circle amplitude must lie in (0, 0.9)")
    x, y, z = (mesh.coords[..., k] for k in range(3))
    base = great_circle_map(mesh).values.copy()
    base[..., 1] += amplitude * np.cos(0.5 * np.pi * y) * np.cos(0.5 * np.pi * z)
    base[..., 0] += 0.5 * amplitude * np.cos(0.5 * np.pi * x) * np.cos(0.5 * np.pi * y)
    return normalize_field(mesh, base)


def bump_map(mesh: BallMesh, amplitude: float = 0.35) -> DirectorField:
    """Smooth non-harmonic datum: a trigonometric tilt of the constant e3."""
    if not 0.0 < amplitude < 0.57:
        raise ConfigError("bump amplitude must lie in (0, 0.57)")
    x, y, z = (mesh.coords[..., k] for k in range(3))
    raw = np.stack([
        amplitude * np.sin(np.pi * x) * np.cos(0.5 * np.pi * y),
        amplitude * np.sin(np.pi * y) * np.cos(0.5 * np.pi * z),
        np.ones_like(z),
    ], axis=-1)
    return normalize_field(mesh, raw)


def random_smooth_map(mesh: BallMesh, seed: int = 0, amplitude: float = 0.3,
                      modes: int = 2) -> DirectorField:
    """Seeded random low-frequency perturbation of e3, pointwise normalized."""
    if not 0.0 < amplitude < 0.5:
        raise ConfigError("random-map amplitude must lie in (0, 0.5)")
    rng = np.random.default_rng(seed)
    x, y, z = (mesh.coords[..., k] for k in range(3))
    raw = np.zeros(mesh.coords.shape)
    raw[..., 2] = 1.0
    for i in range(3):
        bump = np.zeros_like(x)
        for kx in range(1, modes + 1):
            for ky in range(1, modes + 1):
                c = rng.uniform(-1.0, 1.0)
                s = rng.uniform(-1.0, 1.0)
                bump += c * np.sin(0.5 * np.pi * kx * x) * np.cos(0.5 * np.pi * ky * y)
                bump += s * np.cos(0.5 * np.pi * kx * z) * np.sin(0.5 * np.pi * ky * x)
        bump /= 2.0 * modes**2
        raw[..., i] += amplitude * bump
    return normalize_field(mesh, raw)


def make_datum(mesh: BallMesh, spec, seed: int = 0) -> DirectorField:
    """Build a datum from a name or a {'name': ..., params} mapping."""
    if isinstance(spec, str):
        spec = {"name": spec}
    name = spec.get("name")
    if name == "constant":
        return constant_map(mesh, spec.get("direction", (0.0, 0.0, 1.0)))
    if name == "great-circle":
        return great_circle_map(mesh)
    if name == "equator":
        return equator_map(mesh)
    if name == "bump":
        return bump_map(mesh, spec.get("amplitude", 0.35))
    if name == "perturbed-circle":
        return perturbed_circle_map(mesh, spec.get("amplitude", 0.3))
    if name == "random":
        return random_smooth_map(mesh, spec.get("seed", seed),
                                 spec.get("amplitude", 0.3),
                                 spec.get("modes", 2))
    if name == "custom-file":
        from .archive import load_field
        path = spec.get("path")
        if not path:
            raise ConfigError("custom-file datum requires a 'path'")
        return load_field(path, mesh)
    raise ConfigError(f"unknown initial datum {name!r}; choose from {DATUM_NAMES}")
