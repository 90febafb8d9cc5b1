"""Masked cell-centered Cartesian grid on the unit ball B^3.

Nodes are the cell centers of an N^3 lattice over [-1,1]^3; the half-cell
offset keeps every node away from the origin, so the equator map x/|x| is
evaluable everywhere. Interior nodes (cell centers strictly inside the unit
ball, excluding the outermost lattice layer) carry equations; the boundary
band (the remaining nodes adjacent to an interior node) carries Dirichlet
data only. Excluding the outermost layer guarantees that every 7-point
stencil rooted at an interior node closes inside interior + band, so the
differential operators below never need one-sided fallbacks; it costs only
an O(h^2) sliver of ball volume near the six face centers.

All structures are immutable after construction and all operators are pure
functions; everything here is safe to use from multiple threads.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import InvalidResolutionError, MeshConsistencyError


def shifted(values: np.ndarray, axis: int, step: int) -> np.ndarray:
    """Neighbor gather: out[i] = values[i + step] along axis, zero past the edge."""
    out = np.zeros_like(values)
    src = [slice(None)] * values.ndim
    dst = [slice(None)] * values.ndim
    if step > 0:
        dst[axis] = slice(None, -step)
        src[axis] = slice(step, None)
    else:
        dst[axis] = slice(-step, None)
        src[axis] = slice(None, step)
    out[tuple(dst)] = values[tuple(src)]
    return out


class BallMesh:
    """Discrete unit ball: interior mask, boundary band, h^3 quadrature weights.

    Attributes:
        n: cells per axis (even, >= 4).
        h: grid spacing 2/n.
        centers: 1d array of cell-center coordinates per axis.
        coords: (n, n, n, 3) node coordinates.
        radius: (n, n, n) node distances from the origin.
        interior: boolean mask of off-layer nodes with |x| < 1.
        band: boolean mask of interior-adjacent non-interior nodes.
        domain: interior | band (the nodes that carry field values).
        node_index: (n_nodes, 3) integer indices of domain nodes in
            lexicographic (i, j, k) order; fixes the serialization order.
    """

    def __init__(self, n: int):
        n = int(n)
        if n < 4 or n % 2 != 0:
            raise InvalidResolutionError(
                f"mesh resolution must be an even integer >= 4, got {n}"
            )
        self.n = n
        self.h = 2.0 / n
        self.weight = self.h**3
        self.centers = -1.0 + self.h * (np.arange(n) + 0.5)
        self.coords = np.stack(
            np.meshgrid(self.centers, self.centers, self.centers, indexing="ij"),
            axis=-1,
        )
        self.radius = np.sqrt(np.sum(self.coords**2, axis=-1))
        off_layer = np.zeros((n, n, n), dtype=bool)
        off_layer[1:-1, 1:-1, 1:-1] = True
        self.interior = (self.radius < 1.0) & off_layer

        near = np.zeros_like(self.interior)
        for axis in range(3):
            for step in (-1, 1):
                near |= shifted(self.interior, axis, step)
        self.band = near & ~self.interior
        self.domain = self.interior | self.band

        for axis in range(3):
            for step in (-1, 1):
                if np.any(self.interior & ~shifted(self.domain, axis, step)):
                    raise MeshConsistencyError(
                        "interior node with a 6-neighbor outside interior + band"
                    )

        self.node_index = np.argwhere(self.domain)
        self.n_interior = int(np.count_nonzero(self.interior))
        self.n_band = int(np.count_nonzero(self.band))
        self.n_nodes = self.n_interior + self.n_band

        for arr in (self.centers, self.coords, self.radius, self.interior,
                    self.band, self.domain, self.node_index):
            arr.setflags(write=False)

    def safe_interior(self, depth: int) -> np.ndarray:
        """Interior nodes at graph distance > depth from any non-interior node."""
        mask = self.interior
        for _ in range(depth):
            eroded = mask.copy()
            for axis in range(3):
                for step in (-1, 1):
                    eroded = eroded & shifted(mask, axis, step)
            mask = eroded
        return mask

    def volume(self) -> float:
        """Quadrature volume of the discrete ball (tends to 4*pi/3)."""
        return self.n_interior * self.weight

    def mesh_hash(self) -> str:
        """Deterministic fingerprint of the node layout."""
        digest = hashlib.sha256()
        digest.update(str(self.n).encode())
        digest.update(self.coords[self.domain].tobytes())
        return digest.hexdigest()

    def __repr__(self) -> str:
        return f"BallMesh(n={self.n}, interior={self.n_interior}, band={self.n_band})"


def build_ball_mesh(n: int) -> BallMesh:
    """Build the cell-centered ball mesh at resolution n (even, >= 4)."""
    return BallMesh(n)


def same_mesh(a: BallMesh, b: BallMesh) -> bool:
    return a is b or a.n == b.n


def gradient(values: np.ndarray, mesh: BallMesh) -> np.ndarray:
    """Central-difference gradient at interior nodes (zero elsewhere).

    For scalar input (n,n,n) returns (n,n,n,3); for vector input (n,n,n,3)
    returns (n,n,n,3,3) with [..., i, alpha] = d u^i / d x^alpha. The mesh
    construction guarantees every interior stencil neighbor carries data.
    """
    parts = [
        (shifted(values, axis, 1) - shifted(values, axis, -1)) / (2.0 * mesh.h)
        for axis in range(3)
    ]
    out = np.stack(parts, axis=-1)
    out[~mesh.interior] = 0.0
    return out


def laplacian(values: np.ndarray, mesh: BallMesh) -> np.ndarray:
    """Standard 7-point Laplacian at interior nodes (zero elsewhere)."""
    acc = -6.0 * values.astype(float, copy=True)
    for axis in range(3):
        acc += shifted(values, axis, 1)
        acc += shifted(values, axis, -1)
    acc /= mesh.h**2
    acc[~mesh.interior] = 0.0
    return acc


def integrate(values: np.ndarray, mesh: BallMesh) -> float:
    """Volume integral of a scalar field: sum over interior nodes times h^3."""
    return float(values[mesh.interior].sum() * mesh.weight)


def l2_inner(f: np.ndarray, g: np.ndarray, mesh: BallMesh) -> float:
    """L2 inner product over the interior; trailing component axes are summed."""
    return float((f[mesh.interior] * g[mesh.interior]).sum() * mesh.weight)


def l2_norm(f: np.ndarray, mesh: BallMesh) -> float:
    return float(np.sqrt(max(l2_inner(f, f, mesh), 0.0)))


def trace_nodes(mesh: BallMesh) -> np.ndarray:
    """Indices of the boundary band, where Dirichlet data is frozen."""
    return np.argwhere(mesh.band)
