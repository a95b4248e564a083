"""Regular stick-lattice geometry and multilinear interpolation.

A lattice covers the closed hyper-rectangle ``[origin, origin + (N-1) * spacing]``
with ``nu = prod(N_k)`` nodes.  Node heights (one column per output coordinate)
are the model's trainable parameters; predictions are the multilinear blend of
the ``2**d`` corners of the cell containing the query point.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "LatticeSpec",
    "GridState",
    "CellCoords",
    "locate",
    "interpolation_weights",
    "interpolate",
    "weight_matrix",
    "interpolate_many",
    "save_grid_state",
    "load_grid_state",
]


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry of the node grid: dimensions, node counts, origin, spacing."""

    d: int
    m: int
    nodes_per_dim: tuple[int, ...]
    origin: tuple[float, ...]
    spacing: tuple[float, ...]

    def __post_init__(self):
        if self.d < 1 or self.m < 1:
            raise ValueError("d and m must be >= 1")
        if len(self.nodes_per_dim) != self.d:
            raise ValueError("nodes_per_dim must have d entries")
        if len(self.origin) != self.d or len(self.spacing) != self.d:
            raise ValueError("origin and spacing must have d entries")
        if any(n < 2 for n in self.nodes_per_dim):
            raise ValueError("every dimension needs at least 2 nodes (one stick)")
        if any(not (s > 0) for s in self.spacing):
            raise ValueError("spacing components must be positive")

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.nodes_per_dim))

    @property
    def n_sticks(self) -> int:
        """Stick count prod(N_k - 1); equals the cell count of the mesh."""
        return int(np.prod([n - 1 for n in self.nodes_per_dim]))

    @property
    def upper(self) -> np.ndarray:
        """Upper corner of the covered rectangle."""
        return np.asarray(self.origin) + (np.asarray(self.nodes_per_dim) - 1) * np.asarray(self.spacing)

    def node_position(self, index: tuple[int, ...]) -> np.ndarray:
        return np.asarray(self.origin) + np.asarray(index) * np.asarray(self.spacing)

    def node_indices(self):
        """All multi-indices in row-major order (matches linearization)."""
        return itertools.product(*(range(n) for n in self.nodes_per_dim))

    def node_coords(self) -> np.ndarray:
        """(nu, d) array of node positions in row-major node order."""
        idx = np.array(list(self.node_indices()), dtype=float)
        return np.asarray(self.origin) + idx * np.asarray(self.spacing)

    def ravel_index(self, index) -> int:
        return int(np.ravel_multi_index(tuple(index), self.nodes_per_dim))

    def edges(self):
        """Adjacent node pairs (a, b), linearized; each stick segment once."""
        for multi in self.node_indices():
            a = self.ravel_index(multi)
            for b_dim in range(self.d):
                if multi[b_dim] + 1 < self.nodes_per_dim[b_dim]:
                    nb = list(multi)
                    nb[b_dim] += 1
                    yield a, self.ravel_index(nb)

    @classmethod
    def for_domain(cls, lo, hi, nodes_per_dim, m=1) -> "LatticeSpec":
        """Lattice whose covered rectangle is exactly [lo, hi] per dimension."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        npd = tuple(int(n) for n in np.atleast_1d(nodes_per_dim))
        spacing = tuple((h - l) / (n - 1) for l, h, n in zip(lo, hi, npd))
        return cls(d=len(npd), m=m, nodes_per_dim=npd,
                   origin=tuple(float(v) for v in lo), spacing=spacing)


@dataclass
class GridState:
    """Dynamical variables of the lattice: node heights x and velocities v."""

    x: np.ndarray  # (nu, m)
    v: np.ndarray  # (nu, m)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.x.shape != self.v.shape or self.x.ndim != 2:
            raise ValueError("x and v must both have shape (nu, m)")
        if not (np.isfinite(self.x).all() and np.isfinite(self.v).all()):
            raise ValueError("state entries must be finite")

    @classmethod
    def zeros(cls, spec: LatticeSpec) -> "GridState":
        return cls(np.zeros((spec.n_nodes, spec.m)), np.zeros((spec.n_nodes, spec.m)))

    def copy(self) -> "GridState":
        return GridState(self.x.copy(), self.v.copy())


@dataclass(frozen=True)
class CellCoords:
    """Cell multi-index plus fractional position within the cell."""

    cell: tuple[int, ...]
    lam: np.ndarray = field(repr=False)


def locate(spec: LatticeSpec, u) -> CellCoords:
    """Find the half-open cell containing u and the fractional offset within it.

    Points on the outermost upper face are clamped into the last cell with
    lam = 1 so the full closed rectangle is usable.  Raises DomainError for
    points outside the covered rectangle, naming the offending coordinate.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (spec.d,):
        raise ValueError(f"expected input of dimension {spec.d}, got shape {u.shape}")
    cell = []
    lam = np.empty(spec.d)
    for b in range(spec.d):
        t = (u[b] - spec.origin[b]) / spec.spacing[b]
        top = spec.nodes_per_dim[b] - 1
        if not (0.0 <= t <= top):
            raise DomainError(
                f"coordinate {b} = {u[b]!r} outside [{spec.origin[b]!r}, "
                f"{spec.origin[b] + top * spec.spacing[b]!r}]"
            )
        c = int(np.floor(t))
        if c >= top:  # upper boundary: clamp into last cell
            c = top - 1
        cell.append(c)
        lam[b] = t - c
    return CellCoords(cell=tuple(cell), lam=lam)


def interpolation_weights(spec: LatticeSpec, u) -> tuple[np.ndarray, np.ndarray]:
    """Linearized node indices and weights of the 2**d enclosing corners.

    Weights are nonnegative and sum to 1; prediction is ``w @ x[indices]``.
    """
    coords = locate(spec, u)
    indices = np.empty(2 ** spec.d, dtype=int)
    weights = np.empty(2 ** spec.d)
    for n, corner in enumerate(itertools.product((0, 1), repeat=spec.d)):
        node = tuple(c + j for c, j in zip(coords.cell, corner))
        indices[n] = spec.ravel_index(node)
        w = 1.0
        for b in range(spec.d):
            w *= coords.lam[b] if corner[b] else 1.0 - coords.lam[b]
        weights[n] = w
    return indices, weights


def interpolate(spec: LatticeSpec, state: GridState, u) -> np.ndarray:
    """Multilinear prediction at u; returns an (m,) vector."""
    indices, weights = interpolation_weights(spec, u)
    return weights @ state.x[indices]


def weight_matrix(spec: LatticeSpec, inputs) -> np.ndarray:
    """Dense (B, nu) weight matrix for a batch of inputs.

    Row j satisfies ``prediction_j = W[j] @ x``; rows sum to 1.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    W = np.zeros((inputs.shape[0], spec.n_nodes))
    for j, u in enumerate(inputs):
        idx, w = interpolation_weights(spec, u)
        W[j, idx] += w
    return W


def interpolate_many(spec: LatticeSpec, state: GridState, inputs) -> np.ndarray:
    """Predictions for a batch of inputs; returns (B, m)."""
    return weight_matrix(spec, inputs) @ state.x


def save_grid_state(path, spec: LatticeSpec, state: GridState) -> None:
    """Write node heights/velocities as CSV in row-major node order."""
    header = (
        ["node_index"]
        + [f"i_{k + 1}" for k in range(spec.d)]
        + [f"x_{p + 1}" for p in range(spec.m)]
        + [f"v_{p + 1}" for p in range(spec.m)]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for n, multi in enumerate(spec.node_indices()):
            writer.writerow(
                [n, *multi]
                + [repr(float(val)) for val in state.x[n]]
                + [repr(float(val)) for val in state.v[n]]
            )


def load_grid_state(path, spec: LatticeSpec) -> GridState:
    """Read a GridState CSV written by save_grid_state."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    expected_cols = 1 + spec.d + 2 * spec.m
    if not rows or len(rows[0]) != expected_cols:
        raise ValueError(f"grid state CSV must have {expected_cols} columns")
    body = rows[1:]
    if len(body) != spec.n_nodes:
        raise ValueError(f"expected {spec.n_nodes} node rows, got {len(body)}")
    x = np.empty((spec.n_nodes, spec.m))
    v = np.empty((spec.n_nodes, spec.m))
    for row in body:
        n = int(row[0])
        x[n] = [float(s) for s in row[1 + spec.d: 1 + spec.d + spec.m]]
        v[n] = [float(s) for s in row[1 + spec.d + spec.m:]]
    return GridState(x, v)
