"""Mass-matrix assembly and spring forces of the stick lattice.

Each stick (edge) carries translational plus rotational kinetic energy, which
assembles into the consistent per-edge mass block ``M/6 * [[2, 1], [1, 2]]``.
Springs of rest length zero pull the interpolated prediction at each data
input toward its target along the output coordinates, so the potential energy
is ``k/2`` times the summed squared residuals and the force is linear in the
node heights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import GridState, LatticeSpec, weight_matrix

__all__ = [
    "PhysicsParams",
    "MassMatrix",
    "SpringBatch",
    "assemble_mass",
    "potential_energy",
    "spring_force",
    "kinetic_energy",
    "batch_operator",
]

SI_BOLTZMANN = 1.380649e-23  # J/K, for runs configured in SI units


@dataclass(frozen=True)
class PhysicsParams:
    """Stick mass, spring stiffness, friction, and bath temperature."""

    mass: float
    stiffness: float
    friction: float
    temperature: float
    boltzmann: float = 1.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if self.stiffness < 0 or self.friction < 0 or self.temperature < 0:
            raise ValueError("stiffness, friction and temperature must be >= 0")
        if not self.boltzmann > 0:
            raise ValueError("boltzmann must be positive")

    @property
    def noise_sigma(self) -> float:
        """Thermal noise amplitude sqrt(2 * gamma * T * k_b / M)."""
        return math.sqrt(2.0 * self.friction * self.temperature * self.boltzmann / self.mass)


@dataclass(frozen=True)
class MassMatrix:
    """Symmetric positive-definite node-coupling matrix, shared across outputs."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("mass matrix must be square")
        if not np.allclose(mat, mat.T, rtol=1e-12, atol=0.0):
            raise ValueError("mass matrix must be symmetric")
        object.__setattr__(self, "matrix", mat)


def assemble_mass(spec: LatticeSpec, params: PhysicsParams) -> MassMatrix:
    """Sum per-stick kinetic blocks: M/3 on both diagonals, M/6 off-diagonal."""
    nu = spec.n_nodes
    mat = np.zeros((nu, nu))
    m3 = params.mass / 3.0
    m6 = params.mass / 6.0
    for a, b in spec.edges():
        mat[a, a] += m3
        mat[b, b] += m3
        mat[a, b] += m6
        mat[b, a] += m6
    return MassMatrix(mat)


@dataclass
class SpringBatch:
    """Data points currently attached by springs, with their node weights."""

    inputs: np.ndarray   # (B, d)
    targets: np.ndarray  # (B, m)
    weights: np.ndarray  # (B, nu) interpolation weight matrix

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.targets = np.atleast_2d(np.asarray(self.targets, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.inputs.shape[0] != self.targets.shape[0] or self.inputs.shape[0] < 1:
            raise ValueError("inputs and targets must agree on B >= 1 rows")
        if self.weights.shape[0] != self.inputs.shape[0]:
            raise ValueError("weights must have one row per data point")

    @property
    def size(self) -> int:
        return self.inputs.shape[0]

    @classmethod
    def from_data(cls, spec: LatticeSpec, inputs, targets) -> "SpringBatch":
        inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
        targets = np.asarray(targets, dtype=float)
        if targets.ndim == 1:
            targets = targets[:, None]
        return cls(inputs, targets, weight_matrix(spec, inputs))


def potential_energy(spec: LatticeSpec, state: GridState, params: PhysicsParams,
                     batch: SpringBatch) -> float:
    """Total spring energy k/2 * sum of squared residuals over the batch."""
    residual = batch.weights @ state.x - batch.targets
    return 0.5 * params.stiffness * float(np.sum(residual * residual))


def spring_force(spec: LatticeSpec, state: GridState, params: PhysicsParams,
                 batch: SpringBatch) -> np.ndarray:
    """Force -dU/dx on every node height; (nu, m), linear in x."""
    residual = batch.weights @ state.x - batch.targets
    return -params.stiffness * (batch.weights.T @ residual)


def kinetic_energy(spec: LatticeSpec, state: GridState, params: PhysicsParams,
                   mass: MassMatrix | None = None) -> float:
    """Quadratic form 1/2 * sum_p v_p' M v_p over output coordinates."""
    if mass is None:
        mass = assemble_mass(spec, params)
    return 0.5 * float(np.sum(state.v * (mass.matrix @ state.v)))


def batch_operator(spec: LatticeSpec, params: PhysicsParams,
                   batch: SpringBatch) -> tuple[np.ndarray, np.ndarray]:
    """Stiffness operator and offset with force = -K_op @ x + c.

    K_op is (nu, nu), shared by all output coordinates; c is (nu, m).
    """
    k = params.stiffness
    k_op = k * (batch.weights.T @ batch.weights)
    c = k * (batch.weights.T @ batch.targets)
    return k_op, c
