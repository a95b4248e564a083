"""First-order linear Langevin system assembly and Euler-Maruyama integration.

State vectors stack node heights then node velocities, each flattened one
output coordinate at a time, so ``z = [x^0-nodes..., x^(m-1)-nodes...,
v^0-nodes, ...]``.  Noise enters only the velocity rows, with one independent
Gaussian increment per velocity degree of freedom per step drawn from a
counter-based (Philox) stream keyed by the run seed, which makes trajectories
reproducible bit-for-bit and independent of how ensembles are chunked over
workers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import IntegrationBlowupError
from .lattice import GridState, LatticeSpec
from .mechanics import MassMatrix, PhysicsParams, SpringBatch, batch_operator

__all__ = [
    "LinearSDE",
    "SdeRun",
    "TrajectoryLog",
    "assemble_sde",
    "single_dof_sde",
    "em_step",
    "stable_dt",
    "suggested_dt",
    "trajectory_rng",
    "integrate",
    "integrate_ensemble",
    "state_to_vec",
    "vec_to_state",
    "save_trajectory_log",
]


@dataclass(frozen=True)
class LinearSDE:
    """dz/dt = A z + b + B xi(t) with diagonal B supported on velocity rows."""

    A: np.ndarray      # (2n, 2n)
    b: np.ndarray      # (2n,)
    sigma: np.ndarray  # (2n,) diagonal of B; zero on position rows
    nu: int
    m: int

    def __post_init__(self):
        n = self.nu * self.m
        if self.A.shape != (2 * n, 2 * n) or self.b.shape != (2 * n,):
            raise ValueError("A and b must match the 2*nu*m state dimension")
        if self.sigma.shape != (2 * n,):
            raise ValueError("sigma must be the (2n,) diagonal of B")
        if not (np.isfinite(self.A).all() and np.isfinite(self.b).all()):
            raise ValueError("A and b must be finite")

    @property
    def n_dof(self) -> int:
        return self.nu * self.m

    @property
    def dim(self) -> int:
        return 2 * self.nu * self.m

    def diffusion_diag(self) -> np.ndarray:
        """Diagonal of D = B B^T / 2."""
        return 0.5 * self.sigma ** 2


@dataclass(frozen=True)
class SdeRun:
    """Integration plan: step size, step count, seed, sampling stride."""

    dt: float
    n_steps: int
    seed: int
    record_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1 or self.record_every < 1:
            raise ValueError("n_steps and record_every must be >= 1")


def state_to_vec(state: GridState) -> np.ndarray:
    return np.concatenate([state.x.flatten(order="F"), state.v.flatten(order="F")])


def vec_to_state(z: np.ndarray, nu: int, m: int) -> GridState:
    n = nu * m
    return GridState(
        z[:n].reshape((nu, m), order="F"),
        z[n:].reshape((nu, m), order="F"),
    )


def assemble_sde(spec: LatticeSpec, params: PhysicsParams, batch: SpringBatch,
                 mass: MassMatrix) -> LinearSDE:
    """Build the system dx/dt = v, dv/dt = M^-1(-K_op x + c) - gamma v + noise."""
    n = spec.n_nodes * spec.m
    k_op, c = batch_operator(spec, params, batch)
    try:
        cho = scipy.linalg.cho_factor(mass.matrix)
    except scipy.linalg.LinAlgError as exc:  # cannot occur for valid specs
        raise ValueError("mass matrix is singular") from exc
    minv_k = scipy.linalg.cho_solve(cho, k_op)
    minv_c = scipy.linalg.cho_solve(cho, c)

    A = np.zeros((2 * n, 2 * n))
    A[:n, n:] = np.eye(n)
    if spec.m == 1:
        A[n:, :n] = -minv_k
    else:
        A[n:, :n] = -np.kron(np.eye(spec.m), minv_k)
    A[n:, n:] -= params.friction * np.eye(n)

    b = np.zeros(2 * n)
    b[n:] = minv_c.flatten(order="F")

    sigma = np.zeros(2 * n)
    sigma[n:] = params.noise_sigma
    return LinearSDE(A=A, b=b, sigma=sigma, nu=spec.n_nodes, m=spec.m)


def single_dof_sde(params: PhysicsParams) -> LinearSDE:
    """Scalar damped-oscillator rig: A = [[0, 1], [-k/M, -gamma]]."""
    A = np.array([
        [0.0, 1.0],
        [-params.stiffness / params.mass, -params.friction],
    ])
    sigma = np.array([0.0, params.noise_sigma])
    return LinearSDE(A=A, b=np.zeros(2), sigma=sigma, nu=1, m=1)


def em_step(sde: LinearSDE, z: np.ndarray, dt: float, noise: np.ndarray) -> np.ndarray:
    """One Euler-Maruyama step z' = z + (Az + b) dt + B sqrt(dt) noise."""
    with np.errstate(over="ignore", invalid="ignore"):
        out = z + (sde.A @ z + sde.b) * dt + sde.sigma * np.sqrt(dt) * noise
    if not np.isfinite(out).all():
        raise IntegrationBlowupError(
            f"state became non-finite at dt={dt}; reduce the time step"
        )
    return out


def stable_dt(sde: LinearSDE, safety: float = 0.5) -> float:
    """Largest dt keeping every mode of the explicit update non-amplifying.

    For eigenvalue lambda of A with Re(lambda) < 0 the Euler factor
    |1 + lambda dt| stays <= 1 up to dt = -2 Re(lambda) / |lambda|^2; neutral
    modes impose no bound.
    """
    eigs = np.linalg.eigvals(sde.A)
    bound = np.inf
    for lam in eigs:
        re, mag2 = lam.real, abs(lam) ** 2
        if re < -1e-12 and mag2 > 0:
            bound = min(bound, -2.0 * re / mag2)
    return safety * bound


def suggested_dt(sde: LinearSDE, default: float = 1e-3) -> float:
    """Default integration step, capped by the explicit-stability bound."""
    return min(default, stable_dt(sde))


class _NoiseStream:
    """Velocity-block Gaussian increments from a per-trajectory Philox stream.

    Values depend only on (seed, key) and on how many have been drawn, never
    on block sizes, so chunked and step-by-step integration consume the same
    sequence.
    """

    def __init__(self, seed: int, *key: int):
        self.rng = trajectory_rng(seed, *key)

    def block(self, n_steps: int, n_dof: int) -> np.ndarray:
        return self.rng.standard_normal((n_steps, n_dof))


def trajectory_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for worker-independent reproducibility."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


@dataclass
class TrajectoryLog:
    """Recorded times, observer values and (optionally) full states."""

    times: np.ndarray
    observations: dict[str, np.ndarray] = field(default_factory=dict)
    states: np.ndarray | None = None  # (n_records, dim) when recorded


def integrate(sde: LinearSDE, z0: np.ndarray, run: SdeRun,
              observers: dict | None = None, record_state: bool = False,
              t0: float = 0.0) -> TrajectoryLog:
    """Integrate one trajectory; deterministic given (seed, dt, n_steps).

    Observers map names to callables ``f(t, z) -> float`` evaluated at every
    recorded sample (including the initial state).
    """
    observers = observers or {}
    z = np.asarray(z0, dtype=float).copy()
    if z.shape != (sde.dim,):
        raise ValueError(f"z0 must have shape ({sde.dim},)")
    stream = _NoiseStream(run.seed)
    n_rec = run.n_steps // run.record_every + 1
    times = np.empty(n_rec)
    states = np.empty((n_rec, sde.dim)) if record_state else None
    obs = {name: np.empty(n_rec) for name in observers}

    def record(slot: int, t: float):
        times[slot] = t
        if states is not None:
            states[slot] = z
        for name, fn in observers.items():
            obs[name][slot] = fn(t, z)

    record(0, t0)
    slot = 1
    noise_full = np.zeros(sde.dim)
    done = 0
    chunk = max(1, min(4096, run.n_steps))
    while done < run.n_steps:
        todo = min(chunk, run.n_steps - done)
        block = stream.block(todo, sde.n_dof)
        for i in range(todo):
            noise_full[sde.n_dof:] = block[i]
            z = em_step(sde, z, run.dt, noise_full)
            done += 1
            if done % run.record_every == 0:
                record(slot, t0 + done * run.dt)
                slot += 1
    return TrajectoryLog(times=times, observations=obs, states=states)


def integrate_ensemble(sde: LinearSDE, z0s: np.ndarray, run: SdeRun,
                       t0: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Integrate independent trajectories; returns (times, states).

    ``z0s`` is (n_traj, dim); the result states array is
    (n_records, n_traj, dim).  Trajectory i draws from the stream keyed by
    (seed, i), so results are identical however the ensemble is split.
    """
    Z = np.asarray(z0s, dtype=float).copy()
    if Z.ndim != 2 or Z.shape[1] != sde.dim:
        raise ValueError(f"z0s must have shape (n_traj, {sde.dim})")
    n_traj = Z.shape[0]
    streams = [_NoiseStream(run.seed, i) for i in range(n_traj)]
    n_rec = run.n_steps // run.record_every + 1
    times = np.empty(n_rec)
    states = np.empty((n_rec, n_traj, sde.dim))
    times[0] = t0
    states[0] = Z

    sqrt_dt = np.sqrt(run.dt)
    sig_v = sde.sigma[sde.n_dof:]
    slot = 1
    done = 0
    chunk = max(1, min(1024, run.n_steps))
    while done < run.n_steps:
        todo = min(chunk, run.n_steps - done)
        noise = np.stack([s.block(todo, sde.n_dof) for s in streams])  # (n, todo, n_dof)
        for i in range(todo):
            Z = Z + (Z @ sde.A.T + sde.b) * run.dt
            Z[:, sde.n_dof:] += sig_v * sqrt_dt * noise[:, i, :]
            done += 1
            if done % run.record_every == 0:
                times[slot] = t0 + done * run.dt
                states[slot] = Z
                slot += 1
    if not np.isfinite(Z).all():
        raise IntegrationBlowupError("ensemble state became non-finite; reduce dt")
    return times, states


def save_trajectory_log(path, log: TrajectoryLog, traj_id: int | None = None,
                        include_state: bool = False) -> None:
    """CSV with columns t,K,U,E_total,W_acc plus any extra observers.

    With ``include_state`` (and a log recorded with states) the full state
    vector is appended as columns z_1..z_dim.
    """
    preferred = ["K", "U", "E_total", "W_acc"]
    names = [n for n in preferred if n in log.observations]
    names += [n for n in log.observations if n not in names]
    state_cols = []
    if include_state:
        if log.states is None:
            raise ValueError("log has no recorded states; integrate with record_state")
        state_cols = [f"z_{i + 1}" for i in range(log.states.shape[1])]
    header = (["traj_id"] if traj_id is not None else []) + ["t"] + names + state_cols
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, t in enumerate(log.times):
            row = ([traj_id] if traj_id is not None else []) + [f"{t:.10g}"]
            row += [f"{log.observations[n][i]:.10g}" for n in names]
            if state_cols:
                row += [f"{v:.10g}" for v in log.states[i]]
            writer.writerow(row)
