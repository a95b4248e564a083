"""Dataset synthesis, mini-batch scheduling, and training by dissipation.

Each epoch attaches the springs of one mini-batch (reshuffled without
replacement every pass), records the potential jump as protocol work, and
time-evolves the damped lattice for a fixed epoch duration.  The reported
metric is always the full-dataset mean-squared error, even under mini-batch
dynamics.  Whole ensembles of trajectories share the batch sequence (the
protocol) while each trajectory owns its initialization and noise stream.
"""

from __future__ import annotations

import csv
import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import IntegrationBlowupError
from .langevin import assemble_sde, stable_dt, trajectory_rng, _NoiseStream
from .lattice import GridState, LatticeSpec, weight_matrix
from .mechanics import MassMatrix, PhysicsParams, SpringBatch, assemble_mass

__all__ = [
    "Dataset",
    "SyntheticSpec",
    "TrainSchedule",
    "TrainReport",
    "EnsembleTrainReport",
    "FUNCTIONS",
    "synthesize",
    "save_dataset",
    "load_dataset",
    "mse_loss",
    "batch_schedule",
    "train",
    "train_ensemble",
    "oracle_fit",
    "least_squares_fit",
    "approximation_error",
    "detect_steady_state",
    "save_train_report",
]


def _f_zero(u):
    return np.zeros(u.shape[0])


def _f_quadratic_xy2(u):
    return u[:, 0] ** 2 + u[:, 0] * u[:, 1] ** 2


def _f_sin_xy(u):
    return np.sin(np.pi * u[:, 0]) * np.sin(np.pi * u[:, 1])


def _f_gauss_bump(u):
    r2 = (u[:, 0] - 0.5) ** 2 + (u[:, 1] - 0.5) ** 2
    return np.exp(-r2 / 0.125)


FUNCTIONS = {
    "zero": _f_zero,
    "cos_x": lambda u: np.cos(u[:, 0]),
    "sin_x": lambda u: np.sin(u[:, 0]),
    "x_squared": lambda u: u[:, 0] ** 2,
    "exp_x": lambda u: np.exp(u[:, 0]),
    "quadratic_xy2": _f_quadratic_xy2,
    "sin_xy": _f_sin_xy,
    "gauss_bump": _f_gauss_bump,
}


@dataclass
class Dataset:
    """Inputs/targets plus a provenance note (synthetic descriptor or path)."""

    inputs: np.ndarray   # (N, d)
    targets: np.ndarray  # (N, m)
    provenance: str = ""

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        t = np.asarray(self.targets, dtype=float)
        self.targets = t[:, None] if t.ndim == 1 else t
        if self.inputs.shape[0] != self.targets.shape[0] or self.inputs.shape[0] < 1:
            raise ValueError("inputs and targets must agree on N >= 1 rows")
        if not (np.isfinite(self.inputs).all() and np.isfinite(self.targets).all()):
            raise ValueError("dataset values must be finite")

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def d(self) -> int:
        return self.inputs.shape[1]

    @property
    def m(self) -> int:
        return self.targets.shape[1]


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for sampled data: registry function, domain, size, noise."""

    function: str
    domain: tuple[tuple[float, float], ...]
    n_points: int
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.function not in FUNCTIONS:
            raise ValueError(f"unknown function id {self.function!r}; "
                             f"known: {sorted(FUNCTIONS)}")
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if any(hi <= lo for lo, hi in self.domain):
            raise ValueError("domain intervals must be nonempty")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


def synthesize(spec: SyntheticSpec, seed: int) -> Dataset:
    """Uniform inputs over the domain, targets f(u) plus Gaussian noise."""
    rng = np.random.default_rng(seed)
    d = len(spec.domain)
    lo = np.array([iv[0] for iv in spec.domain])
    hi = np.array([iv[1] for iv in spec.domain])
    inputs = rng.uniform(lo, hi, size=(spec.n_points, d))
    targets = np.asarray(FUNCTIONS[spec.function](inputs), dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    if spec.noise_sigma > 0:
        targets = targets + spec.noise_sigma * rng.standard_normal(targets.shape)
    return Dataset(inputs, targets,
                   provenance=f"synthetic:{spec.function} N={spec.n_points} "
                              f"noise={spec.noise_sigma} seed={seed}")


def save_dataset(path, dataset: Dataset) -> None:
    header = [f"u_{k + 1}" for k in range(dataset.d)] + [f"y_{p + 1}" for p in range(dataset.m)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for u, y in zip(dataset.inputs, dataset.targets):
            writer.writerow([repr(float(v)) for v in u] + [repr(float(v)) for v in y])


def load_dataset(path) -> Dataset:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError("dataset CSV needs a header and at least one row")
    header = rows[0]
    d = sum(1 for h in header if h.startswith("u_"))
    m = sum(1 for h in header if h.startswith("y_"))
    if d < 1 or m < 1 or d + m != len(header):
        raise ValueError("dataset CSV header must be u_1..u_d,y_1..y_m")
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return Dataset(data[:, :d], data[:, d:], provenance=str(path))


def mse_loss(spec: LatticeSpec, state: GridState, dataset: Dataset) -> float:
    """(1/N) sum_j sum_p squared residual of the interpolated prediction."""
    residual = weight_matrix(spec, dataset.inputs) @ state.x - dataset.targets
    return float(np.sum(residual * residual) / dataset.n)


def batch_schedule(n: int, batch_size: int, rng: np.random.Generator):
    """Yield index batches; every point appears exactly once per pass."""
    if batch_size < 1 or batch_size > n:
        raise ValueError("need 1 <= batch_size <= N")
    while True:
        perm = rng.permutation(n)
        for start in range(0, n, batch_size):
            yield perm[start:start + batch_size]


@dataclass(frozen=True)
class TrainSchedule:
    """Epoch plan for training by dissipation."""

    epochs: int
    batch_size: int
    dt_epoch: float = 0.1
    inner_steps: int | str = "auto"  # substeps per epoch, or "auto" for the stability bound
    seed: int = 0
    steady_window: int | None = None
    steady_rel_tol: float = 0.05

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.dt_epoch > 0:
            raise ValueError("dt_epoch must be positive")
        if isinstance(self.inner_steps, str):
            if self.inner_steps != "auto":
                raise ValueError("inner_steps must be an int or 'auto'")
        elif self.inner_steps < 1:
            raise ValueError("inner_steps must be >= 1")


@dataclass
class EnsembleTrainReport:
    """Training outcome for an ensemble sharing one batch protocol."""

    loss_trace: np.ndarray          # (epochs,) ensemble-mean full-data loss
    losses: np.ndarray              # (epochs, n_traj)
    u_trace: np.ndarray             # (epochs,) mean batch potential at epoch end
    k_trace: np.ndarray             # (epochs,) mean kinetic energy at epoch end
    work_trace: np.ndarray          # (epochs,) mean accumulated work
    works: np.ndarray               # (n_traj,) final accumulated work
    n_switches: int
    steady_index: int
    steady_reached: bool
    steady_loss_mean: float
    steady_loss_std: float
    final_states: np.ndarray        # (n_traj, 2*nu*m) SDE-layout states
    wall_time: float
    inner_steps_used: int


@dataclass
class TrainReport:
    """Single-trajectory view of a training run."""

    loss_trace: np.ndarray
    u_trace: np.ndarray
    k_trace: np.ndarray
    work_trace: np.ndarray
    work: float
    n_switches: int
    steady_index: int
    steady_reached: bool
    steady_loss_mean: float
    final_state: GridState
    wall_time: float


def _batch_potentials(k: float, x_arr: np.ndarray, w_rows: np.ndarray,
                      y_rows: np.ndarray) -> np.ndarray:
    """Potential energy per trajectory; x_arr is (n_traj, nu, m)."""
    preds = np.einsum("bn,tnp->tbp", w_rows, x_arr)
    residual = preds - y_rows[None, :, :]
    return 0.5 * k * np.sum(residual * residual, axis=(1, 2))


def train_ensemble(spec: LatticeSpec, params: PhysicsParams, dataset: Dataset,
                   schedule: TrainSchedule, n_traj: int = 1) -> EnsembleTrainReport:
    """Run n_traj trajectories under a shared mini-batch protocol.

    Trajectory i initializes node heights uniformly over the target range and
    draws its noise from the stream keyed by (seed, i); the batch sequence is
    keyed by the seed alone, so it is the common switching protocol for the
    whole ensemble.
    """
    if schedule.batch_size > dataset.n:
        raise ValueError("batch_size must not exceed the dataset size")
    if dataset.d != spec.d or dataset.m != spec.m:
        raise ValueError("dataset dimensions must match the lattice spec")
    t_start = time.perf_counter()
    nu, m = spec.n_nodes, spec.m
    n = nu * m
    mass = assemble_mass(spec, params)
    w_full = weight_matrix(spec, dataset.inputs)
    y_full = dataset.targets
    y_lo, y_hi = float(y_full.min()), float(y_full.max())
    if y_hi <= y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    streams = []
    Z = np.zeros((n_traj, 2 * n))
    for i in range(n_traj):
        stream = _NoiseStream(schedule.seed, i)
        x0 = stream.rng.uniform(y_lo, y_hi, size=(nu, m))
        Z[i, :n] = x0.flatten(order="F")
        streams.append(stream)

    batches = batch_schedule(dataset.n, schedule.batch_size,
                             np.random.default_rng(schedule.seed))
    losses = np.empty((schedule.epochs, n_traj))
    u_trace = np.empty(schedule.epochs)
    k_trace = np.empty(schedule.epochs)
    work_trace = np.empty(schedule.epochs)
    works = np.zeros(n_traj)
    inner_used = 0
    old_idx = None

    for epoch in range(schedule.epochs):
        idx = next(batches)
        x_arr = Z[:, :n].reshape(n_traj, m, nu).transpose(0, 2, 1)
        with np.errstate(over="ignore", invalid="ignore"):
            u_new = _batch_potentials(params.stiffness, x_arr, w_full[idx], y_full[idx])
            if old_idx is None:
                works += u_new
            else:
                works += u_new - _batch_potentials(params.stiffness, x_arr,
                                                   w_full[old_idx], y_full[old_idx])
        batch = SpringBatch(dataset.inputs[idx], y_full[idx], w_full[idx])
        sde = assemble_sde(spec, params, batch, mass)

        if schedule.inner_steps == "auto":
            cap = stable_dt(sde)
            inner = max(1, int(math.ceil(schedule.dt_epoch / min(cap, schedule.dt_epoch))))
        else:
            inner = int(schedule.inner_steps)
        inner_used = max(inner_used, inner)
        dt = schedule.dt_epoch / inner
        sqrt_dt = math.sqrt(dt)
        sig_v = sde.sigma[n:]
        noise = np.stack([s.block(inner, n) for s in streams])
        with np.errstate(over="ignore", invalid="ignore"):
            for s in range(inner):
                Z = Z + (Z @ sde.A.T + sde.b) * dt
                Z[:, n:] += sig_v * sqrt_dt * noise[:, s, :]
            if not np.isfinite(Z).all():
                raise IntegrationBlowupError(
                    f"epoch {epoch}: training state became non-finite; "
                    "reduce the time step")

            x_arr = Z[:, :n].reshape(n_traj, m, nu).transpose(0, 2, 1)
            preds = np.einsum("bn,tnp->tbp", w_full, x_arr)
            residual = preds - y_full[None, :, :]
            losses[epoch] = np.sum(residual * residual, axis=(1, 2)) / dataset.n
            u_trace[epoch] = _batch_potentials(params.stiffness, x_arr,
                                               w_full[idx], y_full[idx]).mean()
            v_arr = Z[:, n:].reshape(n_traj, m, nu).transpose(0, 2, 1)
            k_trace[epoch] = 0.5 * np.einsum("tnp,nk,tkp->", v_arr, mass.matrix,
                                             v_arr) / n_traj
        if not np.isfinite(losses[epoch]).all():
            raise IntegrationBlowupError(
                f"epoch {epoch}: loss overflowed; reduce the time step")
        work_trace[epoch] = works.mean()
        old_idx = idx

    loss_trace = losses.mean(axis=1)
    window = schedule.steady_window or max(2, schedule.epochs // 8)
    if schedule.epochs >= 2 * window:
        steady_index, steady_reached = detect_steady_state(
            loss_trace, window=window, rel_tol=schedule.steady_rel_tol)
    else:
        steady_index, steady_reached = schedule.epochs, False
        window = schedule.epochs
    # statistics fall back to the trailing window when no plateau was found
    steady = losses[steady_index:] if steady_index < schedule.epochs else losses[-window:]
    per_traj_steady = steady.mean(axis=0)
    return EnsembleTrainReport(
        loss_trace=loss_trace,
        losses=losses,
        u_trace=u_trace,
        k_trace=k_trace,
        work_trace=work_trace,
        works=works,
        n_switches=schedule.epochs,
        steady_index=steady_index,
        steady_reached=steady_reached,
        steady_loss_mean=float(per_traj_steady.mean()),
        steady_loss_std=float(per_traj_steady.std(ddof=1)) if n_traj > 1 else float(steady.std()),
        final_states=Z,
        wall_time=time.perf_counter() - t_start,
        inner_steps_used=inner_used,
    )


def train(spec: LatticeSpec, params: PhysicsParams, dataset: Dataset,
          schedule: TrainSchedule) -> TrainReport:
    """Single-trajectory training run; see train_ensemble for the protocol."""
    rep = train_ensemble(spec, params, dataset, schedule, n_traj=1)
    nu, m = spec.n_nodes, spec.m
    n = nu * m
    z = rep.final_states[0]
    final = GridState(z[:n].reshape(m, nu).T, z[n:].reshape(m, nu).T)
    return TrainReport(
        loss_trace=rep.loss_trace,
        u_trace=rep.u_trace,
        k_trace=rep.k_trace,
        work_trace=rep.work_trace,
        work=float(rep.works[0]),
        n_switches=rep.n_switches,
        steady_index=rep.steady_index,
        steady_reached=rep.steady_reached,
        steady_loss_mean=rep.steady_loss_mean,
        final_state=final,
        wall_time=rep.wall_time,
    )


def oracle_fit(spec: LatticeSpec, f) -> GridState:
    """Node heights set to exact function values, velocities zero."""
    coords = spec.node_coords()
    vals = np.asarray(f(coords), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    if vals.shape != (spec.n_nodes, spec.m):
        raise ValueError("function must return one value per node and output")
    return GridState(vals, np.zeros_like(vals))


def least_squares_fit(spec: LatticeSpec, dataset: Dataset) -> GridState:
    """Node heights minimizing the dataset mean-squared error."""
    w = weight_matrix(spec, dataset.inputs)
    x, *_ = np.linalg.lstsq(w, dataset.targets, rcond=None)
    return GridState(x, np.zeros_like(x))


def approximation_error(spec: LatticeSpec, state: GridState, f,
                        quadrature_points_per_cell: int = 8) -> float:
    """Integral of |f - prediction|^2 over the lattice by per-cell Gauss rules."""
    q = quadrature_points_per_cell
    nodes_1d, weights_1d = np.polynomial.legendre.leggauss(q)
    # map [-1, 1] to [0, 1]
    nodes_1d = 0.5 * (nodes_1d + 1.0)
    weights_1d = 0.5 * weights_1d

    cells = [range(nk - 1) for nk in spec.nodes_per_dim]
    grids = np.meshgrid(*([nodes_1d] * spec.d), indexing="ij")
    offs = np.stack([g.ravel() for g in grids], axis=1)          # (q^d, d)
    wgrids = np.meshgrid(*([weights_1d] * spec.d), indexing="ij")
    qw = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    cell_volume = float(np.prod(spec.spacing))

    total = 0.0
    for cell in itertools.product(*cells):
        base = np.asarray(spec.origin) + np.asarray(cell) * np.asarray(spec.spacing)
        pts = base + offs * np.asarray(spec.spacing)
        pred = weight_matrix(spec, pts) @ state.x
        vals = np.asarray(f(pts), dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        sq = np.sum((vals - pred) ** 2, axis=1)
        total += float(np.sum(qw * sq)) * cell_volume
    return total


def detect_steady_state(loss_trace, window: int, rel_tol: float = 0.05
                        ) -> tuple[int, bool]:
    """First epoch where adjacent window means agree and variance is stable.

    Returns (index, reached); index is the trace end when no steady window is
    found.
    """
    trace = np.asarray(loss_trace, dtype=float)
    if trace.size < 2 * window:
        raise ValueError("trace must be at least twice the window length")
    tiny = 1e-30
    for t in range(window, trace.size - window + 1):
        left = trace[t - window:t]
        right = trace[t:t + window]
        m1, m2 = left.mean(), right.mean()
        scale = max(abs(m1), abs(m2), tiny)
        if abs(m2 - m1) / scale >= rel_tol:
            continue
        v1, v2 = left.var(), right.var()
        if v1 < tiny * scale ** 2 and v2 < tiny * scale ** 2:
            return t, True
        if v1 <= tiny * scale ** 2 or v2 <= tiny * scale ** 2:
            continue
        ratio = v2 / v1
        if 0.5 <= ratio <= 2.0:
            return t, True
    return trace.size, False


def save_train_report(path, report: TrainReport | EnsembleTrainReport) -> None:
    """CSV trace with columns epoch,loss,U,K,W_acc."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "U", "K", "W_acc"])
        for e in range(len(report.loss_trace)):
            writer.writerow([
                e,
                f"{report.loss_trace[e]:.10g}",
                f"{report.u_trace[e]:.10g}",
                f"{report.k_trace[e]:.10g}",
                f"{report.work_trace[e]:.10g}",
            ])
