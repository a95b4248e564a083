"""Work accounting, Jarzynski free-energy estimation, and entropy rates.

Protocol work is the instantaneous potential-energy jump when the attached
spring batch changes, evaluated at the unchanged configuration; the initial
spring attachment counts as the first jump.  Free-energy changes follow the
convention ``deltaF = F_initial - F_final = k_b T ln<exp(-W / k_b T)>`` so a
positive ``-deltaF`` reads as energy dissipated to the bath.

For the linear system the first two moments evolve in closed form
(``d<z>/dt = A<z> + b``, ``dTheta/dt = A Theta + Theta A' + 2D``), and the
entropy production/flux rates follow from the irreversible (velocity) sector,
where the diffusion matrix has support.  The production rate is evaluated in
an explicitly positive-semidefinite form so it stays >= 0 numerically and
vanishes in an equilibrium steady state.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import EstimatorUndefinedError, IntegrationBlowupError, SingularDiffusionError
from .langevin import LinearSDE
from .lattice import GridState, LatticeSpec
from .mechanics import PhysicsParams, SpringBatch, potential_energy

__all__ = [
    "WorkLedger",
    "MomentState",
    "record_switch_work",
    "jarzynski_free_energy",
    "jarzynski_bootstrap",
    "propagate_moments",
    "entropy_rates",
    "gaussian_entropy",
    "save_thermo_trace",
    "save_jarzynski_summary",
]


@dataclass(frozen=True)
class WorkLedger:
    """Accumulated protocol work of one trajectory."""

    work: float = 0.0
    n_switches: int = 0

    def __post_init__(self):
        if not np.isfinite(self.work):
            raise ValueError("accumulated work must be finite")


def record_switch_work(ledger: WorkLedger, state: GridState, old_batch: SpringBatch | None,
                       new_batch: SpringBatch, params: PhysicsParams,
                       spec: LatticeSpec) -> WorkLedger:
    """Add the potential jump U(x; new) - U(x; old) at the current x.

    Pass ``old_batch=None`` for the initial spring attachment (old potential 0).
    """
    u_new = potential_energy(spec, state, params, new_batch)
    u_old = 0.0 if old_batch is None else potential_energy(spec, state, params, old_batch)
    return WorkLedger(work=ledger.work + (u_new - u_old), n_switches=ledger.n_switches + 1)


def jarzynski_free_energy(works, params: PhysicsParams) -> float:
    """deltaF = k_b T ln<exp(-W / k_b T)> over trajectories, via log-sum-exp."""
    works = np.asarray(works, dtype=float)
    if works.ndim != 1 or works.size < 1:
        raise ValueError("works must be a non-empty 1-d array")
    kbt = params.boltzmann * params.temperature
    if kbt <= 0:
        raise EstimatorUndefinedError("Jarzynski estimator undefined at T = 0")
    return float(kbt * (logsumexp(-works / kbt) - np.log(works.size)))


def jarzynski_bootstrap(works, params: PhysicsParams, n_boot: int = 200,
                        seed: int = 0, ci: float = 0.95) -> tuple[float, float]:
    """Percentile bootstrap interval for the free-energy estimate."""
    works = np.asarray(works, dtype=float)
    rng = np.random.default_rng(seed)
    estimates = np.empty(n_boot)
    for i in range(n_boot):
        sample = works[rng.integers(0, works.size, size=works.size)]
        estimates[i] = jarzynski_free_energy(sample, params)
    tail = 100.0 * (1.0 - ci) / 2.0
    lo, hi = np.percentile(estimates, [tail, 100.0 - tail])
    return float(lo), float(hi)


@dataclass
class MomentState:
    """Mean and covariance of the full (positions, velocities) state."""

    mean: np.ndarray  # (2n,)
    cov: np.ndarray   # (2n, 2n)

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        if self.cov.shape != (self.mean.size, self.mean.size):
            raise ValueError("cov must be square and match the mean dimension")

    def validate(self, sym_tol: float = 1e-10, eig_floor: float = -1e-10) -> None:
        scale = max(1.0, float(np.abs(self.cov).max()))
        if np.abs(self.cov - self.cov.T).max() > sym_tol * scale:
            raise ValueError("covariance lost symmetry")
        if np.linalg.eigvalsh(self.cov).min() < eig_floor * scale:
            raise ValueError("covariance is not PSD within tolerance")


def _moment_rhs(sde: LinearSDE, mean: np.ndarray, cov: np.ndarray):
    d_mean = sde.A @ mean + sde.b
    d_cov = sde.A @ cov + cov @ sde.A.T
    d_cov[np.diag_indices_from(d_cov)] += sde.sigma ** 2
    return d_mean, d_cov


def propagate_moments(sde: LinearSDE, moments: MomentState, dt: float) -> MomentState:
    """One RK4 step of the mean/covariance ODEs, re-symmetrizing the covariance."""
    mu, th = moments.mean, moments.cov
    k1m, k1c = _moment_rhs(sde, mu, th)
    k2m, k2c = _moment_rhs(sde, mu + 0.5 * dt * k1m, th + 0.5 * dt * k1c)
    k3m, k3c = _moment_rhs(sde, mu + 0.5 * dt * k2m, th + 0.5 * dt * k2c)
    k4m, k4c = _moment_rhs(sde, mu + dt * k3m, th + dt * k3c)
    mean = mu + dt / 6.0 * (k1m + 2 * k2m + 2 * k3m + k4m)
    cov = th + dt / 6.0 * (k1c + 2 * k2c + 2 * k3c + k4c)
    cov = 0.5 * (cov + cov.T)
    if not (np.isfinite(mean).all() and np.isfinite(cov).all()) or np.abs(cov).max() > 1e30:
        raise IntegrationBlowupError("moment propagation blew up; reduce dt")
    return MomentState(mean=mean, cov=cov)


def entropy_rates(sde: LinearSDE, moments: MomentState,
                  params: PhysicsParams) -> tuple[float, float]:
    """Entropy production and flux rates (in k_b per unit time).

    Requires positive temperature and friction so the velocity block of the
    diffusion matrix is invertible.  With the irreversible drift acting as
    ``-gamma`` on velocities, the production rate is the bath-weighted square
    of the irreversible probability current,

        Pi = Tr(G' D_v^-1 G Theta) + gamma^2 mu_v' D_v^-1 mu_v,
        G  = D_v R_v - gamma S_v,

    where R_v are the velocity rows of Theta^-1 and S_v selects velocity
    components; the flux follows from dS/dt = Pi - Phi for the Gaussian
    entropy.  This form vanishes exactly in an equilibrium steady state.
    """
    n = sde.n_dof
    gamma = params.friction
    d_v = sde.diffusion_diag()[n:]
    if gamma <= 0 or np.any(d_v <= 0):
        raise SingularDiffusionError(
            "entropy rates need T > 0 and gamma > 0 (velocity diffusion block singular)"
        )
    theta = 0.5 * (moments.cov + moments.cov.T)
    theta_inv = np.linalg.inv(theta)
    theta_inv = 0.5 * (theta_inv + theta_inv.T)

    G = d_v[:, None] * theta_inv[n:, :]          # D_v R_v, shape (n, 2n)
    G[:, n:] -= gamma * np.eye(n)                # minus gamma on velocity columns
    H = G @ theta
    production = float(np.sum((G * H).sum(axis=1) / d_v))
    mu_v = moments.mean[n:]
    production += float(gamma ** 2 * np.sum(mu_v * mu_v / d_v))

    # dS/dt = Tr(D Theta^-1) + Tr(A); flux = production - dS/dt
    ds_dt = float(np.sum(d_v * np.diag(theta_inv)[n:])) - gamma * n
    flux = production - ds_dt
    return production, flux


def gaussian_entropy(cov: np.ndarray) -> float:
    """Differential entropy of a Gaussian up to an additive constant: ln det / 2."""
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise ValueError("covariance must be positive definite")
    return 0.5 * float(logdet)


def save_thermo_trace(path, times, pi, phi, s_gauss, u_mean, k_mean) -> None:
    """CSV with columns t,Pi,Phi,S_gauss,U_mean,K_mean."""
    columns = [times, pi, phi, s_gauss, u_mean, k_mean]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "Pi", "Phi", "S_gauss", "U_mean", "K_mean"])
        for row in zip(*columns):
            writer.writerow([f"{v:.10g}" for v in row])


def save_jarzynski_summary(path, works, params: PhysicsParams, seed: int,
                           n_boot: int = 200, append: bool = False) -> None:
    """Flat text line: n_traj,mean_W,deltaF,deltaF_boot_lo,deltaF_boot_hi,seed."""
    works = np.asarray(works, dtype=float)
    df = jarzynski_free_energy(works, params)
    lo, hi = jarzynski_bootstrap(works, params, n_boot=n_boot, seed=seed)
    line = (f"n_traj={works.size},mean_W={works.mean():.10g},deltaF={df:.10g},"
            f"deltaF_boot_lo={lo:.10g},deltaF_boot_hi={hi:.10g},seed={seed}\n")
    with open(path, "a" if append else "w") as fh:
        fh.write(line)
