"""Experiment drivers: one per CLI subcommand, all CSV-producing.

Every driver writes a ``manifest.txt`` echoing the resolved configuration,
seed, package version and wall time, so a run can be repeated bit-for-bit.
Sweep points execute on an optional process pool; per-point seeds derive from
(experiment seed, point index), results are collected and written in point
order, and per-point numeric failures are recorded in the manifest while the
sweep continues.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import EXPERIMENT_IDS, dump_config, get, get_axis, get_domain, get_list
from .errors import ConfigError, SpringSticksError
from .lattice import LatticeSpec, save_grid_state
from .mechanics import SI_BOLTZMANN, PhysicsParams, SpringBatch, assemble_mass
from .langevin import assemble_sde, stable_dt
from .mlp import init_mlp, mlp_train
from .thermo import (
    MomentState,
    entropy_rates,
    gaussian_entropy,
    jarzynski_bootstrap,
    jarzynski_free_energy,
    propagate_moments,
    save_jarzynski_summary,
    save_thermo_trace,
)
from .training import (
    Dataset,
    FUNCTIONS,
    SyntheticSpec,
    TrainSchedule,
    approximation_error,
    least_squares_fit,
    load_dataset,
    mse_loss,
    oracle_fit,
    save_dataset,
    save_train_report,
    synthesize,
    train,
    train_ensemble,
)

__all__ = [
    "run_fit",
    "run_scale_sweep",
    "run_tlb_expressivity",
    "run_tlb_heatmap",
    "run_error_scaling",
    "run_entropy",
    "run_experiment",
    "extract_plateau",
    "point_seed",
]


def point_seed(seed: int, *indices: int) -> int:
    """Stable derived seed for a sweep point."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(i) for i in indices))
    return int(seq.generate_state(1, dtype=np.uint64)[0] % (2 ** 63))


def _boltzmann(cfg) -> float:
    raw = get(cfg, "physics.boltzmann", 1.0)
    if isinstance(raw, str):
        if raw.strip().upper() == "SI":
            return SI_BOLTZMANN
        raise ConfigError("config key 'physics.boltzmann': use a number or 'SI'")
    return float(raw)


def _physics(section: str, **kwargs) -> PhysicsParams:
    """PhysicsParams whose validation failures carry the config section."""
    try:
        return PhysicsParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"config section '{section}': {exc}") from exc


def _dataset_from_config(cfg, seed: int) -> tuple[Dataset, tuple]:
    """Dataset plus its covering domain (from config or data range)."""
    path = get(cfg, "data.file", None)
    if path is not None:
        ds = load_dataset(path)
        domain = tuple((float(ds.inputs[:, b].min()), float(ds.inputs[:, b].max()))
                       for b in range(ds.d))
        return ds, get_domain(cfg, "data.domain", domain)
    domain = get_domain(cfg, "data.domain")
    try:
        spec = SyntheticSpec(
            function=get(cfg, "data.function", kind=str),
            domain=domain,
            n_points=get(cfg, "data.n_points", kind=int),
            noise_sigma=float(get(cfg, "data.noise_sigma", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"config key 'data.function': {exc}") from exc
    data_seed = get(cfg, "data.seed", None)
    return synthesize(spec, seed if data_seed is None else int(data_seed)), domain


def _lattice_from_config(cfg, domain, m: int) -> LatticeSpec:
    nodes = get_list(cfg, "lattice.nodes_per_dim", kind=int)
    if len(nodes) != len(domain):
        raise ConfigError("config key 'lattice.nodes_per_dim': "
                          f"{len(nodes)} entries for a {len(domain)}-dim domain")
    lo = [iv[0] for iv in domain]
    hi = [iv[1] for iv in domain]
    return LatticeSpec.for_domain(lo, hi, nodes, m=m)


def _schedule_from_config(cfg, seed: int) -> TrainSchedule:
    inner = get(cfg, "schedule.inner_steps", "auto")
    if isinstance(inner, str) and inner != "auto":
        raise ConfigError("config key 'schedule.inner_steps': integer or 'auto'")
    return TrainSchedule(
        epochs=get(cfg, "schedule.epochs", kind=int),
        batch_size=get(cfg, "schedule.batch_size", kind=int),
        dt_epoch=float(get(cfg, "schedule.dt_epoch", 0.1)),
        inner_steps=inner,
        seed=seed,
        steady_window=get(cfg, "schedule.steady_window", None),
        steady_rel_tol=float(get(cfg, "schedule.steady_rel_tol", 0.05)),
    )


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.10g}" if isinstance(v, float) else v for v in row])


def _write_manifest(out: Path, cfg: dict, seed: int, wall: float, notes: list[str]):
    with open(out / "manifest.txt", "w") as fh:
        fh.write(f"version = {__version__}\n")
        fh.write(f"seed = {seed}\n")
        fh.write(f"wall_time_s = {wall:.3f}\n")
        for note in notes:
            fh.write(f"note = {note}\n")
        fh.write(dump_config(cfg))


def _run_tasks(task_fn, payloads, jobs: int):
    if jobs <= 1:
        return [task_fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(task_fn, payloads))


def _plateau_sigma(rows: list[dict]) -> float:
    """One-sigma uncertainty of a plateau estimate from per-point bootstrap CIs."""
    if not rows:
        return float("nan")
    halfwidths = [0.5 * (r["deltaF_hi"] - r["deltaF_lo"]) for r in rows[:3]]
    return float(np.median(halfwidths) / 1.96)


def extract_plateau(ks, dfs, rel_slope_tol: float = 0.05, min_points: int = 3
                    ) -> tuple[float, bool]:
    """Median of the small-k flat region of a free-energy sweep.

    Flatness means the point-to-point slope per decade of k stays below
    ``rel_slope_tol`` relative to the running plateau level.  Returns
    (|median|, found); when no flat region of ``min_points`` exists the median
    of the lowest-k ``min_points`` values is returned with found=False.
    """
    order = np.argsort(ks)
    ks = np.asarray(ks, dtype=float)[order]
    dfs = np.asarray(dfs, dtype=float)[order]
    count = 1
    while count < len(ks):
        level = max(abs(np.median(dfs[:count + 1])), 1e-300)
        decades = np.log10(ks[count] / ks[count - 1])
        slope = abs(dfs[count] - dfs[count - 1]) / max(decades, 1e-12) / level
        if slope >= rel_slope_tol:
            break
        count += 1
    if count >= min_points:
        return float(abs(np.median(dfs[:count]))), True
    take = min(min_points, len(dfs))
    return float(abs(np.median(dfs[:take]))), False


# ---------------------------------------------------------------------------
# fit

def run_fit(cfg: dict, out: Path, seed: int, jobs: int = 1) -> dict:
    """Train the lattice (and optionally MLP/MLPf) on one dataset."""
    t0 = time.perf_counter()
    out.mkdir(parents=True, exist_ok=True)
    dataset, domain = _dataset_from_config(cfg, seed)
    spec = _lattice_from_config(cfg, domain, dataset.m)
    params = _physics(
        "physics",
        mass=float(get(cfg, "physics.mass", 1.0)),
        stiffness=float(get(cfg, "physics.stiffness", 1.0)),
        friction=float(get(cfg, "physics.friction", 10.0)),
        temperature=float(get(cfg, "physics.temperature", 1e-3)),
        boltzmann=_boltzmann(cfg),
    )
    schedule = _schedule_from_config(cfg, seed)
    report = train(spec, params, dataset, schedule)

    save_dataset(out / "dataset.csv", dataset)
    save_train_report(out / "ss_report.csv", report)
    save_grid_state(out / "grid_state.csv", spec, report.final_state)

    oracle = least_squares_fit(spec, dataset)
    summary = {
        "ss_final_loss": float(report.loss_trace[-1]),
        "ss_steady_loss": report.steady_loss_mean,
        "ss_steady_index": report.steady_index,
        "ss_steady_reached": report.steady_reached,
        "oracle_min_loss": mse_loss(spec, oracle, dataset),
        "work": report.work,
    }

    if get(cfg, "fit.mlp", True):
        hidden = get(cfg, "fit.mlp_hidden", 16)
        lr = float(get(cfg, "fit.mlp_lr", 0.05))
        epochs = get(cfg, "fit.mlp_epochs", schedule.epochs)
        for name, trainable in (("mlp", True), ("mlpf", False)):
            params0 = init_mlp(dataset.d, dataset.m, hidden, seed, bias_trainable=trainable)
            _, trace, diverged = mlp_train(params0, dataset, lr=lr, epochs=epochs,
                                           batch_size=schedule.batch_size, seed=seed)
            nan = float("nan")
            _write_rows(out / f"{name}_report.csv", ["epoch", "loss", "U", "K", "W_acc"],
                        [[e, float(trace[e]), nan, nan, nan] for e in range(len(trace))])
            summary[f"{name}_final_loss"] = float(trace[-1])
            summary[f"{name}_diverged"] = diverged

    with open(out / "summary.txt", "w") as fh:
        for key in sorted(summary):
            fh.write(f"{key} = {summary[key]}\n")
    _write_manifest(out, cfg, seed, time.perf_counter() - t0, [])
    return summary


# ---------------------------------------------------------------------------
# scale sweep and TLB drivers

def _sweep_point_task(payload: dict) -> dict:
    """One (k, gamma, T, N_s) training ensemble; returns a CSV row dict."""
    try:
        domain = payload["domain"]
        spec = LatticeSpec.for_domain([iv[0] for iv in domain], [iv[1] for iv in domain],
                                      payload["nodes_per_dim"], m=1)
        data = Dataset(np.asarray(payload["inputs"]), np.asarray(payload["targets"]))
        params = PhysicsParams(mass=payload["mass"], stiffness=payload["k"],
                               friction=payload["gamma"], temperature=payload["T"],
                               boltzmann=payload["kb"])
        schedule = TrainSchedule(
            epochs=payload["epochs"], batch_size=payload["batch_size"],
            dt_epoch=payload["dt_epoch"], inner_steps=payload["inner_steps"],
            seed=payload["run_seed"], steady_window=payload["steady_window"],
        )
        rep = train_ensemble(spec, params, data, schedule, n_traj=payload["n_traj"])
        df = jarzynski_free_energy(rep.works, params)
        lo, hi = jarzynski_bootstrap(rep.works, params, n_boot=payload["n_boot"],
                                     seed=payload["run_seed"])
        return {
            "index": payload["index"], "k": payload["k"], "M": payload["mass"],
            "gamma": payload["gamma"], "T": payload["T"],
            "loss_mean": rep.steady_loss_mean, "loss_std": rep.steady_loss_std,
            "deltaF": df, "deltaF_lo": lo, "deltaF_hi": hi,
            "mean_W": float(rep.works.mean()), "n_traj": payload["n_traj"],
            "steady_reached": rep.steady_reached, "error": "",
            "works": [float(w) for w in rep.works],
        }
    except SpringSticksError as exc:
        nan = float("nan")
        return {
            "index": payload["index"], "k": payload["k"], "M": payload["mass"],
            "gamma": payload["gamma"], "T": payload["T"],
            "loss_mean": nan, "loss_std": nan, "deltaF": nan,
            "deltaF_lo": nan, "deltaF_hi": nan, "mean_W": nan,
            "n_traj": payload["n_traj"], "steady_reached": False,
            "error": f"{type(exc).__name__}: {exc}", "works": [],
        }


def _sweep_payloads(cfg, seed, ks, gamma, temperature, nodes_per_dim, n_traj,
                    base_index=0):
    dataset, domain = _dataset_from_config(cfg, seed)
    if dataset.d != 1:
        raise ConfigError("scale/TLB sweeps use 1-d data; got d="
                          f"{dataset.d} (config key 'data.domain')")
    if gamma < 0 or temperature < 0:
        raise ConfigError("config: friction and temperature must be >= 0")
    if np.any(np.asarray(ks, dtype=float) < 0):
        raise ConfigError("config key 'sweep.k': stiffness values must be >= 0")
    if get(cfg, "sweep.mass_equals_stiffness", True) and np.any(
            np.asarray(ks, dtype=float) == 0):
        raise ConfigError("config key 'sweep.k': k = 0 needs "
                          "sweep.mass_equals_stiffness = false (mass must stay positive)")
    # common random numbers: every sweep point shares the trajectory streams,
    # so estimator noise cancels along the sweep axes instead of masking the
    # plateau slope
    run_seed = point_seed(seed, 0)
    payloads = []
    for i, k in enumerate(ks):
        idx = base_index + i
        payloads.append({
            "index": idx,
            "domain": domain,
            "nodes_per_dim": nodes_per_dim,
            "inputs": dataset.inputs.tolist(),
            "targets": dataset.targets.tolist(),
            "k": float(k),
            "mass": float(k) if get(cfg, "sweep.mass_equals_stiffness", True)
            else float(get(cfg, "physics.mass", 1.0)),
            "gamma": float(gamma),
            "T": float(temperature),
            "kb": _boltzmann(cfg),
            "n_traj": int(n_traj),
            "epochs": get(cfg, "schedule.epochs", 500),
            "batch_size": get(cfg, "schedule.batch_size", 16),
            "dt_epoch": float(get(cfg, "schedule.dt_epoch", 0.1)),
            "inner_steps": get(cfg, "schedule.inner_steps", "auto"),
            "steady_window": get(cfg, "schedule.steady_window", None),
            "run_seed": run_seed,
            "n_boot": get(cfg, "sweep.n_boot", 200),
        })
    return payloads


def run_scale_sweep(cfg: dict, out: Path, seed: int, jobs: int = 1) -> list[dict]:
    """Sweep the spring constant (mass tied to it) at fixed friction/temperature."""
    t0 = time.perf_counter()
    out.mkdir(parents=True, exist_ok=True)
    ks = get_axis(cfg, "sweep.k", np.logspace(-5, 2, 16))
    gamma = float(get(cfg, "physics.friction", 0.1))
    temperature = float(get(cfg, "physics.temperature", 1.0))
    nodes = get_list(cfg, "lattice.nodes_per_dim", [2], kind=int)
    n_traj = get(cfg, "sweep.n_trajectories", 256)
    payloads = _sweep_payloads(cfg, seed, ks, gamma, temperature, nodes, n_traj)
    rows = sorted(_run_tasks(_sweep_point_task, payloads, jobs), key=lambda r: r["index"])

    _write_rows(out / "scale_sweep.csv",
                ["k", "M", "loss_mean", "loss_std", "deltaF", "deltaF_lo", "deltaF_hi"],
                [[r["k"], r["M"], r["loss_mean"], r["loss_std"], r["deltaF"],
                  r["deltaF_lo"], r["deltaF_hi"]] for r in rows])
    params_ref = PhysicsParams(mass=1.0, stiffness=1.0, friction=gamma,
                               temperature=temperature, boltzmann=_boltzmann(cfg))
    jpath = out / "jarzynski.txt"
    jpath.unlink(missing_ok=True)
    for r in rows:
        if r["works"]:
            save_jarzynski_summary(jpath, np.asarray(r["works"]), params_ref,
                                   seed=point_seed(seed, 0), append=True)
    notes = [f"point {r['index']} failed: {r['error']}" for r in rows if r["error"]]
    _write_manifest(out, cfg, seed, time.perf_counter() - t0, notes)
    return rows


def run_tlb_expressivity(cfg: dict, out: Path, seed: int, jobs: int = 1) -> list[dict]:
    """Plateau free energy as a function of the stick count (1-d lattices)."""
    t0 = time.perf_counter()
    out.mkdir(parents=True, exist_ok=True)
    stick_counts = [int(v) for v in get_axis(cfg, "expressivity.n_sticks", [1, 2, 4, 8])]
    ks = get_axis(cfg, "sweep.k", np.logspace(-5, 2, 16))
    gamma = float(get(cfg, "physics.friction", 1.0))
    temperature = float(get(cfg, "physics.temperature", 1.0))
    n_traj = get(cfg, "sweep.n_trajectories", 256)

    payloads = []
    for j, n_s in enumerate(stick_counts):
        payloads += _sweep_payloads(cfg, seed, ks, gamma, temperature, [n_s + 1],
                                    n_traj, base_index=j * len(ks))
    rows = sorted(_run_tasks(_sweep_point_task, payloads, jobs), key=lambda r: r["index"])

    out_rows = []
    results = []
    notes = [f"point {r['index']} failed: {r['error']}" for r in rows if r["error"]]
    detail = []
    for j, n_s in enumerate(stick_counts):
        chunk = rows[j * len(ks):(j + 1) * len(ks)]
        good = [r for r in chunk if not r["error"]]
        df_min, found = extract_plateau([r["k"] for r in good], [r["deltaF"] for r in good])
        if not found:
            notes.append(f"N_s={n_s}: plateau not found; using lowest-k median")
        out_rows.append([n_s, df_min])
        detail += [[n_s, r["k"], r["deltaF"], r["deltaF_lo"], r["deltaF_hi"]]
                   for r in chunk]
        results.append({"N_s": n_s, "deltaF_min": df_min, "found": found,
                        "sigma": _plateau_sigma(good)})
    _write_rows(out / "tlb_expressivity.csv", ["N_s", "deltaF_min"], out_rows)
    _write_rows(out / "tlb_expressivity_points.csv",
                ["N_s", "k", "deltaF", "deltaF_lo", "deltaF_hi"], detail)
    _write_manifest(out, cfg, seed, time.perf_counter() - t0, notes)
    return results


def run_tlb_heatmap(cfg: dict, out: Path, seed: int, jobs: int = 1) -> list[dict]:
    """Plateau free energy over a (friction, temperature) grid."""
    t0 = time.perf_counter()
    out.mkdir(parents=True, exist_ok=True)
    gammas = get_axis(cfg, "heatmap.gamma", np.logspace(-1, 1, 6))
    temps = get_axis(cfg, "heatmap.T", np.logspace(-1, 1, 6))
    ks = get_axis(cfg, "sweep.k", np.logspace(-5, -3, 5))
    nodes = get_list(cfg, "lattice.nodes_per_dim", [2], kind=int)
    n_traj = get(cfg, "sweep.n_trajectories", 256)

    payloads = []
    cell = 0
    for gamma in gammas:
        for temperature in temps:
            payloads += _sweep_payloads(cfg, seed, ks, gamma, temperature, nodes,
                                        n_traj, base_index=cell * len(ks))
            cell += 1
    rows = sorted(_run_tasks(_sweep_point_task, payloads, jobs), key=lambda r: r["index"])

    out_rows = []
    results = []
    notes = [f"point {r['index']} failed: {r['error']}" for r in rows if r["error"]]
    detail = []
    cell = 0
    for gamma in gammas:
        for temperature in temps:
            chunk = rows[cell * len(ks):(cell + 1) * len(ks)]
            good = [r for r in chunk if not r["error"]]
            df_min, found = extract_plateau([r["k"] for r in good],
                                            [r["deltaF"] for r in good])
            if not found:
                notes.append(f"gamma={gamma:g},T={temperature:g}: plateau not found")
            out_rows.append([float(gamma), float(temperature), df_min])
            detail += [[float(gamma), float(temperature), r["k"], r["deltaF"],
                        r["deltaF_lo"], r["deltaF_hi"]] for r in chunk]
            results.append({"gamma": float(gamma), "T": float(temperature),
                            "deltaF_min": df_min, "found": found,
                            "sigma": _plateau_sigma(good)})
            cell += 1
    _write_rows(out / "tlb_heatmap.csv", ["gamma", "T", "deltaF_min"], out_rows)
    _write_rows(out / "tlb_heatmap_points.csv",
                ["gamma", "T", "k", "deltaF", "deltaF_lo", "deltaF_hi"], detail)
    _write_manifest(out, cfg, seed, time.perf_counter() - t0, notes)
    return results


# ---------------------------------------------------------------------------
# error scaling

def _error_scaling_task(payload: dict) -> dict:
    lo, hi = payload["domain"]
    n_s = payload["n_s"]
    fn = FUNCTIONS[payload["function"]]
    spec = LatticeSpec.for_domain([lo], [hi], [n_s + 1], m=1)
    e_oracle = approximation_error(spec, oracle_fit(spec, fn), fn,
                                   payload["quadrature"])
    nan = float("nan")
    e_mean, e_std = nan, nan
    if payload["trained"]:
        errors = []
        for r in range(payload["n_runs"]):
            data_spec = SyntheticSpec(payload["function"], ((lo, hi),),
                                      payload["n_points"], payload["noise_sigma"])
            data = synthesize(data_spec, point_seed(payload["seed"], payload["index"], r, 0))
            params = PhysicsParams(mass=payload["mass"], stiffness=payload["k"],
                                   friction=payload["gamma"], temperature=payload["T"],
                                   boltzmann=payload["kb"])
            schedule = TrainSchedule(epochs=payload["epochs"],
                                     batch_size=payload["batch_size"],
                                     seed=point_seed(payload["seed"], payload["index"], r, 1))
            rep = train(spec, params, data, schedule)
            errors.append(approximation_error(spec, rep.final_state, fn,
                                              payload["quadrature"]))
        e_mean = float(np.mean(errors))
        e_std = float(np.std(errors, ddof=1)) if len(errors) > 1 else 0.0
    return {"index": payload["index"], "function": payload["function"], "n_s": n_s,
            "E_oracle": float(e_oracle), "E_trained_mean": e_mean, "E_trained_std": e_std}


def run_error_scaling(cfg: dict, out: Path, seed: int, jobs: int = 1) -> list[dict]:
    """Approximation error of exact-node fits (and optionally trained fits)."""
    t0 = time.perf_counter()
    out.mkdir(parents=True, exist_ok=True)
    functions = get_list(cfg, "error.functions",
                         ["sin_x", "cos_x", "x_squared", "exp_x"], kind=str)
    for fid in functions:
        if fid not in FUNCTIONS:
            raise ConfigError(f"config key 'error.functions': unknown id {fid!r}")
    stick_counts = [int(v) for v in get_axis(cfg, "error.n_sticks", [2, 4, 8, 16, 32])]
    domain = get_domain(cfg, "error.domain", ((0.0, 2.0 * np.pi),))[0]
    trained = bool(get(cfg, "error.trained", False))

    payloads = []
    for i, fid in enumerate(functions):
        for j, n_s in enumerate(stick_counts):
            payloads.append({
                "index": i * len(stick_counts) + j, "function": fid, "n_s": n_s,
                "domain": domain, "quadrature": get(cfg, "error.quadrature", 16),
                "trained": trained, "n_runs": get(cfg, "error.n_runs", 8),
                "n_points": get(cfg, "data.n_points", 64),
                "noise_sigma": float(get(cfg, "data.noise_sigma", 0.0)),
                "mass": float(get(cfg, "physics.mass", 1.0)),
                "k": float(get(cfg, "physics.stiffness", 1.0)),
                "gamma": float(get(cfg, "physics.friction", 10.0)),
                "T": float(get(cfg, "physics.temperature", 1e-3)),
                "kb": _boltzmann(cfg),
                "epochs": get(cfg, "schedule.epochs", 300),
                "batch_size": get(cfg, "schedule.batch_size", 16),
                "seed": seed,
            })
    rows = sorted(_run_tasks(_error_scaling_task, payloads, jobs),
                  key=lambda r: r["index"])
    _write_rows(out / "error_scaling.csv",
                ["f", "N_s", "E_oracle", "E_trained_mean", "E_trained_std"],
                [[r["function"], r["n_s"], r["E_oracle"], r["E_trained_mean"],
                  r["E_trained_std"]] for r in rows])

    slopes = []
    for fid in functions:
        pts = [(r["n_s"], r["E_oracle"]) for r in rows if r["function"] == fid]
        if len(pts) < 2:
            slopes.append((fid, float("nan")))
            continue
        logn = np.log10([p[0] for p in pts])
        # error-norm slope: fit on log sqrt(E)
        loge = 0.5 * np.log10([p[1] for p in pts])
        slope = np.polyfit(logn, loge, 1)[0]
        slopes.append((fid, float(slope)))
    with open(out / "slopes.txt", "w") as fh:
        for fid, slope in slopes:
            fh.write(f"{fid} = {slope:.6g}\n")
    _write_manifest(out, cfg, seed, time.perf_counter() - t0, [])
    return rows


# ---------------------------------------------------------------------------
# entropy production

def run_entropy(cfg: dict, out: Path, seed: int, jobs: int = 1) -> list[dict]:
    """Moment-propagated entropy production traces on the one-stick rig."""
    t0 = time.perf_counter()
    out.mkdir(parents=True, exist_ok=True)
    gammas = get_axis(cfg, "entropy.gamma", [10.0, 1.0])
    stiffnesses = get_axis(cfg, "entropy.k", [1.0])
    temperature = float(get(cfg, "entropy.T", 1e-4))
    kb = _boltzmann(cfg)
    n_springs = get(cfg, "entropy.n_springs", 10)
    noise = float(get(cfg, "entropy.noise", 0.1))
    n_sticks = get(cfg, "entropy.n_sticks", 1)
    t_final = float(get(cfg, "entropy.t_final", 30.0))
    dt_frac = float(get(cfg, "entropy.dt_frac", 0.05))
    init_mean = float(get(cfg, "entropy.init_mean", 1.0))
    init_spread = float(get(cfg, "entropy.init_spread", 0.3))
    record_stride = get(cfg, "entropy.record_stride", 10)

    results = []
    for gamma in gammas:
        for k in stiffnesses:
            mass = float(get(cfg, "entropy.mass", k))
            spec = LatticeSpec.for_domain([0.0], [1.0], [int(n_sticks) + 1], m=1)
            data_spec = SyntheticSpec("zero", ((0.0, 1.0),), int(n_springs), noise)
            data = synthesize(data_spec, point_seed(seed, 0))
            params = _physics("entropy", mass=mass, stiffness=float(k),
                              friction=float(gamma), temperature=temperature,
                              boltzmann=kb)
            batch = SpringBatch.from_data(spec, data.inputs, data.targets)
            mass_mat = assemble_mass(spec, params)
            sde = assemble_sde(spec, params, batch, mass_mat)

            n = spec.n_nodes
            mean = np.concatenate([np.full(n, init_mean), np.zeros(n)])
            cov = np.zeros((2 * n, 2 * n))
            cov[:n, :n] = init_spread ** 2 * np.eye(n)
            cov[n:, n:] = kb * temperature * np.linalg.inv(mass_mat.matrix)
            mom = MomentState(mean, cov)

            dt = dt_frac * stable_dt(sde)
            steps = int(np.ceil(t_final / dt))
            times, pis, phis, esses, us, kin = [], [], [], [], [], []
            w = batch.weights
            y = batch.targets[:, 0]
            t = 0.0
            for step in range(steps + 1):
                if step % int(record_stride) == 0 or step == steps:
                    pi, phi = entropy_rates(sde, mom, params)
                    r_mean = w @ mom.mean[:n] - y
                    quad = float(np.einsum("bi,ij,bj->", w, mom.cov[:n, :n], w))
                    u_mean = 0.5 * params.stiffness * (float(np.sum(r_mean ** 2)) + quad)
                    k_mean = 0.5 * (
                        float(mom.mean[n:] @ mass_mat.matrix @ mom.mean[n:])
                        + float(np.sum(mass_mat.matrix * mom.cov[n:, n:]))
                    )
                    times.append(t)
                    pis.append(pi)
                    phis.append(phi)
                    esses.append(gaussian_entropy(mom.cov))
                    us.append(u_mean)
                    kin.append(k_mean)
                if step < steps:
                    mom = propagate_moments(sde, mom, dt)
                    t += dt
            tag = f"g{gamma:g}_k{k:g}"
            _write_rows(out / f"entropy_{tag}.csv", ["t", "Pi", "Phi", "U_mean"],
                        list(zip(times, pis, phis, us)))
            save_thermo_trace(out / f"thermo_{tag}.csv", times, pis, phis, esses, us, kin)
            results.append({"gamma": float(gamma), "k": float(k),
                            "times": np.asarray(times), "Pi": np.asarray(pis),
                            "Phi": np.asarray(phis), "U_mean": np.asarray(us)})
    _write_manifest(cfg=cfg, out=out, seed=seed, wall=time.perf_counter() - t0, notes=[])
    return results


_DRIVERS = {
    "fit": run_fit,
    "scale-sweep": run_scale_sweep,
    "tlb-expressivity": run_tlb_expressivity,
    "tlb-heatmap": run_tlb_heatmap,
    "error-scaling": run_error_scaling,
    "entropy": run_entropy,
}


def run_experiment(experiment: str, cfg: dict, out: Path, seed: int, jobs: int = 1):
    if experiment not in _DRIVERS:
        raise ConfigError(f"unknown experiment {experiment!r}; pick one of {EXPERIMENT_IDS}")
    declared = get(cfg, "experiment.id", experiment, kind=str)
    if declared != experiment:
        raise ConfigError(f"config key 'experiment.id' = {declared!r} does not match "
                          f"subcommand {experiment!r}")
    return _DRIVERS[experiment](cfg, Path(out), seed, jobs)
