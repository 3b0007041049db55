"""Declarative experiment runner.

Parses a JSON config document, executes multi-trial runs with deterministic
per-trial seeding (seed = base_seed + trial index, mod 2^64), persists one
CSV per trial plus one aggregate CSV per algorithm, and writes a manifest
recording the resolved config, seeds, reference values and per-file
checksums. Re-running the same config yields byte-identical CSVs; the
manifest differs only in its ``created_utc`` field.

Trial CSV column order: trial, epoch, samples_cum, risk, grad_norm_sq,
run_avg_grad_norm_sq, then theta_0..theta_{d-1} when record_theta is set.
Floats are printed with 17 significant digits; absent oracles leave empty
cells. Rows follow the per-algorithm ``record_stride`` (first and last epoch
always included); traces themselves are computed at every epoch.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .core import Schedule, make_rng
from .envs import Environment, make_environment
from .errors import AggregationError, ConfigError
from .optim import ALGORITHM_TAGS, AlgoConfig, RunTrace, run_algorithm

__all__ = [
    "AggregateCurve",
    "AlgorithmPlan",
    "ExperimentConfig",
    "ExperimentResult",
    "aggregate",
    "load_config",
    "config_from_dict",
    "run_experiment",
]

_SEED_MASK = (1 << 64) - 1

TRIAL_COLUMNS = ("trial", "epoch", "samples_cum", "risk", "grad_norm_sq", "run_avg_grad_norm_sq")
AGGREGATE_COLUMNS = (
    "epoch",
    "samples_mean",
    "risk_mean",
    "risk_std",
    "grad_norm_sq_mean",
    "grad_norm_sq_std",
    "run_avg_grad_norm_sq_mean",
    "run_avg_grad_norm_sq_std",
    "trials",
)


@dataclass
class AlgorithmPlan:
    """One fully resolved algorithm entry of an experiment."""

    label: str
    config: AlgoConfig
    record_stride: int = 1


@dataclass
class ExperimentConfig:
    experiment: str
    environment_tag: str
    environment_params: dict
    algorithms: list[AlgorithmPlan]
    trials: int
    base_seed: int
    output_dir: Path | None = None
    record_theta: bool = True
    raw: dict = field(default_factory=dict)  # config document echoed to the manifest

    def trial_seed(self, trial: int) -> int:
        return (self.base_seed + trial) & _SEED_MASK


@dataclass
class AggregateCurve:
    """Pointwise mean/std across surviving trials on a common epoch grid."""

    epochs: np.ndarray
    samples_mean: np.ndarray
    risk_mean: np.ndarray | None
    risk_std: np.ndarray | None
    grad_norm_sq_mean: np.ndarray | None
    grad_norm_sq_std: np.ndarray | None
    run_avg_grad_norm_sq_mean: np.ndarray | None
    run_avg_grad_norm_sq_std: np.ndarray | None
    trial_count: int


@dataclass
class ExperimentResult:
    output_dir: Path
    manifest_path: Path
    files: list[Path]
    aggregates: dict[str, AggregateCurve]
    all_diverged: list[str]


# ---------------------------------------------------------------------------
# Config parsing


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError:
        raise
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(doc)


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ConfigError(f"missing field {where}.{key}" if where else f"missing field {key}")
    return doc[key]


def _schedule_from_dict(d: dict, where: str) -> Schedule:
    try:
        return Schedule(
            alpha=float(_require(d, "alpha", where)),
            beta=float(_require(d, "beta", where)),
            eta0=float(_require(d, "eta0", where)),
            delta0=float(_require(d, "delta0", where)),
            lam=float(d.get("lambda", 0.0)),
            rho=float(d.get("rho", 0.0)),
            tau0=None if d.get("tau0") is None else float(d["tau0"]),
        )
    except ValueError as exc:
        raise ConfigError(f"bad schedule at {where}: {exc}") from exc


def config_from_dict(doc: dict) -> ExperimentConfig:
    if doc.get("version") != 1:
        raise ConfigError(f"unsupported config version {doc.get('version')!r} (field: version)")
    experiment = str(_require(doc, "experiment", ""))
    env_doc = _require(doc, "environment", "")
    env_tag = str(_require(env_doc, "tag", "environment"))
    env_params = dict(env_doc.get("params", {}))
    env = make_environment(env_tag, env_params)  # validates tag + params

    trials = int(_require(doc, "trials", ""))
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials} (field: trials)")
    base_seed = int(_require(doc, "base_seed", ""))
    record_theta = bool(doc.get("record_theta", True))
    output_dir = Path(doc["output_dir"]) if doc.get("output_dir") else None

    defaults = doc.get("defaults", {})
    algos_doc = _require(doc, "algorithms", "")
    if not isinstance(algos_doc, list) or not algos_doc:
        raise ConfigError("algorithms must be a non-empty list (field: algorithms)")

    plans: list[AlgorithmPlan] = []
    labels: set[str] = set()
    for i, entry in enumerate(algos_doc):
        where = f"algorithms[{i}]"
        tag = str(_require(entry, "tag", where))
        if tag not in ALGORITHM_TAGS:
            known = ", ".join(ALGORITHM_TAGS)
            raise ConfigError(f"unknown algorithm tag {tag!r} at {where}.tag (known: {known})")
        label = str(entry.get("label", tag))
        if label in labels:
            raise ConfigError(f"duplicate algorithm label {label!r} at {where}.label")
        labels.add(label)

        sched_doc = dict(defaults.get("schedule", {}))
        sched_doc.update(entry.get("schedule", {}))
        schedule = _schedule_from_dict(sched_doc, f"{where}.schedule")

        epochs = entry.get("epochs", defaults.get("epochs"))
        if epochs is None:
            raise ConfigError(f"missing field {where}.epochs (no default provided)")
        theta0 = entry.get("theta0", defaults.get("theta0"))
        if theta0 is None:
            raise ConfigError(f"missing field {where}.theta0 (no default provided)")
        theta0 = np.asarray(theta0, dtype=float)
        if theta0.shape != (env.dim,):
            raise ConfigError(
                f"theta0 at {where} has length {theta0.size}, environment has dim {env.dim}"
            )
        stride = int(entry.get("record_stride", defaults.get("record_stride", 1)))
        if stride < 1:
            raise ConfigError(f"record_stride must be >= 1 at {where}")
        burn = entry.get("burn_in_tau", defaults.get("burn_in_tau"))
        try:
            cfg = AlgoConfig(
                algorithm=tag,
                schedule=schedule,
                epochs=int(epochs),
                theta0=theta0,
                burn_in_tau=None if burn is None else int(burn),
            )
        except ValueError as exc:
            raise ConfigError(f"bad algorithm config at {where}: {exc}") from exc
        plans.append(AlgorithmPlan(label=label, config=cfg, record_stride=stride))

    return ExperimentConfig(
        experiment=experiment,
        environment_tag=env_tag,
        environment_params=env_params,
        algorithms=plans,
        trials=trials,
        base_seed=base_seed,
        output_dir=output_dir,
        record_theta=record_theta,
        raw=doc,
    )


# ---------------------------------------------------------------------------
# Aggregation


def aggregate(traces: list[RunTrace], stride: int = 1) -> AggregateCurve:
    """Pointwise mean/std across surviving trials (population std, so one trace gives 0)."""
    if not traces:
        raise AggregationError("cannot aggregate an empty list of traces")
    surviving = [t for t in traces if not t.diverged]
    if not surviving:
        raise AggregationError("all traces diverged; nothing to aggregate")
    epochs0 = surviving[0].epochs
    for t in surviving[1:]:
        if t.epochs.shape != epochs0.shape or np.any(t.epochs != epochs0):
            raise AggregationError("traces have misaligned epoch grids")
    idx = _strided_indices(epochs0.size, stride)
    return _aggregate_arrays(
        epochs0[idx],
        [t.samples_cum[idx] for t in surviving],
        [None if t.risk is None else t.risk[idx] for t in surviving],
        [None if t.grad_norm_sq is None else t.grad_norm_sq[idx] for t in surviving],
        [
            None if t.run_avg_grad_norm_sq is None else t.run_avg_grad_norm_sq[idx]
            for t in surviving
        ],
    )


def _strided_indices(n: int, stride: int) -> np.ndarray:
    idx = list(range(0, n, stride))
    if idx[-1] != n - 1:
        idx.append(n - 1)
    return np.asarray(idx, dtype=np.int64)


def _mean_std(stack: list[np.ndarray] | None):
    if stack is None or stack[0] is None:
        return None, None
    arr = np.stack(stack)
    return arr.mean(axis=0), arr.std(axis=0)


def _aggregate_arrays(epochs, samples, risk, grad_sq, run_avg) -> AggregateCurve:
    samples_mean = np.stack(samples).mean(axis=0)
    risk_mean, risk_std = _mean_std(risk)
    g_mean, g_std = _mean_std(grad_sq)
    ra_mean, ra_std = _mean_std(run_avg)
    return AggregateCurve(
        epochs=epochs,
        samples_mean=samples_mean,
        risk_mean=risk_mean,
        risk_std=risk_std,
        grad_norm_sq_mean=g_mean,
        grad_norm_sq_std=g_std,
        run_avg_grad_norm_sq_mean=ra_mean,
        run_avg_grad_norm_sq_std=ra_std,
        trial_count=len(samples),
    )


# ---------------------------------------------------------------------------
# Persistence helpers


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if not np.isfinite(x):
        return ""
    return format(x, ".17g")


def _write_lines(path: Path, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def _trial_csv_lines(trace: RunTrace, trial: int, record_theta: bool, stride: int) -> list[str]:
    idx = _strided_indices(trace.epochs.size, stride)
    dim = trace.thetas.shape[1]
    header = list(TRIAL_COLUMNS)
    if record_theta:
        header += [f"theta_{j}" for j in range(dim)]
    lines = [",".join(header)]
    risk = trace.risk
    gsq = trace.grad_norm_sq
    ravg = trace.run_avg_grad_norm_sq
    for i in idx:
        row = [
            str(trial),
            str(int(trace.epochs[i])),
            str(int(trace.samples_cum[i])),
            _fmt(risk[i]) if risk is not None else "",
            _fmt(gsq[i]) if gsq is not None else "",
            _fmt(ravg[i]) if ravg is not None else "",
        ]
        if record_theta:
            row += [_fmt(v) for v in trace.thetas[i]]
        lines.append(",".join(row))
    return lines


@dataclass
class _TrialSummary:
    trial: int
    diverged_epoch: int | None
    samples_total: int
    epochs: np.ndarray
    samples_cum: np.ndarray
    risk: np.ndarray | None
    grad_norm_sq: np.ndarray | None
    run_avg_grad_norm_sq: np.ndarray | None


def _run_trial_task(payload) -> _TrialSummary:
    env_tag, env_params, plan, trial, seed, csv_path, record_theta = payload
    env = make_environment(env_tag, env_params)
    trace = run_algorithm(env, plan.config, make_rng(seed))
    _write_lines(Path(csv_path), _trial_csv_lines(trace, trial, record_theta, plan.record_stride))
    idx = _strided_indices(trace.epochs.size, plan.record_stride)
    return _TrialSummary(
        trial=trial,
        diverged_epoch=trace.diverged_epoch,
        samples_total=trace.samples_total,
        epochs=trace.epochs[idx],
        samples_cum=trace.samples_cum[idx],
        risk=None if trace.risk is None else trace.risk[idx],
        grad_norm_sq=None if trace.grad_norm_sq is None else trace.grad_norm_sq[idx],
        run_avg_grad_norm_sq=(
            None if trace.run_avg_grad_norm_sq is None else trace.run_avg_grad_norm_sq[idx]
        ),
    )


def _aggregate_csv_lines(curve: AggregateCurve) -> list[str]:
    lines = [",".join(AGGREGATE_COLUMNS)]
    for i in range(curve.epochs.size):
        row = [
            str(int(curve.epochs[i])),
            _fmt(curve.samples_mean[i]),
            _fmt(curve.risk_mean[i]) if curve.risk_mean is not None else "",
            _fmt(curve.risk_std[i]) if curve.risk_std is not None else "",
            _fmt(curve.grad_norm_sq_mean[i]) if curve.grad_norm_sq_mean is not None else "",
            _fmt(curve.grad_norm_sq_std[i]) if curve.grad_norm_sq_std is not None else "",
            (
                _fmt(curve.run_avg_grad_norm_sq_mean[i])
                if curve.run_avg_grad_norm_sq_mean is not None
                else ""
            ),
            (
                _fmt(curve.run_avg_grad_norm_sq_std[i])
                if curve.run_avg_grad_norm_sq_std is not None
                else ""
            ),
            str(curve.trial_count),
        ]
        lines.append(",".join(row))
    return lines


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _reference_values(env: Environment) -> dict:
    """Exact risk at the environment's known optimum, for plot reference lines."""
    optimal = getattr(env, "optimal_decision", None)
    if optimal is None or not env.has_exact_risk:
        return {}
    risk = float(env.exact_risk(np.asarray(optimal(), dtype=float)))
    return {"optimal_risk": risk, "optimal_revenue": -risk}


# ---------------------------------------------------------------------------
# Experiment execution


def run_experiment(
    cfg: ExperimentConfig,
    out_dir: str | Path | None = None,
    workers: int = 1,
) -> ExperimentResult:
    """Run all algorithm specs for all trials and persist CSVs plus a manifest."""
    resolved_out = Path(out_dir) if out_dir is not None else cfg.output_dir
    if resolved_out is None:
        raise ConfigError("no output directory: set output_dir in the config or pass --out")
    resolved_out.mkdir(parents=True, exist_ok=True)

    env = make_environment(cfg.environment_tag, cfg.environment_params)
    seeds = [cfg.trial_seed(t) for t in range(cfg.trials)]

    tasks = []
    for plan in cfg.algorithms:
        for trial in range(cfg.trials):
            csv_path = resolved_out / f"{plan.label}_trial{trial:02d}.csv"
            tasks.append(
                (
                    cfg.environment_tag,
                    cfg.environment_params,
                    plan,
                    trial,
                    seeds[trial],
                    str(csv_path),
                    cfg.record_theta,
                )
            )

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(_run_trial_task, tasks))
    else:
        summaries = [_run_trial_task(t) for t in tasks]

    by_label: dict[str, list[_TrialSummary]] = {}
    for (_, _, plan, _, _, _, _), summary in zip(tasks, summaries):
        by_label.setdefault(plan.label, []).append(summary)

    files: list[Path] = [Path(t[5]) for t in tasks]
    aggregates: dict[str, AggregateCurve] = {}
    all_diverged: list[str] = []
    algo_manifest: dict[str, dict] = {}
    for plan in cfg.algorithms:
        rows = by_label[plan.label]
        surviving = [r for r in rows if r.diverged_epoch is None]
        entry = {
            "tag": plan.config.algorithm,
            "epochs": plan.config.epochs,
            "record_stride": plan.record_stride,
            "samples_per_trial": [r.samples_total for r in rows],
            "diverged_epochs": {
                str(r.trial): r.diverged_epoch for r in rows if r.diverged_epoch is not None
            },
            "surviving_trials": len(surviving),
            "trial_files": [f"{plan.label}_trial{t:02d}.csv" for t in range(cfg.trials)],
        }
        if surviving:
            curve = _aggregate_arrays(
                surviving[0].epochs,
                [r.samples_cum for r in surviving],
                [r.risk for r in surviving],
                [r.grad_norm_sq for r in surviving],
                [r.run_avg_grad_norm_sq for r in surviving],
            )
            aggregates[plan.label] = curve
            agg_path = resolved_out / f"{plan.label}_aggregate.csv"
            _write_lines(agg_path, _aggregate_csv_lines(curve))
            files.append(agg_path)
            entry["aggregate_file"] = agg_path.name
        else:
            all_diverged.append(plan.label)
            entry["aggregate_file"] = None
        algo_manifest[plan.label] = entry

    config_json = json.dumps(cfg.raw, sort_keys=True, separators=(",", ":"))
    manifest = {
        "manifest_version": 1,
        "experiment": cfg.experiment,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "environment": {"tag": cfg.environment_tag, "params": _jsonable(cfg.environment_params)},
        "config": cfg.raw,
        "config_sha256": hashlib.sha256(config_json.encode()).hexdigest(),
        "seed_rule": "per-trial seed = (base_seed + trial_index) mod 2**64",
        "trial_seeds": seeds,
        "references": _reference_values(env),
        "algorithms": algo_manifest,
        "files": {p.name: _sha256_file(p) for p in sorted(files)},
    }
    manifest_path = resolved_out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    return ExperimentResult(
        output_dir=resolved_out,
        manifest_path=manifest_path,
        files=files,
        aggregates=aggregates,
        all_diverged=all_diverged,
    )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj
