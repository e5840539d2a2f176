"""Fan seeded runs out to a process pool and write CSV, summary and SVG outputs.

Output directory layout::

    resolved_config.yaml
    runs_<label>.csv          run,episode,beta,metric
    aggregate_<label>.csv     episode,beta,metric_mean,metric_stderr,metric_ma
    diagnostics_<label>.csv   run,episode,steps,violations   (ppo only)
    summary.json
    curves.svg
    PARTIAL                   only when a run failed
"""

from __future__ import annotations

import csv
import json
import logging
import os
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, parse_config, write_resolved
from .core import CSV_COLUMNS, RunRecord
from .metrics import baseline_threshold, episodes_to_threshold, moving_average, plateau
from .plotting import plot_emit
from .ppo import ppo_train
from .td import run_td_run

log = logging.getLogger(__name__)

OUT_ENV_VAR = "TA_EXPLORE_OUT"
AGGREGATE_COLUMNS = ("episode", "beta", "metric_mean", "metric_stderr", "metric_ma")
PARTIAL_MARKER = "PARTIAL"


class ExperimentFailed(RuntimeError):
    pass


@dataclass
class Aggregate:
    episode: np.ndarray
    beta: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    ma: np.ndarray


def run_one(config: ExperimentConfig, variant: int, run: int) -> list[RunRecord]:
    """Execute a single (schedule, run) job."""
    sched = config.schedules[variant].build()
    env = config.build_env()
    if config.algorithm == "td0":
        p = config.algo_params
        rms = run_td_run(
            env, sched, config.episodes, run, config.master_seed,
            alpha=p["alpha"], step_size=p["step_size"], decay_power=p["decay_power"],
        )
        return [RunRecord(run, e, sched(e), float(m)) for e, m in enumerate(rms)]
    return ppo_train(env, sched, config.build_ppo_config(), config.episodes, config.master_seed, run=run).records


def _job(cfg_dict: dict, variant: int, run: int):
    # Workers rebuild the config from plain data so nothing mutable is shared.
    return variant, run, run_one(parse_config(cfg_dict), variant, run)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_runs_csv(path, records: list[RunRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([r.run, r.episode, _fmt(r.beta), _fmt(r.metric)])


def write_diagnostics_csv(path, records: list[RunRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("run", "episode", "steps", "violations"))
        for r in records:
            w.writerow([r.run, r.episode, r.steps, r.violations])


def read_runs_csv(path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        return [
            RunRecord(int(r["run"]), int(r["episode"]), float(r["beta"]), float(r["metric"]))
            for r in csv.DictReader(fh)
        ]


def aggregate(records: list[RunRecord], window: int = 50) -> Aggregate:
    """Mean and standard error across runs, per episode."""
    runs = sorted({r.run for r in records})
    episodes = sorted({r.episode for r in records})
    if episodes != list(range(len(episodes))):
        raise ValueError("episodes must be contiguous from 0")
    ri = {run: i for i, run in enumerate(runs)}
    m = np.full((len(runs), len(episodes)), np.nan)
    beta = np.zeros(len(episodes))
    for r in records:
        m[ri[r.run], r.episode] = r.metric
        beta[r.episode] = r.beta
    if np.isnan(m).any():
        raise ValueError("every run must cover every episode")
    mean = m.mean(axis=0)
    if len(runs) > 1:
        stderr = m.std(axis=0, ddof=1) / np.sqrt(len(runs))
    else:
        stderr = np.zeros(len(episodes))
    return Aggregate(np.arange(len(episodes)), beta, mean, stderr, moving_average(mean, window))


def write_aggregate_csv(path, agg: Aggregate) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_COLUMNS)
        for row in zip(agg.episode, agg.beta, agg.mean, agg.stderr, agg.ma):
            w.writerow([int(row[0]), *(_fmt(v) for v in row[1:])])


def summarize(config: ExperimentConfig, aggs: dict[str, Aggregate]) -> dict:
    tail = min(1000, max(1, config.episodes // 10))
    base = config.baseline
    derived = None
    if base is not None:
        derived = baseline_threshold(aggs[base.label].mean, config.maximize, tail=tail)
    out = {
        "name": config.name,
        "direction": "maximize" if config.maximize else "minimize",
        "plateau_tail": tail,
        "window": config.window,
        "baseline": base.label if base else None,
        "baseline_threshold": derived,
        "variants": {},
    }
    base_hit = None
    if derived is not None:
        base_hit = episodes_to_threshold(aggs[base.label].mean, derived, config.maximize, config.window)
    for s in config.schedules:
        a = aggs[s.label]
        v = {
            "schedule": s.to_dict(),
            "final_moving_average": float(a.ma[-1]),
            "plateau": plateau(a.mean, tail),
            "episodes_to_threshold": {
                repr(t): episodes_to_threshold(a.mean, t, config.maximize, config.window)
                for t in config.thresholds
            },
        }
        if derived is not None:
            hit = episodes_to_threshold(a.mean, derived, config.maximize, config.window)
            v["episodes_to_baseline_threshold"] = hit
            v["speedup_vs_baseline"] = (base_hit + 1) / (hit + 1) if hit is not None and base_hit is not None else None
        out["variants"][s.label] = v
    return out


def resolve_out_dir(config: ExperimentConfig, out_dir=None) -> Path:
    """Precedence: explicit argument, then the environment variable, then the config."""
    return Path(out_dir or os.environ.get(OUT_ENV_VAR) or config.output_dir)


def run_experiment(config: ExperimentConfig, out_dir=None, workers: int | None = None) -> dict:
    out = resolve_out_dir(config, out_dir)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / PARTIAL_MARKER
    if marker.exists():
        marker.unlink()
    write_resolved(config, out)

    workers = workers or os.cpu_count() or 1
    jobs = [(v, r) for v in range(len(config.schedules)) for r in range(config.runs)]
    results: dict[tuple[int, int], list[RunRecord]] = {}
    failure = None
    t0 = time.perf_counter()
    try:
        if workers == 1:
            for v, r in jobs:
                results[(v, r)] = run_one(config, v, r)
        else:
            cfg_dict = config.to_dict()
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_job, cfg_dict, v, r) for v, r in jobs]
                for fut in futures:
                    v, r, recs = fut.result()
                    results[(v, r)] = recs
    except Exception as exc:  # noqa: BLE001 - any run failure aborts the experiment
        failure = exc
        log.error("run failed: %s", exc)

    # Aggregation order is fixed by (schedule, run) index, independent of completion order.
    aggs = {}
    for v, s in enumerate(config.schedules):
        done = [r for r in range(config.runs) if (v, r) in results]
        records = [rec for r in done for rec in results[(v, r)]]
        if not records:
            continue
        write_runs_csv(out / f"runs_{s.label}.csv", records)
        if config.algorithm == "ppo":
            write_diagnostics_csv(out / f"diagnostics_{s.label}.csv", records)
        if len(done) == config.runs:
            aggs[s.label] = aggregate(records, config.window)
            write_aggregate_csv(out / f"aggregate_{s.label}.csv", aggs[s.label])

    if failure is not None:
        marker.write_text(
            f"experiment aborted: {len(results)}/{len(jobs)} runs finished\n"
            + "".join(traceback.format_exception(failure))
        )
        raise ExperimentFailed(f"{len(jobs) - len(results)} run(s) did not finish; see {marker}") from failure

    summary = summarize(config, aggs)
    summary["runtime_seconds"] = round(time.perf_counter() - t0, 3)
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    plot_emit(
        [out / f"aggregate_{s.label}.csv" for s in config.schedules],
        out / "curves.svg",
        labels=[s.label for s in config.schedules],
        window=config.window,
        title=config.name,
        ylabel="episode return" if config.maximize else "RMS error",
    )
    return summary
