"""Run manifests, single simulations on disk, and parameter sweeps."""

import csv
import datetime
import json
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .checkpoint import write_checkpoint
from .config import ConfigError, SimConfig, parse_config
from .diagnostics import max_principle_margin, write_csv
from .dynamics import BlowupError, run

SUMMARY_COLUMNS = ("job", "name", "status", "alpha", "nu", "final_bkm", "max_principle_margin",
                   "halted", "error")


def tool_version():
    return f"hydrofrac {__version__}"


def checkpoint_name(t):
    return f"checkpoint_t{t:.6f}.bin"


def planned_outputs(cfg):
    files = ["diagnostics.csv", "final.bin"]
    files += [checkpoint_name(t) for t in sorted(set(cfg.checkpoint_times))]
    return files


def make_manifest(cfg):
    return {
        "tool": tool_version(),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "outputs": planned_outputs(cfg),
    }


def write_manifest(path, manifest):
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path):
    """The :class:`SimConfig` recorded in a manifest file."""
    with open(path) as fh:
        data = json.load(fh)
    try:
        return SimConfig.from_dict(data["config"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: not a run manifest ({exc})") from None


def simulate_to_dir(cfg, outdir):
    """Run ``cfg`` writing manifest, diagnostics CSV and checkpoints into ``outdir``.

    The manifest is written before stepping starts.  Returns
    ``(records, final_state_or_None, halt_message_or_None)``.
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out / "manifest.json", make_manifest(cfg))

    def on_checkpoint(state):
        write_checkpoint(out / checkpoint_name(state.t), state)

    try:
        state, records = run(cfg, on_checkpoint=on_checkpoint)
    except BlowupError as exc:
        write_csv(out / "diagnostics.csv", exc.records)
        if exc.state is not None:
            write_checkpoint(out / "final.bin", exc.state)
        return exc.records, None, str(exc)
    write_csv(out / "diagnostics.csv", records)
    write_checkpoint(out / "final.bin", state)
    return records, state, None


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

def _as_text(value):
    if isinstance(value, (list, tuple)):
        return ", ".join(str(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def load_sweep(path):
    """Read a sweep file: ``{"base": {...}, "jobs": [{"name": ..., <key>: <value>, ...}, ...]}``.

    Each job's keys override ``base``.  Returns a list of ``(name, {key: text})``.
    """
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, list):
        data = {"jobs": data}
    base = data.get("base", {})
    jobs = []
    for i, job in enumerate(data.get("jobs", [])):
        job = dict(job)
        name = str(job.pop("name", f"job{i:03d}"))
        pairs = {k: _as_text(v) for k, v in {**base, **job}.items()}
        jobs.append((name, pairs))
    if not jobs:
        raise ConfigError(f"{path}: sweep lists no jobs")
    return jobs


def run_job(index, name, pairs, root):
    """Run one sweep job in ``root/<index>_<name>``; never raises."""
    row = dict.fromkeys(SUMMARY_COLUMNS, "")
    row.update(job=index, name=name)
    try:
        cfg = parse_config(overrides=pairs)
    except ConfigError as exc:
        row.update(status="failed", error=f"config: {exc}")
        return row
    row.update(alpha=repr(cfg.alpha), nu=repr(cfg.nu))
    try:
        records, _, halt = simulate_to_dir(cfg, Path(root) / f"{index:03d}_{name}")
    except Exception as exc:  # a job must not take the sweep down
        row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
        return row
    row.update(
        status="halted" if halt else "ok",
        final_bkm=repr(records[-1].bkm_accum),
        max_principle_margin=repr(max_principle_margin(records, cfg.mp_tol)),
        halted="true" if halt else "false",
        error=halt or "",
    )
    return row


def worker_limit(jobs):
    cap = os.environ.get("HYDROFRAC_THREADS")
    if cap:
        try:
            jobs = min(jobs, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"HYDROFRAC_THREADS must be an integer, got {cap!r}") from None
    return max(1, jobs)


def run_sweep(jobs, root, workers=1):
    """Run every ``(name, pairs)`` job; write ``root/summary.csv`` in job order.

    Returns the summary rows.  A blowup halt is a result, not a failure.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    workers = worker_limit(workers)
    args = [(i, name, pairs, str(root)) for i, (name, pairs) in enumerate(jobs)]
    if workers == 1:
        rows = [run_job(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_job, *zip(*args)))
    with open(root / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, SUMMARY_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return rows
