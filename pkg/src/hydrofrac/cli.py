"""Command line interface: ``hydrofrac simulate|exponents|iterate|region|sweep|verify``.

Exit codes: 0 success, 1 usage or config error, 2 domain rejection,
3 blowup halt, 4 I/O failure.
"""

import argparse
import csv
import math
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import exponents
from .config import REQUIRED, TYPES, ConfigError, parse_config
from .diagnostics import energy_budget, max_principle_margin

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_BLOWUP, EXIT_IO = 0, 1, 2, 3, 4


def _fmt(v):
    if v is None:
        return "undefined"
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write_rows(path, header, rows):
    fh, close = _open_out(path)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    finally:
        if close:
            fh.close()


def parse_alpha_range(text):
    """``a:b:step`` inclusive of ``b`` (up to rounding), or a comma list."""
    if ":" in text:
        try:
            a, b, step = (float(v) for v in text.split(":"))
        except ValueError:
            raise ConfigError(f"--alphas: expected a:b:step, got {text!r}") from None
        if step <= 0 or b < a:
            raise ConfigError(f"--alphas: need a <= b and step > 0, got {text!r}")
        n = int(math.floor((b - a) / step + 1e-9))
        return [round(a + i * step, 12) for i in range(n + 1)]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--alphas: cannot read {text!r}") from None


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _resolve_config(args):
    overrides = {k: v for k, v in (s.split("=", 1) for s in args.set)} if args.set else {}
    for key in TYPES:
        value = getattr(args, f"cfg_{key}", None)
        if value is not None:
            overrides[key] = value
    if args.config and args.config.endswith(".json"):
        from .harness import load_manifest
        cfg = load_manifest(args.config)
        if overrides:
            from .config import dump_config
            return parse_config(text=dump_config(cfg), overrides=overrides)
        return cfg
    return parse_config(args.config, overrides=overrides)


def cmd_simulate(args):
    from .harness import simulate_to_dir
    cfg = _resolve_config(args)
    out = args.out or cfg.output_dir
    records, _, halt = simulate_to_dir(cfg, out)
    last = records[-1]
    print(f"t = {last.t!r}  energy_u = {last.energy_u!r}  omega_linf = {last.omega_linf!r}  "
          f"bkm = {last.bkm_accum!r}")
    print(f"outputs in {out}")
    if halt:
        print(f"halted: {halt}", file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


def cmd_exponents(args):
    report = exponents.exponent_table(args.alpha)
    row = report.as_row()
    row.update(report.flags)
    width = max(len(k) for k in row)
    for k, v in row.items():
        print(f"{k:<{width}}  {_fmt(v)}")
    if args.csv:
        _write_rows(args.csv, list(row), [list(row.values())])
    return EXIT_OK


def cmd_iterate(args):
    alphas = list(args.alpha or [])
    if args.alphas:
        alphas += parse_alpha_range(args.alphas)
    if not alphas:
        raise ConfigError("iterate needs --alpha or --alphas")
    rows = []
    for a in alphas:
        tr = exponents.bootstrap(a)
        label = tr.verdict_label()
        for k, rho in enumerate(tr.rho_sequence):
            delta = tr.delta_sequence[k] if k < len(tr.delta_sequence) else None
            rows.append((a, k, rho, delta, label))
        print(f"alpha = {a!r}: {label}", file=sys.stderr)
    _write_rows(args.csv, ("alpha", "k", "rho", "delta", "verdict"), rows)
    return EXIT_OK


def cmd_region(args):
    try:
        sample = exponents.admissible_region(args.alpha, resolution=args.resolution, upper=args.upper)
    except ValueError as exc:
        print(f"region: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    rows = []
    for j, d in enumerate(sample.delta):
        for i, r in enumerate(sample.rho):
            rows.append((r, d, int(sample.mask[j, i]), 0))
    rho_o, delta_o = sample.optimal
    rows.append((rho_o, delta_o, int(sample.optimal_admissible), 1))
    _write_rows(args.csv, ("rho", "delta", "admissible", "optimal"), rows)
    print(f"alpha = {args.alpha!r}: {int(sample.mask.sum())} of {sample.mask.size} samples admissible; "
          f"(rho*, delta**) = ({rho_o!r}, {delta_o!r}) admissible = {sample.optimal_admissible}",
          file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args):
    from .harness import load_sweep, run_sweep
    jobs = load_sweep(args.sweep)
    rows = run_sweep(jobs, args.out, workers=args.jobs)
    failed = [r for r in rows if r["status"] == "failed"]
    for r in rows:
        print(f"{r['job']:>3} {r['name']:<20} {r['status']:<7} {r['error']}")
    return EXIT_CONFIG if failed else EXIT_OK


def cmd_verify(args):
    """Re-run a run directory from its manifest and compare outputs byte for byte."""
    from .harness import load_manifest, simulate_to_dir
    run_dir = Path(args.run_dir)
    cfg = load_manifest(run_dir / "manifest.json")
    ok = True
    with tempfile.TemporaryDirectory() as tmp:
        records, _, _ = simulate_to_dir(cfg, tmp)
        for name in ("diagnostics.csv", "final.bin"):
            a, b = run_dir / name, Path(tmp) / name
            same = a.exists() and b.exists() and a.read_bytes() == b.read_bytes()
            ok &= same
            print(f"{'PASS' if same else 'FAIL'}  {name} reproduced byte for byte")
    ru, rw = energy_budget(records)
    e0u, e0w = records[0].energy_u, records[0].energy_omega
    print(f"info  max |budget residual u| / E_u(0) = {np.abs(ru).max() / e0u if e0u else 0.0:.3e}")
    print(f"info  max |budget residual omega| / E_omega(0) = {np.abs(rw).max() / e0w if e0w else 0.0:.3e}")
    print(f"info  max-principle margin = {max_principle_margin(records, cfg.mp_tol):.3e}")
    return EXIT_OK if ok else EXIT_CONFIG


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="hydrofrac", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one simulation")
    s.add_argument("config", nargs="?", help="key = value config file, or a manifest.json")
    s.add_argument("--out", help="output directory (default: config output_dir)")
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    for key in TYPES:
        flags = [f"--{key}"] + ([f"--{key.replace('_', '-')}"] if "_" in key else [])
        s.add_argument(*flags, dest=f"cfg_{key}", metavar="VALUE",
                       help="required unless in the file" if key in REQUIRED else argparse.SUPPRESS)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("exponents", help="closed-form exponents and thresholds at one alpha")
    e.add_argument("--alpha", type=float, required=True)
    e.add_argument("--csv", help="also write a one-row CSV here ('-' for stdout)")
    e.set_defaults(func=cmd_exponents)

    i = sub.add_parser("iterate", help="bootstrap traces of the exponent recursion")
    i.add_argument("--alpha", type=float, action="append")
    i.add_argument("--alphas", help="a:b:step (inclusive) or a comma list")
    i.add_argument("--csv", help="output CSV (default stdout)")
    i.set_defaults(func=cmd_iterate)

    r = sub.add_parser("region", help="rasterized admissible (rho, delta) region")
    r.add_argument("--alpha", type=float, required=True)
    r.add_argument("--resolution", type=int, default=200)
    r.add_argument("--upper", choices=("alpha", "rho"), default="alpha",
                   help="slack in the upper delta bound: h(rho) + alpha/2 or h(rho) + rho/2")
    r.add_argument("--csv", help="output CSV (default stdout)")
    r.set_defaults(func=cmd_region)

    w = sub.add_parser("sweep", help="run a JSON list of configurations")
    w.add_argument("sweep", help="JSON sweep file")
    w.add_argument("--jobs", type=int, default=1, help="parallel jobs (capped by HYDROFRAC_THREADS)")
    w.add_argument("--out", default="sweep_out")
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="reproduce a run directory from its manifest")
    v.add_argument("run_dir")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
