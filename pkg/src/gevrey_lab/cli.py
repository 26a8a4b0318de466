"""Command line entry point: ``gevrey-lab run|sweep|check``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .config import ConfigError, load_config
from .experiment import fit_decays, run_experiment, write_csv, write_json

__all__ = ["main", "run", "sweep", "check", "build_parser"]

log = logging.getLogger("gevrey_lab")


def _resolve(path: Path | None, base: Path) -> Path | None:
    if path is None:
        return None
    return path if path.is_absolute() else base / path


def run(config_path: str | Path, out_dir: str | Path | None = None,
        overrides: dict[str, str] | None = None, figures: bool | None = None):
    """Run one experiment and write its artifacts; returns ``(exit_code, result)``.

    Relative output paths resolve against ``out_dir`` when given, otherwise
    against the directory holding the config file.
    """
    cfg = load_config(config_path, overrides)
    base = Path(out_dir) if out_dir is not None else Path(config_path).resolve().parent
    result = run_experiment(cfg)
    csv_path = _resolve(cfg.csv_path, base)
    json_path = _resolve(cfg.json_path, base)
    if csv_path is not None:
        write_csv(result, csv_path)
        if cfg.figures if figures is None else figures:
            from .plotting import render_figures
            render_figures(result, csv_path)
    write_json(result.summary, json_path)
    return result.exit_code, result


def _sweep_entry(config_path, param, value, out_dir):
    entry = {"param": param, "value": value}
    try:
        if out_dir is None:
            # no artifacts: concurrent runs would otherwise share output paths
            result = run_experiment(load_config(config_path, {param: value}))
            code = result.exit_code
        else:
            code, result = run(config_path, Path(out_dir) / f"{param}={value}", {param: value},
                               figures=False)
        entry.update(status=result.trajectory.status, exit_code=code,
                     decay_fits=result.fits, verdicts=result.summary["verdicts"])
    except Exception as exc:  # recorded per entry, siblings keep running
        entry.update(status="error", error=f"{type(exc).__name__}: {exc}")
    return entry


def sweep(config_path: str | Path, param: str, values: list[str],
          out_dir: str | Path | None = None) -> list[dict]:
    """One run per value; a sweep over ``diagnostics.zeta`` re-fits a single trajectory."""
    if not values:
        return []
    if param == "diagnostics.zeta":
        cfg = load_config(config_path, {param: ",".join(values)})
        result = run_experiment(cfg)
        out = []
        for v in values:
            fits = fit_decays(result, [float(v)])
            out.append({"param": param, "value": v, "status": result.trajectory.status,
                        "exit_code": result.exit_code, "decay_fits": fits,
                        "verdicts": {"decay": bool(fits[0].get("verdict"))}})
        return out
    cap = int(os.environ.get("GEVREY_LAB_THREADS", "0") or 0)
    workers = max(1, min(len(values), cap if cap > 0 else (os.cpu_count() or 1)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_sweep_entry, config_path, param, v, out_dir) for v in values]
        return [f.result() for f in futures]


def check(suite: str, stream=None) -> int:
    from .suites import SUITES, format_table, run_suite
    stream = stream or sys.stdout
    if suite not in SUITES and suite != "all":
        print(f"unknown suite {suite!r}; one of all, {', '.join(SUITES)}", file=sys.stderr)
        return 2
    results = run_suite(suite)
    print(format_table(results), file=stream)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gevrey-lab",
                                     description="Decay and Gevrey-regularity experiments for "
                                                 "dissipative PDEs on periodic boxes.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="run one experiment file")
    p_run.add_argument("config")
    p_run.add_argument("--out-dir", help="base directory for relative output paths")
    p_run.add_argument("--no-figures", action="store_true", help="skip PNG figures")

    p_sweep = subs.add_parser("sweep", help="run an experiment once per parameter value")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True, help="section.key, e.g. equation.kappa")
    p_sweep.add_argument("--values", required=True, help="comma separated values")
    p_sweep.add_argument("--out-dir", help="write per-run artifacts below this directory")
    p_sweep.add_argument("--output", help="write the aggregated JSON here instead of stdout")

    p_check = subs.add_parser("check", help="run a built-in acceptance suite")
    p_check.add_argument("suite")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            code, result = run(args.config, args.out_dir,
                               figures=False if args.no_figures else None)
            s = result.summary
            print(f"status={s['status']} t={s['final_time']:g} verdicts={s['verdicts']}")
            return code
        if args.command == "sweep":
            values = [v.strip() for v in args.values.split(",") if v.strip()]
            entries = sweep(args.config, args.param, values, args.out_dir)
            text = write_json(entries, Path(args.output) if args.output else None)
            if not args.output:
                print(text)
            return 0
        return check(args.suite)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
