"""Command line entry point: ``podar calibrate|evaluate|synth|report``."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .calibration import (
    CalibrationConfig,
    CalibrationResult,
    SignalKind,
    compare_signals,
    select_horizon,
    standardize_objective,
    standardize_subjective,
)
from .exceptions import InvalidInputError, PodarError
from .experiment import (
    DRIVER_PATTERN,
    GridConfig,
    build_grid_scenarios,
    format_number,
    generate_synthetic,
    load_signals,
    read_grid_config,
    signals_csv,
)
from .files import read_params, read_scene, read_synthetic_specs
from .report import (
    attenuation_table,
    spatial_curves,
    spread_curve,
    spread_peak_time,
    temporal_curves,
)
from .risk import evaluate_scene

OUT_ENV = "PODAR_OUT_DIR"
DEFAULT_OUT = "podar-out"
fmt = format_number


class CommandError(Exception):
    pass


# --------------------------------------------------------------------------
# helpers


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
            else _dt.datetime.now(_dt.timezone.utc))
    return when.replace(microsecond=0).isoformat()


def _manifest(command: str, config: dict, inputs: Sequence, seed=None) -> str:
    data = {
        "command": command,
        "config": config,
        "inputs": {str(p): _digest(p) for p in inputs if p is not None},
        "seed": seed,
        "version": __version__,
        "timestamp": _timestamp(),
    }
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _write_all(out_dir: Path, files: dict) -> None:
    """Write every output only after all of them were computed."""
    for rel, text in files.items():
        target = out_dir / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")


def _out_dir(arg: Optional[str]) -> Path:
    return Path(arg or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _floats(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _require(path: Optional[str], what: str) -> Optional[Path]:
    if path is None:
        return None
    p = Path(path)
    if not p.is_file():
        raise CommandError(f"{what} file not found: {p}")
    return p


def _grid(path: Optional[Path]) -> GridConfig:
    return GridConfig() if path is None else read_grid_config(path)


# --------------------------------------------------------------------------
# calibrate


def _calibrate_driver(job):
    driver, signals, scenarios, config, kind = job
    search = select_horizon(signals, scenarios, config, driver=driver, kind=kind)
    return driver, search


def _result_record(search) -> str:
    record = search.best.to_dict()
    record["horizon_search"] = [
        {"T": T, "k": r.k, "A": r.A, "B": r.B, "r2": r.r2, "loss": r.loss}
        for T, r in sorted(search.results.items())
    ]
    record["failures"] = {f"{T:g}": msg for T, msg in sorted(search.failures.items())}
    return json.dumps(record, indent=2) + "\n"


def cmd_calibrate(args) -> int:
    signals_path = _require(args.signals, "signals")
    grid_path = _require(args.grid, "grid config")
    out_dir = _out_dir(args.out)
    kind = SignalKind(args.kind)

    raw = load_signals(signals_path, kind)
    if kind is SignalKind.OBJECTIVE:
        data = standardize_objective(raw, threshold=args.msa_threshold)
    else:
        data = standardize_subjective(raw)
    grid = _grid(grid_path)
    scenarios = list(build_grid_scenarios(grid))

    defaults = CalibrationConfig()
    config = CalibrationConfig(
        learning_rate=args.lr if args.lr is not None else defaults.learning_rate,
        iterations=args.iters if args.iters is not None else defaults.iterations,
        horizons=args.horizons if args.horizons is not None else defaults.horizons,
        seed=args.seed,
    )
    jobs = [(d, data[d], scenarios, config, kind) for d in data.drivers]
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            searches = dict(pool.map(_calibrate_driver, jobs))
    else:
        searches = dict(map(_calibrate_driver, jobs))

    best = {d: searches[d].best for d in data.drivers}
    files = {f"results/{d}.json": _result_record(searches[d]) for d in data.drivers}
    files["summary.csv"] = _csv_text(
        ["driver", "T", "k", "A", "B", "R2"],
        [[d, fmt(r.T), fmt(r.k), fmt(r.A), fmt(r.B), fmt(r.r2)] for d, r in best.items()])
    t, wt = temporal_curves(best)
    files["curves_temporal.csv"] = _csv_text(
        ["t"] + list(best), [[fmt(x)] + [fmt(wt[d][i]) for d in best] for i, x in enumerate(t)])
    dgrid, wd = spatial_curves(best)
    files["curves_spatial.csv"] = _csv_text(
        ["d"] + list(best),
        [[fmt(x)] + [fmt(wd[d][i]) for d in best] for i, x in enumerate(dgrid)])
    files["manifest.json"] = _manifest(
        "calibrate",
        {"kind": kind.value, "msa_threshold": args.msa_threshold, "grid": grid.to_dict(),
         "calibration": config.to_dict(), "workers": args.workers,
         "normalization": {"scope": data.scope, "threshold": data.threshold,
                           "divisors": data.divisors}},
        [signals_path, grid_path], seed=args.seed)
    _write_all(out_dir, files)
    for d, r in best.items():
        print(f"{d}: T={fmt(r.T)} k={fmt(r.k)} A={fmt(r.A)} B={fmt(r.B)} R2={fmt(r.r2)}")
    return 0


# --------------------------------------------------------------------------
# evaluate


def cmd_evaluate(args) -> int:
    scene_path = _require(args.scene, "scene")
    params_path = _require(args.params, "params")
    scene = read_scene(scene_path)
    params = read_params(params_path)
    br = evaluate_scene(scene, params)
    rows = []
    for n, oid in enumerate(br.object_ids):
        for i, t in enumerate(br.times):
            rows.append([oid, i, fmt(t), fmt(br.damage[n, i]), fmt(br.omega_t[n, i]),
                         fmt(br.omega_d[n, i]), fmt(br.distance[n, i]), fmt(br.per_pair[n, i])])
    obj, step = br.argmax
    files = {
        "breakdown.csv": _csv_text(
            ["object", "step", "t", "damage", "omega_T", "omega_D", "distance", "podar"], rows),
        "manifest.json": _manifest("evaluate", {"params": asdict(params)},
                                   [scene_path, params_path]),
    }
    _write_all(_out_dir(args.out), files)
    print(f"final_podar {br.final_podar!r}")
    print(f"argmax object={obj} step={step} t={fmt(br.times[step])}")
    return 0


# --------------------------------------------------------------------------
# synth


def cmd_synth(args) -> int:
    spec_path = _require(args.spec, "synthetic spec")
    grid_path = _require(args.grid, "grid config")
    specs = read_synthetic_specs(spec_path)
    bad = [d for d in specs if not DRIVER_PATTERN.fullmatch(d)]
    if bad:
        raise InvalidInputError(f"driver ids must look like P1, P2, ...: {bad}")
    grid = _grid(grid_path)
    scenarios = list(build_grid_scenarios(grid))
    signals, truth = {}, {}
    for driver, spec in specs.items():
        ds = generate_synthetic(scenarios, spec)
        signals[driver] = ds.signals
        truth[driver] = dict(spec.to_dict(), divisor=ds.divisor, k_effective=ds.k_effective)

    out = Path(args.out)
    text = signals_csv(signals)
    manifest = json.loads(_manifest("synth", {"grid": grid.to_dict()},
                                    [spec_path, grid_path]))
    manifest["ground_truth"] = truth
    files = {out.name: text,
             out.stem + ".manifest.json": json.dumps(manifest, indent=2, sort_keys=True) + "\n"}
    _write_all(out.parent, files)
    print(f"wrote {len(signals)} drivers x {len(scenarios)} obstacles to {out}")
    return 0


# --------------------------------------------------------------------------
# report


def _load_results(path: Path) -> dict[str, CalibrationResult]:
    folder = path / "results" if (path / "results").is_dir() else path
    if not folder.is_dir():
        raise CommandError(f"results directory not found: {path}")
    out = {}
    for f in sorted(folder.glob("*.json")):
        data = json.loads(f.read_text(encoding="utf-8"))
        data.pop("horizon_search", None)
        data.pop("failures", None)
        out[data["driver"] or f.stem] = CalibrationResult.from_dict(data)
    if not out:
        raise CommandError(f"no calibration results in {folder}")
    return out


def cmd_report(args) -> int:
    obj = _load_results(Path(args.objective))
    subj = _load_results(Path(args.subjective))
    cmp = compare_signals(obj, subj)
    files = {}
    files["comparison.csv"] = _csv_text(
        ["driver", "A_objective", "A_subjective", "B_objective", "B_subjective"],
        [[d, fmt(ao), fmt(asub), fmt(bo), fmt(bsub)] for d, ao, asub, bo, bsub in cmp.rows()])

    t = np.linspace(0.0, 7.0, 141)
    summary = {"A_correlation": cmp.A_correlation, "B_correlation": cmp.B_correlation,
               "A_outliers": cmp.A_outliers, "B_outliers": cmp.B_outliers, "spread": {}}
    spreads = {}
    for name, group in (("objective", obj), ("subjective", subj)):
        rates = [r.A for r in group.values()]
        spreads[name] = spread_curve(rates, t)
        summary["spread"][name] = {
            "A_min": min(rates), "A_max": max(rates),
            "peak_time": spread_peak_time(min(rates), max(rates)),
            "peak_time_sampled": float(t[int(np.argmax(spreads[name]))]),
            "peak_value": float(spreads[name].max()),
        }
    files["spread_temporal.csv"] = _csv_text(
        ["t", "objective", "subjective"],
        [[fmt(x), fmt(spreads["objective"][i]), fmt(spreads["subjective"][i])]
         for i, x in enumerate(t)])
    for name, group in (("objective", obj), ("subjective", subj)):
        table = attenuation_table(group, args.times, args.distances)
        header = list(table[0])
        files[f"thresholds_{name}.csv"] = _csv_text(
            header, [[row["driver"]] + [fmt(row[h]) for h in header[1:]] for row in table])
    files["report.json"] = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    inputs = sorted((Path(args.objective)).rglob("*.json")) + sorted(
        (Path(args.subjective)).rglob("*.json"))
    files["manifest.json"] = _manifest(
        "report", {"times": list(args.times), "distances": list(args.distances)}, inputs)
    _write_all(_out_dir(args.out), files)
    print(f"A correlation {fmt(cmp.A_correlation)}, B correlation {fmt(cmp.B_correlation)}")
    print(f"A outliers {cmp.A_outliers or '-'}, B outliers {cmp.B_outliers or '-'}")
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="podar", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="fit T, k, A, B per driver")
    p.add_argument("--signals", required=True)
    p.add_argument("--grid")
    p.add_argument("--kind", choices=[k.value for k in SignalKind], required=True)
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or {DEFAULT_OUT})")
    p.add_argument("--lr", type=float)
    p.add_argument("--iters", type=int)
    p.add_argument("--horizons", type=_floats)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--msa-threshold", type=float, default=2.0,
                   help="objective signals below this many degrees are zeroed")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("evaluate", help="risk breakdown of one scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="write a synthetic signal file")
    p.add_argument("--spec", required=True)
    p.add_argument("--grid")
    p.add_argument("--out", required=True, help="signal CSV path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", help="objective vs subjective comparison tables")
    p.add_argument("--objective", required=True)
    p.add_argument("--subjective", required=True)
    p.add_argument("--out")
    p.add_argument("--times", type=_floats, default=(2.0, 3.0))
    p.add_argument("--distances", type=_floats, default=(1.0, 2.0))
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PodarError, CommandError, OSError) as exc:
        print(f"podar {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
