"""Command line front end: ``herzlab run`` and ``herzlab report``."""

from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, canonical_json, load_config, sha256
from .experiments import RATIO_HEADER, SUMMARY_HEADER, ExperimentResult, run_experiment
from .grid import GridSpec, build_grid

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_WINDOW = 0, 1, 2, 3

CAVEATS = [
    "cone quadrature starts at t = 2h; scales below that are omitted",
    "class constants and A_beta are maxima over finite families (lower estimates)",
    "all integrals are over the truncated cube [-2^k_max, 2^k_max]^n",
]


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([fmt(v) for v in row])


def _grid_hash(specs) -> str:
    parts = []
    for spec in sorted({GridSpec(**g) for g in specs}, key=lambda s: tuple(s.to_dict().values())):
        grid = build_grid(spec)
        parts.append(canonical_json(spec.to_dict()) + grid.axis.tobytes())
    return sha256(b"".join(parts))


def _run_all(specs, probe: bool, jobs: int) -> list[ExperimentResult]:
    if jobs <= 1 or len(specs) <= 1:
        return [run_experiment(s, probe) for s in specs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_experiment, specs, [probe] * len(specs)))


def _write_outputs(out: Path, cfg, results) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    summary, status, entries = [], [], []
    for res in results:
        files = []
        if res.fit is not None:
            f = res.fit
            summary.append([res.id, f["C"], f["delta"], f["residual"], f["samples"], f["violations"]])
            name = f"{res.id}_points.csv"
            write_csv(out / name, ["experiment_id", "log_x", "log_y"], [[res.id, a, b] for a, b in res.points])
            files.append(name)
        if res.ratio_rows is not None:
            name = f"{res.id}.csv"
            write_csv(out / name, RATIO_HEADER, res.ratio_rows)
            files.append(name)
        for tag, (header, rows) in sorted(res.tables.items()):
            name = f"{res.id}_{tag}.csv"
            write_csv(out / name, header, rows)
            files.append(name)
        status.append([res.id, res.kind, res.status, res.passed, res.probe, res.max_ratio, res.refinement_growth,
                       " | ".join(res.notes)])
        entries.append({"id": res.id, "kind": res.kind, "status": res.status, "passed": bool(res.passed),
                        "files": files})
    write_csv(out / "summary.csv", SUMMARY_HEADER, summary)
    write_csv(out / "status.csv", ["experiment_id", "kind", "status", "passed", "probe", "max_ratio",
                                   "refinement_growth", "notes"], status)
    manifest = {
        "herzlab": __version__,
        "numpy": metadata.version("numpy"),
        "scipy": metadata.version("scipy"),
        "jsonschema": metadata.version("jsonschema"),
        "python": platform.python_version(),
        "config_hash": cfg.config_hash,
        "grid_hash": _grid_hash([e.settings["grid"] for e in cfg.experiments]),
        "seed": cfg.seed,
        "seed_source": cfg.seed_source,
        "experiments": entries,
        "caveats": CAVEATS,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or cfg.output_dir or Path("runs") / Path(args.config).stem)
    results = _run_all(cfg.experiments, args.probe, args.jobs)
    _write_outputs(out, cfg, results)
    for res in results:
        tag = "PASS" if res.passed else ("REJECTED" if res.status == "window_rejected" else "FAIL")
        note = f"  ({res.notes[0]})" if res.notes and not res.passed else ""
        print(f"{tag:8s} {res.id}{note}")
    print(f"outputs written to {out}")
    if any(r.status == "window_rejected" for r in results):
        return EXIT_WINDOW
    if not all(r.passed for r in results):
        return EXIT_FAIL
    return EXIT_OK


def _read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    mpath = run_dir / "manifest.json"
    if not mpath.is_file():
        print(f"no manifest in {run_dir}", file=sys.stderr)
        return EXIT_CONFIG
    manifest = json.loads(mpath.read_text())
    missing = [f for e in manifest["experiments"] for f in e["files"] if not (run_dir / f).is_file()]
    for extra in ("summary.csv", "status.csv"):
        if not (run_dir / extra).is_file():
            missing.append(extra)
    if missing:
        print("run directory is incomplete, missing: " + ", ".join(missing), file=sys.stderr)
        return EXIT_FAIL
    fits = {r["experiment_id"]: r for r in _read_csv(run_dir / "summary.csv")}
    status = {r["experiment_id"]: r for r in _read_csv(run_dir / "status.csv")}

    table = [["experiment", "kind", "C", "delta", "max_ratio", "refinement_growth", "pass"]]
    plot_rows = []
    for e in manifest["experiments"]:
        eid = e["id"]
        st = status.get(eid)
        if st is None:
            print(f"experiment {eid} listed in manifest but absent from status.csv", file=sys.stderr)
            return EXIT_FAIL
        fit = fits.get(eid, {})
        table.append([eid, e["kind"], fit.get("C", ""), fit.get("delta", ""), st["max_ratio"],
                      st["refinement_growth"], st["passed"]])
        for name in e["files"]:
            rows = _read_csv(run_dir / name)
            if name.endswith("_points.csv"):
                plot_rows += [[eid, "envelope", r["log_x"], r["log_y"]] for r in rows]
            elif name == f"{eid}.csv":
                plot_rows += [[eid, r["function_id"], fmt(math.log2(float(r["resolution"]))),
                               fmt(math.log(float(r["ratio"])))] for r in rows]

    def short(v):
        try:
            return f"{float(v):.6g}"
        except ValueError:
            return v

    cells = [[short(c) for c in row] for row in table]
    widths = [max(len(r[i]) for r in cells) for i in range(len(cells[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    text = "\n".join(lines) + "\n"
    (run_dir / "report.txt").write_text(text)
    write_csv(run_dir / "plot_data.csv", ["experiment_id", "series", "log_x", "log_y"], plot_rows)
    print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="herzlab", description="Weighted variable-exponent Herz space experiments.")
    ap.add_argument("--version", action="version", version=f"herzlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiments listed in a JSON config")
    r.add_argument("config")
    r.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    r.add_argument("--probe", action="store_true", help="run out-of-window Herz experiments as probes")
    r.add_argument("--out", default=None, help="output directory (overrides config output_dir)")
    r.set_defaults(func=cmd_run)
    rep = sub.add_parser("report", help="summarize a run directory")
    rep.add_argument("run_dir")
    rep.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
