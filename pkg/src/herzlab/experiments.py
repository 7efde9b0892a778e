"""Experiment runners: resolved spec in, plain tabular results out.

Results contain only builtin types so they can cross process boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentSpec
from .exponent import VariableExponent
from .fitting import FitReport
from .grid import GridSpec, build_grid
from .norms import HerzParams
from .sqfn import build_dictionary
from .suite import build_suite
from .verify import (
    CHAIN,
    WindowRejected,
    check_inclusion_chain,
    check_lemma1,
    check_lemma2,
    decomposition_diagnostic,
    estimate_norm_growth_delta,
    herz_boundedness_ratio,
    lp_boundedness_ratio,
    validate_window,
)
from .weights import Weight, a1_measure_comparison

RATIO_HEADER = ["experiment_id", "function_id", "resolution", "dict_size", "input_norm", "output_norm", "ratio"]
SUMMARY_HEADER = ["experiment_id", "C", "delta", "residual", "samples", "violations"]


@dataclass
class ExperimentResult:
    id: str
    kind: str
    passed: bool
    status: str = "ok"
    fit: dict = None
    points: list = None
    ratio_rows: list = None
    max_ratio: float = float("nan")
    refinement_growth: float = float("nan")
    probe: bool = False
    tables: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)


def _fit_dict(rep: FitReport) -> dict:
    return {
        "C": rep.C,
        "delta": rep.delta,
        "delta_raw": rep.delta_raw,
        "residual": rep.residual,
        "samples": rep.sample_count,
        "violations": rep.envelope_violations,
        "flagged": rep.flagged,
    }


def _fit_result(spec: ExperimentSpec, rep: FitReport, notes=()) -> ExperimentResult:
    pts = [(float(a), float(b)) for a, b in zip(rep.x, rep.y)]
    res = ExperimentResult(spec.id, spec.kind, bool(rep.passed), fit=_fit_dict(rep), points=pts)
    res.notes.extend(notes)
    if rep.flagged:
        res.notes.append(f"delta_raw = {rep.delta_raw:.6g} outside the admissible range")
    return res


def _objects(s: dict):
    grid = build_grid(GridSpec(**s["grid"]))
    p = VariableExponent.from_preset(s["exponent"], grid)
    w = Weight.from_preset(s["weight"], grid, p)
    return grid, p, w


def _herz_params(s: dict, p, w) -> HerzParams:
    h = s["herz"]
    return HerzParams(h["alpha"], h["q"], p, w, h.get("r"), h.get("delta"))


def _grids(grid, count: int) -> list:
    out = [grid]
    for _ in range(count - 1):
        out.append(build_grid(out[-1].spec.refined(2)))
    return out


def _ratio_result(spec, rep) -> ExperimentResult:
    rows = [[spec.id, r.function_id, r.resolution, r.dict_size, r.input_norm, r.output_norm, r.ratio] for r in rep.rows]
    return ExperimentResult(spec.id, spec.kind, bool(rep.passed), ratio_rows=rows, max_ratio=float(rep.max_ratio),
                            refinement_growth=float(rep.refinement_growth), probe=rep.probe, notes=list(rep.notes))


def run_lemma1(spec, s):
    _, p, w = _objects(s)
    return _fit_result(spec, check_lemma1(p, w, s["trials"], spec.seed, s["origin"]))


def run_lemma2(spec, s):
    _, p, w = _objects(s)
    return _fit_result(spec, check_lemma2(p, w, s["trials"], spec.seed, s["origin"]))


def run_measure_comparison(spec, s):
    _, _, w = _objects(s)
    return _fit_result(spec, a1_measure_comparison(w, s["trials"], spec.seed, s["origin"]))


def run_norm_growth(spec, s):
    _, p, w = _objects(s)
    return _fit_result(spec, estimate_norm_growth_delta(p, w))


def run_inclusion_chain(spec, s):
    grid, p, _ = _objects(s)
    q = VariableExponent.from_preset(s["q_exponent"], grid)
    zoo = [Weight.from_preset(z, grid, p) for z in s["zoo"]]
    table = check_inclusion_chain(zoo, p, q)
    rows = [[spec.id, r.descriptor, *("finite" if f else "divergent" for f in r.finite), r.monotone]
            for r in table.rows]
    res = ExperimentResult(spec.id, spec.kind, table.passed)
    res.tables["chain"] = (["experiment_id", "weight", *CHAIN, "monotone"], rows)
    return res


def _suite(spec, s, grid):
    su = s["suite"]
    return build_suite(su["count"], su["seed"], grid.dim, grid.spec.k_min, grid.spec.k_max, su["families"])


def run_lp_ratio(spec, s):
    grid, p, w = _objects(s)
    rep = lp_boundedness_ratio(s["op"], p, w, _suite(spec, s, grid), spec.seed, _grids(grid, s["resolutions"]),
                               s["dictionary_size"], s["herz"]["beta"], experiment_id=spec.id)
    return _ratio_result(spec, rep)


def run_herz_ratio(spec, s, probe):
    grid, p, w = _objects(s)
    params = _herz_params(s, p, w)
    rep = herz_boundedness_ratio(params, s["herz"]["beta"], _suite(spec, s, grid), spec.seed,
                                 s["herz"]["homogeneous"], probe or s["probe"], _grids(grid, s["resolutions"]),
                                 s["dictionary_size"], experiment_id=spec.id)
    return _ratio_result(spec, rep)


def run_decomposition(spec, s, probe):
    grid, p, w = _objects(s)
    params = _herz_params(s, p, w)
    decision = validate_window(params, grid.dim)
    probe = probe or s["probe"]
    if not decision.accept and not probe:
        raise WindowRejected(decision)
    hom = s["herz"]["homogeneous"]
    dictionary = build_dictionary(s["herz"]["beta"], s["dictionary_size"], spec.seed, grid.dim)
    mask = grid.covered_mask(hom)
    rows, ok = [], True
    for fn in _suite(spec, s, grid):
        f = fn.on(grid, mask)
        if not np.any(f.values):
            continue
        d = decomposition_diagnostic(f, params, dictionary=dictionary, homogeneous=hom)
        finite = all(np.isfinite(v) for v in (d.T1, d.T2, d.T3))
        ok &= finite and d.bound_holds
        rows.append([spec.id, fn.function_id, d.T1, d.T2, d.T3, d.herz_norm, d.herz_norm_output, d.branch,
                     d.bound_holds])
    res = ExperimentResult(spec.id, spec.kind, bool(ok) or probe, probe=probe)
    res.tables["decomposition"] = (
        ["experiment_id", "function_id", "T1", "T2", "T3", "herz_norm", "herz_norm_output", "branch", "bound_holds"],
        rows,
    )
    if rows:
        ratios = np.array([[r[2] / r[5], r[3] / r[5], r[4] / r[5]] for r in rows])
        res.notes.append("max T_i/||f||: " + ", ".join(f"{v:.6g}" for v in ratios.max(axis=0)))
    if not decision.accept:
        res.notes.append("outside window: " + "; ".join(decision.reasons))
    return res


RUNNERS = {
    "lemma1": run_lemma1,
    "lemma2": run_lemma2,
    "measure_comparison": run_measure_comparison,
    "norm_growth": run_norm_growth,
    "inclusion_chain": run_inclusion_chain,
    "lp_ratio": run_lp_ratio,
    "herz_ratio": run_herz_ratio,
    "decomposition": run_decomposition,
}


def run_experiment(spec: ExperimentSpec, probe: bool = False) -> ExperimentResult:
    runner = RUNNERS[spec.kind]
    try:
        if spec.kind in ("herz_ratio", "decomposition"):
            return runner(spec, spec.settings, probe)
        return runner(spec, spec.settings)
    except WindowRejected as exc:
        return ExperimentResult(spec.id, spec.kind, False, status="window_rejected", notes=[str(exc)])
    except (ValueError, OverflowError, FloatingPointError) as exc:
        return ExperimentResult(spec.id, spec.kind, False, status="error", notes=[f"{type(exc).__name__}: {exc}"])
