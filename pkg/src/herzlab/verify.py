"""Inequality harness: envelope fits, bounded-ratio sweeps and decomposition diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .balls import ball_nodes, nested_ball_pairs
from .exponent import VariableExponent, scale
from .fitting import FitReport, fit_envelope
from .grid import Grid, GridFunction, GridSpec, build_grid
from .norms import HerzParams, exponent_array, herz_norm, herz_sum, norm_array, weighted_norm
from .sqfn import build_dictionary, maximal, s_beta
from .suite import SuiteFunction
from .weights import (
    Weight,
    a1_constant,
    ap_constant,
    apvar_constant,
    atilde_constant,
    refinement_verdict,
    verdict_family,
)

GROWTH_LIMIT = 1.10


def _weight_values(w, grid: Grid) -> Optional[np.ndarray]:
    return None if w is None else w.on(grid).values


def _indicator_norm(idx, pv, wv, cell) -> float:
    e = pv[idx]
    return norm_array(np.ones(e.shape), e, None if wv is None else wv[idx], cell)


# ---------------------------------------------------------------------------
# lemmas on balls


def _pair_samples(p: VariableExponent, w, trials: int, seed: int, origin: bool):
    """``(log |E|/|B|, log ||chi_E|| / ||chi_B||)`` over sampled pairs, ``E = B`` first."""
    grid = p.grid
    pv = p.values
    wv = _weight_values(w, grid)
    xs, ys = [0.0], [0.0]
    for cb, rb, ce, re in nested_ball_pairs(grid, trials, seed, origin):
        ib, ie = ball_nodes(grid, cb, rb), ball_nodes(grid, ce, re)
        nb = float(np.count_nonzero(np.ones(grid.shape)[ib]))
        ne = float(np.count_nonzero(np.ones(grid.shape)[ie]))
        if ne == 0 or nb == 0:
            continue
        xs.append(np.log(ne / nb))
        ys.append(np.log(_indicator_norm(ie, pv, wv, grid.cell) / _indicator_norm(ib, pv, wv, grid.cell)))
    return np.array(xs), np.array(ys)


def check_lemma1(p: VariableExponent, w=None, trials: int = 500, seed: int = 0, origin: bool = False) -> FitReport:
    """Smallest ``C`` with ``|E|/|B| <= C ||chi_E|| / ||chi_B||`` over sampled ``E subset B``."""
    x, y = _pair_samples(p, w, trials, seed, origin)
    gap = x - y
    log_c = float(gap.max())
    return FitReport(
        C=float(np.exp(log_c)),
        delta=1.0,
        residual=float(np.std(gap)),
        sample_count=int(x.size),
        envelope_violations=int(np.count_nonzero(gap > log_c + 1e-9)),
        delta_raw=1.0,
        x=x,
        y=y,
    )


def check_lemma2(p: VariableExponent, w=None, trials: int = 500, seed: int = 0, origin: bool = False) -> FitReport:
    """Envelope ``||chi_E|| / ||chi_B|| <= C (|E|/|B|)^delta``."""
    x, y = _pair_samples(p, w, trials, seed, origin)
    return fit_envelope(x, y)


def estimate_norm_growth_delta(p: VariableExponent, w=None) -> FitReport:
    """Envelope ``||chi_{B_k}|| / ||chi_{B_l}|| <= C 2^(delta n (k - l))`` over ``k <= l``."""
    grid = p.grid
    ks = list(range(grid.spec.k_min, grid.spec.k_max + 1))
    if len(ks) < 6:
        raise ValueError(f"insufficient shells: {len(ks)} < 6")
    pv = p.values
    wv = _weight_values(w, grid)
    logs = [np.log(_indicator_norm(grid.dyadic_ball_mask(k), pv, wv, grid.cell)) for k in ks]
    xs, ys = [], []
    for i, k in enumerate(ks):
        for j in range(i, len(ks)):
            xs.append(grid.dim * (k - ks[j]) * np.log(2.0))
            ys.append(logs[i] - logs[j])
    rep = fit_envelope(np.array(xs), np.array(ys))
    # the Herz window needs 0 < delta < 1
    rep.flagged = not (0 < rep.delta_raw < 1 - 1e-9)
    return rep


# ---------------------------------------------------------------------------
# parameter window


@dataclass
class WindowDecision:
    accept: bool
    margins: dict
    reasons: list = field(default_factory=list)


class WindowRejected(ValueError):
    def __init__(self, decision: WindowDecision):
        super().__init__("parameter window rejected: " + "; ".join(decision.reasons))
        self.decision = decision


def validate_window(params: HerzParams, n: int) -> WindowDecision:
    """Accept iff ``-n delta < alpha < n (1 - r)`` and ``1/p_- < r < 1``."""
    reasons = []
    margins = {}
    if params.delta is None or params.r is None:
        reasons.append("r and delta are both required")
        return WindowDecision(False, margins, reasons)
    a, r, d = params.alpha, params.r, params.delta
    p_minus = params.p.p_minus
    margins["alpha_lower"] = a + n * d
    margins["alpha_upper"] = n * (1 - r) - a
    margins["r_lower"] = r - 1.0 / p_minus
    margins["r_upper"] = 1.0 - r
    if not margins["alpha_lower"] > 0:
        reasons.append(f"alpha = {a} <= -n*delta = {-n * d}")
    if not margins["alpha_upper"] > 0:
        reasons.append(f"alpha = {a} >= n*(1-r) = {n * (1 - r)}")
    if not margins["r_lower"] > 0:
        reasons.append(f"r = {r} <= 1/p_- = {1.0 / p_minus}")
    if not margins["r_upper"] > 0:
        reasons.append(f"r = {r} >= 1")
    return WindowDecision(not reasons, margins, reasons)


def rp_screen(p: VariableExponent, w, r: float, levels: int = 4):
    """Refinement verdict for the ``A_{r p(.)}`` constant on a small screening grid."""
    dim = p.grid.dim
    spec = GridSpec(1, -1, 2, 8) if dim == 1 else GridSpec(2, 1, 2, 2)
    base = build_grid(spec)
    rp = scale(p.on(base), r)
    per_axis = 16 if dim == 1 else 4

    def est(g):
        ww = Weight.constant(1.0, g) if w is None else w.on(g)
        return apvar_constant(ww, rp.on(g), verdict_family(g, per_axis))

    return refinement_verdict(est, base, levels)


# ---------------------------------------------------------------------------
# ratio sweeps


@dataclass
class RatioRow:
    function_id: str
    resolution: int
    dict_size: int
    input_norm: float
    output_norm: float
    ratio: float


@dataclass
class RatioReport:
    experiment_id: str
    rows: list
    max_ratio: float
    refinement_growth: float
    passed: bool
    probe: bool = False
    notes: list = field(default_factory=list)

    @property
    def ratios(self) -> list:
        return [(r.function_id, r.input_norm, r.output_norm, r.ratio) for r in self.rows]

    def max_by_resolution(self) -> dict:
        out: dict = {}
        for r in self.rows:
            out[r.resolution] = max(out.get(r.resolution, 0.0), r.ratio)
        return out


def _default_grids(grid: Grid, grids) -> list:
    if grids is not None:
        return list(grids)
    return [grid, build_grid(grid.spec.refined(2))]


def _finish(experiment_id, rows, notes, probe, limit=GROWTH_LIMIT) -> RatioReport:
    tmp = RatioReport(experiment_id, rows, np.nan, np.nan, False, probe, notes)
    by_res = tmp.max_by_resolution()
    res = sorted(by_res)
    if not res:
        tmp.notes.append("no nonzero inputs")
        return tmp
    tmp.max_ratio = by_res[res[-1]]
    tmp.refinement_growth = by_res[res[-1]] / by_res[res[0]] if len(res) > 1 else np.nan
    ok = all(np.isfinite(r.ratio) for r in rows) and len(res) > 1 and tmp.refinement_growth <= limit
    tmp.passed = True if probe else bool(ok)
    if probe:
        tmp.notes.append(f"probe mode: refinement growth {tmp.refinement_growth:.6g} recorded, not judged")
    return tmp


def lp_boundedness_ratio(op_id: str, p: VariableExponent, w, suite: Sequence[SuiteFunction], seed: int = 0,
                         grids=None, dict_size: int = 8, beta: float = 1.0, dictionary=None,
                         experiment_id: Optional[str] = None) -> RatioReport:
    """``||Op f|| / ||f||`` in ``L^p(.)(w)`` over a suite, at each resolution."""
    if op_id not in ("maximal", "s_beta"):
        raise ValueError(f"unknown operator {op_id!r}")
    grids = _default_grids(p.grid, grids)
    if op_id == "s_beta" and dictionary is None:
        dictionary = build_dictionary(beta, dict_size, seed, p.grid.dim)
    size = len(dictionary) if dictionary is not None else 0
    rows, notes = [], []
    for g in grids:
        pg = p.on(g)
        wg = None if w is None else w.on(g)
        for fn in suite:
            f = fn.on(g)
            n_in = weighted_norm(f, pg, wg)
            if n_in == 0:
                notes.append(f"{fn.function_id}: zero input at {g.spec.points_per_unit}, skipped")
                continue
            out = maximal(f) if op_id == "maximal" else s_beta(f, dictionary)
            n_out = weighted_norm(out, pg, wg)
            rows.append(RatioRow(fn.function_id, g.spec.points_per_unit, size, n_in, n_out, n_out / n_in))
    return _finish(experiment_id or f"lp_ratio:{op_id}", rows, notes, probe=False)


def dictionary_growth_norms(f: GridFunction, p, w, sizes: Sequence[int], beta: float = 1.0,
                            seed: int = 0) -> list[float]:
    """``||S~ f||`` for nested dictionary prefixes of the given sizes."""
    full = build_dictionary(beta, max(sizes), seed, f.grid.dim)
    return [weighted_norm(s_beta(f, full.prefix(k)), p, w) for k in sizes]


def herz_boundedness_ratio(params: HerzParams, beta: float, suite: Sequence[SuiteFunction], seed: int = 0,
                           homogeneous: bool = True, probe: bool = False, grids=None, dict_size: int = 8,
                           screen: bool = True, dictionary=None,
                           experiment_id: Optional[str] = None) -> RatioReport:
    """``||S~ f||_K / ||f||_K`` over a suite; suite members are cut to the covered annulus.

    Outside the admissible window this raises :class:`WindowRejected` unless
    ``probe`` is set, in which case growth is recorded but not judged.  A
    divergent ``A_{rp}`` screen also switches to probe mode.
    """
    grid = params.p.grid
    notes = []
    decision = validate_window(params, grid.dim)
    if not decision.accept:
        if not probe:
            raise WindowRejected(decision)
        notes.append("outside window: " + "; ".join(decision.reasons))
    elif screen and params.r is not None:
        verdict = rp_screen(params.p, params.w, params.r)
        if verdict.divergent:
            probe = True
            notes.append(f"A_rp screen divergent (growth {verdict.growth}); probe mode")
    else:
        notes.append("A_rp screen skipped")
    probe = probe or not decision.accept
    grids = _default_grids(grid, grids)
    if dictionary is None:
        dictionary = build_dictionary(beta, dict_size, seed, grid.dim)
    rows = []
    for g in grids:
        pg = params.on(g)
        mask = g.covered_mask(homogeneous)
        for fn in suite:
            f = fn.on(g, mask)
            n_in = herz_norm(f, pg, homogeneous)
            if n_in == 0:
                notes.append(f"{fn.function_id}: zero input at {g.spec.points_per_unit}, skipped")
                continue
            n_out = herz_norm(s_beta(f, dictionary), pg, homogeneous)
            rows.append(RatioRow(fn.function_id, g.spec.points_per_unit, len(dictionary), n_in, n_out, n_out / n_in))
    kind = "hom" if homogeneous else "nonhom"
    return _finish(experiment_id or f"herz_ratio:{kind}", rows, notes, probe)


# ---------------------------------------------------------------------------
# near, inner and outer decomposition


@dataclass
class DecompositionReport:
    T1: float
    T2: float
    T3: float
    herz_norm: float
    herz_norm_output: float
    quasi_factor: float
    branch: str

    @property
    def ratios(self) -> tuple:
        return tuple(t / self.herz_norm for t in (self.T1, self.T2, self.T3))

    @property
    def bound_holds(self) -> bool:
        total = self.T1 + self.T2 + self.T3
        return self.herz_norm_output <= self.quasi_factor * total * (1 + 1e-9)


def _shell_labels(grid: Grid, homogeneous: bool) -> tuple[np.ndarray, list]:
    if homogeneous:
        return grid.shell, list(range(grid.spec.k_min, grid.spec.k_max + 1))
    return np.maximum(grid.shell, 0), list(range(0, grid.spec.k_max + 1))


def decomposition_diagnostic(f: GridFunction, params: HerzParams, beta: float = 1.0, dictionary=None,
                             homogeneous: bool = True, seed: int = 0) -> DecompositionReport:
    """``T1, T2, T3`` from the split ``f = f chi_{near} + f chi_{inner} + f chi_{outer}`` around each shell.

    For shell ``k`` the pieces are ``B_{k+1} minus B_{k-2}``, ``B_{k-2}`` and the
    complement of ``B_{k+1}``; ``T_i`` is the Herz sum of
    ``||S~(piece_i) chi_k||``.  Sublinearity gives
    ``||S~ f||_K <= 3^max(0, 1/q - 1) (T1 + T2 + T3)``.
    """
    grid = f.grid
    params = params.on(grid)
    if dictionary is None:
        dictionary = build_dictionary(beta, 8, seed, grid.dim)
    pv = exponent_array(params.p, grid)
    wv = _weight_values(params.w, grid)
    label, ks = _shell_labels(grid, homogeneous)
    pieces = {
        "near": lambda k: (label >= k - 1) & (label <= k + 1),
        "inner": lambda k: label <= k - 2,
        "outer": lambda k: label > k + 1,
    }
    cell = grid.cell
    norms = {name: [] for name in pieces}
    for k in ks:
        shell = label == k
        pw = None if wv is None else wv[shell]
        for name, sel in pieces.items():
            part = f.restrict(sel(k))
            if not np.any(part.values):
                norms[name].append(0.0)
                continue
            out = s_beta(part, dictionary).values
            norms[name].append(norm_array(out[shell], pv[shell], pw, cell))
    T = [herz_sum(ks, norms[name], params.alpha, params.q)[0] for name in ("near", "inner", "outer")]
    hf = herz_norm(f, params, homogeneous)
    hs = herz_norm(s_beta(f, dictionary), params, homogeneous)
    factor = 3.0 ** max(0.0, 1.0 / params.q - 1.0)
    branch = "q<=1" if params.q <= 1 else "q>1"
    return DecompositionReport(T[0], T[1], T[2], hf, hs, factor, branch)


@dataclass
class FarShellReport:
    C: float
    samples: int
    per_pair: dict


def far_shell_constant(p: VariableExponent, w=None, dictionary=None, beta: float = 1.0,
                       seed: int = 0) -> FarShellReport:
    """Smallest ``C`` with ``S~(chi_{D_l})(x) <= C |B_l|/|B_k| ||chi_{D_l}|| / ||chi_{B_l}||`` for ``x in D_k``, ``l <= k-2``."""
    grid = p.grid
    if dictionary is None:
        dictionary = build_dictionary(beta, 8, seed, grid.dim)
    pv = p.values
    wv = _weight_values(w, grid)
    k_lo, k_hi = grid.spec.k_min, grid.spec.k_max
    per_pair = {}
    count = 0
    for l in range(k_lo, k_hi - 1):
        dl = grid.shell_mask(l)
        bl = grid.dyadic_ball_mask(l)
        S = s_beta(GridFunction(grid, dl.astype(float)), dictionary).values
        factor = _indicator_norm(dl, pv, wv, grid.cell) / _indicator_norm(bl, pv, wv, grid.cell)
        vol_l = np.count_nonzero(bl)
        for k in range(l + 2, k_hi + 1):
            dk = grid.shell_mask(k)
            vol_k = np.count_nonzero(grid.dyadic_ball_mask(k))
            unit = vol_l / vol_k * factor
            per_pair[(l, k)] = float(S[dk].max() / unit)
            count += int(np.count_nonzero(dk))
    return FarShellReport(max(per_pair.values()), count, per_pair)


# ---------------------------------------------------------------------------
# inclusion chain


CHAIN = ("A1", "A_p-", "At_p", "At_q", "A_q+")


@dataclass
class ChainRow:
    descriptor: str
    finite: list
    growth: list

    @property
    def monotone(self) -> bool:
        seen_finite = False
        for ok in self.finite:
            if seen_finite and not ok:
                return False
            seen_finite = seen_finite or ok
        return True


@dataclass
class InclusionTable:
    rows: list

    @property
    def passed(self) -> bool:
        return all(r.monotone for r in self.rows)


def check_inclusion_chain(zoo: Sequence[Weight], p: VariableExponent, q_exp: VariableExponent,
                          levels: int = 4, centers_per_axis: int = 16) -> InclusionTable:
    """Refinement verdicts for ``[A1, A_{p-}, At_{p(.)}, At_{q(.)}, A_{q+}]`` per zoo weight."""
    grid = p.grid
    qv = q_exp.on(grid)
    if np.any(p.values > qv.values):
        raise ValueError("inclusion chain needs p <= q pointwise")
    p_minus, q_plus = p.p_minus, qv.p_plus

    def fam(g):
        return verdict_family(g, centers_per_axis)

    rows = []
    for w in zoo:
        ests = [
            lambda g, w=w: a1_constant(w.on(g), fam(g)),
            lambda g, w=w: ap_constant(w.on(g), p_minus, fam(g)),
            lambda g, w=w: atilde_constant(w.on(g), p.on(g), fam(g)),
            lambda g, w=w: atilde_constant(w.on(g), qv.on(g), fam(g)),
            lambda g, w=w: ap_constant(w.on(g), q_plus, fam(g)),
        ]
        verdicts = [refinement_verdict(e, grid, levels) for e in ests]
        rows.append(ChainRow(w.descriptor, [v.finite for v in verdicts], [v.growth for v in verdicts]))
    return InclusionTable(rows)
