"""
Experiment runners: one function per subcommand, plus the driver that
writes tables, the manifest and the summary for every run.

Runners append rows to the shared RunState as they go, so a run that
fails halfway still leaves its completed rows on disk.
"""

import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Dict, List

import numpy as np
import pandas as pd

from .checks import (BoundednessCheck, CheckPipeline, CheckResult, RatioWindowCheck, SlopeCheck, ToleranceCheck,
                     TrendCheck)
from .circle_average import boundary_terms, forcing_from_parts, k_theta, k_theta_derivatives, translate_average
from .config import Experiment
from .counting import (averaged_count, count_many, fit_exponent, main_term, mollifier_sweep,
                       well_roundedness_check)
from .errors import ConfigError, EnumerationCapError, HypCircleError, QuadratureError
from .fuchsian import DEFAULT_POINT_CAP, enumerate_words
from .observables import FOUR_PI, Mollifier, SpectralCase, SpectralParams, unfolded_average
from .output import check_records, frame, package_versions, write_manifest, write_summary, write_table
from .parallel import progress
from .schema import RunManifest, parse_theta
from .sl2 import diagonal, rotation
from .spectral import compute_coefficients, expansion_eval, remainder_bound
from .stats import (NOISE_FLOOR, DeviationScaling, consecutive_distances, deviation_law, decay_rate, fit_decay,
                    levy_prokhorov, nocl_representation, shrinking_arc_average, theta_scaling)

logger = logging.getLogger(__name__)

ORACLE_MAX_DEPTH = 24
ORACLE_STABLE_DEPTHS = 3


@dataclass
class RunState:
    pipeline: CheckPipeline = field(default_factory=CheckPipeline)
    rows: Dict[str, List[dict]] = field(default_factory=dict)
    errors: List[str] = field(default_factory=list)
    partial: bool = False

    def add_row(self, table: str, row: dict) -> None:
        self.rows.setdefault(table, []).append(row)

    def tables(self) -> Dict[str, pd.DataFrame]:
        return {name: frame(rows) for name, rows in self.rows.items() if rows}


def banner(message: str) -> None:
    print("=" * 80, file=sys.stderr)
    print(message, file=sys.stderr)
    print("=" * 80, file=sys.stderr)


def _require_params(exp: Experiment, what: str) -> SpectralParams:
    if exp.params is None:
        raise ConfigError(f"{what} needs a joint eigenfunction observable (eigen:nu=..., const:c=...), "
                          f"got {exp.observable.name}")
    return exp.params


def _require_invariant(exp: Experiment, what: str) -> None:
    if not exp.observable.gamma_invariant:
        raise ConfigError(f"{what} needs an observable on the quotient (bump, mollifier or const), "
                          f"got {exp.observable.name}")


# --- Subcommands ---

def run_ode_check(exp: Experiment, state: RunState) -> None:
    params = _require_params(exp, "ode-check")
    cfg, f, p = exp.config, exp.observable, exp.base_point
    residuals = []
    for t in progress(cfg.t_grid, desc="ode-check"):
        k, dk, ddk = k_theta_derivatives(f, p, params.theta, t, cfg.tol)
        A, B = boundary_terms(f, p, params.theta, t)
        G = complex(forcing_from_parts(params.n, params.theta, t, k, dk, A, B))
        residual = abs(ddk + dk + params.mu * k - math.exp(-t) * G)
        residuals.append(residual)
        state.add_row("residuals", {"t": t, "k": k, "dk": dk, "ddk": ddk, "G": G, "residual": residual})
    state.pipeline.run(ToleranceCheck("ode residual", cfg.options.get("residual_tol", 1e-6)), residuals)


def run_expand(exp: Experiment, state: RunState) -> None:
    params = _require_params(exp, "expand")
    cfg, f, p = exp.config, exp.observable, exp.base_point
    opts = cfg.options
    coeffs = compute_coefficients(f, p, params, tol=opts.get("coef_tol", 1e-6), quad_tol=cfg.tol,
                                  horizon=opts.get("horizon"), group=exp.group)
    state.add_row("coefficients", {
        "case": coeffs.case.value, "mu": params.mu, "nu": params.nu, "n": params.n, "theta": params.theta,
        "a_plus": coeffs.a_plus, "a_minus": coeffs.a_minus, "D_plus": coeffs.D_plus, "D_minus": coeffs.D_minus,
        "tail_bound": coeffs.tail_bound, "truncation_T": coeffs.truncation_T,
        "consistency_residual": abs(coeffs.consistency_residual) if coeffs.consistency_residual is not None
        else math.nan,
    })

    ts, remainders = [], []
    for t in progress(cfg.t_grid, desc="expand"):
        k = k_theta(f, p, params.theta, t, cfg.tol).value
        main = expansion_eval(coeffs, t)
        remainder = abs(k - main)
        ts.append(t)
        remainders.append(remainder)
        state.add_row("remainder", {"t": t, "k": k, "main": main, "remainder": remainder,
                                    "bound": remainder_bound(coeffs, t)})

    floor = NOISE_FLOOR * cfg.tol
    if max(remainders) <= floor:
        state.pipeline.run(ToleranceCheck("remainder at noise floor", floor), remainders)
    else:
        # One power of t is allowed at mu = 1/4.
        scale = np.asarray(ts) + 1.0 if coeffs.case == SpectralCase.QUARTER else np.ones(len(ts))
        fit = fit_decay(ts, np.asarray(remainders) / scale, floor=floor)
        state.pipeline.run(SlopeCheck("remainder decay", opts.get("max_slope", -0.9)), fit)

    thetas = opts.get("thetas")
    if thetas:
        scaling = theta_scaling(f, p, params, [parse_theta(t) for t in thetas], tol=opts.get("coef_tol", 1e-4),
                                quad_tol=cfg.tol, group=exp.group)
        for theta, dp, dm, s in zip(scaling.thetas, scaling.D_plus, scaling.D_minus, scaling.scaled()):
            state.add_row("theta_scaling", {"theta": theta, "D_plus": dp, "D_minus": dm, "scaled": s})
        # Only positive Casimir eigenvalues carry the 1/theta bound.
        if params.mu > 0:
            state.pipeline.run(BoundednessCheck("theta |D+-| within a factor across arc lengths",
                                                opts.get("theta_factor", 3.0)), scaling.scaled())


def run_equidist(exp: Experiment, state: RunState) -> None:
    _require_invariant(exp, "equidist")
    cfg, f, p = exp.config, exp.observable, exp.base_point
    opts = cfg.options
    fit = decay_rate(f, p, cfg.theta, cfg.t_grid, cfg.tol)
    for t, dev in zip(fit.ts, fit.deviations):
        state.add_row("deviations", {"t": float(t), "deviation": float(dev)})
    state.pipeline.run(TrendCheck("deviation decreases"), fit.deviations)
    state.pipeline.run(SlopeCheck("equidistribution rate", opts.get("max_slope", -0.2)), fit)

    if opts.get("shrinking", True):
        rate = float(opts.get("shrink_rate", 0.25))
        reference = unfolded_average(f)
        devs = []
        for t in progress(cfg.t_grid, desc="shrinking arcs"):
            width = min(FOUR_PI, t * math.exp(-rate * t))
            res = shrinking_arc_average(f, p, lambda _: 0.0, lambda _, w=width: w, t, cfg.tol)
            devs.append(abs(res.value - reference))
            state.add_row("shrinking", {"t": t, "window": width, "average": res.value, "deviation": devs[-1]})
        state.pipeline.run(TrendCheck("shrinking-arc deviation decreases"), devs)


def run_dlt(exp: Experiment, state: RunState) -> None:
    _require_invariant(exp, "dlt")
    cfg, f, p = exp.config, exp.observable, exp.base_point
    opts = cfg.options
    nocl = bool(opts.get("nocl", False))
    if nocl and not f.full_circle_flat:
        raise ConfigError(f"The full-circle check needs D+-(4pi, mu) = 0 for every mu > 0, which {f.name} "
                          f"does not guarantee; use const:c=... or tangent:delta=...,c=...")
    scaling = DeviationScaling(opts.get("scaling", DeviationScaling.SUPERQUARTER.value))
    laws = []
    for T in cfg.t_grid:
        law = deviation_law(f, cfg.theta, T, cfg.samples, cfg.seed, scaling, opts.get("nu_f"), exp.group,
                            cfg.tol, cfg.workers)
        laws.append(law)
        state.add_row("laws", {
            "T": T, "n": len(law), "max_abs": law.max_abs, "mean": law.mean, "std": law.std,
            "q05": law.quantile(0.05), "q50": law.quantile(0.5), "q95": law.quantile(0.95),
            "lp_to_previous": levy_prokhorov(laws[-2], law) if len(laws) > 1 else math.nan,
        })
    state.pipeline.run(BoundednessCheck("rescaled deviations stay bounded", opts.get("max_spread", 2.0)),
                       [law.max_abs for law in laws])
    if opts.get("lp_trend", True):
        state.pipeline.run(TrendCheck("LP distance decreases"), consecutive_distances(laws))

    if nocl:
        lhs_values = []
        for T in progress(cfg.t_grid, desc="geodesic differences"):
            lhs, rhs = nocl_representation(f, p, FOUR_PI, T, cfg.tol,
                                           fiber_nodes=opts.get("fiber_nodes", 16))
            lhs_values.append(abs(lhs))
            state.add_row("full_circle", {"T": T, "scaled_deviation": lhs, "geodesic_difference": rhs})
        floor = NOISE_FLOOR * cfg.tol * math.exp(cfg.t_grid[-1])
        if max(lhs_values) <= floor:
            state.pipeline.run(ToleranceCheck("full-circle deviation at noise floor", floor), lhs_values)
        else:
            fit = fit_decay(cfg.t_grid, lhs_values, floor=0.0)
            state.pipeline.run(SlopeCheck("full-circle e^T deviation does not grow",
                                          opts.get("nocl_max_slope", 0.05)), fit)


def run_translate(exp: Experiment, state: RunState) -> None:
    cfg, f, p = exp.config, exp.observable, exp.base_point
    opts = cfg.options
    lo, hi = opts.get("t_range", [1.0, 10.0])
    rng = np.random.default_rng(cfg.seed)
    gaps = []
    for i in progress(range(int(opts.get("translates", 100))), desc="translates"):
        t = float(rng.uniform(lo, hi))
        phi1, phi2 = rng.uniform(0.0, 2.0 * math.pi, 2)
        g = rotation(phi1) @ diagonal(t) @ rotation(phi2)
        direct = translate_average(f, p, g, "direct", cfg.tol).value
        via_cartan = translate_average(f, p, g, "cartan", cfg.tol).value
        gaps.append(abs(direct - via_cartan))
        state.add_row("translates", {"index": i, "t": t, "op_norm": g.op_norm(), "direct": direct,
                                     "cartan": via_cartan, "gap": gaps[-1]})
    state.pipeline.run(ToleranceCheck("translate identity", 2.0 * cfg.tol), gaps)


def _oracle_counts(exp: Experiment, radius: float, radii: List[float]) -> List[int]:
    """Counts from brute-force words, deepened until they stop changing."""
    last, stable = None, 0
    for depth in range(4, ORACLE_MAX_DEPTH + 1):
        try:
            ball = enumerate_words(exp.group, depth, radius=radius)
        except EnumerationCapError:
            logger.warning("word oracle hit its cap at depth %d before stabilising", depth)
            break
        counts = [ball.count(R) for R in radii]
        stable = stable + 1 if counts == last else 0
        last = counts
        if stable >= ORACLE_STABLE_DEPTHS:
            logger.info("word oracle stable at depth %d", depth)
            break
    return last


def run_count(exp: Experiment, state: RunState) -> None:
    cfg = exp.config
    opts = cfg.options
    reports = count_many(exp.group, cfg.r_grid, max_points=int(opts.get("max_points", DEFAULT_POINT_CAP)),
                         workers=cfg.workers)
    for r in reports:
        state.add_row("counts", {"R": r.R, "N": r.N, "Sigma": r.Sigma, "E": r.E, "ratio": r.ratio,
                                 "selberg_reference": r.selberg_reference, "valid": r.valid})
    if not all(r.valid for r in reports):
        state.partial = True
        state.pipeline.record(CheckResult("enumeration complete", False, math.nan, math.nan,
                                          "orbit enumeration cap reached; counts are partial"))
        return

    oracle_radius = float(opts.get("oracle_radius", 3.0))
    small = [r for r in reports if r.R <= oracle_radius]
    if small:
        oracle = _oracle_counts(exp, oracle_radius, [r.R for r in small])
        state.pipeline.run(ToleranceCheck("brute-force oracle", 0.0), [r.N - o for r, o in zip(small, oracle)])

    last = reports[-1]
    if last.R >= float(opts.get("ratio_from", 10.0)):
        lo, hi = opts.get("ratio_window", [0.85, 1.15])
        state.pipeline.run(RatioWindowCheck(f"N/Sigma at R={last.R:g}", lo, hi), last.ratio)

    tail = [r for r in reports if r.R >= float(opts.get("fit_from", 6.0))]
    if len(tail) >= 3:
        fit = fit_exponent([r.R for r in tail], [r.E for r in tail])
        state.pipeline.run(SlopeCheck("counting error exponent", opts.get("max_exponent", 0.98)), fit)


def run_avg_count(exp: Experiment, state: RunState) -> None:
    _require_invariant(exp, "avg-count")
    cfg, psi, G = exp.config, exp.observable, exp.group
    opts = cfg.options
    lead = main_term(G, unfolded_average(psi) * G.covol_surface)
    gaps, last = [], None
    for R in cfg.r_grid:
        avg = averaged_count(G, psi, R, cfg.tol, cfg.samples, cfg.seed, cfg.workers)
        bar = 3.0 * avg.monte_carlo_stderr + avg.unfolded_error + 1e-12
        gaps.append(abs(avg.monte_carlo - avg.unfolded) / bar)
        state.add_row("averaged_counts", {
            "R": R, "monte_carlo": avg.monte_carlo, "monte_carlo_stderr": avg.monte_carlo_stderr,
            "unfolded": avg.unfolded, "unfolded_error": avg.unfolded_error, "agree": avg.agree,
            "main_term": lead,
        })
        last = avg
    state.pipeline.run(ToleranceCheck("Monte Carlo and unfolded routes agree", 1.0), gaps)

    if last is not None and last.R >= float(opts.get("main_from", 8.0)):
        window = float(opts.get("main_window", 0.05))
        state.pipeline.run(RatioWindowCheck(f"leading term at R={last.R:g}", 1.0 - window, 1.0 + window),
                           last.unfolded / lead)

    if isinstance(psi, Mollifier) and opts.get("well_rounded", True):
        R_max = cfg.r_grid[-1]
        wr = well_roundedness_check(G, psi.delta, R_max, seed=cfg.seed)
        state.pipeline.record(CheckResult("well-roundedness", wr.passed, max(wr.outer_excess, wr.inner_excess),
                                          0.0, f"delta={wr.delta:g} R={wr.R:g}"))

    etas = opts.get("sweep_etas")
    if etas:
        sweep = mollifier_sweep(G, cfg.r_grid[-1], etas, cfg.tol, cfg.samples, cfg.seed)
        for eta, delta, est, err in zip(sweep.etas, sweep.deltas, sweep.smoothed, sweep.errors):
            state.add_row("mollifier_sweep", {"eta": eta, "delta": delta, "smoothed": est, "N": sweep.N,
                                              "error": err})


RUNNERS: Dict[str, Callable[[Experiment, RunState], None]] = {
    "ode-check": run_ode_check,
    "expand": run_expand,
    "equidist": run_equidist,
    "dlt": run_dlt,
    "translate": run_translate,
    "count": run_count,
    "avg-count": run_avg_count,
}


# --- Driver ---

def run_experiment(exp: Experiment) -> RunManifest:
    """
    Run one experiment and write its outputs under `config.out`.

    The manifest is always written; a HypCircleError marks the run partial
    and failed, and a ConfigError is re-raised after the manifest is on disk.
    """
    cfg = exp.config
    started = datetime.now(timezone.utc).isoformat()
    clock = time.perf_counter()
    state = RunState()
    stem = os.path.join(cfg.out, exp.name)
    outputs: List[str] = []
    banner(f"🚀 Starting {cfg.subcommand}: {exp.name} ({exp.observable.name} on {exp.group.name})")
    pending = None
    try:
        RUNNERS[cfg.subcommand](exp, state)
    except (QuadratureError, EnumerationCapError) as e:
        state.partial = True
        state.errors.append(f"{type(e).__name__}: {e}")
        state.pipeline.record(CheckResult("run completed", False, math.nan, math.nan, str(e)))
    except ConfigError as e:
        state.errors.append(f"{type(e).__name__}: {e}")
        state.pipeline.record(CheckResult("run completed", False, math.nan, math.nan, str(e)))
        pending = e
    except HypCircleError as e:
        state.partial = True
        state.errors.append(f"{type(e).__name__}: {e}")
        state.pipeline.record(CheckResult("run completed", False, math.nan, math.nan, str(e)))
    finally:
        tables = state.tables()
        for name, df in tables.items():
            outputs.append(write_table(df, f"{stem}_{name}.csv"))
        manifest = RunManifest(
            config=cfg, versions=package_versions(), started_at=started,
            wall_clock_s=time.perf_counter() - clock, checks=check_records(state.pipeline),
            outputs=outputs + [f"{stem}_summary.md"], errors=state.errors, partial=state.partial,
            passed=state.pipeline.passed and not state.errors,
        )
        write_manifest(manifest, f"{stem}_manifest.json")
        write_summary(manifest, tables, f"{stem}_summary.md")

    if pending is not None:
        raise pending
    if manifest.passed:
        banner(f"✅ {exp.name}: all {len(state.pipeline)} checks passed")
    else:
        for failure in state.pipeline.failures:
            print(f"❌ {failure.name}: {failure.details}", file=sys.stderr)
        banner(f"❌ {exp.name}: {len(state.pipeline.failures)} of {len(state.pipeline)} checks failed")
    return manifest
