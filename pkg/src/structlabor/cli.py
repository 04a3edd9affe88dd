"""Command-line interface.

Every subcommand reads one configuration file, derives all randomness
from the run seed, writes its outputs atomically into the output
directory, and finishes with a run manifest listing the SHA-256 digest
of every file it wrote.  Repeated runs with the same configuration and
seed produce byte-identical outputs (the manifest's timing fields are
the one documented exception).  Errors are machine-readable JSON on
stderr; exit codes are 0 (success), 2 (configuration), 3 (runtime).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .calibration import run_monte_carlo, share_bounds
from .config import AppConfig, load_config, serialize, with_overrides
from .core import comparative_statics, simulate_transition, steady_state
from .errors import ConfigError, DomainError
from .estimators import (
    MaturityPanel,
    count_births,
    detect_degradation,
    estimate_hazard_decomposition,
    indices,
)
from .io import (
    PANEL_COLUMNS,
    PATH_COLUMNS,
    config_digest,
    read_panel_csv,
    write_csv,
    write_json,
    write_manifest,
)
from .portfolio import run_portfolio_scenario
from .rng import derive_seed
from .roy import dispersion_experiment


class _Parser(argparse.ArgumentParser):
    """argparse subclass whose usage errors follow the JSON error contract."""

    def error(self, message: str) -> None:
        _emit_error("config", "", message)
        raise SystemExit(2)


def _emit_error(kind: str, path: str, message: str) -> None:
    record = {"error": {"kind": kind, "path": path, "message": message}}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="structlabor", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=None, help="YAML or JSON configuration file")
    common.add_argument("--seed", type=int, default=None, help="override run.seed (64-bit unsigned)")
    common.add_argument(
        "--out",
        metavar="DIR",
        default=os.environ.get("STRUCTLABOR_OUT") or None,
        help="override run.out output directory (default from STRUCTLABOR_OUT)",
    )
    common.add_argument("--format", choices=("csv", "json", "both"), default=None, help="series output format")
    common.add_argument("--quiet", action="store_true", help="suppress the stdout summary")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("steady-state", parents=[common], help="long-run allocation, prices, and sensitivities")
    sub.add_parser("calibrate", parents=[common], help="Monte Carlo distribution of the long-run share")
    sub.add_parser("simulate", parents=[common], help="transition path toward the long-run allocation")
    sub.add_parser("portfolio", parents=[common], help="task-family scenario and maturity panel")
    sub.add_parser("roy", parents=[common], help="paired wage-dispersion experiment")
    sub.add_parser("estimate", parents=[common], help="hazard decomposition and counts from a panel")
    return parser


def _write_series(out: str, name: str, fmt: str, columns, rows) -> list[str]:
    rows = [list(r) for r in rows]
    files = []
    if fmt in ("csv", "both"):
        write_csv(os.path.join(out, f"{name}.csv"), columns, rows)
        files.append(f"{name}.csv")
    if fmt in ("json", "both"):
        write_json(os.path.join(out, f"{name}.json"), {"columns": list(columns), "rows": rows})
        files.append(f"{name}.json")
    return files


def _params_dict(params) -> dict:
    return {
        name: getattr(params, name)
        for name in ("alpha", "gamma", "r", "delta_k", "eta", "A_bar", "K", "L_bar")
    }


def _cmd_steady_state(cfg: AppConfig) -> tuple[list[str], list[str]]:
    ss = steady_state(cfg.baseline)
    ds_dgamma, ds_dr, ds_ddelta = comparative_statics(cfg.baseline)
    payload = {
        "params": _params_dict(cfg.baseline),
        "steady_state": {
            "s_star": ss.s_star,
            "L_S_star": ss.L_S_star,
            "L_U_star": ss.L_U_star,
            "k_star": ss.k_star,
            "Y_star": ss.Y_star,
            "wage": ss.wage,
            "shadow_value": ss.shadow_value,
        },
        "comparative_statics": {
            "ds_dgamma": ds_dgamma,
            "ds_dr": ds_dr,
            "ds_ddelta_k": ds_ddelta,
        },
    }
    write_json(os.path.join(cfg.run.out, "steady_state.json"), payload)
    lines = [
        f"long-run maintenance share s* = {ss.s_star:.6f}",
        f"capability stock k* = {ss.k_star:.6f}, wage = {ss.wage:.6f}",
    ]
    return ["steady_state.json"], lines


def _cmd_calibrate(cfg: AppConfig) -> tuple[list[str], list[str]]:
    priors = replace(cfg.priors, seed=derive_seed(cfg.run.seed, "calibration"))
    result = run_monte_carlo(priors)
    lo, hi = share_bounds(priors)
    payload = {
        "priors": serialize(cfg)["priors"],
        "stats": {
            "mean": result.mean,
            "median": result.median,
            "std_dev": result.std_dev,
            "q2_5": result.q2_5,
            "q10": result.q10,
            "q90": result.q90,
            "q97_5": result.q97_5,
            "min": result.share_min,
            "max": result.share_max,
            "pr_gt_5pct": result.pr_gt_5pct,
            "pr_gt_8pct": result.pr_gt_8pct,
        },
        "attainable_range_pct": [lo * 100.0, hi * 100.0],
        "n_draws": result.n_draws,
        "stream_seed": result.seed,
    }
    write_json(os.path.join(cfg.run.out, "calibration.json"), payload)
    lines = [
        f"share distribution over {result.n_draws} draws: "
        f"mean {result.mean:.2f}%, sd {result.std_dev:.2f}pp, "
        f"P10-P90 [{result.q10:.2f}%, {result.q90:.2f}%]",
    ]
    return ["calibration.json"], lines


def _cmd_simulate(cfg: AppConfig) -> tuple[list[str], list[str]]:
    ss = steady_state(cfg.baseline)
    k0 = cfg.transition.k0 if cfg.transition.k0 is not None else 0.5 * ss.k_star
    l_s0 = cfg.transition.L_S0 if cfg.transition.L_S0 is not None else 0.5 * ss.L_S_star
    path = simulate_transition(
        cfg.baseline,
        k0=k0,
        L_S0=l_s0,
        T=cfg.transition.T,
        damping=cfg.transition.damping,
        tol=cfg.transition.tol,
    )
    rows = [(p.t, p.k, p.L_S, p.L_U, p.Y, p.w_U, p.w_S) for p in path.points]
    files = _write_series(cfg.run.out, "path", cfg.run.format, PATH_COLUMNS, rows)
    last = path.points[-1]
    payload = {
        "params": _params_dict(cfg.baseline),
        "initial": {"k0": k0, "L_S0": l_s0},
        "damping": path.damping,
        "converged": path.converged,
        "periods_to_converge": path.periods_to_converge,
        "final": {"t": last.t, "k": last.k, "L_S": last.L_S, "Y": last.Y},
        "steady_state": {"s_star": ss.s_star, "k_star": ss.k_star},
    }
    write_json(os.path.join(cfg.run.out, "transition.json"), payload)
    files.append("transition.json")
    status = f"converged in {path.periods_to_converge} periods" if path.converged else "did not converge"
    lines = [f"transition with damping {path.damping:.4f}: {status}"]
    return files, lines


def _run_configured_scenario(cfg: AppConfig):
    seed = derive_seed(cfg.run.seed, "portfolio")
    p0 = cfg.portfolio.initial_portfolio()
    drift = cfg.portfolio.drift.to_drift(cfg.portfolio.T)
    return run_portfolio_scenario(
        p0,
        cfg.portfolio.labor_budget,
        cfg.portfolio.entry,
        cfg.portfolio.T,
        seed=seed,
        drift=drift,
    )


def _panel_rows(scenario) -> list[tuple]:
    return list(
        zip(
            scenario.family_id,
            scenario.period,
            scenario.maturity,
            scenario.labor,
            scenario.effective_weight,
            scenario.tech_window,
            scenario.org_window,
        )
    )


def _cmd_portfolio(cfg: AppConfig) -> tuple[list[str], list[str]]:
    scenario = _run_configured_scenario(cfg)
    files = _write_series(cfg.run.out, "panel", cfg.run.format, PANEL_COLUMNS, _panel_rows(scenario))
    cap_rows = [
        (int(t), float(scenario.capability[t]), float(scenario.labor_budget[t]))
        for t in scenario.periods
    ]
    files += _write_series(
        cfg.run.out, "capability", cfg.run.format, ("t", "capability", "labor_budget"), cap_rows
    )
    births = count_births(scenario.final.families, T=cfg.portfolio.T)
    payload = {
        "T": cfg.portfolio.T,
        "n_families_initial": cfg.portfolio.n_families,
        "n_families_final": scenario.final.size,
        "births_after_start": int(births[1:].sum()),
        "degradation_events": len(scenario.events),
        "capability_final": float(scenario.capability[-1]),
    }
    write_json(os.path.join(cfg.run.out, "portfolio.json"), payload)
    files.append("portfolio.json")
    lines = [
        f"{cfg.portfolio.T} transitions: {scenario.final.size} families "
        f"({int(births[1:].sum())} entrants), {len(scenario.events)} degradation events",
    ]
    return files, lines


def _cmd_roy(cfg: AppConfig) -> tuple[list[str], list[str]]:
    seed = derive_seed(cfg.run.seed, "roy")
    result = dispersion_experiment(
        cfg.roy.experiment,
        cfg.roy.treatment,
        cfg.roy.factor,
        cfg.roy.replications,
        seed,
    )

    def arm_dict(arm) -> dict:
        return {
            "log_wage_variance": arm.stats.log_wage_variance,
            "p90_p10": arm.stats.p90_p10,
            "top_decile_share": arm.stats.top_decile_share,
            "mean_wage": arm.stats.mean_wage,
            "n_families": arm.n_families,
            "converged": arm.converged,
        }

    payload = {
        "treatment": result.treatment,
        "factor": result.factor,
        "replications": len(result.base),
        "mean_variance_diff": result.mean_variance_diff,
        "share_positive": result.share_positive,
        "per_replication": [
            {"base": arm_dict(b), "treated": arm_dict(t), "variance_diff": d}
            for b, t, d in zip(result.base, result.treated, result.variance_diffs)
        ],
    }
    write_json(os.path.join(cfg.run.out, "roy.json"), payload)
    lines = [
        f"{result.treatment} x{result.factor:g} over {len(result.base)} replications: "
        f"mean log-wage variance diff {result.mean_variance_diff:+.4f} "
        f"(positive in {result.share_positive:.0%})",
    ]
    return ["roy.json"], lines


def _births_from_panel(panel: MaturityPanel) -> np.ndarray:
    order = np.lexsort((panel.period, panel.family_id))
    fam = panel.family_id[order]
    per = panel.period[order]
    _, first = np.unique(fam, return_index=True)
    return count_births([int(b) for b in per[first]], T=int(panel.period.max()))


def _cmd_estimate(cfg: AppConfig) -> tuple[list[str], list[str]]:
    files: list[str] = []
    if cfg.estimate.panel is not None:
        arrays = read_panel_csv(cfg.estimate.panel)
        panel = MaturityPanel(
            family_id=arrays["family_id"],
            period=arrays["period"],
            maturity=arrays["maturity"],
            tech_window=arrays["tech_window"],
            org_window=arrays["org_window"],
        )
        births = _births_from_panel(panel)
        index_rows = None
    else:
        scenario = _run_configured_scenario(cfg)
        panel = MaturityPanel.from_scenario(scenario)
        births = count_births(scenario.final.families, T=cfg.portfolio.T)
        weights = {f.id: f.omega for f in scenario.final.families}
        spec = scenario.final.aggregator
        index_rows = []
        for t in scenario.periods:
            point = indices(
                panel,
                int(t),
                weights,
                labor_total=float(scenario.labor_budget[t]),
                L_bar=cfg.baseline.L_bar,
                aggregator=spec,
            )
            index_rows.append(
                (point.period, point.capability, point.maintenance_share, point.n_families)
            )

    flags = detect_degradation(panel, rel_drop=cfg.estimate.rel_drop, horizon=cfg.estimate.horizon)
    est = estimate_hazard_decomposition(flags)
    payload = {
        "delta_hat": est.delta_hat,
        "components": {"env": est.env, "tech": est.tech, "org": est.org},
        "standard_errors": {"env": est.se_env, "tech": est.se_tech, "org": est.se_org},
        "n_obs": est.n_obs,
        "cells": {
            f"tech={int(k[0])},org={int(k[1])}": {"mean": v.mean, "count": v.count}
            for k, v in sorted(est.cells.items())
        },
        "rel_drop": cfg.estimate.rel_drop,
        "horizon": cfg.estimate.horizon,
    }
    write_json(os.path.join(cfg.run.out, "hazard.json"), payload)
    files.append("hazard.json")
    files += _write_series(
        cfg.run.out,
        "births",
        cfg.run.format,
        ("t", "births"),
        [(int(t), int(b)) for t, b in enumerate(births)],
    )
    if index_rows is not None:
        files += _write_series(
            cfg.run.out,
            "indices",
            cfg.run.format,
            ("t", "capability", "maintenance_share", "n_families"),
            index_rows,
        )

    def show(x: float | None) -> str:
        return "n/a" if x is None else f"{x:.4f}"

    lines = [
        f"degradation hazard {est.delta_hat:.4f} over {est.n_obs} family-periods "
        f"(env {show(est.env)}, tech {show(est.tech)}, org {show(est.org)})",
    ]
    return files, lines


_COMMANDS = {
    "steady-state": _cmd_steady_state,
    "calibrate": _cmd_calibrate,
    "simulate": _cmd_simulate,
    "portfolio": _cmd_portfolio,
    "roy": _cmd_roy,
    "estimate": _cmd_estimate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = with_overrides(cfg, seed=args.seed, out=args.out, fmt=args.format)
    except ConfigError as exc:
        _emit_error("config", exc.path, exc.message)
        return 2

    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    clock = time.monotonic()
    try:
        os.makedirs(cfg.run.out, exist_ok=True)
        files, lines = _COMMANDS[args.command](cfg)
        write_manifest(
            out_dir=cfg.run.out,
            command=args.command,
            seed=cfg.run.seed,
            digest=config_digest(serialize(cfg)),
            outputs=files,
            started_utc=started,
            elapsed_seconds=round(time.monotonic() - clock, 6),
            version=__version__,
        )
    except ConfigError as exc:
        _emit_error("config", exc.path, exc.message)
        return 2
    except DomainError as exc:
        _emit_error("runtime", "", str(exc))
        return 3
    except OSError as exc:
        _emit_error("io", "", str(exc))
        return 3

    if not args.quiet:
        for line in lines:
            print(line)
        for name in files + ["run.manifest.json"]:
            print(f"wrote {os.path.join(cfg.run.out, name)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
