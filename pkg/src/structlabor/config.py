"""Run configuration: parsing, validation, and canonical serialization.

Configurations are YAML mappings (JSON, being a YAML subset, is accepted
too).  Every field has a default, so the empty document is a valid
configuration; unknown keys are rejected with their dotted path rather
than silently ignored, and every value error names the field it came
from.  ``serialize`` produces the fully resolved mapping that feeds the
run manifest's config digest, and parsing that mapping reproduces the
configuration exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import yaml

from .calibration import PriorSpec
from .core import BaselineParams
from .errors import ConfigError, DomainError
from .portfolio import (
    AggregatorSpec,
    DriftConfig,
    EntryConfig,
    Portfolio,
    PowerCodification,
    TaskFamily,
    periodic_windows,
)
from .roy import RoyExperiment

FORMATS = ("csv", "json", "both")


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _as_section(value: Any, path: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(path, "must be a mapping")
    return dict(value)


def _reject_unknown(section: dict, path: str) -> None:
    if section:
        key = sorted(section)[0]
        raise ConfigError(_join(path, str(key)), "unknown key")


def _pop_float(section: dict, key: str, path: str, default: float | None) -> float | None:
    if key not in section:
        return default
    value = section.pop(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(_join(path, key), f"expected a number, got {type(value).__name__}")
    return float(value)


def _pop_int(section: dict, key: str, path: str, default: int | None) -> int | None:
    if key not in section:
        return default
    value = section.pop(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(_join(path, key), f"expected an integer, got {type(value).__name__}")
    return value

def _pop_bool(section: dict, key: str, path: str, default: bool) -> bool:
    if key not in section:
        return default
    value = section.pop(key)
    if not isinstance(value, bool):
        raise ConfigError(_join(path, key), f"expected a boolean, got {type(value).__name__}")
    return value


def _pop_str(section: dict, key: str, path: str, default: str | None, choices: tuple[str, ...] | None = None) -> str | None:
    if key not in section:
        return default
    value = section.pop(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise ConfigError(_join(path, key), f"expected a string, got {type(value).__name__}")
    if choices is not None and value not in choices:
        raise ConfigError(_join(path, key), f"must be one of {', '.join(choices)}")
    return value


def _pop_pair(section: dict, key: str, path: str, default: tuple[float, float]) -> tuple[float, float]:
    if key not in section:
        return default
    value = section.pop(key)
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
    ):
        raise ConfigError(_join(path, key), "expected a [lo, hi] pair of numbers")
    return float(value[0]), float(value[1])


def _pop_float_or_list(
    section: dict, key: str, path: str, default: float, n: int
) -> tuple[float, ...]:
    if key not in section:
        return (default,) * n
    value = section.pop(key)
    if isinstance(value, (list, tuple)):
        if len(value) != n:
            raise ConfigError(_join(path, key), f"expected {n} entries, got {len(value)}")
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
            raise ConfigError(_join(path, key), "entries must be numbers")
        return tuple(float(v) for v in value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(_join(path, key), f"expected a number or list, got {type(value).__name__}")
    return (float(value),) * n


@dataclass(frozen=True)
class RunSection:
    seed: int = 0
    out: str = "out"
    format: str = "csv"


@dataclass(frozen=True)
class TransitionSection:
    """Initial conditions default to half the long-run stock and labor."""

    k0: float | None = None
    L_S0: float | None = None
    T: int = 500
    damping: float | None = None
    tol: float = 1e-10


@dataclass(frozen=True)
class DriftSection:
    enabled: bool = False
    env_hazard: float = 0.05
    tech_hazard: float = 0.10
    org_hazard: float = 0.03
    tech_start: int = 1
    tech_every: int = 5
    org_start: int = 3
    org_every: int = 7
    drop_frac: float = 0.5

    def to_drift(self, T: int) -> DriftConfig | None:
        """Materialize hazard windows for a horizon of T transitions."""
        if not self.enabled:
            return None
        return DriftConfig(
            env_hazard=self.env_hazard,
            tech_hazard=self.tech_hazard,
            org_hazard=self.org_hazard,
            tech_windows=periodic_windows(self.tech_start, self.tech_every, T),
            org_windows=periodic_windows(self.org_start, self.org_every, T),
            drop_frac=self.drop_frac,
        )


@dataclass(frozen=True)
class PortfolioSection:
    n_families: int = 8
    omega: tuple[float, ...] = (1.0,) * 8
    delta_j: tuple[float, ...] = (0.15,) * 8
    k0: tuple[float, ...] = (1.0,) * 8
    aggregator: str = "ces"
    rho: float = 0.5
    epsilon_floor: float = 1e-6
    beta: float = 0.5
    Lambda: float = 1.0
    labor_budget: float = 1.0
    T: int = 100
    entry: EntryConfig = field(default_factory=lambda: EntryConfig(mu=0.2))
    drift: DriftSection = field(default_factory=DriftSection)

    def initial_portfolio(self) -> Portfolio:
        families = tuple(
            TaskFamily(id=i, omega=self.omega[i], delta_j=self.delta_j[i], k_j=self.k0[i], born_at=0)
            for i in range(self.n_families)
        )
        spec = AggregatorSpec(
            kind=self.aggregator,
            rho=self.rho if self.aggregator == "ces" else None,
            epsilon_floor=self.epsilon_floor,
        )
        return Portfolio(
            families=families,
            aggregator=spec,
            tech=PowerCodification(beta=self.beta),
            Lambda=self.Lambda,
        )


@dataclass(frozen=True)
class RoySection:
    experiment: RoyExperiment = field(default_factory=RoyExperiment)
    treatment: str = "mu"
    factor: float = 2.0
    replications: int = 10


@dataclass(frozen=True)
class EstimateSection:
    panel: str | None = None
    rel_drop: float = 0.2
    horizon: int = 1


@dataclass(frozen=True)
class AppConfig:
    run: RunSection = field(default_factory=RunSection)
    baseline: BaselineParams = field(
        default_factory=lambda: BaselineParams(alpha=0.36, gamma=0.05, r=0.04, delta_k=0.15, eta=0.2)
    )
    priors: PriorSpec = field(default_factory=PriorSpec)
    transition: TransitionSection = field(default_factory=TransitionSection)
    portfolio: PortfolioSection = field(default_factory=PortfolioSection)
    roy: RoySection = field(default_factory=RoySection)
    estimate: EstimateSection = field(default_factory=EstimateSection)


def _parse_run(section: dict, path: str) -> RunSection:
    seed = _pop_int(section, "seed", path, 0)
    out = _pop_str(section, "out", path, "out")
    fmt = _pop_str(section, "format", path, "csv", choices=FORMATS)
    _reject_unknown(section, path)
    if seed is None or not 0 <= seed <= 2**64 - 1:
        raise ConfigError(_join(path, "seed"), "must lie in [0, 2**64 - 1]")
    if not out:
        raise ConfigError(_join(path, "out"), "must be a nonempty path")
    return RunSection(seed=seed, out=out, format=fmt)


def _parse_baseline(section: dict, path: str) -> BaselineParams:
    kwargs = {}
    defaults = AppConfig().baseline
    for name in ("alpha", "gamma", "r", "delta_k", "eta", "A_bar", "K", "L_bar"):
        kwargs[name] = _pop_float(section, name, path, getattr(defaults, name))
        if kwargs[name] is None:
            raise ConfigError(_join(path, name), "must be a number")
    _reject_unknown(section, path)
    try:
        return BaselineParams(**kwargs)
    except DomainError as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_priors(section: dict, path: str) -> PriorSpec:
    d = PriorSpec()
    alpha = _pop_pair(section, "alpha", path, (d.alpha_lo, d.alpha_hi))
    r = _pop_pair(section, "r", path, (d.r_lo, d.r_hi))
    delta = _pop_pair(section, "delta_k", path, (d.delta_lo, d.delta_hi))
    gamma = _pop_pair(section, "gamma", path, (d.gamma_lo, d.gamma_hi))
    n_draws = _pop_int(section, "n_draws", path, d.n_draws)
    _reject_unknown(section, path)
    try:
        return PriorSpec(
            alpha_lo=alpha[0],
            alpha_hi=alpha[1],
            r_lo=r[0],
            r_hi=r[1],
            delta_lo=delta[0],
            delta_hi=delta[1],
            gamma_lo=gamma[0],
            gamma_hi=gamma[1],
            n_draws=n_draws,
        )
    except DomainError as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_transition(section: dict, path: str) -> TransitionSection:
    d = TransitionSection()
    k0 = _pop_float(section, "k0", path, d.k0)
    l_s0 = _pop_float(section, "L_S0", path, d.L_S0)
    T = _pop_int(section, "T", path, d.T)
    damping = _pop_float(section, "damping", path, d.damping)
    tol = _pop_float(section, "tol", path, d.tol)
    _reject_unknown(section, path)
    if T is None or T < 1:
        raise ConfigError(_join(path, "T"), "must be an integer >= 1")
    if tol is None or tol <= 0:
        raise ConfigError(_join(path, "tol"), "must be positive")
    return TransitionSection(k0=k0, L_S0=l_s0, T=T, damping=damping, tol=tol)


def _parse_entry(section: dict, path: str) -> EntryConfig:
    d = EntryConfig(mu=0.2)
    mu = _pop_float(section, "mu", path, d.mu)
    k_seed = _pop_float(section, "k_seed", path, d.k_seed)
    omega_median = _pop_float(section, "omega_median", path, d.omega_median)
    omega_sigma = _pop_float(section, "omega_sigma", path, d.omega_sigma)
    delta = _pop_pair(section, "delta_j", path, (d.delta_lo, d.delta_hi))
    _reject_unknown(section, path)
    try:
        return EntryConfig(
            mu=mu,
            k_seed=k_seed,
            omega_median=omega_median,
            omega_sigma=omega_sigma,
            delta_lo=delta[0],
            delta_hi=delta[1],
        )
    except DomainError as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_drift(section: dict, path: str) -> DriftSection:
    d = DriftSection()
    parsed = DriftSection(
        enabled=_pop_bool(section, "enabled", path, d.enabled),
        env_hazard=_pop_float(section, "env_hazard", path, d.env_hazard),
        tech_hazard=_pop_float(section, "tech_hazard", path, d.tech_hazard),
        org_hazard=_pop_float(section, "org_hazard", path, d.org_hazard),
        tech_start=_pop_int(section, "tech_start", path, d.tech_start),
        tech_every=_pop_int(section, "tech_every", path, d.tech_every),
        org_start=_pop_int(section, "org_start", path, d.org_start),
        org_every=_pop_int(section, "org_every", path, d.org_every),
        drop_frac=_pop_float(section, "drop_frac", path, d.drop_frac),
    )
    _reject_unknown(section, path)
    # Validate the numeric fields even when drift is disabled, so a bad
    # value does not lurk until someone flips the switch.
    try:
        DriftConfig(
            env_hazard=parsed.env_hazard,
            tech_hazard=parsed.tech_hazard,
            org_hazard=parsed.org_hazard,
            tech_windows=periodic_windows(parsed.tech_start, parsed.tech_every, parsed.tech_start + 1),
            org_windows=periodic_windows(parsed.org_start, parsed.org_every, parsed.org_start + 1),
            drop_frac=parsed.drop_frac,
        )
    except DomainError as exc:
        raise ConfigError(path, str(exc)) from None
    return parsed


def _parse_portfolio(section: dict, path: str) -> PortfolioSection:
    d = PortfolioSection()
    n = _pop_int(section, "n_families", path, d.n_families)
    if n is None or n < 1:
        raise ConfigError(_join(path, "n_families"), "must be an integer >= 1")
    omega = _pop_float_or_list(section, "omega", path, 1.0, n)
    delta_j = _pop_float_or_list(section, "delta_j", path, 0.15, n)
    k0 = _pop_float_or_list(section, "k0", path, 1.0, n)
    aggregator = _pop_str(section, "aggregator", path, d.aggregator, choices=("additive", "ces"))
    rho = _pop_float(section, "rho", path, d.rho)
    epsilon_floor = _pop_float(section, "epsilon_floor", path, d.epsilon_floor)
    beta = _pop_float(section, "beta", path, d.beta)
    lam = _pop_float(section, "Lambda", path, d.Lambda)
    labor_budget = _pop_float(section, "labor_budget", path, d.labor_budget)
    T = _pop_int(section, "T", path, d.T)
    entry = _parse_entry(_as_section(section.pop("entry", None), _join(path, "entry")), _join(path, "entry"))
    drift = _parse_drift(_as_section(section.pop("drift", None), _join(path, "drift")), _join(path, "drift"))
    _reject_unknown(section, path)
    if T is None or T < 1:
        raise ConfigError(_join(path, "T"), "must be an integer >= 1")
    if labor_budget is None or labor_budget < 0:
        raise ConfigError(_join(path, "labor_budget"), "must be nonnegative")
    parsed = PortfolioSection(
        n_families=n,
        omega=omega,
        delta_j=delta_j,
        k0=k0,
        aggregator=aggregator,
        rho=rho,
        epsilon_floor=epsilon_floor,
        beta=beta,
        Lambda=lam,
        labor_budget=labor_budget,
        T=T,
        entry=entry,
        drift=drift,
    )
    try:
        parsed.initial_portfolio()
    except DomainError as exc:
        raise ConfigError(path, str(exc)) from None
    return parsed


def _parse_roy(section: dict, path: str) -> RoySection:
    d = RoyExperiment()
    exp_kwargs = dict(
        n_initial=_pop_int(section, "n_initial", path, d.n_initial),
        initial_k=_pop_float(section, "initial_k", path, d.initial_k),
        omega=_pop_float(section, "omega", path, d.omega),
        rho=_pop_float(section, "rho", path, d.rho),
        beta=_pop_float(section, "beta", path, d.beta),
        Lambda=_pop_float(section, "Lambda", path, d.Lambda),
        epsilon_floor=_pop_float(section, "epsilon_floor", path, d.epsilon_floor),
        labor_budget=_pop_float(section, "labor_budget", path, d.labor_budget),
        T=_pop_int(section, "T", path, d.T),
        mu=_pop_float(section, "mu", path, d.mu),
        k_seed=_pop_float(section, "k_seed", path, d.k_seed),
        omega_sigma=_pop_float(section, "omega_sigma", path, d.omega_sigma),
        n_workers=_pop_int(section, "n_workers", path, d.n_workers),
        sigma_young=_pop_float(section, "sigma_young", path, d.sigma_young),
        sigma_mature=_pop_float(section, "sigma_mature", path, d.sigma_mature),
        k_ref=_pop_float(section, "k_ref", path, d.k_ref),
        damping=_pop_float(section, "damping", path, d.damping),
        tol=_pop_float(section, "tol", path, d.tol),
        max_iter=_pop_int(section, "max_iter", path, d.max_iter),
        eval_window=_pop_int(section, "eval_window", path, d.eval_window),
    )
    delta = _pop_pair(section, "delta_j", path, (d.delta_lo, d.delta_hi))
    exp_kwargs["delta_lo"], exp_kwargs["delta_hi"] = delta
    treatment = _pop_str(section, "treatment", path, "mu", choices=("mu", "delta"))
    factor = _pop_float(section, "factor", path, 2.0)
    replications = _pop_int(section, "replications", path, 10)
    _reject_unknown(section, path)
    if factor is None or factor <= 0:
        raise ConfigError(_join(path, "factor"), "must be positive")
    if replications is None or replications < 1:
        raise ConfigError(_join(path, "replications"), "must be an integer >= 1")
    try:
        experiment = RoyExperiment(**exp_kwargs)
    except (DomainError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None
    return RoySection(experiment=experiment, treatment=treatment, factor=factor, replications=replications)


def _parse_estimate(section: dict, path: str) -> EstimateSection:
    d = EstimateSection()
    panel = _pop_str(section, "panel", path, d.panel)
    rel_drop = _pop_float(section, "rel_drop", path, d.rel_drop)
    horizon = _pop_int(section, "horizon", path, d.horizon)
    _reject_unknown(section, path)
    if rel_drop is None or not 0.0 < rel_drop < 1.0:
        raise ConfigError(_join(path, "rel_drop"), "must lie in (0, 1)")
    if horizon is None or horizon < 1:
        raise ConfigError(_join(path, "horizon"), "must be an integer >= 1")
    return EstimateSection(panel=panel, rel_drop=rel_drop, horizon=horizon)


def parse_config(data: Any) -> AppConfig:
    """Validate a configuration mapping and fill in defaults."""
    root = _as_section(data, "")
    cfg = AppConfig(
        run=_parse_run(_as_section(root.pop("run", None), "run"), "run"),
        baseline=_parse_baseline(_as_section(root.pop("baseline", None), "baseline"), "baseline"),
        priors=_parse_priors(_as_section(root.pop("priors", None), "priors"), "priors"),
        transition=_parse_transition(_as_section(root.pop("transition", None), "transition"), "transition"),
        portfolio=_parse_portfolio(_as_section(root.pop("portfolio", None), "portfolio"), "portfolio"),
        roy=_parse_roy(_as_section(root.pop("roy", None), "roy"), "roy"),
        estimate=_parse_estimate(_as_section(root.pop("estimate", None), "estimate"), "estimate"),
    )
    _reject_unknown(root, "")
    return cfg


def load_config(path: str | None) -> AppConfig:
    """Load a configuration file (YAML or JSON); None means all defaults."""
    if path is None:
        return parse_config({})
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError("", f"cannot read config file {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"invalid config syntax: {exc}") from None
    return parse_config(data)


def serialize(cfg: AppConfig) -> dict:
    """Fully resolved configuration mapping; parsing it reproduces ``cfg``."""
    exp = cfg.roy.experiment
    return {
        "run": {"seed": cfg.run.seed, "out": cfg.run.out, "format": cfg.run.format},
        "baseline": {
            name: getattr(cfg.baseline, name)
            for name in ("alpha", "gamma", "r", "delta_k", "eta", "A_bar", "K", "L_bar")
        },
        "priors": {
            "alpha": [cfg.priors.alpha_lo, cfg.priors.alpha_hi],
            "r": [cfg.priors.r_lo, cfg.priors.r_hi],
            "delta_k": [cfg.priors.delta_lo, cfg.priors.delta_hi],
            "gamma": [cfg.priors.gamma_lo, cfg.priors.gamma_hi],
            "n_draws": cfg.priors.n_draws,
        },
        "transition": {
            "k0": cfg.transition.k0,
            "L_S0": cfg.transition.L_S0,
            "T": cfg.transition.T,
            "damping": cfg.transition.damping,
            "tol": cfg.transition.tol,
        },
        "portfolio": {
            "n_families": cfg.portfolio.n_families,
            "omega": list(cfg.portfolio.omega),
            "delta_j": list(cfg.portfolio.delta_j),
            "k0": list(cfg.portfolio.k0),
            "aggregator": cfg.portfolio.aggregator,
            "rho": cfg.portfolio.rho,
            "epsilon_floor": cfg.portfolio.epsilon_floor,
            "beta": cfg.portfolio.beta,
            "Lambda": cfg.portfolio.Lambda,
            "labor_budget": cfg.portfolio.labor_budget,
            "T": cfg.portfolio.T,
            "entry": {
                "mu": cfg.portfolio.entry.mu,
                "k_seed": cfg.portfolio.entry.k_seed,
                "omega_median": cfg.portfolio.entry.omega_median,
                "omega_sigma": cfg.portfolio.entry.omega_sigma,
                "delta_j": [cfg.portfolio.entry.delta_lo, cfg.portfolio.entry.delta_hi],
            },
            "drift": {
                "enabled": cfg.portfolio.drift.enabled,
                "env_hazard": cfg.portfolio.drift.env_hazard,
                "tech_hazard": cfg.portfolio.drift.tech_hazard,
                "org_hazard": cfg.portfolio.drift.org_hazard,
                "tech_start": cfg.portfolio.drift.tech_start,
                "tech_every": cfg.portfolio.drift.tech_every,
                "org_start": cfg.portfolio.drift.org_start,
                "org_every": cfg.portfolio.drift.org_every,
                "drop_frac": cfg.portfolio.drift.drop_frac,
            },
        },
        "roy": {
            "n_initial": exp.n_initial,
            "initial_k": exp.initial_k,
            "omega": exp.omega,
            "delta_j": [exp.delta_lo, exp.delta_hi],
            "rho": exp.rho,
            "beta": exp.beta,
            "Lambda": exp.Lambda,
            "epsilon_floor": exp.epsilon_floor,
            "labor_budget": exp.labor_budget,
            "T": exp.T,
            "mu": exp.mu,
            "k_seed": exp.k_seed,
            "omega_sigma": exp.omega_sigma,
            "n_workers": exp.n_workers,
            "sigma_young": exp.sigma_young,
            "sigma_mature": exp.sigma_mature,
            "k_ref": exp.k_ref,
            "damping": exp.damping,
            "tol": exp.tol,
            "max_iter": exp.max_iter,
            "eval_window": exp.eval_window,
            "treatment": cfg.roy.treatment,
            "factor": cfg.roy.factor,
            "replications": cfg.roy.replications,
        },
        "estimate": {
            "panel": cfg.estimate.panel,
            "rel_drop": cfg.estimate.rel_drop,
            "horizon": cfg.estimate.horizon,
        },
    }


def dump_yaml(cfg: AppConfig) -> str:
    """Canonical YAML rendering of a resolved configuration."""
    return yaml.safe_dump(serialize(cfg), sort_keys=True, default_flow_style=False)


def with_overrides(
    cfg: AppConfig,
    seed: int | None = None,
    out: str | None = None,
    fmt: str | None = None,
) -> AppConfig:
    """Apply command-line overrides to the run section."""
    run = cfg.run
    if seed is not None:
        if not 0 <= seed <= 2**64 - 1:
            raise ConfigError("run.seed", "must lie in [0, 2**64 - 1]")
        run = replace(run, seed=seed)
    if out is not None:
        run = replace(run, out=out)
    if fmt is not None:
        if fmt not in FORMATS:
            raise ConfigError("run.format", f"must be one of {', '.join(FORMATS)}")
        run = replace(run, format=fmt)
    return replace(cfg, run=run)
