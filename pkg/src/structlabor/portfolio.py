"""Task-family portfolio: many capability stocks under one labor budget.

The economy-wide capability stock is disaggregated into task families,
each with its own maturity (stock level), decay rate, and importance
weight.  A concave codification technology turns labor assigned to a
family into new maturity; an aggregator (additive or CES) combines the
family stocks into the economy-wide index.  Each period a fixed
maintenance-labor budget is split across families to maximize the
weighted sum of codification output, new families arrive at random with
near-zero maturity, and optional drift events knock maturity down in
designated periods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError
from .rng import poisson_inverse_cdf, stream

_BISECT_STEPS = 200


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


def _finite(value: float, name: str) -> float:
    value = float(value)
    _require(math.isfinite(value), f"{name} must be finite")
    return value


@dataclass(frozen=True)
class TaskFamily:
    """One task family: importance weight, decay rate, maturity, birth period."""

    id: int
    omega: float
    delta_j: float
    k_j: float
    born_at: int = 0

    def __post_init__(self) -> None:
        _require(isinstance(self.id, int) and self.id >= 0, "family id must be a nonnegative integer")
        _require(_finite(self.omega, "omega") > 0.0, "omega must be positive")
        _finite(self.delta_j, "delta_j")
        _require(0.0 < self.delta_j < 1.0, "delta_j must lie in (0, 1)")
        _require(_finite(self.k_j, "k_j") >= 0.0, "maturity must be nonnegative")
        _require(isinstance(self.born_at, int) and self.born_at >= 0, "born_at must be a nonnegative integer")


@dataclass(frozen=True)
class PowerCodification:
    """Power-law codification technology g(l) = l**beta with beta in (0, 1).

    Concave with infinite marginal product at zero labor, so every family
    with positive weight receives some labor in an optimal split.
    """

    beta: float = 0.5

    def __post_init__(self) -> None:
        _finite(self.beta, "beta")
        _require(0.0 < self.beta < 1.0, "beta must lie in (0, 1)")

    def g(self, labor):
        """Codification output from ``labor`` (scalar or array, >= 0)."""
        return np.power(labor, self.beta)

    def g_prime(self, labor):
        """Marginal codification product; infinite at zero labor."""
        with np.errstate(divide="ignore"):
            return self.beta * np.power(labor, self.beta - 1.0)

    def g_inv(self, y):
        """Labor needed to codify ``y`` units of maturity."""
        return np.power(y, 1.0 / self.beta)

    def g_prime_inv(self, m):
        """Labor at which the marginal product equals ``m`` (> 0)."""
        return np.power(np.asarray(m, dtype=float) / self.beta, -1.0 / (1.0 - self.beta))


def validate_codification(tech, points: Sequence[float] = (0.25, 0.5, 1.0, 2.0, 4.0)) -> None:
    """Numerically check the shape restrictions on a codification technology.

    Requires g(0) = 0, a positive and strictly decreasing marginal
    product at the sample points, and consistent inverses.  Raises
    :class:`DomainError` on the first violation.
    """
    _require(float(tech.g(0.0)) == 0.0, "codification must satisfy g(0) = 0")
    pts = sorted(float(p) for p in points)
    _require(len(pts) >= 2 and pts[0] > 0.0, "need at least two positive sample points")
    previous = math.inf
    for p in pts:
        m = float(tech.g_prime(p))
        _require(m > 0.0, "marginal codification product must be positive")
        _require(m < previous, "marginal codification product must be strictly decreasing")
        previous = m
        _require(
            abs(float(tech.g_inv(float(tech.g(p)))) - p) <= 1e-9 * max(1.0, p),
            "g_inv must invert g",
        )
        _require(
            abs(float(tech.g_prime_inv(m)) - p) <= 1e-9 * max(1.0, p),
            "g_prime_inv must invert g_prime",
        )


@dataclass(frozen=True)
class AggregatorSpec:
    """How family maturities combine into the economy-wide capability index.

    kind "additive" sums omega_j * k_j.  kind "ces" uses the CES form
    (sum omega_j * k_j**rho)**(1/rho) with rho <= 1, rho != 0; rho < 0
    makes families complements, and any family at zero maturity then
    drives the whole index to zero.  ``epsilon_floor`` is the maturity
    floor applied when differentiating the CES index so that newborn
    families have finite marginal weights.
    """

    kind: str = "additive"
    rho: float | None = None
    epsilon_floor: float = 1e-6

    def __post_init__(self) -> None:
        _require(self.kind in ("additive", "ces"), "aggregator kind must be 'additive' or 'ces'")
        if self.kind == "ces":
            _require(self.rho is not None, "ces aggregator needs rho")
            _finite(self.rho, "rho")
            _require(self.rho <= 1.0 and self.rho != 0.0, "rho must satisfy rho <= 1, rho != 0")
        _require(_finite(self.epsilon_floor, "epsilon_floor") > 0.0, "epsilon_floor must be positive")


@dataclass(frozen=True)
class Portfolio:
    """A set of task families plus the aggregator, technology, and scale.

    ``Lambda`` is the economy-wide value of a marginal unit of aggregate
    capability; it scales effective weights and prices but cancels out of
    the labor allocation.  Families are kept sorted by id.
    """

    families: tuple[TaskFamily, ...]
    aggregator: AggregatorSpec = field(default_factory=AggregatorSpec)
    tech: PowerCodification = field(default_factory=PowerCodification)
    Lambda: float = 1.0

    def __post_init__(self) -> None:
        _require(_finite(self.Lambda, "Lambda") > 0.0, "Lambda must be positive")
        ids = [f.id for f in self.families]
        _require(len(set(ids)) == len(ids), "family ids must be unique")
        _require(list(ids) == sorted(ids), "families must be sorted by id")

    @property
    def size(self) -> int:
        return len(self.families)

    def ids(self) -> tuple[int, ...]:
        return tuple(f.id for f in self.families)

    def omegas(self) -> np.ndarray:
        return np.array([f.omega for f in self.families], dtype=float)

    def deltas(self) -> np.ndarray:
        return np.array([f.delta_j for f in self.families], dtype=float)

    def stocks(self) -> np.ndarray:
        return np.array([f.k_j for f in self.families], dtype=float)


@dataclass(frozen=True, eq=False)
class AllocationResult:
    """An optimal labor split: per-family labor, multiplier, and residual.

    ``kkt_residual`` is the spread of weighted marginal products across
    families that received labor; it is zero at an exact optimum.
    """

    family_ids: tuple[int, ...]
    labor: np.ndarray
    total: float
    multiplier: float
    kkt_residual: float


def aggregate_capability(portfolio: Portfolio) -> float:
    """Economy-wide capability index implied by current maturities."""
    _require(portfolio.size >= 1, "portfolio has no families")
    omega = portfolio.omegas()
    k = portfolio.stocks()
    agg = portfolio.aggregator
    if agg.kind == "additive":
        return float(np.dot(omega, k))
    rho = float(agg.rho)
    if rho < 0.0 and np.any(k == 0.0):
        # Complements: one dead family zeroes the index.
        return 0.0
    return float(np.dot(omega, np.power(k, rho)) ** (1.0 / rho))


def effective_weights(portfolio: Portfolio) -> np.ndarray:
    """Marginal value of maturity by family, scaled by Lambda.

    For the additive aggregator this is Lambda * omega_j.  For CES it is
    Lambda times the gradient of the index, evaluated with every maturity
    floored at ``epsilon_floor`` so that entrants with (near-)zero stocks
    get large but finite weights.
    """
    _require(portfolio.size >= 1, "portfolio has no families")
    omega = portfolio.omegas()
    agg = portfolio.aggregator
    if agg.kind == "additive":
        return portfolio.Lambda * omega
    rho = float(agg.rho)
    k = np.maximum(portfolio.stocks(), agg.epsilon_floor)
    inner = float(np.dot(omega, np.power(k, rho)))
    # d/dk_j of (sum omega k^rho)^(1/rho) = omega_j k_j^(rho-1) * index^(1-rho)
    return portfolio.Lambda * omega * np.power(k, rho - 1.0) * inner ** ((1.0 - rho) / rho)


def allocate_labor(portfolio: Portfolio, L_S: float, solver: str = "auto") -> AllocationResult:
    """Split the labor budget to maximize weighted codification output.

    Maximizes sum_j w_j * g(l_j) subject to sum_j l_j = L_S, l_j >= 0,
    where w_j are the effective weights.  The optimum equalizes
    w_j * g'(l_j) across served families at the multiplier nu.

    solver "closed_form" uses the power-technology solution
    l_j proportional to w_j**(1/(1-beta)); "bisection" solves the
    multiplier equation sum_j g'^{-1}(nu / w_j) = L_S by monotone
    bisection and works for any concave technology; "auto" picks the
    closed form for :class:`PowerCodification`.
    """
    _require(portfolio.size >= 1, "portfolio has no families")
    _require(_finite(L_S, "L_S") >= 0.0, "labor budget must be nonnegative")
    _require(solver in ("auto", "closed_form", "bisection"), "unknown solver")
    w = effective_weights(portfolio)
    ids = portfolio.ids()
    if L_S == 0.0:
        return AllocationResult(
            family_ids=ids,
            labor=np.zeros(portfolio.size),
            total=0.0,
            multiplier=math.inf,
            kkt_residual=0.0,
        )

    tech = portfolio.tech
    if solver == "closed_form" or (solver == "auto" and isinstance(tech, PowerCodification)):
        shares = np.power(w, 1.0 / (1.0 - tech.beta))
        labor = L_S * shares / shares.sum()
    else:
        labor = _allocate_bisection(tech, w, L_S)
        # Uniform rescale to land exactly on the budget; for power-law
        # technologies this leaves the marginal conditions untouched.
        labor = labor * (L_S / labor.sum())

    active = labor > 0.0
    marginal = w[active] * np.asarray(tech.g_prime(labor[active]), dtype=float)
    return AllocationResult(
        family_ids=ids,
        labor=labor,
        total=float(labor.sum()),
        multiplier=float(np.max(marginal)),
        kkt_residual=float(np.max(marginal) - np.min(marginal)),
    )


def _allocate_bisection(tech, w: np.ndarray, L_S: float) -> np.ndarray:
    """Solve the allocation multiplier by bisection.

    Total labor demand sum_j g'^{-1}(nu / w_j) is continuous and strictly
    decreasing in nu, diverges as nu -> 0, and vanishes as nu -> inf, so
    the budget constraint has a unique root.
    """

    def demand(nu: float) -> float:
        return float(np.sum(tech.g_prime_inv(nu / w)))

    nu = float(np.median(w) * tech.g_prime(L_S / len(w)))
    lo = hi = nu
    while demand(lo) < L_S:
        lo /= 2.0
        _require(lo > 0.0, "bisection failed to bracket the multiplier from below")
    while demand(hi) > L_S:
        hi *= 2.0
        _require(math.isfinite(hi), "bisection failed to bracket the multiplier from above")
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if demand(mid) > L_S:
            lo = mid
        else:
            hi = mid
    return np.asarray(tech.g_prime_inv(0.5 * (lo + hi) / w), dtype=float)


def maintenance_labor(family: TaskFamily, tech) -> float:
    """Labor that exactly offsets one period of decay at current maturity.

    Solves g(l) = delta_j * k_j, the inflow needed to hold the family's
    maturity constant.
    """
    return float(tech.g_inv(family.delta_j * family.k_j))


@dataclass(frozen=True)
class EntryConfig:
    """Arrival process for new task families.

    Births per period are Poisson with intensity ``mu``.  Entrants start
    at maturity ``k_seed`` (near zero), draw their importance weight from
    a log-normal with the given median and log-scale sigma, and draw
    their decay rate uniformly from [delta_lo, delta_hi].
    """

    mu: float = 0.0
    k_seed: float = 1e-3
    omega_median: float = 1.0
    omega_sigma: float = 0.5
    delta_lo: float = 0.08
    delta_hi: float = 0.25

    def __post_init__(self) -> None:
        _require(_finite(self.mu, "mu") >= 0.0, "entry intensity must be nonnegative")
        _require(_finite(self.k_seed, "k_seed") >= 0.0, "k_seed must be nonnegative")
        _require(_finite(self.omega_median, "omega_median") > 0.0, "omega_median must be positive")
        _require(_finite(self.omega_sigma, "omega_sigma") >= 0.0, "omega_sigma must be nonnegative")
        _finite(self.delta_lo, "delta_lo")
        _finite(self.delta_hi, "delta_hi")
        _require(0.0 < self.delta_lo <= self.delta_hi < 1.0, "entry delta range must lie in (0, 1)")


def _draw_entrants(
    entry: EntryConfig, gen: np.random.Generator, next_id: int, born_at: int
) -> list[TaskFamily]:
    """Draw the period's entrants.

    One uniform decides the birth count by inversion; each entrant then
    consumes one normal (weight) and one uniform (decay) in slot order,
    so two runs that share the generator state produce identical early
    entrants even if one run goes on to draw more.
    """
    count = poisson_inverse_cdf(gen, entry.mu)
    entrants = []
    for slot in range(count):
        omega = entry.omega_median * math.exp(entry.omega_sigma * gen.standard_normal())
        delta = gen.uniform(entry.delta_lo, entry.delta_hi)
        entrants.append(
            TaskFamily(
                id=next_id + slot,
                omega=float(omega),
                delta_j=float(delta),
                k_j=entry.k_seed,
                born_at=born_at,
            )
        )
    return entrants


def step_portfolio(
    portfolio: Portfolio,
    allocation: AllocationResult,
    entry: EntryConfig,
    gen: np.random.Generator,
    next_period: int,
) -> Portfolio:
    """Advance maturities one period and append any entrants.

    Each family decays and receives its allocated codification inflow:
    k' = (1 - delta_j) * k_j + g(l_j).  Entrants are appended with
    ``born_at = next_period`` and ids continuing after the current
    maximum.  Families never exit.
    """
    _require(allocation.family_ids == portfolio.ids(), "allocation does not match portfolio families")
    _require(isinstance(next_period, int) and next_period >= 1, "next_period must be an integer >= 1")
    inflow = np.asarray(portfolio.tech.g(allocation.labor), dtype=float)
    updated = [
        TaskFamily(
            id=f.id,
            omega=f.omega,
            delta_j=f.delta_j,
            k_j=float((1.0 - f.delta_j) * f.k_j + inflow[i]),
            born_at=f.born_at,
        )
        for i, f in enumerate(portfolio.families)
    ]
    next_id = updated[-1].id + 1 if updated else 0
    updated.extend(_draw_entrants(entry, gen, next_id, next_period))
    return Portfolio(
        families=tuple(updated),
        aggregator=portfolio.aggregator,
        tech=portfolio.tech,
        Lambda=portfolio.Lambda,
    )


@dataclass(frozen=True)
class DriftConfig:
    """Hazard of sudden maturity loss, decomposed by source.

    In every period each family independently suffers a degradation
    event with probability env_hazard, plus tech_hazard in periods listed
    in ``tech_windows``, plus org_hazard in periods listed in
    ``org_windows``.  An event multiplies maturity by (1 - drop_frac).
    """

    env_hazard: float = 0.0
    tech_hazard: float = 0.0
    org_hazard: float = 0.0
    tech_windows: frozenset[int] = frozenset()
    org_windows: frozenset[int] = frozenset()
    drop_frac: float = 0.5

    def __post_init__(self) -> None:
        for name in ("env_hazard", "tech_hazard", "org_hazard"):
            _require(0.0 <= _finite(getattr(self, name), name) <= 1.0, f"{name} must lie in [0, 1]")
        total = self.env_hazard + self.tech_hazard + self.org_hazard
        _require(total <= 1.0, "combined hazard must not exceed 1")
        _finite(self.drop_frac, "drop_frac")
        _require(0.0 < self.drop_frac < 1.0, "drop_frac must lie in (0, 1)")
        _require(all(isinstance(t, int) and t >= 0 for t in self.tech_windows), "window periods must be nonnegative integers")
        _require(all(isinstance(t, int) and t >= 0 for t in self.org_windows), "window periods must be nonnegative integers")

    def hazard_at(self, t: int) -> float:
        return (
            self.env_hazard
            + (self.tech_hazard if t in self.tech_windows else 0.0)
            + (self.org_hazard if t in self.org_windows else 0.0)
        )


def periodic_windows(start: int, every: int, T: int) -> frozenset[int]:
    """Periods start, start+every, ... below T."""
    _require(isinstance(every, int) and every >= 1, "window spacing must be an integer >= 1")
    _require(isinstance(start, int) and start >= 0, "window start must be nonnegative")
    return frozenset(range(start, T, every))


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    """Output of a portfolio scenario.

    The panel arrays are parallel and sorted by (period, family id); one
    row records a family's state and allocation at the start of a period.
    Window flags mark the hazard windows in force during the transition
    out of that period.  ``events`` lists the (family_id, period) pairs
    where a degradation event actually fired, for use as ground truth
    when exercising estimators.
    """

    family_id: np.ndarray
    period: np.ndarray
    maturity: np.ndarray
    labor: np.ndarray
    effective_weight: np.ndarray
    tech_window: np.ndarray
    org_window: np.ndarray
    periods: np.ndarray
    capability: np.ndarray
    labor_budget: np.ndarray
    final: Portfolio
    events: tuple[tuple[int, int], ...]

    def birth_registry(self) -> tuple[TaskFamily, ...]:
        return self.final.families

    def portfolio_at(self, t: int) -> Portfolio:
        """Reconstruct the portfolio as it stood at the start of period t."""
        at_t = self.period == t
        _require(bool(np.any(at_t)), f"scenario has no period {t}")
        stocks = {int(f): float(k) for f, k in zip(self.family_id[at_t], self.maturity[at_t])}
        families = tuple(
            TaskFamily(id=f.id, omega=f.omega, delta_j=f.delta_j, k_j=stocks[f.id], born_at=f.born_at)
            for f in self.final.families
            if f.id in stocks
        )
        return Portfolio(
            families=families,
            aggregator=self.final.aggregator,
            tech=self.final.tech,
            Lambda=self.final.Lambda,
        )


def run_portfolio_scenario(
    portfolio: Portfolio,
    labor_budget: float | Sequence[float],
    entry: EntryConfig,
    T: int,
    seed: int,
    drift: DriftConfig | None = None,
) -> ScenarioResult:
    """Simulate the portfolio for T transitions and record a maturity panel.

    Timing within period t: allocate the period's budget and record every
    family's (maturity, labor, effective weight); apply decay and
    codification inflow; apply drift events drawn for period t; append
    entrants, who first receive labor at t + 1.  The panel covers periods
    0..T, where the final period records the post-transition state and
    the allocation it would receive.

    Randomness is organized in per-period substreams keyed by ``seed``:
    "drift" uniforms are consumed in family-id order and "entry" draws in
    slot order, so scenarios sharing a seed share event and entrant draws
    for every family they have in common.
    """
    _require(isinstance(T, int) and T >= 1, "T must be an integer >= 1")
    if np.isscalar(labor_budget):
        budgets = np.full(T + 1, float(labor_budget))
    else:
        budgets = np.asarray(labor_budget, dtype=float)
        _require(budgets.shape == (T + 1,), "labor budget path must have length T + 1")
    _require(bool(np.all(np.isfinite(budgets)) and np.all(budgets >= 0.0)), "labor budgets must be nonnegative")

    fam_id: list[int] = []
    per: list[int] = []
    mat: list[float] = []
    lab: list[float] = []
    eff: list[float] = []
    techw: list[bool] = []
    orgw: list[bool] = []
    capability = np.empty(T + 1)
    events: list[tuple[int, int]] = []

    p = portfolio
    for t in range(T + 1):
        alloc = allocate_labor(p, float(budgets[t]))
        w = effective_weights(p)
        in_tech = drift is not None and t in drift.tech_windows
        in_org = drift is not None and t in drift.org_windows
        for i, f in enumerate(p.families):
            fam_id.append(f.id)
            per.append(t)
            mat.append(f.k_j)
            lab.append(float(alloc.labor[i]))
            eff.append(float(w[i]))
            techw.append(in_tech)
            orgw.append(in_org)
        capability[t] = aggregate_capability(p)
        if t == T:
            break

        stepped = step_portfolio(p, alloc, entry, stream(seed, "entry", t), next_period=t + 1)
        if drift is not None:
            hazard = drift.hazard_at(t)
            u = stream(seed, "drift", t).uniform(size=p.size)
            hit = u < hazard
            if np.any(hit):
                families = list(stepped.families)
                for i in np.flatnonzero(hit):
                    f = families[i]
                    families[i] = TaskFamily(
                        id=f.id,
                        omega=f.omega,
                        delta_j=f.delta_j,
                        k_j=f.k_j * (1.0 - drift.drop_frac),
                        born_at=f.born_at,
                    )
                    events.append((f.id, t))
                stepped = Portfolio(
                    families=tuple(families),
                    aggregator=stepped.aggregator,
                    tech=stepped.tech,
                    Lambda=stepped.Lambda,
                )
        p = stepped

    return ScenarioResult(
        family_id=np.asarray(fam_id, dtype=np.int64),
        period=np.asarray(per, dtype=np.int64),
        maturity=np.asarray(mat, dtype=float),
        labor=np.asarray(lab, dtype=float),
        effective_weight=np.asarray(eff, dtype=float),
        tech_window=np.asarray(techw, dtype=bool),
        org_window=np.asarray(orgw, dtype=bool),
        periods=np.arange(T + 1, dtype=np.int64),
        capability=capability,
        labor_budget=budgets,
        final=p,
        events=tuple(events),
    )
