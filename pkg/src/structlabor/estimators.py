"""Estimators over maturity panels.

A maturity panel records family-period observations of maturity levels
together with flags for the hazard windows in force.  From it one can
flag sudden degradations, decompose the degradation hazard into ambient,
technology-window, and organization-window components, count family
births, and rebuild aggregate indices period by period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


@dataclass(frozen=True, eq=False)
class MaturityPanel:
    """Family-period maturity observations with hazard-window flags.

    Arrays are parallel; (family_id, period) pairs must be unique.  The
    panel may be unbalanced: families can enter after period zero, and
    gaps are tolerated (estimators only use consecutive-period pairs).
    """

    family_id: np.ndarray
    period: np.ndarray
    maturity: np.ndarray
    tech_window: np.ndarray
    org_window: np.ndarray

    def __post_init__(self) -> None:
        fam = np.asarray(self.family_id, dtype=np.int64)
        per = np.asarray(self.period, dtype=np.int64)
        mat = np.asarray(self.maturity, dtype=float)
        tw = np.asarray(self.tech_window, dtype=bool)
        ow = np.asarray(self.org_window, dtype=bool)
        n = fam.shape[0]
        for arr, name in ((per, "period"), (mat, "maturity"), (tw, "tech_window"), (ow, "org_window")):
            _require(arr.ndim == 1 and arr.shape[0] == n, f"{name} must parallel family_id")
        if n:
            _require(bool(np.all(per >= 0)), "periods must be nonnegative")
            _require(bool(np.all(np.isfinite(mat)) and np.all(mat >= 0.0)), "maturities must be finite and nonnegative")
            pairs = np.stack([fam, per], axis=1)
            _require(np.unique(pairs, axis=0).shape[0] == n, "(family_id, period) pairs must be unique")
        for name, arr in (
            ("family_id", fam),
            ("period", per),
            ("maturity", mat),
            ("tech_window", tw),
            ("org_window", ow),
        ):
            object.__setattr__(self, name, arr)

    @property
    def n_obs(self) -> int:
        return int(self.family_id.shape[0])

    @classmethod
    def from_records(
        cls, records: Iterable[tuple[int, int, float, bool, bool]]
    ) -> "MaturityPanel":
        """Build a panel from (family_id, period, maturity, tech, org) rows."""
        rows = list(records)
        if rows:
            fam, per, mat, tw, ow = zip(*rows)
        else:
            fam = per = mat = tw = ow = ()
        return cls(
            family_id=np.asarray(fam, dtype=np.int64),
            period=np.asarray(per, dtype=np.int64),
            maturity=np.asarray(mat, dtype=float),
            tech_window=np.asarray(tw, dtype=bool),
            org_window=np.asarray(ow, dtype=bool),
        )

    @classmethod
    def from_scenario(cls, scenario) -> "MaturityPanel":
        """Adapt a portfolio scenario result into a panel."""
        return cls(
            family_id=scenario.family_id,
            period=scenario.period,
            maturity=scenario.maturity,
            tech_window=scenario.tech_window,
            org_window=scenario.org_window,
        )


@dataclass(frozen=True, eq=False)
class DegradationFlags:
    """Per-observation degradation indicators.

    One entry per family-period whose next consecutive period is also
    observed; ``flag`` marks a relative maturity drop beyond the
    threshold over that transition.  Window flags are those in force at
    the start of the transition.
    """

    family_id: np.ndarray
    period: np.ndarray
    flag: np.ndarray
    tech_window: np.ndarray
    org_window: np.ndarray

    @property
    def n_obs(self) -> int:
        return int(self.flag.shape[0])


def detect_degradation(panel: MaturityPanel, rel_drop: float = 0.2, horizon: int = 1) -> DegradationFlags:
    """Flag maturity drops of at least ``rel_drop`` over ``horizon`` periods.

    An observation (j, t) is flagged when k_{j,t+h} < (1 - rel_drop) * k_{j,t}.
    Observations whose t + h is missing are skipped; a family-period with
    zero maturity cannot register a further relative drop and is kept
    unflagged.
    """
    _require(panel.n_obs > 0, "panel is empty")
    _require(math.isfinite(rel_drop) and 0.0 < rel_drop < 1.0, "rel_drop must lie in (0, 1)")
    _require(isinstance(horizon, int) and horizon >= 1, "horizon must be an integer >= 1")

    order = np.lexsort((panel.period, panel.family_id))
    fam = panel.family_id[order]
    per = panel.period[order]
    mat = panel.maturity[order]
    tw = panel.tech_window[order]
    ow = panel.org_window[order]

    # Positions of (family, period + horizon) found by searching the sorted keys.
    key = fam * (per.max() + horizon + 1) + per
    target = fam * (per.max() + horizon + 1) + per + horizon
    pos = np.searchsorted(key, target)
    pos = np.clip(pos, 0, key.shape[0] - 1)
    has_next = key[pos] == target

    base = mat[has_next]
    nxt = mat[pos[has_next]]
    flags = nxt < (1.0 - rel_drop) * base
    return DegradationFlags(
        family_id=fam[has_next],
        period=per[has_next],
        flag=flags,
        tech_window=tw[has_next],
        org_window=ow[has_next],
    )


@dataclass(frozen=True)
class CellStat:
    """Empirical degradation frequency within one window cell."""

    mean: float
    count: int


@dataclass(frozen=True, eq=False)
class HazardEstimate:
    """Additive decomposition of the degradation hazard.

    Components are marginal effects from the saturated cell-means fit on
    the window flags: ``env`` is the no-window frequency, ``tech`` and
    ``org`` are the frequency increases when the respective window is in
    force alone.  A component is None when the panel contains no cell
    that identifies it.  Standard errors are binomial.
    """

    delta_hat: float
    env: float | None
    tech: float | None
    org: float | None
    se_env: float | None
    se_tech: float | None
    se_org: float | None
    n_obs: int
    cells: Mapping[tuple[bool, bool], CellStat]


def _binomial_se(mean: float, count: int) -> float:
    return math.sqrt(mean * (1.0 - mean) / count)


def estimate_hazard_decomposition(flags: DegradationFlags) -> HazardEstimate:
    """Decompose degradation frequency into window components.

    Fits cell means on the full cross of (tech_window, org_window).  The
    ambient component is the (False, False) cell mean; window components
    are differences of the single-window cells from the ambient cell,
    clipped at zero.  Cells are exact empirical frequencies, so with
    non-overlapping windows the components are plain frequency
    differences.  The total ``delta_hat`` sums the identified components.
    """
    _require(flags.n_obs > 0, "no degradation observations")
    cells: dict[tuple[bool, bool], CellStat] = {}
    for in_tech in (False, True):
        for in_org in (False, True):
            mask = (flags.tech_window == in_tech) & (flags.org_window == in_org)
            count = int(np.sum(mask))
            if count:
                cells[(in_tech, in_org)] = CellStat(mean=float(np.mean(flags.flag[mask])), count=count)

    base = cells.get((False, False))
    _require(base is not None, "panel has no observations outside every window")

    env = base.mean
    se_env = _binomial_se(base.mean, base.count)

    def component(cell_key: tuple[bool, bool]) -> tuple[float | None, float | None]:
        cell = cells.get(cell_key)
        if cell is None:
            return None, None
        effect = max(0.0, cell.mean - base.mean)
        se = math.sqrt(_binomial_se(cell.mean, cell.count) ** 2 + se_env**2)
        return effect, se

    tech, se_tech = component((True, False))
    org, se_org = component((False, True))

    delta_hat = env + (tech or 0.0) + (org or 0.0)
    return HazardEstimate(
        delta_hat=delta_hat,
        env=env,
        tech=tech,
        org=org,
        se_env=se_env,
        se_tech=se_tech,
        se_org=se_org,
        n_obs=flags.n_obs,
        cells=cells,
    )


def count_births(registry: Iterable, T: int | None = None) -> np.ndarray:
    """Births per period from a family registry.

    ``registry`` yields task families (or plain birth periods).  Returns
    the per-period birth counts, the empirical counterpart of the entry
    intensity; index t holds the number of families first appearing at t.
    Families born at period zero are the initial stock and are included.
    """
    born = [int(getattr(f, "born_at", f)) for f in registry]
    _require(all(b >= 0 for b in born), "birth periods must be nonnegative")
    horizon = (max(born) + 1) if born else 0
    if T is not None:
        _require(isinstance(T, int) and T >= 0, "T must be a nonnegative integer")
        _require(horizon <= T + 1, "registry contains births beyond T")
        horizon = T + 1
    counts = np.zeros(horizon, dtype=np.int64)
    for b in born:
        counts[b] += 1
    return counts


@dataclass(frozen=True)
class IndexPoint:
    """Aggregate indices rebuilt from a panel at one period."""

    period: int
    capability: float
    maintenance_share: float
    n_families: int
    missing_weights: tuple[int, ...]


def indices(
    panel: MaturityPanel,
    t: int,
    weights: Mapping[int, float],
    labor_total: float,
    L_bar: float,
    aggregator=None,
) -> IndexPoint:
    """Rebuild the aggregate capability index and maintenance share at t.

    ``weights`` maps family id to its importance weight; families present
    at t but missing from the map are skipped and reported.  With no
    ``aggregator`` the index is the weighted sum of maturities; passing
    an :class:`~structlabor.portfolio.AggregatorSpec` applies its CES
    form instead.  The maintenance share is labor_total / L_bar.
    """
    _require(panel.n_obs > 0, "panel is empty")
    _require(L_bar > 0.0, "L_bar must be positive")
    _require(math.isfinite(labor_total) and labor_total >= 0.0, "labor_total must be nonnegative")
    at_t = panel.period == t
    _require(bool(np.any(at_t)), f"panel has no observations at period {t}")
    fams = panel.family_id[at_t]
    mats = panel.maturity[at_t]
    known = np.asarray([int(f) in weights for f in fams], dtype=bool)
    missing = tuple(int(f) for f in fams[~known])
    fams = fams[known]
    mats = mats[known]
    _require(fams.shape[0] > 0, f"no weighted families at period {t}")
    w = np.asarray([float(weights[int(f)]) for f in fams])
    if aggregator is None or aggregator.kind == "additive":
        cap = float(np.dot(w, mats))
    else:
        rho = float(aggregator.rho)
        if rho < 0.0 and np.any(mats == 0.0):
            cap = 0.0
        else:
            cap = float(np.dot(w, np.power(mats, rho)) ** (1.0 / rho))
    return IndexPoint(
        period=int(t),
        capability=cap,
        maintenance_share=labor_total / L_bar,
        n_families=int(fams.shape[0]),
        missing_weights=missing,
    )
