"""Monte Carlo calibration of the long-run maintenance share.

Parameters are drawn from independent uniform priors and pushed through
the closed-form share.  Draws are addressed by index on a counter-based
generator: draw ``i`` occupies Philox counter block ``i``, so the sample
is identical whether it is generated in one block, in chunks, or in
parallel, and any sub-range can be regenerated without the rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import structured_share
from .errors import DomainError
from .rng import check_seed, indexed_uniforms

# Column order of the four uniforms consumed by each draw.
PARAM_ORDER = ("alpha", "r", "delta_k", "gamma")


def _check_interval(lo: float, hi: float, name: str, open_lo: float, open_hi: float) -> None:
    for v, side in ((lo, "lo"), (hi, "hi")):
        if not math.isfinite(v):
            raise DomainError(f"{name}_{side} must be finite")
    if not lo <= hi:
        raise DomainError(f"{name} prior must have lo <= hi")
    if not (open_lo < lo and hi < open_hi):
        raise DomainError(f"{name} prior must stay inside ({open_lo}, {open_hi})")


@dataclass(frozen=True)
class PriorSpec:
    """Independent uniform priors over the four share parameters.

    Defaults reproduce the benchmark calibration: capital share in
    [0.33, 0.40], discount rate in [0.03, 0.05], capability decay in
    [0.08, 0.25], capability elasticity in [0.02, 0.08], with 200,000
    draws.  Degenerate (point-mass) priors with lo == hi are allowed.
    """

    alpha_lo: float = 0.33
    alpha_hi: float = 0.40
    r_lo: float = 0.03
    r_hi: float = 0.05
    delta_lo: float = 0.08
    delta_hi: float = 0.25
    gamma_lo: float = 0.02
    gamma_hi: float = 0.08
    n_draws: int = 200_000
    seed: int = 0

    def __post_init__(self) -> None:
        _check_interval(self.alpha_lo, self.alpha_hi, "alpha", 0.0, 1.0)
        _check_interval(self.r_lo, self.r_hi, "r", 0.0, math.inf)
        _check_interval(self.delta_lo, self.delta_hi, "delta", 0.0, 1.0)
        _check_interval(self.gamma_lo, self.gamma_hi, "gamma", 0.0, 1.0)
        if not (isinstance(self.n_draws, int) and self.n_draws >= 1):
            raise DomainError("n_draws must be an integer >= 1")
        check_seed(self.seed)


@dataclass(frozen=True)
class CalibrationResult:
    """Summary statistics of the simulated share distribution, in percent."""

    mean: float
    median: float
    std_dev: float
    q2_5: float
    q10: float
    q90: float
    q97_5: float
    share_min: float
    share_max: float
    pr_gt_5pct: float
    pr_gt_8pct: float
    n_draws: int
    seed: int

    def __post_init__(self) -> None:
        chain = (
            self.share_min,
            self.q2_5,
            self.q10,
            self.median,
            self.q90,
            self.q97_5,
            self.share_max,
        )
        for lo, hi in zip(chain, chain[1:]):
            if lo > hi:
                raise DomainError("quantiles must be nondecreasing")
        for p in (self.pr_gt_5pct, self.pr_gt_8pct):
            if not 0.0 <= p <= 1.0:
                raise DomainError("exceedance probabilities must lie in [0, 1]")


def sample_parameters(
    priors: PriorSpec, start: int = 0, count: int | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Parameter draws for indices [start, start+count).

    Returns ``(alpha, r, delta_k, gamma)`` arrays.  Draw ``i`` consumes
    the four uniforms of counter block ``i`` in that fixed order, so the
    value of a draw depends only on the prior seed and its index.
    """
    if count is None:
        count = priors.n_draws - start
    if start < 0 or count < 0 or start + count > priors.n_draws:
        raise DomainError("draw range must lie within [0, n_draws]")
    u = indexed_uniforms(priors.seed, start, count)
    alpha = priors.alpha_lo + (priors.alpha_hi - priors.alpha_lo) * u[:, 0]
    r = priors.r_lo + (priors.r_hi - priors.r_lo) * u[:, 1]
    delta = priors.delta_lo + (priors.delta_hi - priors.delta_lo) * u[:, 2]
    gamma = priors.gamma_lo + (priors.gamma_hi - priors.gamma_lo) * u[:, 3]
    return alpha, r, delta, gamma


def sample_shares(priors: PriorSpec, start: int = 0, count: int | None = None) -> np.ndarray:
    """Long-run maintenance shares (fractions) for a range of draw indices."""
    alpha, r, delta, gamma = sample_parameters(priors, start, count)
    return structured_share(alpha, gamma, r, delta)


def run_monte_carlo(priors: PriorSpec) -> CalibrationResult:
    """Simulate the share distribution and summarize it in percent.

    Quantiles use linear interpolation (numpy's default) and the standard
    deviation is the sample statistic (ddof=1).  Exceedance probabilities
    are strict: Pr(s > threshold).
    """
    shares = sample_shares(priors) * 100.0
    q = np.quantile(shares, [0.025, 0.10, 0.50, 0.90, 0.975], method="linear")
    if priors.n_draws > 1:
        sd = float(np.std(shares, ddof=1))
    else:
        sd = 0.0
    return CalibrationResult(
        mean=float(np.mean(shares)),
        median=float(q[2]),
        std_dev=sd,
        q2_5=float(q[0]),
        q10=float(q[1]),
        q90=float(q[3]),
        q97_5=float(q[4]),
        share_min=float(np.min(shares)),
        share_max=float(np.max(shares)),
        pr_gt_5pct=float(np.mean(shares > 5.0)),
        pr_gt_8pct=float(np.mean(shares > 8.0)),
        n_draws=priors.n_draws,
        seed=priors.seed,
    )


def share_bounds(priors: PriorSpec) -> tuple[float, float]:
    """Exact attainable range of the share (fractions) over the prior box.

    The share is monotone in every parameter: increasing in alpha, gamma,
    and delta_k, decreasing in r.  The extremes are therefore attained at
    the two opposite corners of the box.
    """
    lo = float(
        structured_share(priors.alpha_lo, priors.gamma_lo, priors.r_hi, priors.delta_lo)
    )
    hi = float(
        structured_share(priors.alpha_hi, priors.gamma_hi, priors.r_lo, priors.delta_hi)
    )
    return lo, hi
