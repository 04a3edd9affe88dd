"""Independent reference implementations used to check the package.

Everything here is deliberately written from first principles, without
importing model formulas from the package: root finding on the
equilibrium conditions instead of closed forms, finite differences
instead of analytic derivatives, brute-force enumeration instead of
solvers.  Slow and simple on purpose.
"""

from __future__ import annotations

import itertools

import mpmath as mp
import numpy as np

mp.mp.dps = 50


def share_bisection(alpha: float, gamma: float, r: float, delta_k: float) -> float:
    """Long-run maintenance share by bisection on the stationarity condition.

    At the long-run allocation the wage earned maintaining the stock equals
    the production wage.  Substituting the stationary stock k = eta*s*L/delta
    into eta * v = w_U and cancelling output reduces the condition to

        gamma * delta_k * (1 - s) - (1 - alpha) * (r + delta_k) * s = 0,

    which is strictly decreasing in s with a sign change on (0, 1).
    """

    def f(s: float) -> float:
        return gamma * delta_k * (1.0 - s) - (1.0 - alpha) * (r + delta_k) * s

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mp_long_run(
    alpha, gamma, r, delta_k, eta=1.0, A_bar=1.0, K=1.0, L_bar=1.0
) -> dict:
    """High-precision long-run quantities from the equilibrium conditions.

    Solves for the share s at which the value of maintenance labor equals
    the production wage, with the stock stationary, using mpmath root
    finding on the primitive condition (no closed form involved); then
    evaluates stock, output, and prices along the same primitives.
    """
    with mp.workdps(60):
        alpha, gamma, r, delta_k, eta, A_bar, K, L_bar = (
            mp.mpf(repr(x)) for x in (alpha, gamma, r, delta_k, eta, A_bar, K, L_bar)
        )

        def wage_gap(s):
            k = eta * s * L_bar / delta_k
            l_u = (1 - s) * L_bar
            y = A_bar * k**gamma * K**alpha * l_u ** (1 - alpha)
            w_u = (1 - alpha) * y / l_u
            v = (gamma * y / k) / (r + delta_k)
            return eta * v - w_u

        s = mp.findroot(
            wage_gap, (mp.mpf("1e-8"), mp.mpf("0.999999")), solver="anderson"
        )
        k = eta * s * L_bar / delta_k
        l_u = (1 - s) * L_bar
        y = A_bar * k**gamma * K**alpha * l_u ** (1 - alpha)
        w_u = (1 - alpha) * y / l_u
        v = (gamma * y / k) / (r + delta_k)
        return {
            "s": s,
            "L_S": s * L_bar,
            "L_U": l_u,
            "k": k,
            "Y": y,
            "wage": w_u,
            "shadow_value": v,
        }


def mp_output(alpha, gamma, A_bar, K, k, L_U):
    alpha, gamma, A_bar, K, k, L_U = (mp.mpf(repr(x)) for x in (alpha, gamma, A_bar, K, k, L_U))
    return A_bar * k**gamma * K**alpha * L_U ** (1 - alpha)


def fd_share_partials(alpha: float, gamma: float, r: float, delta_k: float, share_fn) -> tuple:
    """Central finite differences of a share function in (gamma, r, delta_k)."""

    def diff(lo_args, hi_args, h):
        return (share_fn(*hi_args) - share_fn(*lo_args)) / (2.0 * h)

    out = []
    for pos, value in ((1, gamma), (2, r), (3, delta_k)):
        h = 1e-6 * max(abs(value), 1e-3)
        args_lo = [alpha, gamma, r, delta_k]
        args_hi = [alpha, gamma, r, delta_k]
        args_lo[pos] = value - h
        args_hi[pos] = value + h
        out.append(diff(args_lo, args_hi, h))
    return tuple(out)


def grid_allocation_value(weights, beta: float, L_S: float, steps: int = 200) -> float:
    """Best value of sum_j w_j * l_j**beta over a simplex grid (3 families)."""
    w = np.asarray(weights, dtype=float)
    assert w.shape == (3,)
    frac = np.linspace(0.0, 1.0, steps + 1)
    l1, l2 = np.meshgrid(frac * L_S, frac * L_S, indexing="ij")
    l3 = L_S - l1 - l2
    feasible = l3 >= -1e-15
    l3 = np.clip(l3, 0.0, None)
    value = w[0] * l1**beta + w[1] * l2**beta + w[2] * l3**beta
    return float(np.max(value[feasible]))


def allocation_value(weights, beta: float, labor) -> float:
    w = np.asarray(weights, dtype=float)
    labor = np.asarray(labor, dtype=float)
    return float(np.sum(w * labor**beta))


def roy_consistent_assignments(
    a: np.ndarray, weights, beta: float, labor_floor: float = 1e-6
) -> list[tuple[int, ...]]:
    """Every self-consistent assignment, by exhaustive enumeration.

    An assignment maps each worker to a family.  It is self-consistent
    when, at the piece rates implied by its own head counts
    (p_j = w_j * beta * max(n_j, floor)**(beta-1)), every worker's
    assigned family attains their maximum available wage.
    """
    a = np.asarray(a, dtype=float)
    w = np.asarray(weights, dtype=float)
    n, j = a.shape
    consistent = []
    for assign in itertools.product(range(j), repeat=n):
        counts = np.bincount(np.asarray(assign), minlength=j).astype(float)
        rates = w * beta * np.maximum(counts, labor_floor) ** (beta - 1.0)
        wages = a * rates
        best = wages.max(axis=1)
        chosen = wages[np.arange(n), list(assign)]
        if np.all(chosen >= best - 1e-12):
            consistent.append(tuple(assign))
    return consistent


def corner_share_extremes(alpha_box, r_box, delta_box, gamma_box, share_fn) -> tuple[float, float]:
    """Exact share extremes by evaluating every corner of the prior box."""
    values = [
        share_fn(alpha, gamma, r, delta)
        for alpha in alpha_box
        for r in r_box
        for delta in delta_box
        for gamma in gamma_box
    ]
    return min(values), max(values)
