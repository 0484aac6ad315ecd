"""Large-deviation rate functions behind the sum-free size bounds.

``rate_I(m, alpha)`` is the exponential rate at which the proportion of
tuples in {0..m}^n with coordinate sum below alpha*m*n decays;
``rate_J(s) = exp(-rate_I(s-1, 1/3))`` is the per-coordinate shrink
factor governing the slice rank of tensor powers.  Optimization uses
golden-section search after substituting x = exp(theta/m), which maps the
domain to (0, 1) and removes overflow; the objective is smooth and
unimodal, so nothing fancier is warranted.  All tuple counts and
threshold comparisons are exact; only the rate values themselves are
floats.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

GOLDEN_TOL = 1e-12
GOLDEN_MAX_ITER = 200
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class RateResult:
    """A rate value with the maximizing parameter and the search tolerance."""

    value: float
    argmax_theta: float
    tolerance: float = GOLDEN_TOL


def golden_section_max(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = GOLDEN_TOL,
    max_iter: int = GOLDEN_MAX_ITER,
) -> tuple[float, float]:
    """Maximize a unimodal function on [lo, hi]; returns (argmax, value)."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fn(d)
    xm = (a + b) / 2.0
    return xm, fn(xm)


def _bracketed_max(fn: Callable[[float], float], grid: Sequence[float]) -> tuple[float, float]:
    """Golden-section max after locating the best point of a unimodal grid."""
    values = [fn(g) for g in grid]
    j = max(range(len(grid)), key=values.__getitem__)
    left = grid[max(j - 1, 0)]
    right = grid[min(j + 1, len(grid) - 1)]
    return golden_section_max(fn, min(left, right), max(left, right))


def _check_alpha(alpha) -> float:
    a = float(Fraction(alpha)) if isinstance(alpha, str) else float(alpha)
    if not 0.0 < a < 0.5:
        raise ValueError(f"alpha must lie strictly inside (0, 1/2), got {alpha}")
    return a


def _rate_objective(m: float, alpha: float, x: float) -> float:
    """alpha*theta - log of the normalized truncated-geometric MGF, at x = e^(theta/m).

    (1 - x^(m+1)) / (1 - x) is evaluated as a ratio of expm1 terms, which
    stays stable across the removable singularity at x -> 1 (theta -> 0).
    """
    lx = math.log(x)
    ratio = math.expm1((m + 1.0) * lx) / math.expm1(lx)
    return alpha * m * lx - math.log(ratio / (m + 1.0))


def _rate_I_real(m: float, alpha: float) -> RateResult:
    xstar, value = golden_section_max(
        lambda x: _rate_objective(m, alpha, x), 1e-12, 1.0 - 1e-13
    )
    return RateResult(value=value, argmax_theta=m * math.log(xstar))


def rate_I(m: int, alpha) -> RateResult:
    """The rate I(m, alpha) = sup over theta < 0 of the tilted objective.

    Positive for every m >= 1 and alpha in (0, 1/2); the maximizer is
    reported as theta = m * log(x*).
    """
    if int(m) != m or m < 1:
        raise ValueError(f"m must be an integer >= 1, got {m}")
    return _rate_I_real(float(m), _check_alpha(alpha))


def rate_I_limit(alpha) -> RateResult:
    """The m -> infinity limit: sup over theta < 0 of alpha*theta - log((e^theta - 1)/theta)."""
    a = _check_alpha(alpha)

    def obj(theta: float) -> float:
        return a * theta - math.log(math.expm1(theta) / theta)

    grid = [-(2.0**j) * 1e-6 for j in range(60)]
    theta, value = _bracketed_max(obj, grid)
    return RateResult(value=value, argmax_theta=theta)


def rate_J(s: float) -> RateResult:
    """J(s) = exp(-I(s-1, 1/3)), cross-checked against the direct infimum.

    The direct form is (1/s) * inf over x in (0,1) of
    (1 - x^s)/(1 - x) * x^(-(s-1)/3); the two evaluations must agree to
    1e-9.  J is decreasing in s and strictly below 1.
    """
    s = float(s)
    if s <= 1.0:
        raise ValueError(f"s must exceed 1, got {s}")
    via_rate = _rate_I_real(s - 1.0, 1.0 / 3.0)
    value = math.exp(-via_rate.value)

    def log_direct(x: float) -> float:
        # log of (1-x^s)/(1-x) * x^(-(s-1)/3) / s, overflow-free
        lx = math.log(x)
        ratio = math.expm1(s * lx) / math.expm1(lx)
        return math.log(ratio) - (s - 1.0) / 3.0 * lx - math.log(s)

    _, neg = golden_section_max(lambda x: -log_direct(x), 1e-12, 1.0 - 1e-13)
    direct_value = math.exp(-neg)
    if abs(value - direct_value) > 1e-9:
        raise AssertionError(
            f"rate and infimum evaluations of J({s}) disagree: {value} vs {direct_value}"
        )
    return RateResult(value=value, argmax_theta=via_rate.argmax_theta)


def rate_J_limit() -> RateResult:
    """lim J(s) as s -> infinity: inf over z > 1 of (z - z^-2) / (3 log z)."""

    def neg_obj(z: float) -> float:
        return -(z - z**-2) / (3.0 * math.log(z))

    grid = [1.0 + (2.0**j) * 1e-6 for j in range(40)]
    z, neg = _bracketed_max(neg_obj, grid)
    return RateResult(value=-neg, argmax_theta=z)


def constants() -> dict[str, float]:
    """The headline constants: delta = I(1, 1/3) and epsilon = delta / 2.

    Both are checked against the closed form log(2/3) + (2/3) log 2 to
    1e-12 before being returned.
    """
    delta = rate_I(1, Fraction(1, 3)).value
    closed = math.log(2.0 / 3.0) + (2.0 / 3.0) * math.log(2.0)
    if abs(delta - closed) > 1e-12:
        raise AssertionError(f"delta {delta} disagrees with its closed form {closed}")
    return {"epsilon": delta / 2.0, "delta": delta}


def tuple_fraction_exact(
    m: int, alpha, n: int, guard: int = 20000
) -> tuple[int, Fraction]:
    """Exact count and fraction of tuples in {0..m}^n with sum <= alpha*m*n.

    The threshold comparison clears denominators, so boundary cases are
    decided exactly; the fraction is certified to stay below
    exp(-I(m, alpha) * n).
    """
    if m < 0 or n < 0:
        raise ValueError("m and n must be nonnegative")
    if n * m > guard:
        raise ValueError(f"DP guard exceeded: n*m = {n * m} > {guard}")
    thr = Fraction(alpha) * m * n
    counts = {0: 1}
    for _ in range(n):
        nxt: dict[int, int] = {}
        for s, cnt in counts.items():
            for a in range(m + 1):
                nxt[s + a] = nxt.get(s + a, 0) + cnt
        counts = nxt
    count = sum(
        cnt for s, cnt in counts.items() if s * thr.denominator <= thr.numerator
    )
    return count, Fraction(count, (m + 1) ** n)


def hoeffding_bound(alpha, n: int) -> float:
    """exp(-2 n (1/2 - alpha)^2): the distribution-free comparator."""
    a = float(alpha)
    return math.exp(-2.0 * n * (0.5 - a) ** 2)


def rate_grid_rows(
    ms: Iterable[int], alphas: Iterable[Fraction], n: int
) -> list[dict]:
    """One report row per (m, alpha): rates, exact counts, and bounds."""
    rows = []
    for m in ms:
        for alpha in alphas:
            alpha = Fraction(alpha)
            result = rate_I(m, alpha)
            count, fraction = tuple_fraction_exact(m, alpha, n)
            rows.append(
                {
                    "m": m,
                    "alpha": f"{alpha.numerator}/{alpha.denominator}",
                    "I": result.value,
                    "J": math.exp(-result.value),
                    "exact_count": count,
                    "fraction": float(fraction),
                    "hoeffding_bound": hoeffding_bound(alpha, n),
                    "n": n,
                }
            )
    return rows


RATE_CSV_COLUMNS = ["m", "alpha", "I", "J", "exact_count", "fraction", "hoeffding_bound", "n"]


def write_rate_csv(rows: Sequence[dict], fh) -> None:
    writer = csv.DictWriter(fh, fieldnames=RATE_CSV_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
