"""Closed-form quantities for domination in G(n, p).

Natural logarithms throughout.  Probability bounds are clamped to [0, 1].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LAMBDA0_DEFAULT = 100.0

# exponent in 2 exp(-eta^2 mu / CHERNOFF_DIVISOR)
CHERNOFF_DIVISOR = 4.0

# finite-n regime cutoffs
SPARSE_ZERO_NP = 0.1
P0_ZERO_BELOW = 0.01
P0_ONE_ABOVE = 0.99

REGIMES = ("sparse_zero", "sparse_lambda", "dense_p0_zero", "dense_p0_mid", "dense_p0_one")


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def abs_log1m(p: float) -> float:
    """|log(1 - p)|, accurate for small p."""
    return -math.log1p(-p)


def u_n_xy(n: float, x: float, y: float) -> float:
    """log(n x) / |log(1 - y)|."""
    if not 0.0 < y < 1.0:
        raise ValueError(f"y must lie in (0, 1), got {y}")
    if n * x <= 0:
        raise ValueError(f"n*x must be positive, got {n * x}")
    return math.log(n * x) / abs_log1m(y)


def u_n(n: float, p: float) -> float:
    return u_n_xy(n, p, p)


def lambda_a(n: float, p: float) -> float:
    return n * p


def lambda_b(n: float, p: float) -> float:
    return n * abs_log1m(p) if p < 1.0 else math.inf


def t_n(n: float, p: float, theta: float) -> float:
    """(log lambda_a - theta log log lambda_b) / |log(1-p)|; may be negative."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    lb = lambda_b(n, p)
    if lb <= math.e:
        raise ValueError(f"log log lambda_b undefined or negative: lambda_b = {lb:.6g} <= e")
    return (math.log(lambda_a(n, p)) - theta * math.log(math.log(lb))) / abs_log1m(p)


@dataclass(frozen=True)
class TailBound:
    """P(Gamma_n < threshold) <= prob_bound."""

    threshold: float
    prob_bound: float


def lower_tail_bound(n: float, p: float, theta: float) -> TailBound:
    if theta <= 2:
        raise ValueError(f"theta must exceed 2, got {theta}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    la, lb = lambda_a(n, p), lambda_b(n, p)
    if lb <= 1.0:
        raise ValueError(f"lambda_b must exceed 1, got {lb:.6g}")
    if lb <= math.e:
        raise ValueError(f"log log lambda_b undefined: lambda_b = {lb:.6g} <= e")
    threshold = u_n(n, p) * (1.0 - theta * math.log(math.log(lb)) / math.log(la))
    exponent = -(3.0 * n / 8.0) * math.log(lb) ** theta / la
    return TailBound(threshold=threshold, prob_bound=_clamp01(math.exp(exponent)))


def a_lambda(lam: float, lam0: float = LAMBDA0_DEFAULT) -> float:
    """Lower-bound profile: lam e^{-2 lam} up to lam0, then (log lam - 3 log log lam) / lam."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if lam <= lam0:
        return lam * math.exp(-2.0 * lam)
    if lam <= math.e:
        raise ValueError("upper branch needs lambda > e")
    return (math.log(lam) - 3.0 * math.log(math.log(lam))) / lam


def b_lambda(lam: float) -> float:
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return lam / 4.0 if lam <= 1.0 else (math.log(lam) + 1.0) / lam


def chernoff_bound(mu: float, eta: float) -> float:
    """min(1, 2 exp(-eta^2 mu / 4)) for the two-sided deviation |W - mu| >= eta mu."""
    if not 0.0 < eta < 0.5:
        raise ValueError(f"eta must lie in (0, 1/2), got {eta}")
    if mu < 0:
        raise ValueError(f"mu must be nonnegative, got {mu}")
    return _clamp01(2.0 * math.exp(-(eta * eta) * mu / CHERNOFF_DIVISOR))


def binary_entropy(x):
    """-x log x - (1-x) log(1-x), 0 at both endpoints.  Accepts scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0) | (arr > 1)):
        raise ValueError("binary entropy is defined on [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(arr > 0, arr * np.log(np.where(arr > 0, arr, 1.0)), 0.0)
        h -= np.where(arr < 1, (1 - arr) * np.log1p(-np.where(arr < 1, arr, 0.0)), 0.0)
    return float(h) if np.ndim(h) == 0 else h


def entropy_numerator(n: float, x):
    """H(x) - x log n: the sign of d/dx log(nx)/|log(1-x)|."""
    return binary_entropy(x) - np.asarray(x, dtype=float) * math.log(n)


def un_grid(x_low: float, x_high: float, grid_size: int) -> np.ndarray:
    """Interior points of the open interval (x_low, x_high)."""
    return np.linspace(x_low, x_high, grid_size + 2)[1:-1]


def un_decreasing_certificate(n: float, x_low: float, x_high: float, grid_size: int) -> bool:
    """True iff H(x) - x log n < 0 at ``grid_size`` evenly spaced interior points of (x_low, x_high)."""
    if not (1.0 / (n + 1) < x_low < x_high < 1.0):
        raise ValueError(f"need 1/(n+1) < x_low < x_high < 1, got ({x_low}, {x_high})")
    if grid_size < 1:
        raise ValueError("grid_size must be positive")
    xs = un_grid(x_low, x_high, grid_size)
    return bool(np.all(entropy_numerator(n, xs) < 0))


@dataclass(frozen=True)
class RegimeParams:
    n: int
    p: float
    lambda_a: float
    lambda_b: float
    u_n: float
    regime: str
    # lambda = np for sparse_lambda, p for dense_p0_mid, otherwise None
    parameter: float | None = None

    def describe(self) -> str:
        return self.regime if self.parameter is None else f"{self.regime}({self.parameter:.6g})"


def classify_regime(n: int, p: float) -> RegimeParams:
    """Finite-n stand-in for the asymptotic regimes.

    sparse_zero: np < 0.1 (this also absorbs the nearly empty case n^2 p <= 50);
    sparse_lambda: 0.1 <= np <= log n; dense beyond, split by p < 0.01 /
    p > 0.99.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    la = lambda_a(n, p)
    lb = lambda_b(n, p)
    un = u_n(n, p) if 0.0 < p < 1.0 else math.nan
    param = None
    if la < SPARSE_ZERO_NP:
        regime = "sparse_zero"
    elif la <= math.log(n):
        regime, param = "sparse_lambda", la
    elif p < P0_ZERO_BELOW:
        regime = "dense_p0_zero"
    elif p > P0_ONE_ABOVE:
        regime = "dense_p0_one"
    else:
        regime, param = "dense_p0_mid", p
    return RegimeParams(n=n, p=p, lambda_a=la, lambda_b=lb, u_n=un, regime=regime, parameter=param)
