"""Analytic witness expressions and thermodynamic-limit asymptotics.

Every formula here assumes a spin-1/2 ensemble with the environment in the
maximally mixed state; the general engine covers everything else. Exponents
are exact big integers (they reach 2^(2p) and beyond), multiplied into
log|cos| only at the last step, so nothing underflows.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Union

import numpy as np

from .model import PowerLawRing1D, build_coupling


class BinomialTable:
    """Exact binomial coefficients built by the Pascal recurrence."""

    def __init__(self, n_max: int = 64):
        rows: List[List[int]] = [[1]]
        for n in range(1, n_max + 1):
            prev = rows[-1]
            row = [1] + [prev[k - 1] + prev[k] for k in range(1, n)] + [1]
            rows.append(row)
        self.n_max = n_max
        self._rows = rows

    def choose(self, n: int, k: int) -> int:
        if k < 0 or k > n:
            return 0
        if n > self.n_max:
            raise ValueError(f"table built up to n={self.n_max}, asked for n={n}")
        return self._rows[n][k]


def _int_times_log(exponent: int, logcos: np.ndarray) -> np.ndarray:
    # exact integer exponent; float conversion is the only rounding step
    return float(exponent) * logcos


def _logabs_cos(x) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(np.cos(x)))


def log_det_nn_1d(p: int, j: float, t) -> Union[float, np.ndarray]:
    """log det for a contiguous block of p spins on a nearest-neighbor ring.

    Equals 2^(2p) log|cos(J t)|: only the two boundary couplings enter, so
    the result is independent of the ring size. Valid when the block has two
    distinct environment neighbors (n_total >= p + 2); it is even in j and
    -inf at odd multiples of pi/(2J).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    t = np.asarray(t, dtype=float)
    out = _int_times_log(1 << (2 * p), _logabs_cos(j * t))
    return float(out) if out.ndim == 0 else out


def log_det_infinite_range(n_total: int, p: int, j: float, t) -> Union[float, np.ndarray]:
    """log det for p of n_total all-to-all coupled spins (entries j/n_total).

    Sum over (j', k) in {0..p}^2 of (n-p) C(p,k) C(p,j') log|cos(J t (j'-k)/n)|,
    with exact integer exponents. Periodic in t with period 2 pi n / J.
    """
    if not 1 <= p < n_total:
        raise ValueError("need 1 <= p < n_total")
    t = np.asarray(t, dtype=float)
    table = BinomialTable(p)
    out = np.zeros(t.shape)
    for q in range(1, p + 1):
        # pairs with |j' - k| = q, counted once per orientation
        mult = 2 * (n_total - p) * sum(
            table.choose(p, k) * table.choose(p, k - q) for k in range(q, p + 1)
        )
        out = out + _int_times_log(mult, _logabs_cos(j * t * q / n_total))
    return float(out) if out.ndim == 0 else out


def multiplicity_sum_si(p: int, k: int) -> int:
    """Number of p-spin configurations with k down spins (sum s_i = (p-2k)/2)."""
    if not 0 <= k <= p:
        raise ValueError("need 0 <= k <= p")
    return math.comb(p, k)


def chu_vandermonde_exponent(r_n: int, q: int) -> int:
    """C(2 r_n, r_n - q), the collapsed exponent sum_k C(r_n,k) C(r_n,k-q)."""
    if not 0 <= q <= r_n:
        raise ValueError("need 0 <= q <= r_n")
    return math.comb(2 * r_n, r_n - q)


def log_det_infinite_fraction_asymptotic(
    n_total: int, r: Union[Fraction, float], j: float, t
) -> Union[float, np.ndarray]:
    """Small-Jt approximation of the infinite-range witness at fixed fraction.

    log det ~ -(1-r)/n (J t)^2 sum_q C(2 r n, r n - q) q^2. The Taylor step
    behind it needs J t q / n small; a practical validity heuristic is
    J t r < 0.2. The combinatorial sum is exact integer arithmetic.
    """
    r = Fraction(r).limit_denominator(10**9) if not isinstance(r, Fraction) else r
    r_n_frac = r * n_total
    if r_n_frac.denominator != 1:
        raise ValueError(f"r * n_total must be an integer, got {r_n_frac}")
    r_n = int(r_n_frac)
    if not 0 < r_n < n_total:
        raise ValueError("need 0 < r < 1")
    s = sum(chu_vandermonde_exponent(r_n, q) * q * q for q in range(1, r_n + 1))
    t = np.asarray(t, dtype=float)
    out = -float(1 - r) * (j * t) ** 2 / n_total * float(s)
    return float(out) if out.ndim == 0 else out


def log_det_2d_nn(q_side: int, j: float, t) -> Union[float, np.ndarray]:
    """log det for a q x q corner block on a periodic square lattice.

    Equals q 2^(2 q^2 + 1) log|cos(J t)|; only boundary couplings of the
    block contribute. Needs the lattice side to exceed q.
    """
    if q_side < 1:
        raise ValueError("q_side must be >= 1")
    t = np.asarray(t, dtype=float)
    exponent = q_side << (2 * q_side * q_side + 1)
    out = _int_times_log(exponent, _logabs_cos(j * t))
    return float(out) if out.ndim == 0 else out


def log_det_power_law(
    n_total: int,
    p: int,
    alpha: float,
    j_n: float,
    t,
    kac_normalization: bool = False,
) -> Union[float, np.ndarray]:
    """log det for a block of p spins on a power-law ring, mixed environment.

    Direct evaluation of the cosine product: for every unordered pair of
    block configurations and every environment site j,

        log|cos( J_n(alpha) t sum_i (s_i - s'_i) / r_ij^alpha )|

    counted twice (once per pair orientation).
    """
    if not 1 <= p < n_total:
        raise ValueError("need 1 <= p < n_total")
    model = PowerLawRing1D(j=j_n, alpha=alpha, kac_normalization=kac_normalization)
    j_cross = build_coupling(model, n_total)[:p, p:]
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    # iterate over spin-1/2 block pairs via their +-1 difference patterns
    for a in range(1 << p):
        sa = np.array([1.0 if (a >> i) & 1 == 0 else -1.0 for i in range(p)])
        for b in range(a + 1, 1 << p):
            sb = np.array([1.0 if (b >> i) & 1 == 0 else -1.0 for i in range(p)])
            nu = 0.5 * (sa - sb) @ j_cross  # frequencies per environment site
            out = out + 2.0 * _logabs_cos(np.multiply.outer(t, nu)).sum(axis=-1)
    return float(out) if out.ndim == 0 else out
