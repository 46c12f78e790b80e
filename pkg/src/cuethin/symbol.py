"""The two-jump arc symbol: pointwise evaluation, exact Fourier
coefficients, and the large-n regime taxonomy in (s, L).

The weight equals 1 on the arc of half-length L around angle zero and
equals the removal probability s on the complementary arc.  Its Toeplitz
determinant is the probability that the thinned spectrum avoids the
complementary arc.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import mpmath as mp

from .numerics import DEFAULT_CONTEXT, PrecisionContext


class Regime(enum.Enum):
    """Asymptotic regime of the determinant as n grows.

    Indices follow the usual ordering of the four scaling regimes:
    1 fixed (s, L); 2 arc gap shrinking like 1/n; 3 superexponential
    thinning (behaves like a hard gap); 4 exponential thinning below the
    critical rate (two-arc phase).
    """

    FIXED = 1
    SHRINKING_GAP = 2
    HARD_GAP = 3
    TWO_ARC = 4

    @property
    def index(self) -> int:
        return self.value


@dataclass(frozen=True)
class SymbolParams:
    """Parameters (s, L), or (x, L) with the link s = exp(-x n).

    Exactly one of ``s`` and ``x`` is given.  The x-parameterization is
    stored explicitly so that sweeps over n hold the decay rate x fixed
    rather than the removal probability s.
    """

    L: float
    s: float | None = None
    x: float | None = None

    def __post_init__(self):
        if not 0 < self.L < math.pi:
            raise ValueError("need 0 < L < pi")
        if (self.s is None) == (self.x is None):
            raise ValueError("give exactly one of s and x")
        if self.s is not None and not 0 <= self.s <= 1:
            raise ValueError("need 0 <= s <= 1")
        if self.x is not None and self.x < 0:
            raise ValueError("need x >= 0")

    def s_at(self, n: int | None = None, ctx: PrecisionContext = DEFAULT_CONTEXT):
        """Removal probability as a big-float; needs n when x-linked."""
        with ctx.workprec():
            if self.s is not None:
                return mp.mpf(self.s)
            if n is None:
                raise ValueError("x-linked parameters need the active n")
            return mp.exp(-mp.mpf(self.x) * n)


def symbol_eval(theta, p: SymbolParams, n: int | None = None,
                ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Weight at angle theta; boundary angles +-L count as arc points."""
    with ctx.workprec():
        t = mp.mpf(theta)
        # center to (-pi, pi]
        t = t - 2 * mp.pi * mp.floor((t + mp.pi) / (2 * mp.pi))
        if abs(t) <= mp.mpf(p.L):
            return mp.mpf(1)
        return p.s_at(n, ctx)


def fourier_coeff(k: int, p: SymbolParams, n: int | None = None,
                  ctx: PrecisionContext = DEFAULT_CONTEXT):
    """k-th Fourier coefficient of the weight; even in k.

    f_0 = L/pi + s (pi - L)/pi and f_k = (1 - s) sin(kL) / (pi k) for
    k != 0.
    """
    with ctx.workprec():
        s = p.s_at(n, ctx)
        L = mp.mpf(p.L)
        if k == 0:
            return L / mp.pi + s * (mp.pi - L) / mp.pi
        k = abs(k)
        return (1 - s) * mp.sin(k * L) / (mp.pi * k)


def critical_rate(L: float) -> float:
    """Critical decay rate -2 log tan(L/4) separating regimes 3 and 4."""
    if not 0 < L <= math.pi:
        raise ValueError("need 0 < L <= pi")
    return -2.0 * math.log(math.tan(L / 4.0))


def classify_regime(n: int, p: SymbolParams, shrinking_arc: bool = False) -> Regime:
    """Regime of (n, p); ``shrinking_arc`` declares the L = pi(1-4y/n) scaling."""
    if n < 1:
        raise ValueError("need n >= 1")
    if shrinking_arc:
        return Regime.SHRINKING_GAP
    xc = critical_rate(p.L)
    if p.x is not None:
        if p.x >= xc:
            return Regime.HARD_GAP
        if p.x > 0:
            return Regime.TWO_ARC
        return Regime.FIXED
    if p.s == 0:
        return Regime.HARD_GAP
    rate = -math.log(p.s) / n if p.s < 1 else 0.0
    if p.s < 1 and rate >= xc:
        return Regime.HARD_GAP
    return Regime.FIXED
