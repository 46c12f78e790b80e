"""Precision contexts, singular quadrature, bracketed root finding and the
special functions used across the package.

Everything here is big-float based (mpmath, with the gmpy backend).  The
rest of the package treats this module as its numerical kernel: Toeplitz
determinants of the thinned-arc symbol scale like ``sin(L/2)**(n*n)`` and
the recursions suffer severe cancellation, so fixed-width floats are not an
option anywhere near the core.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np


class BracketingError(ValueError):
    """Root finder was called without a sign change on the bracket."""


class SingularInputError(ValueError):
    """Evaluation requested at a pole/zero of the function."""


@dataclass(frozen=True)
class PrecisionContext:
    """Binary working precision shared by all big-float computations.

    ``eps`` is the unit roundoff ``2**(1 - bits)``; tolerances throughout
    the package are expressed as small multiples of it.
    """

    bits: int = 256

    def __post_init__(self):
        if self.bits < 64:
            raise ValueError("need at least 64 bits of precision")

    @property
    def eps(self):
        with mp.workprec(self.bits):
            return mp.mpf(2) ** (1 - self.bits)

    @property
    def dps(self) -> int:
        return int(self.bits / 3.3219280948873626) + 1

    def workprec(self):
        return mp.workprec(self.bits)


DEFAULT_CONTEXT = PrecisionContext(256)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights on the canonical interval [-1, 1].

    For ``gauss-legendre`` the weights integrate dx (they sum to 2); for
    ``gauss-chebyshev`` they integrate dx/sqrt(1-x^2) (they sum to pi).
    """

    kind: str
    nodes: tuple = field(repr=False)
    weights: tuple = field(repr=False)

    def __len__(self) -> int:
        return len(self.nodes)


@lru_cache(maxsize=None)
def gauss_legendre(m: int, bits: int = 256) -> QuadratureRule:
    """Gauss-Legendre rule with m nodes, exact for degree <= 2m-1.

    Double-precision nodes seed a Newton iteration on the Legendre
    recurrence at full precision; three refinements reach quadratic
    convergence well past 256 bits.
    """
    if m < 1:
        raise ValueError("need at least one node")
    seeds = np.polynomial.legendre.leggauss(m)[0]
    # double-precision seeds are ~1e-16 off; each Newton step squares the
    # error, so ceil(log2(bits/52)) + 1 refinements suffice
    steps = 1
    while 52 << steps < bits + 64:
        steps += 1
    with mp.workprec(bits + 32):
        nodes, weights = [], []
        for s in seeds:
            x = mp.mpf(float(s))
            for _ in range(steps + 1):
                p, dp = _legendre_and_derivative(m, x)
                x = x - p / dp
            _, dp = _legendre_and_derivative(m, x)
            nodes.append(+x)
            weights.append(2 / ((1 - x * x) * dp * dp))
    return QuadratureRule("gauss-legendre", tuple(nodes), tuple(weights))


def _legendre_and_derivative(m, x):
    p0, p1 = mp.mpf(1), x
    for k in range(2, m + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    if m == 0:
        return mp.mpf(1), mp.mpf(0)
    if m == 1:
        return x, mp.mpf(1)
    dp = m * (x * p1 - p0) / (x * x - 1)
    return p1, dp


@lru_cache(maxsize=None)
def gauss_chebyshev(m: int, bits: int = 256) -> QuadratureRule:
    """Gauss-Chebyshev rule: integrates g(x)/sqrt(1-x^2) with equal weights.

    After an affine map this evaluates integrals with inverse-square-root
    blow-up at both endpoints exactly for polynomial g of degree <= 2m-1,
    which is the edge behaviour of all the arc densities in this package.
    """
    if m < 1:
        raise ValueError("need at least one node")
    with mp.workprec(bits + 32):
        w = mp.pi / m
        nodes = tuple(mp.cos((2 * i - 1) * mp.pi / (2 * m)) for i in range(m, 0, -1))
        weights = tuple(+w for _ in range(m))
    return QuadratureRule("gauss-chebyshev", nodes, weights)


@lru_cache(maxsize=None)
def chebyshev_log_weights(m: int, side: int, bits: int = 256) -> tuple:
    """Weights for integrals of g(x)*log(1 -/+ x)/sqrt(1-x^2) on [-1, 1].

    ``side=+1`` puts the logarithm at x=+1 (kernel log(1-x)), ``side=-1``
    at x=-1.  Built from the closed-form Chebyshev moments of the log
    kernel, so smooth g keeps spectral accuracy; used for the arc
    integrals whose integrand carries log|1 -/+ e^{i theta}|.
    """
    if m < 1:
        raise ValueError("need at least one node")
    with mp.workprec(bits + 32):
        # moments M_k = int T_k(x) log(1 -/+ x) / sqrt(1-x^2) dx
        moments = [-mp.pi * mp.log(2)]
        for k in range(1, m):
            mk = -mp.pi / k
            if side < 0:
                mk = mk if k % 2 == 0 else -mk
            moments.append(mk)
        weights = []
        for i in range(m, 0, -1):
            phi = (2 * i - 1) * mp.pi / (2 * m)
            c1 = mp.cos(phi)
            ckm1, ck = mp.mpf(1), c1  # cos(k phi) by Chebyshev recurrence
            s = moments[0] / 2
            for k in range(1, m):
                s += moments[k] * ck
                ckm1, ck = ck, 2 * c1 * ck - ckm1
            weights.append(+(2 * s / m))
    return tuple(weights)


def brent_root(f, a, b, tol=None, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Brent's method on [a, b]; needs f(a) f(b) <= 0.

    Returns a root with final bracket width below ``tol`` (default
    ``2**(-bits/2)`` times the bracket scale).  Raises BracketingError if
    there is no sign change.
    """
    with ctx.workprec():
        a, b = mp.mpf(a), mp.mpf(b)
        if tol is None:
            tol = mp.mpf(2) ** (-ctx.bits // 2) * max(1, abs(a), abs(b))
        else:
            tol = mp.mpf(tol)
        fa, fb = mp.mpf(f(a)), mp.mpf(f(b))
        if fa == 0:
            return a
        if fb == 0:
            return b
        if fa * fb > 0:
            raise BracketingError(f"no sign change on [{a}, {b}]")
        c, fc = a, fa
        d = e = b - a
        while True:
            if fb * fc > 0:
                c, fc = a, fa
                d = e = b - a
            if abs(fc) < abs(fb):
                a, b, c = b, c, b
                fa, fb, fc = fb, fc, fb
            m_half = (c - b) / 2
            if abs(m_half) <= tol or fb == 0:
                return b
            if abs(e) < tol or abs(fa) <= abs(fb):
                d = e = m_half
            else:
                s = fb / fa
                if a == c:
                    p = 2 * m_half * s
                    q = 1 - s
                else:
                    q = fa / fc
                    r = fb / fc
                    p = s * (2 * m_half * q * (q - r) - (b - a) * (r - 1))
                    q = (q - 1) * (r - 1) * (s - 1)
                if p > 0:
                    q = -q
                p = abs(p)
                if 2 * p < min(3 * m_half * q - abs(tol * q), abs(e * q)):
                    e, d = d, p / q
                else:
                    d = e = m_half
            a, fa = b, fb
            b = b + (d if abs(d) > tol else (tol if m_half > 0 else -tol))
            fb = mp.mpf(f(b))


def bessel_j0(t, derivative: int = 0, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """J_0(t), or its first derivative -J_1(t) with derivative=1."""
    with ctx.workprec():
        return mp.besselj(0, mp.mpf(t), derivative=derivative)


def airy_ai(t, derivative: int = 0, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Ai(t), or Ai'(t) with derivative=1."""
    with ctx.workprec():
        return mp.airyai(mp.mpf(t), derivative=derivative)


def log_barnes_g(z, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Principal-branch log of the Barnes G-function.

    Unit shifts through G(1+z) = Gamma(z) G(z) move the argument into the
    disk |z-1| <= 0.5 where the Taylor series of log G(1+w) converges
    quickly.  Arguments with |Im z| too large for the series radius are
    outside the supported domain (the gap-probability prefactors only ever
    need small imaginary offsets of 1).
    """
    with mp.workprec(ctx.bits + 48):
        z = mp.mpc(z)
        if abs(z.imag) == 0 and z.real <= 0 and mp.isint(z.real):
            raise SingularInputError(f"Barnes G vanishes at z={z}")
        shift = mp.mpc(0)
        while z.real < 0.5:
            # log G(z) = log G(z+1) - log Gamma(z)
            shift -= mp.loggamma(z)
            z += 1
        while z.real > 1.5:
            z -= 1
            shift += mp.loggamma(z)
        w = z - 1
        if abs(w) > mp.mpf("0.9"):
            raise SingularInputError(
                f"argument {z} outside the series disk; only small imaginary "
                "offsets of 1 are supported"
            )
        # log G(1+w) = w/2 log(2 pi) - w(w+1)/2 - euler w^2/2
        #              + sum_{k>=3} (-1)^(k-1) zeta(k-1) w^k / k
        total = w / 2 * mp.log(2 * mp.pi) - w * (w + 1) / 2 - mp.euler * w * w / 2
        wk = w * w
        k = 3
        tol = mp.mpf(2) ** (-(ctx.bits + 16))
        while True:
            wk *= w
            term = (-1) ** (k - 1) * mp.zeta(k - 1) * wk / k
            total += term
            if abs(term) < tol * (1 + abs(total)):
                break
            k += 1
            if k > 10000:
                raise SingularInputError("Barnes G series failed to converge")
        result = total + shift
    with ctx.workprec():
        return +result


def jacobi_theta3(z, tau, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Third theta function: sum over m of exp(2 pi i m z + pi i m^2 tau).

    Requires Im(tau) > 0.  The series is truncated symmetrically once the
    term magnitude drops below eps times the partial sum.
    """
    with ctx.workprec():
        z = mp.mpc(z)
        tau = mp.mpc(tau)
        if tau.imag <= 0:
            raise SingularInputError("invalid nome: Im(tau) must be positive")
        # terms decay like exp(-pi Im(tau) m^2 + 2 pi |Im z| m)
        eps = mp.mpf(2) ** (1 - ctx.bits)
        q_decay = mp.pi * tau.imag
        grow = 2 * mp.pi * abs(z.imag)
        m_cap = int(mp.ceil((grow + mp.sqrt(grow * grow + 4 * q_decay * (ctx.bits + 8) * mp.log(2))) / (2 * q_decay))) + 2
        total = mp.mpc(1)
        for m in range(1, m_cap + 8):
            quad_phase = mp.expjpi(m * m * tau)
            term = quad_phase * (mp.expjpi(2 * m * z) + mp.expjpi(-2 * m * z))
            total += term
            if m > m_cap and abs(term) < eps * abs(total):
                break
        return total


def zeta_prime_minus_one(ctx: PrecisionContext = DEFAULT_CONTEXT):
    """zeta'(-1), the constant in the hard-gap determinant asymptotics."""
    with ctx.workprec():
        return mp.zeta(-1, derivative=1)
