"""Orthogonal polynomials on the unit circle for the arc-thinning weight.

The Szego/Levinson recursion runs in raw gmpy2 big floats (an order of
magnitude faster than wrapped types in the O(n^2) inner loop) and yields
the Verblunsky coefficients, the norms h_k, and the running
log-determinant log D_n = sum log h_k in a single pass.  Everything is
exposed as mpmath values; conversions are exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
import mpmath as mp
import numpy as np

from .numerics import DEFAULT_CONTEXT, PrecisionContext
from .symbol import SymbolParams

ZEROS_DEGREE_CAP = 64


class PrecisionExhausted(ArithmeticError):
    """A norm h_k came out nonpositive; the working precision was too low."""


def default_bits(n: int) -> int:
    # cancellation in the recursion grows with n; 8 bits per degree is a
    # comfortable margin for removal probabilities all the way down to 0
    return max(256, 8 * n)


def _to_mpf(x, bits):
    m, e = x.as_mantissa_exp()
    with mp.workprec(bits + 8):
        return mp.ldexp(mp.mpf(int(m)), int(e))


def _to_mpfr(x):
    sign, man, exp, _ = mp.mpf(x)._mpf_
    r = gmpy2.mpfr(int(man))
    r = gmpy2.mul_2exp(r, exp) if exp >= 0 else gmpy2.div_2exp(r, -exp)
    return -r if sign else r


def _moments_mpfr(p: SymbolParams, n: int, count: int, bits: int) -> list:
    # same formula as symbol.fourier_coeff, in the engine's number type
    with gmpy2.local_context(gmpy2.get_context(), precision=bits + 16):
        pi = gmpy2.const_pi()
        L = gmpy2.mpfr(p.L)
        if p.x is not None:
            s = gmpy2.exp(-gmpy2.mpfr(p.x) * n)
        else:
            s = gmpy2.mpfr(p.s)
        out = [L / pi + s * (pi - L) / pi]
        one_minus_s = 1 - s
        for k in range(1, count + 1):
            out.append(one_minus_s * gmpy2.sin(k * L) / (pi * k))
        return out


@dataclass(frozen=True)
class OpucState:
    """Recursion output at degree n: alpha_0..alpha_{n-1}, h_0..h_{n-1},
    log D_n, and the monic coefficients of phi_n (ascending powers)."""

    n: int
    bits: int
    alpha: tuple
    h: tuple
    logdet: object
    coeffs: tuple
    logdet_trace: tuple | None = None

    def logdet_at(self, k: int):
        """log D_k for 1 <= k <= n (requires a trace-storing build)."""
        if self.logdet_trace is None:
            raise ValueError("state was built without store_trace=True")
        return self.logdet_trace[k - 1]


def _run_levinson(fk: list, n: int, bits: int, store_trace: bool):
    with gmpy2.local_context(gmpy2.get_context(), precision=bits):
        zero = gmpy2.mpfr(0)
        h0 = +fk[0]
        if h0 <= 0:
            raise PrecisionExhausted("h_0 <= 0")
        c = [gmpy2.mpfr(1)]
        h = [h0]
        alpha = []
        logdet = gmpy2.log(h0)
        trace = [logdet] if store_trace else None
        for k in range(n):
            e = zero
            for j in range(k + 1):
                e += c[j] * fk[j + 1]
            a = e / h[k]
            alpha.append(a)
            c = [(c[j - 1] if j > 0 else zero)
                 - (a * c[k - j] if k - j >= 0 else zero)
                 for j in range(k + 2)]
            if k < n - 1:
                hk = h[k] * (1 - a * a)
                if hk <= 0:
                    raise PrecisionExhausted(f"h_{k + 1} <= 0 at {bits} bits")
                h.append(hk)
                logdet += gmpy2.log(hk)
                if store_trace:
                    trace.append(+logdet)
        return alpha, h, logdet, trace, c


def build_state(n: int, p: SymbolParams, bits: int | None = None,
                store_trace: bool = False, max_retries: int = 3) -> OpucState:
    """Run the recursion to degree n, doubling precision on failure.

    A nonpositive h_k is never returned silently: it triggers up to
    ``max_retries`` precision doublings and then raises.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    bits = default_bits(n) if bits is None else bits
    last = None
    for attempt in range(max_retries + 1):
        b = bits << attempt
        try:
            fk = _moments_mpfr(p, n, n + 1, b)
            alpha, h, logdet, trace, c = _run_levinson(fk, n, b, store_trace)
            return OpucState(
                n=n,
                bits=b,
                alpha=tuple(_to_mpf(a, b) for a in alpha),
                h=tuple(_to_mpf(x, b) for x in h),
                logdet=_to_mpf(logdet, b),
                coeffs=tuple(_to_mpf(x, b) for x in c),
                logdet_trace=tuple(_to_mpf(x, b) for x in trace) if store_trace else None,
            )
        except PrecisionExhausted as exc:
            last = exc
    raise PrecisionExhausted(
        f"positivity lost for n={n} even at {bits << max_retries} bits: {last}")


def levinson_extend(state: OpucState, moments) -> OpucState:
    """Advance a state one degree using the moment map k -> f_k."""
    bits = state.bits
    n = state.n
    with gmpy2.local_context(gmpy2.get_context(), precision=bits):
        fk = [_to_mpfr(moments(k)) for k in range(n + 3)]
        c = [_to_mpfr(x) for x in state.coeffs]
        hn_prev = _to_mpfr(state.h[-1])
        a_prev = _to_mpfr(state.alpha[-1]) if state.alpha else None
        hn = hn_prev * (1 - a_prev * a_prev) if a_prev is not None else hn_prev
        if hn <= 0:
            raise PrecisionExhausted(f"h_{n} <= 0 at {bits} bits")
        e = gmpy2.mpfr(0)
        for j in range(n + 1):
            e += c[j] * fk[j + 1]
        a = e / hn
        cnew = [(c[j - 1] if j > 0 else gmpy2.mpfr(0))
                - (a * c[n - j] if n - j >= 0 else gmpy2.mpfr(0))
                for j in range(n + 2)]
        logdet = _to_mpfr(state.logdet) + gmpy2.log(hn)
        return OpucState(
            n=n + 1,
            bits=bits,
            alpha=state.alpha + (_to_mpf(a, bits),),
            h=state.h + (_to_mpf(hn, bits),),
            logdet=_to_mpf(logdet, bits),
            coeffs=tuple(_to_mpf(x, bits) for x in cnew),
            logdet_trace=(state.logdet_trace + (_to_mpf(logdet, bits),)
                          if state.logdet_trace is not None else None),
        )


def initial_state(moments, bits: int = 256) -> OpucState:
    """Degree-1 state: h_0 = f_0, alpha_0 = f_1/f_0, phi_1 = z - alpha_0."""
    with gmpy2.local_context(gmpy2.get_context(), precision=bits):
        f0 = _to_mpfr(moments(0))
        f1 = _to_mpfr(moments(1))
        if f0 <= 0:
            raise PrecisionExhausted("f_0 <= 0")
        a0 = f1 / f0
        return OpucState(
            n=1, bits=bits,
            alpha=(_to_mpf(a0, bits),),
            h=(_to_mpf(f0, bits),),
            logdet=_to_mpf(gmpy2.log(f0), bits),
            coeffs=(_to_mpf(-a0, bits), mp.mpf(1)),
            logdet_trace=(_to_mpf(gmpy2.log(f0), bits),),
        )


def log_toeplitz_det(n: int, p: SymbolParams, bits: int | None = None):
    """log D_n(s, L) = sum_{k<n} log h_k = log P(no thinned point off-arc)."""
    return build_state(n, p, bits=bits).logdet


def phi_eval(state: OpucState, z):
    """(phi_n(z), phi_n*(z)) by the coupled Szego recursion from degree 0."""
    with mp.workprec(state.bits):
        z = mp.mpc(z)
        phi = mp.mpc(1)
        star = mp.mpc(1)
        for a in state.alpha:
            zp = z * phi
            phi, star = zp - a * star, star - a * zp
        return phi, star


def phi_derivative_eval(state: OpucState, z):
    """(phi_n'(z), (phi_n*)'(z)) by the differentiated recursion."""
    with mp.workprec(state.bits):
        z = mp.mpc(z)
        phi, star = mp.mpc(1), mp.mpc(1)
        dphi, dstar = mp.mpc(0), mp.mpc(0)
        for a in state.alpha:
            zp = z * phi
            dzp = phi + z * dphi
            phi, star = zp - a * star, star - a * zp
            dphi, dstar = dzp - a * dstar, dstar - a * dzp
        return dphi, dstar


def phi_zeros(state: OpucState, ctx: PrecisionContext = DEFAULT_CONTEXT,
              cap: int = ZEROS_DEGREE_CAP):
    """Zeros of phi_n: companion-matrix eigenvalues polished by Newton.

    Capped at degree ``cap``; the zero sets of interest in this package
    stay well below it.
    """
    n = state.n
    if n > cap:
        raise ValueError(f"zero finding capped at degree {cap}")
    coeffs = [complex(c) for c in state.coeffs]
    scale = max(abs(c) for c in coeffs)
    seeds = np.roots(np.array(coeffs[::-1], dtype=complex) / scale)
    with mp.workprec(state.bits):
        tol = mp.mpf(2) ** (-min(state.bits, 2000) // 2)
        roots = []
        for seed in seeds:
            z = mp.mpc(complex(seed))
            for _ in range(60):
                val, _ = phi_eval(state, z)
                dval, _ = phi_derivative_eval(state, z)
                if abs(dval) == 0:
                    break
                step = val / dval
                z = z - step
                if abs(step) < tol * (1 + abs(z)):
                    break
            val, _ = phi_eval(state, z)
            resid = abs(val) / scale
            if resid > mp.mpf("1e-8"):
                raise RuntimeError(
                    f"zero polishing stalled at residual {mp.nstr(resid, 5)}")
            roots.append(z)
        roots.sort(key=lambda w: (mp.arg(w), abs(w)))
        return roots


def toeplitz_matrix(n: int, p: SymbolParams, active_n: int | None = None,
                    ctx: PrecisionContext = DEFAULT_CONTEXT):
    """The n x n moment matrix (f_{k-j}); oracle route for determinants."""
    from .symbol import fourier_coeff

    with ctx.workprec():
        f = [fourier_coeff(k, p, n=active_n, ctx=ctx) for k in range(n)]
        a = mp.matrix(n)
        for j in range(n):
            for k in range(n):
                a[j, k] = f[abs(k - j)]
        return a
