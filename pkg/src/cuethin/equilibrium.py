"""Constrained logarithmic-energy equilibrium problem on the circle.

For decay rate x in (0, x_c) the minimizer under the piecewise-constant
external field lives on two arcs: the observation arc of half-length L
around angle 0 and a gap-side arc of half-length T around pi.  This module
solves for T(x, L) and evaluates the density, the gap-arc mass Omega, the
variational constant ell, the elliptic period tau, and the rate integral
that controls log-determinant decay.

All arc integrals are reduced, via y = cos(theta), to Gauss-Chebyshev
rules plus a closed-form Chebyshev-moment rule for the log|1 -/+ e^{i
theta}| kernels, so every quantity converges spectrally.  The per-node
transcendental work is shared across the functionals needed at one T, and
the node data that does not depend on T is cached per (L, precision).
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .numerics import (DEFAULT_CONTEXT, PrecisionContext, brent_root,
                       chebyshev_log_weights, gauss_chebyshev, gauss_legendre)

_MAX_RULE = 1 << 11


@dataclass(frozen=True)
class EquilibriumData:
    """Solved two-arc equilibrium state for one (x, L)."""

    L: object
    x: object
    T: object
    omega_mass: object
    ell: object
    x_c: object
    tau: object | None  # purely imaginary; None when an arc degenerates


def critical_x(L, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Critical rate -2 log tan(L/4): above it the gap arc closes (T=0)."""
    with ctx.workprec():
        L = mp.mpf(L)
        if not 0 < L <= mp.pi:
            raise ValueError("need 0 < L <= pi")
        return -2 * mp.log(mp.tan(L / 4))


class _Workspace:
    """Per-(L, bits) cache of the T-independent per-node quantities."""

    def __init__(self, L, bits):
        self.L = mp.mpf(L)
        self.bits = bits
        self._gamma = {}
        self._tilde = {}
        self.m_hint = 32

    def gamma(self, m):
        # observation arc in y = cos(theta) on [cos L, 1]; log kernel at y=1
        if m not in self._gamma:
            with mp.workprec(self.bits + 32):
                rule = gauss_chebyshev(m, self.bits)
                logw = chebyshev_log_weights(m, +1, self.bits)
                cL = mp.cos(self.L)
                mid, half = (cL + 1) / 2, (1 - cL) / 2
                log_half = mp.log(half)
                ys, cxs, mass = [], [], []
                for xi, w, lw in zip(rule.nodes, rule.weights, logw):
                    y = mid + half * xi
                    inv1py = 1 / mp.sqrt(1 + y)
                    ys.append(y)
                    # combined coefficient of sqrt(y + cos T) in the rate
                    # integrand: the (1/2)log(1+y) smooth part minus the
                    # log(1-y) part routed through the moment rule
                    cxs.append(inv1py * (w * mp.log(1 + y) - lw - w * log_half) / 2)
                    mass.append(w * inv1py / mp.pi)
                self._gamma[m] = (tuple(ys), tuple(cxs), tuple(mass))
        return self._gamma[m]

    def tilde(self, m):
        # gap-side arc: canonical nodes only; the interval moves with T
        if m not in self._tilde:
            with mp.workprec(self.bits + 32):
                rule = gauss_chebyshev(m, self.bits)
                logw = chebyshev_log_weights(m, -1, self.bits)
                self._tilde[m] = (rule.nodes, rule.weights, logw)
        return self._tilde[m]


_WORKSPACES: dict = {}


def _workspace(L, bits) -> _Workspace:
    key = (mp.mpf(L)._mpf_, bits)
    if key not in _WORKSPACES:
        _WORKSPACES[key] = _Workspace(L, bits)
    return _WORKSPACES[key]


def _functionals_at_m(T, ws: _Workspace, m):
    """One shared sweep: rate integral x, its T-derivative, the gap-arc
    mass, the observation-arc mass, and the two period integrals."""
    L, bits = ws.L, ws.bits
    with mp.workprec(bits + 32):
        T = mp.mpf(T)
        cT, cL, sT = mp.cos(T), mp.cos(L), mp.sin(T)

        ys, cxs, mass_w = ws.gamma(m)
        Ig = Jg = gmass = mp.mpf(0)
        for y, cx, aw in zip(ys, cxs, mass_w):
            r = mp.sqrt(y + cT)
            Ig += r * cx
            Jg += cx / r
            gmass += r * aw

        if T <= 0:
            return {
                "x": 2 / mp.pi * Ig,
                "xp": -sT / mp.pi * Jg,
                "omega": mp.mpf(0),
                "gmass": gmass,
                "tau": None,
            }

        nodes, weights, logw = ws.tilde(m)
        b = -cT
        mid, half = (b - 1) / 2, (b + 1) / 2
        log_half = mp.log(half)
        It = Jt = omega = tauN = mp.mpf(0)
        for xi, w, lw in zip(nodes, weights, logw):
            y = mid + half * xi
            s = 1 / mp.sqrt((cL - y) * (1 - y))
            bracket = (lw + w * log_half - w * mp.log(1 - y)) / 2
            sb = s * bracket
            It += (b - y) * sb
            Jt += sb
            omega += w * (b - y) * s
            tauN += w * s
        omega /= mp.pi

        # inter-arc period integral on y in [-cT, cL]
        mid2, half2 = (cL - cT) / 2, (cL + cT) / 2
        tauD = mp.mpf(0)
        for xi, w in zip(nodes, weights):
            y = mid2 + half2 * xi
            tauD += w / mp.sqrt(1 - y * y)

        return {
            "x": 2 / mp.pi * (Ig + It),
            "xp": sT / mp.pi * (Jt - Jg),
            "omega": omega,
            "gmass": gmass,
            "tau": mp.mpc(0, 1) * 2 * tauN / tauD,
        }


def _functionals(T, L, bits, tol, need=("x",)):
    ws = _workspace(L, bits)
    m = max(32, ws.m_hint // 2)
    prev = _functionals_at_m(T, ws, m)
    while m <= _MAX_RULE:
        m *= 2
        cur = _functionals_at_m(T, ws, m)
        ok = True
        for key in need:
            a, b = cur[key], prev[key]
            if a is None:
                continue
            if abs(a - b) > tol * (1 + abs(a)):
                ok = False
                break
        if ok:
            ws.m_hint = m
            return cur
        prev = cur
    return prev


def _ell_of_T(T, L, bits, tol):
    # 1 - sqrt(r) rewritten as (1-r)/(1+sqrt(r)): no cancellation, no
    # removable singularity at u=0 left to patch
    with mp.workprec(bits + 32):
        cT, cL = mp.cos(mp.mpf(T)), mp.cos(mp.mpf(L))

        def f(u):
            den = u * u - 2 * u * cL + 1
            r = (u * u + 2 * u * cT + 1) / den
            return 2 * (cT + cL) / (den * (1 + mp.sqrt(r)))

        m = 16
        rule = gauss_legendre(m, bits)
        prev = mp.fsum(w * f((1 + xi) / 2) for xi, w in zip(rule.nodes, rule.weights)) / 2
        while m <= _MAX_RULE:
            m *= 2
            rule = gauss_legendre(m, bits)
            val = mp.fsum(w * f((1 + xi) / 2) for xi, w in zip(rule.nodes, rule.weights)) / 2
            if abs(val - prev) <= tol * (1 + abs(val)):
                return val
            prev = val
        return prev


def _default_tol(bits):
    # everything downstream (rate integrals at 1e-11, finite differences
    # at step 1e-5, parametrix identities at 1e-8) is saturated well
    # before 1e-24; chasing 2^(-bits/2) here only inflates rule sizes
    # near the degenerate support endpoints
    return max(mp.mpf(2) ** (-(bits // 2)), mp.mpf("1e-24"))


def solve_T(x, L, ctx: PrecisionContext = DEFAULT_CONTEXT, tol=None):
    """Support half-length T of the gap-side arc for rate x in [0, x_c].

    The defining integral is continuous and strictly decreasing in T with
    endpoint values x_c (T=0) and 0 (T=pi-L), so a Brent solve on the full
    bracket needs no initial guess.
    """
    bits = ctx.bits
    with mp.workprec(bits + 32):
        x = mp.mpf(x)
        L = mp.mpf(L)
        xc = critical_x(L, ctx)
        if x < 0 or x > xc * (1 + mp.mpf(2) ** (-bits // 4)):
            raise ValueError(f"x={x} outside [0, x_c={xc}]")
        if x >= xc:
            return mp.mpf(0)
        if x == 0:
            return mp.pi - L
        if tol is None:
            tol = _default_tol(bits)
        qtol = tol / 16

        def resid(t):
            # exact endpoint values; the quadratures lose their spectral
            # rate exactly at the degenerate supports
            if t <= 0:
                return xc - x
            if t >= mp.pi - L:
                return -x
            return _functionals(t, L, bits, qtol)["x"] - x

        return brent_root(resid, 0, mp.pi - L, tol=tol, ctx=ctx)


def solve_equilibrium(x, L, ctx: PrecisionContext = DEFAULT_CONTEXT) -> EquilibriumData:
    """Solve for T and package density/mass/ell/tau for one (x, L)."""
    bits = ctx.bits
    with mp.workprec(bits + 32):
        x = mp.mpf(x)
        L = mp.mpf(L)
        tol = _default_tol(bits)
        T = solve_T(x, L, ctx)
        degenerate = T == 0 or T >= mp.pi - L
        fn = _functionals(T, L, bits, tol, need=("omega", "tau"))
        return EquilibriumData(
            L=L, x=x, T=T,
            omega_mass=fn["omega"],
            ell=_ell_of_T(T, L, bits, tol),
            x_c=critical_x(L, ctx),
            tau=None if degenerate else fn["tau"],
        )


def density(theta, eq: EquilibriumData, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Equilibrium density at angle theta; 0 off the two arcs.

    Blows up like an inverse square root at the observation-arc edges
    (returned as computed; +inf exactly at the edge) and vanishes like a
    square root at the gap-arc edges.
    """
    with ctx.workprec():
        t = mp.mpf(theta)
        t = t - 2 * mp.pi * mp.floor((t + mp.pi) / (2 * mp.pi))
        t = abs(t)
        L, T = mp.mpf(eq.L), mp.mpf(eq.T)
        on_gamma = t <= L
        on_tilde = t >= mp.pi - T
        if not (on_gamma or on_tilde):
            return mp.mpf(0)
        num = 2 * mp.cos((t + T) / 2) * mp.cos((t - T) / 2)   # cos t + cos T
        den = 2 * mp.sin((L + t) / 2) * mp.sin((L - t) / 2)   # cos t - cos L
        if den == 0:
            return mp.inf
        return mp.sqrt(num / den) / (2 * mp.pi)


def omega_mass(x, L, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Equilibrium mass of the gap-side arc; 0 once x >= x_c."""
    bits = ctx.bits
    with mp.workprec(bits + 32):
        L = mp.mpf(L)
        if mp.mpf(x) >= critical_x(L, ctx):
            return mp.mpf(0)
        T = solve_T(x, L, ctx)
        return _functionals(T, L, bits, _default_tol(bits), need=("omega",))["omega"]


def gamma_mass(eq: EquilibriumData, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Equilibrium mass of the observation arc (complements omega_mass)."""
    bits = ctx.bits
    with mp.workprec(bits + 32):
        return _functionals(mp.mpf(eq.T), mp.mpf(eq.L), bits,
                            _default_tol(bits), need=("gmass",))["gmass"]


def ell_constant(x, L, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Variational (Euler-Lagrange) constant; -2 log sin(L/2) past x_c."""
    bits = ctx.bits
    with mp.workprec(bits + 32):
        L = mp.mpf(L)
        x = mp.mpf(x)
        tol = _default_tol(bits)
        if x >= critical_x(L, ctx):
            return _ell_of_T(mp.mpf(0), L, bits, tol)
        return _ell_of_T(solve_T(x, L, ctx), L, bits, tol)


def period_tau(x, L, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Ratio of the two real period integrals, as i * (positive real).

    Only defined in the genuine two-arc phase 0 < x < x_c.
    """
    bits = ctx.bits
    with mp.workprec(bits + 32):
        L = mp.mpf(L)
        T = solve_T(x, L, ctx)
        if T == 0 or T >= mp.pi - L:
            raise ValueError("period is defined only for 0 < T < pi - L")
        return _functionals(T, L, bits, _default_tol(bits), need=("tau",))["tau"]


def tau_from_T(T, L, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Period from a known support parameter (skips the T solve)."""
    bits = ctx.bits
    with mp.workprec(bits + 32):
        return _functionals(mp.mpf(T), mp.mpf(L), bits,
                            _default_tol(bits), need=("tau",))["tau"]


def rate_from_T(T, L, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """The decay rate x belonging to a support parameter T (the defining
    integral evaluated directly, no root solve)."""
    bits = ctx.bits
    with mp.workprec(bits + 32):
        return _functionals(mp.mpf(T), mp.mpf(L), bits,
                            _default_tol(bits), need=("x",))["x"]


def omega_rate_integral(x, L, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """int_0^x Omega_{xi, L} d xi, the n^-2 log-determinant decay rate.

    Evaluated on the support parameter: d xi = x'(That) dThat turns the
    xi-integral (whose integrand has a log-singular derivative at x_c)
    into a C^1 integrand on [T(x), pi - L] needing no root solves.
    """
    bits = ctx.bits
    with mp.workprec(bits + 32):
        x = mp.mpf(x)
        L = mp.mpf(L)
        xc = critical_x(L, ctx)
        if x < 0 or x > xc * (1 + mp.mpf(2) ** (-bits // 4)):
            raise ValueError(f"x={x} outside [0, x_c]")
        if x == 0:
            return mp.mpf(0)
        T_lo = solve_T(min(x, xc), L, ctx)
        T_hi = mp.pi - L
        # integrand accuracy one digit past the ladder target; tighter
        # costs large rule sizes at nodes close to T_hi where the gap-arc
        # quadrature loses its spectral rate
        qtol = mp.mpf("1e-12")

        def integrand(t):
            fn = _functionals(t, L, bits, qtol, need=("omega", "xp"))
            return fn["omega"] * (-fn["xp"])

        def at_m(m):
            rule = gauss_legendre(m, bits)
            mid, half = (T_lo + T_hi) / 2, (T_hi - T_lo) / 2
            return half * mp.fsum(w * integrand(mid + half * xi)
                                  for xi, w in zip(rule.nodes, rule.weights))

        prev = at_m(32)
        for m in (64, 128, 256):
            val = at_m(m)
            if abs(val - prev) < mp.mpf("1e-11") * (1 + abs(val)):
                return val
            prev = val
        return prev


def euler_lagrange_check(eq: EquilibriumData, z,
                         ctx: PrecisionContext = DEFAULT_CONTEXT):
    """Variational residual 2 int log|z - e^{i t}| dmu - V(z) + ell.

    Approximately zero on the support, strictly negative off it.  Uses
    adaptive tanh-sinh with splits at the arc edges and at arg(z); this is
    a verification hook, not a hot path.
    """
    with mp.workprec(ctx.bits + 32):
        z = mp.mpc(z)
        L, T, x = mp.mpf(eq.L), mp.mpf(eq.T), mp.mpf(eq.x)
        theta_z = mp.arg(z)

        def psi(t):
            return density(t, eq, PrecisionContext(ctx.bits + 32))

        def logterm(t):
            return mp.log(abs(z - mp.expj(t)))

        pieces = [(-L, L), (mp.pi - T, mp.pi + T)] if T > 0 else [(-L, L)]
        total = mp.mpf(0)
        for a, b in pieces:
            pts = [a, b]
            for tz in (theta_z, theta_z + 2 * mp.pi):
                if a < tz < b:
                    pts.insert(1, tz)
            total += mp.quad(lambda t: logterm(t) * psi(t), pts)
        tc = theta_z - 2 * mp.pi * mp.floor((theta_z + mp.pi) / (2 * mp.pi))
        V = mp.mpf(0) if abs(tc) <= L else x
        return 2 * total - V + mp.mpf(eq.ell)
