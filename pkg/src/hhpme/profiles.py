"""Shooting solvers for self-similar profiles and the Kaplan test function.

All profiles solve a radial second-order ODE with a y^sigma weight and a
degenerate edge where f and the flux (f^m)' vanish together.  The
integration variable is g = f^m (flux form), which tames the degenerate
f^{m-1} factor at the support edge; the edge is located by event
detection on g crossing zero.  Integration starts at y0 << 1 from the
local expansion consistent with the y^{sigma+1} flux behavior at the
origin, so the singular weight never hits the integrator head-on.

Profile kinds and their regimes:

  Forward      p < p_G   u = t^{a*} f(|x| t^{-b*}), global grow-up
  Backward     p_G<p<m   u = (T-t)^{-a} f(|x| (T-t)^b), blow-up
  Exponential  p = p_G   u = e^{a* t} f(|x| e^{-b* t}), 2 b* = (m-1) a*,
                         a* found by shooting (amplitude fixed by scaling)
  Kaplan       p = m     stationary test function of the blow-up
                         functional, -v'' - (N-1)v'/y + v^{1/m}/(m-1) = y^sigma v
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NoSignChangeError, OutOfRangeError, RegimeMismatchError, WrongRegimeError
from .radial import RadialField
from .regimes import derive, subsolution_constants

FORWARD = "Forward"
BACKWARD = "Backward"
EXPONENTIAL = "Exponential"
KAPLAN = "Kaplan"

_KIND_TOL = 1e-12


@dataclass
class Profile:
    """A shot profile with its support radius and shooting metadata."""

    kind: str
    y: np.ndarray
    f: np.ndarray
    flux: np.ndarray
    support_radius: float
    shoot_param: dict
    residual: float
    exponents: object
    bracket: tuple
    y0: float

    def __call__(self, yq):
        """Monotone (linear) interpolation of f; zero beyond the edge."""
        return np.interp(np.asarray(yq, dtype=float), self.y, self.f, left=self.f[0], right=0.0)

    def flux_at(self, yq):
        return np.interp(np.asarray(yq, dtype=float), self.y, self.flux, left=self.flux[0], right=0.0)

    def sup(self):
        return float(np.max(self.f))


def _require_regime(kind, e, consts):
    p, m = e.p, e.m
    pg = consts.p_G
    tol = _KIND_TOL * max(1.0, abs(pg), abs(m))
    if kind == FORWARD and not p < pg - tol:
        raise RegimeMismatchError(f"Forward profile needs p < p_G; got p={p}, p_G={pg}")
    if kind == BACKWARD and not (pg + tol < p < m - tol):
        raise RegimeMismatchError(f"Backward profile needs p_G < p < m; got p={p}")
    if kind == EXPONENTIAL and abs(p - pg) > tol:
        raise RegimeMismatchError(f"Exponential profile needs p = p_G; got p={p}, p_G={pg}")
    if kind == KAPLAN and abs(p - m) > tol:
        raise RegimeMismatchError(f"Kaplan function needs p = m; got p={p}, m={m}")
    if kind not in (FORWARD, BACKWARD, EXPONENTIAL, KAPLAN):
        raise OutOfRangeError("kind", f"unknown profile kind {kind!r}")


def _coef_pair(kind, e, consts, alpha_star=None):
    """The positive (a, b) pair multiplying f and y f' in the profile ODE."""
    if kind == FORWARD:
        return consts.alpha_star, consts.beta_star
    if kind == BACKWARD:
        return consts.alpha, consts.beta
    if kind == EXPONENTIAL:
        if alpha_star is None:
            raise OutOfRangeError("alpha_star", "Exponential kind needs the shooting value")
        return alpha_star, 0.5 * (e.m - 1.0) * alpha_star
    raise OutOfRangeError("kind", f"no coefficient pair for {kind!r}")


def profile_ode_rhs(kind, e, consts, y, fm, flux, alpha_star=None):
    """Right-hand side of the first-order system in (f^m, (f^m)').

    Self-similar kinds satisfy
      (f^m)'' + (N-1)(f^m)'/y + y^sigma f^p - a f + b y f' = 0
    with (a, b) the regime's positive exponent pair; for the Kaplan kind
    the state is (v, v') and
      v'' + (N-1) v'/y = v^{1/m}/(m-1) - y^sigma v.
    Returns (d fm / dy, d flux / dy).
    """
    n = e.dim
    if kind == KAPLAN:
        v, vp = fm, flux
        vc = max(v, 0.0)
        return vp, -(n - 1.0) / y * vp + vc ** (1.0 / e.m) / (e.m - 1.0) - y**e.sigma * vc
    a, b = _coef_pair(kind, e, consts, alpha_star)
    g = max(fm, 0.0)
    f = g ** (1.0 / e.m)
    fp = flux * g ** ((1.0 - e.m) / e.m) / e.m if g > 0.0 else 0.0
    return flux, -(n - 1.0) / y * flux - y**e.sigma * f**e.p + a * f - b * y * fp


class _ShootODE:
    """Integrable form of the profile equations, in (g, y^{N-1} g')."""

    def __init__(self, kind, e, consts, alpha_star=None):
        self.kind = kind
        self.e = e
        self.n = e.dim
        self.sigma = e.sigma
        if kind == KAPLAN:
            self.a = self.b = None
        else:
            self.a, self.b = _coef_pair(kind, e, consts, alpha_star)

    def rhs(self, y, state):
        g, big = state
        yn1 = y ** (self.n - 1.0)
        if self.kind == KAPLAN:
            v = max(g, 0.0)
            src = v ** (1.0 / self.e.m) / (self.e.m - 1.0) - y**self.sigma * v
            return [big / yn1, yn1 * src]
        gc = max(g, 0.0)
        f = gc ** (1.0 / self.e.m)
        gp = big / yn1
        fp = gp * gc ** ((1.0 - self.e.m) / self.e.m) / self.e.m if gc > 1e-300 else 0.0
        src = self.a * f - self.b * y * fp - y**self.sigma * f**self.e.p
        return [gp, yn1 * src]

    def series_start(self, value0, y0):
        """Leading local expansion at the origin.

        For the self-similar kinds (g = f^m):
          g  = g0 - f0^p y^{s+2}/((N+s)(s+2)) + a f0 y^2/(2N)
          G  = -f0^p y^{N+s}/(N+s) + a f0 y^N / N
        and for the Kaplan kind (state v):
          v  = v0 + v0^{1/m} y^2/(2N(m-1)) - v0 y^{s+2}/((N+s)(s+2))
          V  = v0^{1/m} y^N/(N(m-1)) - v0 y^{N+s}/(N+s).
        """
        n, s, m = self.n, self.sigma, self.e.m
        if self.kind == KAPLAN:
            v0 = value0
            v = v0 + v0 ** (1.0 / m) * y0**2 / (2.0 * n * (m - 1.0)) - v0 * y0 ** (s + 2.0) / ((n + s) * (s + 2.0))
            vv = v0 ** (1.0 / m) * y0**n / (n * (m - 1.0)) - v0 * y0 ** (n + s) / (n + s)
            return [v, vv]
        f0 = value0
        g0 = f0**self.e.m
        g = g0 - f0**self.e.p * y0 ** (s + 2.0) / ((n + s) * (s + 2.0)) + self.a * f0 * y0**2 / (2.0 * n)
        gg = -(f0**self.e.p) * y0 ** (n + s) / (n + s) + self.a * f0 * y0**n / n
        return [g, gg]


_CROSSED = 1
_TURNED = -1


def _integrate(ode, value0, y0, y_max, rtol, dense=False):
    """Integrate until g hits zero (crossed) or the flux turns positive.

    Returns (outcome, sol) with outcome in {_CROSSED, _TURNED} (reaching
    y_max with positive g counts as turned: the trajectory failed to
    touch down).
    """
    state0 = ode.series_start(value0, y0)

    def ev_zero(y, s):
        return s[0]

    ev_zero.terminal = True
    ev_zero.direction = -1.0

    def ev_turn(y, s):
        return s[1]

    ev_turn.terminal = True
    ev_turn.direction = 1.0

    scale = max(abs(state0[0]), 1e-12)
    sol = solve_ivp(
        ode.rhs,
        (y0, y_max),
        state0,
        method="RK45",
        events=(ev_zero, ev_turn),
        rtol=rtol,
        atol=1e-14 * scale,
        dense_output=dense,
        max_step=y_max / 50.0,
    )
    if sol.t_events[0].size:
        return _CROSSED, sol
    return _TURNED, sol


@dataclass
class ShootConfig:
    """Search controls for shoot()."""

    scan_lo: float = 1e-4
    scan_hi: float = 1e4
    scan_points: int = 49
    bracket: tuple | None = None
    y0_scale: float = 1e-6
    y_max: float = 80.0
    rtol: float = 1e-10
    max_bisect: int = 80
    samples: int = 1200


def shoot(kind, e, search=None):
    """Find a compactly supported profile by bisection.

    The shooting parameter is f(0) (the Kaplan value v(0) for that
    kind); for the Exponential kind the amplitude is fixed at f(0) = 1
    by scaling invariance and the parameter is the growth rate a*, with
    b* slaved through 2 b* = (m-1) a*.  Bisection targets simultaneous
    touchdown of f and its flux at a finite edge; the boundary-condition
    defect is recorded as `residual`.

    Raises RegimeMismatchError when the kind is inadmissible for the
    exponents and NoSignChangeError when the logarithmic scan finds no
    bracket.
    """
    search = search or ShootConfig()
    consts = derive(e)
    _require_regime(kind, e, consts)
    exponential = kind == EXPONENTIAL

    def make_ode(theta):
        if exponential:
            return _ShootODE(kind, e, consts, alpha_star=theta), 1.0
        return _ShootODE(kind, e, consts), theta

    y0 = search.y0_scale

    def outcome(theta):
        ode, f0 = make_ode(theta)
        res, _ = _integrate(ode, f0, y0, search.y_max, search.rtol)
        return res

    if search.bracket is not None:
        lo, hi = search.bracket
        s_lo, s_hi = outcome(lo), outcome(hi)
        if s_lo == s_hi:
            raise NoSignChangeError(
                f"{kind}: supplied bracket ({lo:g}, {hi:g}) does not straddle the target behavior"
            )
    else:
        thetas = np.geomspace(search.scan_lo, search.scan_hi, search.scan_points)
        signs = []
        lo = hi = None
        prev_theta = prev_sign = None
        for th in thetas:
            sg = outcome(th)
            signs.append(sg)
            if prev_sign is not None and sg != prev_sign:
                lo, hi = prev_theta, th
                s_lo, s_hi = prev_sign, sg
                break
            prev_theta, prev_sign = th, sg
        if lo is None:
            raise NoSignChangeError(
                f"{kind}: no sign change over scan [{search.scan_lo:g}, {search.scan_hi:g}] "
                f"({search.scan_points} points, all outcomes {signs[0]})"
            )
    bracket0 = (lo, hi)

    last_cross = lo if s_lo == _CROSSED else hi
    for _ in range(search.max_bisect):
        mid = math.sqrt(lo * hi) if lo > 0 else 0.5 * (lo + hi)
        sg = outcome(mid)
        if sg == _CROSSED:
            last_cross = mid
        if sg == s_lo:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break

    ode, f0 = make_ode(last_cross)
    res, sol = _integrate(ode, f0, y0, search.y_max, search.rtol, dense=True)
    if res != _CROSSED:
        raise NoSignChangeError(f"{kind}: converged parameter lost the touchdown event")
    edge = float(sol.t_events[0][0])
    ys = np.linspace(y0, edge, search.samples)
    gs, bigs = sol.sol(ys)
    gs = np.maximum(gs, 0.0)
    flux = bigs / ys ** (e.dim - 1.0)
    if kind == KAPLAN:
        f = gs
    else:
        f = gs ** (1.0 / e.m)
    g_max = float(np.max(gs))
    edge_flux = float(sol.y_events[0][0][1]) / edge ** (e.dim - 1.0)
    residual = abs(edge_flux) * edge / max(g_max, 1e-300)

    shoot_param = {"f0": f0 if not exponential else 1.0}
    if exponential:
        shoot_param["alpha_star"] = last_cross
        shoot_param["beta_star"] = 0.5 * (e.m - 1.0) * last_cross
    else:
        shoot_param["f0"] = last_cross
    return Profile(
        kind=kind,
        y=ys,
        f=f,
        flux=flux,
        support_radius=edge,
        shoot_param=shoot_param,
        residual=residual,
        exponents=e,
        bracket=bracket0,
        y0=y0,
    )


def evaluate_selfsimilar(profile, consts, t, grid):
    """Sample the self-similar solution built from a profile onto a grid.

    Forward:     u(t, r) = t^{a*} f(r t^{-b*}),    t > 0
    Exponential: u(t, r) = e^{a* t} f(r e^{-b* t}), any t
    """
    if profile.kind == FORWARD:
        if t <= 0.0:
            raise OutOfRangeError("t", f"forward self-similar form needs t > 0, got {t}")
        amp = t ** consts.alpha_star
        yq = grid.centers * t ** (-consts.beta_star)
    elif profile.kind == EXPONENTIAL:
        a = profile.shoot_param["alpha_star"]
        b = profile.shoot_param["beta_star"]
        amp = math.exp(a * t)
        yq = grid.centers * math.exp(-b * t)
    else:
        raise RegimeMismatchError(f"evaluate_selfsimilar supports Forward/Exponential, got {profile.kind}")
    return RadialField(grid, amp * profile(yq), _check=False)


def profile_to_field(profile, grid):
    """Sample a profile directly onto a grid (no rescaling)."""
    return RadialField(grid, profile(grid.centers), _check=False)


def subsolution_field(e, amplitude, T, t, grid):
    """The explicit blow-up subsolution sampled on a grid.

    S(t, r) = (T-t)^{-alpha} A (1 - y^2/a^2)_+^{1/(m-1)},
    y = r (T-t)^beta, with a^2 = m A^{m-1} / (beta (m-1)).
    Valid for p_G < p < m and 0 <= t < T.
    """
    if not (0.0 <= t < T):
        raise OutOfRangeError("t", f"need 0 <= t < T, got t={t}, T={T}")
    sc = subsolution_constants(e, amplitude)
    y = grid.centers * (T - t) ** sc.beta
    z = np.maximum(1.0 - (y / sc.a_width) ** 2, 0.0)
    vals = (T - t) ** (-sc.alpha) * amplitude * z ** (1.0 / (e.m - 1.0))
    return RadialField(grid, vals, _check=False)


def subsolution_values(e, amplitude, T, t, r):
    """Pointwise subsolution values at radii r (same formula as above)."""
    sc = subsolution_constants(e, amplitude)
    y = np.asarray(r, dtype=float) * (T - t) ** sc.beta
    z = np.maximum(1.0 - (y / sc.a_width) ** 2, 0.0)
    return (T - t) ** (-sc.alpha) * amplitude * z ** (1.0 / (e.m - 1.0))
