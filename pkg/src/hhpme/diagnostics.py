"""Quantitative checks: energy, rate fits, inequality property tests,
weighted-interpolation ratio estimates, the Kaplan functional monitor,
and the small-data threshold experiment.

Fits report r^2 and refuse a verdict below 0.99, which separates
transient from asymptotic behavior in finite-horizon runs.  The
discrete gradient used for every Dirichlet-type quantity reuses the
Laplacian's edge fluxes, so the discrete L^{r+1} identity telescopes
consistently.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConditionsFailError,
    EmptyWindowError,
    OutOfRangeError,
    PreconditionViolatedError,
    RegimeMismatchError,
)
from .profiles import FORWARD, KAPLAN, evaluate_selfsimilar, profile_to_field
from .radial import RadialField, poly_bump, weighted_integral
from .regimes import ckn_check, derive, prop32_ckn_params
from .solver import VERDICT_BLOWUP, VERDICT_HORIZON, Caps, make_problem, run

POWER_LAW = "PowerLaw"
EXPONENTIAL_LAW = "Exponential"


# ---------------------------------------------------------------------------
# energy and the discrete L^{r+1} identity

@dataclass(frozen=True)
class EnergyReport:
    """E(v) = ||grad v^m||_2^2 / 2 - (m/(m+p)) int |x|^sigma v^{m+p} dx."""

    dirichlet: float
    potential: float
    total: float


def grad_power_sq_norm(field, exponent):
    """|| grad (f^exponent) ||_2^2 from the Laplacian's edge gradients."""
    grid = field.grid
    g = field.values ** float(exponent)
    grad = (g[1:] - g[:-1]) / grid.center_gaps
    return float(np.sum(grid.face_areas * grad * grad * grid.center_gaps))


def energy(field, e):
    """Energy report for a field under exponents e."""
    dirichlet = 0.5 * grad_power_sq_norm(field, e.m)
    potential = e.m / (e.m + e.p) * weighted_integral(field, e.m + e.p, e.sigma)
    return EnergyReport(dirichlet=dirichlet, potential=potential, total=dirichlet - potential)


def lq_identity_terms(field, e, r):
    """Terms of the discrete d/dt ||u||_{r+1}^{r+1} identity.

    Returns gn_dirichlet = (4 m r (r+1)/(m+r)^2) ||grad u^{(m+r)/2}||_2^2,
    paired_dirichlet = the flux-paired form that telescopes exactly
    against the discrete Laplacian, and source = (r+1) int |x|^sigma
    u^{p+r} dx.
    """
    grid = field.grid
    u = field.values
    m, p = e.m, e.p
    gn = 4.0 * m * r * (r + 1.0) / (m + r) ** 2 * grad_power_sq_norm(field, 0.5 * (m + r))
    g = u**m
    ur = u**r
    paired = (r + 1.0) * float(
        np.sum(grid.face_areas * (g[1:] - g[:-1]) * (ur[1:] - ur[:-1]) / grid.center_gaps)
    )
    source = (r + 1.0) * weighted_integral(field, p + r, e.sigma)
    return {"gn_dirichlet": gn, "paired_dirichlet": paired, "source": source}


@dataclass(frozen=True)
class BlowUpFunctional:
    """I = ||u||_{m+1}^{m+1}, the energy, and the Kaplan pairing."""

    I: float
    E: float
    kaplan: float | None


def blowup_functionals(field, e, vstar_field=None):
    i_val = float(np.sum(field.values ** (e.m + 1.0) * field.grid.volumes))
    e_val = energy(field, e).total
    kap = None
    if vstar_field is not None:
        kap = float(np.sum(field.values * vstar_field.values * field.grid.volumes))
    return BlowUpFunctional(I=i_val, E=e_val, kaplan=kap)


# ---------------------------------------------------------------------------
# rate fitting

@dataclass(frozen=True)
class RateFit:
    window: tuple
    model: str
    fitted: float
    r_squared: float
    intercept: float

    @property
    def trustworthy(self):
        return self.r_squared >= 0.99


def rate_fit(t, y, model, window):
    """Least-squares exponent (PowerLaw, on log t / log y) or rate
    (Exponential, on t / log y) over the given time window."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    lo, hi = window
    sel = (t >= lo) & (t <= hi) & (y > 0.0)
    if model == POWER_LAW:
        sel &= t > 0.0
    if np.count_nonzero(sel) < 3:
        raise EmptyWindowError(f"window [{lo:g}, {hi:g}] selects {np.count_nonzero(sel)} points")
    ts = t[sel]
    ys = np.log(y[sel])
    xs = np.log(ts) if model == POWER_LAW else ts
    if model not in (POWER_LAW, EXPONENTIAL_LAW):
        raise OutOfRangeError("model", f"unknown fit model {model!r}")
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return RateFit(window=(lo, hi), model=model, fitted=float(slope), r_squared=r2, intercept=float(intercept))


def estimate_blowup_time(simrun, norm="l_mplus1"):
    """Affine fit of ||u||^{-(p-1)} vs t over the last decade before
    detection; exact for the pure-reaction ODE (the blow-up rate makes
    this quantity asymptotically affine)."""
    if simrun.verdict.kind != VERDICT_BLOWUP:
        raise PreconditionViolatedError("blow-up time estimate needs a BlowUpDetected run")
    p = simrun.config["p"]
    t = simrun.series["t"]
    y = simrun.series[norm]
    td = simrun.verdict.t_detect
    sel = (t >= td / 10.0) & (t <= td) & (y > 0.0)
    if np.count_nonzero(sel) < 3:
        raise EmptyWindowError("fewer than 3 series rows in the last decade before detection")
    z = y[sel] ** (-(p - 1.0))
    slope, intercept = np.polyfit(t[sel], z, 1)
    if slope >= 0.0:
        raise PreconditionViolatedError("norm series is not diverging; cannot extrapolate")
    return float(-intercept / slope)


# ---------------------------------------------------------------------------
# blow-up rate bound (negative-energy data)

@dataclass(frozen=True)
class BlowupBoundReport:
    K: float
    t_hat: float
    margin: float
    n_points: int

    @property
    def passed(self):
        return self.margin <= 1.0


def blowup_bound_check(simrun, e):
    """Check ||u(t)||_{m+1} <= K (T_hat - t)^{-1/(p-1)} with the explicit

        K = [ m ||u0||_{m+1}^{m+p} / ((p-1)(m+p) |E(u0)|) ]^{1/(p-1)}

    over the last decade before detection.  margin is the worst ratio
    of measured to bound; preconditions: blow-up verdict, p >= m,
    E(u0) < 0.
    """
    if simrun.verdict.kind != VERDICT_BLOWUP:
        raise PreconditionViolatedError("bound check needs a BlowUpDetected run")
    if e.p < e.m:
        raise PreconditionViolatedError(f"bound requires p >= m, got p={e.p} < m={e.m}")
    t0, u0 = simrun.snapshots[0]
    e0 = energy(u0, e).total
    if e0 >= 0.0:
        raise PreconditionViolatedError(f"bound requires E(u0) < 0, got {e0:g}")
    u0_norm = u0.norm_lq(e.m + 1.0)
    K = (e.m * u0_norm ** (e.m + e.p) / ((e.p - 1.0) * (e.m + e.p) * abs(e0))) ** (1.0 / (e.p - 1.0))
    t_hat = estimate_blowup_time(simrun)
    t = simrun.series["t"]
    y = simrun.series["l_mplus1"]
    td = simrun.verdict.t_detect
    sel = (t >= td / 10.0) & (t <= td) & (t < t_hat)
    if np.count_nonzero(sel) < 3:
        raise EmptyWindowError("too few rows before the extrapolated blow-up time")
    bound = K * (t_hat - t[sel]) ** (-1.0 / (e.p - 1.0))
    margin = float(np.max(y[sel] / bound))
    return BlowupBoundReport(K=K, t_hat=t_hat, margin=margin, n_points=int(np.count_nonzero(sel)))


# ---------------------------------------------------------------------------
# Kaplan functional monitor (p = m)

@dataclass(frozen=True)
class KaplanReport:
    times: np.ndarray
    values: np.ndarray
    c_vstar: float
    t_divergence: float
    nondecreasing: bool
    dominates: bool
    domination_defect: float


def kaplan_constant(vstar_field):
    """C(v*) = ||v*||_1^{1-m} ||v*||_inf^{-(m-1)/m} ... with m from use.

    Returned as a callable-free pair (l1, linf); the m-dependent
    assembly happens in kaplan_monitor.
    """
    l1 = vstar_field.mass()
    linf = vstar_field.norm_inf()
    return l1, linf


def kaplan_monitor(simrun, vstar, rel_tol=0.05):
    """Series J(t) = int u v* dx and its superlinear ODE lower bound.

    The bound J' >= (C(v*)/(m-1)) J^m with C(v*) = ||v*||_1^{1-m}
    ||v*||_inf^{-(m-1)/m} integrates to J(t)^{1-m} <= J(0)^{1-m} - C t,
    which diverges at t_divergence = J(0)^{1-m} / C; `dominates` checks
    the integrated form within rel_tol.  Requires p = m and a Kaplan
    profile.
    """
    m = simrun.config["m"]
    p = simrun.config["p"]
    if abs(p - m) > 1e-12 * max(1.0, m):
        raise RegimeMismatchError(f"Kaplan monitor needs p = m, got p={p}, m={m}")
    if vstar.kind != KAPLAN:
        raise RegimeMismatchError(f"expected a Kaplan profile, got {vstar.kind}")
    if not simrun.snapshots:
        raise PreconditionViolatedError("run has no snapshots")
    grid = simrun.snapshots[0][1].grid
    vf = profile_to_field(vstar, grid)
    times = np.array([t for t, _ in simrun.snapshots])
    vals = np.array(
        [float(np.sum(f.values * vf.values * grid.volumes)) for _, f in simrun.snapshots]
    )
    l1, linf = kaplan_constant(vf)
    c = l1 ** (1.0 - m) * linf ** (-(m - 1.0) / m)
    j0 = vals[0]
    if j0 <= 0.0:
        t_div = math.inf
    else:
        t_div = j0 ** (1.0 - m) / c
    scale = float(np.max(vals)) if vals.size else 0.0
    nondec = bool(np.all(np.diff(vals) >= -1e-9 * max(scale, 1e-300)))
    pos = vals > 0.0
    lhs = np.full_like(vals, np.inf)
    lhs[pos] = vals[pos] ** (1.0 - m)
    rhs = (j0 ** (1.0 - m) if j0 > 0 else np.inf) - c * times
    defect = float(np.max(lhs - rhs)) if j0 > 0 else 0.0
    dominates = defect <= rel_tol * abs(j0 ** (1.0 - m)) if j0 > 0 else False
    return KaplanReport(
        times=times,
        values=vals,
        c_vstar=c,
        t_divergence=t_div,
        nondecreasing=nondec,
        dominates=dominates,
        domination_defect=defect,
    )


# ---------------------------------------------------------------------------
# convergence to self-similarity (p < p_G)

def selfsim_convergence(simrun, profile, consts):
    """Series t^{-a*} ||u(t) - U*(t)||_inf at snapshot times t > 0."""
    if profile.kind != FORWARD or consts.alpha_star is None:
        raise RegimeMismatchError("self-similar convergence needs p < p_G and a Forward profile")
    ts, vals = [], []
    for t, f in simrun.snapshots:
        if t <= 0.0:
            continue
        ustar = evaluate_selfsimilar(profile, consts, t, f.grid)
        ts.append(t)
        vals.append(t ** (-consts.alpha_star) * float(np.max(np.abs(f.values - ustar.values))))
    return np.asarray(ts), np.asarray(vals)


# ---------------------------------------------------------------------------
# pointwise power inequality (property test)

def lemma35_ratio(x, y, m, p, tau):
    """|X^p - Y^p|^2 / ( max^{2(p-1)-tau(m-1)} |X^m - Y^m|^tau |X-Y|^{2-tau} ).

    The diagonal X = Y is excluded by the caller (the inequality is
    trivial there).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    big = np.maximum(x, y)
    num = np.abs(x**p - y**p) ** 2
    den = (
        big ** (2.0 * (p - 1.0) - tau * (m - 1.0))
        * np.abs(x**m - y**m) ** tau
        * np.abs(x - y) ** (2.0 - tau)
    )
    return num / den


def lemma35_exponent_sum(m, p, tau):
    """Joint-scaling degree of the ratio; identically zero."""
    return 2.0 * p - (2.0 * (p - 1.0) - tau * (m - 1.0)) - tau * m - (2.0 - tau)


def lemma35_test(m, p, tau, n_samples, rng, lo=1e-6, hi=1e6):
    """Sup of the ratio over log-uniform pairs in [lo, hi]^2."""
    if not (m >= 1.0 and p >= 1.0 and 0.0 <= tau <= 2.0):
        raise OutOfRangeError("(m,p,tau)", f"need m,p >= 1 and tau in [0,2], got {(m, p, tau)}")
    x = np.exp(rng.uniform(math.log(lo), math.log(hi), n_samples))
    y = np.exp(rng.uniform(math.log(lo), math.log(hi), n_samples))
    keep = x != y
    return float(np.max(lemma35_ratio(x[keep], y[keep], m, p, tau)))


# ---------------------------------------------------------------------------
# weighted-interpolation ratio estimation

def _weighted_lq(field, q, gamma):
    """|| |x|^gamma z ||_q = ( int |x|^{gamma q} z^q dx )^{1/q}."""
    return weighted_integral(field, q, gamma * q) ** (1.0 / q)


def _weighted_grad_lq(field, q, gamma):
    """|| |x|^gamma grad z ||_q with edge gradients and exact-area shells."""
    grid = field.grid
    z = field.values
    grad = np.abs(z[1:] - z[:-1]) / grid.center_gaps
    w = grid.face_areas * grid.edges[1:-1] ** (gamma * q) * grid.center_gaps
    return float(np.sum(grad**q * w)) ** (1.0 / q)


def ckn_ratio(params, trial):
    """LHS/RHS of the interpolation inequality with C = 1 on one trial.

    The supremum over a trial family is a lower bound for the sharp
    constant.  Returns 0 when both sides vanish.  Raises
    ConditionsFailError if the admissibility check rejects params.
    """
    rep = ckn_check(params, trial.grid.dim)
    if not rep.all_hold:
        raise ConditionsFailError(f"CKN conditions rejected: {rep.as_dict()}")
    lhs = _weighted_lq(trial, params.q1, params.gamma1)
    if lhs == 0.0:
        return 0.0
    grad = _weighted_grad_lq(trial, params.q2, params.gamma2)
    l3 = _weighted_lq(trial, params.q3, params.gamma3)
    rhs = grad**params.a * l3 ** (1.0 - params.a)
    return lhs / rhs


def bump_trial_family(grid, ks=(1, 2, 3, 4, 5, 6), n_radii=8, r_lo_frac=0.02, r_hi_frac=0.9):
    """Compactly supported radial bumps (1 - (r/R)^2)_+^k under dilation.

    Dilation-closedness is what makes the family informative: under the
    dimensional-balance condition the sharp constant is dilation
    invariant.
    """
    radii = np.geomspace(r_lo_frac * grid.r_max, r_hi_frac * grid.r_max, n_radii)
    fields = []
    for k in ks:
        for rr in radii:
            fields.append(poly_bump(grid, 1.0, rr, k))
    return fields


def ckn_lambda_lower(params, trials):
    """Sup of ckn_ratio over a trial family (lower bound for the constant)."""
    return max(ckn_ratio(params, f) for f in trials)


def source_estimate_lambda_lower(e, grid, r1=None, rs=None, trials=None):
    """Lower bound for the constant in the weighted source estimate

        int |x|^sigma w^{p+r} dx <= Lam ||grad w^{(m+r)/2}||_2^{2 w_r}
                                     (||w||_{r1+1}^{r1+1})^{mu_r}.

    Sups the ratio over bump trials and over the requested r values
    (default: r0, r0+1/2, r0+1 with r1 = r0, the critical instantiation
    entering the small-data constant).
    """
    from .regimes import prop32_exponents

    consts = derive(e)
    if r1 is None:
        r1 = consts.r_0
    if rs is None:
        rs = [r1, r1 + 0.5, r1 + 1.0]
    if trials is None:
        trials = bump_trial_family(grid)
    best = 0.0
    for r in rs:
        px = prop32_exponents(e, r1, r)
        for w in trials:
            lhs = weighted_integral(w, e.p + r, e.sigma)
            if lhs == 0.0:
                continue
            wpow = RadialField(grid, w.values ** (0.5 * (e.m + r)), _check=False)
            grad_sq = grad_power_sq_norm(wpow, 1.0)
            base = float(np.sum(w.values ** (r1 + 1.0) * grid.volumes))
            rhs = grad_sq**px.omega_r * base**px.mu_r
            if rhs > 0.0:
                best = max(best, lhs / rhs)
    return best


def small_data_constant(e, lam):
    """The explicit small-data threshold for ||u0||_{r0+1}^{r0+1},

        C0 = ( 4 m r0 / (lam (m+r0)^2) )^{N/(sigma+2)},

    evaluated with a numeric stand-in for the interpolation constant.
    A lower bound for lam turns this into an upper bound for C0, so the
    value is informational only and never asserted against the
    empirical threshold.
    """
    consts = derive(e)
    r0 = consts.r_0
    if r0 <= 0.0:
        raise RegimeMismatchError("small-data constant needs p > p_F (r0 > 0)")
    return (4.0 * e.m * r0 / (lam * (e.m + r0) ** 2)) ** (e.dim / (e.sigma + 2.0))


# ---------------------------------------------------------------------------
# small-data threshold experiment (p > p_F)

@dataclass
class ThresholdReport:
    amp_lo: float
    amp_hi: float
    norm_lo: float
    norm_hi: float
    history: list
    runs: dict


def smallness_threshold(
    e,
    make_u0,
    eta,
    horizon,
    amp_lo,
    amp_hi,
    caps=None,
    record_dt=None,
    max_iter=12,
    safety=0.9,
):
    """Bisect the initial amplitude between global-so-far and blow-up.

    make_u0(amplitude) builds the initial field on a fixed grid.  The
    bracket must straddle: amp_lo reaches the horizon, amp_hi blows up.
    Returns the empirical critical bracket in amplitude and in the
    critical norm ||u0||_{r0+1}.
    """
    consts = derive(e)
    if e.p <= consts.p_F:
        raise RegimeMismatchError(f"threshold experiment needs p > p_F, got p={e.p}, p_F={consts.p_F}")

    def classify_amp(amp):
        u0 = make_u0(amp)
        prob = make_problem(e, eta, u0)
        rr = run(prob, horizon, caps=caps, record_dt=record_dt, safety=safety)
        return rr

    runs = {}
    lo_run = classify_amp(amp_lo)
    hi_run = classify_amp(amp_hi)
    runs[amp_lo] = lo_run
    runs[amp_hi] = hi_run
    if lo_run.verdict.kind != VERDICT_HORIZON:
        raise PreconditionViolatedError(f"amp_lo={amp_lo:g} already blows up; lower the bracket")
    if hi_run.verdict.kind != VERDICT_BLOWUP:
        raise PreconditionViolatedError(f"amp_hi={amp_hi:g} does not blow up; raise the bracket")
    lo, hi = amp_lo, amp_hi
    history = [(lo, hi)]
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        rr = classify_amp(mid)
        runs[mid] = rr
        if rr.verdict.kind == VERDICT_BLOWUP:
            hi = mid
        else:
            lo = mid
        history.append((lo, hi))
    q = consts.r_0 + 1.0
    norm_lo = make_u0(lo).norm_lq(q)
    norm_hi = make_u0(hi).norm_lq(q)
    return ThresholdReport(
        amp_lo=lo, amp_hi=hi, norm_lo=norm_lo, norm_hi=norm_hi, history=history, runs=runs
    )


# ---------------------------------------------------------------------------
# exponent check housed here: the Gagliardo-Nirenberg variant

def gn_theta(e, r):
    """Theta and 1-Theta of the L^{r+1} interpolation used for p > p_F.

    Theta = (r+m)/(r+1) * N(r-r0) / (N(r-r0) + N(m-1) + 2(r0+1)),
    1-Theta = (p-m)/((sigma+2)(r+1)) * (N(m-1)+2(r+1)) / (same denom);
    both evaluate consistently (sum to one) and Theta lies in (0,1) for
    r > r0.
    """
    consts = derive(e)
    r0 = consts.r_0
    n = e.dim
    denom = n * (r - r0) + n * (e.m - 1.0) + 2.0 * (r0 + 1.0)
    theta = (r + e.m) / (r + 1.0) * n * (r - r0) / denom
    one_minus = (e.p - e.m) / ((e.sigma + 2.0) * (r + 1.0)) * (n * (e.m - 1.0) + 2.0 * (r + 1.0)) / denom
    return theta, one_minus
