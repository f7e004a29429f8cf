"""Explicit time integration of the regularized Cauchy problem.

The production scheme replaces the singular potential |x|^sigma by
(|x|^2 + eta^2)^{sigma/2} and the reaction u^p by u^p / (1 + eta u^{p-1}),
a globally Lipschitz perturbation of the pure diffusion equation whose
solutions decrease pointwise as eta decreases.  Explicit Euler with an
adaptive step keeps the update monotone in the data (under the CFL
bound), which makes discrete comparison exact when runs share the step
sequence.  Blow-up is detected, never resolved: a run terminates once
the sup norm clears the cap M_stop and the adaptive dt has shrunk to
its floor.

Families of states (eta ladders, ordered-data comparisons) integrate in
lockstep along a batch axis, so they share one dt sequence by
construction.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainEscapeError, OutOfRangeError, UnstableStepError
from .radial import RadialField, laplacian_of_power_values
from .regimes import ExponentTriple, derive

TERMS_FULL = "full"
TERMS_DIFFUSION_ONLY = "diffusion"
TERMS_REACTION_ONLY = "reaction"

VERDICT_HORIZON = "ReachedHorizon"
VERDICT_BLOWUP = "BlowUpDetected"


@dataclass(frozen=True)
class RegularizedProblem:
    """One regularized Cauchy problem on a fixed grid.

    `initial` must already be truncated to the ball of radius 1/eta
    (use `make_problem`, which applies the truncation and records
    whether it was a no-op).  `terms` switches off the diffusion or the
    reaction for oracle tests.
    """

    exponents: ExponentTriple
    eta: float
    initial: RadialField
    terms: str = TERMS_FULL
    truncation_applied: bool = False

    def __post_init__(self):
        if not (0.0 < self.eta < 1.0):
            raise OutOfRangeError("eta", f"must lie in (0,1), got {self.eta}")
        if self.terms not in (TERMS_FULL, TERMS_DIFFUSION_ONLY, TERMS_REACTION_ONLY):
            raise OutOfRangeError("terms", f"unknown term selection {self.terms!r}")


def make_problem(exponents, eta, u0, terms=TERMS_FULL):
    """Build a RegularizedProblem, truncating u0 to B(0, 1/eta).

    When 1/eta exceeds r_max the truncation is a no-op and this is
    recorded on the problem.
    """
    eta = float(eta)
    if not (0.0 < eta < 1.0):
        raise OutOfRangeError("eta", f"must lie in (0,1), got {eta}")
    cutoff = 1.0 / eta
    grid = u0.grid
    if cutoff < grid.r_max:
        vals = np.where(grid.centers <= cutoff, u0.values, 0.0)
        initial = RadialField(grid, vals, _check=False)
        applied = True
    else:
        initial = u0
        applied = False
    return RegularizedProblem(
        exponents=exponents, eta=eta, initial=initial, terms=terms, truncation_applied=applied
    )


def _pow(v, m):
    if m == 2.0:
        return v * v
    return v**m


class _Kernel:
    """Precomputed arrays and the batched explicit update."""

    def __init__(self, prob_list):
        p0 = prob_list[0]
        grid = p0.initial.grid
        e = p0.exponents
        for pb in prob_list[1:]:
            if not pb.initial.grid.same_layout(grid):
                raise OutOfRangeError("grid", "lockstep problems must share one grid")
            if pb.exponents != e:
                raise OutOfRangeError("exponents", "lockstep problems must share exponents")
        self.grid = grid
        self.e = e
        self.m = e.m
        self.p = e.p
        self.diff_on = np.array([pb.terms != TERMS_REACTION_ONLY for pb in prob_list])
        self.reac_on = np.array([pb.terms != TERMS_DIFFUSION_ONLY for pb in prob_list])
        self.all_diff = bool(self.diff_on.all())
        self.any_reac = bool(self.reac_on.any())
        self.etas = np.array([pb.eta for pb in prob_list])
        # potential weight (r^2 + eta^2)^{sigma/2} at cell centers, one row per member
        rc2 = grid.centers**2
        self.wpot = (rc2[None, :] + self.etas[:, None] ** 2) ** (e.sigma / 2.0)
        self.wpot[~self.reac_on, :] = 0.0
        self.wpot_max = self.wpot.max(axis=1)
        self.etas_col = self.etas[:, None]
        self.diff_coef = grid.dr_min**2 / (2.0 * grid.dim * e.m)

    def rhs(self, u):
        out = laplacian_of_power_values(u, self.grid, self.m)
        if not self.all_diff:
            out[~self.diff_on, :] = 0.0
        if self.any_reac:
            up1 = u ** (self.p - 1.0)
            out += self.wpot * (u * up1) / (1.0 + self.etas_col * up1)
        return out

    def _lipschitz_scalar(self, b, umax):
        """Lipschitz bound of member b's reaction over [0, umax].

        d/du [u^p/(1+eta u^{p-1})] = (1/eta) phi(x) with x = eta u^{p-1}
        and phi(x) = x (p+x)/(1+x)^2; phi increases for p <= 2 and peaks
        at x = p/(p-2), value p^2/(4(p-1)), for p > 2.  At umax = 0 the
        global supremum is used so an all-zero state still yields a
        finite step.
        """
        if not self.reac_on[b]:
            return 0.0
        p = self.p
        eta = self.etas[b]
        if umax <= 0.0:
            phi = max(1.0, p * p / (4.0 * (p - 1.0)))
        else:
            x = eta * umax ** (p - 1.0)
            if p > 2.0:
                x = min(x, p / (p - 2.0))
            phi = x * (p + x) / (1.0 + x) ** 2
        return self.wpot_max[b] * phi / eta

    def member_bounds(self, umax):
        """Per-member raw stability bounds (no safety factor)."""
        out = np.empty(umax.shape[0])
        for b in range(umax.shape[0]):
            um = umax[b]
            dt = math.inf
            if self.diff_on[b] and um > 0.0:
                dt = self.diff_coef / um ** (self.m - 1.0)
            lip = self._lipschitz_scalar(b, um)
            if lip > 0.0:
                dt = min(dt, 1.0 / lip)
            out[b] = dt
        return out


def stable_dt(state, prob, safety=0.9):
    """Largest admissible explicit step from the current state.

    dt = safety * min( dr_min^2 / (2 N m max u^{m-1}),
                       1 / (reaction Lipschitz bound at current max u) ).
    """
    k = _Kernel([prob])
    umax = np.array([state.values.max() if state.values.size else 0.0])
    return safety * float(k.member_bounds(umax)[0])


def step(state, prob, dt, safety=0.9):
    """One explicit Euler update u + dt (Lap u^m + source), clipped at 0.

    Raises UnstableStepError when dt exceeds the bound from stable_dt.
    """
    out, _ = step_with_clip(state, prob, dt, safety)
    return out


def step_with_clip(state, prob, dt, safety=0.9):
    """step() variant also returning the mass removed by the clip."""
    k = _Kernel([prob])
    u = state.values[None, :].copy()
    bound = safety * float(k.member_bounds(u.max(axis=1))[0])
    if dt > bound * (1.0 + 1e-12):
        raise UnstableStepError(f"dt={dt:g} exceeds stability bound {bound:g}")
    u += dt * k.rhs(u)
    clipped = -float(np.sum(np.minimum(u, 0.0) * k.grid.volumes))
    np.maximum(u, 0.0, out=u)
    return RadialField(k.grid, u[0], _check=False), clipped


@dataclass(frozen=True)
class Caps:
    """Termination caps for a run.

    m_stop defaults to 1e6 * ||u0||_inf; dt_floor defaults to the
    stability bound evaluated at u = m_stop, so the two detection
    conditions (sup norm over the cap, dt at its floor) trigger
    together.  support_tol_rel sets the numerical-support threshold for
    domain-escape detection.
    """

    m_stop: float | None = None
    dt_floor: float | None = None
    dt_max: float | None = None
    support_tol_rel: float = 1e-12


@dataclass
class Verdict:
    kind: str
    t: float
    t_detect: float | None = None
    tmax_estimate: float | None = None


@dataclass
class SimulationRun:
    """Recorded output of one integration.

    series maps column name -> ndarray; columns are t, l1, l_mplus1,
    l_crit (only when p >= p_F), l_inf, energy, dt.  snapshots is a
    list of (t, RadialField).
    """

    config: dict
    series: dict
    snapshots: list
    verdict: Verdict
    total_clipped: float = 0.0
    problem: RegularizedProblem | None = None

    @property
    def times(self):
        return self.series["t"]


def run(prob, horizon, caps=None, record_dt=None, snapshot_dt=None, safety=0.9):
    """Integrate one problem; see lockstep_runs for the full contract."""
    return lockstep_runs([prob], horizon, caps, record_dt, snapshot_dt, safety)[0]


def lockstep_runs(probs, horizon, caps=None, record_dt=None, snapshot_dt=None, safety=0.9):
    """Integrate several problems on one grid with a shared dt sequence.

    All members advance with dt = safety * min over members of the
    stability bound, so pointwise order between members is preserved
    exactly by the monotone update.  Integration stops at `horizon` or
    at the first member with sup norm >= its cap and dt at its floor
    (that member gets verdict BlowUpDetected with t_detect; the others
    report the time actually covered in verdict.t).  Raises
    DomainEscapeError if any member's numerical support reaches r_max.

    record_dt sets the series cadence (default horizon/400);
    snapshot_dt the field-snapshot cadence (default: initial and final
    states only).
    """
    horizon = float(horizon)
    if horizon <= 0.0:
        raise OutOfRangeError("horizon", f"must be > 0, got {horizon}")
    caps = caps or Caps()
    kern = _Kernel(probs)
    grid = kern.grid
    e = kern.e
    consts = derive(e)
    nb = len(probs)
    u = np.stack([pb.initial.values for pb in probs]).astype(float)

    u0_sup = u.max(axis=1)
    if caps.m_stop is not None:
        m_stop = np.full(nb, float(caps.m_stop))
    else:
        m_stop = np.where(u0_sup > 0.0, 1e6 * np.maximum(u0_sup, 1e-300), np.inf)
    if caps.dt_floor is not None:
        dt_floor = np.full(nb, float(caps.dt_floor))
    else:
        dt_floor = np.where(
            np.isfinite(m_stop), safety * kern.member_bounds(m_stop), 0.0
        )
    record_dt = float(record_dt) if record_dt else horizon / 400.0
    track_crit = e.p >= consts.p_F
    sing_w = grid.singular_weights(e.sigma)

    cols = ["t", "l1", "l_mplus1", "l_inf", "energy", "dt"]
    if track_crit:
        cols.insert(3, "l_crit")
    series = [dict((c, []) for c in cols) for _ in range(nb)]
    snaps = [[] for _ in range(nb)]
    clipped = np.zeros(nb)

    def record(t, dt):
        for b in range(nb):
            row = series[b]
            ub = u[b]
            row["t"].append(t)
            row["l1"].append(float(np.sum(ub * grid.volumes)))
            row["l_mplus1"].append(
                float(np.sum(ub ** (e.m + 1.0) * grid.volumes)) ** (1.0 / (e.m + 1.0))
            )
            if track_crit:
                q = consts.r_0 + 1.0
                row["l_crit"].append(float(np.sum(ub**q * grid.volumes)) ** (1.0 / q))
            row["l_inf"].append(float(ub.max()))
            row["energy"].append(_energy_value(ub, grid, e, sing_w))
            row["dt"].append(dt)

    def snapshot(t):
        for b in range(nb):
            if snaps[b] and snaps[b][-1][0] == t:
                continue
            snaps[b].append((t, RadialField(grid, u[b].copy(), _check=False)))

    t = 0.0
    record(t, 0.0)
    snapshot(t)
    next_rec = record_dt
    next_snap = snapshot_dt if snapshot_dt else math.inf
    detect = np.zeros(nb, dtype=bool)
    detect_t = np.full(nb, np.nan)
    esc_tol = caps.support_tol_rel
    last_dt = 0.0

    while t < horizon:
        umax = u.max(axis=1)
        bounds = kern.member_bounds(umax)
        hit = (umax >= m_stop) & (safety * bounds <= dt_floor * (1.0 + 1e-9))
        if hit.any():
            detect[hit] = True
            detect_t[hit] = t
            break
        if np.any(u[:, -1] > np.maximum(esc_tol * umax, 1e-300)):
            raise DomainEscapeError(t, grid.r_max)
        dt = safety * float(bounds.min())
        if caps.dt_max is not None:
            dt = min(dt, caps.dt_max)
        dt = min(dt, horizon - t)
        if next_rec > t:
            dt = min(dt, next_rec - t)
        if next_snap > t:
            dt = min(dt, next_snap - t)
        if dt <= 0.0 or not np.isfinite(dt):
            raise OutOfRangeError("dt", f"degenerate step dt={dt} at t={t}")
        u += dt * kern.rhs(u)
        if u.min() < 0.0:
            clipped -= np.minimum(u, 0.0) @ grid.volumes
            np.maximum(u, 0.0, out=u)
        t += dt
        last_dt = dt
        tol = 1e-12 * max(1.0, t)
        if t >= next_rec - tol:
            record(t, dt)
            next_rec = (math.floor(t / record_dt + 1e-9) + 1.0) * record_dt
        if t >= next_snap - tol:
            snapshot(t)
            next_snap = (math.floor(t / snapshot_dt + 1e-9) + 1.0) * snapshot_dt

    if series[0]["t"][-1] < t:
        record(t, last_dt)
    snapshot(t)

    runs = []
    for b in range(nb):
        ser = {k: np.asarray(v) for k, v in series[b].items()}
        if detect[b]:
            td = float(detect_t[b])
            verdict = Verdict(
                kind=VERDICT_BLOWUP,
                t=t,
                t_detect=td,
                tmax_estimate=_extrapolate_tmax(ser, e.p, td),
            )
        else:
            verdict = Verdict(kind=VERDICT_HORIZON, t=t)
        cfg = {
            "m": e.m,
            "p": e.p,
            "sigma": e.sigma,
            "dim": e.dim,
            "eta": probs[b].eta,
            "terms": probs[b].terms,
            "grid": grid.spec(),
            "horizon": horizon,
            "m_stop": float(m_stop[b]) if np.isfinite(m_stop[b]) else None,
            "dt_floor": float(dt_floor[b]),
            "record_dt": record_dt,
            "snapshot_dt": snapshot_dt,
            "safety": safety,
        }
        runs.append(
            SimulationRun(
                config=cfg,
                series=ser,
                snapshots=snaps[b],
                verdict=verdict,
                total_clipped=float(clipped[b]),
                problem=probs[b],
            )
        )
    return runs


def _energy_value(u, grid, e, sing_w):
    """E(u) with the same edge gradients as the Laplacian fluxes."""
    g = _pow(u, e.m)
    grad = (g[1:] - g[:-1]) / grid.center_gaps
    dirichlet = 0.5 * float(np.sum(grid.face_areas * grad * grad * grid.center_gaps))
    potential = e.m / (e.m + e.p) * float(np.sum(u ** (e.m + e.p) * sing_w))
    return dirichlet - potential


def _extrapolate_tmax(series, p, t_detect):
    """Affine fit of ||u||_inf^{-(p-1)} -> 0 over the last decade.

    Exact for the pure-reaction ODE; reported as an estimate only.
    """
    t = series["t"]
    y = series["l_inf"]
    sel = (t >= t_detect / 10.0) & (t <= t_detect) & (y > 0.0)
    if np.count_nonzero(sel) < 3:
        return None
    z = y[sel] ** (-(p - 1.0))
    coef = np.polyfit(t[sel], z, 1)
    if coef[0] >= 0.0:
        return None
    root = -coef[1] / coef[0]
    return float(root) if root > 0.0 else None


def eta_family(
    exponents, u0, etas, horizon, caps=None, record_dt=None, snapshot_dt=None, safety=0.9, terms=TERMS_FULL
):
    """Runs for a decreasing eta family on one grid, in lockstep.

    etas must be strictly decreasing in (0,1).  Snapshot times are
    shared across members, enabling pointwise monotonicity checks
    (smaller eta dominates) and limit estimation at eta -> 0.
    """
    etas = list(etas)
    if any(not (0.0 < h < 1.0) for h in etas):
        raise OutOfRangeError("etas", f"must lie in (0,1), got {etas}")
    if any(b >= a for a, b in zip(etas, etas[1:])):
        raise OutOfRangeError("etas", "must be strictly decreasing")
    probs = [make_problem(exponents, h, u0, terms=terms) for h in etas]
    return lockstep_runs(probs, horizon, caps, record_dt, snapshot_dt, safety)
