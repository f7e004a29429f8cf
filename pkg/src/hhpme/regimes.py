"""Exponent algebra for the degenerate diffusion-reaction model.

Everything in this module is closed-form arithmetic on the problem
parameters (m, p, sigma, N): critical exponents, regime classification,
self-similar exponents, weighted-interpolation (CKN) admissibility, and
the constants entering the explicit blow-up subsolution.

Values that are undefined in the current regime are stored as ``None``,
never as NaN, so that regime bugs fail loudly.
"""

from dataclasses import dataclass

from .errors import IndexBelowCriticalError, OutOfRangeError, WrongRegimeError

GLOBAL_ALL_DATA = "GlobalAllData"
BLOWUP_ALL_DATA = "BlowUpAllData"
CONDITIONAL = "Conditional"

COMPARISON_UNCONDITIONAL = "Unconditional"
COMPARISON_NEEDS_POSITIVITY = "NeedsPositivityNearOrigin"

_EQ_TOL = 1e-12


@dataclass(frozen=True)
class ExponentTriple:
    """Validated problem parameters.

    m : diffusion exponent, m > 1
    p : reaction exponent, p > 1
    sigma : potential exponent, max(-2, -N) < sigma < 0
    dim : spatial dimension N >= 1
    """

    m: float
    p: float
    sigma: float
    dim: int


def validate(m, p, sigma, dim):
    """Check the admissible parameter ranges and build an ExponentTriple.

    Raises OutOfRangeError naming the offending field; all bounds are
    strict.
    """
    if not isinstance(dim, (int,)) or isinstance(dim, bool):
        try:
            if float(dim) != int(dim):
                raise OutOfRangeError("dim", f"must be a positive integer, got {dim}")
            dim = int(dim)
        except (TypeError, ValueError):
            raise OutOfRangeError("dim", f"must be a positive integer, got {dim}") from None
    if dim < 1:
        raise OutOfRangeError("dim", f"must be >= 1, got {dim}")
    m = float(m)
    p = float(p)
    sigma = float(sigma)
    if not m > 1.0:
        raise OutOfRangeError("m", f"must be > 1, got {m}")
    if not p > 1.0:
        raise OutOfRangeError("p", f"must be > 1, got {p}")
    lo = max(-2.0, -float(dim))
    if not (lo < sigma < 0.0):
        raise OutOfRangeError("sigma", f"must lie in ({lo}, 0), got {sigma}")
    return ExponentTriple(m=m, p=p, sigma=sigma, dim=dim)


@dataclass(frozen=True)
class DerivedConstants:
    """Closed-form exponents derived from an ExponentTriple.

    p_G separates universal global existence (p <= p_G) from possible
    finite-time blow-up; p_F is the Fujita-type exponent; r_0 is the
    critical integrability index (L^{r_0+1} is the critical smallness
    norm for p > p_F).

    alpha/beta are the backward self-similar exponents, present only
    for p > p_G; alpha_star/beta_star are the forward ones, present
    only for p < p_G.  uniq_threshold is the dimension-dependent value
    of p at which the unconditional comparison principle kicks in.
    """

    p_G: float
    p_F: float
    r_0: float
    r_c: float
    alpha: float | None
    beta: float | None
    alpha_star: float | None
    beta_star: float | None
    uniq_threshold: float

    def as_dict(self):
        return {
            "p_G": self.p_G,
            "p_F": self.p_F,
            "r_0": self.r_0,
            "r_c": self.r_c,
            "alpha": self.alpha,
            "beta": self.beta,
            "alpha_star": self.alpha_star,
            "beta_star": self.beta_star,
            "uniq_threshold": self.uniq_threshold,
        }


def derive(e: ExponentTriple) -> DerivedConstants:
    """Evaluate every closed-form constant of the model.

    p_G = 1 - sigma (m-1) / 2,
    p_F = m + (sigma+2) / N,
    r_0 = N (p-m) / (sigma+2) - 1,   r_c = max(r_0, 0),
    and, away from p = p_G, the self-similar exponents
    alpha = (sigma+2) / (2 (p-p_G)),  beta = (m-p) / (2 (p-p_G)),
    with (alpha_star, beta_star) = (-alpha, -beta) when p < p_G.
    """
    m, p, sigma, n = e.m, e.p, e.sigma, e.dim
    p_g = 1.0 - sigma * (m - 1.0) / 2.0
    p_f = m + (sigma + 2.0) / n
    r0 = n * (p - m) / (sigma + 2.0) - 1.0
    rc = max(r0, 0.0)
    alpha = beta = alpha_star = beta_star = None
    if p != p_g:
        a = (sigma + 2.0) / (2.0 * (p - p_g))
        b = (m - p) / (2.0 * (p - p_g))
        if p > p_g:
            alpha, beta = a, b
        else:
            alpha_star, beta_star = -a, -b
    uniq = p_g if n >= 2 else 1.0 - sigma * (m - 1.0)
    return DerivedConstants(
        p_G=p_g,
        p_F=p_f,
        r_0=r0,
        r_c=rc,
        alpha=alpha,
        beta=beta,
        alpha_star=alpha_star,
        beta_star=beta_star,
        uniq_threshold=uniq,
    )


@dataclass(frozen=True)
class Regime:
    """Qualitative behavior classes determined only by (m, p, sigma, N).

    tag:
      GlobalAllData    1 < p <= p_G   every solution is global
      BlowUpAllData    p_G < p <= p_F every nontrivial solution blows up
      Conditional      p > p_F        small data global, negative energy blows up
    comparison_tag: whether the comparison principle needs initial data
    positive near the origin.
    """

    tag: str
    comparison_tag: str


def classify(e: ExponentTriple) -> Regime:
    """Assign regime tags; boundary values go to the closed side."""
    c = derive(e)
    if e.p <= c.p_G:
        tag = GLOBAL_ALL_DATA
    elif e.p <= c.p_F:
        tag = BLOWUP_ALL_DATA
    else:
        tag = CONDITIONAL
    n, p = e.dim, e.p
    if n >= 3:
        unconditional = p >= c.p_G
    elif n == 2:
        unconditional = p > c.p_G
    else:
        unconditional = p > 1.0 - e.sigma * (e.m - 1.0)
    comparison = COMPARISON_UNCONDITIONAL if unconditional else COMPARISON_NEEDS_POSITIVITY
    return Regime(tag=tag, comparison_tag=comparison)


@dataclass(frozen=True)
class CknParams:
    """Parameters of the weighted interpolation inequality

        || |x|^g1 z ||_{q1} <= C || |x|^g2 grad z ||_{q2}^a  || |x|^g3 z ||_{q3}^{1-a}.
    """

    q1: float
    q2: float
    q3: float
    gamma1: float
    gamma2: float
    gamma3: float
    a: float


@dataclass(frozen=True)
class CknReport:
    """Per-condition admissibility verdicts for a CknParams instance."""

    cond_a: bool
    cond_b: bool
    cond_c: bool
    cond_d: bool
    cond_e: bool

    @property
    def all_hold(self):
        return self.cond_a and self.cond_b and self.cond_c and self.cond_d and self.cond_e

    def as_dict(self):
        return {
            "3.1a": self.cond_a,
            "3.1b": self.cond_b,
            "3.1c": self.cond_c,
            "3.1d": self.cond_d,
            "3.1e": self.cond_e,
            "all": self.all_hold,
        }


def ckn_check(params: CknParams, dim) -> CknReport:
    """Evaluate the five admissibility conditions one by one.

    The dimensional-balance condition is an equality and is tested to a
    1e-12 tolerance; the last condition only binds at a = 0 or a = 1 and
    is vacuously true otherwise.
    """
    q1, q2, q3 = params.q1, params.q2, params.q3
    g1, g2, g3 = params.gamma1, params.gamma2, params.gamma3
    a, n = params.a, float(dim)
    cond_a = (q1 > 0.0) and (q2 >= 1.0) and (q3 > 0.0) and (0.0 <= a <= 1.0)
    cond_b = False
    if q1 != 0.0 and q2 != 0.0 and q3 != 0.0:
        cond_b = (
            1.0 / q1 + g1 / n > 0.0
            and 1.0 / q2 + g2 / n > 0.0
            and 1.0 / q3 + g3 / n > 0.0
        )
    if q1 != 0.0 and q2 != 0.0 and q3 != 0.0:
        lhs = 1.0 / q1 + g1 / n
        rhs = a * (1.0 / q2 + (g2 - 1.0) / n) + (1.0 - a) * (1.0 / q3 + g3 / n)
        scale = max(1.0, abs(lhs), abs(rhs))
        cond_c = abs(lhs - rhs) <= _EQ_TOL * scale
    else:
        cond_c = False
    cond_d = g1 <= a * g2 + (1.0 - a) * g3 + _EQ_TOL * max(1.0, abs(g1))
    if a == 0.0 or a == 1.0:
        cond_e = (q1 != 0.0) and (1.0 / q1 <= a / q2 + (1.0 - a) / q3 + _EQ_TOL)
    else:
        cond_e = True
    return CknReport(cond_a, cond_b, cond_c, cond_d, cond_e)


@dataclass(frozen=True)
class Prop32Exponents:
    """Interpolation exponents for the weighted source estimate.

    omega_r and mu_r are the powers of the gradient term and of the
    critical norm in

        int |x|^sigma w^{p+r} <= Lambda ||grad w^{(m+r)/2}||_2^{2 omega_r}
                                  (||w||_{r1+1}^{r1+1})^{mu_r},

    a is the interpolation weight realizing them, and nu_r =
    mu_r / (1 - omega_r) (absent when omega_r = 1, i.e. r1 = r_0).
    """

    omega_r: float
    mu_r: float
    nu_r: float | None
    a: float
    r1: float
    r: float


def prop32_exponents(e: ExponentTriple, r1, r) -> Prop32Exponents:
    """Evaluate omega_r, mu_r, nu_r and the interpolation weight a.

    Requires r1 >= r_c and r >= r1.  The two decomposition identities
    a = omega_r (m+r)/(p+r) and 1-a = mu_r (r1+1)/(p+r) are asserted,
    as is a in (0, 1).
    """
    m, p, sigma, n = e.m, e.p, e.sigma, e.dim
    c = derive(e)
    r1 = float(r1)
    r = float(r)
    if r1 < c.r_c - _EQ_TOL * max(1.0, abs(c.r_c)):
        raise IndexBelowCriticalError(f"r1={r1} below critical index r_c={c.r_c}")
    if r < r1:
        raise OutOfRangeError("r", f"must be >= r1={r1}, got {r}")
    denom = n * (m - 1.0) + 2.0 * (r1 + 1.0) + n * (r - r1)
    omega = (n * (p - 1.0) - sigma * (r1 + 1.0) + n * (r - r1)) / denom
    mu = ((n - 2.0) * (m - p) + (sigma + 2.0) * (m + r)) / denom
    a = (m + r) / (p + r) * omega
    one_minus_a = (r1 + 1.0) / (p + r) * mu
    if abs(a + one_minus_a - 1.0) > 1e-10:
        raise AssertionError(
            f"interpolation weight decomposition inconsistent: a={a}, 1-a={one_minus_a}"
        )
    if not (0.0 < a < 1.0):
        raise OutOfRangeError("a", f"interpolation weight must lie in (0,1), got {a}")
    if omega >= 1.0 - _EQ_TOL:
        nu = None
        omega = min(omega, 1.0)
    else:
        nu = mu / (1.0 - omega)
    return Prop32Exponents(omega_r=omega, mu_r=mu, nu_r=nu, a=a, r1=r1, r=r)


def prop32_ckn_params(e: ExponentTriple, r1, r) -> CknParams:
    """The CknParams instantiation that realizes the source estimate.

    Applies the interpolation inequality to z = w^{(m+r)/2} with
    (q1, q2, q3) = (2(p+r)/(m+r), 2, 2(r1+1)/(m+r)),
    gamma1 = sigma (m+r) / (2(p+r)), gamma2 = gamma3 = 0.
    """
    m, p, sigma = e.m, e.p, e.sigma
    px = prop32_exponents(e, r1, r)
    r1 = px.r1
    r = px.r
    return CknParams(
        q1=2.0 * (p + r) / (m + r),
        q2=2.0,
        q3=2.0 * (r1 + 1.0) / (m + r),
        gamma1=sigma * (m + r) / (2.0 * (p + r)),
        gamma2=0.0,
        gamma3=0.0,
        a=px.a,
    )


@dataclass(frozen=True)
class SubsolutionConstants:
    """Constants of the explicit blow-up subsolution for p_G < p < m.

    The subsolution is (T-t)^{-alpha} A (1 - y^2/a_width^2)_+^{1/(m-1)}
    with y = |x| (T-t)^beta; it is a genuine subsolution once the
    amplitude A clears the threshold A0.
    """

    alpha: float
    beta: float
    a_width: float
    z0: float
    A0: float
    rhs: float
    amplitude: float
    satisfied: bool


def subsolution_constants(e: ExponentTriple, amplitude) -> SubsolutionConstants:
    """Evaluate the subsolution constants for a given amplitude A.

    a_width^2 = m A^{m-1} / (beta (m-1)),
    z0 = min( 1 / (2 [N(m-1)+2]), beta ),
    and the amplitude condition reads A^{p-p_G} >= rhs with

      rhs = (m / (beta(m-1)))^{-sigma/2} (1-z0)^{-sigma/2}
            [1 + 2(N(m-1)+2) beta] / ((m-1) z0^{(p-1)/(m-1)}).
    """
    m, p, n = e.m, e.p, e.dim
    c = derive(e)
    if not (c.p_G < p < m):
        raise WrongRegimeError(f"subsolution requires p_G < p < m, got p={p}, p_G={c.p_G}, m={m}")
    amplitude = float(amplitude)
    if amplitude <= 0.0:
        raise OutOfRangeError("amplitude", f"must be > 0, got {amplitude}")
    alpha, beta = c.alpha, c.beta
    a_width = (m * amplitude ** (m - 1.0) / (beta * (m - 1.0))) ** 0.5
    z0 = min(1.0 / (2.0 * (n * (m - 1.0) + 2.0)), beta)
    rhs = (
        (m / (beta * (m - 1.0))) ** (-e.sigma / 2.0)
        * (1.0 - z0) ** (-e.sigma / 2.0)
        * (1.0 + 2.0 * (n * (m - 1.0) + 2.0) * beta)
        / ((m - 1.0) * z0 ** ((p - 1.0) / (m - 1.0)))
    )
    a0 = rhs ** (1.0 / (p - c.p_G))
    return SubsolutionConstants(
        alpha=alpha,
        beta=beta,
        a_width=a_width,
        z0=z0,
        A0=a0,
        rhs=rhs,
        amplitude=amplitude,
        satisfied=amplitude ** (p - c.p_G) >= rhs,
    )


def selfsim_exponent_identity_residual(e: ExponentTriple):
    """Max defect of alpha+1 = alpha m - 2 beta = alpha p + sigma beta.

    Uses the signed pair alpha = (sigma+2)/(2(p-p_G)), beta =
    (m-p)/(2(p-p_G)); finite only for p != p_G.
    """
    c = derive(e)
    if e.p == c.p_G:
        raise WrongRegimeError("identity undefined at p = p_G")
    a = (e.sigma + 2.0) / (2.0 * (e.p - c.p_G))
    b = (e.m - e.p) / (2.0 * (e.p - c.p_G))
    v1 = a + 1.0
    v2 = a * e.m - 2.0 * b
    v3 = a * e.p + e.sigma * b
    return max(abs(v1 - v2), abs(v1 - v3))
