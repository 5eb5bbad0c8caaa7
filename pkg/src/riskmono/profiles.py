# Deterministic asymptotic risk profiles.
#
# Random-matrix fixed points for ridgeless least squares, the soft-threshold
# (tau, alpha) system for the lassoless profile, the one-step split profile,
# the optimized one-step risk under isotropic features, and the monotonized
# profile map min_{zeta >= gamma} R(zeta).

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import SolverError

INF = math.inf

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _norm_sf(x: float) -> float:
    return 0.5 * math.erfc(x / _SQRT2)


def _norm_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def _bisect(f, lo: float, hi: float, iters: int = 200) -> float:
    """Plain bisection on a sign change; assumes f(lo) and f(hi) differ in sign."""
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if (f(mid) > 0.0) == (flo > 0.0):
            lo = mid
            flo = f(mid)
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SpectralInputs:
    """A discrete distribution on (0, inf) given as (atom, weight) pairs.

    Used for the covariance spectrum H, the signal-projection spectrum G, and
    the one-step weighting distribution Q.  Integrals are exact weighted sums.
    """

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        atoms = tuple((float(r), float(w)) for r, w in self.atoms)
        if not atoms:
            raise ValueError("need at least one atom")
        if any(r <= 0.0 for r, _ in atoms):
            raise ValueError("atoms must be strictly positive")
        if any(w < 0.0 for _, w in atoms):
            raise ValueError("weights must be nonnegative")
        total = sum(w for _, w in atoms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {total}")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def point_mass(cls, r: float = 1.0) -> "SpectralInputs":
        return cls(((r, 1.0),))

    @classmethod
    def from_eigenvalues(cls, values) -> "SpectralInputs":
        values = np.asarray(values, dtype=np.float64)
        w = 1.0 / values.size
        return cls(tuple((float(v), w) for v in values))

    def integrate(self, f) -> float:
        return sum(w * f(r) for r, w in self.atoms)

    def mean(self) -> float:
        return self.integrate(lambda r: r)


ISOTROPIC = SpectralInputs.point_mass(1.0)


@dataclass(frozen=True)
class ModelEnergy:
    rho2: float
    sigma2: float

    def __post_init__(self):
        if self.rho2 < 0.0:
            raise ValueError(f"signal energy must be >= 0, got {self.rho2}")
        if self.sigma2 <= 0.0:
            raise ValueError(f"noise energy must be > 0, got {self.sigma2}")

    @property
    def snr(self) -> float:
        return self.rho2 / self.sigma2

    @property
    def null_risk(self) -> float:
        return self.rho2 + self.sigma2


@dataclass(frozen=True)
class FixedPointState:
    """Companion fixed point v plus the derived quantities tv and tvg."""

    phi: float
    v: float
    tv: float
    tvg: float


@dataclass(frozen=True)
class Mn1lsPrior:
    """Two-atom prior for the scaled signal coordinates: magnitude w.p.
    epsilon, zero otherwise.  Signal energy is epsilon * magnitude^2."""

    epsilon: float
    magnitude: float

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.magnitude <= 0.0:
            raise ValueError(f"magnitude must be > 0, got {self.magnitude}")

    @property
    def signal_energy(self) -> float:
        return self.epsilon * self.magnitude**2


@dataclass(frozen=True)
class OneStepOptimum:
    """Optimal split aspect ratios and the resulting excess risk (risk/sigma^2 - 1)."""

    gamma: float
    zeta1: float
    zeta2: float
    risk: float
    branch: str = ""

    def __post_init__(self):
        budget = 1.0 / self.gamma + 1e-10
        z1 = 0.0 if math.isinf(self.zeta1) else 1.0 / self.zeta1
        z2 = 0.0 if math.isinf(self.zeta2) else 1.0 / self.zeta2
        if z1 + z2 > budget:
            raise ValueError(
                f"allocation 1/{self.zeta1} + 1/{self.zeta2} exceeds 1/{self.gamma}"
            )


# ---------------------------------------------------------------------------
# ridgeless fixed points and profile


def solve_v(phi: float, H: SpectralInputs = ISOTROPIC) -> FixedPointState:
    """Solve 1/phi = int v r / (1 + v r) dH(r) for v > 0 (phi > 1), then fill
    in tv and tvg from their defining formulas.

    The map is strictly increasing in v, so a geometrically grown bracket plus
    bisection is robust; the residual is checked to < 1e-12.
    """
    if not phi > 1.0:
        raise ValueError(f"fixed point v(0; phi) needs phi > 1, got {phi}")

    target = 1.0 / phi

    def g(v):
        return H.integrate(lambda r: v * r / (1.0 + v * r)) - target

    lo, hi = 1e-12, 1.0
    grow = 0
    while g(hi) < 0.0:
        hi *= 2.0
        grow += 1
        if grow > 200:
            raise SolverError(f"failed to bracket v(0; {phi}) below {hi}")
    v = _bisect(g, lo, hi)
    residual = abs(g(v))
    if residual > 1e-12:
        raise SolverError(f"fixed-point residual {residual:.2e} at phi={phi}")

    s2 = H.integrate(lambda r: r**2 / (1.0 + v * r) ** 2)
    tv = 1.0 / (1.0 / v**2 - phi * s2)
    tvg = tv * phi * s2
    return FixedPointState(phi, v, tv, tvg)


def mn2ls_profile(
    phi: float,
    energy: ModelEnergy,
    H: SpectralInputs = ISOTROPIC,
    G: SpectralInputs = ISOTROPIC,
) -> float:
    """Deterministic squared risk of ridgeless least squares at aspect ratio phi.

    Diverges at phi = 1 (returned as +inf) and tends to the null risk
    rho^2 int r dG + sigma^2 as phi -> inf.
    """
    if not phi > 0.0:
        raise ValueError(f"aspect ratio must be positive, got {phi}")
    if math.isinf(phi):
        return energy.rho2 * G.mean() + energy.sigma2
    if phi == 1.0:
        return INF
    if phi < 1.0:
        return energy.sigma2 / (1.0 - phi)
    fp = solve_v(phi, H)
    bias = (1.0 + fp.tvg) * G.integrate(lambda r: r / (1.0 + fp.v * r) ** 2)
    var = phi * fp.tv * H.integrate(lambda r: r**2 / (1.0 + fp.v * r) ** 2)
    return energy.rho2 * bias + energy.sigma2 * (var + 1.0)


def mn2ls_profile_isotropic(phi: float, rho2: float, sigma2: float) -> float:
    """Closed-form isotropic ridgeless profile (independent of the fixed-point
    solver; kept as a second code path for the one-step iterated formula)."""
    if not phi > 0.0:
        raise ValueError(f"aspect ratio must be positive, got {phi}")
    if math.isinf(phi):
        return rho2 + sigma2
    if phi == 1.0:
        return INF
    if phi < 1.0:
        return sigma2 / (1.0 - phi)
    return rho2 * (1.0 - 1.0 / phi) + sigma2 / (phi - 1.0) + sigma2


@dataclass(frozen=True)
class ProfilePoint:
    """One analytic-curve sample: aspect ratio, risk, and the fixed-point
    internals where they exist (overparameterized branch only)."""

    phi: float
    risk: float
    v: float = math.nan
    tv: float = math.nan
    tvg: float = math.nan
    upsilon_b: float = math.nan


def profile_point(
    phi: float,
    energy: ModelEnergy,
    H: SpectralInputs = ISOTROPIC,
    G: SpectralInputs = ISOTROPIC,
    Q: SpectralInputs | None = None,
) -> ProfilePoint:
    risk = mn2ls_profile(phi, energy, H, G)
    if not (1.0 < phi < INF):
        return ProfilePoint(phi, risk)
    fp = solve_v(phi, H)
    ub = math.nan
    if Q is not None:
        ub = (1.0 + fp.tvg) * Q.integrate(lambda r: 1.0 / (1.0 + fp.v * r) ** 2)
    return ProfilePoint(phi, risk, fp.v, fp.tv, fp.tvg, ub)


# ---------------------------------------------------------------------------
# one-step profile


def onestep_profile(
    phi1: float,
    phi2: float,
    rdet_base_at_phi1: float,
    energy: ModelEnergy,
    H: SpectralInputs = ISOTROPIC,
    Q: SpectralInputs = ISOTROPIC,
) -> float:
    """Deterministic risk of the one-step ingredient at split ratios (phi1, phi2).

    `rdet_base_at_phi1` is the base procedure's deterministic risk at phi1 and
    Q is the caller-supplied weighting distribution of the base procedure's
    error in the covariance eigenbasis (point mass at 1 in the isotropic case).
    """
    if math.isinf(phi2):
        return rdet_base_at_phi1
    if not phi2 > 0.0:
        raise ValueError(f"adjustment aspect ratio must be positive, got {phi2}")
    if phi2 == 1.0:
        return INF
    if phi2 < 1.0:
        return energy.sigma2 / (1.0 - phi2)
    fp = solve_v(phi2, H)
    upsilon_b = (1.0 + fp.tvg) * Q.integrate(lambda r: 1.0 / (1.0 + fp.v * r) ** 2)
    return (
        rdet_base_at_phi1 * upsilon_b
        + energy.sigma2 * (1.0 - upsilon_b)
        + energy.sigma2 * fp.tvg
    )


def onestep_profile_iterated(
    phi1: float, phi2: float, rho2: float, sigma2: float
) -> float:
    """Isotropic one-step risk via the iterated ridgeless formula: apply the
    base profile at phi2 with the signal energy reduced to R(phi1) - sigma^2."""
    base = mn2ls_profile_isotropic(phi1, rho2, sigma2)
    if math.isinf(phi2):
        return base
    if math.isinf(base) and phi2 != 1.0 and phi2 > 1.0:
        return INF
    return mn2ls_profile_isotropic(phi2, base - sigma2, sigma2)


# ---------------------------------------------------------------------------
# lassoless (tau, alpha) system


def _threshold_mse(theta: float, tau: float, alpha: float) -> float:
    """E[(eta(theta + tau Z; alpha tau) - theta)^2] for Z ~ N(0,1), in closed
    form from truncated-normal moments."""
    b = alpha * tau
    up = alpha - theta / tau
    um = alpha + theta / tau
    total = 0.0
    for u in (up, um):
        sf, pdf = _norm_sf(u), _norm_pdf(u)
        total += (tau * tau + b * b) * sf + (tau * tau * u - 2.0 * tau * b) * pdf
    total += theta * theta * (1.0 - _norm_sf(up) - _norm_sf(um))
    return total


def _exceed_prob(theta: float, tau: float, alpha: float) -> float:
    """P(|theta + tau Z| > alpha tau)."""
    return _norm_sf(alpha - theta / tau) + _norm_sf(alpha + theta / tau)


def _solve_alpha(tau: float, prior: Mn1lsPrior, target: float) -> float:
    """Inner equation: find alpha with P(|Theta + tau Z| > alpha tau) = target.
    The probability is strictly decreasing in alpha."""
    eps, M = prior.epsilon, prior.magnitude

    def f(alpha):
        return (
            eps * _exceed_prob(M, tau, alpha)
            + (1.0 - eps) * _exceed_prob(0.0, tau, alpha)
            - target
        )

    hi = 1.0
    grow = 0
    while f(hi) > 0.0:
        hi *= 2.0
        grow += 1
        if grow > 200:
            raise SolverError(f"failed to bracket alpha at tau={tau}")
    return _bisect(f, 0.0, hi, 120)


def mn1ls_profile(phi: float, prior: Mn1lsPrior, sigma2: float) -> float:
    """Deterministic squared risk of lassoless least squares at aspect ratio phi.

    Overparameterized branch: tau*^2 where (tau*, alpha*) solves the coupled
    soft-threshold system; the expectations are exact normal-CDF expressions.
    """
    if sigma2 <= 0.0:
        raise ValueError(f"noise energy must be > 0, got {sigma2}")
    if not phi > 0.0:
        raise ValueError(f"aspect ratio must be positive, got {phi}")
    if math.isinf(phi):
        return sigma2 + prior.signal_energy
    if phi == 1.0:
        return INF
    if phi < 1.0:
        return sigma2 / (1.0 - phi)

    target = 1.0 / phi
    eps, M = prior.epsilon, prior.magnitude

    def outer(tau):
        alpha = _solve_alpha(tau, prior, target)
        mse = eps * _threshold_mse(M, tau, alpha) + (1.0 - eps) * _threshold_mse(
            0.0, tau, alpha
        )
        return sigma2 + mse - tau * tau

    lo = math.sqrt(sigma2) * 1e-6
    hi = math.sqrt(sigma2)
    grow = 0
    while outer(hi) > 0.0:
        hi *= 2.0
        grow += 1
        if grow > 120:
            raise SolverError(
                f"failed to bracket tau at phi={phi}: residual {outer(hi):.3e} at tau={hi:.3e}"
            )
    tau = _bisect(outer, lo, hi, 120)
    res_outer = outer(tau)
    alpha = _solve_alpha(tau, prior, target)
    res_inner = (
        eps * _exceed_prob(M, tau, alpha)
        + (1.0 - eps) * _exceed_prob(0.0, tau, alpha)
        - target
    )
    if abs(res_outer) > 1e-8 * max(1.0, tau * tau) or abs(res_inner) > 1e-10:
        raise SolverError(
            f"(tau, alpha) system not converged at phi={phi}: "
            f"residuals ({res_outer:.3e}, {res_inner:.3e})"
        )
    return tau * tau


# ---------------------------------------------------------------------------
# optimized one-step risk under isotropic features


def _h(z: float, s: float) -> float:
    """Excess ridgeless risk s(1 - 1/z) + 1/(z - 1) on (1, inf]; h(inf) = s."""
    if math.isinf(z):
        return s
    return s * (1.0 - 1.0 / z) + 1.0 / (z - 1.0)


@lru_cache(maxsize=1)
def snr_star() -> float:
    """Signal-to-noise level at which the flat branch of the optimized
    one-step risk disappears; approximately 10.7041."""

    def f(x):
        rs = math.sqrt(x)
        q = math.sqrt(2.0 * rs - 1.0)
        return 1.0 - 1.0 / (2.0 * q) - 1.0 / (2.0 - 1.0 / rs - 1.0 / q)

    return _bisect(f, 1.0 + 1e-9, 100.0, 80)


def _lagrange_candidates(gamma: float, s: float):
    """Roots of the stationarity equation for the constrained split problem,
    substituting 1/zeta2 = 1/gamma - 1/zeta1.  Multiple roots can occur near
    case boundaries, so every bracketed root is returned for evaluation."""

    def zeta2_of(z1):
        return 1.0 / (1.0 / gamma - 1.0 / z1)

    def F(z1):
        z2 = zeta2_of(z1)
        lhs = s * (1.0 / z1 - 1.0 / z2)
        rhs = (
            z1**2 / (z1 - 1.0) ** 2
            - z2**2 / (z2 - 1.0) ** 2
            + (1.0 / (z1 - 1.0)) * (1.0 - (z1 / z2) * (z1 / (z1 - 1.0)))
        )
        return lhs - rhs

    lo = max(gamma, 1.0) * (1.0 + 1e-9)
    if gamma < 1.0:
        hi = gamma / (1.0 - gamma) * (1.0 - 1e-9)  # keeps zeta2 > 1
    else:
        hi = max(1e7, 1e3 * gamma)
    if hi <= lo:
        return []
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), 4000))
    vals = [F(z) for z in grid]
    roots = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            roots.append(grid[i])
        elif (vals[i] > 0.0) != (vals[i + 1] > 0.0):
            roots.append(_bisect(F, grid[i], grid[i + 1], 100))
    return [(z1, zeta2_of(z1)) for z1 in roots]


def _overparam_optimum(gamma: float, s: float):
    """Minimize h(z2; h(z1; s)) over z1, z2 > 1 with 1/z1 + 1/z2 <= 1/gamma."""
    if s <= 1.0:
        return s, INF, INF, "corner"
    rs = math.sqrt(s)
    q = math.sqrt(2.0 * rs - 1.0)
    z1_flat = rs / (rs - 1.0)
    z2_flat = q / (q - 1.0)
    if 1.0 / z1_flat + 1.0 / z2_flat <= 1.0 / gamma:
        return 2.0 * q - 1.0, z1_flat, z2_flat, "flat"
    candidates = [
        (_h(z2, _h(z1, s)), z1, z2) for z1, z2 in _lagrange_candidates(gamma, s)
    ]
    if gamma > 1.0:
        # constraint-boundary corners z1 -> gamma (z2 -> inf) and z1 -> inf
        # (z2 -> gamma) both give the unadjusted base value h(gamma; s)
        candidates.append((_h(gamma, s), gamma, INF))
    if not candidates:
        raise SolverError(f"no feasible overparameterized split at gamma={gamma}, snr={s}")
    val, z1, z2 = min(candidates, key=lambda t: t[0])
    return val, z1, z2, "lagrange"


def optimize_onestep_iso(gamma: float, snr: float) -> OneStepOptimum:
    """Optimized one-step excess risk (risk/sigma^2 - 1) with a ridgeless base
    under isotropic features, minimizing over split ratios 1/z1 + 1/z2 <= 1/gamma.

    Returns the minimizing allocation; the underparameterized corner
    (z1 = gamma < 1, no adjustment) competes against the overparameterized
    branch, whose interior optimum is found from the stationarity system.
    """
    if not gamma > 0.0:
        raise ValueError(f"aspect ratio must be positive, got {gamma}")
    if snr < 0.0:
        raise ValueError(f"snr must be >= 0, got {snr}")
    over_val, z1, z2, branch = _overparam_optimum(gamma, snr)
    if gamma < 1.0:
        under_val = gamma / (1.0 - gamma)
        if under_val <= over_val:
            return OneStepOptimum(gamma, gamma, INF, under_val, "underparam")
    return OneStepOptimum(gamma, z1, z2, over_val, branch)


def gamma_star(snr: float) -> float:
    """For snr above snr_star: the aspect ratio where the underparameterized
    branch gamma/(1 - gamma) hands over to the constrained split optimum."""
    if snr <= snr_star():
        raise ValueError("gamma_star is defined for snr > snr_star()")

    def f(g):
        return g / (1.0 - g) - _overparam_optimum(g, snr)[0]

    return _bisect(f, 1e-6, 1.0 - 1e-9, 100)


# ---------------------------------------------------------------------------
# profile monotonization


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def monotonize_profile(gamma: float, profile, scan_points: int = 400) -> float:
    """min over zeta in [gamma, inf] of profile(zeta).

    Log-spaced scan from gamma to 1e6 plus an explicit zeta = inf evaluation
    (the null-risk limit), refined by golden-section search around the best
    scan point to relative tolerance 1e-6.  +inf profile values are skipped.
    """
    if not gamma > 0.0:
        raise ValueError(f"aspect ratio must be positive, got {gamma}")
    upper = max(1e6, 10.0 * gamma)
    zs = np.exp(np.linspace(math.log(gamma), math.log(upper), scan_points))
    zs[0] = gamma
    vals = np.array([profile(z) for z in zs])
    best_inf = profile(INF)
    finite = np.isfinite(vals)
    if not np.any(finite):
        return best_inf
    i = int(np.argmin(np.where(finite, vals, INF)))
    best = float(vals[i])

    lo = zs[i - 1] if i > 0 else zs[i]
    hi = zs[i + 1] if i + 1 < len(zs) else zs[i]
    a, b = math.log(lo), math.log(hi)
    f = lambda t: profile(math.exp(t))
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while (b - a) > 1e-6 * max(1.0, abs(a) + abs(b)):
        if f1 <= f2 or math.isinf(f2):
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    for cand in (f1, f2, best, best_inf):
        if math.isfinite(cand) and cand < best:
            best = cand
    return min(best, best_inf)
