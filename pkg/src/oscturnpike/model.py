"""Truncated oscillator chains, weighted sequence norms, free flow, parameter diagnostics.

The state of a chain of N oscillators is a pair of coordinate/momentum vectors
(xi, eta).  Mode k rotates at frequency omega_k and receives the scalar control
through the gain b_k.  All objects here are plain immutable containers plus pure
functions; truncated sums are evaluated at the stored level N with an explicit
tail extrapolation where a verdict about the infinite sums is requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class StateVector:
    """Coordinates and momenta of a truncated chain, one entry per mode."""

    xi: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float))
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float))
        if self.xi.ndim != 1 or self.eta.ndim != 1 or self.xi.size != self.eta.size:
            raise ValueError("xi and eta must be 1-d arrays of equal length")

    @property
    def n(self) -> int:
        return self.xi.size

    @property
    def stacked(self) -> np.ndarray:
        """Concatenated (xi, eta) as a single 2N vector."""
        return np.concatenate([self.xi, self.eta])

    @classmethod
    def zeros(cls, n: int) -> "StateVector":
        return cls(np.zeros(n), np.zeros(n))

    @classmethod
    def from_stacked(cls, vec) -> "StateVector":
        vec = np.asarray(vec, dtype=float)
        if vec.ndim != 1 or vec.size % 2:
            raise ValueError("stacked state must be a 1-d vector of even length")
        half = vec.size // 2
        return cls(vec[:half], vec[half:])


@dataclass(frozen=True)
class WeightIndex:
    """Exponent pair (p, q) selecting the mode weights omega_k^(2p) / |b_k|^(2q)."""

    p: float
    q: float


@dataclass(frozen=True)
class OscillatorSystem:
    """Frequencies and input gains of a truncated chain.

    Construction enforces the structural requirements used everywhere downstream:
    omega_1 > 0 and strictly increasing frequencies, so the gap floor is positive
    (infinite for N = 1, where no gap exists).  Zero gains are representable --
    they are a parameter defect that the assumption report flags -- but weighted
    norms with a gain exponent reject them.
    """

    omega: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if omega.ndim != 1 or b.ndim != 1 or omega.size != b.size:
            raise ValueError("omega and b must be 1-d arrays of equal length")
        if omega.size == 0:
            raise ValueError("empty system")
        if omega[0] <= 0.0:
            raise ValueError("omega_1 must be positive")
        if omega.size > 1 and np.any(np.diff(omega) <= 0.0):
            raise ValueError("frequencies must be strictly increasing")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.omega.size

    @property
    def gap_floor(self) -> float:
        """Smallest frequency gap omega_{k+1} - omega_k (inf for a single mode)."""
        if self.n == 1:
            return math.inf
        return float(np.min(np.diff(self.omega)))

    @property
    def b_norm(self) -> float:
        """Euclidean norm of the gain vector."""
        return float(np.linalg.norm(self.b))

    def truncated(self, n: int) -> "OscillatorSystem":
        if not 1 <= n <= self.n:
            raise ValueError(f"truncation {n} outside 1..{self.n}")
        return OscillatorSystem(self.omega[:n], self.b[:n])


def _weights(w, sys: OscillatorSystem) -> np.ndarray:
    if isinstance(w, WeightIndex):
        p, q = w.p, w.q
    else:
        p, q = float(w[0]), float(w[1])
    factors = np.ones(sys.n)
    if p != 0.0:
        factors = factors * sys.omega ** (2.0 * p)
    if q != 0.0:
        if np.any(sys.b == 0.0):
            raise ValueError("zero gain b_k with q != 0: weight undefined")
        factors = factors / np.abs(sys.b) ** (2.0 * q)
    return factors


def weighted_norm(x: StateVector, w, sys: OscillatorSystem) -> float:
    """Weighted norm sqrt(sum_k omega_k^(2p) (xi_k^2 + eta_k^2) / |b_k|^(2q)).

    `w` is a WeightIndex or a plain (p, q) pair.  (0, 0) is the ambient
    Euclidean norm.
    """
    if x.n != sys.n:
        raise ValueError("state dimension does not match the system")
    factors = _weights(w, sys)
    return float(np.sqrt(np.sum(factors * (x.xi**2 + x.eta**2))))


def free_flow(x0: StateVector, t: float, sys: OscillatorSystem) -> StateVector:
    """Uncontrolled evolution: each mode rotates by the angle omega_k * t.

    Solves xi' = omega*eta, eta' = -omega*xi exactly; an isometry for every
    weighted norm.
    """
    if x0.n != sys.n:
        raise ValueError("state dimension does not match the system")
    c = np.cos(sys.omega * t)
    s = np.sin(sys.omega * t)
    return StateVector(c * x0.xi + s * x0.eta, -s * x0.xi + c * x0.eta)


def min_control_time(sys: OscillatorSystem) -> float:
    """Controllability time threshold 2*pi / gap_floor (0 for a single mode)."""
    gap = sys.gap_floor
    if not gap > 0.0:
        raise ValueError("gap floor must be positive")
    return 0.0 if math.isinf(gap) else TWO_PI / gap


# ---------------------------------------------------------------------------
# Parameter assumption diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AssumptionCheck:
    """Outcome of one parameter check: values per truncation, tail estimate, verdict."""

    name: str
    values: np.ndarray
    tail: float
    verdict: str  # "pass" | "fail" | "inconclusive"
    note: str = ""


@dataclass(frozen=True)
class AssumptionReport:
    """Collected verdicts for the six parameter conditions plus growth diagnostics.

    `growth_exponent` is the empirical power p in omega_k ~ k^p fitted on the top
    half of the modes; `decay_criterion_ok` records whether 2*alpha*rho < 2 - 1/p,
    the sufficient relation tying the summability exponent rho to the gain decay.
    """

    truncations: tuple
    rho: float
    alpha: float
    checks: dict = field(default_factory=dict)
    growth_exponent: float = math.nan
    decay_criterion_lhs: float = math.nan
    decay_criterion_rhs: float = math.nan
    decay_criterion_ok: bool = False

    def verdict(self, name: str) -> str:
        return self.checks[name].verdict

    def all_pass(self) -> bool:
        return all(c.verdict == "pass" for c in self.checks.values())


def _ratio_extrapolate(values: np.ndarray, instability=0.2):
    """Geometric tail estimate from partial values at increasing truncations.

    Returns (tail, verdict, note).  Increment ratios that drift by more than
    `instability` (relative) give "inconclusive"; stable ratios >= 1 give "fail"
    (the partial values keep growing), stable ratios < 1 give "pass" with the
    geometric tail d * r / (1 - r).
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return math.nan, "inconclusive", "too few truncations"
    increments = np.diff(values)
    scale = max(abs(values[-1]), 1.0)
    if increments[-1] <= 1e-14 * scale:
        return 0.0, "pass", "increments at rounding level"
    if values.size < 3:
        return math.nan, "inconclusive", "need >= 3 truncations for a ratio test"
    ratios = increments[1:] / increments[:-1]
    if np.any(~np.isfinite(ratios)) or np.any(ratios <= 0.0):
        return math.nan, "inconclusive", "increment ratios not positive"
    if ratios.size >= 2:
        drift = np.abs(np.diff(ratios)) / ratios[:-1]
        if np.any(drift > instability):
            return math.nan, "inconclusive", "increment ratios unstable"
    r = float(ratios[-1])
    if r >= 1.0:
        return math.inf, "fail", f"increments not decaying (ratio {r:.3g})"
    tail = float(increments[-1] * r / (1.0 - r))
    return tail, "pass", f"geometric ratio {r:.3g}"


def _gap_sums(omega: np.ndarray) -> np.ndarray:
    """S_k = sum_{j != k} (omega_k - omega_j)^(-2) for every k of the truncation."""
    diff = omega[:, None] - omega[None, :]
    np.fill_diagonal(diff, np.inf)
    return np.sum(diff**-2, axis=1)


def check_assumptions(sys: OscillatorSystem, rho: float, alpha: float,
                      truncations=None) -> AssumptionReport:
    """Evaluate the six parameter conditions on the truncation.

    Nonzero gains and the frequency gap are checked exactly.  The three infinite
    sums (the gap sum bound, the plain and the rho-weighted double sums) are
    reported as partial values at each requested truncation together with a
    geometric-ratio tail extrapolation; an unstable ratio yields "inconclusive"
    rather than a false pass.  The gain-decay floor reports
    min |b_k| omega_k^alpha over the top half of the modes.
    """
    n = sys.n
    if truncations is None:
        truncations = sorted({max(1, n // 8), max(1, n // 4), max(1, n // 2), n})
    truncations = [int(m) for m in truncations]
    if any(m2 <= m1 for m1, m2 in zip(truncations, truncations[1:])):
        raise ValueError("truncations must be strictly increasing")
    if truncations[-1] > n or truncations[0] < 1:
        raise ValueError("truncations must lie in 1..N")

    checks = {}

    zero_idx = np.flatnonzero(sys.b == 0.0)
    checks["A1"] = AssumptionCheck(
        name="A1", values=np.array([float(zero_idx.size)]), tail=0.0,
        verdict="fail" if zero_idx.size else "pass",
        note=f"zero gains at modes {1 + zero_idx}" if zero_idx.size else "all gains nonzero",
    )

    gap = sys.gap_floor
    a2_ok = sys.omega[0] > 0.0 and gap > 0.0
    checks["A2"] = AssumptionCheck(
        name="A2", values=np.array([gap if math.isfinite(gap) else math.inf]),
        tail=0.0, verdict="pass" if a2_ok else "fail",
        note=f"gap floor {gap:.6g}",
    )

    a3_vals, a4_vals, a5_vals = [], [], []
    for m in truncations:
        om, bb = sys.omega[:m], sys.b[:m]
        diff2 = (om[:, None] - om[None, :]) ** 2
        np.fill_diagonal(diff2, np.inf)
        inv = 1.0 / diff2
        a3_vals.append(float(np.max(np.sum(inv, axis=1))))
        a4_vals.append(float(np.sum(bb[None, :] ** 2 * inv)))
        with np.errstate(divide="ignore"):
            w_k = np.abs(bb) ** (-2.0 * rho)
        inner = np.sum(np.abs(bb[None, :]) ** (2.0 * (1.0 + rho)) * inv, axis=1)
        a5_vals.append(float(np.sum(w_k * inner)))

    for name, vals in (("A3", a3_vals), ("A4", a4_vals), ("A5", a5_vals)):
        vals = np.asarray(vals)
        if np.all(np.isfinite(vals)):
            tail, verdict, note = _ratio_extrapolate(vals)
        else:
            tail, verdict, note = math.inf, "fail", "partial values not finite"
        checks[name] = AssumptionCheck(name=name, values=vals, tail=tail,
                                       verdict=verdict, note=note)

    a6_vals = []
    for m in truncations:
        top = slice(m // 2, m)
        a6_vals.append(float(np.min(np.abs(sys.b[top]) * sys.omega[top] ** alpha)))
    a6_floor = a6_vals[-1]
    checks["A6"] = AssumptionCheck(
        name="A6", values=np.asarray(a6_vals), tail=math.nan,
        verdict="pass" if a6_floor > 0.0 else "fail",
        note=f"top-half floor of |b_k| omega_k^alpha = {a6_floor:.6g}",
    )

    # Empirical frequency growth omega_k ~ k^p on the top half, and the
    # sufficient decay relation 2*alpha*rho < 2 - 1/p.
    if n >= 4:
        ks = np.arange(1, n + 1, dtype=float)
        top = slice(n // 2, n)
        p_hat = float(np.polyfit(np.log(ks[top]), np.log(sys.omega[top]), 1)[0])
    else:
        p_hat = math.nan
    lhs = 2.0 * alpha * rho
    rhs = 2.0 - 1.0 / p_hat if p_hat and math.isfinite(p_hat) else math.nan

    return AssumptionReport(
        truncations=tuple(truncations), rho=rho, alpha=alpha, checks=checks,
        growth_exponent=p_hat, decay_criterion_lhs=lhs, decay_criterion_rhs=rhs,
        decay_criterion_ok=bool(math.isfinite(rhs) and lhs < rhs),
    )
