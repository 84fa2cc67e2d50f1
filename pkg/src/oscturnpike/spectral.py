"""Spectrum and eigenvectors of the complexified state-costate generator.

Substituting the feedback law into state and adjoint dynamics couples the chain
through the rank-one gain block.  In the complex variables

    z = dxi + i*deta,  zeta = dxi - i*deta,  p = dlam + i*dmu,  q = dlam - i*dmu

the generator has eigenvalues given by the scalar equation

    sum_k b_k^2 ( (sigma + i w_k)^-2 + (sigma - i w_k)^-2 ) = 2,

four roots per mode, placed symmetrically about both axes and never on the
imaginary axis.  This module finds them by damped Newton from the per-mode
magnitude predictor lambda0_k, certifies uniqueness disks where the series
bound applies, and assembles the near-orthonormal basis built from pairwise
eigenvector combinations together with its closeness diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NumericsError
from .model import OscillatorSystem

_POLE_TOL = 1e-12


@dataclass(frozen=True)
class ComplexQuadVector:
    """Four complex blocks (z, zeta, p, q), each of length N."""

    z: np.ndarray
    zeta: np.ndarray
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        for name in ("z", "zeta", "p", "q"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex))
        n = self.z.size
        if any(getattr(self, name).size != n for name in ("zeta", "p", "q")):
            raise ValueError("all four blocks must have equal length")

    @property
    def n(self) -> int:
        return self.z.size

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([self.z, self.zeta, self.p, self.q])

    def norm(self) -> float:
        return float(np.linalg.norm(self.stacked))

    @classmethod
    def from_stacked(cls, vec) -> "ComplexQuadVector":
        vec = np.asarray(vec, dtype=complex)
        if vec.ndim != 1 or vec.size % 4:
            raise ValueError("stacked vector length must be a multiple of 4")
        n = vec.size // 4
        return cls(vec[:n], vec[n:2 * n], vec[2 * n:3 * n], vec[3 * n:])

    def block_at(self, idx: int) -> np.ndarray:
        """The C^4 coordinate quadruple (z_k, zeta_k, p_k, q_k) at 0-based idx."""
        return np.array([self.z[idx], self.zeta[idx], self.p[idx], self.q[idx]])


def complexify(delta) -> ComplexQuadVector:
    """Map a real 4N vector (dxi, deta, dlam, dmu) to its complex quadruple."""
    delta = np.asarray(delta, dtype=float)
    if delta.ndim != 1 or delta.size % 4:
        raise ValueError("expected a flat vector of length 4N")
    n = delta.size // 4
    dxi, deta, dlam, dmu = delta[:n], delta[n:2 * n], delta[2 * n:3 * n], delta[3 * n:]
    return ComplexQuadVector(dxi + 1j * deta, dxi - 1j * deta,
                             dlam + 1j * dmu, dlam - 1j * dmu)


def decomplexify(theta: ComplexQuadVector) -> np.ndarray:
    """Inverse of complexify; real-valued input round-trips exactly."""
    z, zeta, p, q = theta.z, theta.zeta, theta.p, theta.q
    return np.concatenate([(z + zeta) / 2.0, 1j * (zeta - z) / 2.0,
                           (p + q) / 2.0, 1j * (q - p) / 2.0])


def _check_pole(sigma: complex, sys: OscillatorSystem):
    dist = np.minimum(np.abs(sigma - 1j * sys.omega), np.abs(sigma + 1j * sys.omega))
    if np.min(dist) < _POLE_TOL:
        raise ValueError("sigma coincides with a resonance +-i*omega_k")


def char_residual(sigma: complex, sys: OscillatorSystem) -> complex:
    """Characteristic defect sum_k b_k^2 ((sigma+iw)^-2 + (sigma-iw)^-2) - 2."""
    _check_pole(sigma, sys)
    iw = 1j * sys.omega
    return complex(np.sum(sys.b**2 * ((sigma + iw) ** -2 + (sigma - iw) ** -2)) - 2.0)


def char_residual_deriv(sigma: complex, sys: OscillatorSystem) -> complex:
    """Analytic derivative of char_residual."""
    _check_pole(sigma, sys)
    iw = 1j * sys.omega
    return complex(-2.0 * np.sum(sys.b**2 * ((sigma + iw) ** -3 + (sigma - iw) ** -3)))


def mode_char_residual(nu: complex, k: int, sys: OscillatorSystem) -> complex:
    """char_residual at sigma = i*omega_k + nu, evaluated in the shifted variable.

    Forming sigma directly rounds nu to the resolution of omega_k; writing the
    denominators as nu + i(omega_k -+ omega_j) keeps full precision in nu, which
    is what root residuals below 1e-10 require once omega_k is large.
    """
    idx = k - 1
    plus = nu + 1j * (sys.omega[idx] + sys.omega)
    minus = nu + 1j * (sys.omega[idx] - sys.omega)
    if np.min(np.abs(minus)) < 1e-300 or np.min(np.abs(plus)) < 1e-300:
        raise ValueError("offset nu hits a resonance")
    return complex(np.sum(sys.b**2 * (plus**-2 + minus**-2)) - 2.0)


def _mode_char_residual_deriv(nu: complex, k: int, sys: OscillatorSystem) -> complex:
    idx = k - 1
    plus = nu + 1j * (sys.omega[idx] + sys.omega)
    minus = nu + 1j * (sys.omega[idx] - sys.omega)
    return complex(-2.0 * np.sum(sys.b**2 * (plus**-3 + minus**-3)))


def lambda0(k: int, sys: OscillatorSystem) -> float:
    """Per-mode magnitude predictor for the root offset from +i*omega_k.

    lambda0_k = |b_k| / sqrt(2 + b_k^2/(4 w_k^2)
                             + 2 sum_{j != k} b_j^2 (w_k^2 + w_j^2)/(w_k^2 - w_j^2)^2),
    always in (0, |b_k|/sqrt(2)).
    """
    if not 1 <= k <= sys.n:
        raise ValueError(f"mode index {k} outside 1..{sys.n}")
    idx = k - 1
    w, b = sys.omega, sys.b
    wk, bk = w[idx], b[idx]
    mask = np.arange(sys.n) != idx
    wj, bj = w[mask], b[mask]
    tail = np.sum(bj**2 * (wk**2 + wj**2) / (wk**2 - wj**2) ** 2)
    return float(abs(bk) / math.sqrt(2.0 + bk**2 / (4.0 * wk**2) + 2.0 * tail))


@dataclass(frozen=True)
class EigenQuad:
    """The four roots attached to mode k and their shared offset nu_k.

    sigma_plus     = +i w_k + nu_k          (unstable)
    sigma_minus    = +i w_k - conj(nu_k)    (stable)
    sigma_neg_plus = -i w_k + conj(nu_k)    (unstable)
    sigma_neg_minus= -i w_k - nu_k          (stable)

    eps = nu - lambda0 measures the defect of the magnitude predictor;
    eps_within_half records |eps| < lambda0 / 2.  gain keeps the mode's b_k so
    decay constants can be formed from the quad alone.
    """

    k: int
    sigma_plus: complex
    sigma_minus: complex
    sigma_neg_plus: complex
    sigma_neg_minus: complex
    nu: complex
    lambda0: float
    eps: complex
    gain: float
    residual: float
    iterations: int
    eps_within_half: bool

    @property
    def all_sigmas(self):
        return (self.sigma_plus, self.sigma_minus, self.sigma_neg_plus, self.sigma_neg_minus)


def _newton_root(k: int, sys: OscillatorSystem, nu0: complex, tol: float,
                 max_iter: int = 50):
    """Damped Newton on the shifted residual with a secant fallback.

    Halves the step while the residual magnitude grows; switches to a secant
    update if the analytic derivative underflows.
    """
    nu = complex(nu0)
    f = mode_char_residual(nu, k, sys)
    prev_nu, prev_f = None, None
    for it in range(1, max_iter + 1):
        if abs(f) < tol:
            return nu, abs(f), it - 1
        d = _mode_char_residual_deriv(nu, k, sys)
        if abs(d) > 1e-300:
            step = f / d
        elif prev_nu is not None and f != prev_f:
            step = f * (nu - prev_nu) / (f - prev_f)
        else:
            raise NumericsError("derivative underflow with no secant history")
        new_nu, new_f = nu, f
        for _ in range(25):
            cand = nu - step
            try:
                fc = mode_char_residual(cand, k, sys)
            except ValueError:
                step /= 2.0
                continue
            new_nu, new_f = cand, fc
            if abs(fc) <= abs(f):
                break
            step /= 2.0
        prev_nu, prev_f = nu, f
        nu, f = new_nu, new_f
    if abs(f) < 10.0 * tol:
        return nu, abs(f), max_iter
    raise NumericsError(
        f"Newton stalled at mode {k}: nu={nu:.6g}, |residual|={abs(f):.3g} "
        f"after {max_iter} iterations")


def find_nu(k: int, sys: OscillatorSystem, tol: float = 1e-12) -> EigenQuad:
    """Locate the root near +i*omega_k and populate the symmetric quadruple.

    Runs Newton in the offset variable nu = sigma - i*omega_k starting from the
    magnitude predictor lambda0_k.  The converged offset must satisfy
    |residual| < 1e-11 and |nu| <= ||b|| (the localization ball), otherwise an
    error is raised.
    """
    if not 1 <= k <= sys.n:
        raise ValueError(f"mode index {k} outside 1..{sys.n}")
    wk = sys.omega[k - 1]
    lam0 = lambda0(k, sys)
    nu, res, iters = _newton_root(k, sys, complex(lam0), tol)
    if res >= 1e-11:
        raise NumericsError(f"mode {k}: residual {res:.3g} above 1e-11")
    if nu.real < 0.0:
        # the Newton path crossed to the mirror root; its reflection is also a root
        nu = -nu.conjugate()
    if nu.real <= 0.0:
        raise NumericsError(f"mode {k}: root not strictly off the imaginary axis")
    if abs(nu) > sys.b_norm:
        raise NumericsError(
            f"mode {k}: root {1j * wk + nu:.6g} outside the ball of radius ||b|| around i*omega_k")
    eps = nu - lam0
    return EigenQuad(
        k=k,
        sigma_plus=1j * wk + nu,
        sigma_minus=1j * wk - nu.conjugate(),
        sigma_neg_plus=-1j * wk + nu.conjugate(),
        sigma_neg_minus=-1j * wk - nu,
        nu=nu, lambda0=lam0, eps=eps, gain=float(sys.b[k - 1]),
        residual=res, iterations=iters,
        eps_within_half=bool(abs(eps) < lam0 / 2.0),
    )


def spectrum(sys: OscillatorSystem, tol: float = 1e-12):
    """EigenQuad for every mode 1..N."""
    return [find_nu(k, sys, tol=tol) for k in range(1, sys.n + 1)]


# ---------------------------------------------------------------------------
# Uniqueness certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoucheCertificate:
    """Series-bound uniqueness certificate for the root near i*omega_k.

    `applicable` is the expansion-radius precondition x < min(1, R*, R_sub, 2 w_k);
    when it holds and s1 + s2 + s3 <= threshold, exactly one root lies in the
    open disk of radius kappa * lambda0_k around lambda0_k.
    """

    k: int
    kappa: float
    applicable: bool
    holds: bool
    s1: float
    s2: float
    s3: float
    x: float
    r_star: float
    r_sub: float
    threshold: float


def rouche_certificate(k: int, kappa: float, sys: OscillatorSystem) -> RoucheCertificate:
    """Evaluate the closed-form series bounds S1, S2, S3 at x = b_k^2 (1+kappa)/2."""
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must lie in (0, 1)")
    if not 1 <= k <= sys.n:
        raise ValueError(f"mode index {k} outside 1..{sys.n}")
    idx = k - 1
    w, b = sys.omega, sys.b
    wk, bk = w[idx], b[idx]
    mask = np.arange(sys.n) != idx
    if sys.n > 1:
        r_star = float(np.min(wk + w[mask]))
        r_sub = float(np.min(np.abs(wk - w[mask])))
    else:
        r_star = r_sub = math.inf
    x = bk**2 * (1.0 + kappa) / 2.0
    threshold = 2.0 * kappa * (2.0 - kappa) / (1.0 + kappa) ** 2
    # 2 w_k is the radius of the lone-mode series, which the pair (R*, R_sub)
    # does not cover for the lowest mode.
    applicable = x < min(1.0, r_star, r_sub, 2.0 * wk)
    if not applicable:
        return RoucheCertificate(k=k, kappa=kappa, applicable=False, holds=False,
                                 s1=math.nan, s2=math.nan, s3=math.nan,
                                 x=x, r_star=r_star, r_sub=r_sub, threshold=threshold)
    b2 = sys.b_norm**2
    s1 = bk**2 * x * (4.0 * wk - x) / (4.0 * wk**2 * (2.0 * wk - x) ** 2)
    if math.isinf(r_star):
        s2 = s3 = 0.0
    else:
        s2 = b2 * x * (2.0 * r_star - x) / (r_star**2 * (r_star - x) ** 2)
        s3 = b2 * x * (2.0 * r_sub - x) / (r_sub**2 * (r_sub - x) ** 2)
    return RoucheCertificate(k=k, kappa=kappa, applicable=True,
                             holds=bool(s1 + s2 + s3 <= threshold),
                             s1=s1, s2=s2, s3=s3, x=x,
                             r_star=r_star, r_sub=r_sub, threshold=threshold)


# ---------------------------------------------------------------------------
# Eigenvectors and the near-orthonormal family
# ---------------------------------------------------------------------------

def eigvec(sigma: complex, sys: OscillatorSystem) -> ComplexQuadVector:
    """Candidate eigenvector at sigma, normalized so the scalar feedback is 1.

    z = (sigma + i W)^-1 b,   zeta = -(sigma - i W)^-1 b,
    p = (sigma + i W)^-2 b,   q = -(sigma - i W)^-2 b.
    """
    _check_pole(sigma, sys)
    plus = sigma + 1j * sys.omega
    minus = sigma - 1j * sys.omega
    b = sys.b
    return ComplexQuadVector(b / plus, -b / minus, b / plus**2, -b / minus**2)


_MODE_ROOT_OFFSETS = {
    "plus": (1.0, lambda nu: nu),
    "minus": (1.0, lambda nu: -nu.conjugate()),
    "neg_plus": (-1.0, lambda nu: nu.conjugate()),
    "neg_minus": (-1.0, lambda nu: -nu),
}


def mode_eigvec(quad: EigenQuad, which: str, sys: OscillatorSystem) -> ComplexQuadVector:
    """eigvec at one of the quad's four roots, in shifted arithmetic.

    The denominators sigma -+ i*omega_j are written as offset + i(s*omega_k -+ omega_j)
    so the offset keeps full precision next to large frequencies; `which` is one
    of "plus", "minus", "neg_plus", "neg_minus".
    """
    try:
        sign, offset_of = _MODE_ROOT_OFFSETS[which]
    except KeyError:
        raise ValueError(f"unknown root label {which!r}") from None
    mu = offset_of(quad.nu)
    wk = sys.omega[quad.k - 1]
    plus_den = mu + 1j * (sign * wk + sys.omega)
    minus_den = mu + 1j * (sign * wk - sys.omega)
    b = sys.b
    return ComplexQuadVector(b / plus_den, -b / minus_den,
                             b / plus_den**2, -b / minus_den**2)


def apply_generator(theta: ComplexQuadVector, sys: OscillatorSystem) -> ComplexQuadVector:
    """Action of the complexified generator on a quadruple."""
    w, b = sys.omega, sys.b
    phi = 0.5 * np.sum(b * (theta.p - theta.q))
    return ComplexQuadVector(
        -1j * w * theta.z + b * phi,
        1j * w * theta.zeta - b * phi,
        theta.z - 1j * w * theta.p,
        theta.zeta + 1j * w * theta.q,
    )


def eigen_residual(sigma: complex, sys: OscillatorSystem) -> float:
    """Relative defect || A theta - sigma theta || / || theta || at sigma."""
    theta = eigvec(sigma, sys)
    image = apply_generator(theta, sys)
    return float(np.linalg.norm(image.stacked - sigma * theta.stacked) / theta.norm())


@dataclass(frozen=True)
class RieszModeEntry:
    """The four combined vectors attached to mode k."""

    k: int
    theta_z: ComplexQuadVector
    theta_zeta: ComplexQuadVector
    theta_p: ComplexQuadVector
    theta_q: ComplexQuadVector

    def vectors(self):
        return {"z": self.theta_z, "zeta": self.theta_zeta,
                "p": self.theta_p, "q": self.theta_q}


_DIAG_UNIT = {"z": 0, "zeta": 1, "p": 2, "q": 3}


def diag_projection_closed_form(quad: EigenQuad, which: str, sys: OscillatorSystem) -> np.ndarray:
    """Closed-form own-mode coordinates of the combined vectors.

    Expressed directly in (Re nu, Im nu, omega_k); used to verify the assembled
    vectors against an independent evaluation path.
    """
    a, c = quad.nu.real, quad.nu.imag
    w = sys.omega[quad.k - 1]
    nrm2 = a * a + c * c
    den = a * a + (2.0 * w + c) ** 2
    alpha = (a * a + (4.0 * w + c) * c) / den
    beta = 4.0 * w * (2.0 * w * c + nrm2) / den**2
    gamma = (2.0 * w * (a * a - c * c) - nrm2 * c) / den
    kappa = ((2.0 * w * (a + c) + nrm2) * (2.0 * w * (a - c) - nrm2)) / den**2
    if which == "z":
        return np.array([1.0, -alpha, 0.0, -1j * beta])
    if which == "zeta":
        return np.array([-alpha, 1.0, 1j * beta, 0.0])
    if which == "p":
        return np.array([-1j * c, -1j * gamma, 1.0, kappa])
    if which == "q":
        return np.array([1j * gamma, 1j * c, kappa, 1.0])
    raise ValueError(f"unknown block {which!r}")


def riesz_vectors(k: int, quad: EigenQuad, sys: OscillatorSystem,
                  check_tol: float = 1e-9) -> RieszModeEntry:
    """Pairwise eigenvector combinations that are near the k-th unit coordinates.

    theta_z = (conj(nu)^2 T(-k,+) - nu^2 T(-k,-)) / (2 b_k Re nu)
    theta_p = (conj(nu)^2 T(-k,+) + nu^2 T(-k,-)) / (2 b_k)
    theta_zeta = -(nu^2 T(k,+) - conj(nu)^2 T(k,-)) / (2 b_k Re nu)
    theta_q    = -(nu^2 T(k,+) + conj(nu)^2 T(k,-)) / (2 b_k)

    The own-mode coordinates must match their closed forms to check_tol.
    """
    if quad.nu.real < 1e-300:
        raise NumericsError(f"mode {k}: vanishing real part, combination ill-conditioned")
    bk = sys.b[k - 1]
    nu, nu_c = quad.nu, quad.nu.conjugate()
    t_neg_p = mode_eigvec(quad, "neg_plus", sys).stacked
    t_neg_m = mode_eigvec(quad, "neg_minus", sys).stacked
    t_pos_p = mode_eigvec(quad, "plus", sys).stacked
    t_pos_m = mode_eigvec(quad, "minus", sys).stacked
    re = nu.real
    theta_z = (nu_c**2 * t_neg_p - nu**2 * t_neg_m) / (2.0 * bk * re)
    theta_p = (nu_c**2 * t_neg_p + nu**2 * t_neg_m) / (2.0 * bk)
    theta_zeta = -(nu**2 * t_pos_p - nu_c**2 * t_pos_m) / (2.0 * bk * re)
    theta_q = -(nu**2 * t_pos_p + nu_c**2 * t_pos_m) / (2.0 * bk)
    entry = RieszModeEntry(
        k=k,
        theta_z=ComplexQuadVector.from_stacked(theta_z),
        theta_zeta=ComplexQuadVector.from_stacked(theta_zeta),
        theta_p=ComplexQuadVector.from_stacked(theta_p),
        theta_q=ComplexQuadVector.from_stacked(theta_q),
    )
    for name, vec in entry.vectors().items():
        expected = diag_projection_closed_form(quad, name, sys)
        err = np.max(np.abs(vec.block_at(k - 1) - expected))
        if err > check_tol:
            raise NumericsError(
                f"mode {k}: own-mode coordinates of theta_{name} off by {err:.3g}")
    return entry


@dataclass(frozen=True)
class RieszFamily:
    """Combined-vector family for modes 1..N with closeness diagnostics.

    quad_closeness_partials[m] accumulates, over k <= m, the squared distance of
    the four mode-k vectors to the corresponding unit coordinates; the weighted
    variant renormalizes cross-mode coordinates by (|b_j| / |b_k|)^rho.
    offdiag_constant is the measured constant in
    ||Pi_j theta_k^s|| <= C |b_j| / |omega_j - omega_k|.
    """

    entries: tuple
    rho: float = math.nan
    quad_closeness_partials: np.ndarray = field(default=None)
    weighted_closeness_partials: np.ndarray = field(default=None)
    offdiag_constant: float = math.nan

    @property
    def n(self) -> int:
        return len(self.entries)


def build_riesz_family(sys: OscillatorSystem, quads=None, rho: float = None,
                       tol: float = 1e-12) -> RieszFamily:
    """Assemble entries for all modes; attach closeness partial sums when rho is given."""
    if quads is None:
        quads = spectrum(sys, tol=tol)
    entries = tuple(riesz_vectors(q.k, q, sys) for q in quads)
    family = RieszFamily(entries=entries)
    if rho is not None:
        quad_partials, weighted_partials, c_meas = _closeness_arrays(family, rho, sys)
        family = RieszFamily(entries=entries, rho=rho,
                             quad_closeness_partials=quad_partials,
                             weighted_closeness_partials=weighted_partials,
                             offdiag_constant=c_meas)
    return family


def _closeness_arrays(fam: RieszFamily, rho: float, sys: OscillatorSystem):
    n = fam.n
    per_mode_quad = np.zeros(n)
    per_mode_weighted = np.zeros(n)
    c_meas = 0.0
    abs_b = np.abs(sys.b)
    for entry in fam.entries:
        idx = entry.k - 1
        ratio = (abs_b / abs_b[idx]) ** (2.0 * rho)
        gap = np.abs(sys.omega - sys.omega[idx])
        for name, vec in entry.vectors().items():
            blocks = np.abs(np.stack([vec.z, vec.zeta, vec.p, vec.q])) ** 2  # 4 x N
            col_norm2 = np.sum(blocks, axis=0)
            target = vec.block_at(idx).copy()
            target[_DIAG_UNIT[name]] -= 1.0
            diag_dist2 = float(np.sum(np.abs(target) ** 2))
            off = col_norm2.copy()
            off[idx] = 0.0
            per_mode_quad[idx] += diag_dist2 + float(np.sum(off))
            per_mode_weighted[idx] += diag_dist2 + float(np.sum(ratio * off))
            mask = (np.arange(n) != idx) & (abs_b > 0.0)
            if np.any(mask):
                c_meas = max(c_meas, float(np.max(
                    np.sqrt(col_norm2[mask]) * gap[mask] / abs_b[mask])))
    quad_partials = np.concatenate([[0.0], np.cumsum(per_mode_quad)])
    weighted_partials = np.concatenate([[0.0], np.cumsum(per_mode_weighted)])
    return quad_partials, weighted_partials, c_meas


def closeness_sums(fam: RieszFamily, rho: float, sys: OscillatorSystem = None):
    """Partial sums (index m = 0..N) of squared distances to the unit coordinates.

    Returns (quad_partials, weighted_partials); both nondecreasing.  The system
    is needed for the gain/gap data; a family built with diagnostics attached
    can omit it when rho matches.
    """
    if sys is None:
        if fam.quad_closeness_partials is None or fam.rho != rho:
            raise ValueError("family carries no diagnostics for this rho; pass the system")
        return fam.quad_closeness_partials, fam.weighted_closeness_partials
    quad_partials, weighted_partials, _ = _closeness_arrays(fam, rho, sys)
    return quad_partials, weighted_partials


def inverse_basis_roundtrip_error(entry: RieszModeEntry, quad: EigenQuad,
                                  sys: OscillatorSystem) -> float:
    """Reconstruct the four eigenvectors from the combined family and measure the defect.

    T(-k,+) = b_k/conj(nu)^2 (theta_p + Re nu * theta_z)
    T(-k,-) = b_k/nu^2       (theta_p - Re nu * theta_z)
    T(k,+)  = -b_k/nu^2       (theta_q + Re nu * theta_zeta)
    T(k,-)  = -b_k/conj(nu)^2 (theta_q - Re nu * theta_zeta)

    (The second pair mirrors the first with nu and conj(nu) exchanged, because
    the combinations attach nu^2 to T(k,+) where the first pair attaches
    conj(nu)^2 to T(-k,+).)
    """
    bk = sys.b[quad.k - 1]
    nu, re = quad.nu, quad.nu.real
    nu_c = nu.conjugate()
    pairs = [
        (bk / nu_c**2 * (entry.theta_p.stacked + re * entry.theta_z.stacked), "neg_plus"),
        (bk / nu**2 * (entry.theta_p.stacked - re * entry.theta_z.stacked), "neg_minus"),
        (-bk / nu**2 * (entry.theta_q.stacked + re * entry.theta_zeta.stacked), "plus"),
        (-bk / nu_c**2 * (entry.theta_q.stacked - re * entry.theta_zeta.stacked), "minus"),
    ]
    err = 0.0
    for recon, which in pairs:
        direct = mode_eigvec(quad, which, sys).stacked
        err = max(err, float(np.linalg.norm(recon - direct)
                             / max(np.linalg.norm(direct), 1e-300)))
    return err
