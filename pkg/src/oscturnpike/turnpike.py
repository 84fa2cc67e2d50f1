"""Quantitative turnpike diagnostics: deviation envelopes, decay fits, modal bounds.

The headline estimate bounds the distance of the optimal trajectory from the
steady optimum, measured in the gain-weighted norm with exponent -(beta+1), by

    C * ((t+1)^-beta + (T-t+1)^-beta)

times the size of the boundary data, with C independent of the horizon.  The
functions here extract the smallest validating constant from a solved run, fit
an empirical decay exponent, and evaluate the per-mode quantities behind the
estimate: exponential-to-polynomial conversion constants and uniform bounds on
tanh / 1/cosh along the root directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NumericsError
from .lq import Trajectory
from .model import OscillatorSystem, StateVector, weighted_norm
from .static_opt import StaticSolution


@dataclass(frozen=True)
class DeviationProfile:
    """Pointwise weighted deviation from the steady quadruple plus its normalizer.

    dev(t) = ||x(t) - xhat||_(0,-beta-1) + ||L(t) - Lhat||_(0,-beta-1);
    denom  = ||x(0) - xhat||_(0,1) + ||Lhat||.
    """

    times: np.ndarray
    dev: np.ndarray
    beta: float
    denom: float


def deviation_profile(traj: Trajectory, static_sol: StaticSolution, beta: float,
                      sys: OscillatorSystem) -> DeviationProfile:
    """Weighted deviation of a solved trajectory from the steady quadruple."""
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    weights = np.abs(sys.b) ** (2.0 * (beta + 1.0))
    dxi = traj.xi - static_sol.xhat.xi[None, :]
    deta = traj.eta - static_sol.xhat.eta[None, :]
    dlam = traj.lam - static_sol.lambdahat[None, :]
    dmu = traj.mu - static_sol.muhat[None, :]
    dev_x = np.sqrt(np.sum(weights[None, :] * (dxi**2 + deta**2), axis=1))
    dev_l = np.sqrt(np.sum(weights[None, :] * (dlam**2 + dmu**2), axis=1))
    x0 = StateVector(traj.xi[0], traj.eta[0])
    dx0 = StateVector(x0.xi - static_sol.xhat.xi, x0.eta - static_sol.xhat.eta)
    denom = weighted_norm(dx0, (0.0, 1.0), sys) + float(np.linalg.norm(static_sol.multiplier))
    return DeviationProfile(times=traj.times, dev=dev_x + dev_l, beta=beta, denom=denom)


def envelope_constant(prof: DeviationProfile, T: float) -> float:
    """Smallest C with dev(t) <= C * denom * ((t+1)^-beta + (T-t+1)^-beta) on the grid."""
    if prof.times.size == 0:
        raise ValueError("empty profile")
    bracket = (prof.times + 1.0) ** (-prof.beta) + (T - prof.times + 1.0) ** (-prof.beta)
    if prof.denom == 0.0:
        if np.any(prof.dev > 0.0):
            raise ValueError("zero normalizer with a nonzero profile")
        return 0.0
    return float(np.max(prof.dev / (prof.denom * bracket)))


def fit_decay_exponent(prof: DeviationProfile, window) -> float:
    """Sign-flipped log-log slope of the deviation over (t_lo, t_hi).

    The window must hold at least 10 samples with strictly positive deviation;
    the forward branch of the envelope dominates only on the first half of the
    horizon, so callers should keep t_hi below T/2.
    """
    t_lo, t_hi = float(window[0]), float(window[1])
    mask = (prof.times >= t_lo) & (prof.times <= t_hi)
    if np.count_nonzero(mask) < 10:
        raise ValueError("window holds fewer than 10 samples")
    dev = prof.dev[mask]
    if np.any(dev <= 0.0):
        raise ValueError("nonpositive deviation inside the fit window")
    slope = np.polyfit(np.log(prof.times[mask] + 1.0), np.log(dev), 1)[0]
    return float(-slope)


def modal_decay_constant(quads, beta: float, t_max: float = 1e3, grid_size: int = 400):
    """Per-mode conversion of exponential decay into a polynomial envelope.

    Scans e^(-Re nu_k t) |b_k|^beta (t+1)^beta over [0, t_max] on a geometric
    grid (plus t = 0) and returns (empirical_max, analytic_bounds), where the
    per-mode analytic value e^(Re nu_k - beta) beta^beta (Re nu_k)^-beta |b_k|^beta
    is the exact supremum over t >= 0 and therefore dominates the scan.
    """
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    ts = np.concatenate([[0.0], np.geomspace(1e-3, t_max, grid_size)])
    empirical = 0.0
    analytic = np.empty(len(quads))
    for i, quad in enumerate(quads):
        re_nu = quad.nu.real
        if re_nu <= 0.0:
            raise ValueError("modal decay needs strictly positive Re nu")
        gain_pow = abs(quad.gain) ** beta
        scan = np.exp(-re_nu * ts) * gain_pow * (ts + 1.0) ** beta
        empirical = max(empirical, float(np.max(scan)))
        analytic[i] = math.exp(re_nu - beta) * beta**beta * re_nu ** (-beta) * gain_pow
    return empirical, analytic


def hyperbolic_bound_scan(quads, s_max: float = 1e3, grid_size: int = 400):
    """Uniform bounds on |tanh(nu_k s)| and 1/|cosh(nu_k s)| over (0, s_max].

    Evaluated through e^(-2 nu s), which is bounded on the right half plane, so
    arbitrarily large arguments are safe.
    """
    svals = np.geomspace(1e-6, s_max, grid_size)
    tanh_max = 0.0
    inv_cosh_max = 0.0
    for quad in quads:
        nu = quad.nu
        if nu.real <= 0.0:
            raise ValueError("scan requires Re nu > 0 for every mode")
        z = nu * svals
        e2 = np.exp(-2.0 * z)
        tanh_max = max(tanh_max, float(np.max(np.abs(1.0 - e2) / np.abs(1.0 + e2))))
        inv_cosh = 2.0 * np.exp(-z.real) / np.abs(1.0 + e2)
        inv_cosh_max = max(inv_cosh_max, float(np.max(inv_cosh)))
        # s -> 0 limit of 1/|cosh| is 1, outside the geometric grid
        inv_cosh_max = max(inv_cosh_max, 1.0)
    return tanh_max, inv_cosh_max


def g_matrices(quad):
    """Boundary-to-interior 2x2 propagation factors of one mode.

    Returns (g_plus, g_minus, m_mat, n_mat).  g_plus + g_minus = I and both
    have norm (1 + (Re nu)^2) / (2 |Re nu|), verified before returning.
    """
    nu = quad.nu
    a = nu.real
    if a == 0.0:
        raise NumericsError("degenerate real part")
    bk = quad.gain
    if bk == 0.0:
        raise NumericsError("degenerate gain")
    nu2, nuc2 = nu**2, nu.conjugate() ** 2
    m_mat = np.array([[nuc2 / a, -nu2 / a], [nuc2, nu2]]) / (2.0 * bk)
    n_mat = -np.array([[nu2 / a, -nuc2 / a], [nu2, nuc2]]) / (2.0 * bk)
    g_plus = 0.5 * np.array([[1.0, a], [1.0 / a, 1.0]])
    g_minus = 0.5 * np.array([[1.0, -a], [-1.0 / a, 1.0]])
    expected = (1.0 + a * a) / (2.0 * abs(a))
    for g in (g_plus, g_minus):
        if abs(np.linalg.norm(g, 2) - expected) > 1e-10 * max(1.0, expected):
            raise NumericsError("propagation factor norm identity violated")
    return g_plus, g_minus, m_mat, n_mat


def shooting_ratio(traj: Trajectory, static_sol: StaticSolution,
                   sys: OscillatorSystem) -> float:
    """Boundary deviation against the data size: the empirical horizon-uniform constant.

    ratio = (||D(0)|| + ||D(T)||) / (||x(0)-xhat||_(0,1) + ||lamhat|| + ||muhat||)
    with D the stacked deviation (state and costate) at the endpoints.
    """
    d0 = np.concatenate([traj.xi[0] - static_sol.xhat.xi,
                         traj.eta[0] - static_sol.xhat.eta,
                         traj.lam[0] - static_sol.lambdahat,
                         traj.mu[0] - static_sol.muhat])
    dT = np.concatenate([traj.xi[-1] - static_sol.xhat.xi,
                         traj.eta[-1] - static_sol.xhat.eta,
                         traj.lam[-1] - static_sol.lambdahat,
                         traj.mu[-1] - static_sol.muhat])
    left = float(np.linalg.norm(d0) + np.linalg.norm(dT))
    x0 = StateVector(traj.xi[0], traj.eta[0])
    dx0 = StateVector(x0.xi - static_sol.xhat.xi, x0.eta - static_sol.xhat.eta)
    right = (weighted_norm(dx0, (0.0, 1.0), sys)
             + float(np.linalg.norm(static_sol.lambdahat))
             + float(np.linalg.norm(static_sol.muhat)))
    if right == 0.0:
        if left > 0.0:
            raise ValueError("zero data with nonzero boundary deviation")
        return 0.0
    return left / right
