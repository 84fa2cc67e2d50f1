"""Rotating cantilever beam: clamped-free modal data feeding the oscillator chain.

A uniform beam of length l clamped to a hub of radius d, driven by the hub's
angular acceleration, decomposes into clamped-free bending modes.  Mode n
contributes an oscillator with frequency omega_n = c * delta_n^2 / l^2 and gain
b_n, where delta_n is the n-th root of 1 + cos(delta) cosh(delta) = 0.  All
exponentials are evaluated in decayed form, so the data stays finite for mode
indices far beyond the overflow threshold of cosh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import NumericsError
from .model import OscillatorSystem

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)

# Beyond this index sech(delta_n) is below resolvable size and the root equals
# the cosine zero pi(2n-1)/2 to machine precision.
_ASYMPTOTE_MIN_INDEX = 31


@dataclass(frozen=True)
class BeamParams:
    """Stiffness ratio c = sqrt(EI/rho), beam length l, hub radius d."""

    c: float = 1.0
    l: float = 1.0
    d: float = 1.0

    def __post_init__(self):
        if min(self.c, self.l, self.d) <= 0.0:
            raise ValueError("beam parameters must be strictly positive")


@dataclass(frozen=True)
class BeamMode:
    """Root delta_n, shape coefficient gamma_n, oscillator data (omega_n, b_n)."""

    n: int
    delta: float
    gamma: float
    omega: float
    b: float
    norm_const: float


def _scaled_residual(delta):
    """cos(delta) + sech(delta): the frequency equation divided by cosh(delta)."""
    delta = np.asarray(delta, dtype=float)
    sech = 2.0 * np.exp(-delta) / (1.0 + np.exp(-2.0 * delta))
    return np.cos(delta) + sech


def _scaled_residual_deriv(delta: float) -> float:
    sech = 2.0 * math.exp(-delta) / (1.0 + math.exp(-2.0 * delta))
    tanh = math.tanh(delta)
    return -math.sin(delta) - sech * tanh


@lru_cache(maxsize=None)
def solve_delta(n: int) -> float:
    """n-th positive root of 1 + cos(delta) cosh(delta) = 0.

    Bisection on the bracket pi(2n-1)/2 +- 1 followed by Newton polish on the
    scaled form; for large n the root collapses onto the cosine zero and the
    asymptote is returned directly once its residual is below resolution.
    """
    if n < 1:
        raise ValueError("mode index must be >= 1")
    center = math.pi * (2 * n - 1) / 2.0

    if n >= _ASYMPTOTE_MIN_INDEX and abs(_scaled_residual(center)) < 1e-14:
        return center

    lo, hi = center - 1.0, center + 1.0
    flo, fhi = float(_scaled_residual(lo)), float(_scaled_residual(hi))
    if flo * fhi > 0.0:
        raise NumericsError(f"no sign change in the bracket for mode {n}")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fmid = float(_scaled_residual(mid))
        if flo * fmid <= 0.0:
            hi, fhi = mid, fmid
        else:
            lo, flo = mid, fmid
        if hi - lo < 1e-9:
            break

    delta = 0.5 * (lo + hi)
    for _ in range(30):
        f = float(_scaled_residual(delta))
        if f == 0.0:
            break
        step = f / _scaled_residual_deriv(delta)
        delta -= step
        if abs(step) < 1e-15 * delta:
            break
    if abs(_scaled_residual(delta)) > 1e-12:
        raise NumericsError(f"frequency equation residual too large for mode {n}")
    return float(delta)


def _gamma(delta: float) -> float:
    """Shape coefficient -(e^d - sin d + cos d)/(e^d + sin d + cos d), decayed form."""
    e = math.exp(-delta)
    s, c = math.sin(delta), math.cos(delta)
    return -(1.0 - (s - c) * e) / (1.0 + (s + c) * e)


def mode_shape(n: int, x):
    """Clamped-free shape phi_n on the unit interval, safe for any mode index.

    The growing exponential is folded into e^(delta (x-1)) via
    (1+gamma)/2 = sin(delta) / (e^delta + sin(delta) + cos(delta)), so values
    stay O(1) where the naive expression overflows (delta_40 ~ 124).
    """
    x = np.asarray(x, dtype=float)
    delta = solve_delta(n)
    gamma = _gamma(delta)
    e = math.exp(-delta)
    s, c = math.sin(delta), math.cos(delta)
    denom = 1.0 + (s + c) * e
    grow = -s / denom * np.exp(delta * (x - 1.0))
    decay = -(1.0 + c * e) / denom * np.exp(-delta * x)
    return grow + decay + gamma * np.sin(delta * x) + np.cos(delta * x)


def _integrate01(f, oscillation: float) -> float:
    """Composite 64-node Gauss-Legendre integral of f over [0, 1].

    One panel per half-period of the fastest oscillation present.
    """
    panels = max(1, math.ceil(oscillation / math.pi))
    edges = np.linspace(0.0, 1.0, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return float(np.dot(weights, f(nodes)))


def phi_l2_norm(n: int) -> float:
    """L2(0,1) norm of the unit-interval shape phi_n."""
    delta = solve_delta(n)
    return math.sqrt(_integrate01(lambda x: mode_shape(n, x) ** 2, delta))


@lru_cache(maxsize=None)
def mode_data(n: int, params: BeamParams = BeamParams()) -> BeamMode:
    """Assemble the oscillator data of mode n.

    The normalization constant k_n = 1/(sqrt(l) ||phi_n||) is taken positive,
    which makes b_n = 2 l k_n delta_n^-1 (l delta_n^-1 - d gamma_n) positive
    since gamma_n < 0.
    """
    delta = solve_delta(n)
    gamma = _gamma(delta)
    norm = phi_l2_norm(n)
    k_n = 1.0 / (math.sqrt(params.l) * norm)
    omega = params.c * delta**2 / params.l**2
    b = 2.0 * params.l * k_n / delta * (params.l / delta - params.d * gamma)
    if b <= 0.0:
        k_n, b = -k_n, -b
    return BeamMode(n=n, delta=delta, gamma=gamma, omega=omega, b=b, norm_const=k_n)


def mode_table(n_max: int, params: BeamParams = BeamParams()):
    """Modes 1..n_max as a list."""
    return [mode_data(n, params) for n in range(1, n_max + 1)]


def build_system(n_max: int, params: BeamParams = BeamParams()) -> OscillatorSystem:
    """Oscillator chain of the first n_max beam modes."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    modes = mode_table(n_max, params)
    omega = np.array([m.omega for m in modes])
    b = np.array([m.b for m in modes])
    return OscillatorSystem(omega, b)
