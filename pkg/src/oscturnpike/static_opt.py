"""Closed-form steady optimizer: best stationary (state, control) pair for a target.

Among all pairs with zero drift (eta = 0, omega_k xi_k = b_k u) the quadratic
distance to the target (xbar, ubar) has a unique minimizer with an explicit
multiplier pair; everything below is direct evaluation of those formulas on the
truncation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import OscillatorSystem, StateVector


@dataclass(frozen=True)
class TargetSpec:
    """Target state xbar and target control level ubar."""

    xbar: StateVector
    ubar: float


@dataclass(frozen=True)
class StaticSolution:
    """Steady optimal quadruple: state (xhat), control (uhat), multipliers (lam, mu)."""

    xhat: StateVector
    uhat: float
    lambdahat: np.ndarray
    muhat: np.ndarray

    @property
    def multiplier(self) -> np.ndarray:
        """Stacked multiplier (lambdahat, muhat) as a 2N vector."""
        return np.concatenate([self.lambdahat, self.muhat])


def solve_static(target: TargetSpec, sys: OscillatorSystem) -> StaticSolution:
    """Minimize ||x - xbar||^2 + |u - ubar|^2 over steady pairs of the truncation."""
    if target.xbar.n != sys.n:
        raise ValueError("target dimension does not match the system")
    omega, b = sys.omega, sys.b
    xi_bar, eta_bar = target.xbar.xi, target.xbar.eta
    gain = np.sum(b**2 / omega**2)
    uhat = (target.ubar + np.sum(b * xi_bar / omega)) / (1.0 + gain)
    xi_hat = b * uhat / omega
    muhat = (xi_bar - xi_hat) / omega
    lambdahat = -eta_bar / omega
    return StaticSolution(
        xhat=StateVector(xi_hat, np.zeros(sys.n)),
        uhat=float(uhat),
        lambdahat=lambdahat,
        muhat=muhat,
    )


def static_cost(sol: StaticSolution, target: TargetSpec) -> float:
    """Quadratic deviation ||xhat - xbar||^2 + |uhat - ubar|^2."""
    if sol.xhat.n != target.xbar.n:
        raise ValueError("dimension mismatch")
    dx = sol.xhat.xi - target.xbar.xi
    de = sol.xhat.eta - target.xbar.eta
    return float(np.sum(dx**2 + de**2) + (sol.uhat - target.ubar) ** 2)


def steady_cost(u: float, target: TargetSpec, sys: OscillatorSystem) -> float:
    """Cost of the steady pair driven by an arbitrary control level u."""
    xi = sys.b * u / sys.omega
    dx = xi - target.xbar.xi
    return float(np.sum(dx**2 + target.xbar.eta**2) + (u - target.ubar) ** 2)
