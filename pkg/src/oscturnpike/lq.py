"""Finite-horizon tracking problem on the truncation, solved two independent ways.

The optimality system couples state x and costate L = (lam, mu) through

    x' = A x + B (ubar + B^T L),       x(0) = x0,
    L' = A L + x - xbar,               L(T) = 0,

with A the block rotation generator and B = (0; b).  `solve_riccati_oracle`
integrates the backward matrix Riccati flow plus a feedforward vector and closes
the loop forward; `solve_bvp_spectral` splits the 4N x 4N deviation generator
into stable and unstable eigenspaces and solves one well-conditioned boundary
system, never forming a growing exponential.  Their agreement is the primary
cross-check of both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eig as dense_eig

from .exceptions import NumericsError
from .model import OscillatorSystem, StateVector
from .static_opt import StaticSolution, TargetSpec

_GL5_NODES, _GL5_WEIGHTS = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class HorizonSpec:
    """Horizon length, initial state, and output grid (uniform unless given)."""

    T: float
    x0: StateVector
    times: np.ndarray = None
    samples: int = 2001

    def __post_init__(self):
        if self.T <= 0.0:
            raise ValueError("horizon must be positive")
        if self.times is None:
            object.__setattr__(self, "times", np.linspace(0.0, self.T, self.samples))
        else:
            times = np.asarray(self.times, dtype=float)
            if times.size < 2 or np.any(np.diff(times) <= 0.0):
                raise ValueError("time grid must be strictly increasing with >= 2 points")
            if abs(times[0]) > 1e-12 or abs(times[-1] - self.T) > 1e-12 * max(1.0, self.T):
                raise ValueError("time grid must span [0, T]")
            object.__setattr__(self, "times", times)
            object.__setattr__(self, "samples", times.size)


@dataclass(frozen=True)
class Trajectory:
    """Sampled state, costate and control of one solve.

    Arrays are (samples, N) for the blocks and (samples,) for the control; the
    control satisfies u = ubar + b . mu exactly at every sample by construction.
    """

    times: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    u: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return self.xi.shape[1]

    def state_at(self, i: int) -> StateVector:
        return StateVector(self.xi[i], self.eta[i])


def assemble_generator(sys: OscillatorSystem) -> np.ndarray:
    """Dense 4N x 4N deviation generator.

    Row blocks (dxi, deta, dlam, dmu):
        [ 0   W   0   0  ]
        [-W   0   0  bb^T]
        [ I   0   0   W  ]
        [ 0   I  -W   0  ]
    """
    n = sys.n
    w = sys.omega
    mat = np.zeros((4 * n, 4 * n))
    idx = np.arange(n)
    mat[idx, n + idx] = w
    mat[n + idx, idx] = -w
    mat[n + idx[:, None], 3 * n + idx[None, :]] = np.outer(sys.b, sys.b)
    mat[2 * n + idx, idx] = 1.0
    mat[2 * n + idx, 3 * n + idx] = w
    mat[3 * n + idx, n + idx] = 1.0
    mat[3 * n + idx, 2 * n + idx] = -w
    return mat


def _apply_rot(w: np.ndarray, vec_or_mat):
    """A @ v for the 2N rotation generator A = [[0, W], [-W, 0]], no dense matrix."""
    n = w.size
    top = w[:, None] * vec_or_mat[n:] if vec_or_mat.ndim == 2 else w * vec_or_mat[n:]
    bot = -w[:, None] * vec_or_mat[:n] if vec_or_mat.ndim == 2 else -w * vec_or_mat[:n]
    return np.concatenate([top, bot])


def _apply_rot_right(w: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """M @ A for the same rotation generator."""
    n = w.size
    return np.hstack([-mat[:, n:] * w[None, :], mat[:, :n] * w[None, :]])


# ---------------------------------------------------------------------------
# Riccati oracle
# ---------------------------------------------------------------------------

def solve_riccati_oracle(sys: OscillatorSystem, target: TargetSpec, hs: HorizonSpec,
                         static_sol: StaticSolution, rtol: float = 1e-9,
                         atol: float = 1e-12) -> Trajectory:
    """Backward Riccati sweep plus feedforward, then the closed loop forward.

    Writing L - Lhat = M (x - xhat) + m with M(T) = 0, m(T) = -Lhat gives

        M' = A M - M A - M B B^T M + I,
        m' = (A - M B B^T) m,
        dx' = (A + B B^T M) dx + B B^T m,   dx(0) = x0 - xhat.

    Integrated with an 8th-order adaptive explicit pair; the high mode
    frequencies make lower-order pairs impractical at this tolerance.
    """
    n = sys.n
    w = sys.omega
    bvec = np.concatenate([np.zeros(n), sys.b])
    dim = 2 * n
    eye = np.eye(dim)
    lhat = static_sol.multiplier
    t_grid = hs.times

    def backward_rhs(_t, y):
        m_mat = y[:dim * dim].reshape(dim, dim)
        m_vec = y[dim * dim:]
        mb = m_mat @ bvec
        d_mat = (_apply_rot(w, m_mat) - _apply_rot_right(w, m_mat)
                 - np.outer(mb, bvec @ m_mat) + eye)
        d_vec = _apply_rot(w, m_vec) - mb * (bvec @ m_vec)
        return np.concatenate([d_mat.ravel(), d_vec])

    y_terminal = np.concatenate([np.zeros(dim * dim), -lhat])
    back = solve_ivp(backward_rhs, (hs.T, 0.0), y_terminal, method="DOP853",
                     dense_output=True, rtol=rtol, atol=atol)
    if back.status != 0:
        raise NumericsError(f"backward Riccati sweep failed: {back.message}")

    def forward_rhs(t, dx):
        y = back.sol(t)
        m_mat = y[:dim * dim].reshape(dim, dim)
        m_vec = y[dim * dim:]
        feedback = bvec @ (m_mat @ dx + m_vec)
        return _apply_rot(w, dx) + bvec * feedback

    dx0 = hs.x0.stacked - static_sol.xhat.stacked
    fwd = solve_ivp(forward_rhs, (0.0, hs.T), dx0, method="DOP853",
                    t_eval=t_grid, rtol=rtol, atol=atol)
    if fwd.status != 0:
        raise NumericsError(f"closed-loop forward sweep failed: {fwd.message}")

    dx = fwd.y.T  # (samples, 2N)
    y_grid = back.sol(t_grid)
    lam_mu = np.empty_like(dx)
    for i in range(t_grid.size):
        m_mat = y_grid[:dim * dim, i].reshape(dim, dim)
        lam_mu[i] = lhat + m_mat @ dx[i] + y_grid[dim * dim:, i]
    x = static_sol.xhat.stacked[None, :] + dx
    u = target.ubar + lam_mu[:, n:] @ sys.b
    return Trajectory(times=t_grid, xi=x[:, :n], eta=x[:, n:],
                      lam=lam_mu[:, :n], mu=lam_mu[:, n:], u=u,
                      meta={"solver": "riccati", "backward_steps": back.t.size,
                            "forward_steps": fwd.t.size})


# ---------------------------------------------------------------------------
# Spectral dichotomy solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DichotomyRep:
    """Closed-form deviation representation from the stable/unstable splitting.

    delta(t) = Phi_s exp(Lam_s t) c_s + Phi_u exp(Lam_u (t - T)) c_u; every
    exponential argument has nonpositive real part on [0, T].
    """

    phi_s: np.ndarray
    lam_s: np.ndarray
    c_s: np.ndarray
    phi_u: np.ndarray
    lam_u: np.ndarray
    c_u: np.ndarray
    T: float

    def delta_at(self, ts) -> np.ndarray:
        """Deviation matrix of shape (4N, len(ts)); complex, imaginary part is noise."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        es = np.exp(self.lam_s[:, None] * ts[None, :]) * self.c_s[:, None]
        eu = np.exp(self.lam_u[:, None] * (ts[None, :] - self.T)) * self.c_u[:, None]
        return self.phi_s @ es + self.phi_u @ eu


def _mode_assignment(eigvals: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Nearest-center mode index (0-based) for each eigenvalue."""
    dist = np.minimum(np.abs(eigvals[:, None] - 1j * omega[None, :]),
                      np.abs(eigvals[:, None] + 1j * omega[None, :]))
    return np.argmin(dist, axis=1)


def solve_bvp_spectral(sys: OscillatorSystem, target: TargetSpec, hs: HorizonSpec,
                       static_sol: StaticSolution, imag_tol: float = 1e-8,
                       cond_warn: float = 1e12) -> Trajectory:
    """Two-point solve via the hyperbolic splitting of the deviation generator.

    Imposes dx(0) = x0 - xhat on the state block and dL(T) = -Lhat on the
    costate block; the boundary matrix only ever contains decayed exponentials,
    so its conditioning does not degrade as T grows.
    """
    n = sys.n
    gen = assemble_generator(sys)
    vals, vecs = dense_eig(gen)
    stable = vals.real < 0.0
    unstable = vals.real > 0.0
    if stable.sum() != 2 * n or unstable.sum() != 2 * n:
        raise NumericsError(
            f"hyperbolic splitting violated: {int(stable.sum())} stable / "
            f"{int(unstable.sum())} unstable eigenvalues (expected {2 * n} each)")
    phi_s, lam_s = vecs[:, stable], vals[stable]
    phi_u, lam_u = vecs[:, unstable], vals[unstable]
    phi_s = phi_s / np.linalg.norm(phi_s, axis=0, keepdims=True)
    phi_u = phi_u / np.linalg.norm(phi_u, axis=0, keepdims=True)

    T = hs.T
    decay_u = np.exp(-lam_u * T)   # |.| <= 1
    decay_s = np.exp(lam_s * T)    # |.| <= 1
    top = np.hstack([phi_s[:2 * n, :], phi_u[:2 * n, :] * decay_u[None, :]])
    bot = np.hstack([phi_s[2 * n:, :] * decay_s[None, :], phi_u[2 * n:, :]])
    boundary = np.vstack([top, bot])
    rhs = np.concatenate([hs.x0.stacked - static_sol.xhat.stacked,
                          -static_sol.multiplier])
    cond = float(np.linalg.cond(boundary))
    meta = {"solver": "dichotomy", "boundary_condition_number": cond,
            "stable_count": int(stable.sum()), "unstable_count": int(unstable.sum())}
    if cond > cond_warn:
        meta["conditioning_warning"] = True
    coeff = np.linalg.solve(boundary, rhs.astype(complex))
    c_s, c_u = coeff[:2 * n], coeff[2 * n:]

    # Diagnostic: how much of the boundary operator lives outside per-mode blocks.
    modes_cols = np.concatenate([_mode_assignment(lam_s, sys.omega),
                                 _mode_assignment(lam_u, sys.omega)])
    row_modes = np.tile(np.arange(n), 4)
    total = np.sum(np.abs(boundary) ** 2)
    diag_mass = sum(
        np.sum(np.abs(boundary[np.ix_(row_modes == m, modes_cols == m)]) ** 2)
        for m in range(n))
    meta["offblock_mass"] = float(math.sqrt(max(total - diag_mass, 0.0) / total))

    rep = DichotomyRep(phi_s=phi_s, lam_s=lam_s, c_s=c_s,
                       phi_u=phi_u, lam_u=lam_u, c_u=c_u, T=T)
    delta = rep.delta_at(hs.times)
    scale = max(float(np.max(np.abs(delta))), 1e-300)
    imag_max = float(np.max(np.abs(delta.imag)))
    if imag_max > imag_tol * scale:
        raise NumericsError(f"imaginary residue {imag_max:.3g} above tolerance")
    delta = delta.real
    meta["imag_residue"] = imag_max / scale
    meta["rep"] = rep

    x = static_sol.xhat.stacked[:, None] + delta[:2 * n]
    lam_mu = static_sol.multiplier[:, None] + delta[2 * n:]
    u = target.ubar + sys.b @ lam_mu[n:]
    return Trajectory(times=hs.times, xi=x[:n].T, eta=x[n:].T,
                      lam=lam_mu[:n].T, mu=lam_mu[n:].T, u=u, meta=meta)


# ---------------------------------------------------------------------------
# Residuals and costs
# ---------------------------------------------------------------------------

_FD6 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0


def _fd6_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Sixth-order interior first derivative along axis 0; edge rows are dropped."""
    out = np.zeros((values.shape[0] - 6,) + values.shape[1:])
    for j, c in enumerate(_FD6):
        if c != 0.0:
            out += c * values[j:j + out.shape[0]]
    return out / h


def pmp_residual(traj: Trajectory, sys: OscillatorSystem, target: TargetSpec):
    """Scaled sup defect of the optimality system along the sampled trajectory.

    Differentiates the samples with sixth-order central differences (uniform
    grid required) and checks the state equation, the adjoint equation, the
    feedback law and the terminal costate.  Returns (residual, info); info
    carries the grid step and a finite-difference error estimate, which bounds
    what the check can resolve.
    """
    t = traj.times
    h = t[1] - t[0]
    if np.max(np.abs(np.diff(t) - h)) > 1e-9 * h:
        raise ValueError("residual check requires a uniform grid")
    if t.size < 9:
        raise ValueError("grid too coarse for the difference stencil")
    n = sys.n
    w, b = sys.omega, sys.b
    x = np.hstack([traj.xi, traj.eta])          # (M, 2N)
    lm = np.hstack([traj.lam, traj.mu])
    sl = slice(3, t.size - 3)

    dx = _fd6_derivative(x, h)
    dlm = _fd6_derivative(lm, h)
    ax = np.hstack([w * x[sl, n:], -w * x[sl, :n]])
    alm = np.hstack([w * lm[sl, n:], -w * lm[sl, :n]])
    bu = np.concatenate([np.zeros(n), b])[None, :] * traj.u[sl, None]
    xbar = target.xbar.stacked

    state_defect = np.max(np.linalg.norm(dx - ax - bu, axis=1))
    adjoint_defect = np.max(np.linalg.norm(dlm - alm - (x[sl] - xbar[None, :]), axis=1))
    control_defect = np.max(np.abs(traj.u - target.ubar - traj.mu @ b))
    terminal_defect = np.linalg.norm(lm[-1])

    scale = 1.0 + max(np.max(np.linalg.norm(x, axis=1)),
                      np.max(np.linalg.norm(lm, axis=1)),
                      np.max(np.abs(traj.u)),
                      float(np.linalg.norm(xbar)), abs(target.ubar))
    residual = max(state_defect, adjoint_defect, control_defect, terminal_defect) / scale
    info = {
        "h": float(h),
        "state": state_defect / scale, "adjoint": adjoint_defect / scale,
        "control": control_defect / scale, "terminal": terminal_defect / scale,
        # leading stencil truncation term (w h)^6 / 140 per unit amplitude
        "fd_error_estimate": float((np.max(w) * h) ** 6 / 140.0),
    }
    return float(residual), info


def dynamic_cost(traj: Trajectory, target: TargetSpec) -> float:
    """Trapezoidal running cost of the sampled trajectory."""
    dx = traj.xi - target.xbar.xi[None, :]
    de = traj.eta - target.xbar.eta[None, :]
    integrand = np.sum(dx**2 + de**2, axis=1) + (traj.u - target.ubar) ** 2
    return float(np.trapezoid(integrand, traj.times))


# ---------------------------------------------------------------------------
# Exact propagation of sampled controls (competitors / perturbations)
# ---------------------------------------------------------------------------

def _step_convolution(w: np.ndarray, tau: np.ndarray, u0: float, du_dt: float):
    """int_0^tau e^{i w s} (u0 + du_dt * s) ds, elementwise over modes x taus.

    e^{i x} - 1 is formed as -2 sin^2(x/2) + i sin(x) to keep small arguments
    exact.
    """
    x = w[:, None] * tau[None, :]
    em1 = -2.0 * np.sin(x / 2.0) ** 2 + 1j * np.sin(x)
    i0 = em1 / (1j * w[:, None])
    i1 = tau[None, :] * (em1 + 1.0) / (1j * w[:, None]) + em1 / (w[:, None] ** 2)
    return u0 * i0 + du_dt * i1


def propagate_control(sys: OscillatorSystem, x0: StateVector, times: np.ndarray,
                      u: np.ndarray) -> np.ndarray:
    """States (samples, 2N) under the piecewise-linear control, mode-exact.

    Each mode obeys W' = -i w W + i b u with W = xi + i eta; the step update is
    the exact rotation plus the closed-form convolution of a linear segment.
    """
    times = np.asarray(times, dtype=float)
    u = np.asarray(u, dtype=float)
    w_arr = sys.omega
    wc = x0.xi.astype(complex) + 1j * x0.eta
    out = np.empty((times.size, 2 * sys.n))
    out[0] = np.concatenate([wc.real, wc.imag])
    for i in range(times.size - 1):
        h = times[i + 1] - times[i]
        du_dt = (u[i + 1] - u[i]) / h
        conv = _step_convolution(w_arr, np.array([h]), u[i], du_dt)[:, 0]
        wc = np.exp(-1j * w_arr * h) * (wc + 1j * sys.b * conv)
        out[i + 1] = np.concatenate([wc.real, wc.imag])
    return out


def control_cost(sys: OscillatorSystem, target: TargetSpec, x0: StateVector,
                 times: np.ndarray, u: np.ndarray) -> float:
    """Running cost of a piecewise-linear control, Gauss-quadrature accurate.

    The state inside each step is evaluated in closed form at five Legendre
    nodes, so the only approximation is the piecewise-linear control itself.
    """
    times = np.asarray(times, dtype=float)
    u = np.asarray(u, dtype=float)
    w_arr = sys.omega
    xbar_c = target.xbar.xi.astype(complex) + 1j * target.xbar.eta
    wc = x0.xi.astype(complex) + 1j * x0.eta
    total = 0.0
    for i in range(times.size - 1):
        h = times[i + 1] - times[i]
        tau = 0.5 * h * (_GL5_NODES + 1.0)
        wts = 0.5 * h * _GL5_WEIGHTS
        du_dt = (u[i + 1] - u[i]) / h
        conv = _step_convolution(w_arr, tau, u[i], du_dt)
        states = np.exp(-1j * np.outer(w_arr, tau)) * (wc[:, None] + 1j * sys.b[:, None] * conv)
        dev2 = np.sum(np.abs(states - xbar_c[:, None]) ** 2, axis=0)
        u_tau = u[i] + du_dt * tau
        total += float(np.dot(wts, dev2 + (u_tau - target.ubar) ** 2))
        conv_h = _step_convolution(w_arr, np.array([h]), u[i], du_dt)[:, 0]
        wc = np.exp(-1j * w_arr * h) * (wc + 1j * sys.b * conv_h)
    return total


def perturbation_expansion(sys: OscillatorSystem, target: TargetSpec, hs: HorizonSpec,
                           static_sol: StaticSolution, rep: DichotomyRep,
                           v: np.ndarray):
    """Exact quadratic expansion of the cost around the dichotomy solution.

    For the direction v (piecewise linear on the grid, zero-state response y),
    J(u* + eps v) = J* + eps * linear + eps^2 * quadratic with

        linear    = 2 int (x* - xbar) . y + (u* - ubar) v dt,
        quadratic = int ||y||^2 + v^2 dt.

    x* and u* come from the closed-form representation, y from exact modal
    propagation, the integrals from five-node Gauss panels per step; `linear`
    vanishing is first-order optimality of the computed solution.
    """
    times = hs.times
    v = np.asarray(v, dtype=float)
    n = sys.n
    w_arr = sys.omega
    xbar_c = target.xbar.xi.astype(complex) + 1j * target.xbar.eta
    xhat = static_sol.xhat.stacked
    lhat = static_sol.multiplier
    yc = np.zeros(n, dtype=complex)
    j_star = 0.0
    linear = 0.0
    quadratic = 0.0
    for i in range(times.size - 1):
        h = times[i + 1] - times[i]
        tau = 0.5 * h * (_GL5_NODES + 1.0)
        wts = 0.5 * h * _GL5_WEIGHTS
        delta = rep.delta_at(times[i] + tau).real
        x_star = xhat[:, None] + delta[:2 * n]
        mu_star = lhat[n:, None] + delta[3 * n:]
        u_star = target.ubar + sys.b @ mu_star
        x_star_c = x_star[:n] + 1j * x_star[n:]
        dv_dt = (v[i + 1] - v[i]) / h
        conv = _step_convolution(w_arr, tau, v[i], dv_dt)
        y_tau = np.exp(-1j * np.outer(w_arr, tau)) * (yc[:, None] + 1j * sys.b[:, None] * conv)
        v_tau = v[i] + dv_dt * tau

        dev = x_star_c - xbar_c[:, None]
        j_star += float(np.dot(wts, np.sum(np.abs(dev) ** 2, axis=0)
                               + (u_star - target.ubar) ** 2))
        cross = np.sum(dev.real * y_tau.real + dev.imag * y_tau.imag, axis=0)
        linear += 2.0 * float(np.dot(wts, cross + (u_star - target.ubar) * v_tau))
        quadratic += float(np.dot(wts, np.sum(np.abs(y_tau) ** 2, axis=0) + v_tau**2))

        conv_h = _step_convolution(w_arr, np.array([h]), v[i], dv_dt)[:, 0]
        yc = np.exp(-1j * w_arr * h) * (yc + 1j * sys.b * conv_h)
    return j_star, linear, quadratic
