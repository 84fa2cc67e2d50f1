"""Command-line front end: wires JSON configs to the solvers and writes reports.

Subcommands: spectrum, static, solve, turnpike, beam, check.  Every command
writes deterministic CSV/JSON into the output directory (floats at 17
significant digits, config hash in a header comment) and renders the matching
figures as PNG files alongside.  Exit codes: 0 success, 1 configuration or I/O
error, 2 solver failure or a quantitative check missing its threshold.
"""

from __future__ import annotations

import argparse
import sys as _sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import beam as beam_mod
from . import figures, reporting
from .config import (config_hash, horizon_from_config, load_config,
                     merge_config, system_from_config, target_from_config)
from .exceptions import ConfigError, NumericsError
from .lq import HorizonSpec, dynamic_cost, pmp_residual, solve_bvp_spectral, solve_riccati_oracle
from .model import check_assumptions, min_control_time
from .spectral import rouche_certificate, spectrum
from .static_opt import solve_static, static_cost
from .turnpike import (deviation_profile, envelope_constant, fit_decay_exponent,
                       shooting_ratio)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> dict:
    cfg = load_config(args.config) if args.config else merge_config(None)
    if getattr(args, "n", None):
        values = args.n if isinstance(args.n, list) else [args.n]
        if len(values) == 1:
            cfg["system"]["N"] = int(values[0])
        cfg["sweep"]["n_values"] = [int(v) for v in values]
    if getattr(args, "horizon", None):
        values = args.horizon
        if len(values) == 1:
            cfg["horizon"]["T"] = float(values[0])
        cfg["sweep"]["t_values"] = [float(v) for v in values]
    if getattr(args, "beta", None):
        cfg["beta"] = [float(b) for b in args.beta]
    if getattr(args, "rho", None) is not None:
        cfg["rho"] = float(args.rho)
    if getattr(args, "alpha", None) is not None:
        cfg["alpha"] = float(args.alpha)
    if getattr(args, "tol", None) is not None:
        cfg["tolerances"]["newton"] = float(args.tol)
        cfg["tolerances"]["ivp_rtol"] = float(args.tol)
    if getattr(args, "window", None):
        lo, _, hi = args.window.partition(":")
        try:
            cfg["fit_window"] = [float(lo), float(hi)]
        except ValueError as exc:
            raise ConfigError(f"bad --window {args.window!r}: expected LO:HI") from exc
    return cfg


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

def cmd_spectrum(cfg: dict, args) -> int:
    out = _outdir(args)
    system = system_from_config(cfg)
    tag = f"hash={config_hash(cfg)} N={system.n}"
    try:
        quads = spectrum(system, tol=cfg["tolerances"]["newton"])
    except NumericsError as exc:
        print(f"spectrum failed: {exc}", file=_sys.stderr)
        return EXIT_SOLVER
    certs = [rouche_certificate(q.k, cfg["kappa"], system) for q in quads]
    cert_flag = [1 if c.holds else (0 if c.applicable else -1) for c in certs]

    reporting.write_csv(out / "spectrum.csv", {
        "k": [q.k for q in quads],
        "re_sigma_plus": [q.sigma_plus.real for q in quads],
        "im_sigma_plus": [q.sigma_plus.imag for q in quads],
        "re_sigma_minus": [q.sigma_minus.real for q in quads],
        "im_sigma_minus": [q.sigma_minus.imag for q in quads],
        "lambda0": [q.lambda0 for q in quads],
        "abs_eps": [abs(q.eps) for q in quads],
        "certificate": cert_flag,
        "residual": [q.residual for q in quads],
    }, header_comment=tag)
    reporting.write_csv(out / "certificates.csv", {
        "k": [c.k for c in certs],
        "applicable": [1 if c.applicable else 0 for c in certs],
        "holds": [1 if c.holds else 0 for c in certs],
        "s1": [c.s1 for c in certs],
        "s2": [c.s2 for c in certs],
        "s3": [c.s3 for c in certs],
        "x": [c.x for c in certs],
        "r_star": [c.r_star for c in certs],
        "r_sub": [c.r_sub for c in certs],
        "threshold": [c.threshold for c in certs],
    }, header_comment=tag)

    summary = {
        "config_hash": config_hash(cfg),
        "N": system.n,
        "residual_max": max(q.residual for q in quads),
        "eps_within_half_all_modes": all(q.eps_within_half for q in quads),
        "certificates_holding": sum(cert_flag_i == 1 for cert_flag_i in cert_flag),
        "ball_radius": system.b_norm,
        "min_control_time": min_control_time(system),
    }
    reporting.write_json(out / "spectrum.json", summary)
    figures.spectrum_figure(quads, system, out / "spectrum.png")
    if args.json:
        print(reporting.json_text(summary))
    else:
        print(f"spectrum: {system.n} modes, max residual {summary['residual_max']:.3e}, "
              f"{summary['certificates_holding']} certificates hold")
    return EXIT_OK


# ---------------------------------------------------------------------------
# static
# ---------------------------------------------------------------------------

def cmd_static(cfg: dict, args) -> int:
    out = _outdir(args)
    system = system_from_config(cfg)
    target = target_from_config(cfg, system.n)
    sol = solve_static(target, system)
    tag = f"hash={config_hash(cfg)} u_hat={reporting.fmt(sol.uhat)}"
    reporting.write_csv(out / "static_solution.csv", {
        "k": list(range(1, system.n + 1)),
        "xi_hat": sol.xhat.xi,
        "eta_hat": sol.xhat.eta,
        "lambda_hat": sol.lambdahat,
        "mu_hat": sol.muhat,
    }, header_comment=tag)
    summary = {
        "config_hash": config_hash(cfg),
        "u_hat": sol.uhat,
        "cost": static_cost(sol, target),
        "multiplier_norm": float(np.linalg.norm(sol.multiplier)),
    }
    reporting.write_json(out / "static_solution.json", summary)
    if args.json:
        print(reporting.json_text(summary))
    else:
        print(f"static: u_hat={sol.uhat:.12g}, cost={summary['cost']:.12g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def cmd_solve(cfg: dict, args) -> int:
    out = _outdir(args)
    system = system_from_config(cfg)
    target = target_from_config(cfg, system.n)
    hs = horizon_from_config(cfg, system.n)
    static_sol = solve_static(target, system)
    try:
        traj = solve_bvp_spectral(system, target, hs, static_sol)
    except NumericsError as exc:
        print(f"solve failed: {exc}", file=_sys.stderr)
        return EXIT_SOLVER
    residual, res_info = pmp_residual(traj, system, target)
    tag = f"hash={config_hash(cfg)} N={system.n} T={hs.T:g}"

    columns = {"t": traj.times}
    for i in range(system.n):
        columns[f"xi_{i + 1}"] = traj.xi[:, i]
    for i in range(system.n):
        columns[f"eta_{i + 1}"] = traj.eta[:, i]
    for i in range(system.n):
        columns[f"lam_{i + 1}"] = traj.lam[:, i]
    for i in range(system.n):
        columns[f"mu_{i + 1}"] = traj.mu[:, i]
    columns["u"] = traj.u
    reporting.write_csv(out / "trajectory.csv", columns, header_comment=tag)

    summary = {
        "config_hash": config_hash(cfg),
        "N": system.n,
        "T": hs.T,
        "cost": dynamic_cost(traj, target),
        "pmp_residual": residual,
        "pmp_residual_detail": res_info,
        "boundary_condition_number": traj.meta.get("boundary_condition_number"),
        "offblock_mass": traj.meta.get("offblock_mass"),
    }
    reporting.write_json(out / "solution.json", summary)
    figures.solution_figure(traj, static_sol, out / "solution.png")
    if args.json:
        print(reporting.json_text(summary))
    else:
        note = ""
        if res_info["fd_error_estimate"] > residual:
            note = " (below difference-stencil resolution on this grid)"
        print(f"solve: cost={summary['cost']:.9g}, pmp residual={residual:.3e}{note}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# turnpike sweep
# ---------------------------------------------------------------------------

def _sweep_system(cfg: dict, n: int):
    sys_cfg = cfg["system"]
    if "omega" in sys_cfg and sys_cfg["omega"] is not None:
        full = system_from_config(cfg)
        if n > full.n:
            raise ConfigError(f"sweep truncation {n} exceeds available N={full.n}")
        return full.truncated(n)
    return system_from_config(cfg, n_override=n)


def _run_one(cfg, n, T, betas, window):
    system = _sweep_system(cfg, n)
    target = target_from_config(cfg, system.n, truncate=True)
    hs = horizon_from_config(cfg, system.n, t_override=T, truncate=True)
    static_sol = solve_static(target, system)
    traj = solve_bvp_spectral(system, target, hs, static_sol)
    record = {"N": n, "T": T, "shooting_ratio": shooting_ratio(traj, static_sol, system),
              "boundary_condition_number": traj.meta["boundary_condition_number"],
              "offblock_mass": traj.meta["offblock_mass"],
              "cost": dynamic_cost(traj, target)}
    profiles = {}
    for beta in betas:
        prof = deviation_profile(traj, static_sol, beta, system)
        entry = {"envelope_constant": envelope_constant(prof, T)}
        lo, hi = window
        hi = min(hi, T / 2.0 - 1e-9)
        try:
            entry["fitted_exponent"] = fit_decay_exponent(prof, (lo, hi))
        except ValueError:
            entry["fitted_exponent"] = float("nan")
        profiles[beta] = (prof, entry)
    return record, profiles


def cmd_turnpike(cfg: dict, args) -> int:
    out = _outdir(args)
    betas = [float(b) for b in cfg["beta"]]
    n_values = [int(v) for v in cfg["sweep"]["n_values"]]
    t_values = [float(v) for v in cfg["sweep"]["t_values"]]
    window = tuple(cfg["fit_window"])
    tag = f"hash={config_hash(cfg)}"
    combos = [(n, T) for n in n_values for T in t_values]

    try:
        if args.jobs > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(
                    lambda nt: _run_one(cfg, nt[0], nt[1], betas, window), combos))
        else:
            results = [_run_one(cfg, n, T, betas, window) for n, T in combos]
    except NumericsError as exc:
        print(f"turnpike sweep failed: {exc}", file=_sys.stderr)
        return EXIT_SOLVER

    records = []
    for (n, T), (record, profiles) in zip(combos, results):
        for beta, (prof, entry) in profiles.items():
            row = dict(record)
            row["beta"] = beta
            row.update(entry)
            records.append(row)
            stem = f"profile_N{n}_T{T:g}_beta{beta:g}"
            reporting.write_two_column(out / f"{stem}.dat", prof.times, prof.dev,
                                       header_comment=f"{tag} t dev")
            reporting.write_two_column(out / f"{stem}_loglog.dat",
                                       np.log(prof.times + 1.0),
                                       np.log(np.maximum(prof.dev, 1e-300)),
                                       header_comment=f"{tag} log(t+1) log(dev)")
            figures.profile_figure(prof, T, entry["envelope_constant"],
                                   out / f"{stem}.png")

    reporting.write_csv(out / "sweep.csv", {
        "N": [r["N"] for r in records],
        "T": [r["T"] for r in records],
        "beta": [r["beta"] for r in records],
        "envelope_constant": [r["envelope_constant"] for r in records],
        "fitted_exponent": [r["fitted_exponent"] for r in records],
        "shooting_ratio": [r["shooting_ratio"] for r in records],
        "cost": [r["cost"] for r in records],
    }, header_comment=tag)
    figures.sweep_figure(records, out / "sweep.png")

    checks = {}
    thresholds = cfg["thresholds"]
    for beta in betas:
        consts = [r["envelope_constant"] for r in records if r["beta"] == beta]
        ratio = max(consts) / min(consts) if min(consts) > 0 else float("inf")
        checks[f"envelope_ratio_beta_{beta:g}"] = {
            "value": ratio, "limit": thresholds["envelope_ratio_max"],
            "pass": ratio < thresholds["envelope_ratio_max"]}
    for n in n_values:
        ratios = [r["shooting_ratio"] for r in records if r["N"] == n and r["beta"] == betas[0]]
        spread = (max(ratios) - min(ratios)) / max(ratios) if max(ratios) > 0 else 0.0
        checks[f"shooting_variation_N_{n}"] = {
            "value": spread, "limit": thresholds["shooting_variation_max"],
            "pass": spread < thresholds["shooting_variation_max"]}

    oracle_cfg = cfg["oracle_check"]
    if oracle_cfg.get("enabled", True):
        n_chk = min(int(oracle_cfg["n"]), min(n_values))
        t_chk = min(float(oracle_cfg["T"]), min(t_values))
        system = _sweep_system(cfg, n_chk)
        target = target_from_config(cfg, system.n, truncate=True)
        hs = HorizonSpec(T=t_chk,
                         x0=horizon_from_config(cfg, system.n, truncate=True).x0,
                         samples=int(oracle_cfg.get("samples", 2001)))
        static_sol = solve_static(target, system)
        try:
            tr_d = solve_bvp_spectral(system, target, hs, static_sol)
            tr_r = solve_riccati_oracle(system, target, hs, static_sol,
                                        rtol=cfg["tolerances"]["ivp_rtol"])
        except NumericsError as exc:
            print(f"oracle check failed: {exc}", file=_sys.stderr)
            return EXIT_SOLVER
        scale = 1.0 + float(np.linalg.norm(hs.x0.stacked))
        diff = max(
            float(np.max(np.linalg.norm(
                np.hstack([tr_d.xi - tr_r.xi, tr_d.eta - tr_r.eta]), axis=1))),
            float(np.max(np.linalg.norm(
                np.hstack([tr_d.lam - tr_r.lam, tr_d.mu - tr_r.mu]), axis=1))),
            float(np.max(np.abs(tr_d.u - tr_r.u))),
        ) / scale
        checks["oracle_equivalence"] = {
            "value": diff, "limit": thresholds["oracle_rel_tol"],
            "pass": diff < thresholds["oracle_rel_tol"],
            "N": n_chk, "T": t_chk}

    report = {"config_hash": config_hash(cfg), "runs": records, "checks": checks}
    reporting.write_json(out / "sweep_report.json", report)
    ok = all(c["pass"] for c in checks.values())
    if args.json:
        print(reporting.json_text(report))
    else:
        for name, chk in checks.items():
            state = "ok" if chk["pass"] else "FAIL"
            print(f"turnpike check {name}: {chk['value']:.4g} "
                  f"(limit {chk['limit']:g}) {state}")
    return EXIT_OK if ok else EXIT_SOLVER


# ---------------------------------------------------------------------------
# beam
# ---------------------------------------------------------------------------

def cmd_beam(cfg: dict, args) -> int:
    out = _outdir(args)
    gen = cfg["system"].get("generator") or {}
    params = beam_mod.BeamParams(c=float(gen.get("c", 1.0)), l=float(gen.get("l", 1.0)),
                                 d=float(gen.get("d", 1.0)))
    n_max = int(args.n_max or cfg["system"].get("N") or 50)
    modes = beam_mod.mode_table(n_max, params)
    tag = f"hash={config_hash(cfg)} c={params.c:g} l={params.l:g} d={params.d:g}"
    reporting.write_csv(out / "modes.csv", {
        "n": [m.n for m in modes],
        "delta": [m.delta for m in modes],
        "gamma": [m.gamma for m in modes],
        "omega": [m.omega for m in modes],
        "b": [m.b for m in modes],
        "norm_const": [m.norm_const for m in modes],
    }, header_comment=tag)
    figures.beam_modes_figure(min(4, n_max), out / "modes.png", beam_mod.mode_shape)
    summary = {"config_hash": config_hash(cfg), "n_max": n_max,
               "omega_1": modes[0].omega, "b_1": modes[0].b}
    if args.json:
        print(reporting.json_text(summary))
    else:
        print(f"beam: wrote {n_max} modes, omega_1={modes[0].omega:.8g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------

def cmd_check(cfg: dict, args) -> int:
    out = _outdir(args)
    system = system_from_config(cfg)
    report = check_assumptions(system, rho=cfg["rho"], alpha=cfg["alpha"])
    payload = {
        "config_hash": config_hash(cfg),
        "rho": report.rho,
        "alpha": report.alpha,
        "truncations": list(report.truncations),
        "growth_exponent": report.growth_exponent,
        "decay_criterion": {
            "lhs": report.decay_criterion_lhs,
            "rhs": report.decay_criterion_rhs,
            "ok": report.decay_criterion_ok,
        },
        "checks": {
            name: {"verdict": chk.verdict, "values": chk.values,
                   "tail": chk.tail, "note": chk.note}
            for name, chk in report.checks.items()
        },
    }
    reporting.write_json(out / "assumptions.json", payload)
    if args.json:
        print(reporting.json_text(payload))
    else:
        for name in ("A1", "A2", "A3", "A4", "A5", "A6"):
            chk = report.checks[name]
            last = chk.values[-1] if len(chk.values) else float("nan")
            print(f"{name}: {chk.verdict:12s} value={last:.6g}  {chk.note}")
        print(f"growth exponent p ~ {report.growth_exponent:.3f}; "
              f"2*alpha*rho={report.decay_criterion_lhs:.3f} "
              f"< 2-1/p={report.decay_criterion_rhs:.3f}: {report.decay_criterion_ok}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscturnpike",
        description="LQ control of truncated oscillator chains: spectra, "
                    "steady optima, horizon solves, turnpike sweeps, beam tables.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--json", action="store_true", help="print a JSON summary")
        p.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
        p.add_argument("--tol", type=float, default=None, help="solver tolerance override")

    p = sub.add_parser("spectrum", help="root quadruples, certificates, localization")
    common(p)
    p.add_argument("--n", type=int, action="append", help="truncation level")

    p = sub.add_parser("static", help="steady optimal quadruple for the target")
    common(p)
    p.add_argument("--n", type=int, action="append", help="truncation level")

    p = sub.add_parser("solve", help="finite-horizon optimal trajectory")
    common(p)
    p.add_argument("--n", type=int, action="append", help="truncation level")
    p.add_argument("--horizon", type=float, action="append", help="horizon length")

    p = sub.add_parser("turnpike", help="(N, T) sweep with envelope diagnostics")
    common(p)
    p.add_argument("--n", type=int, action="append", help="truncation ladder value")
    p.add_argument("--horizon", type=float, action="append", help="horizon ladder value")
    p.add_argument("--beta", type=float, action="append", help="envelope exponent")
    p.add_argument("--window", help="decay fit window LO:HI")

    p = sub.add_parser("beam", help="clamped-free mode table")
    common(p)
    p.add_argument("--n-max", type=int, default=None, help="number of modes")

    p = sub.add_parser("check", help="parameter assumption report")
    common(p)
    p.add_argument("--rho", type=float, default=None, help="summability exponent")
    p.add_argument("--alpha", type=float, default=None, help="gain decay exponent")
    p.add_argument("--n", type=int, action="append", help="truncation level")
    return parser


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "static": cmd_static,
    "solve": cmd_solve,
    "turnpike": cmd_turnpike,
    "beam": cmd_beam,
    "check": cmd_check,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load(args)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    except NumericsError as exc:
        print(f"solver error: {exc}", file=_sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    raise SystemExit(main())
