"""Command-line facade: solve-profile | spectrum | evolve | report.

Exit codes: 0 success, 2 configuration or missing-input error, 3 numerical
failure, 4 acceptance failure (report only).
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import dynamics as dyn
from . import io as nio
from . import operators as ops
from . import spectra as spec
from .config import RunConfig, load_config
from .errors import (
    BlowUp,
    CflViolation,
    ConfigError,
    DegenerateFit,
    EigenFailure,
    GapViolation,
    NoBracket,
    NoConvergence,
    SolveFailure,
)
from .grid import Field
from .profile import SolveConfig, solve_profile

_NUMERICAL_ERRORS = (
    NoConvergence,
    EigenFailure,
    GapViolation,
    BlowUp,
    CflViolation,
    SolveFailure,
    NoBracket,
    DegenerateFit,
)


def _thread_limit(n):
    if n is None:
        return contextlib.nullcontext()
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=n)
    except ImportError:  # pragma: no cover - threadpoolctl ships with scipy stacks
        return contextlib.nullcontext()


def _nu_tag(nu: float) -> str:
    return f"{nu:g}".replace(".", "p")


def _load_profile(outdir: Path):
    csv_path = outdir / "profile.csv"
    json_path = outdir / "profile.json"
    if not csv_path.exists() or not json_path.exists():
        raise ConfigError(
            f"profile artifacts not found in {outdir}; run 'neelwall solve-profile' first"
        )
    return nio.profile_from_artifacts(csv_path, json_path)


def cmd_solve_profile(cfg: RunConfig, outdir: Path) -> int:
    grid = cfg.grid.build()
    solve_cfg = SolveConfig(
        grid, tol_residual=cfg.profile.tol_residual, max_iters=cfg.profile.max_iters
    )
    t0 = time.perf_counter()
    try:
        profile = solve_profile(solve_cfg)
    except NoConvergence as exc:
        nio.write_json(outdir / "profile_failure.json", {
            "error": str(exc),
            "residual_history": [float(r) for r in exc.residual_history],
        })
        print(f"solve-profile: {exc}", file=sys.stderr)
        return 3
    elapsed = time.perf_counter() - t0

    nio.profile_to_artifacts(
        profile,
        outdir / "profile.csv",
        outdir / "profile.json",
        solver_meta={
            "tol_residual": cfg.profile.tol_residual,
            "max_iters": cfg.profile.max_iters,
        },
    )
    checks = {
        "residual_below_1e-8": bool(profile.residual_l2 <= 1e-8),
        "center_exact_zero": bool(profile.theta.values[grid.center_index] == 0.0),
        "monotone": bool(profile.min_slope > 0),
    }
    nio.write_manifest(
        outdir / "manifest_profile.json",
        cfg.to_dict(),
        {"profile.csv": outdir / "profile.csv", "profile.json": outdir / "profile.json"},
        {"solve_profile_s": elapsed},
        checks,
    )
    print(f"solve-profile: residual {profile.residual_l2:.3e} in {profile.iterations} iterations")
    return 0


def _companion_operator(cfg: RunConfig):
    """Profile + assembled operator on the (smaller) companion grid."""
    from .grid import Grid

    grid = Grid(cfg.spectra.companion_n, cfg.spectra.companion_half_width)
    profile = solve_profile(SolveConfig(grid, tol_residual=cfg.profile.tol_residual,
                                        max_iters=cfg.profile.max_iters))
    return ops.assemble("L", ops.build_coefficients(profile))


def cmd_spectrum(cfg: RunConfig, outdir: Path) -> int:
    profile = _load_profile(outdir)
    timings = {}
    t0 = time.perf_counter()
    coeffs = ops.build_coefficients(profile)
    op_L = ops.assemble("L", coeffs)
    op_inf = ops.assemble("L_infinity", grid=profile.grid)
    timings["assemble_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    rep_L = spec.eig_dense(op_L, zero_mode_tol=cfg.spectra.zero_mode_tol)
    rep_inf = spec.eig_dense(op_inf)
    lam0_defl = spec.lambda0_deflated(op_L, profile.dtheta)
    timings["eig_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    comp_op = _companion_operator(cfg)
    timings["companion_profile_s"] = time.perf_counter() - t0

    artifacts = {}
    summary_rows = []
    all_ok = True
    for nu in cfg.spectra.nu_list:
        tag = _nu_tag(nu)
        mapped = spec.mapped_spectrum(rep_L.eigenvalues, nu)
        zeta0 = spec.zeta0_formula(nu, rep_L.lambda0)
        zero_roots = spec.quadratic_roots(rep_L.eigenvalues[rep_L.zero_mode_index], nu)
        non_translation = np.delete(
            mapped, [2 * rep_L.zero_mode_index, 2 * rep_L.zero_mode_index + 1]
        )
        max_re = float(np.max(non_translation.real))
        gap_ok = bool(max_re <= -zeta0 + spec.GAP_TOL)

        t0 = time.perf_counter()
        try:
            block = spec.companion_spectrum(
                comp_op, nu, zero_mode_tol=cfg.spectra.zero_mode_tol,
                xi_max=cfg.spectra.xi_max, xi_samples=cfg.spectra.xi_samples,
            )
        except GapViolation as exc:
            print(f"spectrum: {exc}", file=sys.stderr)
            return 3
        timings[f"companion_nu{tag}_s"] = time.perf_counter() - t0

        pair = block.block_eigenvalues[list(block.translation_indices)]
        translation_ok = bool(abs(pair[0]) <= 1e-6 and abs(pair[1] + nu) <= 1e-6)
        mismatch_ok = bool(block.hausdorff_mapped_vs_block <= 1e-7)
        all_ok = all_ok and gap_ok and translation_ok and mismatch_ok

        payload = {
            "nu": nu,
            "zeta0": zeta0,
            "lambda0": rep_L.lambda0,
            "lambda0_deflated": lam0_defl,
            "max_nonzero_real_part": max_re,
            "predicted_decay_rate": -max_re,
            "gap_ok": gap_ok,
            "translation_pair": [[pair[0].real, pair[0].imag], [pair[1].real, pair[1].imag]],
            "translation_pair_ok": translation_ok,
            "companion_hausdorff": block.hausdorff_mapped_vs_block,
            "companion_ok": mismatch_ok,
            "companion_n": cfg.spectra.companion_n,
            "zero_mode_roots": [[z.real, z.imag] for z in zero_roots],
        }
        path = outdir / f"spectrum_nu{tag}.json"
        nio.write_json(path, payload)
        artifacts[path.name] = path

        xi, curve = spec.essential_curve(nu, cfg.spectra.xi_max, cfg.spectra.xi_samples)
        path = outdir / f"essential_curve_nu{tag}.csv"
        nio.essential_curve_to_csv(path, xi, curve)
        artifacts[path.name] = path

        summary_rows.append((nu, rep_L.lambda0, zeta0, max_re,
                             int(gap_ok), block.hausdorff_mapped_vs_block, int(mismatch_ok)))

    path = outdir / "eigenvalues_L.csv"
    nio.eigenvalues_to_csv(path, [("L", rep_L.eigenvalues), ("L_infinity", rep_inf.eigenvalues)])
    artifacts[path.name] = path

    path = outdir / "gap_summary.csv"
    nio.write_csv(path, "nu,lambda0,zeta0,max_nonzero_real_part,gap_ok,companion_hausdorff,companion_ok",
                  summary_rows)
    artifacts[path.name] = path

    scalar_payload = {
        "lambda0": rep_L.lambda0,
        "lambda0_deflated": lam0_defl,
        "zero_mode_residual": rep_L.zero_mode_residual,
        "zero_mode_index": rep_L.zero_mode_index,
        "L_infinity_min_eig": float(rep_inf.eigenvalues[0]),
        "L_symmetry_defect": op_L.symmetry_defect,
        "n": profile.grid.n,
        "R": profile.grid.half_width,
    }
    path = outdir / "spectrum_scalar.json"
    nio.write_json(path, scalar_payload)
    artifacts[path.name] = path

    if cfg.output.dump_matrices:
        nio.dump_operator(op_L, outdir / "operator_L.bin", outdir / "operator_L.json")
        artifacts["operator_L.bin"] = outdir / "operator_L.bin"

    nio.write_manifest(outdir / "manifest_spectrum.json", cfg.to_dict(), artifacts, timings,
                       {"all_spectrum_checks": all_ok})
    print(f"spectrum: lambda0 = {rep_L.lambda0:.6f}, "
          f"L_inf min = {rep_inf.eigenvalues[0]:.6f}, checks {'ok' if all_ok else 'FLAGGED'}")
    return 0


def cmd_evolve(cfg: RunConfig, outdir: Path) -> int:
    profile = _load_profile(outdir)
    d = cfg.dynamics
    rng = np.random.default_rng(d.seed)
    shape = dyn.perturbation_shape(profile, d.shape, rng)
    grid = profile.grid
    timings = {}

    if d.mode == "full_phase":
        base = profile.theta
        if d.initial_shift != 0.0:
            from .profile import translate_wall

            base = translate_wall(base, d.initial_shift)
        theta0 = Field(grid, base.values + d.amplitude * shape.values)
        initial = dyn.PairState(theta0, grid.zeros(), "full_phase")
        coeffs = None
    else:
        coeffs = ops.build_coefficients(profile)
        pd = spec.build_projector(profile, d.nu)
        raw = dyn.PairState(
            Field(grid, d.amplitude * shape.values),
            Field(grid, d.amplitude * dyn.perturbation_shape(profile, "random", rng).values),
            "perturbation",
        )
        initial = spec.project(raw, pd)

    t0 = time.perf_counter()
    try:
        trace = dyn.evolve(initial, d.T, d.dt, d.every, d.nu, profile, coeffs=coeffs)
    except BlowUp as exc:
        if getattr(exc, "trace", None):
            nio.trace_to_csv(exc.trace, outdir / "trace_partial.csv")
        print(f"evolve: {exc}", file=sys.stderr)
        return 3
    timings["evolve_s"] = time.perf_counter() - t0

    artifacts = {}
    path = outdir / "trace.csv"
    nio.trace_to_csv(trace, path)
    artifacts[path.name] = path

    window = (0.2 * d.T, 0.8 * d.T)
    fits = {}
    for quantity in ("h1_distance", "x_norm"):
        try:
            fit = dyn.decay_fit(trace, window, quantity=quantity)
            fits[quantity] = {
                "omega": fit.omega,
                "amplitude": fit.amplitude,
                "window": list(fit.window),
                "r_squared": fit.r_squared,
            }
        except DegenerateFit as exc:
            fits[quantity] = {"error": str(exc)}
    path = outdir / "fit.json"
    nio.write_json(path, fits)
    artifacts[path.name] = path

    t0 = time.perf_counter()
    h2 = dyn.hypothesis_H2_check(profile, [0.1, 0.05, 0.025])
    directions = [dyn.perturbation_shape(profile, "random", rng) for _ in range(10)]
    h3 = dyn.hypothesis_H3_check(profile, directions, np.logspace(-4, -1, 4))
    timings["hypotheses_s"] = time.perf_counter() - t0
    path = outdir / "hypotheses.json"
    nio.write_json(path, {"H2": h2, "H3": h3})
    artifacts[path.name] = path

    nio.write_manifest(outdir / "manifest_evolve.json", cfg.to_dict(), artifacts, timings, {})
    last = trace[-1]
    print(f"evolve: T = {last.t:g}, final distance {last.h1_distance:.3e}, shift {last.shift:.6f}")
    return 0


def _read_trace(path: Path):
    lines = path.read_text().strip().splitlines()
    names = lines[0].split(",")
    rows = [dict(zip(names, map(float, ln.split(",")))) for ln in lines[1:]]
    return rows


def cmd_report(cfg: RunConfig, outdir: Path) -> int:
    errors = []
    required = {
        "profile.csv": outdir / "profile.csv",
        "profile.json": outdir / "profile.json",
        "spectrum_scalar.json": outdir / "spectrum_scalar.json",
        "gap_summary.csv": outdir / "gap_summary.csv",
        "trace.csv": outdir / "trace.csv",
        "fit.json": outdir / "fit.json",
        "hypotheses.json": outdir / "hypotheses.json",
    }
    for name, path in required.items():
        if not path.exists():
            errors.append(f"missing artifact: {name}")
    nu_tag = _nu_tag(cfg.dynamics.nu)
    spectrum_nu = outdir / f"spectrum_nu{nu_tag}.json"
    if not spectrum_nu.exists():
        errors.append(f"missing artifact: {spectrum_nu.name}")
    if errors:
        nio.write_json(outdir / "report.json", {"errors": errors, "checks": {}})
        for e in errors:
            print(f"report: {e}", file=sys.stderr)
        return 2

    prof_meta = json.loads((outdir / "profile.json").read_text())
    scalar = json.loads((outdir / "spectrum_scalar.json").read_text())
    nu_payload = json.loads(spectrum_nu.read_text())
    fits = json.loads((outdir / "fit.json").read_text())
    hyp = json.loads((outdir / "hypotheses.json").read_text())
    trace = _read_trace(outdir / "trace.csv")

    checks = {}
    checks["profile_residual"] = prof_meta["residual_l2"] <= 1e-8
    checks["profile_monotone"] = prof_meta["min_slope"] > 0
    checks["L_infinity_min_eig"] = abs(scalar["L_infinity_min_eig"] - 1.0) <= 1e-3
    checks["zero_mode_simple"] = scalar["zero_mode_index"] is not None
    checks["lambda0_positive"] = scalar["lambda0"] > 0
    checks["symmetry_defect"] = scalar["L_symmetry_defect"] <= 1e-10 * 1.0 + 1e-8

    gap_rows = [ln.split(",") for ln in (outdir / "gap_summary.csv").read_text().strip().splitlines()[1:]]
    checks["spectral_gap_all_nu"] = all(int(r[4]) == 1 for r in gap_rows)
    checks["companion_agreement_all_nu"] = all(int(r[6]) == 1 for r in gap_rows)

    prediction = nu_payload["predicted_decay_rate"]
    fit = fits.get("h1_distance", {})
    omega = fit.get("omega")
    checks["decay_fit_quality"] = bool(fit.get("r_squared", 0.0) >= 0.99)
    if omega is not None and prediction > 0:
        checks["decay_rate_in_band"] = bool(0.7 * prediction <= omega <= 1.3 * prediction)
    else:
        checks["decay_rate_in_band"] = False

    shifts = [r["shift"] for r in trace]
    tail = shifts[int(0.8 * len(shifts)):]
    increments = [abs(b - a) for a, b in zip(tail, tail[1:])]
    checks["shift_converged"] = bool(increments and max(increments) <= 1e-6)

    total = [r["kinetic"] + r["potential"] + r["dissipation_integral"] for r in trace]
    drift = max(abs(v - total[0]) for v in total)
    checks["energy_identity"] = bool(drift <= 1e-6)

    checks["H2_bounded"] = hyp["H2"]["max_ratio"] <= hyp["H2"]["bound"] * 1.1
    checks["H3_quadratic"] = all(s >= 1.9 for s in hyp["H3"]["slopes"])

    report = {
        "errors": [],
        "checks": checks,
        "quantities": {
            "lambda0": scalar["lambda0"],
            "zeta0_table": {r[0]: float(r[2]) for r in gap_rows},
            "fitted_omega": omega,
            "predicted_omega": prediction,
            "energy_drift": drift,
            "final_shift": shifts[-1],
        },
    }
    nio.write_json(outdir / "report.json", report)

    # plot-ready data
    nio.write_csv(outdir / "decay_logplot.csv", "t,log10_h1",
                  ((r["t"], float(np.log10(max(r["h1_distance"], 1e-300)))) for r in trace))
    mapped_kinds = []
    for tag_nu in cfg.spectra.nu_list:
        p = outdir / f"spectrum_nu{_nu_tag(tag_nu)}.json"
        if p.exists():
            data = json.loads(p.read_text())
            mapped_kinds.append((f"translation_nu{_nu_tag(tag_nu)}",
                                 [complex(a, b) for a, b in data["translation_pair"]]))
    if mapped_kinds:
        nio.eigenvalues_to_csv(outdir / "spectrum_scatter.csv", mapped_kinds)

    lines = ["wall stability report", "====================", ""]
    for name, ok in checks.items():
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name}")
    lines.append("")
    lines.append(f"lambda0 = {scalar['lambda0']:.6f}")
    lines.append("zeta0 by damping: " + ", ".join(f"nu={r[0]}: {float(r[2]):.4f}" for r in gap_rows))
    if omega is not None:
        lines.append(f"fitted omega = {omega:.4f} (prediction {prediction:.4f})")
    (outdir / "summary.txt").write_text("\n".join(lines) + "\n")

    failed = [k for k, ok in checks.items() if not ok]
    if failed:
        print("report: FAILED checks: " + ", ".join(failed), file=sys.stderr)
        return 4
    print("report: all checks pass")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neelwall", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve-profile", "spectrum", "evolve", "report"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None, help="JSON config path")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="random seed override")
        p.add_argument("--threads", type=int, default=None, help="BLAS/FFT thread cap")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg.validate()
        if args.seed is not None:
            cfg.dynamics.seed = args.seed
        outdir = Path(args.out) if args.out else Path(cfg.output.directory)
        outdir.mkdir(parents=True, exist_ok=True)
        with _thread_limit(args.threads):
            if args.command == "solve-profile":
                return cmd_solve_profile(cfg, outdir)
            if args.command == "spectrum":
                return cmd_spectrum(cfg, outdir)
            if args.command == "evolve":
                return cmd_evolve(cfg, outdir)
            return cmd_report(cfg, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
