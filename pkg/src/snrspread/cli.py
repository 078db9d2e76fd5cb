"""Command-line front end.

Subcommands wrap the library modules one-to-one: ``generate`` draws sensing
matrices, ``snr`` evaluates the output SNR of a (matrix, signal) pair,
``cv`` reports analytic/empirical coefficients of variation, ``rmse-sweep``
and ``cv-sweep`` run the two sweep experiments (curve files, figure, run
manifest), ``rip`` computes isometry constants, ``recover`` runs the
oracle-recovery bound check, and ``noise-folding`` measures the folded noise
covariance.

Exit codes: 0 success, 2 usage error, 3 runtime/budget error. All numeric
output is printed to 6 significant digits in human mode; ``--json`` and the
file artifacts carry full precision. SNR values in dB use 10*log10 of the
linear power ratio.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import analytic_cv, gaussian_conditional_snr_dist
from .ensembles import (
    MatrixEnsemble,
    bernoulli,
    draw_matrix,
    gaussian,
    load_matrix,
    monte_carlo_rip_lower_bound,
    rademacher,
    rip_constant,
    row_orthogonal_scaled,
    save_matrix,
    unit_normalize_columns,
)
from .experiments import (
    DEFAULT_SUPPORT_SAMPLES,
    ExperimentConfig,
    cv_vs_k_sweep,
    rmse_sweep,
    write_cv_artifacts,
    write_rmse_artifacts,
)
from .linalg import RandomStream, SingularMatrixError
from .signals import BudgetExceededError, MagnitudeModel, load_signal
from .snr import NoiseSpec, output_snr, recovered_snr, rsnr_osnr_bounds, sigma0_sq

OUT_ENV_VAR = "SNRSPREAD_OUT"

ENSEMBLE_NAMES = ("gaussian", "bernoulli", "rademacher", "row-orthogonal")
MODEL_NAMES = ("equal", "gaussian", "uniform")


class UsageError(Exception):
    """Bad flags or flag combinations: exit code 2."""


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _fmt_db(eta: float) -> str:
    if eta == 0.0:
        return "-inf"
    return _fmt(10.0 * math.log10(eta))


def _parse_int_list(text: str) -> list[int]:
    """Accept "3", "1,2,3", or an inclusive range "1..10"."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        start, stop = int(lo), int(hi)
        if stop < start:
            raise UsageError(f"empty range {text!r}")
        return list(range(start, stop + 1))
    return [int(tok) for tok in text.split(",") if tok]


def _parse_float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok]


def _make_ensemble(name: str, args) -> MatrixEnsemble:
    name = name.strip().lower()
    if name == "gaussian":
        return gaussian(getattr(args, "variance", None))
    if name == "bernoulli":
        if getattr(args, "p", None) is None:
            raise UsageError("the bernoulli ensemble requires --p")
        return bernoulli(args.p)
    if name == "rademacher":
        return rademacher(getattr(args, "amplitude", None) or 1.0)
    if name in ("row-orthogonal", "row_orthogonal"):
        return row_orthogonal_scaled()
    raise UsageError(f"unknown ensemble {name!r} (choose from {', '.join(ENSEMBLE_NAMES)})")


def _make_models(text: str) -> list[MagnitudeModel]:
    models = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if tok not in MODEL_NAMES:
            raise UsageError(f"unknown magnitude model {tok!r}")
        models.append(MagnitudeModel(tok))
    if not models:
        raise UsageError("no magnitude models given")
    return models


def _noise_from(args) -> NoiseSpec:
    return NoiseSpec(sigma_s_sq=args.sigma_s, sigma_m_sq=args.sigma_m)


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_ENV_VAR) or "./out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _supports_arg(text: str):
    if text == "exhaustive":
        return text
    try:
        value = int(text)
    except ValueError:
        raise UsageError("--supports takes an integer or 'exhaustive'") from None
    if value < 1:
        raise UsageError("--supports must be >= 1")
    return value


def _write_json(path: Path, payload: dict) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _write_manifest(outdir: Path, args, argv, outputs: list[Path], started: float) -> Path:
    resolved = {
        k: v
        for k, v in vars(args).items()
        if k not in ("func", "config") and not k.startswith("_")
    }
    manifest = {
        "tool": "snrspread",
        "version": __version__,
        "command": list(argv),
        "config": resolved,
        "master_seed": resolved.get("seed"),
        "outputs": sorted(p.name for p in outputs),
        "duration_s": time.time() - started,
    }
    path = outdir / "run_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_generate(args, argv) -> int:
    started = time.time()
    if args.m is None or args.n is None:
        raise UsageError("generate requires --m and --n")
    ensemble = _make_ensemble(args.ensemble, args)
    stream = RandomStream(args.seed, ("generate", 0))
    sm = draw_matrix(ensemble, args.m, args.n, stream)
    outdir = _out_dir(args)
    csv_path, sidecar = save_matrix(sm, outdir / f"{args.name}.csv")
    _write_manifest(outdir, args, argv, [csv_path, sidecar], started)
    print(f"wrote {csv_path} ({sm.m}x{sm.n}, {ensemble.kind}) and {sidecar}")
    return 0


def _cmd_snr(args, argv) -> int:
    if args.matrix is None or args.signal is None:
        raise UsageError("snr requires --matrix and --signal")
    sm = load_matrix(args.matrix)
    sig = load_signal(args.signal)
    noise = _noise_from(args)
    s0 = sigma0_sq(sm, noise)
    eta = output_snr(sm, sig, noise)
    payload = {
        "eta_linear": eta.serializable(),
        "eta_db": None if eta.eta == 0.0 else 10.0 * math.log10(eta.eta),
        "sigma0_sq": s0,
        "m": sm.m,
        "n": sm.n,
        "k": sig.k,
        "noise": {"sigma_s_sq": noise.sigma_s_sq, "sigma_m_sq": noise.sigma_m_sq},
    }
    if sm.ensemble is not None and sm.ensemble.kind == "gaussian" and sig.k > 0:
        params = gaussian_conditional_snr_dist(sm.m, sig.power(), s0)
        payload["gamma_shape"] = params.shape
        payload["gamma_scale"] = params.scale
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
        return 0
    print(f"output SNR: {_fmt(eta.eta)} ({_fmt_db(eta.eta)} dB)")
    print(f"sigma0^2: {_fmt(s0)}")
    if "gamma_shape" in payload:
        print(
            f"conditional SNR law: Gamma(shape={_fmt(payload['gamma_shape'])}, "
            f"scale={_fmt(payload['gamma_scale'])})"
        )
    return 0


def _cmd_cv(args, argv) -> int:
    started = time.time()
    if not args.analytic and not args.empirical:
        raise UsageError("cv requires --analytic and/or --empirical")
    if args.m is not None:
        m = args.m
    elif args.n is not None and args.rho is not None:
        m = max(1, round(args.rho * args.n))
    else:
        raise UsageError("cv requires --m or both --n and --rho")
    ensemble = _make_ensemble(args.ensemble, args)
    payload: dict = {"m": m, "ensemble": {"kind": ensemble.kind, **ensemble.params()}}

    if args.analytic:
        cv_a = analytic_cv(ensemble, m, k=args.k)
        payload["analytic_cv"] = cv_a
        if ensemble.kind != "gaussian":
            payload["analytic_note"] = "closed form assumes equal magnitudes"

    if args.empirical:
        if args.n is None:
            raise UsageError("empirical cv requires --n")
        if args.k is None:
            raise UsageError("empirical cv requires --k")
        rho = args.rho if args.rho is not None else m / args.n
        config = ExperimentConfig(
            n=args.n,
            rho=rho,
            k=args.k,
            ensembles=[ensemble],
            magnitude_models=[MagnitudeModel(args.model)],
            n_matrix_realizations=args.trials,
            n_support_samples=args.supports,
            master_seed=args.seed,
        )
        result = cv_vs_k_sweep(config, threads=args.threads)
        cell = result.cells[0]
        payload["empirical_cv"] = cell.mean_cv_scaled / math.sqrt(cell.m)
        payload["empirical_cv_scaled"] = cell.mean_cv_scaled
        payload["n_matrix_realizations"] = cell.n_realizations
        payload["k"] = args.k

    outdir = _out_dir(args)
    result_path = _write_json(outdir / "cv_result.json", payload)
    _write_manifest(outdir, args, argv, [result_path], started)
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
        return 0
    if "analytic_cv" in payload:
        print(f"analytic c_v: {_fmt(payload['analytic_cv'])}")
    if "empirical_cv" in payload:
        print(f"empirical c_v: {_fmt(payload['empirical_cv'])}")
    return 0


def _sweep_common(args) -> tuple[list[MatrixEnsemble], Path]:
    ensembles = [_make_ensemble(tok, args) for tok in args.ensembles.split(",") if tok]
    if not ensembles:
        raise UsageError("no ensembles given")
    return ensembles, _out_dir(args)


def _cmd_rmse_sweep(args, argv) -> int:
    started = time.time()
    ensembles, outdir = _sweep_common(args)
    config = ExperimentConfig(
        n=_parse_int_list(args.n_list),
        rho=_parse_float_list(args.rho),
        k=args.k,
        ensembles=ensembles,
        magnitude_models=[MagnitudeModel("equal")],
        n_matrix_realizations=args.trials,
        n_support_samples=args.supports,
        master_seed=args.seed,
    )
    result = rmse_sweep(config, threads=args.threads)
    outputs = write_rmse_artifacts(result, outdir)
    if not args.no_figure:
        from .report import render_rmse_figure

        outputs.append(render_rmse_figure(result, outdir / "rmse_sweep.png"))
    _write_manifest(outdir, args, argv, outputs, started)
    for cell in result.cells:
        print(
            f"ensemble={cell.ensemble.kind} rho={cell.rho:g} N={cell.n}: "
            f"normalized RMSE {_fmt(cell.rmse_norm)}"
        )
    print(f"wrote {len(outputs)} files to {outdir}")
    return 0


def _cmd_cv_sweep(args, argv) -> int:
    started = time.time()
    ensembles, outdir = _sweep_common(args)
    config = ExperimentConfig(
        n=args.n,
        rho=args.rho,
        k=_parse_int_list(args.k),
        ensembles=ensembles,
        magnitude_models=_make_models(args.models),
        n_matrix_realizations=args.trials,
        n_support_samples=args.supports,
        master_seed=args.seed,
    )
    result = cv_vs_k_sweep(config, threads=args.threads)
    outputs = write_cv_artifacts(result, outdir)
    if not args.no_figure:
        from .report import render_cv_figure

        outputs.append(render_cv_figure(result, outdir / "cv_vs_k.png"))
    _write_manifest(outdir, args, argv, outputs, started)
    for cell in result.cells:
        print(
            f"ensemble={cell.ensemble.kind} model={cell.model.kind} K={cell.k}: "
            f"mean c_v*sqrt(M) = {_fmt(cell.mean_cv_scaled)}"
        )
    print(f"wrote {len(outputs)} files to {outdir}")
    return 0


def _cmd_rip(args, argv) -> int:
    started = time.time()
    if args.matrix is None or args.k is None:
        raise UsageError("rip requires --matrix and --k")
    sm = load_matrix(args.matrix)
    payload: dict = {"m": sm.m, "n": sm.n, "k": args.k}
    if args.mc is not None:
        stream = RandomStream(args.seed, ("rip_mc",))
        delta = monte_carlo_rip_lower_bound(sm, args.k, args.mc, stream)
        payload["delta_lower_bound"] = delta
        payload["n_samples"] = args.mc
        label = "RIP lower bound (Monte Carlo)"
    else:
        delta = rip_constant(sm, args.k, budget=args.budget)
        payload["delta"] = delta
        label = "RIP constant (exhaustive)"
    outdir = _out_dir(args)
    result_path = _write_json(outdir / "rip_result.json", payload)
    _write_manifest(outdir, args, argv, [result_path], started)
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(f"{label}: {_fmt(delta)}")
    return 0


def _cmd_recover(args, argv) -> int:
    started = time.time()
    if args.matrix is None or args.signal is None:
        raise UsageError("recover requires --matrix and --signal")
    sm = load_matrix(args.matrix)
    if args.normalize_columns:
        sm = unit_normalize_columns(sm)
    sig = load_signal(args.signal)
    noise = _noise_from(args)
    payload: dict = {"m": sm.m, "n": sm.n, "k": sig.k}

    if noise.silent:
        payload["recovered_snr"] = "unbounded"
        payload["ratio_check"] = "trivially satisfied (noiseless: zero residual)"
        outdir = _out_dir(args)
        result_path = _write_json(outdir / "recover_result.json", payload)
        _write_manifest(outdir, args, argv, [result_path], started)
        if args.json:
            print(json.dumps(payload, indent=2, sort_keys=True))
        else:
            print("recovered SNR: unbounded (noiseless)")
            print("ratio check: trivially satisfied")
        return 0

    eta_o = output_snr(sm, sig, noise)
    stream = RandomStream(args.seed, ("recover",))
    eta_r = recovered_snr(sm, sig, noise, n_trials=args.trials, stream=stream)
    delta = args.delta
    if delta is None:
        delta = rip_constant(sm, sig.k, budget=args.budget)
    lo, hi = rsnr_osnr_bounds(delta, sm.m, sig.k)
    ratio = eta_r.eta / eta_o.eta
    ok = lo <= ratio <= hi
    payload.update(
        {
            "output_snr": eta_o.serializable(),
            "recovered_snr": eta_r.serializable(),
            "ratio": ratio,
            "delta": delta,
            "bound_lo": lo,
            "bound_hi": hi,
            "within_bounds": ok,
            "n_trials": args.trials,
        }
    )
    outdir = _out_dir(args)
    result_path = _write_json(outdir / "recover_result.json", payload)
    _write_manifest(outdir, args, argv, [result_path], started)
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
        return 0
    print(f"output SNR:    {_fmt(eta_o.eta)} ({_fmt_db(eta_o.eta)} dB)")
    print(f"recovered SNR: {_fmt(eta_r.eta)} ({_fmt_db(eta_r.eta)} dB)")
    print(f"ratio: {_fmt(ratio)}  bounds: [{_fmt(lo)}, {_fmt(hi)}]  delta: {_fmt(delta)}")
    print(f"ratio check: {'PASS' if ok else 'FAIL'}")
    return 0


def _cmd_noise_folding(args, argv) -> int:
    started = time.time()
    if args.m is None or args.n is None:
        raise UsageError("noise-folding requires --m and --n")
    noise = _noise_from(args)
    stream = RandomStream(args.seed, ("noise_folding",))
    sm = draw_matrix(row_orthogonal_scaled(), args.m, args.n, stream.child("matrix"))
    m, n = sm.m, sm.n
    predicted_diag = n / m * noise.sigma_s_sq + noise.sigma_m_sq

    draws = args.draws
    noise_stream = stream.child("noise")
    cov = np.zeros((m, m))
    chunk = max(1, min(draws, 200_000 // max(n, 1)))
    left = draws
    while left > 0:
        c = min(chunk, left)
        y = np.zeros((m, c))
        if noise.sigma_s_sq > 0:
            ns = noise_stream.standard_normal(n * c).reshape(n, c)
            y += sm.matrix @ (math.sqrt(noise.sigma_s_sq) * ns)
        if noise.sigma_m_sq > 0:
            nm = noise_stream.standard_normal(m * c).reshape(m, c)
            y += math.sqrt(noise.sigma_m_sq) * nm
        cov += y @ y.T
        left -= c
    cov /= draws

    diag = np.diag(cov)
    off_mask = ~np.eye(m, dtype=bool)
    max_diag_rel_err = float(np.max(np.abs(diag - predicted_diag)) / predicted_diag)
    # 3-sigma Monte Carlo band for a sample covariance of independent entries
    sigma_pair = np.sqrt(np.outer(diag, diag) / draws)
    off_in_sigmas = np.abs(cov) / sigma_pair
    max_off_sigmas = float(np.max(off_in_sigmas[off_mask])) if m > 1 else 0.0
    payload = {
        "m": m,
        "n": n,
        "draws": draws,
        "folding_factor": n / m,
        "predicted_diag": predicted_diag,
        "max_diag_rel_err": max_diag_rel_err,
        "max_offdiag_sigmas": max_off_sigmas,
        "diag_within_3pct": bool(max_diag_rel_err <= 0.03),
        "offdiag_within_3sigma": bool(max_off_sigmas <= 3.0),
    }
    outdir = _out_dir(args)
    result_path = _write_json(outdir / "noise_folding_result.json", payload)
    _write_manifest(outdir, args, argv, [result_path], started)
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
        return 0
    print(f"folding factor N/M: {_fmt(n / m)}")
    print(f"predicted noise variance per measurement: {_fmt(predicted_diag)}")
    print(f"max diagonal relative error: {_fmt(max_diag_rel_err)}")
    print(f"max off-diagonal deviation: {_fmt(max_off_sigmas)} sigma")
    return 0


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------


def _add_common(sub, out=True, seed=True, threads=False, json_flag=False):
    sub.add_argument("--config", help="JSON file supplying flag defaults; flags override")
    if out:
        sub.add_argument(
            "--out",
            help=f"output directory (default ./out, or ${OUT_ENV_VAR})",
        )
    if seed:
        sub.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    if threads:
        sub.add_argument(
            "--threads", type=int, default=1, help="parallelism budget (default 1)"
        )
    if json_flag:
        sub.add_argument("--json", action="store_true", help="machine-readable output")


def _add_noise_flags(sub, default_s=0.0, default_m=0.0):
    sub.add_argument(
        "--sigma-s",
        type=float,
        default=default_s,
        help=f"input-noise variance sigma_s^2 (default {default_s})",
    )
    sub.add_argument(
        "--sigma-m",
        type=float,
        default=default_m,
        help=f"measurement-noise variance sigma_m^2 (default {default_m})",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snrspread",
        description=(
            "Output-SNR variability analysis for noisy compressed sensing. "
            "dB values are 10*log10 of the linear power ratio."
        ),
    )
    parser.add_argument("--version", action="version", version=f"snrspread {__version__}")
    subs = parser.add_subparsers(dest="command", metavar="COMMAND")

    sub = subs.add_parser("generate", help="draw a sensing matrix and save CSV + sidecar")
    sub.add_argument("--ensemble", default="gaussian", help="|".join(ENSEMBLE_NAMES))
    sub.add_argument("--m", type=int, help="number of measurements (rows)")
    sub.add_argument("--n", type=int, help="ambient dimension (columns)")
    sub.add_argument("--p", type=float, help="bernoulli success probability")
    sub.add_argument("--variance", type=float, help="gaussian entry variance (default 1/M)")
    sub.add_argument("--amplitude", type=float, help="rademacher amplitude (default 1)")
    sub.add_argument("--name", default="matrix", help="output file base name")
    _add_common(sub)
    sub.set_defaults(func=_cmd_generate)

    sub = subs.add_parser("snr", help="output SNR of a saved (matrix, signal) pair")
    sub.add_argument("--matrix", help="matrix CSV path (sidecar JSON alongside)")
    sub.add_argument("--signal", help="signal JSON path")
    _add_noise_flags(sub)
    _add_common(sub, out=False, seed=False, json_flag=True)
    sub.set_defaults(func=_cmd_snr)

    sub = subs.add_parser("cv", help="analytic and/or empirical coefficient of variation")
    sub.add_argument("--ensemble", default="gaussian", help="|".join(ENSEMBLE_NAMES))
    sub.add_argument("--m", type=int, help="number of measurements")
    sub.add_argument("--n", type=int, help="ambient dimension")
    sub.add_argument("--rho", type=float, help="compression ratio M/N")
    sub.add_argument("--k", type=int, help="sparsity (bernoulli/rademacher/empirical)")
    sub.add_argument("--p", type=float, help="bernoulli success probability")
    sub.add_argument("--analytic", action="store_true", help="closed-form c_v")
    sub.add_argument("--empirical", action="store_true", help="Monte Carlo c_v")
    sub.add_argument("--model", default="equal", help="magnitude model for --empirical")
    sub.add_argument("--trials", type=int, default=100, help="matrix realizations")
    sub.add_argument(
        "--supports", type=_supports_arg, default=DEFAULT_SUPPORT_SAMPLES,
        help="support samples per matrix, or 'exhaustive'",
    )
    _add_common(sub, threads=True, json_flag=True)
    sub.set_defaults(func=_cmd_cv)

    sub = subs.add_parser("rmse-sweep", help="empirical-vs-analytic c_v error as N grows")
    sub.add_argument("--k", type=int, default=2, help="sparsity (default 2)")
    sub.add_argument("--rho", default="0.1,0.3", help="comma-separated compression ratios")
    sub.add_argument(
        "--n-list", default="300,700,1100,1500,1900", help="comma-separated N values"
    )
    sub.add_argument("--trials", type=int, default=200, help="matrix realizations per cell")
    sub.add_argument(
        "--ensembles", default="gaussian,bernoulli,rademacher", help="comma-separated"
    )
    sub.add_argument("--p", type=float, default=0.5, help="bernoulli probability (default 0.5)")
    sub.add_argument(
        "--supports", type=_supports_arg, default=DEFAULT_SUPPORT_SAMPLES,
        help="support samples per matrix, or 'exhaustive'",
    )
    sub.add_argument("--no-figure", action="store_true", help="skip figure rendering")
    _add_common(sub, threads=True)
    sub.set_defaults(func=_cmd_rmse_sweep)

    sub = subs.add_parser("cv-sweep", help="mean c_v * sqrt(M) as sparsity K grows")
    sub.add_argument("--n", type=int, default=300, help="ambient dimension (default 300)")
    sub.add_argument("--rho", type=float, default=0.1, help="compression ratio (default 0.1)")
    sub.add_argument("--k", default="1..10", help="K values: range 'a..b' or comma list")
    sub.add_argument("--trials", type=int, default=1000, help="matrix realizations per cell")
    sub.add_argument(
        "--ensembles", default="gaussian,bernoulli,rademacher", help="comma-separated"
    )
    sub.add_argument(
        "--models", default="equal,gaussian,uniform", help="magnitude models, comma-separated"
    )
    sub.add_argument("--p", type=float, default=0.5, help="bernoulli probability (default 0.5)")
    sub.add_argument(
        "--supports", type=_supports_arg, default=DEFAULT_SUPPORT_SAMPLES,
        help="support samples per matrix, or 'exhaustive'",
    )
    sub.add_argument("--no-figure", action="store_true", help="skip figure rendering")
    _add_common(sub, threads=True)
    sub.set_defaults(func=_cmd_cv_sweep)

    sub = subs.add_parser("rip", help="restricted isometry constant of a saved matrix")
    sub.add_argument("--matrix", help="matrix CSV path")
    sub.add_argument("--k", type=int, help="isometry order")
    sub.add_argument("--budget", type=int, default=2_000_000, help="enumeration budget")
    sub.add_argument("--mc", type=int, help="Monte Carlo sample count (lower bound mode)")
    _add_common(sub, json_flag=True)
    sub.set_defaults(func=_cmd_rip)

    sub = subs.add_parser("recover", help="oracle recovery SNR and ratio bound check")
    sub.add_argument("--matrix", help="matrix CSV path")
    sub.add_argument("--signal", help="signal JSON path")
    _add_noise_flags(sub)
    sub.add_argument("--trials", type=int, default=10_000, help="recovery trials")
    sub.add_argument("--delta", type=float, help="isometry constant (else exhaustive)")
    sub.add_argument("--budget", type=int, default=2_000_000, help="RIP enumeration budget")
    sub.add_argument(
        "--normalize-columns",
        action="store_true",
        help="scale columns to unit norm first (the convention delta is computed under)",
    )
    _add_common(sub, json_flag=True)
    sub.set_defaults(func=_cmd_recover)

    sub = subs.add_parser(
        "noise-folding", help="folded-noise covariance diagnostics (row-orthogonal matrix)"
    )
    sub.add_argument("--m", type=int, help="number of measurements")
    sub.add_argument("--n", type=int, help="ambient dimension")
    _add_noise_flags(sub, default_s=1.0, default_m=0.0)
    sub.add_argument("--draws", type=int, default=100_000, help="noise draws")
    _add_common(sub, json_flag=True)
    sub.set_defaults(func=_cmd_noise_folding)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Install config-file values as subcommand defaults (flags still win)."""
    if not argv or argv[0].startswith("-"):
        return
    command = argv[0]
    config_path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            config_path = argv[i + 1]
        elif tok.startswith("--config="):
            config_path = tok.split("=", 1)[1]
    if config_path is None:
        return
    try:
        values = json.loads(Path(config_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {config_path}: {exc}") from exc
    if not isinstance(values, dict):
        raise UsageError("config file must hold a JSON object of flag values")
    # find the subparser serving this command
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction) and command in action.choices:
            sub = action.choices[command]
            known = {a.dest for a in sub._actions}
            mapped = {}
            for key, value in values.items():
                dest = key.replace("-", "_")
                if dest not in known:
                    raise UsageError(f"config key {key!r} is not a flag of {command!r}")
                mapped[dest] = value
            sub.set_defaults(**mapped)
            return


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help()
            return 2
        return args.func(args, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse --help / usage errors
        return int(exc.code or 0)
    except (BudgetExceededError, SingularMatrixError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
