"""
l1gibbs command line: build scenarios, run chains, compute diagnostics.

    l1gibbs [--config FILE] [--log-level LEVEL] scenario --kind 1d --L-u 6 --lambda-rule fixed:400 --out s63/
    l1gibbs sample --scenario s63/ --sampler rngibbs --samples 5000 --burn-in 200 --seed 3 --out run/
    l1gibbs diagnose --chains run/chain_0.bin --out diag/

Exit codes: 0 success, 1 sampler or I/O failure, 2 usage error.
"""

import argparse
import json
import logging
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from analysis.diagnostics import (
    autocorrelation,
    cm_at_times,
    coordinate_test_function,
    interpolate_temporal,
    lag_table,
    leading_eigvec,
    plateau_step,
    project,
    temporal_acf,
)
from core.chain_io import read_chain, read_metadata, trace_path, write_chain
from core.errors import ConfigurationError, SamplerError
from models.chain import AcfResult, BurnInCurve, TestFunction
from models.config import ChainConfig, SamplerSpec
from models.manifest import RunManifest
from models.scenario import Scenario1dConfig, Scenario2dConfig
from samplers.runner import derive_seeds, run_chains
from scenarios.deblur_1d import build_1d
from scenarios.deblur_2d import build_2d
from scenarios.scenario_io import load_scenario, save_scenario
from utils.config_utils import apply_config_defaults, load_config_file
from utils.export_utils import (
    export_acfs,
    export_burn_in,
    export_cm,
    export_cm_checkpoints,
    export_lag_table,
    export_temporal_grid,
    export_traces,
    read_table,
)

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)

RUN_MANIFEST = "run_manifest.txt"
SAMPLERS = ["mh-iso", "mh-ncom", "mh-si", "rngibbs", "sysgibbs"]
# resolution of the common time axis in acf_temporal.csv
TEMPORAL_GRID_POINTS = 101


class UsageError(Exception):
    """Invalid flag combination; exit code 2."""
    pass


# ============================================================================
# PARSER
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="l1gibbs", description="Exact Gibbs and MH sampling for L1-prior inverse problems")
    parser.add_argument("--config", type=str, default=None, help="key = value file; explicit flags win")
    parser.add_argument("--log-level", type=str, default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command")

    sc = sub.add_parser("scenario", help="Build a deblurring scenario")
    sc.add_argument("--kind", choices=["1d", "2d"], default=None)
    sc.add_argument("--L-u", dest="L_u", type=int, default=None, help="1-D: n = 2^L_u - 1")
    sc.add_argument("--L-m", dest="L_m", type=int, default=5, help="1-D: k = 2^L_m - 2")
    sc.add_argument("--lambda-rule", type=str, default=None, help="1-D: fixed:<value> | scaled | table")
    sc.add_argument("--noise-sigma", type=float, default=None, help="1-D noise std (default 0.001)")
    sc.add_argument("--grid", type=int, default=None, help="2-D pixels per side (odd)")
    sc.add_argument("--blur-sigma", type=float, default=None)
    sc.add_argument("--rel-noise", type=float, default=None)
    sc.add_argument("--fine-factor", type=int, default=None)
    sc.add_argument("--lambda", dest="lambda_value", type=float, default=None, help="2-D prior weight")
    sc.add_argument("--n-spots", type=int, default=None)
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--out", type=str, default=None)

    sa = sub.add_parser("sample", help="Run chains on a saved scenario")
    sa.add_argument("--scenario", type=str, default=None)
    sa.add_argument("--sampler", choices=SAMPLERS, default="rngibbs")
    sa.add_argument("--n-o", dest="n_o", type=int, default=1, help="ordered overrelaxation, odd")
    sa.add_argument("--kappa0", type=float, default=1.0)
    sa.add_argument("--no-adapt", action="store_true", default=False)
    sa.add_argument("--adapt-window", type=int, default=10000)
    sa.add_argument("--adapt-after-burn-in", action="store_true", default=False)
    sa.add_argument("--burn-in", type=int, default=0)
    sa.add_argument("--samples", type=int, default=1000)
    sa.add_argument("--thin", type=int, default=1)
    sa.add_argument("--seed", type=int, default=0)
    sa.add_argument("--sigma2-block", choices=["on", "off"], default="off")
    sa.add_argument("--alpha", type=float, default=1.0)
    sa.add_argument("--beta", type=float, default=1.0)
    sa.add_argument("--chains", type=int, default=1)
    sa.add_argument("--cache-mode", choices=["dense-gram", "operator"], default=None)
    sa.add_argument("--stream", action="store_true", default=False, help="also dump every step, burn-in included")
    sa.add_argument("--out", type=str, default=None)

    dg = sub.add_parser("diagnose", help="acf, lags, burn-in and CM from chain dumps")
    dg.add_argument("--chains", nargs="+", default=None, help="chain dumps")
    dg.add_argument("--reference", type=str, default=None, help="dump to estimate nu_1 from")
    dg.add_argument("--test-function", type=str, default="eigvec", help="eigvec | coordinate:<i>")
    dg.add_argument("--shrinkage", type=float, default=0.0)
    dg.add_argument("--tau-max", type=int, default=None)
    dg.add_argument("--threshold", type=float, default=0.01)
    dg.add_argument("--times", type=float, nargs="+", default=None, help="compute budgets in seconds for CM checkpoints")
    dg.add_argument("--out", type=str, default=None)
    return parser


def _subparsers(parser: argparse.ArgumentParser) -> Dict[str, argparse.ArgumentParser]:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return dict(action.choices)
    return {}


def _apply_config(parser: argparse.ArgumentParser, path: str) -> None:
    """Spread config file entries over the subcommands that know them."""
    entries = load_config_file(path)
    subparsers = _subparsers(parser)
    known = set()
    for sp in subparsers.values():
        dests = {a.dest for a in sp._actions}
        mine = {k: v for k, v in entries.items() if k in dests}
        known.update(mine)
        apply_config_defaults(sp, mine)
    unknown = sorted(set(entries) - known)
    if unknown:
        raise ConfigurationError("Unknown config keys", {"keys": unknown})


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command}: missing required option(s) {', '.join(missing)}")


def _write_manifest(out: Path, manifest: RunManifest, started: float) -> None:
    manifest.finished_at = datetime.utcnow()
    manifest.wall_seconds = time.perf_counter() - started
    (out / RUN_MANIFEST).write_text(manifest.to_text())
    logger.info(f"[CLI] Wrote {out / RUN_MANIFEST}")


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_scenario(args: argparse.Namespace, argv: List[str]) -> int:
    _require(args, "kind", "out")
    started = time.perf_counter()
    if args.kind == "1d":
        _require(args, "L_u")
        stray = [f for f in ("grid", "blur_sigma", "rel_noise", "fine_factor", "lambda_value", "n_spots") if getattr(args, f) is not None]
        if stray:
            raise UsageError(f"1d scenario does not take {', '.join(stray)}")
        fields = {"L_u": args.L_u, "L_m": args.L_m, "seed": args.seed}
        if args.lambda_rule is not None:
            fields["lambda_rule"] = args.lambda_rule
        if args.noise_sigma is not None:
            fields["noise_sigma"] = args.noise_sigma
        config = Scenario1dConfig(**fields)
        bundle = build_1d(config)
    else:
        stray = [f for f in ("L_u", "lambda_rule", "noise_sigma") if getattr(args, f) is not None]
        if stray:
            raise UsageError(f"2d scenario does not take {', '.join(stray)}")
        fields = {"seed": args.seed}
        for name in ("grid", "blur_sigma", "rel_noise", "fine_factor", "lambda_value", "n_spots"):
            if getattr(args, name) is not None:
                fields[name] = getattr(args, name)
        config = Scenario2dConfig(**fields)
        bundle = build_2d(config)

    out = save_scenario(bundle, args.out)
    manifest = RunManifest(
        command=" ".join(argv),
        scenario=str(out),
        outputs=["manifest.txt", "data.npy", "ground_truth.npy", "clean_data.npy"],
        extra={"kind": args.kind, "config": config.model_dump_json()},
    )
    _write_manifest(out, manifest, started)
    return 0


def cmd_sample(args: argparse.Namespace, argv: List[str]) -> int:
    _require(args, "scenario", "out")
    if args.sampler.startswith("mh") and args.n_o != 1:
        raise UsageError("--n-o applies to the Gibbs samplers only")
    if args.chains < 1:
        raise UsageError("--chains must be >= 1")
    started = time.perf_counter()

    bundle = load_scenario(args.scenario)
    spec = SamplerSpec.create(
        args.sampler,
        n_o=args.n_o,
        kappa0=args.kappa0,
        adapt=not args.no_adapt,
        adapt_window=args.adapt_window,
        sigma2_block=args.sigma2_block == "on",
        alpha=args.alpha,
        beta=args.beta,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = ChainConfig(
        burn_in=args.burn_in,
        samples=args.samples,
        thin=args.thin,
        adapt_after_burn_in=args.adapt_after_burn_in,
        cache_mode=args.cache_mode,
        stream_path=str(out / "stream.bin") if args.stream else None,
    )

    chains = run_chains(bundle.model, spec, config, args.chains, args.seed)
    outputs = []
    for i, chain in enumerate(chains):
        dump = write_chain(chain, out / f"chain_{i}.bin")
        outputs.append(dump.name)
        traces = export_traces(chain, trace_path(dump))
        if traces is not None:
            outputs.append(traces.name)
        if args.stream:
            outputs.append(f"stream_{i}.bin")
        if chain.acceptance_rate is not None:
            logger.info(f"[CLI] chain {i}: acceptance rate {chain.acceptance_rate:.3f}, final kappa {chain.final_kappa:.4g}")

    manifest = RunManifest(
        command=" ".join(argv),
        scenario=str(Path(args.scenario)),
        sampler=spec.descriptor(),
        sampler_config=spec.model_dump(mode="json"),
        chain_config=config.model_dump(mode="json"),
        n_chains=args.chains,
        seeds=derive_seeds(args.seed, args.chains),
        outputs=outputs,
    )
    _write_manifest(out, manifest, started)

    failed = [i for i, c in enumerate(chains) if c.error]
    if failed:
        logger.error(f"[CLI] {len(failed)} chain(s) aborted: {failed}; partial dumps were written")
        return 1
    return 0


def _load_dump(path: str):
    """(samples after burn-in, all rows, header, metadata)."""
    header, rows = read_chain(path)
    meta = read_metadata(path)
    skip = 0
    if meta.get("rows_include_burn_in") == "true":
        skip = min(int(meta.get("burn_in", "0")), rows.shape[0])
    return rows[skip:], rows, header, meta


def _test_function(args: argparse.Namespace, pooled: np.ndarray) -> TestFunction:
    if args.test_function.startswith("coordinate:"):
        try:
            i = int(args.test_function.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"Bad test function {args.test_function!r}")
        return coordinate_test_function(i, pooled.shape[1])
    if args.test_function != "eigvec":
        raise UsageError(f"Bad test function {args.test_function!r}")
    if args.reference:
        reference, _, _, _ = _load_dump(args.reference)
        return leading_eigvec(reference, shrinkage=args.shrinkage, label="nu_1(reference)")
    return leading_eigvec(pooled, shrinkage=args.shrinkage, label="nu_1(pooled)")


def cmd_diagnose(args: argparse.Namespace, argv: List[str]) -> int:
    _require(args, "chains", "out")
    started = time.perf_counter()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    loaded = [_load_dump(p) for p in args.chains]
    n_values = {samples.shape[1] for samples, _, _, _ in loaded}
    if len(n_values) != 1:
        raise UsageError("All chains must have the same dimension")
    pooled = np.vstack([samples for samples, _, _, _ in loaded])
    test_function = _test_function(args, pooled)

    acfs: List[AcfResult] = []
    for path, (samples, _, header, meta) in zip(args.chains, loaded):
        # thinned rows are `stride` samples apart
        acf = autocorrelation(
            project(samples, test_function),
            tau_max=args.tau_max,
            t_s=header["t_s"] * header["stride"],
            sampler=meta.get("descriptor", Path(path).stem),
            test_function=test_function.label,
        )
        acfs.append(acf)

    outputs = [
        export_acfs(acfs, out / "acf.csv").name,
        export_lag_table(lag_table(acfs, args.threshold), out / "lags.csv").name,
        export_cm(pooled.mean(axis=0), out / "cm.csv").name,
    ]
    np.savetxt(out / "test_function.csv", test_function.vector, header="value", comments="", fmt="%.17g")
    outputs.append("test_function.csv")

    if len(acfs) > 1:
        curves = [temporal_acf(acf) for acf in acfs]
        t_end = min(float(c["t"].iloc[-1]) for c in curves)
        t_grid = np.linspace(0.0, t_end, TEMPORAL_GRID_POINTS)
        columns = {
            f"{acf.sampler}_{i}": interpolate_temporal(curve, t_grid)
            for i, (acf, curve) in enumerate(zip(acfs, curves))
        }
        outputs.append(export_temporal_grid(columns, t_grid, out / "acf_temporal.csv").name)

    traces = [trace_path(p) for p in args.chains if trace_path(p).exists()]
    if traces:
        logs = [read_table(t)["log_posterior"].to_numpy() for t in traces]
        length = min(len(t) for t in logs)
        mean_trace = np.mean([t[:length] for t in logs], axis=0)
        meta = loaded[0][3]
        curve = BurnInCurve(
            mean_trace=mean_trace,
            n_chains=len(logs),
            descriptor=meta.get("descriptor", ""),
            unit=meta.get("unit", "sweep"),
            plateau=plateau_step(mean_trace),
        )
        outputs.append(export_burn_in(curve, out / "burn_in.csv").name)

    if args.times:
        _, rows, header, meta = loaded[0]
        if meta.get("rows_include_burn_in") != "true" or header["stride"] != 1:
            raise UsageError("--times needs an unthinned stream dump (sample --stream) as the first chain")
        estimates = cm_at_times(rows, header["t_s"], args.times, int(meta.get("burn_in", "0")))
        outputs.append(export_cm_checkpoints(estimates, out / "cm_times.csv").name)

    manifest = RunManifest(
        command=" ".join(argv),
        sampler=",".join(sorted({a.sampler for a in acfs})),
        outputs=outputs,
        extra={
            "chains": json.dumps(args.chains),
            "reference": args.reference or "",
            "test_function": test_function.label,
            "threshold": str(args.threshold),
        },
    )
    _write_manifest(out, manifest, started)
    return 0


COMMANDS = {"scenario": cmd_scenario, "sample": cmd_sample, "diagnose": cmd_diagnose}


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        pre, _ = parser.parse_known_args(argv)
        if pre.config:
            _apply_config(parser, pre.config)
        args = parser.parse_args(argv)
    except ConfigurationError as e:
        logger.error(f"[CLI] {e}")
        return 2
    except SystemExit as e:
        return int(e.code or 0)

    logging.getLogger().setLevel(args.log_level)
    if args.command is None:
        parser.print_help()
        return 2

    try:
        return COMMANDS[args.command](args, ["l1gibbs"] + argv)
    except (UsageError, ConfigurationError, ValidationError, ValueError) as e:
        logger.error(f"[CLI] Usage error: {e}")
        return 2
    except (SamplerError, OSError) as e:
        logger.error(f"[CLI] {args.command} failed: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
