"""
Export utilities - CSV files for acf curves, lag tables, burn-in traces and CM estimates.
Every file has one header row naming its columns.
"""

import logging
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd

from analysis.diagnostics import temporal_acf
from models.chain import AcfResult, BurnInCurve, Chain

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _write(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format="%.17g")
    except OSError as e:
        logger.error(f"[EXPORT] Failed to write {path}: {e}", exc_info=True)
        raise
    logger.info(f"[EXPORT] Wrote {len(frame)} rows to {path}")
    return path


def export_acfs(acfs: Sequence[AcfResult], path: PathLike) -> Path:
    """Long format for several samplers: sampler, test_function, tau, t, R."""
    frames = []
    for acf in acfs:
        frame = temporal_acf(acf)
        frame.insert(0, "test_function", acf.test_function)
        frame.insert(0, "sampler", acf.sampler)
        frames.append(frame)
    return _write(pd.concat(frames, ignore_index=True), path)


def export_temporal_grid(curves: Dict[str, np.ndarray], t_grid: np.ndarray, path: PathLike) -> Path:
    """R*(t) of several samplers on one common time grid, one column per sampler."""
    frame = pd.DataFrame({"t": np.asarray(t_grid, dtype=float)})
    for name, values in curves.items():
        frame[name] = values
    return _write(frame, path)


def export_lag_table(table: pd.DataFrame, path: PathLike) -> Path:
    return _write(table, path)


def export_burn_in(curve: BurnInCurve, path: PathLike) -> Path:
    """Columns step, mean_log_posterior; the plateau step is logged, not stored."""
    frame = pd.DataFrame({
        "step": np.arange(curve.mean_trace.size),
        "mean_log_posterior": curve.mean_trace,
    })
    logger.info(f"[EXPORT] {curve.descriptor} plateau at step {curve.plateau}")
    return _write(frame, path)


def export_traces(chain: Chain, path: PathLike) -> Optional[Path]:
    """Per-step log posterior (and sigma^2 when sampled) over burn-in and sampling."""
    if chain.log_posterior_trace is None and chain.sigma2_trace is None:
        return None
    columns = {}
    if chain.log_posterior_trace is not None:
        columns["log_posterior"] = chain.log_posterior_trace
    if chain.sigma2_trace is not None:
        columns["sigma2"] = chain.sigma2_trace
    length = max(len(v) for v in columns.values())
    frame = pd.DataFrame({"step": np.arange(length)})
    for name, values in columns.items():
        frame[name] = pd.Series(values)
    return _write(frame, path)


def export_cm(estimate: np.ndarray, path: PathLike) -> Path:
    """Columns index, cm; the estimate is flattened for 2-D images."""
    values = np.asarray(estimate, dtype=float).ravel()
    return _write(pd.DataFrame({"index": np.arange(values.size), "cm": values}), path)


def export_cm_checkpoints(estimates: Dict[float, np.ndarray], path: PathLike) -> Path:
    """One column per compute budget, headed t=<seconds>."""
    frame = pd.DataFrame({"index": np.arange(next(iter(estimates.values())).size)})
    for budget, values in estimates.items():
        frame[f"t={budget:g}"] = np.asarray(values, dtype=float).ravel()
    return _write(frame, path)


def read_table(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")
