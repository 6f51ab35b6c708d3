"""
Chain dumps: 64-byte header + little-endian float64 rows, plus a sidecar
`<dump>.meta` file of `key = value` lines.

Header layout (little endian):
    magic    8s   b"L1GCHAIN"
    version  u32
    flags    u32  bit 0: rows are u-coordinates
    rows     i64
    n        i64
    stride   i64
    seed     i64
    t_s      f64
    reserved 8 bytes
"""

import logging
import struct
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from core.errors import ConsistencyError
from models.chain import Chain
from models.manifest import format_key_values, parse_key_values

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)

MAGIC = b"L1GCHAIN"
VERSION = 1
FLAG_U_COORDINATES = 1
HEADER = struct.Struct("<8sIIqqqqd8x")
HEADER_SIZE = HEADER.size  # 64
ROW_DTYPE = np.dtype("<f8")

PathLike = Union[str, Path]


def metadata_path(path: PathLike) -> Path:
    return Path(str(path) + ".meta")


def trace_path(path: PathLike) -> Path:
    """CSV of per-step traces written next to a dump."""
    return Path(str(path) + ".trace.csv")


def pack_header(rows: int, n: int, stride: int, seed: int, t_s: float) -> bytes:
    return HEADER.pack(MAGIC, VERSION, FLAG_U_COORDINATES, rows, n, stride, seed, t_s)


def unpack_header(raw: bytes) -> Dict:
    if len(raw) != HEADER_SIZE:
        raise ConsistencyError("Truncated chain header", {"bytes": len(raw)})
    magic, version, flags, rows, n, stride, seed, t_s = HEADER.unpack(raw)
    if magic != MAGIC:
        raise ConsistencyError("Not a chain dump", {"magic": magic})
    if version != VERSION:
        raise ConsistencyError("Unsupported chain dump version", {"version": version})
    return {"flags": flags, "rows": rows, "n": n, "stride": stride, "seed": seed, "t_s": t_s}


class ChainWriter:
    """Streams rows to a dump; the header is finalized on close."""

    def __init__(self, path: PathLike, n: int, stride: int = 1, seed: int = 0):
        self.path = Path(path)
        self.n = int(n)
        self.stride = int(stride)
        self.seed = int(seed)
        self.rows = 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "wb")
        self._fh.write(pack_header(0, self.n, self.stride, self.seed, 0.0))

    def write_row(self, row: np.ndarray) -> None:
        row = np.asarray(row, dtype=ROW_DTYPE)
        if row.shape != (self.n,):
            raise ConsistencyError("Row has the wrong length", {"expected": self.n, "got": row.shape})
        self._fh.write(row.tobytes())
        self.rows += 1

    def write_rows(self, rows: np.ndarray) -> None:
        rows = np.ascontiguousarray(rows, dtype=ROW_DTYPE).reshape(-1, self.n)
        self._fh.write(rows.tobytes())
        self.rows += rows.shape[0]

    def close(self, t_s: float = 0.0, metadata: Optional[Dict] = None) -> None:
        if self._fh.closed:
            return
        self._fh.seek(0)
        self._fh.write(pack_header(self.rows, self.n, self.stride, self.seed, t_s))
        self._fh.close()
        if metadata is not None:
            metadata_path(self.path).write_text(format_key_values(metadata))
        logger.info(f"[CHAIN-IO] Wrote {self.rows} x {self.n} rows to {self.path}")

    def __enter__(self) -> "ChainWriter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()


def chain_metadata(chain: Chain) -> Dict:
    """Sidecar entries describing a chain."""
    return {
        "descriptor": chain.descriptor,
        "unit": chain.unit,
        "updates_per_sample": chain.updates_per_sample,
        "burn_in": chain.burn_in,
        "total": chain.total,
        "stride": chain.stride,
        "seed": chain.seed,
        "t_s": chain.t_s,
        "wall_time": chain.wall_time,
        "acceptance_rate": chain.acceptance_rate,
        "final_kappa": chain.final_kappa,
        "error": chain.error or "",
        "rows_include_burn_in": False,
    }


def write_chain(chain: Chain, path: PathLike) -> Path:
    """Dump the recorded (thinned) samples of a chain with its sidecar."""
    writer = ChainWriter(path, chain.samples.shape[1], chain.stride, chain.seed)
    writer.write_rows(chain.samples)
    writer.close(chain.t_s, chain_metadata(chain))
    return writer.path


def read_chain(path: PathLike) -> Tuple[Dict, np.ndarray]:
    """Header fields and the K x n sample matrix of a dump."""
    path = Path(path)
    with open(path, "rb") as fh:
        header = unpack_header(fh.read(HEADER_SIZE))
        data = np.frombuffer(fh.read(), dtype=ROW_DTYPE)
    expected = header["rows"] * header["n"]
    if data.size != expected:
        raise ConsistencyError("Dump size disagrees with its header", {"expected": expected, "got": data.size})
    return header, data.reshape(header["rows"], header["n"]).astype(float)


def read_metadata(path: PathLike) -> Dict[str, str]:
    meta = metadata_path(path)
    if not meta.exists():
        return {}
    return parse_key_values(meta.read_text())
