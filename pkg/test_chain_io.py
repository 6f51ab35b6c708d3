"""
CHAIN IO TEST - dump header, sidecar metadata, manifests and the CSV exports.
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from analysis.diagnostics import lag_table
from core.chain_io import (
    HEADER_SIZE,
    MAGIC,
    ChainWriter,
    metadata_path,
    pack_header,
    read_chain,
    read_metadata,
    trace_path,
    unpack_header,
    write_chain,
)
from core.errors import ConsistencyError
from models.chain import AcfResult, Chain
from models.manifest import RunManifest, format_key_values, parse_key_values
from utils.export_utils import export_acfs, export_cm_checkpoints, export_lag_table, export_traces, read_table


def _chain(rows: int = 5, n: int = 3) -> Chain:
    samples = np.random.Generator(np.random.PCG64(0)).standard_normal((rows, n))
    return Chain(
        samples=samples, burn_in=10, total=rows * 2, stride=2, seed=99, t_s=1.5e-3,
        descriptor="SysGibbsO3", unit="sweep", updates_per_sample=n,
        log_posterior_trace=np.linspace(-5.0, -1.0, 20), acceptance_rate=None,
    )


def test_header_layout():
    raw = pack_header(rows=7, n=4, stride=2, seed=123, t_s=0.25)
    assert len(raw) == HEADER_SIZE == 64
    assert raw[:8] == MAGIC
    header = unpack_header(raw)
    assert (header["rows"], header["n"], header["stride"], header["seed"], header["t_s"]) == (7, 4, 2, 123, 0.25)
    assert header["flags"] & 1


def test_header_rejects_garbage():
    for raw in (b"short", b"NOTCHAIN" + bytes(56), pack_header(1, 1, 1, 0, 0.0)[:8] + (2).to_bytes(4, "little") + bytes(52)):
        try:
            unpack_header(raw)
        except ConsistencyError:
            continue
        raise AssertionError(f"header {raw[:12]!r} should be rejected")


def test_write_and_read_chain():
    chain = _chain()
    with tempfile.TemporaryDirectory() as tmp:
        path = write_chain(chain, Path(tmp) / "chain.bin")
        header, samples = read_chain(path)
        assert np.array_equal(samples, chain.samples)
        assert header["seed"] == 99 and header["stride"] == 2 and header["t_s"] == 1.5e-3
        meta = read_metadata(path)
        assert meta["descriptor"] == "SysGibbsO3"
        assert meta["rows_include_burn_in"] == "false"
        assert meta["total"] == "10"
        assert metadata_path(path).name == "chain.bin.meta"
        assert read_metadata(Path(tmp) / "missing.bin") == {}


def test_truncated_dump_is_rejected():
    with tempfile.TemporaryDirectory() as tmp:
        path = write_chain(_chain(), Path(tmp) / "chain.bin")
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        try:
            read_chain(path)
        except ConsistencyError:
            return
        raise AssertionError("truncated dump must raise")


def test_writer_streams_rows():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "sub" / "stream.bin"
        with ChainWriter(path, n=2, seed=5) as writer:
            writer.write_row(np.array([1.0, 2.0]))
            writer.write_rows(np.array([[3.0, 4.0], [5.0, 6.0]]))
            try:
                writer.write_row(np.zeros(3))
            except ConsistencyError:
                pass
            else:
                raise AssertionError("wrong row length must raise")
        header, rows = read_chain(path)
        assert header["rows"] == 3
        assert np.array_equal(rows, [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        assert not metadata_path(path).exists()


def test_key_value_format():
    text = format_key_values({"kind": "1d", "n": 63, "spots": [{"r": 0.5}], "flag": True})
    parsed = parse_key_values("# comment\n\n" + text)
    assert parsed == {"kind": "1d", "n": "63", "spots": '[{"r": 0.5}]', "flag": "true"}
    try:
        parse_key_values("no equals sign here")
    except ValueError:
        return
    raise AssertionError("malformed line must raise")


def test_run_manifest_round_trip():
    manifest = RunManifest(command="sample", scenario="runs/s", sampler="RnGibbs",
                           sampler_config={"kind": "rngibbs"}, n_chains=2, seeds=[1, 2],
                           outputs=["chain_0.bin"], extra={"note": "x"})
    again = RunManifest.from_text(manifest.to_text())
    assert again.seeds == [1, 2] and again.sampler_config == {"kind": "rngibbs"}
    assert again.extra == {"note": "x"}
    assert again.started_at == manifest.started_at


def test_csv_exports():
    chain = _chain()
    acfs = [AcfResult(r=np.array([1.0, 0.4, 0.005]), t_s=0.5, sampler="A", test_function="nu_1")]
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        export_acfs(acfs, tmp / "acf.csv")
        table = read_table(tmp / "acf.csv")
        assert list(table["R"]) == [1.0, 0.4, 0.005]
        assert list(table["t"]) == [0.0, 0.5, 1.0]

        export_lag_table(lag_table(acfs), tmp / "lags.csv")
        assert int(read_table(tmp / "lags.csv").loc[0, "tau"]) == 2

        traces = export_traces(chain, tmp / "chain.bin.trace.csv")
        assert traces == trace_path(tmp / "chain.bin")
        frame = read_table(traces)
        assert list(frame["log_posterior"]) == list(chain.log_posterior_trace)

        export_cm_checkpoints({1.0: np.zeros(3), 2.5: np.ones(3)}, tmp / "cm_times.csv")
        frame = read_table(tmp / "cm_times.csv")
        assert list(frame.columns) == ["index", "t=1", "t=2.5"]


if __name__ == "__main__":
    print("\n" + "=" * 80)
    print("[TEST] CHAIN IO")
    print("=" * 80 + "\n")
    failures = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                print(f"[PASS] {name}")
            except Exception as e:
                failures += 1
                print(f"[FAIL] {name}: {type(e).__name__}: {e}")
    print("\n" + "=" * 80)
    print(f"[SUMMARY] {failures} failure(s)")
    print("=" * 80 + "\n")
    sys.exit(1 if failures else 0)
