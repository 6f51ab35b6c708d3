"""
SAMPLERS TEST - MH proposals and adaptation, exact Gibbs sweeps, the sigma^2
block and the chain runner (thinning, seeding, streams, failure capture).
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from analysis.diagnostics import cm_agreement
from core.chain_io import read_chain, read_metadata
from core.errors import ConfigurationError
from core.operators import IdentityBasis, MatrixOperator, StepBasis, first_difference_matrix
from core.posterior_model import PosteriorModel, build_cache, log_posterior
from models.config import ChainConfig, HierarchicalConfig, MhConfig, SamplerSpec
from models.scenario import Scenario1dConfig, Scenario2dConfig
from samplers.gibbs import sample_sigma2
from samplers.mh import adapt_kappa, mh_step, propose
from samplers.runner import derive_seeds, make_rng, run_chain, run_chains
from scenarios.deblur_1d import build_1d
from scenarios.deblur_2d import build_2d


def _gaussian_model(seed: int = 0) -> PosteriorModel:
    """No penalized coefficients: the posterior is N(mean, sigma^2 (A^T A)^-1)."""
    rng = make_rng(seed)
    matrix = np.eye(3) + 0.2 * rng.random((3, 3))
    return PosteriorModel(
        operator=MatrixOperator(matrix),
        data=rng.standard_normal(3),
        noise_sigma=0.5,
        lambda_value=1.0,
        prior_matrix=np.zeros((0, 3)),
        basis=IdentityBasis(3, penalized=np.zeros(3, dtype=bool)),
    )


def _posterior_moments(model: PosteriorModel):
    matrix = model.operator.to_dense()
    precision = matrix.T @ matrix / model.noise_sigma ** 2
    cov = np.linalg.inv(precision)
    mean = cov @ (matrix.T @ model.data) / model.noise_sigma ** 2
    return mean, cov


def _tv_model(n: int = 15) -> PosteriorModel:
    rng = make_rng(1)
    return PosteriorModel(
        operator=MatrixOperator(rng.random((9, n)) / n),
        data=rng.standard_normal(9) * 0.1,
        noise_sigma=0.05,
        lambda_value=20.0,
        prior_matrix=first_difference_matrix(n),
        basis=StepBasis(n),
    )


def test_proposal_variants_move_expected_components():
    rng = make_rng(3)
    state = np.zeros(20)
    iso = propose(state, MhConfig(variant="iso"), rng, 0.5, 5)
    assert np.count_nonzero(iso) == 20
    ncom = propose(state, MhConfig(variant="ncom"), rng, 0.5, 5)
    assert np.count_nonzero(ncom) == 5
    si = propose(state, MhConfig(variant="si"), rng, 0.5, 5)
    assert np.count_nonzero(si) == 1
    assert not state.any()


def test_n_star_resolution():
    config = MhConfig(variant="ncom")
    assert config.resolve_n_star(127) == 16
    assert config.resolve_n_star(1) == 1
    assert MhConfig(variant="ncom", n_star=50).resolve_n_star(10) == 10


def test_adapt_kappa_bands():
    config = MhConfig()
    assert abs(adapt_kappa(40, 100, 1.0, config) - 1.2) < 1e-15
    assert abs(adapt_kappa(10, 100, 1.0, config) - 0.8) < 1e-15
    assert adapt_kappa(25, 100, 1.0, config) == 1.0
    assert adapt_kappa(35, 100, 1.0, config) == 1.0


def test_mh_steps_climb_toward_the_mode():
    model = _gaussian_model()
    mean, _ = _posterior_moments(model)
    rng = make_rng(4)
    config = MhConfig(variant="iso", kappa=0.05)
    state = mean + 5.0
    start = log_posterior(state, model)
    log_p = start
    for _ in range(300):
        result = mh_step(state, model, config, rng, log_p=log_p)
        state, log_p = result.state, result.log_posterior
        assert log_p == log_posterior(state, model)
    assert log_p > start


def test_mh_adaptation_reaches_target_band():
    model = _gaussian_model()
    spec = SamplerSpec.create("mh-iso", kappa0=50.0, adapt_window=200)
    chain = run_chain(model, spec, ChainConfig(burn_in=4000, samples=2000), seed=5)
    assert chain.complete
    assert chain.final_kappa < 50.0
    assert 0.05 < chain.acceptance_rate < 0.6
    assert chain.unit == "proposal" and chain.updates_per_sample == 1


def test_gibbs_recovers_gaussian_posterior():
    model = _gaussian_model()
    mean, cov = _posterior_moments(model)
    sd = np.sqrt(np.diag(cov))
    for kind, n_o in (("rngibbs", 1), ("sysgibbs", 1), ("sysgibbs", 5)):
        spec = SamplerSpec.create(kind, n_o=n_o)
        chain = run_chain(model, spec, ChainConfig(burn_in=100, samples=6000), seed=6)
        assert chain.complete, chain.error
        assert np.all(np.abs(chain.samples.mean(axis=0) - mean) < 0.1 * sd), kind
        assert np.all(np.abs(chain.samples.std(axis=0) / sd - 1.0) < 0.1), kind


def test_mh_recovers_gaussian_posterior():
    model = _gaussian_model()
    mean, cov = _posterior_moments(model)
    sd = np.sqrt(np.diag(cov))
    spec = SamplerSpec.create("mh-si", kappa0=0.3, adapt=False)
    chain = run_chain(model, spec, ChainConfig(burn_in=2000, samples=60000, thin=5), seed=7)
    assert np.all(np.abs(chain.samples.mean(axis=0) - mean) < 0.15 * sd)


def test_descriptors():
    assert SamplerSpec.create("mh-iso").descriptor() == "MH-Iso"
    assert SamplerSpec.create("mh-ncom").descriptor() == "MH-Ncom"
    assert SamplerSpec.create("rngibbs").descriptor() == "RnGibbs"
    assert SamplerSpec.create("sysgibbs", n_o=7).descriptor() == "SysGibbsO7"
    assert SamplerSpec.create("rngibbs", sigma2_block=True).descriptor() == "RnGibbs+Sigma2"


def test_sample_sigma2_moments():
    model = _gaussian_model()
    config = HierarchicalConfig(alpha=3.0, beta=2.0, enabled=True)
    rng = make_rng(8)
    u = np.zeros(model.n)
    shape = config.alpha + 0.5 * model.k
    scale = 0.5 * float(model.data @ model.data) + config.beta
    draws = np.array([sample_sigma2(u, model, config, rng) for _ in range(20000)])
    assert abs(draws.mean() / (scale / (shape - 1.0)) - 1.0) < 0.03


def test_sample_sigma2_updates_cache():
    model = _gaussian_model()
    cache = build_cache(model, "dense-gram", np.zeros(model.n))
    draw = sample_sigma2(np.zeros(model.n), model, HierarchicalConfig(enabled=True), make_rng(9), cache)
    assert cache.sigma2 == draw
    try:
        sample_sigma2(np.zeros(model.n), model, HierarchicalConfig(enabled=False), make_rng(9))
    except ConfigurationError:
        return
    raise AssertionError("disabled hyperprior must raise")


def test_hierarchical_chain_records_sigma2():
    model = _tv_model()
    spec = SamplerSpec.create("rngibbs", sigma2_block=True)
    chain = run_chain(model, spec, ChainConfig(burn_in=10, samples=40), seed=10)
    assert chain.complete, chain.error
    assert chain.sigma2_trace.shape == (50,)
    assert np.all(chain.sigma2_trace > 0)
    assert chain.log_posterior_trace.shape == (50,)


def test_sigma2_chain_mean_matches_attainable_value():
    n, sigma = 64, 0.1
    x = np.arange(1, n + 1) / (n + 1)
    truth = ((x >= 1.0 / 3.0) & (x <= 2.0 / 3.0)).astype(float)
    model = PosteriorModel(
        operator=MatrixOperator(np.eye(n)),
        data=truth + sigma * make_rng(31).standard_normal(n),
        noise_sigma=sigma,
        lambda_value=30.0,
        prior_matrix=first_difference_matrix(n),
        basis=StepBasis(n),
    )
    spec = SamplerSpec.create("rngibbs", sigma2_block=True, alpha=1.0, beta=1.0)
    chain = run_chain(model, spec, ChainConfig(burn_in=100, samples=2000), seed=32)
    assert chain.complete, chain.error
    mean_sigma2 = chain.sigma2_trace[100:].mean()
    misfit = 0.5 * ((model.data - chain.samples) ** 2).sum(axis=1)
    # E[sigma^2 | u] = (||m - u||^2 / 2 + beta) / (alpha + k/2 - 1)
    denominator = 1.0 + 0.5 * n - 1.0
    target = np.mean((misfit + 1.0) / denominator)
    assert abs(mean_sigma2 / target - 1.0) < 0.1, (mean_sigma2, target)
    assert 0.5 <= np.mean(misfit) / denominator / sigma ** 2 <= 2.0


def test_thinning_and_traces():
    model = _tv_model()
    chain = run_chain(model, SamplerSpec.create("sysgibbs"), ChainConfig(burn_in=5, samples=10, thin=3), seed=11)
    assert chain.samples.shape == (4, model.n)
    assert chain.expected_rows == 4
    assert chain.log_posterior_trace.shape == (15,)
    assert chain.sigma2_trace is None
    assert chain.unit == "sweep" and chain.updates_per_sample == model.n
    assert chain.t_s > 0


def test_initial_state_is_used():
    model = _tv_model()
    init = list(np.linspace(-1.0, 1.0, model.n))
    spec = SamplerSpec.create("mh-si", kappa0=1e-12, adapt=False)
    chain = run_chain(model, spec, ChainConfig(samples=1, init=init), seed=12)
    assert np.allclose(chain.samples[0], init, atol=1e-9)


def test_run_chains_deterministic_and_independent():
    model = _tv_model()
    spec = SamplerSpec.create("rngibbs")
    config = ChainConfig(burn_in=5, samples=20)
    first = run_chains(model, spec, config, n_chains=3, seed=42)
    second = run_chains(model, spec, config, n_chains=3, seed=42, max_workers=1)
    for a, b in zip(first, second):
        assert a.seed == b.seed
        assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(first[0].samples, first[1].samples)
    seeds = derive_seeds(42, 3)
    assert seeds == derive_seeds(42, 3)
    assert len(set(seeds)) == 3
    assert [c.seed for c in first] == seeds


def test_stream_includes_burn_in():
    model = _tv_model()
    with tempfile.TemporaryDirectory() as tmp:
        stream = str(Path(tmp) / "stream.bin")
        chains = run_chains(model, SamplerSpec.create("sysgibbs"),
                            ChainConfig(burn_in=4, samples=6, thin=2, stream_path=stream), n_chains=2, seed=1)
        for i, chain in enumerate(chains):
            header, rows = read_chain(Path(tmp) / f"stream_{i}.bin")
            assert header["rows"] == 10 and header["stride"] == 1
            assert np.array_equal(rows[4::2], chain.samples)
            meta = read_metadata(Path(tmp) / f"stream_{i}.bin")
            assert meta["rows_include_burn_in"] == "true"
            assert meta["descriptor"] == "SysGibbs"


def test_failure_is_captured():
    matrix = np.ones((3, 4))
    matrix[:, 1] = 0.0
    penalized = np.array([True, False, True, True])
    model = PosteriorModel(
        operator=MatrixOperator(matrix), data=np.zeros(3), noise_sigma=1.0, lambda_value=1.0,
        prior_matrix=np.eye(4)[penalized], basis=IdentityBasis(4, penalized=penalized),
    )
    chain = run_chain(model, SamplerSpec.create("rngibbs"), ChainConfig(samples=10), seed=0)
    assert not chain.complete
    assert "ConsistencyError" in chain.error
    assert chain.total == 0 and chain.samples.shape == (0, 4)


def test_gibbs_runs_on_1d_scenarios_with_unobserved_points():
    for L_u in (6, 7):
        bundle = build_1d(Scenario1dConfig(L_u=L_u, seed=3))
        model = bundle.model
        norms = (model.av_dense() ** 2).sum(axis=0)
        assert np.any(norms == 0.0) and not np.any(norms[~model.penalized] == 0.0)
        for kind in ("rngibbs", "sysgibbs"):
            chain = run_chain(model, SamplerSpec.create(kind), ChainConfig(burn_in=2, samples=5), seed=L_u)
            assert chain.complete, (L_u, kind, chain.error)
            assert chain.samples.shape == (5, model.n)
            assert np.all(np.isfinite(chain.samples))


def test_two_chains_agree_on_small_2d_scenario():
    config = Scenario2dConfig(grid=21, blur_sigma=0.08, fine_factor=2, n_spots=3, radius_range=(0.1, 0.2), seed=5)
    bundle = build_2d(config)
    model = bundle.model
    chains = run_chains(model, SamplerSpec.create("rngibbs"), ChainConfig(burn_in=60, samples=240,
                        record_log_posterior=False), n_chains=2, seed=9)
    assert all(chain.complete for chain in chains)
    cm = chains[0].samples.mean(axis=0)
    ratio = np.linalg.norm(model.data - model.operator.apply(cm)) / (model.noise_sigma * np.sqrt(model.k))
    assert 0.6 <= ratio <= 1.4, ratio
    agreement, expected = cm_agreement(chains[0].samples, chains[1].samples)
    assert agreement <= max(0.03, 3.0 * expected), (agreement, expected)


if __name__ == "__main__":
    print("\n" + "=" * 80)
    print("[TEST] SAMPLERS")
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
