"""
Acceptance experiments.

Everything here is marked slow; run with `pytest -m slow`. The property
experiments build their own generators. The trained-model experiments
(reconstruction, upsampling, non-determinism, interpolation, training
moments) share desk generators trained once per module (seed 0, default
2000-step schedule), one per modulation mode.
"""

import math

import numpy as np
import pytest
import torch

from src.core.rng import SeededRng
from src.editing.interpolation import interpolation_suite
from src.editing.pca import apply_edit, compute_pca
from src.inversion.degradation import DegradationOp
from src.inversion.experiments import nondeterminism_experiment, reconstruction_suite
from src.inversion.optimizer import invert, invert_degraded
from src.latent.sampling import estimate_mean_w, sample_correlated_z_batch
from src.models.config import GeneratorConfig, InversionConfig, LatentSpace, ModulationMode, TrainConfig
from src.models.latents import StyleSource
from src.networks.checkpoint import load_checkpoint
from src.networks.discriminator import build_discriminator
from src.networks.modulation import modulate_baseline, modulate_overparam, replicate_rows
from src.networks.synthesis import build_generator, count_latent_params, random_source, sample_images
from src.perception.features import default_extractor
from src.perception.metrics import GaussianStats, fit_stats, frechet_distance, perceptual_distance
from src.training.dataset import SyntheticDataset
from src.training.trainer import train

pytestmark = pytest.mark.slow

N_TARGETS = 20
TARGET_STREAM = 999
DESK_SEED = 0


def _tiny(seed: int):
    G = build_generator(GeneratorConfig.desk(dim=8, rows=8, resolution=8, channels=8), seed=seed)
    with torch.no_grad():
        G.mu_w.copy_(estimate_mean_w(G.mapper, SeededRng(seed + 1), n_samples=2000))
    return G


# -- properties (no checkpoint) --------------------------------------------------

def test_modulation_degeneracy_over_random_shapes():
    rng = np.random.default_rng(0)
    for case in range(200):
        n_out, n_in = (int(v) for v in rng.integers(1, 17, size=2))
        k = int(rng.choice([1, 3]))
        gen = torch.Generator().manual_seed(case)
        theta = torch.randn(n_out, n_in, k, k, generator=gen)
        s = torch.randn(n_in, generator=gen)
        assert torch.equal(modulate_baseline(theta, s).weight,
                           modulate_overparam(theta, replicate_rows(s, n_out)).weight), case


def test_correlated_sampling_statistics():
    Z = sample_correlated_z_batch(SeededRng(0), batch=100_000, rows=2, dim=8).double()
    var = Z.var(dim=0)                                   # [rows, dim]
    centered = Z - Z.mean(dim=0)
    cov = (centered[:, 0] * centered[:, 1]).mean(dim=0)  # [dim]
    assert torch.all((var - 1.0).abs() < 0.02), var
    assert torch.all((cov - 0.5).abs() < 0.02), cov


@pytest.mark.parametrize("seed", range(10))
def test_latent_gradient_against_central_differences(seed):
    config = GeneratorConfig.desk(dim=8, rows=8, resolution=8, channels=8)
    G = build_generator(config, seed=seed).double()
    src = random_source(G, LatentSpace.W_MATRIX, SeededRng(seed))
    latent = src.latent.double()
    target = torch.zeros(config.image_shape, dtype=torch.float64)

    def loss(x):
        return (G(src.with_latent(x)) - target).square().mean()

    x = latent.clone().requires_grad_(True)
    (grad,) = torch.autograd.grad(loss(x), x)

    # h small enough that no leaky-relu kink falls inside the stencil
    h = 1e-6
    coords = np.random.default_rng(seed).choice(latent.numel(), size=20, replace=False)
    with torch.no_grad():
        for idx in coords:
            step = torch.zeros(latent.numel(), dtype=torch.float64)
            step[idx] = h
            step = step.view_as(latent)
            numeric = (loss(latent + step) - loss(latent - step)).item() / (2 * h)
            analytic = grad.view(-1)[idx].item()
            assert abs(analytic - numeric) <= 1e-4 * max(abs(analytic), abs(numeric)) + 1e-9, idx


def test_degeneracy_lattice():
    for case in range(50):
        G = build_generator(GeneratorConfig.desk(dim=8, rows=8, resolution=8, channels=8), seed=case)
        w = random_source(G, LatentSpace.W_VECTOR, SeededRng(case)).latent
        W = random_source(G, LatentSpace.W_MATRIX, SeededRng(case + 1000)).latent
        L, R = G.config.n_layers, G.config.rows
        with torch.no_grad():
            from_w = G(StyleSource(space="w", latent=w))
            from_rows = G(StyleSource(space="W", latent=w.expand(R, -1).clone()))
            from_W = G(StyleSource(space="W", latent=W))
            from_layers = G(StyleSource(space="W_plus", latent=W.expand(L, -1, -1).clone()))
        assert torch.allclose(from_w, from_rows, rtol=0, atol=1e-5), case
        assert torch.allclose(from_W, from_layers, rtol=0, atol=1e-5), case


@pytest.mark.parametrize("keep, expected", [(False, [True] * 500 + [False] * 500), (True, [True] * 1000)])
def test_truncation_schedule(keep, expected):
    G = _tiny(0)
    y = sample_images(G, SeededRng(1), 1)[0]
    calls = []

    def record(step, before, after):
        calls.append(step)
        assert torch.allclose(after, G.mu_w + 0.9 * (before - G.mu_w), atol=1e-6)

    cfg = InversionConfig(space="W", steps=1000, psi=0.9, keep_truncation_throughout=keep)
    trace = invert(G, y, cfg, on_truncate=record)
    assert trace.truncated == expected
    assert calls == [i for i, active in enumerate(expected) if active]


def test_latent_parameter_counts():
    large = GeneratorConfig.desk(dim=512, rows=512, resolution=4, channels=512)
    assert count_latent_params(large, LatentSpace.W_MATRIX) == 512 * 512
    for dim, rows, res in [(8, 8, 8), (16, 32, 16), (64, 64, 32)]:
        config = GeneratorConfig.desk(dim=dim, rows=rows, resolution=res, channels=dim)
        ratio = count_latent_params(config, LatentSpace.W_MATRIX) / count_latent_params(config, LatentSpace.W_PLUS)
        assert ratio == pytest.approx(rows / config.n_layers)


def test_metric_sanity():
    extractor = default_extractor()
    images = torch.rand(64, 3, 16, 16, generator=torch.Generator().manual_seed(0)) * 2 - 1
    stats = fit_stats(images, extractor)
    assert frechet_distance(stats, stats) < 1e-6

    for n in (2, 8, 32):
        four = GaussianStats(mean=np.zeros(n), cov=4.0 * np.eye(n), count=100)
        one = GaussianStats(mean=np.zeros(n), cov=np.eye(n), count=100)
        assert frechet_distance(four, one) == pytest.approx(n, abs=1e-4)

    gen = torch.Generator().manual_seed(1)
    a = torch.rand(100, 3, 16, 16, generator=gen) * 2 - 1
    b = torch.rand(100, 3, 16, 16, generator=gen) * 2 - 1
    ab, ba = perceptual_distance(a, b, extractor), perceptual_distance(b, a, extractor)
    assert torch.all(ab >= 0)
    assert torch.allclose(ab, ba, rtol=1e-6)
    assert torch.all(perceptual_distance(a, a, extractor) == 0)


def test_principal_direction_editing():
    G = _tiny(3)
    basis = compute_pca(G, SeededRng(4), 5000)
    gram = basis.components @ basis.components.T
    assert np.allclose(gram, np.eye(G.config.dim), atol=1e-5)

    w = random_source(G, LatentSpace.W_VECTOR, SeededRng(5))
    W = StyleSource(space="W", latent=w.latent.expand(G.config.rows, -1).clone())
    alpha = 2.0 * basis.std(1)
    with torch.no_grad():
        edited_w = G(apply_edit(w, basis, 1, alpha))
        edited_W = G(apply_edit(W, basis, 1, alpha))
        assert torch.allclose(edited_W, edited_w, rtol=0, atol=1e-5)
        for sign in (1.0, -1.0):
            moved = G(apply_edit(W, basis, 1, sign * alpha))
            assert perceptual_distance(moved, G(W)).item() > 0.0


# -- trained desk generators -----------------------------------------------------

@pytest.fixture(scope="module")
def desk_runs(tmp_path_factory):
    """Trains (once per mode) the default desk generator; returns (checkpoint dir, dataset)."""
    runs = {}

    def run(mode: ModulationMode):
        if mode not in runs:
            config = GeneratorConfig.desk(mode=mode)
            G = build_generator(config, seed=DESK_SEED)
            data = SyntheticDataset(1, 4096, config.resolution)
            out = tmp_path_factory.mktemp(f"desk_{mode.value}")
            result = train(G, build_discriminator(3, DESK_SEED), data, TrainConfig(), SeededRng(DESK_SEED),
                           out_dir=out)
            assert np.isfinite(result.curves[["d_loss", "g_loss"]].to_numpy()).all()
            runs[mode] = (result.checkpoint, data)
        return runs[mode]

    return run


@pytest.fixture(scope="module")
def trained(desk_runs):
    checkpoint, _ = desk_runs(ModulationMode.OVERPARAM)
    return load_checkpoint(checkpoint)


@pytest.fixture(scope="module")
def targets(trained):
    return list(sample_images(trained, SeededRng(0).spawn(TARGET_STREAM), N_TARGETS))


@pytest.fixture(scope="module")
def reconstruction(trained, targets):
    return reconstruction_suite(trained, targets, InversionConfig(steps=1000), SeededRng(0))


def test_reconstruction_ordering(reconstruction):
    median = reconstruction.median_final
    observed = {space: median(space) for space in ("w", "w_plus", "W", "W_plus")}
    assert median("W_plus") <= median("W") < median("w_plus") < median("w"), observed
    assert median("W") <= 0.6 * median("w_plus"), observed


def test_matrix_space_converges_faster(reconstruction):
    assert reconstruction.faster_fraction("W", "w_plus") >= 0.7


def test_upsampling_self_inversion(trained):
    deg = DegradationOp.downsample(4)
    highs = sample_images(trained, SeededRng(1).spawn(TARGET_STREAM), N_TARGETS)
    cfg = InversionConfig(space="W", steps=1000, keep_truncation_throughout=True)
    good = 0
    for high in highs:
        trace = invert_degraded(trained, deg(high), deg, cfg)
        assert all(trace.truncated)
        good += int(trace.final_loss < 0.1 * trace.losses[0])
    assert good >= 18, good


def test_matrix_solutions_are_more_variable(trained, targets):
    cfg = InversionConfig(init="random", psi=1.0, steps=1000)
    spreads = {"w_plus": [], "W": []}
    for i, y in enumerate(targets[:5]):
        report = nondeterminism_experiment(trained, y, 5, cfg, SeededRng(i))
        for space in spreads:
            spreads[space].append(report.spread[space])
    assert np.mean(spreads["W"]) > np.mean(spreads["w_plus"]), spreads


def test_interpolation_realism(trained, targets):
    reference = sample_images(trained, SeededRng(2), 256)
    fid = {}
    for space in (LatentSpace.W_PLUS, LatentSpace.W_MATRIX):
        latents = [invert(trained, y, InversionConfig(space=space, steps=1000)).source for y in targets[:10]]
        report = interpolation_suite(trained, latents, reference)
        assert report.n_pairs == 45
        assert math.isfinite(report.mean_ppl)
        fid[space.value] = report.fid_proxy
    assert math.isfinite(fid["W"])
    assert fid["W"] <= 2.0 * fid["w_plus"], fid


@pytest.mark.parametrize("mode", list(ModulationMode))
def test_training_matches_dataset_moments(desk_runs, mode):
    checkpoint, data = desk_runs(mode)
    G = load_checkpoint(checkpoint)
    images = sample_images(G, SeededRng(3), 256)
    data_mean, data_std = data.channel_stats(256)
    mean_gap = (images.mean(dim=(0, 2, 3)) - data_mean).abs()
    std_gap = (images.std(dim=(0, 2, 3)) - data_std).abs()
    assert torch.all(mean_gap <= 0.15), mean_gap.tolist()
    assert torch.all(std_gap <= 0.15), std_gap.tolist()
