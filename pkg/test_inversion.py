"""Inversion optimizer, truncation schedule, degraded inversion, experiments."""

import numpy as np
import pytest
import torch

from src.core.errors import ShapeMismatchError
from src.core.rng import SeededRng
from src.inversion.degradation import DegradationOp
from src.inversion.experiments import midpoint_spread, nondeterminism_experiment, reconstruction_suite
from src.inversion.optimizer import initial_source, invert, invert_degraded
from src.models.config import InversionConfig, LatentSpace
from src.networks.synthesis import mean_source, random_source, sample_images, synthesize


@pytest.fixture
def target(G):
    with torch.no_grad():
        return G(random_source(G, LatentSpace.W_MATRIX, SeededRng(77), correlated=True))


class HookRecorder:
    def __init__(self):
        self.calls = []

    def __call__(self, step, before, after):
        self.calls.append((step, before, after))


def test_truncation_runs_for_first_half(G, target):
    hook = HookRecorder()
    cfg = InversionConfig(space="W", steps=10, psi=0.9)
    trace = invert(G, target, cfg, on_truncate=hook)
    assert [c[0] for c in hook.calls] == [0, 1, 2, 3, 4]
    assert trace.truncated == [True] * 5 + [False] * 5
    assert trace.truncation_disabled_at == 5
    assert trace.steps == 10


def test_truncation_is_a_projection_toward_mean(G, target):
    hook = HookRecorder()
    invert(G, target, InversionConfig(space="W", steps=4, psi=0.9), on_truncate=hook)
    for _, before, after in hook.calls:
        expected = G.mu_w + 0.9 * (before - G.mu_w)
        assert torch.allclose(after, expected, atol=1e-6)


def test_no_truncation_when_psi_is_one(G, target):
    hook = HookRecorder()
    trace = invert(G, target, InversionConfig(space="W", steps=4, psi=1.0), on_truncate=hook)
    assert hook.calls == []
    assert trace.truncation_disabled_at == 0


def test_truncation_active_schedule():
    cfg = InversionConfig(steps=1000)
    assert cfg.truncation_active(499) and not cfg.truncation_active(500)
    assert InversionConfig(steps=1000, keep_truncation_throughout=True).truncation_active(999)
    assert not InversionConfig(psi=1.0, keep_truncation_throughout=True).truncation_active(0)


@pytest.mark.parametrize("space", list(LatentSpace))
def test_self_inversion_reduces_loss(G, target, space):
    trace = invert(G, target, InversionConfig(space=space, steps=40))
    assert trace.final_loss < trace.losses[0]
    assert trace.source.space == space
    assert trace.image.shape == target.shape
    assert np.isfinite(trace.losses).all()


def test_inversion_starts_at_mean_latent(G, target):
    hook = HookRecorder()
    invert(G, target, InversionConfig(space="W_plus", steps=2), on_truncate=hook)
    first_before = hook.calls[0][1]
    assert torch.allclose(first_before, G.mu_w.expand_as(first_before))


def test_inversion_is_deterministic(G, target):
    cfg = InversionConfig(space="W", steps=6)
    a, b = invert(G, target, cfg), invert(G, target, cfg)
    assert a.losses == b.losses
    assert torch.equal(a.source.latent, b.source.latent)


def test_random_init_needs_rng(G, target):
    with pytest.raises(ValueError):
        invert(G, target, InversionConfig(steps=2, init="random"))
    trace = invert(G, target, InversionConfig(steps=2, init="random"), rng=SeededRng(1))
    assert trace.steps == 2


def test_inversion_rejects_wrong_target_shape(G):
    with pytest.raises(ShapeMismatchError):
        invert(G, torch.zeros(3, 4, 4), InversionConfig(steps=2))


def test_inversion_leaves_generator_untouched(G, target):
    before = {k: v.clone() for k, v in G.state_dict().items()}
    invert(G, target, InversionConfig(steps=3))
    for key, value in G.state_dict().items():
        assert torch.equal(value, before[key]), key
    assert all(p.grad is None for p in G.parameters())


def test_trace_frame(G, target):
    frame = invert(G, target, InversionConfig(steps=4)).to_frame()
    assert list(frame.columns) == ["step", "loss", "truncation_active"]
    assert len(frame) == 4


def test_inversion_from_the_optimum_stays_put(G):
    start = mean_source(G, LatentSpace.W_MATRIX)
    with torch.no_grad():
        y = synthesize(G, start)
    trace = invert(G, y, InversionConfig(space="W", steps=5))
    assert trace.losses[0] < 1e-6
    assert (trace.source.latent - start.latent).abs().max().item() < 1e-3


@pytest.mark.parametrize("space", [LatentSpace.W_PLUS, LatentSpace.W_MATRIX])
def test_random_start_uses_correlated_rows(G, space):
    cfg = InversionConfig(space=space, init="random")
    start = initial_source(G, cfg, SeededRng(3))
    expected = random_source(G, space, SeededRng(3), correlated=True)
    assert torch.equal(start.latent, expected.latent)


# -- degradation -----------------------------------------------------------------

def test_degradation_shapes():
    down = DegradationOp.downsample(4)
    assert down.output_shape((3, 32, 32)) == (3, 8, 8)
    assert down(torch.zeros(2, 3, 32, 32)).shape == (2, 3, 8, 8)
    assert DegradationOp.identity()(torch.ones(3, 4, 4)).shape == (3, 4, 4)
    with pytest.raises(ShapeMismatchError):
        DegradationOp.downsample(3).output_shape((3, 8, 8))
    with pytest.raises(ValueError):
        DegradationOp(kind="identity", factor=2)


def test_nearest_downsampling_picks_pixels():
    image = torch.arange(16.0).view(1, 4, 4)
    assert DegradationOp.downsample(2)(image).view(-1).tolist() == [0.0, 2.0, 8.0, 10.0]


def test_identity_degradation_matches_plain_inversion(G, target):
    cfg = InversionConfig(space="W", steps=6, keep_truncation_throughout=True)
    plain = invert(G, target, cfg)
    degraded = invert_degraded(G, target, DegradationOp.identity(), cfg)
    assert degraded.losses == plain.losses
    assert degraded.truncated == plain.truncated
    assert torch.equal(degraded.source.latent, plain.source.latent)


def test_degraded_inversion_keeps_truncation_throughout(G, target):
    deg = DegradationOp.downsample(2)
    y_low = deg(target)
    cfg = InversionConfig(space="W", steps=6, keep_truncation_throughout=False)
    trace = invert_degraded(G, y_low, deg, cfg)
    assert trace.truncated == [True] * 6
    assert trace.truncation_disabled_at is None
    assert trace.image.shape == target.shape


def test_degraded_inversion_reduces_low_resolution_loss(G, target):
    deg = DegradationOp.downsample(2)
    trace = invert_degraded(G, deg(target), deg, InversionConfig(space="W", steps=40,
                                                                  keep_truncation_throughout=True))
    assert trace.final_loss < trace.losses[0]


# -- experiments -----------------------------------------------------------------

def test_reconstruction_suite(G):
    targets = sample_images(G, SeededRng(5), 3)
    report = reconstruction_suite(G, list(targets), InversionConfig(steps=4), SeededRng(1))
    assert set(report.losses) == {"w", "w_plus", "W", "W_plus"}
    assert report.losses["W"].shape == (3, 4)
    assert report.latent_params["W_plus"] == 128
    assert all(v is not None and v >= 0 for v in report.fid_proxy.values())
    assert 0.0 <= report.faster_fraction("W", "w_plus") <= 1.0
    assert len(report.summary_frame()) == 4
    assert len(report.curves_frame()) == 4 * 4


def test_reconstruction_suite_threads_match_serial(G):
    targets = list(sample_images(G, SeededRng(5), 2))
    cfg = InversionConfig(steps=3)
    serial = reconstruction_suite(G, targets, cfg, SeededRng(1), spaces=[LatentSpace.W_MATRIX])
    threaded = reconstruction_suite(G, targets, cfg, SeededRng(1), spaces=[LatentSpace.W_MATRIX], threads=2)
    assert np.allclose(serial.losses["W"], threaded.losses["W"], rtol=1e-6)


def test_steps_to_reach(G):
    targets = list(sample_images(G, SeededRng(5), 2))
    report = reconstruction_suite(G, targets, InversionConfig(steps=3), SeededRng(1),
                                  spaces=[LatentSpace.W_VECTOR])
    assert report.steps_to_reach("w", np.inf) == [0, 0]
    assert report.steps_to_reach("w", -1.0) == [None, None]


def test_nondeterminism_requires_unregularized_random_starts(G, target):
    with pytest.raises(ValueError):
        nondeterminism_experiment(G, target, 2, InversionConfig(steps=2), SeededRng(0))
    with pytest.raises(ValueError):
        nondeterminism_experiment(G, target, 2, InversionConfig(steps=2, init="random"), SeededRng(0))


def test_nondeterminism_report(G, target):
    cfg = InversionConfig(steps=3, init="random", psi=1.0)
    report = nondeterminism_experiment(G, target, 3, cfg, SeededRng(0))
    assert set(report.spread) == {"w_plus", "W"}
    assert report.n_midpoints == 3
    assert all(v >= 0 for v in report.spread.values())
    assert len(report.to_frame()) == 2


def test_same_seed_restarts_have_no_spread(G, target):
    cfg = InversionConfig(steps=3, init="random", psi=1.0)
    report = nondeterminism_experiment(G, target, 3, cfg, SeededRng(0), spaces=[LatentSpace.W_MATRIX],
                                       same_seed=True)
    assert report.spread["W"] == pytest.approx(0.0, abs=1e-8)


def test_midpoint_spread_needs_two_midpoints(G):
    solutions = [random_source(G, LatentSpace.W_MATRIX, SeededRng(i)).latent for i in range(2)]
    assert midpoint_spread(G, solutions, LatentSpace.W_MATRIX) == (0.0, 1)
