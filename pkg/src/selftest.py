"""
Invariant self-test

A quick battery of property checks on a tiny freshly built generator. It runs
in a few seconds on a CPU and needs no checkpoint, so it is the first thing
to run on a new machine:

    python -m src.main selftest

Each check raises AssertionError (or any exception) on failure; the runner
prints one [PASS]/[FAIL] line per check and returns True iff all passed.
"""

import math
import tempfile
from pathlib import Path
from typing import Callable, List, Tuple

import torch

from src.core.rng import SeededRng, child_seed
from src.core.tensor_io import load_tensor, save_tensor
from src.editing.mixing import style_mix
from src.editing.pca import apply_edit, compute_pca
from src.latent.sampling import sample_correlated_z_batch, truncate
from src.models.config import GeneratorConfig, LatentSpace, ModulationMode
from src.models.latents import StyleSource
from src.networks.checkpoint import load_checkpoint, save_checkpoint
from src.networks.modulation import demodulate, modulate_baseline, modulate_overparam, replicate_rows
from src.networks.synthesis import Generator, build_generator, random_source
from src.perception.metrics import fit_stats, frechet_distance, perceptual_distance
from src.training.losses import gan_losses

SELFTEST_SEED = 1234


def _tiny_generator() -> Generator:
    config = GeneratorConfig.desk(dim=8, rows=8, resolution=8, channels=8)
    return build_generator(config, seed=SELFTEST_SEED)


def check_modulation_degeneracy():
    gen = torch.Generator().manual_seed(SELFTEST_SEED)
    theta = torch.randn(6, 5, 3, 3, generator=gen)
    s = torch.randn(5, generator=gen)
    a = modulate_baseline(theta, s).weight
    b = modulate_overparam(theta, replicate_rows(s, 6)).weight
    assert torch.equal(a, b), "replicated rows differ from baseline modulation"


def check_demodulation_unit_norm():
    gen = torch.Generator().manual_seed(SELFTEST_SEED)
    theta = torch.randn(4, 3, 3, 3, generator=gen)
    S = torch.randn(4, 3, generator=gen)
    w = demodulate(modulate_overparam(theta, S)).weight
    norms = w.flatten(1).norm(dim=1)
    assert torch.allclose(norms, torch.ones_like(norms), atol=1e-5), f"row norms {norms.tolist()}"


def check_truncation_identity():
    W = torch.randn(8, 8, generator=torch.Generator().manual_seed(1))
    mu = torch.randn(8, generator=torch.Generator().manual_seed(2))
    assert torch.equal(truncate(W, mu, 1.0), W), "psi=1 changed the matrix"
    assert torch.allclose(truncate(W, mu, 0.0), mu.expand_as(W)), "psi=0 did not collapse to mu"


def check_correlated_rows():
    Z = sample_correlated_z_batch(SeededRng(SELFTEST_SEED), batch=2000, rows=2, dim=8)
    corr = torch.corrcoef(torch.stack([Z[:, 0].flatten(), Z[:, 1].flatten()]))[0, 1]
    assert abs(Z.var().item() - 1.0) < 0.1, f"entry variance {Z.var().item():.3f}"
    assert abs(corr.item() - 0.5) < 0.1, f"row correlation {corr.item():.3f}, expected 0.5"


def check_shared_layers():
    G = _tiny_generator()
    src = random_source(G, LatentSpace.W_MATRIX, SeededRng(SELFTEST_SEED))
    per_layer = src.latent.unsqueeze(0).expand(G.config.n_layers, -1, -1).clone()
    with torch.no_grad():
        a = G(src)
        b = G(StyleSource(space=LatentSpace.W_MATRIX_PLUS, latent=per_layer))
    assert torch.allclose(a, b, rtol=0, atol=1e-6), "W and layer-repeated W+ disagree"


def check_synthesis_degeneracy():
    G = _tiny_generator()
    w = random_source(G, LatentSpace.W_VECTOR, SeededRng(SELFTEST_SEED)).latent
    with torch.no_grad():
        a = G(StyleSource(space=LatentSpace.W_VECTOR, latent=w))
        b = G(StyleSource(space=LatentSpace.W_MATRIX, latent=w.expand(G.config.rows, -1).clone()))
    assert torch.allclose(a, b, atol=1e-5), f"max diff {(a - b).abs().max().item():.2e}"


def check_tensor_roundtrip():
    t = torch.randn(3, 4, 5, generator=torch.Generator().manual_seed(3))
    with tempfile.TemporaryDirectory() as tmp:
        path = save_tensor(t, Path(tmp) / "t.opt")
        assert torch.equal(load_tensor(path), t), "tensor file did not load back bit-exactly"


def check_checkpoint_roundtrip():
    G = _tiny_generator()
    src = random_source(G, LatentSpace.W_MATRIX, SeededRng(SELFTEST_SEED))
    with tempfile.TemporaryDirectory() as tmp, torch.no_grad():
        loaded = load_checkpoint(save_checkpoint(G, Path(tmp) / "ckpt"))
        assert torch.equal(G(src), loaded(src)), "reloaded generator renders differently"


def check_child_seed():
    assert child_seed(7, 0) == child_seed(7, 0)
    assert child_seed(7, 0) != child_seed(7, 1)
    assert SeededRng(5).normal(4).tolist() == SeededRng(5).normal(4).tolist()


def check_perceptual_identity():
    img = torch.rand(3, 16, 16, generator=torch.Generator().manual_seed(4)) * 2 - 1
    assert float(perceptual_distance(img, img)) == 0.0, "d(x, x) != 0"
    other = img.flip(-1)
    assert math.isclose(float(perceptual_distance(img, other)), float(perceptual_distance(other, img)),
                        rel_tol=1e-6), "distance is not symmetric"


def check_frechet_identity():
    images = torch.rand(96, 3, 16, 16, generator=torch.Generator().manual_seed(5)) * 2 - 1
    stats = fit_stats(images)
    scale = 1.0 + float(stats.cov.trace())
    assert frechet_distance(stats, stats) < 1e-5 * scale, "FD(p, p) is not ~0"


def check_style_mix_boundaries():
    G = _tiny_generator()
    a = random_source(G, LatentSpace.W_MATRIX, SeededRng(1))
    b = random_source(G, LatentSpace.W_MATRIX, SeededRng(2))
    with torch.no_grad():
        content_only = style_mix(G, a, b, G.config.n_layers)
        style_only = style_mix(G, a, b, 0)
        assert torch.allclose(content_only, G(a), rtol=0, atol=1e-6), "c=L is not the content image"
        assert torch.allclose(style_only, G(b), rtol=0, atol=1e-6), "c=0 is not the style image"


def check_pca_basis():
    G = _tiny_generator()
    basis = compute_pca(G, SeededRng(SELFTEST_SEED), 200)
    comps = torch.as_tensor(basis.components)
    gram = comps @ comps.T
    assert torch.allclose(gram, torch.eye(len(comps), dtype=gram.dtype), atol=1e-5), "components not orthonormal"
    assert all(basis.variances[i] >= basis.variances[i + 1] for i in range(len(basis.variances) - 1))
    src = random_source(G, LatentSpace.W_MATRIX, SeededRng(1))
    back = apply_edit(apply_edit(src, basis, 0, 1.5), basis, 0, -1.5)
    assert torch.allclose(back.latent, src.latent, atol=1e-6), "edit is not undone by its negation"


def check_gan_losses():
    g_loss, _ = gan_losses(torch.zeros(4), torch.zeros(4))
    assert math.isclose(g_loss.item(), math.log(2.0), rel_tol=1e-6), f"g_loss(0) = {g_loss.item()}"


def check_baseline_mode_builds():
    config = GeneratorConfig.desk(dim=8, rows=8, resolution=8, channels=8, mode=ModulationMode.BASELINE)
    G = build_generator(config, seed=SELFTEST_SEED)
    with torch.no_grad():
        img = G(random_source(G, LatentSpace.W_VECTOR, SeededRng(1)))
    assert tuple(img.shape) == config.image_shape and torch.isfinite(img).all()


CHECKS: List[Tuple[str, Callable[[], None]]] = [
    ("modulation degeneracy (bit-exact)", check_modulation_degeneracy),
    ("demodulated rows have unit norm", check_demodulation_unit_norm),
    ("truncation psi=1 / psi=0", check_truncation_identity),
    ("correlated Z marginals", check_correlated_rows),
    ("W == layer-repeated W+", check_shared_layers),
    ("all-rows-equal W == w", check_synthesis_degeneracy),
    ("tensor file round trip", check_tensor_roundtrip),
    ("checkpoint round trip", check_checkpoint_roundtrip),
    ("child seeds", check_child_seed),
    ("perceptual distance identity/symmetry", check_perceptual_identity),
    ("Frechet distance FD(p, p) = 0", check_frechet_identity),
    ("style mix boundaries", check_style_mix_boundaries),
    ("PCA basis + edit inverse", check_pca_basis),
    ("GAN loss at zero logits", check_gan_losses),
    ("baseline generator builds", check_baseline_mode_builds),
]


def run_selftest(checks: List[Tuple[str, Callable[[], None]]] = CHECKS) -> bool:
    """Run every check, print the pass/fail table, return True iff all passed."""
    failures = 0
    width = max(len(name) for name, _ in checks)
    for name, fn in checks:
        try:
            fn()
            print(f"  [PASS] {name:<{width}}")
        except Exception as exc:  # a failing check must not stop the table
            failures += 1
            print(f"  [FAIL] {name:<{width}}  {type(exc).__name__}: {exc}")
    print("-" * 60)
    print(f"  {len(checks) - failures}/{len(checks)} checks passed")
    return failures == 0
