"""
OverparamGAN - overparameterized StyleGAN latent spaces at desk scale

Command-line entry point. Every subcommand goes through the same steps:
1. Merge built-in defaults, an optional --config JSON file and the flags
2. Write manifest.json into --out-dir before any real work starts
3. Run the experiment, printing [OK] lines as outputs are written
4. Rewrite the manifest with the output paths and the final status

Run as:  python -m src.main <subcommand> [flags]     (see --help of each)

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import torch
from pydantic import ValidationError

from src.adapters.config_loader import (generator_config, inversion_config, load_config_file,
                                        merge_settings, train_config)
from src.adapters.image_loader import load_source, load_target
from src.core.errors import OverparamError
from src.core.images import export_png, make_grid
from src.core.rng import MAX_SEED, SeededRng, child_seed
from src.core.tensor_io import EXTENSION, save_tensor
from src.editing.interpolation import interpolation_suite, pair_midpoints
from src.editing.mixing import default_crossover, style_mix
from src.editing.pca import apply_edit, compute_pca, edit_sweep, load_basis, save_basis
from src.exporters.workbook_export import MetricsWorkbookExporter, write_tables
from src.inversion.degradation import DegradationOp
from src.inversion.experiments import nondeterminism_experiment, reconstruction_suite
from src.inversion.optimizer import invert, invert_degraded
from src.latent.sampling import truncate
from src.models.config import LatentSpace
from src.models.manifest import RunManifest
from src.networks.checkpoint import checkpoint_hash, load_checkpoint
from src.networks.discriminator import build_discriminator
from src.networks.mapper import benchmark_mapping
from src.networks.synthesis import Generator, build_generator, native_space, random_source, sample_images
from src.selftest import run_selftest
from src.training.dataset import SyntheticDataset
from src.training.trainer import train

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    """Bad or missing command-line input discovered after parsing."""


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# defaults (lowest priority; --config file and flags override them)
# ---------------------------------------------------------------------------

ARCH_DEFAULTS = {"dim": 64, "rows": None, "resolution": 32, "channels": 32, "mode": "overparam"}
INVERSION_DEFAULTS = {"space": "W", "steps": 1000, "lr": 0.05, "psi": 0.9, "disable_at": 0.5,
                      "keep_trunc": False, "init": "mean_w", "perceptual_weight": 1.0, "pixel_weight": 0.0}

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "train": {**ARCH_DEFAULTS, "steps": 2000, "batch": 16, "dataset_size": 4096, "style_mixing_prob": 0.9},
    "generate": {"n": 4, "psi": 1.0},
    "invert": dict(INVERSION_DEFAULTS),
    "upsample": {**INVERSION_DEFAULTS, "factor": 4},
    "mix": {"crossover": None, "content": None, "style": None, "content_space": None, "style_space": None},
    "pca": {"samples": 10_000},
    "edit": {"component": 0, "alphas": "-2,-1,0,1,2", "source": None, "space": None, "basis": None},
    "interp": {"n_latents": 10, "space": None, "reference_size": 256, "segments": 5},
    "metrics": {**INVERSION_DEFAULTS, "n_targets": 20, "spaces": "w,wplus,W,Wplus", "benchmark": True},
    "nondet": {**INVERSION_DEFAULTS, "restarts": 8, "spaces": "wplus,W", "psi": 1.0, "init": "random"},
    "selftest": {},
}

NEEDS_CHECKPOINT = {"generate", "invert", "upsample", "mix", "pca", "edit", "interp", "metrics", "nondet"}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_arch_flags(p: argparse.ArgumentParser):
    p.add_argument("--mode", choices=["baseline", "overparam"], help="modulation mode (default overparam)")
    p.add_argument("--dim", type=int, help="latent size D (default 64)")
    p.add_argument("--rows", type=int, help="latent rows R (default D)")
    p.add_argument("--resolution", type=int, help="output resolution, power of two (default 32)")
    p.add_argument("--channels", type=int, help="synthesis channel width, capped at R (default 32)")


def _add_inversion_flags(p: argparse.ArgumentParser):
    p.add_argument("--space", help="target space: w, wplus, W or Wplus (default W)")
    p.add_argument("--steps", type=int, help="optimization steps (default 1000)")
    p.add_argument("--lr", type=float, help="Adam learning rate (default 0.05)")
    p.add_argument("--psi", type=float, help="truncation factor, 1 disables truncation (default 0.9)")
    p.add_argument("--disable-at", type=float, help="fraction of steps after which truncation stops (default 0.5)")
    p.add_argument("--keep-trunc", action="store_true", help="keep truncation for every step")
    p.add_argument("--init", choices=["mean_w", "random"], help="initial latent (default mean_w)")
    p.add_argument("--pixel-weight", type=float, help="weight of the pixel MSE term (default 0)")
    p.add_argument("--perceptual-weight", type=float, help="weight of the perceptual term (default 1)")


def build_parser() -> CliParser:
    parser = CliParser(prog="overparamgan", description="Overparameterized StyleGAN latent spaces at desk scale.")
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file supplying any flag of the subcommand")
    common.add_argument("--seed", type=int, help="root seed (drawn and recorded when omitted)")
    common.add_argument("--out-dir", help="output directory (default runs/<subcommand>)")
    common.add_argument("--threads", type=int, help="worker threads (default 1, deterministic)")
    common.add_argument("--verbose", action="store_true", help="log progress at INFO level")

    ckpt = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    ckpt.add_argument("--checkpoint", help="generator checkpoint directory (required)")

    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")

    def add(name: str, help_text: str, with_checkpoint: bool = True) -> argparse.ArgumentParser:
        parents = [common, ckpt] if with_checkpoint else [common]
        return sub.add_parser(name, help=help_text, description=help_text, parents=parents,
                              argument_default=argparse.SUPPRESS)

    p = add("train", "Train a generator on the synthetic dataset.", with_checkpoint=False)
    _add_arch_flags(p)
    p.add_argument("--steps", type=int, help="training steps (default 2000)")
    p.add_argument("--batch", type=int, help="batch size (default 16)")
    p.add_argument("--dataset-size", type=int, help="synthetic dataset size (default 4096)")
    p.add_argument("--style-mixing-prob", type=float, help="style mixing probability (default 0.9)")

    p = add("generate", "Generate images from random latents.")
    p.add_argument("-n", type=int, help="number of images (default 4)")
    p.add_argument("--psi", type=float, help="truncation factor (default 1, no truncation)")

    p = add("invert", "Invert a target image into a latent space.")
    p.add_argument("--target", help="target PNG (required)")
    _add_inversion_flags(p)

    p = add("upsample", "Upsample a low-resolution image by inversion (truncation kept throughout).")
    p.add_argument("--target", help="low-resolution PNG (required)")
    p.add_argument("--factor", type=int, help="downsampling factor between output and target (default 4)")
    _add_inversion_flags(p)

    p = add("mix", "Style mixing: early layers from content, the rest from style.")
    p.add_argument("--content", help=f"content latent ({EXTENSION}); random when omitted")
    p.add_argument("--style", help=f"style latent ({EXTENSION}); random when omitted")
    p.add_argument("--content-space", help="space of --content (default: generator's native space)")
    p.add_argument("--style-space", help="space of --style (default: generator's native space)")
    p.add_argument("--crossover", type=int, help="first layer taken from style (default round(L*10/14))")

    p = add("pca", "Principal components of W.")
    p.add_argument("--samples", type=int, help="number of w samples (default 10000)")

    p = add("edit", "Move a latent along a principal component.")
    p.add_argument("--basis", help="PCA basis directory written by `pca` (required)")
    p.add_argument("--component", type=int, help="component index (default 0)")
    p.add_argument("--alphas", help="comma-separated offsets in standard deviations (default -2,-1,0,1,2)")
    p.add_argument("--source", help=f"latent to edit ({EXTENSION}); random when omitted")
    p.add_argument("--space", help="space of --source (default: generator's native space)")

    p = add("interp", "Midpoint realism and path length over all latent pairs.")
    p.add_argument("--n-latents", type=int, help="number of random latents (default 10)")
    p.add_argument("--space", help="latent space (default: generator's native space)")
    p.add_argument("--reference-size", type=int, help="generated reference images (default 256)")
    p.add_argument("--segments", type=int, help="path segments per pair (default 5)")

    p = add("metrics", "Reconstruction comparison of the four spaces on held-out samples.")
    p.add_argument("--n-targets", type=int, help="number of self-generated targets (default 20)")
    p.add_argument("--spaces", help="comma-separated spaces (default w,wplus,W,Wplus)")
    p.add_argument("--no-benchmark", dest="benchmark", action="store_false",
                   help="skip the batched-vs-looped mapping benchmark")
    _add_inversion_flags(p)

    p = add("nondet", "Spread of midpoints between repeated unregularized inversions.")
    p.add_argument("--restarts", type=int, help="independent inversions per space (default 8)")
    p.add_argument("--spaces", help="comma-separated spaces (default wplus,W)")
    p.add_argument("--target", help="target PNG; a held-out sample when omitted")
    _add_inversion_flags(p)

    add("selftest", "Run the invariant suite and print a pass/fail table.", with_checkpoint=False)
    return parser


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _parse_spaces(value) -> List[LatentSpace]:
    names = value.split(",") if isinstance(value, str) else list(value)
    return [LatentSpace.parse(n.strip()) for n in names if str(n).strip()]


def _parse_floats(value) -> List[float]:
    if isinstance(value, str):
        return [float(v) for v in value.split(",") if v.strip()]
    return [float(v) for v in value]


def _space_or_native(value: Optional[str], G: Generator) -> LatentSpace:
    return LatentSpace.parse(value) if value else native_space(G.config)


def _require(settings: Dict[str, Any], *keys: str):
    for key in keys:
        if settings.get(key) in (None, ""):
            raise UsageError(f"--{key.replace('_', '-')} is required")


def _draw_seed() -> int:
    return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0]) % (MAX_SEED + 1)


class RunContext:
    """What a subcommand handler gets: settings, root rng, output dir, manifest."""

    def __init__(self, settings: Dict[str, Any], manifest: RunManifest, out_dir: Path):
        self.settings = settings
        self.manifest = manifest
        self.out_dir = out_dir
        self.rng = SeededRng(manifest.seed)
        self.threads = int(settings["threads"])
        self._generator: Optional[Generator] = None

    @property
    def G(self) -> Generator:
        if self._generator is None:
            self._generator = load_checkpoint(self.settings["checkpoint"])
        return self._generator

    def output(self, name: str) -> Path:
        return self.manifest.add_output(self.out_dir / name)

    def png(self, image: torch.Tensor, name: str) -> Path:
        path = export_png(image.clamp(-1, 1), self.output(name))
        print(f"  [OK] {path}")
        return path

    def tensor(self, t: torch.Tensor, name: str) -> Path:
        path = save_tensor(t, self.output(name))
        print(f"  [OK] {path}")
        return path

    def tables(self, tables: Dict[str, Any], workbook: Optional[str] = None, title: str = ""):
        for path in write_tables(tables, self.out_dir):
            self.manifest.add_output(path)
            print(f"  [OK] {path}")
        if workbook:
            path = MetricsWorkbookExporter().export(tables, self.output(workbook), title=title)
            print(f"  [OK] {path}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_train(ctx: RunContext):
    s = ctx.settings
    gcfg = generator_config(s)
    tcfg = train_config({**s, "dataset_size": int(s["dataset_size"])})
    seed = ctx.manifest.seed
    G = build_generator(gcfg, seed=child_seed(seed, 0) % 2**63)
    D = build_discriminator(gcfg.image_channels, seed=child_seed(seed, 1) % 2**63)
    data = SyntheticDataset(child_seed(seed, 2), tcfg.dataset_size, gcfg.resolution, gcfg.image_channels)

    print(f"  Training {gcfg.modulation_mode.value} generator: D={gcfg.dim}, R={gcfg.rows}, "
          f"L={gcfg.n_layers}, {gcfg.resolution}x{gcfg.resolution}, {tcfg.steps} steps")
    result = train(G, D, data, tcfg, ctx.rng.spawn(3), out_dir=ctx.out_dir, threads=ctx.threads)

    for name in ("loss_curves.csv", "fid_curve.csv", "checkpoint", "samples"):
        ctx.output(name)
    ctx.manifest.checkpoint_hash = checkpoint_hash(result.checkpoint)
    last = result.curves.iloc[-1] if len(result.curves) else None
    if last is not None:
        print(f"  [OK] final d_loss {last['d_loss']:.4f}, g_loss {last['g_loss']:.4f}")
    print(f"  [OK] checkpoint saved to: {result.checkpoint}")


def cmd_generate(ctx: RunContext):
    G, n, psi = ctx.G, int(ctx.settings["n"]), float(ctx.settings["psi"])
    space = native_space(G.config)
    for i in range(n):
        src = random_source(G, space, ctx.rng.spawn(i), correlated=True)
        if psi < 1.0:
            src = src.with_latent(truncate(src.latent, G.mu_w, psi))
        with torch.no_grad():
            image = G(src)
        ctx.png(image, f"sample_{i:03d}.png")
        ctx.tensor(src.latent, f"sample_{i:03d}_{space.value}{EXTENSION}")


def _write_trace(ctx: RunContext, trace, prefix: str):
    ctx.tables({f"{prefix}_trace": trace.to_frame()})
    ctx.png(trace.image, f"{prefix}.png")
    ctx.tensor(trace.source.latent, f"{prefix}_{trace.space.value}{EXTENSION}")
    print(f"  [OK] loss {trace.losses[0]:.5f} -> {trace.final_loss:.5f} over {trace.steps} steps")


def cmd_invert(ctx: RunContext):
    s = ctx.settings
    _require(s, "target")
    cfg = inversion_config(s)
    y = load_target(s["target"], ctx.G.config.resolution)
    trace = invert(ctx.G, y, cfg, rng=ctx.rng)
    _write_trace(ctx, trace, "inverted")


def cmd_upsample(ctx: RunContext):
    s = ctx.settings
    _require(s, "target")
    deg = DegradationOp.downsample(int(s["factor"]))
    cfg = inversion_config(s, keep_truncation=True)
    res = ctx.G.config.resolution
    if res % deg.factor:
        raise UsageError(f"--factor {deg.factor} does not divide the generator resolution {res}")
    y_low = load_target(s["target"], res // deg.factor)
    trace = invert_degraded(ctx.G, y_low, deg, cfg, rng=ctx.rng)
    _write_trace(ctx, trace, "upsampled")
    ctx.png(deg(trace.image), "upsampled_downsampled.png")


def cmd_mix(ctx: RunContext):
    s, G = ctx.settings, ctx.G
    L = G.config.n_layers

    def source(key: str, index: int):
        if s.get(key):
            return load_source(s[key], _space_or_native(s.get(f"{key}_space"), G), G.config)
        return random_source(G, native_space(G.config), ctx.rng.spawn(index), correlated=True)

    content, style = source("content", 0), source("style", 1)
    crossover = s.get("crossover")
    crossover = default_crossover(L) if crossover is None else int(crossover)
    if not 0 <= crossover <= L:
        raise UsageError(f"--crossover must be in [0, {L}], got {crossover}")

    with torch.no_grad():
        ctx.png(G(content), "content.png")
        ctx.png(G(style), "style.png")
    ctx.png(style_mix(G, content, style, crossover), f"mixed_c{crossover}.png")
    sweep = [style_mix(G, content, style, c) for c in range(L, -1, -1)]
    ctx.png(make_grid([im.clamp(-1, 1) for im in sweep], ncols=len(sweep)), "mix_sweep.png")


def cmd_pca(ctx: RunContext):
    G = ctx.G
    basis = compute_pca(G, ctx.rng, int(ctx.settings["samples"]))
    path = save_basis(basis, ctx.output("pca_basis"))
    print(f"  [OK] basis of rank {basis.rank}/{G.config.dim} saved to {path}")
    frame = pd.DataFrame({"component": np.arange(len(basis.variances)), "variance": basis.variances,
                          "explained": basis.variances / max(basis.variances.sum(), 1e-30)})
    ctx.tables({"pca_variances": frame})


def cmd_edit(ctx: RunContext):
    s, G = ctx.settings, ctx.G
    _require(s, "basis")
    basis = load_basis(s["basis"])
    k = int(s["component"])
    if not 0 <= k < len(basis.components):
        raise UsageError(f"--component must be in [0, {len(basis.components)}), got {k}")
    space = _space_or_native(s.get("space"), G)
    if s.get("source"):
        src = load_source(s["source"], space, G.config)
    else:
        src = random_source(G, space, ctx.rng, correlated=True)

    sigma = basis.std(k)
    alphas = [a * sigma for a in _parse_floats(s["alphas"])]
    images = edit_sweep(G, src, basis, k, alphas)
    ctx.png(make_grid([im.clamp(-1, 1) for im in images], ncols=len(alphas)), f"edit_pc{k}.png")
    for a, image in zip(_parse_floats(s["alphas"]), images):
        ctx.png(image, f"edit_pc{k}_{a:+.2f}sd.png")
    ctx.tensor(apply_edit(src, basis, k, alphas[-1]).latent, f"edit_pc{k}_last_{space.value}{EXTENSION}")


def cmd_interp(ctx: RunContext):
    s, G = ctx.settings, ctx.G
    space = _space_or_native(s.get("space"), G)
    n = int(s["n_latents"])
    if n < 2:
        raise UsageError(f"--n-latents must be >= 2, got {n}")
    latents = [random_source(G, space, ctx.rng.spawn(i), correlated=True) for i in range(n)]
    reference = sample_images(G, ctx.rng.spawn(n), int(s["reference_size"]))
    report = interpolation_suite(G, latents, reference, n_segments=int(s["segments"]))
    ctx.tables({"interpolation": report.to_frame()}, workbook="interpolation.xlsx", title="Interpolation")
    mids = pair_midpoints(G, latents)
    ctx.png(make_grid([im.clamp(-1, 1) for im in mids[:64]]), "midpoints.png")
    fid = "n/a" if report.fid_proxy is None else f"{report.fid_proxy:.4f}"
    print(f"  [OK] {report.n_pairs} pairs: midpoint FID proxy {fid}, mean PPL {report.mean_ppl:.5f}")


def _held_out_targets(ctx: RunContext, n: int) -> torch.Tensor:
    # stream 999 is never used for latents elsewhere in a run
    return sample_images(ctx.G, ctx.rng.spawn(999), n)


def cmd_metrics(ctx: RunContext):
    s, G = ctx.settings, ctx.G
    spaces = _parse_spaces(s["spaces"])
    cfg = inversion_config(s)
    targets = _held_out_targets(ctx, int(s["n_targets"]))
    report = reconstruction_suite(G, targets, cfg, ctx.rng, spaces=spaces, threads=ctx.threads)

    tables = {"reconstruction_summary": report.summary_frame(), "reconstruction_curves": report.curves_frame()}
    if s.get("benchmark"):
        Z = ctx.rng.normal((G.config.rows, G.config.dim))
        timings = benchmark_mapping(G.mapper, G.projections, Z)
        tables["mapping_benchmark"] = pd.DataFrame([timings])
    ctx.tables(tables, workbook="metrics.xlsx", title="Reconstruction metrics")

    for space in spaces:
        print(f"  [OK] {space.value:7s} median final loss {report.median_final(space.value):.5f}")
    names = [sp.value for sp in spaces]
    if "W" in names and "w_plus" in names:
        print(f"  [OK] W reaches the w+ median faster on {report.faster_fraction('W', 'w_plus'):.0%} of targets")


def cmd_nondet(ctx: RunContext):
    s, G = ctx.settings, ctx.G
    if s.get("target"):
        y = load_target(s["target"], G.config.resolution)
    else:
        y = _held_out_targets(ctx, 1)[0]
    cfg = inversion_config(s)
    report = nondeterminism_experiment(G, y, int(s["restarts"]), cfg, ctx.rng,
                                       spaces=_parse_spaces(s["spaces"]))
    ctx.tables({"nondeterminism": report.to_frame()})
    for space, value in report.spread.items():
        print(f"  [OK] {space:7s} midpoint spread {value:.5f}")


def cmd_selftest(ctx: RunContext) -> int:
    ok = run_selftest()
    return EXIT_OK if ok else EXIT_RUNTIME


COMMANDS: Dict[str, Callable[[RunContext], Optional[int]]] = {
    "train": cmd_train,
    "generate": cmd_generate,
    "invert": cmd_invert,
    "upsample": cmd_upsample,
    "mix": cmd_mix,
    "pca": cmd_pca,
    "edit": cmd_edit,
    "interp": cmd_interp,
    "metrics": cmd_metrics,
    "nondet": cmd_nondet,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    flags = vars(args)
    command = flags.pop("command")
    try:
        file_values = load_config_file(flags["config"]) if flags.get("config") else None
        base = {"out_dir": f"runs/{command}", "threads": 1, "verbose": False, "seed": None,
                "checkpoint": None}
        settings = merge_settings({**base, **DEFAULTS[command]}, file_values, flags)
        settings.pop("config", None)
        if command in NEEDS_CHECKPOINT:
            _require(settings, "checkpoint")
        if int(settings["threads"]) < 1:
            raise UsageError(f"--threads must be >= 1, got {settings['threads']}")
        if settings["seed"] is not None and not 0 <= int(settings["seed"]) <= MAX_SEED:
            raise UsageError(f"--seed must be in [0, 2**64), got {settings['seed']}")
    except (UsageError, ValueError, FileNotFoundError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(level=logging.INFO if settings["verbose"] else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    torch.set_num_threads(int(settings["threads"]))

    seed_auto = settings["seed"] is None
    if seed_auto:
        settings["seed"] = _draw_seed()
    out_dir = Path(settings["out_dir"])
    manifest = RunManifest(subcommand=command, config=settings, seed=int(settings["seed"]),
                           seed_auto=seed_auto, threads=int(settings["threads"]))

    print("=" * 60)
    print(f"  OVERPARAMGAN - {command}")
    print("=" * 60)

    try:
        if settings.get("checkpoint"):
            manifest.checkpoint_hash = checkpoint_hash(settings["checkpoint"])
        manifest.write(out_dir)
        print(f"  Seed: {manifest.seed}{' (auto)' if seed_auto else ''}   Output: {out_dir}")
        code = COMMANDS[command](RunContext(settings, manifest, out_dir)) or EXIT_OK
    except (UsageError, ValidationError) as exc:
        print(f"  [X] {exc}", file=sys.stderr)
        manifest.finish("failed", str(exc)).write(out_dir)
        return EXIT_USAGE
    except (OverparamError, OSError, RuntimeError, ValueError) as exc:
        logger.debug("run failed", exc_info=True)
        print(f"  [X] {type(exc).__name__}: {exc}", file=sys.stderr)
        manifest.finish("failed", f"{type(exc).__name__}: {exc}").write(out_dir)
        return EXIT_RUNTIME

    manifest.finish("ok" if code == EXIT_OK else "failed").write(out_dir)
    print("\n" + "=" * 60)
    print(f"  [{'SUCCESS' if code == EXIT_OK else 'FAILED'}] {command} finished")
    print("=" * 60)
    return code


if __name__ == "__main__":
    sys.exit(main())
