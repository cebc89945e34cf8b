"""Command-line runs end to end on a tiny checkpoint, plus config and export helpers."""

import json

import pandas as pd
import pytest
import torch
from openpyxl import load_workbook

from src.adapters.config_loader import (generator_config, inversion_config, load_config_file,
                                        merge_settings, train_config)
from src.adapters.image_loader import load_source, load_targets
from src.core.errors import ShapeMismatchError
from src.core.images import export_png
from src.core.rng import SeededRng
from src.core.tensor_io import save_tensor
from src.exporters.workbook_export import MetricsWorkbookExporter
from src.main import main
from src.models.config import LatentSpace
from src.networks.checkpoint import save_checkpoint
from src.networks.synthesis import sample_images


@pytest.fixture
def checkpoint(G, tmp_path):
    return str(save_checkpoint(G, tmp_path / "ckpt"))


@pytest.fixture
def target_png(G, tmp_path):
    image = sample_images(G, SeededRng(31), 1)[0]
    return str(export_png(image.clamp(-1, 1), tmp_path / "target.png"))


def run(*argv) -> int:
    return main([str(a) for a in argv])


def manifest(out_dir):
    return json.loads((out_dir / "manifest.json").read_text())


# -- usage -----------------------------------------------------------------------

def test_selftest_passes(tmp_path):
    assert run("selftest", "--out-dir", tmp_path) == 0
    assert manifest(tmp_path)["status"] == "ok"


def test_unknown_flag_is_usage_error(tmp_path):
    assert run("generate", "--bogus", "--out-dir", tmp_path) == 1


def test_missing_checkpoint_is_named(tmp_path, capsys):
    assert run("generate", "--out-dir", tmp_path) == 1
    assert "--checkpoint is required" in capsys.readouterr().err


@pytest.mark.parametrize("flags", [["--seed", "-1"], ["--threads", "0"]])
def test_bad_common_flags(checkpoint, tmp_path, flags):
    assert run("generate", "--checkpoint", checkpoint, "--out-dir", tmp_path, *flags) == 1


def test_missing_checkpoint_directory_is_runtime_error(tmp_path):
    out = tmp_path / "out"
    assert run("generate", "--checkpoint", tmp_path / "nope", "--out-dir", out) == 2
    assert manifest(out)["status"] == "failed"


def test_missing_target_is_usage_error(checkpoint, tmp_path):
    assert run("invert", "--checkpoint", checkpoint, "--out-dir", tmp_path) == 1
    assert manifest(tmp_path)["status"] == "failed"


def test_bad_space_is_usage_error(checkpoint, target_png, tmp_path):
    code = run("invert", "--checkpoint", checkpoint, "--target", target_png, "--space", "Q",
               "--out-dir", tmp_path / "out")
    assert code == 1


# -- generate --------------------------------------------------------------------

def test_generate_writes_images_and_manifest(checkpoint, tmp_path):
    out = tmp_path / "gen"
    assert run("generate", "--checkpoint", checkpoint, "--seed", 7, "-n", 4, "--out-dir", out) == 0
    assert len(list(out.glob("sample_*.png"))) == 4
    record = manifest(out)
    assert record["seed"] == 7 and not record["seed_auto"]
    assert record["checkpoint_hash"]
    assert len(record["outputs"]) == 8


def test_generate_is_reproducible(checkpoint, tmp_path):
    for name in ("a", "b"):
        assert run("generate", "--checkpoint", checkpoint, "--seed", 7, "-n", 2, "--out-dir", tmp_path / name) == 0
    for f in ("sample_000.png", "sample_001.png", "sample_001_W.opt"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_generate_records_drawn_seed(checkpoint, tmp_path):
    assert run("generate", "--checkpoint", checkpoint, "-n", 1, "--out-dir", tmp_path) == 0
    record = manifest(tmp_path)
    assert record["seed_auto"] and record["seed"] >= 0


def test_config_file_and_flag_precedence(checkpoint, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"n": 2, "checkpoint": checkpoint, "seed": 3}))
    assert run("generate", "--config", config, "--out-dir", tmp_path / "file") == 0
    assert len(list((tmp_path / "file").glob("*.png"))) == 2
    assert run("generate", "--config", config, "-n", 3, "--out-dir", tmp_path / "flag") == 0
    assert len(list((tmp_path / "flag").glob("*.png"))) == 3


# -- inversion commands ----------------------------------------------------------

def test_invert(checkpoint, target_png, tmp_path):
    assert run("invert", "--checkpoint", checkpoint, "--target", target_png, "--steps", 3,
               "--space", "wplus", "--seed", 1, "--out-dir", tmp_path) == 0
    trace = pd.read_csv(tmp_path / "inverted_trace.csv")
    assert list(trace["step"]) == [0, 1, 2]
    assert (tmp_path / "inverted.png").exists() and (tmp_path / "inverted_w_plus.opt").exists()


def test_upsample(G, checkpoint, tmp_path):
    low = sample_images(G, SeededRng(4), 1)[0][:, ::2, ::2]
    low_png = export_png(low.clamp(-1, 1).contiguous(), tmp_path / "low.png")
    out = tmp_path / "out"
    assert run("upsample", "--checkpoint", checkpoint, "--target", low_png, "--factor", 2,
               "--steps", 3, "--seed", 1, "--out-dir", out) == 0
    assert (out / "upsampled.png").exists() and (out / "upsampled_downsampled.png").exists()
    trace = pd.read_csv(out / "upsampled_trace.csv")
    assert trace["truncation_active"].all()


def test_upsample_factor_must_divide_resolution(checkpoint, target_png, tmp_path):
    assert run("upsample", "--checkpoint", checkpoint, "--target", target_png, "--factor", 3,
               "--out-dir", tmp_path / "out") == 1


def test_nondet(checkpoint, tmp_path):
    assert run("nondet", "--checkpoint", checkpoint, "--restarts", 3, "--steps", 2, "--seed", 1,
               "--out-dir", tmp_path) == 0
    table = pd.read_csv(tmp_path / "nondeterminism.csv")
    assert set(table["space"]) == {"w_plus", "W"}
    assert (table["n_midpoints"] == 3).all()


def test_metrics(checkpoint, tmp_path):
    assert run("metrics", "--checkpoint", checkpoint, "--n-targets", 2, "--steps", 2, "--spaces", "w,W",
               "--seed", 1, "--out-dir", tmp_path) == 0
    summary = pd.read_csv(tmp_path / "reconstruction_summary.csv")
    assert list(summary["space"]) == ["w", "W"]
    assert (tmp_path / "mapping_benchmark.csv").exists()
    wb = load_workbook(tmp_path / "metrics.xlsx")
    assert {"reconstruction_summary", "reconstruction_curves", "mapping_benchmark"} <= set(wb.sheetnames)
    assert wb["reconstruction_summary"]["A4"].value == "space"


def test_metrics_without_benchmark(checkpoint, tmp_path):
    assert run("metrics", "--checkpoint", checkpoint, "--n-targets", 2, "--steps", 2, "--spaces", "W",
               "--no-benchmark", "--seed", 1, "--out-dir", tmp_path) == 0
    assert not (tmp_path / "mapping_benchmark.csv").exists()


# -- editing commands ------------------------------------------------------------

def test_mix(checkpoint, tmp_path):
    assert run("mix", "--checkpoint", checkpoint, "--seed", 2, "--out-dir", tmp_path) == 0
    for name in ("content.png", "style.png", "mixed_c1.png", "mix_sweep.png"):
        assert (tmp_path / name).exists(), name


def test_mix_from_latent_files(G, checkpoint, tmp_path):
    content = save_tensor(torch.zeros(G.config.dim), tmp_path / "content.opt")
    assert run("mix", "--checkpoint", checkpoint, "--content", content, "--content-space", "w",
               "--crossover", 2, "--out-dir", tmp_path / "out") == 0
    assert (tmp_path / "out" / "mixed_c2.png").exists()
    assert run("mix", "--checkpoint", checkpoint, "--crossover", 5, "--out-dir", tmp_path / "bad") == 1


def test_pca_then_edit(checkpoint, tmp_path):
    pca_out = tmp_path / "pca"
    assert run("pca", "--checkpoint", checkpoint, "--samples", 50, "--seed", 1, "--out-dir", pca_out) == 0
    assert (pca_out / "pca_basis" / "pca.json").exists()
    assert len(pd.read_csv(pca_out / "pca_variances.csv")) == 8

    edit_out = tmp_path / "edit"
    assert run("edit", "--checkpoint", checkpoint, "--basis", pca_out / "pca_basis", "--alphas", "-1,0,1",
               "--seed", 1, "--out-dir", edit_out) == 0
    assert (edit_out / "edit_pc0.png").exists()
    assert (edit_out / "edit_pc0_+0.00sd.png").exists()
    assert run("edit", "--checkpoint", checkpoint, "--basis", pca_out / "pca_basis", "--component", 8,
               "--out-dir", tmp_path / "bad") == 1


def test_interp(checkpoint, tmp_path):
    assert run("interp", "--checkpoint", checkpoint, "--n-latents", 3, "--reference-size", 4,
               "--segments", 2, "--seed", 1, "--out-dir", tmp_path) == 0
    table = pd.read_csv(tmp_path / "interpolation.csv")
    assert table["n_pairs"].iloc[0] == 3
    assert (tmp_path / "interpolation.xlsx").exists() and (tmp_path / "midpoints.png").exists()


def test_train_then_generate(tmp_path):
    out = tmp_path / "train"
    assert run("train", "--dim", 8, "--resolution", 8, "--channels", 8, "--steps", 2, "--batch", 2,
               "--dataset-size", 8, "--seed", 5, "--out-dir", out) == 0
    assert (out / "checkpoint" / "generator.json").exists()
    assert manifest(out)["checkpoint_hash"]
    assert run("generate", "--checkpoint", out / "checkpoint", "-n", 1, "--seed", 1,
               "--out-dir", tmp_path / "gen") == 0


# -- helpers ---------------------------------------------------------------------

def test_merge_precedence():
    merged = merge_settings({"a": 1, "b": 1, "c": 1}, {"b": 2, "c": 2}, {"c": 3, "a": None})
    assert merged == {"a": 1, "b": 2, "c": 3}


def test_config_file_keys(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n-latents": 4}))
    assert load_config_file(path) == {"n_latents": 4}
    path.write_text("[1, 2]")
    with pytest.raises(ValueError):
        load_config_file(path)
    with pytest.raises(FileNotFoundError):
        load_config_file(tmp_path / "missing.json")


def test_config_builders():
    g = generator_config({"dim": 8, "rows": None, "resolution": 8, "channels": 8, "mode": "baseline"})
    assert g.rows == 8 and g.n_layers == 2
    settings = {"space": "wplus", "steps": 10, "lr": 0.1, "psi": 0.8, "disable_at": 0.5}
    assert inversion_config(settings).space == LatentSpace.W_PLUS
    assert inversion_config(settings, keep_truncation=True).keep_truncation_throughout
    t = train_config({"batch": 4, "steps": 5, "seed": 1})
    assert t.batch_size == 4 and t.steps == 5


def test_latent_file_loading(G, tmp_path):
    path = save_tensor(torch.zeros(G.config.rows, G.config.dim), tmp_path / "W.opt")
    assert load_source(path, "W", G.config).space == LatentSpace.W_MATRIX
    with pytest.raises(ValueError):
        load_source(path, "w", G.config)
    with pytest.raises(ShapeMismatchError):
        load_source(tmp_path / "W.npy", "W", G.config)


def test_target_folder_loading(G, tmp_path):
    for i in range(2):
        export_png(torch.zeros(3, 4, 4), tmp_path / f"t{i}.png")
    assert load_targets(tmp_path, 8).shape == (2, 3, 8, 8)
    with pytest.raises(FileNotFoundError):
        load_targets(tmp_path / "empty_dir_missing", 8)


def test_workbook_export(tmp_path):
    frame = pd.DataFrame({"space": ["w", "W"], "loss": [0.5, float("nan")]})
    path = MetricsWorkbookExporter().export({"summary": frame}, tmp_path / "x.xlsx", title="T")
    ws = load_workbook(path)["summary"]
    assert ws["A1"].value == "T - summary"
    assert [ws["A4"].value, ws["B4"].value] == ["space", "loss"]
    assert ws["B5"].value == 0.5 and ws["B6"].value is None
    with pytest.raises(ValueError):
        MetricsWorkbookExporter().export({}, tmp_path / "y.xlsx")
