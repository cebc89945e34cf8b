"""
Shared fixtures: a tiny generator (D=8, R=8, two layers, 8x8 output) that
every test can afford to run forward and backward many times.
"""

import pytest
import torch

from src.core.rng import SeededRng
from src.latent.sampling import estimate_mean_w
from src.models.config import GeneratorConfig, ModulationMode
from src.networks.synthesis import build_generator
from src.perception.features import default_extractor


@pytest.fixture
def small_config() -> GeneratorConfig:
    return GeneratorConfig.desk(dim=8, rows=8, resolution=8, channels=8)


@pytest.fixture
def baseline_config() -> GeneratorConfig:
    return GeneratorConfig.desk(dim=8, rows=8, resolution=8, channels=8, mode=ModulationMode.BASELINE)


@pytest.fixture
def G(small_config):
    gen = build_generator(small_config, seed=0)
    with torch.no_grad():
        gen.mu_w.copy_(estimate_mean_w(gen.mapper, SeededRng(99), n_samples=2000))
    return gen


@pytest.fixture
def rng() -> SeededRng:
    return SeededRng(2024)


@pytest.fixture
def extractor():
    return default_extractor()
