import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ppieval import BankSpec, PairedDataset, SimDataset, generate_bank, partition_bank  # noqa: E402


@pytest.fixture(scope="session")
def bank():
    return generate_bank(BankSpec(mu_real=0.5, mu_sim=0.45, rho_target=0.9, size=4000, seed=7))


@pytest.fixture
def small_sets(bank):
    paired, sim, _ = partition_bank(bank, 80, 800, seed=3)
    return paired, sim


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_paired(rng, n, rho_noise=0.1):
    y = rng.uniform(size=n)
    f = np.clip(y + rng.normal(0.0, rho_noise, size=n), 0.0, 1.0)
    return PairedDataset(y, f)


def make_sim(rng, size):
    return SimDataset(rng.uniform(size=size))
