"""Shared fixtures and random-instance builders."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from brmob.linalg import SpdMatrix
from brmob.posterior import BanditDomain, GaussianPosterior


def random_spd(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((d, d))
    return scale * (a @ a.T / d + 0.2 * np.eye(d))


def random_features(rng: np.random.Generator, d: int, k: int) -> np.ndarray:
    phi = rng.uniform(-1.0, 1.0, size=(d, k))
    return phi / np.maximum(np.linalg.norm(phi, axis=0), 1.0)


def random_instance(
    rng: np.random.Generator,
    k: int,
    d: int,
    mean_scale: float = 1.0,
    cov_scale: float = 1.0,
) -> tuple[BanditDomain, GaussianPosterior]:
    """A random domain with a direct (not data-derived) Gaussian belief."""
    domain = BanditDomain(
        features=random_features(rng, d, k),
        prior_mean=np.zeros(d),
        prior_cov=SpdMatrix.identity(d),
        noise_std=1.0,
    )
    post = GaussianPosterior(
        mean_scale * rng.standard_normal(d),
        SpdMatrix(random_spd(rng, d, cov_scale)),
    )
    return domain, post


def identity_domain(k: int, prior_mean: np.ndarray | None = None) -> BanditDomain:
    return BanditDomain(
        features=np.eye(k),
        prior_mean=np.zeros(k) if prior_mean is None else prior_mean,
        prior_cov=SpdMatrix.identity(k),
        noise_std=1.0,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
