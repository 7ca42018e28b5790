"""Pytest configuration and shared factories for aiwashing tests."""

from typing import Callable, Optional, TypeVar, Union

import numpy as np
import pandas as pd
import pytest
from scipy.special import expit

from aiwashing.datagen import SyntheticBundle, TruthConfig, generate
from aiwashing.models import CapabilityRecord, Lexicon, LexiconEntry
from aiwashing.utils import replicate_rng

T = TypeVar("T")


def make_lexicon(*phrases: str, weights: Optional[dict[str, float]] = None) -> Lexicon:
    """Helper to build a lexicon from phrases with optional weights."""
    weights = weights or {}
    return Lexicon(tuple(LexiconEntry(p, weights.get(p, 1.0)) for p in phrases))


def make_records(
    year: int = 2019,
    talent: tuple[float, ...] = (0.1, 0.2, 0.5),
    patents: tuple[int, ...] = (0, 3, 7),
    rd: tuple[float, ...] = (0.02, 0.04, 0.03),
    prefix: str = "F",
) -> list[CapabilityRecord]:
    """Helper to build one cross-section of capability records."""
    return [
        CapabilityRecord(f"{prefix}{i + 1}", year, t, p, r)
        for i, (t, p, r) in enumerate(zip(talent, patents, rd))
    ]


def make_households(
    n: int = 2000,
    seed: Union[int, np.random.Generator] = 0,
    *,
    washing_effect: float = -0.3,
    interaction: float = 0.0,
    knowledge_path: float = 0.35,
) -> pd.DataFrame:
    """Helper to draw a small household table with a known logit outcome."""
    rng = np.random.default_rng(seed)
    washing = rng.normal(0.4, 0.9, n)
    social = rng.gamma(1.3, 2.4, n)
    age = rng.integers(18, 86, n)
    education = rng.integers(0, 17, n)
    knowledge = np.clip(np.rint(2.0 + knowledge_path * washing + rng.normal(0, 1, n)), 0, 4)
    risk = np.clip(np.rint(1.8 + 0.3 * washing + rng.normal(0, 0.8, n)), 0, 3)
    eta = (
        -0.5
        + washing_effect * washing
        - 0.4 * (knowledge - 2.0)
        - 0.45 * (risk - 1.8)
        + 0.08 * social
        + interaction * washing * social
        + 0.05 * (education - 8)
    )
    y = (rng.random(n) < expit(eta)).astype(int)
    return pd.DataFrame(
        {
            "household_id": [f"H{i:05d}" for i in range(n)],
            "firm_id": rng.choice([f"P{j:02d}" for j in range(1, 7)], size=n),
            "region": rng.choice(["east", "central", "west"], size=n),
            "ai_washing": washing,
            "social_capital": social,
            "knowledge_exclusion": knowledge.astype(int),
            "risk_exclusion": risk.astype(int),
            "age": age,
            "education": education,
            "prior_use": (rng.random(n) < 0.25).astype(int),
            "income": np.exp(rng.normal(1.0, 0.9, n)),
            "y1_use": y,
            "y2_breadth": np.clip(y * rng.integers(1, 8, n), 0, 7),
        }
    )


SMALL_CONFIG = TruthConfig(n_households=1500, aux_factor=2, iv_households=1500)


@pytest.fixture(scope="session")
def small_bundle() -> SyntheticBundle:
    """A reduced bundle shared by the datagen and pipeline tests."""
    return generate(SMALL_CONFIG, seed=11)


@pytest.fixture(scope="session")
def default_bundle() -> SyntheticBundle:
    """The full-size calibrated bundle used for parameter recovery."""
    return generate(TruthConfig(), seed=20190601)


def monte_carlo(trial: Callable[[np.random.Generator], T], runs: int, seed: int) -> list[T]:
    """Helper to repeat ``trial`` on ``runs`` independent streams of ``seed``."""
    return [trial(replicate_rng(seed, index)) for index in range(runs)]
