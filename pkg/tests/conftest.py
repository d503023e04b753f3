"""Shared fixtures: small designs for unit tests and the three session-scoped
simulated campaigns the acceptance suite measures against."""

from __future__ import annotations

import pandas as pd
import pytest

from jndscale.design import (
    DesignConfig,
    PROTOCOL_BTC,
    PROTOCOL_PTC,
    batch_questions,
    generate_design,
)
from jndscale.simulate import GroundTruth, ReliabilityMix, simulate_campaign

FULL_STUDY_CONFIG = DesignConfig()

SMALL_CONFIG = DesignConfig(
    sources=("sA", "sB"),
    codecs=("cX", "cY", "cZ"),
    n_batches=4,
    rng_seed=5,
)


def make_questions(config: DesignConfig, protocols=(PROTOCOL_BTC, PROTOCOL_PTC)):
    questions = []
    for proto in protocols:
        questions.extend(batch_questions(generate_design(config, proto)))
    return questions


@pytest.fixture(scope="session")
def full_study_questions():
    return make_questions(FULL_STUDY_CONFIG)


@pytest.fixture(scope="session")
def small_questions():
    return make_questions(SMALL_CONFIG)


def heterogeneous_gains(config: DesignConfig, lo=1.7, hi=2.3):
    """Planted per-pair boost gains spread over [lo, hi], b = 0."""
    cells = [(s, c) for s in config.sources for c in config.codecs]
    return {
        cell: (float(lo + (hi - lo) * (i / (len(cells) - 1))), 0.0)
        for i, cell in enumerate(cells)
    }


# -- campaign A: clean observers, uniform 2x gain (criteria 4, 6, 8) ---------

CAMPAIGN_A_SEED_BTC = 31
CAMPAIGN_A_SEED_PTC = 32


@pytest.fixture(scope="session")
def truth_a():
    return GroundTruth.linear(
        FULL_STUDY_CONFIG.sources,
        FULL_STUDY_CONFIG.codecs,
        jnd_per_level=0.25,
        boost_gain=(2.0, 0.0),
        lapse_rate=0.0,
        not_sure_band_jnd=0.0,
    )


@pytest.fixture(scope="session")
def campaign_a(full_study_questions, truth_a):
    btc = simulate_campaign(
        [q for q in full_study_questions if q.protocol == PROTOCOL_BTC],
        truth_a,
        n_workers=300,
        seed=CAMPAIGN_A_SEED_BTC,
    )
    ptc = simulate_campaign(
        [q for q in full_study_questions if q.protocol == PROTOCOL_PTC],
        truth_a,
        n_workers=900,
        seed=CAMPAIGN_A_SEED_PTC,
    )
    return pd.concat([btc, ptc], ignore_index=True)


# -- campaign B: heterogeneous per-pair gains (criterion 5) ------------------

CAMPAIGN_B_SEED_BTC = 21
CAMPAIGN_B_SEED_PTC = 22


@pytest.fixture(scope="session")
def truth_b():
    truth = GroundTruth.linear(
        FULL_STUDY_CONFIG.sources,
        FULL_STUDY_CONFIG.codecs,
        jnd_per_level=0.25,
        lapse_rate=0.0,
        not_sure_band_jnd=0.0,
    )
    truth.boost_gain = heterogeneous_gains(FULL_STUDY_CONFIG)
    return truth


@pytest.fixture(scope="session")
def campaign_b(full_study_questions, truth_b):
    btc = simulate_campaign(
        [q for q in full_study_questions if q.protocol == PROTOCOL_BTC],
        truth_b,
        n_workers=1200,
        seed=CAMPAIGN_B_SEED_BTC,
        batches_per_worker=2,
    )
    ptc = simulate_campaign(
        [q for q in full_study_questions if q.protocol == PROTOCOL_PTC],
        truth_b,
        n_workers=8000,
        seed=CAMPAIGN_B_SEED_PTC,
        batches_per_worker=2,
    )
    return pd.concat([btc, ptc], ignore_index=True)


# -- campaign C: 30% high-lapse, right-biased workers (criterion 7) ----------

CAMPAIGN_C_SEED = 41
CAMPAIGN_C_WORKERS = 200
CAMPAIGN_C_MIX = ReliabilityMix(
    unreliable_fraction=0.30,
    unreliable_lapse_rate=0.85,
    unreliable_right_bias=0.7,
)


@pytest.fixture(scope="session")
def truth_c():
    return GroundTruth.linear(
        FULL_STUDY_CONFIG.sources,
        FULL_STUDY_CONFIG.codecs,
        jnd_per_level=0.25,
        boost_gain=(2.0, 0.0),
        lapse_rate=0.02,
        not_sure_band_jnd=0.2,
    )


@pytest.fixture(scope="session")
def campaign_c(full_study_questions, truth_c):
    return simulate_campaign(
        [q for q in full_study_questions if q.protocol == PROTOCOL_BTC],
        truth_c,
        n_workers=CAMPAIGN_C_WORKERS,
        reliability_mix=CAMPAIGN_C_MIX,
        seed=CAMPAIGN_C_SEED,
    )


# -- a small clean campaign shared by analysis unit tests --------------------

@pytest.fixture(scope="session")
def small_truth():
    return GroundTruth.linear(
        SMALL_CONFIG.sources,
        SMALL_CONFIG.codecs,
        jnd_per_level=0.25,
        boost_gain=(2.0, 0.0),
        lapse_rate=0.0,
        not_sure_band_jnd=0.0,
    )


@pytest.fixture(scope="session")
def small_campaign(small_questions, small_truth):
    return simulate_campaign(small_questions, small_truth, n_workers=40, seed=7)
