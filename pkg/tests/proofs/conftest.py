import logging

import numpy as np
import pytest

from nlscap.pipeline import ProofCertificate, ProofConfig, prove_heteroclinic

logging.basicConfig(level=logging.ERROR)


@pytest.fixture(scope="session")
def short_config() -> ProofConfig:
    """At most twenty steps of size 2.5e-3 from ``P(1)`` on the u1 manifold."""
    return ProofConfig(
        family="u1",
        m=28,
        manifold={"K": 27, "M": 150, "alpha_l2": 20.0, "theta": 29 * np.pi / 16},
        schedule={"h": 2.5e-3, "n_cheb": 13, "fourier_K": 27, "max_steps": 20},
        stop_policy="stable-set",
    )


@pytest.fixture(scope="session")
def short_proof(short_config: ProofConfig) -> ProofCertificate:
    return prove_heteroclinic(short_config)
