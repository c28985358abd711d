import logging

import pytest

from nlscap.equilibria import ValidationCertificate
from nlscap.globalexist import verify_stable
from nlscap.integrator import time_march
from nlscap.manifold import ManifoldCertificate, ManifoldProblem, validate_manifold
from nlscap.pipeline import ProofCertificate, ProofConfig
from nlscap.seqspace import CosineSeq

logging.basicConfig(level=logging.ERROR)


@pytest.fixture(scope="session")
def manifold_certificate(u1_certificate: ValidationCertificate) -> ManifoldCertificate:
    return validate_manifold(u1_certificate, ManifoldProblem(K=20, M=12, alpha_l2=1.0))


@pytest.fixture(scope="session")
def proof_config() -> ProofConfig:
    return ProofConfig(
        m=14,
        manifold={"K": 20, "M": 12, "alpha_l2": 1.0},
        schedule={"h": 0.01, "n_cheb": 8, "fourier_K": 4, "max_steps": 3},
        stop_policy="max-steps",
    )


@pytest.fixture(scope="session")
def proof_certificate(
    proof_config: ProofConfig,
    u1_certificate: ValidationCertificate,
    manifold_certificate: ManifoldCertificate,
) -> ProofCertificate:
    """Every part is valid on its own, but the steps do not start on the manifold."""
    initial = CosineSeq.from_point(1.0, [0.5j, 0.01, 0.0, 0.0, 0.0])
    steps = time_march(initial, proof_config.schedule)
    stable = verify_stable(steps[-1].endpoint_enclosure())
    return ProofCertificate(
        proof_config, u1_certificate, manifold_certificate, steps, stable
    )
