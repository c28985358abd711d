"""Computer-assisted proofs for the quadratic nonlinear Schrödinger equation.

`nlscap` proves the existence of heteroclinic orbits of ``−i u_t = u_xx + u²`` with
periodic boundary conditions. A proof chains validated numerics: a steady state and its
unstable eigenpair (`.equilibria`), a chart of the local unstable manifold
(`.manifold`), rigorous time stepping (`.integrator`) and a stable set around constant
data in which solutions decay to zero (`.globalexist`). All enclosures are computed
with the outward-rounded `.interval` arithmetic on the sequence spaces of `.seqspace`.

The `.pipeline` module runs complete proofs and rechecks stored certificates, and the
`.io` module reads and writes them.
"""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version
from typing import Any

from nlscap import io
from nlscap.pipeline import (
    ProofCertificate,
    ProofConfig,
    ProofError,
    RecheckReport,
    conjugate_certificate,
    export,
    prove_heteroclinic,
    prove_many,
    recheck,
    rescale_certificate,
)
from nlscap.settings import NumberOfThreads, StopPolicy

try:
    __version__ = version("nls-cap")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "unknown"

__all__ = [
    "NumberOfThreads",
    "ProofCertificate",
    "ProofConfig",
    "ProofError",
    "RecheckReport",
    "StopPolicy",
    "conjugate_certificate",
    "export",
    "io",
    "prove",
    "prove_heteroclinic",
    "prove_many",
    "recheck",
    "rescale_certificate",
]


def prove(family: str = "u1", sigma: int = 1, **fields: Any) -> ProofCertificate:
    """Prove the orbit from a shipped equilibrium family to zero.

    Remaining keyword arguments are fields of `.ProofConfig`; the certificate of the
    time-reversed orbit from zero to the conjugate equilibrium follows with
    `.conjugate_certificate`.
    """
    config = ProofConfig(family=family, sigma=sigma, **fields)
    return prove_heteroclinic(config)
