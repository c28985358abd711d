"""Serialization from and to a `dict`.

Floats are stored as hexadecimal literals (`float.hex`), so that a certificate read
back from disk holds exactly the enclosures that were written.
"""

from __future__ import annotations

import json
from enum import Enum
from os.path import dirname, realpath
from typing import Any

import attrs
import numpy as np

from nlscap import settings
from nlscap.equilibria import CandidateTriple, EquilibriumProblem, ValidationCertificate
from nlscap.globalexist import StableBallParams
from nlscap.integrator import (
    ChebFourierSolution,
    EvolutionBounds,
    MarchSchedule,
    StepCertificate,
)
from nlscap.interval import ComplexInterval, RealInterval
from nlscap.manifold import ManifoldCertificate, ManifoldProblem, TaylorFourierSeq
from nlscap.pipeline import ProofCertificate, ProofConfig
from nlscap.radii import RadiiBounds
from nlscap.seqspace import CosineSeq

_to_hex = np.frompyfunc(float.hex, 1, 1)


def from_attrs_decorated(inst: Any) -> dict:
    return attrs.asdict(
        inst,
        recurse=True,
        value_serializer=_value_serializer,
        filter=lambda a, _: a.init,
    )


def from_proof_certificate(certificate: ProofCertificate) -> dict:
    """The manifold certificate refers to the equilibrium stored next to it."""
    definition = from_attrs_decorated(certificate)
    del definition["manifold"]["equilibrium"]
    return definition


def from_steps(steps: tuple[StepCertificate, ...] | list[StepCertificate]) -> dict:
    return {"steps": [from_attrs_decorated(step) for step in steps]}


def _value_serializer(inst: type, field: attrs.Attribute, value: Any) -> Any:
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return {"real": _hex_array(value.real), "imag": _hex_array(value.imag)}
        return _hex_array(value)
    if isinstance(value, bool):
        return value
    if isinstance(value, (float, np.floating)):
        return float.hex(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return [float.hex(value.real), float.hex(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, Enum):
        return value.name
    return value


def _hex_array(values: np.ndarray) -> Any:
    return np.asarray(_to_hex(values.astype(float)), dtype=object).tolist()


def to_float(value: Any) -> float:
    """Read a hexadecimal literal or a plain number.

    >>> to_float("0x1.8000000000000p+1"), to_float(2)
    (3.0, 2.0)
    """
    if isinstance(value, str):
        return float.fromhex(value)
    return float(value)


def to_complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        real, imag = value
        return complex(to_float(real), to_float(imag))
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    return complex(value)


_from_hex = np.frompyfunc(to_float, 1, 1)


def to_array(value: Any) -> np.ndarray:
    if isinstance(value, dict):
        real = to_array(value["real"])
        imag = to_array(value["imag"])
        array = np.empty(real.shape, dtype=complex)
        array.real = real
        array.imag = imag
        return array
    return np.asarray(_from_hex(np.array(value, dtype=object)), dtype=float)


def _optional_float(value: Any) -> float | None:
    if value is None:
        return None
    return to_float(value)


def build_real_interval(definition: dict) -> RealInterval:
    return RealInterval(to_array(definition["lo"]), to_array(definition["hi"]))


def build_complex_interval(definition: dict) -> ComplexInterval:
    return ComplexInterval(
        build_real_interval(definition["re"]),
        build_real_interval(definition["im"]),
    )


def build_cosine_seq(definition: dict) -> CosineSeq:
    return CosineSeq(
        to_float(definition["nu"]),
        build_complex_interval(definition["coeffs"]),
        to_float(definition["tail"]),
    )


def build_radii_bounds(definition: dict) -> RadiiBounds:
    return RadiiBounds(
        Y0=to_float(definition["Y0"]),
        Z0=to_float(definition["Z0"]),
        Z1=to_float(definition["Z1"]),
        Z2=to_float(definition["Z2"]),
        r_star=_optional_float(definition.get("r_star")),
        r_max=_optional_float(definition.get("r_max")),
    )


def build_equilibrium_problem(definition: dict) -> EquilibriumProblem:
    return EquilibriumProblem(int(definition["m"]), to_float(definition["nu"]))


def build_candidate(definition: dict) -> CandidateTriple:
    return CandidateTriple(
        to_complex(definition["lambda_bar"]),
        to_array(definition["a_bar"]),
        to_array(definition["b_bar"]),
        int(definition["phase_index"]),
    )


def _decode_parameter(value: Any) -> Any:
    if isinstance(value, str):
        if value.lstrip("-").startswith("0x") or value.lstrip("-") in {"inf", "nan"}:
            return float.fromhex(value)
        return value
    if isinstance(value, list):
        return [_decode_parameter(item) for item in value]
    if isinstance(value, dict):
        return {key: _decode_parameter(item) for key, item in value.items()}
    return value


def build_validation_certificate(
    definition: dict, do_validate: bool = True
) -> ValidationCertificate:
    if do_validate:
        validate(definition, "equilibrium")
    return ValidationCertificate(
        build_equilibrium_problem(definition["problem"]),
        build_candidate(definition["candidate"]),
        build_radii_bounds(definition["bounds"]),
        to_float(definition["wall_clock"]),
        _decode_parameter(definition.get("parameters", {})),
    )


def build_manifold_problem(definition: dict) -> ManifoldProblem:
    return ManifoldProblem(
        K=int(definition.get("K", 27)),
        M=int(definition.get("M", 150)),
        alpha_l2=to_float(definition.get("alpha_l2", 20.0)),
        theta=to_float(definition.get("theta", settings.DEFAULT_THETA)),
        nu=to_float(definition.get("nu", 1.0)),
    )


def build_taylor_fourier_seq(definition: dict) -> TaylorFourierSeq:
    return TaylorFourierSeq(
        to_float(definition["nu"]),
        build_complex_interval(definition["coeffs"]),
        to_float(definition["tail"]),
    )


def build_manifold_certificate(
    definition: dict,
    equilibrium: ValidationCertificate | None = None,
    do_validate: bool = True,
) -> ManifoldCertificate:
    if equilibrium is None:
        if do_validate:
            validate(definition, "manifold")
        equilibrium = build_validation_certificate(
            definition["equilibrium"], do_validate=False
        )
    return ManifoldCertificate(
        build_manifold_problem(definition["problem"]),
        equilibrium,
        build_taylor_fourier_seq(definition["p_bar"]),
        to_complex(definition["scale"]),
        build_radii_bounds(definition["bounds"]),
        to_float(definition["wall_clock"]),
    )


def build_solution(definition: dict) -> ChebFourierSolution:
    return ChebFourierSolution(
        to_float(definition["h"]),
        to_array(definition["coeffs"]),
        to_float(definition["t0"]),
        to_float(definition["nu"]),
    )


def build_evolution_bounds(definition: dict) -> EvolutionBounds:
    return EvolutionBounds(
        W0=to_float(definition["W0"]),
        W_inf=to_float(definition["W_inf"]),
        barW_inf=to_float(definition["barW_inf"]),
        W_inf_sup=to_float(definition["W_inf_sup"]),
        kappa=to_float(definition["kappa"]),
        Uh=to_array(definition["Uh"]),
    )


_STEP_RADII = (
    "eps0",
    "eps_inf",
    "rho0",
    "rho_inf",
    "delta0",
    "delta_inf",
)


def build_step(definition: dict) -> StepCertificate:
    return StepCertificate(
        index=int(definition["index"]),
        solution=build_solution(definition["solution"]),
        evolution=build_evolution_bounds(definition["evolution"]),
        abar_norm=to_float(definition["abar_norm"]),
        wall_clock=to_float(definition["wall_clock"]),
        **{name: to_float(definition[name]) for name in _STEP_RADII},
    )


def build_steps(definition: dict, do_validate: bool = True) -> tuple[StepCertificate, ...]:
    if do_validate:
        validate(definition, "steps")
    return tuple(build_step(step) for step in definition["steps"])


def build_stable_ball(definition: dict) -> StableBallParams:
    return StableBallParams(
        p=int(definition["p"]),
        rho0=to_float(definition["rho0"]),
        rho1=to_float(definition["rho1"]),
        r=to_float(definition["r"]),
        z0=to_complex(definition["z0"]),
        margin=to_float(definition["margin"]),
        candidate_index=int(definition["candidate_index"]),
    )


def build_schedule(definition: dict) -> MarchSchedule:
    definition = dict(definition)
    for name in ("h", "nu"):
        if name in definition:
            definition[name] = to_float(definition[name])
    if "segments" in definition:
        definition["segments"] = [
            (int(count), to_float(h)) for count, h in definition["segments"]
        ]
    return MarchSchedule(**definition)


def build_config(definition: dict) -> ProofConfig:
    """Build a `.ProofConfig` from hand-written or serialized definitions."""
    definition = dict(definition)
    if "nu" in definition:
        definition["nu"] = to_float(definition["nu"])
    for name, build in [("manifold", build_manifold_problem), ("schedule", build_schedule)]:
        table = dict(definition.get(name, {}))
        if "nu" in definition:
            table.setdefault("nu", definition["nu"])
        if table or name in definition:
            definition[name] = build(table)
    return ProofConfig(**definition)


def build_proof_certificate(definition: dict, do_validate: bool = True) -> ProofCertificate:
    if do_validate:
        validate(definition, "proof")
    equilibrium = build_validation_certificate(definition["equilibrium"], do_validate=False)
    return ProofCertificate(
        config=build_config(definition["config"]),
        equilibrium=equilibrium,
        manifold=build_manifold_certificate(definition["manifold"], equilibrium),
        steps=[build_step(step) for step in definition["steps"]],
        stable=build_stable_ball(definition["stable"]),
        conjugated=bool(definition["conjugated"]),
        rescaling=int(definition["rescaling"]),
        schema_version=definition["schema_version"],
    )


def validate(instance: dict, kind: str = "proof") -> None:
    """Check a serialized certificate against the shipped JSON schema."""
    import jsonschema  # noqa: PLC0415

    if kind == "proof":
        schema = __SCHEMA_CERTIFICATE
    else:
        schema = {
            "$ref": f"#/$defs/{kind}",
            "$defs": __SCHEMA_CERTIFICATE["$defs"],
        }
    jsonschema.validate(instance=instance, schema=schema)


__NLSCAP_PATH = dirname(dirname(realpath(__file__)))
with open(f"{__NLSCAP_PATH}/certificate-validation.json") as __STREAM:
    __SCHEMA_CERTIFICATE = json.load(__STREAM)
