"""Serialization module for `nlscap`.

The `.io` module writes certificates to disk and reads them back, so that a proof can
be rechecked later or on another machine. It also reads the configuration and seed
files that start a proof, and emits the CSV data behind the plots.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any

import attrs
import numpy as np
import yaml

from nlscap.equilibria import ValidationCertificate
from nlscap.globalexist import StableBallParams
from nlscap.integrator import StepCertificate
from nlscap.io import _dict
from nlscap.io._csv import write_orbit_csv, write_portrait_csv, write_steps_csv
from nlscap.manifold import ManifoldCertificate
from nlscap.pipeline import ProofCertificate, ProofConfig
from nlscap.seqspace import CosineSeq

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "asdict",
    "fromdict",
    "load",
    "load_config",
    "load_seed",
    "write",
    "write_orbit_csv",
    "write_portrait_csv",
    "write_steps_csv",
]


def asdict(instance: object) -> dict:
    if isinstance(instance, ProofCertificate):
        return _dict.from_proof_certificate(instance)
    if isinstance(instance, (list, tuple)) and all(
        isinstance(step, StepCertificate) for step in instance
    ):
        return _dict.from_steps(instance)
    if attrs.has(type(instance)):
        return _dict.from_attrs_decorated(instance)
    msg = f"No conversion to dict available for class {type(instance).__name__}"
    raise NotImplementedError(msg)


def fromdict(definition: dict) -> object:
    keys = set(definition.keys())
    if "schema_version" in keys:
        return _dict.build_proof_certificate(definition)
    if keys == {"steps"}:
        return _dict.build_steps(definition)
    if keys == __COSINE_SEQ_FIELDS:
        return _dict.build_cosine_seq(definition)
    if keys == __EQUILIBRIUM_FIELDS:
        return _dict.build_validation_certificate(definition)
    if keys == __MANIFOLD_FIELDS:
        return _dict.build_manifold_certificate(definition)
    if keys == __STABLE_BALL_FIELDS:
        return _dict.build_stable_ball(definition)
    if keys <= __CONFIG_FIELDS:
        return _dict.build_config(definition)
    msg = f"Could not determine type from keys {keys}"
    raise NotImplementedError(msg)


def _init_fields(decorated_class: type) -> set[str]:
    return {field.name for field in attrs.fields(decorated_class) if field.init}


__COSINE_SEQ_FIELDS = _init_fields(CosineSeq)
__EQUILIBRIUM_FIELDS = _init_fields(ValidationCertificate)
__MANIFOLD_FIELDS = _init_fields(ManifoldCertificate)
__STABLE_BALL_FIELDS = _init_fields(StableBallParams)
__CONFIG_FIELDS = _init_fields(ProofConfig)


def _read(filename: str | Path) -> Any:
    file_extension = _get_file_extension(filename)
    with open(filename, "rb") as stream:
        if file_extension in {"json", "seq"}:
            return json.load(stream)
        if file_extension in {"yaml", "yml"}:
            return yaml.load(stream, Loader=yaml.SafeLoader)
        if file_extension == "toml":
            return tomllib.load(stream)
    msg = f'No loader defined for file type "{file_extension}"'
    raise NotImplementedError(msg)


def load(filename: str | Path) -> object:
    """Load a certificate, a step list or a sequence enclosure (``.seq``)."""
    return fromdict(_read(filename))


def load_config(filename: str | Path) -> ProofConfig:
    """Read a `.ProofConfig` from a TOML, YAML or JSON file.

    Keys mirror the fields of `.ProofConfig`; ``manifold`` and ``schedule`` are nested
    tables. A relative ``seed_file`` is resolved against the directory of the file.
    """
    definition = _read(filename)
    if not isinstance(definition, dict):
        msg = f"Configuration file {filename} does not contain a table"
        raise ValueError(msg)
    seed_file = definition.get("seed_file")
    if seed_file is not None and not Path(seed_file).is_absolute():
        definition = {**definition, "seed_file": str(Path(filename).parent / seed_file)}
    return _dict.build_config(definition)


def load_seed(filename: str | Path) -> np.ndarray:
    """Read seed coefficients for a steady state.

    Entries may be numbers, ``[re, im]`` pairs or strings like ``"1.5-0.2j"``. A table
    with a ``coefficients`` key is accepted as well.
    """
    definition = _read(filename)
    if isinstance(definition, dict):
        if "coefficients" not in definition:
            msg = f'Seed file {filename} has no "coefficients" entry'
            raise ValueError(msg)
        definition = definition["coefficients"]
    if not isinstance(definition, list) or not definition:
        msg = f"Seed file {filename} does not contain a list of coefficients"
        raise ValueError(msg)
    return np.array([_dict.to_complex(value) for value in definition], dtype=complex)


class _IncreasedIndent(yaml.Dumper):
    def increase_indent(self, flow: bool = False, indentless: bool = False) -> None:
        return super().increase_indent(flow, False)

    def write_line_break(self, data: str | None = None) -> None:
        super().write_line_break(data)
        if len(self.indents) == 1:
            super().write_line_break()


def write(instance: object, filename: str | Path) -> None:
    """Write an object through `asdict`; plain `dict` instances are written as they are."""
    definition = instance if isinstance(instance, dict) else asdict(instance)
    file_extension = _get_file_extension(filename)
    if file_extension in {"json", "seq"}:
        with open(filename, "w") as stream:
            json.dump(definition, stream, indent=2)
            stream.write("\n")
        return
    if file_extension in {"yaml", "yml"}:
        with open(filename, "w") as stream:
            yaml.dump(
                definition,
                stream,
                sort_keys=False,
                Dumper=_IncreasedIndent,
                default_flow_style=False,
            )
        return
    msg = f'No writer defined for file type "{file_extension}"'
    raise NotImplementedError(msg)


def _get_file_extension(filename: str | Path) -> str:
    path = Path(filename)
    extension = path.suffix.lower()
    if not extension:
        msg = f'No file extension in file name "{filename}"'
        raise ValueError(msg)
    return extension[1:]
