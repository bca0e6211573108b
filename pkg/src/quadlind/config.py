"""JSON experiment configuration.

A configuration holds a ``model`` (a named family with ``params`` or explicit
``Q``/``P`` matrices), a list of ``baths``, optional ``tolerances`` and a
``run`` block with subcommand settings. Complex matrices are written as
``{"re": [[...]], "im": [[...]]}`` and complex weights as ``[re, im]``.
Bath sites are 1-based in the file. The schema lives in
``quadlind/schema/config-v1.json``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .environment import Bath, FlatDensity, OhmicDensity, TabulatedDensity
from .errors import ConfigurationError
from .quadratic_model import CouplingRegion, QuadraticHamiltonian, Statistics, standard_model

__all__ = ["ExperimentConfig", "load_config", "parse_config", "parse_matrix", "config_schema"]

SCHEMA_VERSION = 1


def config_schema() -> dict:
    text = resources.files("quadlind").joinpath("schema/config-v1.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict
    sha256: str
    hamiltonian: QuadraticHamiltonian
    baths: tuple
    tolerances: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)
    base_dir: Path = Path(".")


def parse_matrix(spec, name) -> np.ndarray:
    if isinstance(spec, dict):
        re = np.array(spec["re"], dtype=float)
        im = np.array(spec.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise ConfigurationError(f"{name}: real and imaginary parts differ in shape")
        return re + 1j * im
    try:
        return np.array(spec, dtype=float)
    except ValueError:
        raise ConfigurationError(f"{name}: rows of unequal length") from None


def _density(spec):
    kind = spec["kind"]
    if kind == "flat":
        return FlatDensity(float(spec["gamma0"]))
    if kind == "ohmic":
        return OhmicDensity(float(spec["eta"]), float(spec["omega_c"]))
    return TabulatedDensity(np.array(spec["omega"], dtype=float), np.array(spec["values"], dtype=float))


def _bath(spec, index: int) -> Bath:
    sites = [s - 1 for s in spec["sites"]]
    weights = None
    if "weights" in spec:
        weights = [complex(w[0], w[1]) if isinstance(w, list) else float(w) for w in spec["weights"]]
    try:
        return Bath(
            float(spec["temperature"]),
            float(spec["mu"]),
            _density(spec["spectral_density"]),
            CouplingRegion(tuple(sites), weights),
        )
    except ConfigurationError as exc:
        raise ConfigurationError(f"baths[{index}]: {exc}") from None


def _model(spec) -> QuadraticHamiltonian:
    if "name" in spec:
        return standard_model(spec["name"], **spec.get("params", {}))
    Q = parse_matrix(spec["Q"], "model.Q")
    P = parse_matrix(spec["P"], "model.P") if "P" in spec else None
    return QuadraticHamiltonian(Q, P, Statistics.parse(spec["statistics"]))


def parse_config(text: str, base_dir: Path | str = ".", source: str = "<config>") -> ExperimentConfig:
    """Parse and validate configuration text.

    Raises
    ------
    ConfigurationError
        With the line and column of a JSON syntax error, or the path of the
        offending field for schema violations.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"{source}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    validator = jsonschema.Draft202012Validator(config_schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigurationError(f"{source}: invalid field '{where}': {err.message}")
    h = _model(raw["model"])
    baths = tuple(_bath(b, i) for i, b in enumerate(raw.get("baths", [])))
    for i, b in enumerate(baths):
        try:
            b.region.check_bounds(h.n_sites)
        except ConfigurationError as exc:
            raise ConfigurationError(f"baths[{i}]: {exc}") from None
    digest = hashlib.sha256(text.encode()).hexdigest()
    return ExperimentConfig(raw, digest, h, baths, dict(raw.get("tolerances", {})),
                            dict(raw.get("run", {})), Path(base_dir))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, path.parent, str(path))
