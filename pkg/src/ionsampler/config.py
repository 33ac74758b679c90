"""Run configuration: a single strict JSON document.

Unknown keys anywhere in the document are rejected so that typos fail
loudly instead of silently falling back to defaults.  Every diagnostic
names the offending field with its dotted path.

Frequencies are given in Hz in the file (the natural unit at the lab
bench) and converted to angular frequencies internally.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .detection import DetectionParams
from .ion_chain import TrapParams

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config"]

TARGET_KINDS = ("identity", "fourier", "haar", "file")
DD_SCHEMES = ("nn", "hadamard")


class ConfigError(ValueError):
    """Invalid or malformed run configuration."""


@dataclass(frozen=True)
class TargetSpec:
    kind: str
    seed: int | None = None
    path: str | None = None


@dataclass(frozen=True)
class DDSpec:
    n_sub: int = 16
    scheme: str = "hadamard"


@dataclass(frozen=True)
class SamplingSpec:
    num_samples: int = 1000
    seed: int = 0


@dataclass(frozen=True)
class DetectionSpec:
    readout_fidelity: float = 0.99
    prep_error: float = 0.01
    max_repetitions: int = 10
    seed: int = 0


@dataclass(frozen=True)
class Tolerances:
    solver: float = 1e-12
    unitarity: float = 1e-10
    normalization: float = 1e-9


@dataclass(frozen=True)
class RunConfig:
    trap: TrapParams
    occupations: tuple[int, ...]
    target: TargetSpec
    dd: DDSpec
    sampling: SamplingSpec
    detection: DetectionSpec
    tolerances: Tolerances

    @property
    def num_ions(self) -> int:
        return self.trap.num_ions

    @property
    def detection_params(self) -> DetectionParams:
        return DetectionParams(
            readout_fidelity=self.detection.readout_fidelity,
            prep_error=self.detection.prep_error,
            max_repetitions=self.detection.max_repetitions,
        )

    def with_seed(self, seed: int) -> "RunConfig":
        """Copy with every stage seed replaced by ``seed``."""
        target = TargetSpec(self.target.kind, seed, self.target.path)
        sampling = SamplingSpec(self.sampling.num_samples, seed)
        detection = DetectionSpec(
            self.detection.readout_fidelity,
            self.detection.prep_error,
            self.detection.max_repetitions,
            seed,
        )
        return RunConfig(
            self.trap, self.occupations, target, self.dd, sampling, detection, self.tolerances
        )


class _Section:
    """Typed accessor over one JSON object; tracks the dotted path and
    complains about keys it was never asked for."""

    def __init__(self, data, path: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected an object, got {type(data).__name__}")
        self.data = data
        self.path = path
        self.seen: set[str] = set()

    def _get(self, key, required, default):
        self.seen.add(key)
        if key not in self.data:
            if required:
                raise ConfigError(f"{self.path}.{key}: required field missing")
            return default
        return self.data[key]

    def number(self, key, required=True, default=None, minimum=None):
        value = self._get(key, required, default)
        if value is default and not required and key not in self.data:
            return default
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            raise ConfigError(f"{self.path}.{key}: expected a finite number, got {value!r}")
        if minimum is not None and value < minimum:
            raise ConfigError(f"{self.path}.{key}: must be >= {minimum}, got {value}")
        return float(value)

    def integer(self, key, required=True, default=None, minimum=None):
        value = self._get(key, required, default)
        if value is default and not required and key not in self.data:
            return default
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{self.path}.{key}: expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise ConfigError(f"{self.path}.{key}: must be >= {minimum}, got {value}")
        return value

    def string(self, key, required=True, default=None, choices=None):
        value = self._get(key, required, default)
        if value is default and not required and key not in self.data:
            return default
        if not isinstance(value, str):
            raise ConfigError(f"{self.path}.{key}: expected a string, got {value!r}")
        if choices is not None and value not in choices:
            raise ConfigError(
                f"{self.path}.{key}: must be one of {', '.join(choices)}; got {value!r}"
            )
        return value

    def int_list(self, key):
        value = self._get(key, True, None)
        if not isinstance(value, list) or any(
            not isinstance(x, int) or isinstance(x, bool) for x in value
        ):
            raise ConfigError(f"{self.path}.{key}: expected a list of integers")
        return [int(x) for x in value]

    def subsection(self, key, required=True):
        value = self._get(key, required, None)
        if value is None and not required:
            return None
        return _Section(value, f"{self.path}.{key}")

    def finish(self):
        unknown = set(self.data) - self.seen
        if unknown:
            name = sorted(unknown)[0]
            raise ConfigError(f"{self.path}.{name}: unknown key (strict mode)")


def parse_config(data: dict) -> RunConfig:
    """Validate a parsed JSON document into a :class:`RunConfig`.

    Raises :class:`ConfigError` naming the first offending field.
    """
    root = _Section(data, "config")

    trap_sec = root.subsection("trap")
    omega_x_hz = trap_sec.number("omega_x_hz", minimum=0.0)
    omega_z_hz = trap_sec.number("omega_z_hz", minimum=0.0)
    trap_sec.finish()

    chain_sec = root.subsection("chain")
    num_ions = chain_sec.integer("num_ions", minimum=1)
    chain_sec.finish()

    try:
        trap = TrapParams(2 * math.pi * omega_x_hz, 2 * math.pi * omega_z_hz, num_ions)
    except ValueError as exc:
        raise ConfigError(f"config.trap: {exc}") from exc

    input_sec = root.subsection("input")
    occupations = input_sec.int_list("occupations")
    input_sec.finish()
    if len(occupations) != num_ions:
        raise ConfigError(
            f"config.input.occupations: length {len(occupations)} does not match "
            f"chain.num_ions = {num_ions}"
        )
    if any(n < 0 for n in occupations):
        raise ConfigError("config.input.occupations: entries must be >= 0")
    if sum(occupations) < 1:
        raise ConfigError("config.input.occupations: at least one boson required")

    target_sec = root.subsection("target")
    kind = target_sec.string("kind", choices=TARGET_KINDS)
    seed = target_sec.integer("seed", required=False)
    path = target_sec.string("path", required=False)
    target_sec.finish()
    if kind == "haar" and seed is None:
        raise ConfigError("config.target.seed: required for kind 'haar'")
    if kind == "file" and path is None:
        raise ConfigError("config.target.path: required for kind 'file'")

    dd_sec = root.subsection("dd", required=False)
    if dd_sec is None:
        dd = DDSpec()
    else:
        dd = DDSpec(
            n_sub=dd_sec.integer("n_sub", required=False, default=16, minimum=1),
            scheme=dd_sec.string("scheme", required=False, default="hadamard", choices=DD_SCHEMES),
        )
        dd_sec.finish()

    sampling_sec = root.subsection("sampling", required=False)
    if sampling_sec is None:
        sampling = SamplingSpec()
    else:
        sampling = SamplingSpec(
            num_samples=sampling_sec.integer("num_samples", required=False, default=1000, minimum=1),
            seed=sampling_sec.integer("seed", required=False, default=0),
        )
        sampling_sec.finish()

    det_sec = root.subsection("detection", required=False)
    if det_sec is None:
        detection = DetectionSpec()
    else:
        detection = DetectionSpec(
            readout_fidelity=det_sec.number("readout_fidelity", required=False, default=0.99),
            prep_error=det_sec.number("prep_error", required=False, default=0.01),
            max_repetitions=det_sec.integer("max_repetitions", required=False, default=10, minimum=1),
            seed=det_sec.integer("seed", required=False, default=0),
        )
        det_sec.finish()
    try:
        DetectionParams(
            detection.readout_fidelity, detection.prep_error, detection.max_repetitions
        )
    except ValueError as exc:
        raise ConfigError(f"config.detection: {exc}") from exc

    tol_sec = root.subsection("tolerances", required=False)
    if tol_sec is None:
        tolerances = Tolerances()
    else:
        tolerances = Tolerances(
            solver=tol_sec.number("solver", required=False, default=1e-12, minimum=0.0),
            unitarity=tol_sec.number("unitarity", required=False, default=1e-10, minimum=0.0),
            normalization=tol_sec.number("normalization", required=False, default=1e-9, minimum=0.0),
        )
        tol_sec.finish()

    root.finish()
    return RunConfig(trap, tuple(occupations), TargetSpec(kind, seed, path), dd, sampling, detection, tolerances)


def load_config(path) -> RunConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(data)
