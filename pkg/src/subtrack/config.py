"""Experiment configuration: INI-style files with strict key validation.

A config has three sections mapping onto the library's own configuration
types::

    [sim]
    n_taps = 64
    preset = rough

    [tracker]
    rank = 12

    [run]
    algos = lms,asrmae,dfb_asrmae
    seeds = 5
    out_dir = results

Unknown sections or keys are hard errors, as are malformed values; silent
typos would invalidate comparisons.
"""

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .channel_sim import SimConfig
from .errors import ConfigError
from .pipeline import ALGORITHMS, TrackerConfig

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


@dataclass
class RunConfig:
    """Run-control section: what to run and where to put the outputs."""

    algos: tuple = ("lms", "asrmae", "dfb_asrmae")
    seeds: tuple = (0,)
    out_dir: str = "results"
    emit_errors: bool = True
    emit_phi_traj: bool = True
    emit_coherence: bool = True
    emit_spectrum: bool = True
    cir_csv: Optional[str] = None  # replay a recorded trajectory instead of simulating


@dataclass
class ExperimentConfig:
    sim: SimConfig
    tracker: TrackerConfig
    run: RunConfig

    def as_dict(self) -> dict:
        return {
            "sim": dataclasses.asdict(self.sim),
            "tracker": dataclasses.asdict(self.tracker),
            "run": dataclasses.asdict(self.run),
        }


def _parse_bool(raw: str, key: str) -> bool:
    low = raw.strip().lower()
    if low in _BOOL_TRUE:
        return True
    if low in _BOOL_FALSE:
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_seeds(raw: str) -> tuple:
    """A bare integer means a seed count (0..n-1); a comma list is explicit."""
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError("run.seeds: empty value")
    try:
        values = [int(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"run.seeds: {exc}") from None
    if len(values) == 1 and "," not in raw:
        count = values[0]
        if count < 1:
            raise ConfigError(f"run.seeds: seed count must be >= 1, got {count}")
        return tuple(range(count))
    return tuple(values)


def _parse_algos(raw: str) -> tuple:
    algos = tuple(p.strip() for p in raw.split(",") if p.strip())
    unknown = [a for a in algos if a not in ALGORITHMS]
    if unknown:
        raise ConfigError(
            f"run.algos: unknown algorithm(s) {unknown}; valid: {sorted(ALGORITHMS)}")
    if not algos:
        raise ConfigError("run.algos: empty list")
    return algos


_SIM_INTS = {"n_taps", "n_steps", "n_train", "r_true", "seed", "pulse_span"}
_SIM_FLOATS = {"snr_db", "phi_lo", "phi_hi", "omega_q", "phi_drift", "power_decay"}
_SIM_STRS = {"preset"}
_TRACKER_INTS = {"order", "rank", "n_train", "reorth_period"}
_TRACKER_FLOATS = {"mu", "beta", "sigma_v2", "floor_db"}
_TRACKER_BOOLS = {"dynamic_phi", "correlated_noise", "fb_smoothing"}
_RUN_BOOLS = {"emit_errors", "emit_phi_traj", "emit_coherence", "emit_spectrum"}


def _convert(section: str, key: str, raw: str):
    full = f"{section}.{key}"
    if section == "sim":
        if key in _SIM_INTS:
            kind = int
        elif key in _SIM_FLOATS:
            kind = float
        elif key in _SIM_STRS:
            return raw.strip()
        else:
            raise ConfigError(f"unknown key {full}")
    elif section == "tracker":
        if key in _TRACKER_INTS:
            kind = int
        elif key in _TRACKER_FLOATS:
            kind = float
        elif key in _TRACKER_BOOLS:
            return _parse_bool(raw, full)
        else:
            raise ConfigError(f"unknown key {full}")
    elif section == "run":
        if key == "algos":
            return _parse_algos(raw)
        if key == "seeds":
            return _parse_seeds(raw)
        if key in ("out_dir", "cir_csv"):
            return raw.strip()
        if key in _RUN_BOOLS:
            return _parse_bool(raw, full)
        raise ConfigError(f"unknown key {full}")
    else:
        raise ConfigError(f"unknown section [{section}]")
    try:
        return kind(raw.strip())
    except ValueError:
        raise ConfigError(f"{full}: expected {kind.__name__}, got {raw!r}") from None


def _build(sections: dict) -> ExperimentConfig:
    sim_kwargs = dict(sections.get("sim", {}))
    tracker_kwargs = dict(sections.get("tracker", {}))
    run_kwargs = dict(sections.get("run", {}))

    preset = sim_kwargs.pop("preset", None)
    try:
        if preset is not None:
            sim = SimConfig.for_preset(preset, **sim_kwargs)
        else:
            sim = SimConfig(**sim_kwargs)
        tracker_kwargs.setdefault("n_train", sim.n_train)
        tracker = TrackerConfig(**tracker_kwargs)
        run = RunConfig(**run_kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentConfig(sim=sim, tracker=tracker, run=run)


def load_config(path: Optional[str] = None, overrides: Optional[list] = None) -> ExperimentConfig:
    """Build an ExperimentConfig from an optional INI file plus overrides.

    ``overrides`` is a list of ``section.key=value`` strings applied on top of
    the file (or on top of the defaults when no file is given).
    """
    sections: dict = {"sim": {}, "tracker": {}, "run": {}}
    if path is not None:
        file_path = Path(path)
        if not file_path.is_file():
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read(file_path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        for section in parser.sections():
            if section not in sections:
                raise ConfigError(f"unknown section [{section}]")
            for key, raw in parser.items(section):
                sections[section][key] = _convert(section, key, raw)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override must be section.key=value, got {item!r}")
        full, raw = item.split("=", 1)
        if "." not in full:
            raise ConfigError(f"override must be section.key=value, got {item!r}")
        section, key = full.split(".", 1)
        if section not in sections:
            raise ConfigError(f"unknown section [{section}]")
        sections[section][key] = _convert(section, key.strip(), raw)
    return _build(sections)
