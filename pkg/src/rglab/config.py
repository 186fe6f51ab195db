"""Experiment configuration: TOML file plus command-line overrides.

Sections in the file are only for readability; keys are flattened into one
namespace and a key may appear in at most one section.  Flags win over the
file.  Validation errors point at the offending file line when the value came
from the file.
"""

import re
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["ConfigError", "ExperimentConfig", "load_config"]

MODELS = ("sparse_linear", "gaussian", "prior_synthetic")

KNOWN_KEYS = {
    "model", "n", "n_grid", "k", "u", "B", "seed", "mode", "scale", "output_dir", "workers",
    "bins", "target_overlap", "estimator", "n_lo", "n_hi", "resolution", "covariance",
}


# where and how a run executes; they never change results
EXECUTION_KEYS = ("output_dir", "workers")


class ConfigError(Exception):
    """Invalid configuration; the CLI maps it to exit status 2."""


@dataclass
class ExperimentConfig:
    values: dict
    source: str = None
    lines: dict = field(default_factory=dict)
    origins: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def where(self, key):
        origin = self.origins.get(key)
        if origin == "file":
            line = self.lines.get(key)
            return f"{self.source}:{line}" if line else self.source
        if origin == "flag":
            return f"--{key.replace('_', '-')}"
        return "default"

    def fail(self, key, message):
        raise ConfigError(f"{self.where(key)}: {key}: {message}")

    def echo(self, execution=True):
        """Canonical, JSON-ready copy of the effective configuration.

        With ``execution=False`` the output directory and worker count are left
        out, so result files do not depend on where or how the run executed.
        """
        keys = sorted(self.values)
        if not execution:
            keys = [key for key in keys if key not in EXECUTION_KEYS]
        return {key: self.values[key] for key in keys}


def _key_lines(text):
    lines = {}
    pattern = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=")
    for lineno, line in enumerate(text.splitlines(), start=1):
        match = pattern.match(line)
        if match:
            lines.setdefault(match.group(1), lineno)
    return lines


def _flatten(doc, source, lines):
    flat = {}
    for key, value in doc.items():
        if isinstance(value, dict):
            for sub, subval in value.items():
                if sub in flat:
                    raise ConfigError(f"{source}:{lines.get(sub, '?')}: duplicate key {sub!r}")
                flat[sub] = subval
        else:
            if key in flat:
                raise ConfigError(f"{source}:{lines.get(key, '?')}: duplicate key {key!r}")
            flat[key] = value
    unknown = sorted(set(flat) - KNOWN_KEYS)
    if unknown:
        key = unknown[0]
        raise ConfigError(f"{source}:{lines.get(key, '?')}: unknown key {key!r}")
    return flat


def load_config(path=None, defaults=None, overrides=None):
    """Merge defaults < file < overrides into an ``ExperimentConfig``.

    ``overrides`` entries whose value is ``None`` are ignored.
    """
    values = dict(defaults or {})
    origins = {key: "default" for key in values}
    lines = {}
    source = None
    if path is not None:
        source = str(path)
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise ConfigError(f"{source}: cannot read config: {exc.strerror}")
        text = raw.decode("utf-8", errors="replace")
        try:
            doc = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{source}: {exc}")
        lines = _key_lines(text)
        for key, value in _flatten(doc, source, lines).items():
            values[key] = value
            origins[key] = "file"
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
            origins[key] = "flag"
    return ExperimentConfig(values=values, source=source, lines=lines, origins=origins)


def require_int(cfg, key, minimum=None, maximum=None):
    value = cfg.get(key)
    if value is None:
        cfg.fail(key, "is required")
    if isinstance(value, bool) or not isinstance(value, int):
        cfg.fail(key, f"must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        cfg.fail(key, f"must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        cfg.fail(key, f"must be <= {maximum}, got {value}")
    return value


def require_choice(cfg, key, choices):
    value = cfg.get(key)
    if value not in choices:
        cfg.fail(key, f"must be one of {', '.join(choices)}, got {value!r}")
    return value


def require_float(cfg, key, low, high, low_open=True):
    value = cfg.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        cfg.fail(key, f"must be a number, got {value!r}")
    ok = (value > low if low_open else value >= low) and value <= high
    if not ok:
        cfg.fail(key, f"must lie in {'(' if low_open else '['}{low}, {high}], got {value}")
    return float(value)
