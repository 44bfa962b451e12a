"""Run configuration: an INI-style ``key = value`` file.

Sections and keys (all optional)::

    [grid]        radii = 0.1, 0.5, 0.9     (or count, r_min, r_max; geometric)
                  seed = 0
    [tolerances]  kernel_tol, curvature_tol, norm_tol
    [budgets]     max_terms, quad_subdivisions
    [model]       json = {"factors": [...]}   (continuation lines allowed)
    [checks]      full_constancy = true|false
"""
from __future__ import annotations

import configparser
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

DEFAULT_RADIUS_COUNT = 20
DEFAULT_R_MIN = 0.05
DEFAULT_R_MAX = 0.95


def geometric_grid(count: int, r_min: float, r_max: float) -> tuple[float, ...]:
    if count == 1:
        return (r_min,)
    step = math.log(r_max / r_min) / (count - 1)
    pts = [r_min * math.exp(i * step) for i in range(count)]
    pts[-1] = r_max
    return tuple(pts)


@dataclass(frozen=True)
class RunConfig:
    radii: tuple[float, ...] = field(default_factory=lambda: geometric_grid(DEFAULT_RADIUS_COUNT, DEFAULT_R_MIN, DEFAULT_R_MAX))
    seed: int = 0
    kernel_tol: float = 1e-10
    curvature_tol: float = 1e-9
    norm_tol: float = 1e-10
    max_terms: int = 1_000_000
    quad_subdivisions: int = 2000
    model: dict | None = None
    full_constancy: bool = False

    def environment(self) -> dict:
        return {
            "radii": list(self.radii),
            "seed": self.seed,
            "kernel_tol": self.kernel_tol,
            "curvature_tol": self.curvature_tol,
            "norm_tol": self.norm_tol,
            "max_terms": self.max_terms,
            "quad_subdivisions": self.quad_subdivisions,
            "model": self.model,
            "full_constancy": self.full_constancy,
        }


_KEYS = {
    "grid": {"radii", "count", "r_min", "r_max", "seed"},
    "tolerances": {"kernel_tol", "curvature_tol", "norm_tol"},
    "budgets": {"max_terms", "quad_subdivisions"},
    "model": {"json"},
    "checks": {"full_constancy"},
}


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    current = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return no
            continue
        if key is not None and current == section and re.match(rf"{re.escape(key)}\s*[=:]", line):
            return no
    return None


def parse_config_text(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, strict=True, inline_comment_prefixes=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        raise ConfigError(exc.message.splitlines()[0] if hasattr(exc, "message") else str(exc), line=line) from None

    def fail(msg, section, key=None):
        raise ConfigError(msg, line=_line_of(text, section, key), key=key or section)

    for section in parser.sections():
        if section not in _KEYS:
            fail(f"unknown section [{section}]", section)
        for key in parser[section]:
            if key not in _KEYS[section]:
                fail(f"unknown key '{key}' in [{section}]", section, key)

    values: dict = {}

    def positive_float(section, key):
        raw = parser[section][key]
        try:
            v = float(raw)
        except ValueError:
            fail(f"{key} must be a number, got {raw!r}", section, key)
        if not (v > 0 and math.isfinite(v)):
            fail(f"{key} must be positive", section, key)
        return v

    def positive_int(section, key):
        raw = parser[section][key]
        try:
            v = int(float(raw))
            if v != float(raw):
                raise ValueError
        except ValueError:
            fail(f"{key} must be an integer, got {raw!r}", section, key)
        if v < 1:
            fail(f"{key} must be positive", section, key)
        return v

    if parser.has_section("tolerances"):
        for key in parser["tolerances"]:
            values[key] = positive_float("tolerances", key)
    if parser.has_section("budgets"):
        for key in parser["budgets"]:
            values[key] = positive_int("budgets", key)
    if parser.has_section("grid"):
        grid = parser["grid"]
        if "seed" in grid:
            try:
                values["seed"] = int(grid["seed"])
            except ValueError:
                fail("seed must be an integer", "grid", "seed")
        if "radii" in grid:
            if any(k in grid for k in ("count", "r_min", "r_max")):
                fail("give either radii or count/r_min/r_max, not both", "grid", "radii")
            try:
                radii = tuple(float(v) for v in grid["radii"].replace(",", " ").split())
            except ValueError:
                fail("radii must be a list of numbers", "grid", "radii")
            if not radii:
                fail("radii must not be empty", "grid", "radii")
            if any(not 0.0 < r < 1.0 for r in radii):
                fail("radii must all lie in (0, 1)", "grid", "radii")
            values["radii"] = radii
        elif any(k in grid for k in ("count", "r_min", "r_max")):
            count = positive_int("grid", "count") if "count" in grid else DEFAULT_RADIUS_COUNT
            r_min = positive_float("grid", "r_min") if "r_min" in grid else DEFAULT_R_MIN
            r_max = positive_float("grid", "r_max") if "r_max" in grid else DEFAULT_R_MAX
            if not r_min <= r_max < 1.0:
                fail("r_min and r_max need 0 < r_min <= r_max < 1", "grid", "r_max" if "r_max" in grid else "r_min")
            values["radii"] = geometric_grid(count, r_min, r_max)
    if parser.has_section("model") and "json" in parser["model"]:
        try:
            values["model"] = json.loads(parser["model"]["json"])
        except json.JSONDecodeError as exc:
            fail(f"model json does not parse: {exc.msg}", "model", "json")
        if not isinstance(values["model"], dict) or "factors" not in values["model"]:
            fail("model json must be an object with a 'factors' list", "model", "json")
    if parser.has_section("checks") and "full_constancy" in parser["checks"]:
        try:
            values["full_constancy"] = parser["checks"].getboolean("full_constancy")
        except ValueError:
            fail("full_constancy must be true or false", "checks", "full_constancy")
    return RunConfig(**values)


def parse_config(path) -> RunConfig:
    """Read and validate a configuration file (UTF-8)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"config {path} is not valid UTF-8") from None
    return parse_config_text(text)
