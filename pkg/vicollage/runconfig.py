"""Run configuration: flat ``key = value`` files, compiled presets and the worker count.

Lists are comma separated, ``#`` starts a comment. Every key is optional; missing keys take
the values of :data:`vicollage.config.DEFAULTS`.
"""

from __future__ import annotations

import math
import os
from collections.abc import Callable, Mapping
from dataclasses import dataclass, fields, replace
from typing import Any

from .assembly import ProblemSpec
from .basis import Normalization
from .config import (
    DEFAULT_J_RANGE,
    DEFAULT_NORMALIZATION,
    DEFAULT_OBJECTIVE,
    DEFAULT_REFERENCE_M,
    DEFAULT_SAMPLES,
    DEFAULT_TARGET,
    DEFAULT_THREADS,
    DEFAULT_TOL,
    INPUT_DEGREE,
    REFERENCE_ALPHA,
    REFERENCE_BETA,
    REFERENCE_EXACT_COEFFS,
    REFERENCE_F_COEFFS,
    REFERENCE_J,
    TABLE1_M,
    TABLE2_N,
    THREADS_ENV,
)
from .errors import ConfigError
from .inverse import ObjectiveKind
from .pwpoly import PiecewisePoly, polynomial

TARGETS = ("galerkin", "exact")


@dataclass(frozen=True)
class RunConfig:
    alpha: float = REFERENCE_ALPHA
    beta: float = REFERENCE_BETA
    j_true: float = REFERENCE_J
    f_coeffs: tuple[float, ...] = REFERENCE_F_COEFFS
    exact_coeffs: tuple[float, ...] | None = REFERENCE_EXACT_COEFFS
    m: tuple[int, ...] = TABLE1_M
    n: tuple[int, ...] = TABLE2_N
    j_lo: float = DEFAULT_J_RANGE[0]
    j_hi: float = DEFAULT_J_RANGE[1]
    objective: ObjectiveKind = ObjectiveKind(DEFAULT_OBJECTIVE)
    normalization: Normalization = Normalization(DEFAULT_NORMALIZATION)
    tol: float = DEFAULT_TOL
    target: str = DEFAULT_TARGET
    samples: int = DEFAULT_SAMPLES
    reference_m: int = DEFAULT_REFERENCE_M
    output_path: str = "-"

    def __post_init__(self) -> None:
        for key in ("alpha", "beta", "j_true", "j_lo", "j_hi", "tol"):
            value = getattr(self, key)
            if not math.isfinite(value):
                raise ConfigError(key, f"must be finite, got {value}")
        if self.j_true <= 0:
            raise ConfigError("j_true", f"must be > 0, got {self.j_true}")
        if self.j_lo <= 0:
            raise ConfigError("j_lo", f"must be > 0, got {self.j_lo}")
        if not self.j_lo < self.j_hi:
            raise ConfigError("j_hi", f"must exceed j_lo ({self.j_lo}), got {self.j_hi}")
        if self.tol <= 0:
            raise ConfigError("tol", f"must be > 0, got {self.tol}")
        for key in ("f_coeffs", "exact_coeffs"):
            coeffs = getattr(self, key)
            if coeffs is None and key == "exact_coeffs":
                continue
            if not coeffs:
                raise ConfigError(key, "expected at least one coefficient")
            if not all(math.isfinite(c) for c in coeffs):
                raise ConfigError(key, "coefficients must be finite")
            degree = max((p for p, c in enumerate(coeffs) if c != 0.0), default=0)
            if degree > INPUT_DEGREE:
                raise ConfigError(key, f"degree {degree} exceeds {INPUT_DEGREE}")
        for key in ("m", "n"):
            sizes = getattr(self, key)
            if not sizes or min(sizes) < 1:
                raise ConfigError(key, f"expected a non-empty list of integers >= 1, got {sizes}")
        if self.target not in TARGETS:
            raise ConfigError("target", f"expected one of {', '.join(TARGETS)}")
        if self.samples < 2:
            raise ConfigError("samples", f"must be >= 2, got {self.samples}")
        if self.reference_m < 1:
            raise ConfigError("reference_m", f"must be >= 1, got {self.reference_m}")
        if not self.output_path:
            raise ConfigError("output_path", "must not be empty")
        if self.output_path != self.output_path.strip() or any(
            ch in self.output_path for ch in "#\r\n"
        ):
            raise ConfigError(
                "output_path", f"no '#', line breaks or surrounding blanks: {self.output_path!r}"
            )

    @property
    def j_range(self) -> tuple[float, float]:
        return self.j_lo, self.j_hi

    def problem(self) -> ProblemSpec:
        return ProblemSpec(self.alpha, self.beta, self.j_true, polynomial(self.f_coeffs))

    def exact(self) -> PiecewisePoly | None:
        return None if self.exact_coeffs is None else polynomial(self.exact_coeffs)


def _float(text: str) -> float:
    return float(text)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(","))


def _optional_floats(text: str) -> tuple[float, ...] | None:
    return None if text.lower() == "none" else _floats(text)


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(","))


def _render_floats(values: tuple[float, ...] | None) -> str:
    return "none" if values is None else ", ".join(repr(v) for v in values)


# key -> (parse, render)
_CODECS: dict[str, tuple[Callable[[str], Any], Callable[[Any], str]]] = {
    "alpha": (_float, repr),
    "beta": (_float, repr),
    "j_true": (_float, repr),
    "f_coeffs": (_floats, _render_floats),
    "exact_coeffs": (_optional_floats, _render_floats),
    "m": (_ints, lambda v: ", ".join(str(i) for i in v)),
    "n": (_ints, lambda v: ", ".join(str(i) for i in v)),
    "j_lo": (_float, repr),
    "j_hi": (_float, repr),
    "objective": (ObjectiveKind, lambda v: v.value),
    "normalization": (Normalization, lambda v: v.value),
    "tol": (_float, repr),
    "target": (str, str),
    "samples": (int, str),
    "reference_m": (int, str),
    "output_path": (str, str),
}


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines into a validated :class:`RunConfig`."""
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        if key not in _CODECS:
            raise ConfigError(key, "unknown key")
        if key in values:
            raise ConfigError(key, f"duplicate key on line {lineno}")
        try:
            values[key] = _CODECS[key][0](value)
        except ValueError as exc:
            raise ConfigError(key, f"cannot parse {value!r}: {exc}") from exc
    return RunConfig(**values)


def render_config(config: RunConfig) -> str:
    lines = [f"{f.name} = {_CODECS[f.name][1](getattr(config, f.name))}" for f in fields(config)]
    return "\n".join(lines) + "\n"


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


_REFERENCE_DATA = """\
# -u'' + sqrt(2) u = -2 + sqrt(2) (x^2 - 2x - 3) on (0, 1), u(0) = -3, u(1) = -4
alpha = -3.0
beta = -4.0
j_true = 1.4142135623730951
f_coeffs = -6.242640687119285, -2.8284271247461903, 1.4142135623730951
exact_coeffs = -3.0, -2.0, 1.0
"""

PRESET_TEXT: dict[str, str] = {
    "table1": _REFERENCE_DATA + "m = 3, 7, 15, 31, 63\n",
    "table2": _REFERENCE_DATA
    + "m = 3, 7, 15, 31\nn = 31\nj_lo = 1.0\nj_hi = 4.0\nobjective = abs_sum\n",
    "bound": _REFERENCE_DATA + "m = 3, 7, 15\nn = 1023\n",
}


def preset(name: str, norm: Normalization | str | None = None) -> RunConfig:
    """Compiled preset ``name``, optionally with another normalization."""
    if name not in PRESET_TEXT:
        raise ConfigError("preset", f"unknown preset {name!r}; known: {', '.join(PRESET_TEXT)}")
    config = parse_config(PRESET_TEXT[name])
    if norm is not None:
        config = replace(config, normalization=Normalization(norm))
    return config


def resolve_threads(env: Mapping[str, str] | None = None) -> int:
    """Worker count for sweeps from ``VICOLLAGE_THREADS``, default when unset."""
    raw = (os.environ if env is None else env).get(THREADS_ENV, "").strip()
    if not raw:
        return DEFAULT_THREADS
    try:
        threads = int(raw)
    except ValueError as exc:
        raise ConfigError(THREADS_ENV, f"expected a positive integer, got {raw!r}") from exc
    if threads < 1:
        raise ConfigError(THREADS_ENV, f"expected a positive integer, got {threads}")
    return threads
