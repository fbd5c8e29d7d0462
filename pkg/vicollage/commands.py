"""Command registry for the vicollage CLI.

Each command takes a :class:`~vicollage.runconfig.RunConfig` and an executor and returns a
:class:`Table`. Rows are computed through ``executor.map`` so they come back in the order of
the configured ``m``/``n`` lists whatever the completion order. :mod:`vicollage.cli` builds
its subcommands and help pages from :data:`HELP`.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import ConfigError
from .galerkin import error_norms, norms_of, solve_direct
from .inverse import collage_bound, recover_parameter
from .pwpoly import PiecewisePoly, subtract
from .runconfig import RunConfig, preset

logger = logging.getLogger(__name__)

DIRECT_HEADER = ("m", "l2_error", "h1semi_error", "h1_error")
SAMPLES_HEADER = ("m", "x", "u_m")
INVERSE_HEADER = ("m", "n", "j_star", "objective_value", "objective", "normalization")
BOUND_HEADER = ("m", "n", "h1_error", "collage_bound", "ratio")

REPRO = {"table1": "direct", "table2": "inverse", "bound": "bound"}


@dataclass(frozen=True)
class Table:
    header: tuple[str, ...]
    rows: list[tuple[str, ...]]


Command = Callable[[RunConfig, Executor], Table]

# Structured help registry: cmd -> metadata.
HELP: dict[str, dict[str, Any]] = {}
COMMANDS: dict[str, Command] = {}


def fmt(value: float) -> str:
    return format(float(value), ".12g")


def _describe(
    name: str,
    desc: str,
    usage: str,
    long_desc: str = "",
    examples: list[str] | None = None,
    group: str = "General",
) -> None:
    HELP[name] = {
        "name": name,
        "desc": desc.strip(),
        "usage": usage.strip(),
        "long": "\n".join(line.strip() for line in long_desc.strip().splitlines()),
        "examples": examples or [],
        "group": group,
    }


def _add(name: str, desc: str, usage: str, **meta: Any) -> Callable[[Command], Command]:
    """Decorator factory: register a config-driven command and store its help metadata."""
    _describe(name, desc, usage, **meta)

    def wrap(func: Command) -> Command:
        COMMANDS[name] = func
        return func

    return wrap


def _require_exact(config: RunConfig, command: str) -> PiecewisePoly:
    exact = config.exact()
    if exact is None:
        raise ConfigError("exact_coeffs", f"required by '{command}'")
    return exact


def _targets(config: RunConfig, command: str) -> list[tuple[str, PiecewisePoly]]:
    """``(label, y)`` per target: Galerkin solutions at ``j_true`` or the exact solution."""
    if config.target == "exact":
        return [("exact", _require_exact(config, command))]
    spec = config.problem()
    return [(str(m), solve_direct(spec, m, config.normalization).as_pwpoly) for m in config.m]


@_add(
    "direct",
    desc="Solve the boundary value problem on H_m and report exact error norms.",
    usage="direct [--config PATH] [--out PATH] [--manifest PATH]",
    long_desc="""
        Solves -u'' + j u = f with u(0) = alpha, u(1) = beta for every m in the config.
        With exact_coeffs set, writes one row of L2, H1-seminorm and H1 errors per m.
        With exact_coeffs = none, writes the solution at `samples` equispaced points instead.
    """,
    examples=["direct --config configs/table1.conf", "direct --config my.conf --out u.csv"],
    group="Solve",
)
def cmd_direct(config: RunConfig, executor: Executor) -> Table:
    spec = config.problem()
    exact = config.exact()

    def errors(m: int) -> tuple[str, ...]:
        assert exact is not None
        norms = error_norms(solve_direct(spec, m, config.normalization), exact)
        logger.info("m=%d h1 error %.6g", m, norms.h1)
        return (str(m), fmt(norms.l2), fmt(norms.h1semi), fmt(norms.h1))

    def samples(m: int) -> list[tuple[str, ...]]:
        sol = solve_direct(spec, m, config.normalization)
        xs = np.linspace(0.0, 1.0, config.samples)
        return [(str(m), fmt(x), fmt(u)) for x, u in zip(xs, sol(xs))]

    if exact is not None:
        return Table(DIRECT_HEADER, list(executor.map(errors, config.m)))
    blocks = executor.map(samples, config.m)
    return Table(SAMPLES_HEADER, list(itertools.chain.from_iterable(blocks)))


@_add(
    "inverse",
    desc="Recover j from a target by minimizing the collage objective.",
    usage="inverse [--config PATH] [--out PATH] [--manifest PATH]",
    long_desc="""
        For every (m, n) pair the target is the Galerkin solution u_m at j_true, tested
        against the first n hat functions. target = exact uses the exact solution instead.
        objective: abs_sum (closed form), dual_norm, or distance (solves the direct problem
        at each trial j on H_reference_m).
    """,
    examples=["inverse --config configs/table2.conf"],
    group="Solve",
)
def cmd_inverse(config: RunConfig, executor: Executor) -> Table:
    f = config.problem().f
    targets = _targets(config, "inverse")

    def row(item: tuple[tuple[str, PiecewisePoly], int]) -> tuple[str, ...]:
        (label, y), n = item
        result = recover_parameter(
            y,
            f,
            n,
            config.j_range,
            config.objective,
            config.normalization,
            tol=config.tol,
            m=None if label == "exact" else int(label),
            reference_m=config.reference_m,
        )
        logger.info("m=%s n=%d j*=%.9g", label, n, result.j_star)
        return (
            label,
            str(n),
            fmt(result.j_star),
            fmt(result.objective_value),
            result.objective_kind.value,
            result.norm.value,
        )

    return Table(INVERSE_HEADER, list(executor.map(row, itertools.product(targets, config.n))))


@_add(
    "bound",
    desc="Compare the collage bound with the exact H1 distance to the solution.",
    usage="bound [--config PATH] [--out PATH] [--manifest PATH]",
    long_desc="""
        For every (m, n) pair, writes the H1 error of the target and the collage bound
        (dual norm of the residual over n test functions, divided by min(1, j_true)).
        ratio = collage_bound / h1_error, nan when the error vanishes. Needs exact_coeffs.
    """,
    examples=["bound --config configs/bound.conf"],
    group="Solve",
)
def cmd_bound(config: RunConfig, executor: Executor) -> Table:
    exact = _require_exact(config, "bound")
    spec = config.problem()
    targets = _targets(config, "bound")

    def row(item: tuple[tuple[str, PiecewisePoly], int]) -> tuple[str, ...]:
        (label, y), n = item
        error = norms_of(subtract(exact, y)).h1
        bound = collage_bound(y, spec, n, config.normalization)
        ratio = bound / error if error > 0 else math.nan
        if ratio < 1:
            logger.warning("m=%s n=%d collage bound below the error (ratio %.6g)", label, n, ratio)
        return (label, str(n), fmt(error), fmt(bound), fmt(ratio))

    return Table(BOUND_HEADER, list(executor.map(row, itertools.product(targets, config.n))))


def repro(name: str, norm: str | None, executor: Executor) -> tuple[RunConfig, Table]:
    """Run the compiled preset ``name`` through the command that reproduces it."""
    if name not in REPRO:
        raise ConfigError("preset", f"unknown preset {name!r}; known: {', '.join(REPRO)}")
    config = preset(name, norm)
    return config, COMMANDS[REPRO[name]](config, executor)


_describe(
    "repro",
    desc="Reproduce a published table from a compiled preset.",
    usage="repro table1|table2|bound [--norm flat|l2] [--out PATH] [--manifest PATH]",
    long_desc="""
        table1: direct errors for m = 3, 7, 15, 31, 63.
        table2: recovered j for m = 3, 7, 15, 31 with n = 31.
        bound: collage bound against the H1 error with n = 1023.
    """,
    examples=["repro table1", "repro table2 --norm l2"],
    group="Reproduce",
)
_describe(
    "help",
    desc="Show available commands or details for a specific command.",
    usage="help [command]",
    examples=["help", "help inverse"],
)
