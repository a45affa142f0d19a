"""Regime-switching semi-Markov option pricer.

Scenarios are the same JSON documents the ``smrs`` command line reads; every
function accepts a dict, a JSON string or a path to a file.
"""

from __future__ import annotations

import json
import os
from typing import Any, Mapping, Sequence, Union

from ._core import (
    ConfigError,
    NoConvergence,
    SmrsError,
    Solution as _Solution,
    ValidationError,
    __version__,
)
from . import _core

Config = Union[Mapping[str, Any], str, os.PathLike]

__all__ = [
    "ConfigError",
    "NoConvergence",
    "SmrsError",
    "Solution",
    "ValidationError",
    "__version__",
    "describe_grid",
    "resolve",
    "run",
    "selftest",
]


def _text(config: Config) -> str:
    if isinstance(config, Mapping):
        return json.dumps(config)
    if isinstance(config, os.PathLike) or (isinstance(config, str) and not config.lstrip().startswith("{")):
        with open(config, encoding="utf-8") as fh:
            return fh.read()
    return config


def describe_grid(config: Config) -> dict:
    """Resolved grid, without solving."""
    return json.loads(_core.describe_grid(_text(config)))


def resolve(config: Config) -> dict:
    """The scenario with every default filled in."""
    return json.loads(_core.resolve(_text(config)))


def run(config: Config, out_dir: Union[str, os.PathLike], threads: int = 1) -> dict:
    """Solve, write the CSV/JSON outputs into ``out_dir`` and return the report."""
    return json.loads(_core.run(_text(config), os.fspath(out_dir), threads))


def selftest(only: Sequence[int] = (), threads: int = 1) -> tuple[bool, str, dict]:
    """Run acceptance criteria; returns (passed, table, report)."""
    passed, table, report = _core.selftest(list(only), threads)
    return passed, table, json.loads(report)


class Solution(_Solution):
    """A converged price field that can be queried off the grid.

    States ``x`` are 1-based, one per component; ``y`` are the ages.
    """

    def __init__(self, config: Config, threads: int = 1):
        super().__init__(_text(config), threads)
