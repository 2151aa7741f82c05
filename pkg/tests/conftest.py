"""Shared builders and the acceptance summary.

Expected values in the suite come in three kinds, noted next to each test:
``published`` (transcribed reference data, also stored in the bundled fixtures),
``derived`` (recomputed here by an independent oracle in ``oracles.py``) and
``trivial`` (immediate from the definitions).
"""

from __future__ import annotations

import functools
import os

import pytest
from hypothesis import HealthCheck, settings

from bianchihom.equivss import SpectralPages, resolve_extensions
from bianchihom.orbifold import build_gamma_complex
from bianchihom.reportcli import load_fixture

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True, print_blob=True
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIGURE_M = (5, 6, 10, 13, 15)
TRIVIAL_CLASS_M = (1, 2, 3, 7, 11)
Q_TOP = 12


@functools.lru_cache(maxsize=None)
def gamma(m: int):
    return build_gamma_complex(m, load_fixture(m).walls())


@functools.lru_cache(maxsize=None)
def pages(m: int, tag: str, q_max: int = Q_TOP + 1) -> SpectralPages:
    return SpectralPages(gamma(m), tag, q_max)


@functools.lru_cache(maxsize=None)
def resolved(m: int):
    allp = {t: pages(m, t) for t in ("Z", "Z2", "Z3", "Z4")}
    return resolve_extensions(allp, Q_TOP + 1)[: Q_TOP + 1]


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'} - {detail}")
