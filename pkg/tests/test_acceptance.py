"""Release gate: every acceptance criterion at its pinned tolerance.

Each criterion prints one PASS/FAIL line (visible with ``pytest -s`` or in
the CLI via ``qsm check``) and must pass for the build to be considered
good.
"""

import time

import pytest

from qsm.acceptance import CRITERIA


@pytest.mark.parametrize("name,func", CRITERIA, ids=[name for name, _ in CRITERIA])
def test_criterion(name, func):
    start = time.perf_counter()
    passed, detail = func()
    elapsed = time.perf_counter() - start
    print(f"{'PASS' if passed else 'FAIL'}  {name}  ({elapsed:.1f}s)  {detail}")
    assert passed, f"{name}: {detail}"
