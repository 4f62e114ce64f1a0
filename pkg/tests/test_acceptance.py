"""End-to-end release checks, one test per numbered criterion."""

import pytest

from transasym import acceptance


@pytest.mark.parametrize("number", sorted(acceptance.CHECKS))
def test_criterion(number):
    name, _ = acceptance.CHECKS[number]
    passed, detail = acceptance.run_check(number)
    print(f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    assert passed, f"criterion {number} ({name}): {detail}"
