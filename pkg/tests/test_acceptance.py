"""Full acceptance sweep, one verdict line per criterion under pytest -v.

Criteria run at their full sample counts and grid sizes, so this file
dominates the suite's runtime.  A failing line here is a real, reproducible
shortfall of the implementation against its contract; see the acceptance
section of the README for the one currently expected.
"""

import pytest

from mallowslab.acceptance import criterion_names, run_criterion

_NAMES = criterion_names()


@pytest.mark.parametrize("name", _NAMES, ids=_NAMES)
def test_criterion(name):
    index = int(name.split("-", 1)[0])
    result = run_criterion(index, quick=False)
    assert result.passed, (
        f"criterion {name} failed in {result.seconds:.2f}s; "
        f"details: {result.details}")
