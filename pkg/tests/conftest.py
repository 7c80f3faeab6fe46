import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from aahc_sim import _purepy, kernels  # noqa: E402

BACKENDS = [("python", _purepy)]
if kernels.BACKEND == "compiled":
    BACKENDS.append(("compiled", kernels._impl))


@pytest.fixture(params=[b[1] for b in BACKENDS], ids=[b[0] for b in BACKENDS])
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for num in sorted(results):
            terminalreporter.write_line(results[num])
