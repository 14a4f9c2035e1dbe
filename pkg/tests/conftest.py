import numpy as np
import pytest

from expertrank import SamplingOracle, validate_instance
from expertrank.env import NoiseModel


def permuted(means, perm):
    """Place row k of ``means`` at position perm[k]."""
    out = np.empty_like(means)
    out[list(perm)] = means
    return validate_instance(out)


@pytest.fixture
def noiseless():
    def make(instance, seed=0, cap=None):
        return SamplingOracle(instance, NoiseModel.NOISELESS, seed, cap)
    return make


def pytest_terminal_summary(terminalreporter):
    """One verdict line per acceptance criterion, with the measured evidence."""
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "acceptance" not in rep.keywords:
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], outcome.upper()[:4], props.get("detail", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for crit, verdict, detail in sorted(lines):
            terminalreporter.write_line(f"criterion {crit}: {verdict}  {detail}")
