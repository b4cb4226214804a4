import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import fmaguard.classifier as zcc
import fmaguard.harness as hn


@pytest.fixture(scope="session")
def default_scenario_fixture():
    from fmaguard.scenario import default_scenario

    return default_scenario()


@pytest.fixture(scope="session")
def trained_model():
    """A zone-confirmation model trained on a compact sweep, shared by the
    pipeline and harness tests."""
    cases = hn.generate_sweep(hn.SweepSpec(positives=160, negatives=160), seed=101)
    x, y, _ = hn.build_dataset(cases)
    result = zcc.train(x, y, zcc.TrainConfig(epochs=80, seed=5))
    return result.model


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_DESCRIPTIONS = {
    "test_criterion_01": "relay characteristic matches independent oracle on 200x200 grid",
    "test_criterion_02": "fault-solver boundary conditions, KCL and dense-oracle agreement",
    "test_criterion_03": "masking completeness over the full 2673-scenario sweep",
    "test_criterion_04": "first-stage detection rate >= 95% with external false latches > 0",
    "test_criterion_05": "full pipeline: zero false alarms, recall >= 95%, within budget",
    "test_criterion_06": "safety-factor sensitivity on the 150-ohm mid-line case",
    "test_criterion_07": "300-ohm double-line-ground detected at 80% of the line",
    "test_criterion_08": "disturbance suites with noise raise zero alarms",
    "test_criterion_09": "noisy bolted-fault detection in >= 99/100 seeds",
    "test_criterion_10": "classifier numerics and ROC ordering",
    "test_criterion_11": "byte-identical CLI re-runs",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" not in report.nodeid:
                continue
            name = report.nodeid.split("::")[-1]
            key = name[:17]
            rows.append((name, outcome, ACCEPTANCE_DESCRIPTIONS.get(key, "")))
    if not rows:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome, desc in sorted(rows):
        tag = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{tag}  {name}: {desc}")
