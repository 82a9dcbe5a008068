import pytest

from vcrank.synthgen import DatasetConfig, build_balanced_test_set, build_training_set
from vcrank.toy_lmm import TrainConfig, fine_tune, init_model


@pytest.fixture(scope="session")
def red_green_model():
    """Toy model fine-tuned on red_green with feature A perfectly predictive."""
    data = build_training_set(DatasetConfig("red_green", rho_a=1.0, base_seed=0))
    return fine_tune(init_model(0), data, TrainConfig(seed=0))


@pytest.fixture(scope="session")
def red_green_probe():
    return build_balanced_test_set(DatasetConfig("red_green", n_test=100, base_seed=0))


_VERDICTS: list[str] = []


@pytest.fixture(scope="session")
def verdict():
    """Record one PASS/FAIL line per acceptance criterion, echoed at the end of the run."""

    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        print(line)
        _VERDICTS.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS):
            terminalreporter.write_line(line)
