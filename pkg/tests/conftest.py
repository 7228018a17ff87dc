from pathlib import Path

import pytest

from ecplan.config import ScenarioConfig

EXAMPLE_DIR = Path(__file__).resolve().parents[1] / "src" / "ecplan" / "data" / "example"
EXAMPLE_CONFIG = EXAMPLE_DIR / "config.yaml"

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def example_config() -> ScenarioConfig:
    return ScenarioConfig.load(EXAMPLE_CONFIG)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
