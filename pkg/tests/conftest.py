import json
from pathlib import Path

import pytest

from mindlens.corpus import Post
from mindlens.lexicon import Lexicon, load_lexicon

FIXTURES = Path(__file__).parent / "fixtures"

#: (criterion name, "PASS"|"FAIL") tuples collected by the acceptance suite.
ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def record_criterion(name: str, passed: bool) -> None:
    ACCEPTANCE_RESULTS.append((name, "PASS" if passed else "FAIL"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for name, status in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(f"{status}  {name}")


def load_fixture(name: str):
    return json.loads((FIXTURES / name).read_text(encoding="utf-8"))


def make_post(pid: str, text: str, community: str = "mentalhealth", created: int = 1_577_000_000) -> Post:
    return Post(id=pid, community=community, created_at=created, title=text, body="")


@pytest.fixture(scope="session")
def small_lexicon() -> Lexicon:
    return load_lexicon(FIXTURES / "lexicon_small.json")


@pytest.fixture()
def fixtures_dir() -> Path:
    return FIXTURES
