import pytest

from elo_arena.gateway import GatewayConfig
from stub_judge import StubJudge


@pytest.fixture
def stub_judge():
    """Factory: ``stub_judge(handler, delay=0)`` starts a StubJudge torn down after the test."""
    started = []

    def make(handler, delay=0.0):
        s = StubJudge(handler, delay).__enter__()
        started.append(s)
        return s

    yield make
    for s in started:
        s.__exit__(None, None, None)


@pytest.fixture
def fast_gateway(monkeypatch):
    monkeypatch.delenv("ELO_ARENA_JUDGE_URL", raising=False)

    def make(url, **kw):
        kw.setdefault("backoff_base", 1.0)
        kw.setdefault("timeout", 5000)
        return GatewayConfig(base_url=url, **kw)

    return make


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance")
        for line in RESULTS:
            terminalreporter.write_line(line)
