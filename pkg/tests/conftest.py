import pytest

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_RESULTS] = {}


@pytest.fixture
def criterion(request):
    """Record a named acceptance outcome, then assert it."""
    store = request.config.stash[_RESULTS]

    def check(key, ok, detail=""):
        store[key] = (bool(ok), detail)
        assert ok, f"criterion {key} failed: {detail}"

    return check


def pytest_terminal_summary(terminalreporter, config):
    store = config.stash.get(_RESULTS, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")

    def order(k):
        num = "".join(c for c in k if c.isdigit())
        return int(num), k

    for key in sorted(store, key=order):
        ok, detail = store[key]
        terminalreporter.write_line(f"criterion {key:<3} {'PASS' if ok else 'FAIL'}  {detail}")
