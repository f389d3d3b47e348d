import pytest

from tagcalc.corpus import load_corpus
from tagcalc.dsl import parse


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


@pytest.fixture(scope="session")
def corpus_exprs(corpus):
    return [(src, parse(src)) for src in corpus]


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by a test")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    n, title = mark.args
    store = item.config._criteria
    ok = store.get(n, (title, True))[1] and not rep.failed
    if rep.when == "call" or rep.failed:
        store[n] = (title, ok)


def pytest_terminal_summary(terminalreporter, config):
    store = getattr(config, "_criteria", {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(store):
        title, ok = store[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
