import pytest

from bbpe.trainer import TrainerConfig
from bbpe.vocab import finalize
from bbpe.trainer import TrainResult

_criteria = {}


def pytest_runtest_logreport(report):
    marks = getattr(report, "criterion", None)
    if marks is None:
        return
    number, title = marks
    entry = _criteria.setdefault(number, [title, True, 0])
    if report.failed:
        entry[1] = False
    if report.when == "call":
        entry[2] += 1


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        report.criterion = (mark.args[0], mark.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok, n = _criteria[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}  ({n} checks)")


def fallback_vocab(distinguish_leading=True):
    cfg = TrainerConfig(vocab_size=10_000, distinguish_leading=distinguish_leading)
    return finalize(TrainResult([], [], {}), cfg)


@pytest.fixture
def fallback_only():
    return fallback_vocab()
