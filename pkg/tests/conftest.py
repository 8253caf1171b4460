import pytest

from exactla.bench import config
from exactla.sparse_apply import COUNTER


@pytest.fixture(autouse=True)
def _isolated_tuning(monkeypatch, tmp_path):
    # no stray xla.conf from the working directory leaks into a test
    monkeypatch.setenv(config.CONFIG_ENV, str(tmp_path / "absent.conf"))
    config.set_tuned_config({})
    COUNTER.reset()
    yield
    config.set_tuned_config(None)


_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one pass/fail line for an acceptance criterion."""

    def _report(number: int, ok: bool, detail: str, label: str | None = None):
        label = label or ("PASS" if ok else "FAIL")
        line = f"criterion {number:>2}: {label}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
