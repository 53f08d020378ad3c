import pytest

_ACCEPTANCE = {}


class AcceptanceLog:
    """Collects one verdict line per acceptance criterion."""

    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.checks = []

    def check(self, label, ok, detail=""):
        self.checks.append((label, bool(ok), detail))
        return bool(ok)

    @property
    def passed(self):
        return bool(self.checks) and all(ok for _, ok, _ in self.checks)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        failed = [f"{label} ({detail})" for label, ok, detail in self.checks if not ok]
        tail = "; failed: " + "; ".join(failed) if failed else f"; {len(self.checks)} checks"
        return f"criterion {self.number} [{status}] {self.title}{tail}"

    def finish(self):
        print("\n" + self.line())
        for label, ok, detail in self.checks:
            print(f"    {'ok  ' if ok else 'FAIL'} {label}: {detail}")
        bad = [label for label, ok, _ in self.checks if not ok]
        assert not bad, f"criterion {self.number} failed checks: {bad}"


@pytest.fixture
def acceptance(request):
    def make(number, title):
        log = AcceptanceLog(number, title)
        _ACCEPTANCE[number] = log
        return log
    return make


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n].line())
