"""Shared fixtures: the acceptance-criteria recorder.

Acceptance tests wrap their body in `with criterion(id, text):`; every
criterion then contributes one PASS/FAIL line to a summary section at
the end of the pytest run, visible regardless of output capture.
"""

from contextlib import contextmanager

import pytest


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def criterion(request):
    lines = request.config._acceptance_lines

    @contextmanager
    def _criterion(cid, desc):
        info = {}
        try:
            yield info
        except BaseException:
            note = info.get("note")
            lines.append("FAIL %s: %s%s"
                         % (cid, desc, " [%s]" % note if note else ""))
            raise
        note = info.get("note")
        lines.append("PASS %s: %s%s"
                     % (cid, desc, " [%s]" % note if note else ""))

    return _criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in sorted(lines, key=lambda s: (len(s.split(":")[0]), s)):
            terminalreporter.write_line(ln)
