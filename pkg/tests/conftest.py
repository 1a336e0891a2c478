import pytest

from tempcorr import kernels

_ACCEPTANCE = {}


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request):
    """Each available kernel module in turn."""
    return kernels.backends()[request.param]


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    rep = outcome.get_result()
    number, title = marker.args
    entry = _ACCEPTANCE.setdefault(number, {"title": title, "passed": True, "detail": ""})
    if rep.failed:
        entry["passed"] = False
        crash = getattr(rep.longrepr, "reprcrash", None)
        entry["detail"] = crash.message.splitlines()[0] if crash else rep.when
    elif rep.skipped and rep.when == "setup":
        entry["passed"] = None


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[number]
        status = {True: "PASS", False: "FAIL", None: "SKIP"}[entry["passed"]]
        line = f"criterion {number:>2}: {status}  {entry['title']}"
        if entry["detail"]:
            line += f"  ({entry['detail']})"
        terminalreporter.write_line(line)
