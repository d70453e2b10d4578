import pytest

ACCEPTANCE_RESULTS: dict[int, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    crit = getattr(item.function, "criterion", None)
    if crit is None or report.when != "call":
        return
    number, title, limit = crit
    elapsed = call.stop - call.start
    status = "PASS" if report.passed else "FAIL"
    ACCEPTANCE_RESULTS[number] = (
        f"criterion {number} {status}  {title}  ({elapsed:.2f}s, limit {limit:g}s)"
    )


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance")
    for k in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[k])
