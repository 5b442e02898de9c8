import pytest

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(criterion, title): exit-criteria suite")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None and mark.kwargs:
            item.user_properties.append(("criterion", mark.kwargs["criterion"]))
            item.user_properties.append(("title", mark.kwargs["title"]))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    key = props["criterion"]
    entry = _ACCEPTANCE.setdefault(key, {"title": props["title"], "outcome": "pass", "summary": ""})
    if report.when == "call" or report.outcome != "passed":
        if report.outcome != "passed":
            entry["outcome"] = "FAIL" if report.outcome == "failed" else report.outcome
        if "summary" in props:
            entry["summary"] = props["summary"]


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k[2:])):
        e = _ACCEPTANCE[key]
        status = "PASS" if e["outcome"] == "pass" else e["outcome"].upper()
        terminalreporter.write_line(f"{key:<5} {status:<5} {e['title']}  {e['summary']}".rstrip())


@pytest.fixture
def summary(record_property):
    """Call with a short string of measured numbers; it is printed next to the criterion."""
    def put(text):
        record_property("summary", text)
    return put
