import time

SESSION_T0 = time.monotonic()


def session_elapsed() -> float:
    return time.monotonic() - SESSION_T0


def pytest_collection_modifyitems(items):
    # acceptance checks run after the unit suites so their wall-clock
    # budget line covers (nearly) the whole session
    items.sort(key=lambda it: it.fspath.basename == "test_acceptance.py")
