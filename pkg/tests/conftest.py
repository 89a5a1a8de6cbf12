import pytest


def pytest_addoption(parser):
    parser.addoption("--heavy", action="store_true", default=False,
                     help="run the long Monte Carlo validation tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--heavy"):
        return
    skip = pytest.mark.skip(reason="heavy Monte Carlo run; pass --heavy to enable")
    for item in items:
        if "heavy" in item.keywords:
            item.add_marker(skip)
