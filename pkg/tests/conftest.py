import copy

import numpy as np
import pytest

from upliftsim.config import parse_config

FIG1A = {
    "schema": "upliftsim.env/1",
    "arms": 2,
    "N": 2,
    "M": 2,
    "base": {"kind": "sine", "lambda": [2, 1], "g": [0.7, 0.7]},
    "drift": {"kind": "constant", "level": 0},
    "seed": 0,
}


def env_dict(**overrides):
    d = copy.deepcopy(FIG1A)
    if "bases" in overrides:
        del d["base"]
    d.update(copy.deepcopy(overrides))
    return d


def build(**overrides):
    return parse_config(env_dict(**overrides))


def constant_arms(*values, n=2):
    """Per-arm tabulated bases with constant grids over [-1, 1]^n."""
    return [{"kind": "tabulated", "constant": v} for v in values]


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


# --- acceptance summary ------------------------------------------------------
# Tests in test_acceptance.py carry a ``criterion`` marker; their outcome and
# any ``record_property`` measurements are echoed as one line per criterion.

_ACCEPTANCE: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _ACCEPTANCE.setdefault(number, {"title": title, "passed": True, "ran": False, "props": []})
    if report.when == "call":
        entry["ran"] = True
        entry["props"] = list(item.user_properties)
    if report.failed:
        entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[number]
        flag = "PASS" if entry["passed"] and entry["ran"] else "FAIL"
        detail = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in entry["props"])
        terminalreporter.write_line(f"{flag} criterion {number}: {entry['title']}" + (f" [{detail}]" if detail else ""))
