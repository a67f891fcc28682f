from __future__ import annotations

import functools

import pytest

from hyperce.catalog import cyclic_automorphisms, get_group
from hyperce.expectation import (
    build_automorphism_orbit,
    build_conjugation,
    build_double_coset,
    build_identity,
)
from hyperce.hypergroup import construct_hypergroup

# (group, builder) pairs exercised by the acceptance suite
CATALOG = [(f"Z{n}", "id") for n in range(1, 13)] + [
    ("S3", "id"),
    ("S3", "double_coset"),
    ("S3", "conjugation"),
    ("S4", "conjugation"),
    ("D4", "conjugation"),
    ("Q8", "conjugation"),
    ("Z5", "automorphism_orbit"),
    ("D4", "double_coset"),
    ("Q8", "id"),
]

SMALL = [pair for pair in CATALOG if pair not in {(f"Z{n}", "id") for n in range(7, 13)}]


def instance_id(pair) -> str:
    return f"{pair[0]}-{pair[1]}"


def build(group: str, builder: str):
    named = get_group(group)
    g = named.table
    if builder == "id":
        return build_identity(g)
    if builder == "conjugation":
        return build_conjugation(g)
    if builder == "double_coset":
        sub = {"S3": ["e", "(12)"], "D4": ["e", "s"]}[group]
        return build_double_coset(g, [named.index(x) for x in sub])
    if builder == "automorphism_orbit":
        return build_automorphism_orbit(g, cyclic_automorphisms(g.order))
    raise KeyError(builder)


@functools.lru_cache(maxsize=None)
def hypergroup(group: str, builder: str):
    return construct_hypergroup(build(group, builder))


@pytest.fixture(params=CATALOG, ids=instance_id)
def catalog_instance(request):
    return request.param


@pytest.fixture(params=SMALL, ids=instance_id)
def small_instance(request):
    return request.param


@pytest.fixture(scope="session")
def S3():
    return get_group("S3")


@pytest.fixture(scope="session")
def s3_double_coset():
    return hypergroup("S3", "double_coset")


@pytest.fixture(scope="session")
def s3_conjugation():
    return hypergroup("S3", "conjugation")


# --- acceptance summary ----------------------------------------------------------

_ACCEPTANCE: dict[str, list[str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1].split("[")[0]
        _ACCEPTANCE.setdefault(name, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcomes in _ACCEPTANCE.items():
        status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  ({outcomes.count('passed')}/{len(outcomes)} cases)")
