from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest

from divkit.cq import Database, parse_cq
from divkit.numeric import Fact, TableMetric

CARS_ROWS = [
    ("Honda", "Civic", "Green", "2007"),
    ("Honda", "Civic", "Black", "2007"),
    ("Honda", "Civic", "Black", "2006"),
    ("Honda", "Accord", "Blue", "2007"),
    ("Toyota", "Corolla", "Black", "2007"),
    ("Toyota", "Corolla", "Blue", "2007"),
]

# head order matters: with it, positions 2,3,4 form a trio and 1,2,3 do not
TRIO_QUERY = "Q(x1,x2,x3,x4) :- R(x1,x2), S(x2,x4), T(x4,x3)."
IDENTITY_QUERY = "Q(m,o,c,y) :- CARS(m,o,c,y)."


@pytest.fixture
def cars() -> list[Fact]:
    return [Fact("CARS", row) for row in CARS_ROWS]


@pytest.fixture
def cars_db() -> Database:
    return Database({"CARS": CARS_ROWS})


@pytest.fixture
def identity_query():
    return parse_cq(IDENTITY_QUERY)


@pytest.fixture
def trio_query():
    return parse_cq(TRIO_QUERY)


@pytest.fixture
def p3_metric() -> TableMetric:
    labels = ["v1", "v2", "v3"]
    return TableMetric(labels, {("v1", "v2"): Fraction(1), ("v2", "v3"): Fraction(1), ("v1", "v3"): Fraction(2)})


@pytest.fixture
def cars_dir(tmp_path: Path) -> Path:
    d = tmp_path / "cars"
    d.mkdir()
    (d / "CARS.csv").write_text("".join(",".join(r) + "\n" for r in CARS_ROWS))
    return d
