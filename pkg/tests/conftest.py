import json
from fractions import Fraction

import numpy as np
import pytest

from services.lattice_core import Lattice, random_unimodular
from services.rng import stream


@pytest.fixture
def z2():
    return Lattice.integer(2)


@pytest.fixture
def z3():
    return Lattice.integer(3)


@pytest.fixture
def squeezed():
    """diag(1/2, 2)·Z², α = 1/2"""
    return Lattice.diagonal([Fraction(1, 2), 2])


@pytest.fixture
def hexagonal():
    """Unimodular A_2, the densest plane lattice"""
    s = (2.0 / np.sqrt(3.0)) ** 0.5
    return Lattice(np.array([[s, 0.0], [s / 2.0, s * np.sqrt(3.0) / 2.0]]))


@pytest.fixture
def random_lattices():
    def make(n: int, count: int, seed: int = 7):
        return [random_unimodular(n, stream(seed, "tests.random", n, i)) for i in range(count)]

    return make


@pytest.fixture
def lattice_file(tmp_path):
    """Write a lattice to a JSON file and return its path"""

    def write(basis, name: str = "lattice.json", rational: bool = False) -> str:
        path = tmp_path / name
        data = {"dim": len(basis), "basis": basis}
        if rational:
            data["rational"] = True
        path.write_text(json.dumps(data))
        return str(path)

    return write
