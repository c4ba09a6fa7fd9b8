import numpy as np
import pytest

from groupconv import get_group


@pytest.fixture(scope="session")
def r1():
    return get_group("Rn:1")


@pytest.fixture(scope="session")
def r2():
    return get_group("Rn:2")


@pytest.fixture(scope="session")
def affine():
    return get_group("affine")


@pytest.fixture(scope="session")
def heisenberg():
    return get_group("heisenberg")


@pytest.fixture(scope="session")
def lie_groups(r1, r2, affine, heisenberg):
    return [r1, r2, affine, heisenberg]


@pytest.fixture(scope="session")
def discrete_groups():
    return [get_group("Z"), get_group("Z2"), get_group("S3"),
            get_group("F2:len4")]


def random_element(group, rng, scale=0.5):
    """Random element: chart-uniform for Lie groups, small words otherwise."""
    if not group.is_discrete:
        return group.from_chart(rng.uniform(-scale, scale, group.dimension))
    name = group.name
    if name == "Z":
        return int(rng.integers(-5, 6))
    if name == "Z2":
        return (int(rng.integers(-4, 5)), int(rng.integers(-4, 5)))
    if name == "S3":
        perm = list(range(3))
        rng.shuffle(perm)
        return tuple(perm)
    letters = "aAbB"
    word = group.identity
    for _ in range(int(rng.integers(0, 2))):
        try:
            word = group.multiply(word, letters[rng.integers(0, 4)])
        except Exception:
            break
    return word
