"""Shared fixtures: the bundled system definitions and solved reductions.

Solving the change of variables is the slow part, so solved reductions
are session-scoped and shared across test modules.
"""

from fractions import Fraction
from pathlib import Path

import pytest

from polycycle import (
    instantiate,
    invert_to_cubic,
    load_definition,
    solve_theta,
)

SYSTEMS_DIR = Path(__file__).resolve().parent.parent / "systems"

CORPUS = (
    "normal_form",
    "axial_damping",
    "reflected_normal_form",
    "rescaled_normal_form",
    "quadratic",
    "mixed",
    "linear_center",
)


@pytest.fixture(scope="session")
def systems_dir() -> Path:
    return SYSTEMS_DIR


@pytest.fixture(scope="session")
def definitions():
    return {name: load_definition(SYSTEMS_DIR / f"{name}.json") for name in CORPUS}


@pytest.fixture(scope="session")
def corpus_systems(definitions):
    """Exact instance of every bundled system at its default parameter."""
    out = {}
    for name, defn in definitions.items():
        out[name] = instantiate(defn, defn.alpha_default, exact=True)
    return out


@pytest.fixture(scope="session")
def normal_form_system(definitions):
    return instantiate(definitions["normal_form"], Fraction(1, 20), exact=True)


@pytest.fixture(scope="session")
def normal_form_cov(normal_form_system):
    return solve_theta(normal_form_system)


@pytest.fixture(scope="session")
def normal_form_inverse(normal_form_cov):
    return invert_to_cubic(normal_form_cov)


@pytest.fixture(scope="session")
def corpus_covs(corpus_systems):
    """Solved reduction for every bundled system."""
    return {name: solve_theta(system) for name, system in corpus_systems.items()}
