"""Shared fixtures and random-problem generators."""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path

import itertools

import numpy as np
import pytest

from tcqite.fermion import FermionHamiltonian, load_integrals

DATA = Path(str(files("tcqite") / "data"))

H2_BOND_LENGTHS = (0.40, 0.50, 0.60, 0.69, 0.70, 0.71, 0.72, 0.73, 0.74, 0.75, 0.76, 0.77, 1.00, 2.00, 5.00, 10.00)


def data_file(name: str) -> Path:
    return DATA / name


_EIGHTFOLD = [(0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
              (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0)]


def _symmetric_fill(raw: np.ndarray, perms) -> np.ndarray:
    """Copy ``raw`` at the smallest image of every index so symmetry holds bit-exactly."""
    out = np.empty_like(raw)
    for idx in itertools.product(range(raw.shape[0]), repeat=raw.ndim):
        rep = min(tuple(idx[i] for i in p) for p in perms)
        out[idx] = raw[rep]
    return out


def random_hamiltonian(
    rng: np.random.Generator,
    n: int,
    n_electrons: int,
    n_alpha: int,
    hermitian: bool = True,
    three_body: bool = False,
    scale: float = 0.3,
) -> FermionHamiltonian:
    """Random integrals with the symmetry implied by ``hermitian``.

    Hermitian sums are real with 8-fold symmetry; non-Hermitian ones are complex
    with only particle-exchange symmetry. The optional real 3-body tensor is
    symmetric under simultaneous pair permutations.
    """
    if hermitian:
        h1 = rng.normal(size=(n, n))
        h1 = 0.5 * (h1 + h1.T)
        h2 = _symmetric_fill(rng.normal(size=(n,) * 4), _EIGHTFOLD)
    else:
        h1 = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        g = rng.normal(size=(n,) * 4) + 1j * rng.normal(size=(n,) * 4)
        h2 = _symmetric_fill(g, _EIGHTFOLD[:1] + [(2, 3, 0, 1)])
    h3 = None
    if three_body:
        perms = [tuple(x for k in order for x in (2 * k, 2 * k + 1)) for order in itertools.permutations(range(3))]
        h3 = scale * _symmetric_fill(rng.normal(size=(n,) * 6), perms)
    return FermionHamiltonian(
        n_spatial=n,
        n_electrons=n_electrons,
        n_alpha=n_alpha,
        e0=float(rng.normal()),
        h1=scale * h1,
        h2=scale * h2,
        h3=h3,
        hermitian=hermitian,
    )


@pytest.fixture(scope="session")
def h2_sto6g() -> FermionHamiltonian:
    return load_integrals(data_file("h2_sto6g_0.74.fcidump"))


@pytest.fixture(scope="session")
def lih_sto3g() -> FermionHamiltonian:
    return load_integrals(data_file("lih_sto3g_1.5949.fcidump"))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
