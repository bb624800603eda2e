"""Potential-energy curves and spectroscopic constants (R_e, harmonic w_e, D_0)."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import InputError, NumericalError

CONSTANTS_VERSION = "CODATA-2018"

# single source of truth for unit conversions; values from CODATA 2018
# (https://physics.nist.gov/cuu/Constants/) and AME2020 atomic masses
CONSTANTS = {
    "hartree_to_ev": 27.211386245988,
    "angstrom_to_bohr": 1.8897259886,
    "hartree_to_joule": 4.3597447222071e-18,
    "hartree_to_wavenumber": 219474.6313632,
    "speed_of_light_m_per_s": 299792458.0,
    "amu_to_kg": 1.66053906660e-27,
    "amu_to_electron_mass": 1822.888486209,
    "mass_1H_amu": 1.00782503223,
    "mass_7Li_amu": 7.0160034366,
}
CITATIONS = {
    "hartree_to_ev": "CODATA 2018",
    "angstrom_to_bohr": "CODATA 2018 Bohr radius 0.529177210903 A",
    "hartree_to_joule": "CODATA 2018",
    "hartree_to_wavenumber": "CODATA 2018",
    "speed_of_light_m_per_s": "exact (SI definition)",
    "amu_to_kg": "CODATA 2018",
    "amu_to_electron_mass": "CODATA 2018",
    "mass_1H_amu": "AME2020",
    "mass_7Li_amu": "AME2020",
}

MASSES = {"H": CONSTANTS["mass_1H_amu"], "Li": CONSTANTS["mass_7Li_amu"]}
PEC_SOURCES = ("varqite", "exact", "sampled")
DEFAULT_WINDOW = 7
PLATEAU_MIN_R = 8.0
PLATEAU_TOL = 1e-5


def constants_table() -> dict:
    return {
        "version": CONSTANTS_VERSION,
        "values": dict(CONSTANTS),
        "citations": dict(CITATIONS),
    }


def hartree_to_ev(e: float) -> float:
    return e * CONSTANTS["hartree_to_ev"]


def ev_to_hartree(e: float) -> float:
    return e / CONSTANTS["hartree_to_ev"]


def wavenumber_to_hartree(w: float) -> float:
    return w / CONSTANTS["hartree_to_wavenumber"]


def reduced_mass(m1: float | str, m2: float | str) -> float:
    """Reduced mass in amu; element symbols resolve through ``MASSES``."""
    a = MASSES[m1] if isinstance(m1, str) else float(m1)
    b = MASSES[m2] if isinstance(m2, str) else float(m2)
    return a * b / (a + b)


@dataclass(frozen=True)
class PECPoint:
    bond_length: float
    energy: float
    source: str = "exact"

    def __post_init__(self):
        if not self.bond_length > 0:
            raise InputError("bond length must be positive")
        if self.source not in PEC_SOURCES:
            raise InputError(f"source must be one of {PEC_SOURCES}")


@dataclass(frozen=True)
class MinimumFit:
    r_e: float
    k: float
    e_min: float
    window: tuple[float, ...]
    max_residual: float


@dataclass(frozen=True)
class SpectroscopicConstants:
    """Constants derived from one curve.

    Units: ``r_e`` Angstrom, ``k`` Hartree/Angstrom^2, ``omega_e`` cm^-1,
    ``d_e`` and ``d_0`` eV.
    """

    r_e: float
    k: float
    omega_e: float
    d_e: float
    d_0: float
    e_min: float
    asymptote: float
    fit_window: tuple[float, ...]
    fit_residual: float
    reduced_mass: float

    def as_dict(self) -> dict:
        d = asdict(self)
        d["fit_window"] = list(self.fit_window)
        d["constants_version"] = CONSTANTS_VERSION
        return d


def _sorted(points: Iterable[PECPoint]) -> tuple[np.ndarray, np.ndarray]:
    pts = sorted(points, key=lambda p: p.bond_length)
    r = np.array([p.bond_length for p in pts])
    e = np.array([p.energy for p in pts])
    if len(np.unique(r)) != len(r):
        raise InputError("duplicate bond lengths in the curve")
    return r, e


def fit_minimum(points: Sequence[PECPoint], window: int = DEFAULT_WINDOW) -> MinimumFit:
    """Quartic least-squares fit around the lowest grid point.

    The window holds ``window`` consecutive points centred on the grid minimum,
    shifted inwards when the minimum sits near either end of the grid.

    Raises:
        InputError: fewer than 5 points around an interior minimum.
        NumericalError: minimum on the grid boundary (always the case for one
            or two points) or non-positive curvature.
    """
    r, e = _sorted(points)
    if window < 5:
        raise InputError("window must hold at least 5 points for a quartic")
    if len(r) == 0:
        raise InputError("empty curve")
    i = int(np.argmin(e))
    if i == 0 or i == len(r) - 1:
        raise NumericalError("minimum at grid boundary")
    if len(r) < 5:
        raise InputError("need at least 5 points to fit a minimum")
    window = min(window, len(r))
    lo = min(max(i - window // 2, 0), len(r) - window)
    rw, ew = r[lo:lo + window], e[lo:lo + window]
    poly = Polynomial.fit(rw, ew, 4)
    d1, d2 = poly.deriv(1), poly.deriv(2)
    roots = d1.roots()
    roots = roots[np.abs(roots.imag) < 1e-9].real
    roots = roots[(roots >= rw[0]) & (roots <= rw[-1])]
    if roots.size == 0:
        raise NumericalError("fitted polynomial has no stationary point inside the window")
    r_e = float(roots[np.argmin(np.abs(roots - r[i]))])
    k = float(d2(r_e))
    if k <= 0:
        raise NumericalError(f"non-convex fit (k = {k:.3e})")
    resid = float(np.max(np.abs(poly(rw) - ew)))
    return MinimumFit(r_e, k, float(poly(r_e)), tuple(float(x) for x in rw), resid)


def omega_e(k: float, mu: float) -> float:
    """Harmonic wavenumber in cm^-1 from ``k`` (Hartree/Angstrom^2) and ``mu`` (amu)."""
    if k <= 0 or mu <= 0:
        raise InputError("force constant and reduced mass must be positive")
    k_si = k * CONSTANTS["hartree_to_joule"] / 1e-20
    mu_si = mu * CONSTANTS["amu_to_kg"]
    omega = np.sqrt(k_si / mu_si)
    return float(omega / (2 * np.pi * CONSTANTS["speed_of_light_m_per_s"]) / 100.0)


def plateau_energy(points: Sequence[PECPoint], min_r: float = PLATEAU_MIN_R, tol: float = PLATEAU_TOL) -> float:
    """Energy at the largest bond length, checked to lie on a flat tail.

    Raises:
        NumericalError: largest ``R`` below ``min_r`` or the last two energies
            differ by ``tol`` or more.
    """
    r, e = _sorted(points)
    if len(r) < 2 or r[-1] < min_r:
        raise NumericalError(f"no plateau: the scan must reach R >= {min_r} Angstrom")
    if abs(e[-1] - e[-2]) >= tol:
        raise NumericalError(f"no plateau: last two energies differ by {abs(e[-1] - e[-2]):.2e} Hartree")
    return float(e[-1])


def dissociation_energy(
    points: Sequence[PECPoint],
    e_min: float,
    omega: float,
    asymptote: float | None = None,
) -> tuple[float, float]:
    """``(D_e, D_0)`` in eV with a harmonic zero-point correction.

    Args:
        points: the curve; its flat tail supplies the asymptote by default.
        e_min: fitted minimum energy (Hartree).
        omega: harmonic wavenumber (cm^-1).
        asymptote: explicit separated-fragment energy (Hartree); skips the
            plateau check when given.
    """
    e_inf = plateau_energy(points) if asymptote is None else float(asymptote)
    d_e = hartree_to_ev(e_inf - e_min)
    zpe = hartree_to_ev(0.5 * wavenumber_to_hartree(omega))
    return float(d_e), float(d_e - zpe)


def analyze(
    points: Sequence[PECPoint],
    mu: float,
    window: int = DEFAULT_WINDOW,
    asymptote: float | None = None,
) -> SpectroscopicConstants:
    fit = fit_minimum(points, window)
    w = omega_e(fit.k, mu)
    e_inf = plateau_energy(points) if asymptote is None else float(asymptote)
    d_e, d_0 = dissociation_energy(points, fit.e_min, w, e_inf)
    return SpectroscopicConstants(fit.r_e, fit.k, w, d_e, d_0, fit.e_min, e_inf, fit.window, fit.max_residual, mu)


def write_pec(points: Iterable[PECPoint], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["R_angstrom", "E_hartree", "source"])
        for p in points:
            w.writerow([repr(p.bond_length), repr(p.energy), p.source])


def read_pec(path: str | Path) -> list[PECPoint]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh, skipinitialspace=True))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        return [PECPoint(float(r["R_angstrom"]), float(r["E_hartree"]), r.get("source") or "exact") for r in rows]
    except (KeyError, ValueError, TypeError):
        raise InputError(f"{path}: expected columns R_angstrom,E_hartree,source") from None
