"""MP2 one-body density matrices and natural-orbital truncation.

Spin orbitals follow the block convention of :mod:`tcqite.fermion`: indices
``0..N-1`` are alpha, ``N..2N-1`` beta, and within each block orbitals are in
mean-field order, so the occupied ones come first.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError, NumericalError
from .fermion import FermionHamiltonian

HERMITIAN_TOL = 1e-10
DENOMINATOR_FLOOR = 1e-12
ORDER_TOL = 1e-10


@dataclass
class MeanFieldInput:
    """Orbital energies and antisymmetrized integrals in the spin-orbital basis.

    Attributes:
        orbital_energies: length ``2N``; alpha block then beta block.
        eri_antisym: ``<pq||rs>`` in physicist notation, shape ``(2N,)*4``.
        n_alpha: occupied alpha orbitals (the lowest ``n_alpha`` of the block).
        n_beta: occupied beta orbitals.
    """

    orbital_energies: np.ndarray
    eri_antisym: np.ndarray
    n_alpha: int
    n_beta: int

    def __post_init__(self):
        self.orbital_energies = np.asarray(self.orbital_energies, dtype=float)
        self.eri_antisym = np.asarray(self.eri_antisym)
        m = self.orbital_energies.shape[0]
        if m % 2 or self.eri_antisym.shape != (m,) * 4:
            raise InputError("orbital energies and integrals must cover 2N spin orbitals")
        n = m // 2
        if not (0 <= self.n_alpha <= n and 0 <= self.n_beta <= n):
            raise InputError("occupied counts exceed the orbital space")
        for block in (self.orbital_energies[:n], self.orbital_energies[n:]):
            if np.any(np.diff(block) < -ORDER_TOL):
                raise InputError("orbital energies must be non-decreasing within each spin block")

    @property
    def n_spatial(self) -> int:
        return self.orbital_energies.shape[0] // 2

    @property
    def n_occupied(self) -> int:
        return self.n_alpha + self.n_beta

    @property
    def occupied(self) -> np.ndarray:
        n = self.n_spatial
        return np.r_[np.arange(self.n_alpha), n + np.arange(self.n_beta)]

    @property
    def virtual(self) -> np.ndarray:
        n = self.n_spatial
        return np.r_[np.arange(self.n_alpha, n), n + np.arange(self.n_beta, n)]


def spin_orbital_integrals(h: FermionHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """Spin-orbital ``h1`` and antisymmetrized ``<pq||rs>`` from spatial integrals."""
    n = h.n_spatial
    m = 2 * n
    h1 = np.zeros((m, m), dtype=complex)
    h1[:n, :n] = h1[n:, n:] = h.h1
    # <pq|rs> = (pr|qs) with spin conserved along p-r and q-s
    phys = h.h2.transpose(0, 2, 1, 3)
    g = np.zeros((m,) * 4, dtype=complex)
    for s1 in (0, 1):
        for s2 in (0, 1):
            a = slice(s1 * n, (s1 + 1) * n)
            b = slice(s2 * n, (s2 + 1) * n)
            g[a, b, a, b] = phys
    return h1, g - g.transpose(0, 1, 3, 2)


def mean_field_from_hamiltonian(h: FermionHamiltonian) -> MeanFieldInput:
    """Build MP2 input from a Hermitian Hamiltonian expressed in its HF orbitals.

    Orbital energies are the diagonal of the Fock matrix built from the
    aufbau determinant.
    """
    if not h.hermitian:
        raise InputError("MP2 input must come from a Hermitian Hamiltonian")
    h1, g = spin_orbital_integrals(h)
    n = h.n_spatial
    occ = np.r_[np.arange(h.n_alpha), n + np.arange(h.n_beta)]
    fock = h1 + np.einsum("pkqk->pq", g[:, occ][:, :, :, occ])
    eps = np.real(np.diag(fock))
    for block in (eps[:n], eps[n:]):
        if np.any(np.diff(block) < -ORDER_TOL):
            raise InputError("Fock diagonal is not ordered; is the Hamiltonian in the canonical HF basis?")
    return MeanFieldInput(eps, g, h.n_alpha, h.n_beta)


def mp2_amplitudes(mf: MeanFieldInput) -> np.ndarray:
    """Doubles amplitudes ``t[i, j, a, b] = <ab||ij> / (e_i + e_j - e_a - e_b)``.

    Raises:
        NumericalError: a denominator vanishes.
    """
    occ, vir = mf.occupied, mf.virtual
    e = mf.orbital_energies
    denom = e[occ][:, None, None, None] + e[occ][None, :, None, None] - e[vir][None, None, :, None] - e[vir][None, None, None, :]
    if denom.size and np.min(np.abs(denom)) < DENOMINATOR_FLOOR:
        raise NumericalError("vanishing MP2 denominator (degenerate occupied/virtual gap)")
    num = mf.eri_antisym[np.ix_(vir, vir, occ, occ)].transpose(2, 3, 0, 1)
    return num / denom


def mp2_rdm(mf: MeanFieldInput) -> tuple[np.ndarray, np.ndarray]:
    """Unrelaxed MP2 one-body density, occupied and virtual blocks.

    ``D[p, q] = <a+_p a_q>``. The occupied block carries a depletion so that
    the total trace equals the electron count; occupied-virtual blocks are
    taken as zero.
    """
    t = mp2_amplitudes(mf)
    d_occ = np.eye(len(mf.occupied), dtype=t.dtype) - 0.5 * np.einsum("ikab,jkab->ij", t, t.conj())
    d_vir = 0.5 * np.einsum("ijac,ijbc->ab", t.conj(), t)
    return d_occ, d_vir


@dataclass
class NaturalOrbitalBasis:
    """Natural-orbital rotation of the spin-orbital space.

    Column ``j`` of ``rotation`` expresses new spin orbital ``j`` in the old
    basis. Within each spin block the occupied NOs come first, then the
    virtual ones, each sorted by descending occupation.
    """

    occupations: np.ndarray
    rotation: np.ndarray
    n_alpha: int
    n_beta: int

    @property
    def n_spatial(self) -> int:
        return self.rotation.shape[0] // 2

    def spatial_rotation(self, tol: float = 1e-8) -> np.ndarray:
        """Shared spatial rotation; requires equal alpha and beta NOs."""
        n = self.n_spatial
        ua, ub = self.rotation[:n, :n], self.rotation[n:, n:]
        if self.n_alpha != self.n_beta or not np.allclose(
            self.occupations[:n], self.occupations[n:], atol=tol
        ):
            raise InputError("alpha and beta natural orbitals differ; spatial truncation needs a closed shell")
        # degenerate NOs may mix differently per spin; compare spanned subspaces
        occ = self.occupations[:n]
        start = 0
        while start < n:
            stop = start + 1
            while stop < n and abs(occ[stop] - occ[start]) < tol:
                stop += 1
            sv = np.linalg.svd(ua[:, start:stop].conj().T @ ub[:, start:stop], compute_uv=False)
            if np.any(sv < 1 - 1e-6):
                raise InputError("alpha and beta natural orbitals span different spaces")
            start = stop
        return ua


def _sorted_eigh(block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if block.size == 0:
        return np.zeros(0), np.zeros((0, 0))
    vals, vecs = np.linalg.eigh(block)
    order = np.argsort(-vals, kind="stable")
    vecs = vecs[:, order]
    # deterministic phase: largest-magnitude component real positive
    piv = np.argmax(np.abs(vecs), axis=0)
    ph = vecs[piv, np.arange(vecs.shape[1])]
    vecs = vecs * (np.abs(ph) / ph)[None, :]
    return vals[order], vecs


def natural_orbitals(blocks: tuple[np.ndarray, np.ndarray], n_alpha: int, n_beta: int, n_spatial: int) -> NaturalOrbitalBasis:
    """Diagonalize the occupied and virtual blocks spin by spin.

    Args:
        blocks: ``(occupied, virtual)`` density blocks from :func:`mp2_rdm`,
            indexed alpha first then beta.
        n_alpha: occupied alpha count.
        n_beta: occupied beta count.
        n_spatial: spatial orbital count ``N``.

    Raises:
        InputError: a block is not Hermitian to 1e-10.
    """
    d_occ, d_vir = blocks
    for name, b in (("occupied", d_occ), ("virtual", d_vir)):
        if not np.allclose(b, b.conj().T, atol=HERMITIAN_TOL, rtol=0):
            raise InputError(f"{name} density block is not Hermitian")
    n = n_spatial
    va, vb = n - n_alpha, n - n_beta
    if d_occ.shape != (n_alpha + n_beta,) * 2 or d_vir.shape != (va + vb,) * 2:
        raise InputError("density block shapes do not match the occupation counts")
    occ_idx = np.r_[np.arange(n_alpha), n + np.arange(n_beta)]
    vir_idx = np.r_[np.arange(n_alpha, n), n + np.arange(n_beta, n)]
    rot = np.zeros((2 * n, 2 * n), dtype=np.result_type(d_occ, d_vir, float))
    occs = np.zeros(2 * n)
    pieces = [
        (d_occ[:n_alpha, :n_alpha], occ_idx[:n_alpha]),
        (d_vir[:va, :va], vir_idx[:va]),
        (d_occ[n_alpha:, n_alpha:], occ_idx[n_alpha:]),
        (d_vir[va:, va:], vir_idx[va:]),
    ]
    for block, idx in pieces:
        vals, vecs = _sorted_eigh(block)
        occs[idx] = vals
        rot[np.ix_(idx, idx)] = vecs
    return NaturalOrbitalBasis(occs, rot, n_alpha, n_beta)


def mp2_natural_orbitals(h: FermionHamiltonian) -> NaturalOrbitalBasis:
    """MP2 natural orbitals of a Hermitian Hamiltonian in its HF basis."""
    mf = mean_field_from_hamiltonian(h)
    return natural_orbitals(mp2_rdm(mf), mf.n_alpha, mf.n_beta, mf.n_spatial)


def rotate_hamiltonian(h: FermionHamiltonian, c: np.ndarray) -> FermionHamiltonian:
    """Express ``h`` in new orbitals ``phi'_j = sum_i c[i, j] phi_i``.

    Creation indices pick up ``conj(c)``, annihilation indices ``c``; ``c`` may be
    rectangular (``N x k``) to project onto a subspace.
    """
    cc = c.conj()
    h1 = cc.T @ h.h1 @ c
    h2 = np.einsum("pqrs,pa->aqrs", h.h2, cc, optimize=True)
    h2 = np.einsum("aqrs,qb->abrs", h2, c, optimize=True)
    h2 = np.einsum("abrs,rc->abcs", h2, cc, optimize=True)
    h2 = np.einsum("abcs,sd->abcd", h2, c, optimize=True)
    h3 = None
    if h.h3 is not None:
        h3 = h.h3
        for axis in range(6):
            m = cc if axis % 2 == 0 else c
            h3 = np.moveaxis(np.tensordot(h3, m, axes=([axis], [0])), -1, axis)
    k = c.shape[1]
    return FermionHamiltonian(
        n_spatial=k,
        n_electrons=h.n_electrons,
        n_alpha=h.n_alpha,
        e0=h.e0,
        h1=h1,
        h2=h2,
        h3=h3,
        hermitian=h.hermitian,
        tb_sign=h.tb_sign,
    )


def truncate_and_transform(h: FermionHamiltonian, basis: NaturalOrbitalBasis, k: int) -> FermionHamiltonian:
    """Rotate ``h`` into natural orbitals and keep the ``k`` most occupied.

    Raises:
        InputError: ``k`` smaller than the occupied spatial count or larger than ``N``.
    """
    if basis.n_spatial != h.n_spatial:
        raise InputError("natural-orbital basis and Hamiltonian have different orbital counts")
    n_occ = max(h.n_alpha, h.n_beta)
    if k < n_occ:
        raise InputError(f"k={k} cannot hold the {n_occ} occupied spatial orbitals")
    if k > h.n_spatial:
        raise InputError(f"k={k} exceeds the {h.n_spatial} available orbitals")
    c = basis.spatial_rotation()[:, :k]
    out = rotate_hamiltonian(h, c)
    if h.hermitian:
        out.h1 = 0.5 * (out.h1 + out.h1.conj().T)
    return out


# ---------------------------------------------------------------------------
# sidecar format


def write_mean_field(mf: MeanFieldInput, path: str | Path, tol: float = 1e-14) -> None:
    """Write orbital energies and nonzero ``<pq||rs>`` entries (1-based)."""
    lines = [f"n_spin_orbitals {2 * mf.n_spatial}", f"n_alpha {mf.n_alpha}", f"n_beta {mf.n_beta}", "energies"]
    lines += [repr(float(e)) for e in mf.orbital_energies]
    lines.append("antisymmetrized")
    for idx in np.argwhere(np.abs(mf.eri_antisym) > tol):
        v = complex(mf.eri_antisym[tuple(idx)])
        lines.append(f"{v.real!r} {v.imag!r} " + " ".join(str(int(i) + 1) for i in idx))
    Path(path).write_text("\n".join(lines) + "\n")


def read_mean_field(path: str | Path) -> MeanFieldInput:
    try:
        rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    except OSError as exc:
        raise InputError(f"cannot read mean-field file {path}: {exc}") from exc
    try:
        head = {r[0]: int(r[1]) for r in rows[:3]}
        m = head["n_spin_orbitals"]
        if rows[3] != ["energies"] or rows[4 + m] != ["antisymmetrized"]:
            raise ValueError
        eps = np.array([float(r[0]) for r in rows[4: 4 + m]])
        g = np.zeros((m,) * 4, dtype=complex)
        for r in rows[5 + m:]:
            idx = tuple(int(i) - 1 for i in r[2:6])
            if any(not 0 <= i < m for i in idx):
                raise InputError(f"{path}: index out of range in {' '.join(r)}")
            g[idx] = complex(float(r[0]), float(r[1]))
    except (KeyError, IndexError, ValueError):
        raise InputError(f"{path}: malformed mean-field file") from None
    if not np.any(g.imag):
        g = g.real
    return MeanFieldInput(eps, g, head["n_alpha"], head["n_beta"])
