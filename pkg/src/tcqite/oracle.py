"""Dense exact solvers and synthetic non-Hermitian test problems.

Everything here works on explicit matrices and is meant as ground truth for
the variational machinery. The occupation-basis builder constructs
Hamiltonians straight from ladder-operator matrices, independently of the
Pauli-string encodings.
"""

from __future__ import annotations

import functools
import itertools
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import InputError, NumericalError
from .fermion import FermionHamiltonian, bits_to_index, encode, hf_bitstring
from .pauli import DENSE_QUBIT_LIMIT, PauliSum, to_dense

DEGENERACY_TOL = 1e-8
COMPLEX_GROUND_TOL = 1e-8
SYNTHETIC_J_BOUND = 2.0


@dataclass
class EigenSolution:
    """Full eigendecomposition with bi-orthonormal left/right vectors.

    Attributes:
        eigenvalues: complex eigenvalues.
        right_vectors: columns ``R[:, i]`` with unit Euclidean norm.
        left_vectors: columns ``L[:, i]`` scaled so that ``L^H R = I``.
        ground_index: index of the eigenvalue with minimal real part.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    ground_index: int
    hermitian: bool = False

    @property
    def ground_energy(self) -> complex:
        return complex(self.eigenvalues[self.ground_index])

    @property
    def ground_vector(self) -> np.ndarray:
        return self.right_vectors[:, self.ground_index]

    def ground_subspace(self, tol: float = DEGENERACY_TOL) -> np.ndarray:
        """Indices of eigenvalues within ``tol`` of the ground eigenvalue."""
        return np.flatnonzero(np.abs(self.eigenvalues - self.ground_energy) < tol)


def _ground_index(vals: np.ndarray) -> int:
    # minimal real part; ties broken by smallest |imag| then position
    re = np.round(vals.real, 12)
    order = np.lexsort((np.abs(vals.imag), re))
    return int(order[0])


def eig_matrix(m: np.ndarray, hermitian: bool | None = None) -> EigenSolution:
    """Eigendecomposition of a dense matrix (symmetric path when Hermitian)."""
    m = np.asarray(m, dtype=complex)
    if hermitian is None:
        hermitian = bool(np.allclose(m, m.conj().T, atol=1e-13, rtol=0))
    if hermitian:
        vals, vecs = np.linalg.eigh(m)
        vals = vals.astype(complex)
        return EigenSolution(vals, vecs, vecs.copy(), _ground_index(vals), True)
    vals, left, right = scipy.linalg.eig(m, left=True, right=True)
    right = right / np.linalg.norm(right, axis=0)
    left = _biorthonormalize(vals, left, right)
    gi = _ground_index(vals)
    if abs(vals[gi].imag) > COMPLEX_GROUND_TOL:
        warnings.warn(f"ground eigenvalue is complex: {vals[gi]}", RuntimeWarning, stacklevel=2)
    return EigenSolution(vals, right, left, gi, False)


def _biorthonormalize(vals: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    left = left.copy()
    done = np.zeros(len(vals), dtype=bool)
    for i in range(len(vals)):
        if done[i]:
            continue
        block = np.flatnonzero((np.abs(vals - vals[i]) < DEGENERACY_TOL) & ~done)
        done[block] = True
        s = left[:, block].conj().T @ right[:, block]
        try:
            left[:, block] = left[:, block] @ np.linalg.inv(s).conj().T
        except np.linalg.LinAlgError as exc:
            raise NumericalError("defective eigenvalue cluster; left/right vectors not biorthogonalizable") from exc
    return left


def dense_eig(h: PauliSum, max_qubits: int = DENSE_QUBIT_LIMIT) -> EigenSolution:
    """Exact eigendecomposition of a Pauli sum.

    Raises:
        InputError: more qubits than ``max_qubits``.
    """
    m = to_dense(h, max_qubits=max_qubits)
    return eig_matrix(m, hermitian=h.is_hermitian())


def synthetic_tc(h: PauliSum, j_diagonal: Sequence[float], bound: float = SYNTHETIC_J_BOUND) -> PauliSum:
    """Similarity-transform ``h`` by a diagonal correlator: ``exp(-J) h exp(J)``.

    Args:
        h: Hermitian Pauli sum.
        j_diagonal: one real entry per computational basis state.
        bound: largest allowed ``|j|``.

    Returns:
        The transformed operator, generally non-Hermitian, with the same spectrum.
    """
    if not h.is_hermitian():
        raise InputError("synthetic_tc expects a Hermitian input")
    j = np.asarray(j_diagonal, dtype=float)
    if j.shape != (2 ** h.n_qubits,):
        raise InputError(f"j_diagonal needs {2 ** h.n_qubits} entries, got {j.shape}")
    if np.any(np.abs(j) > bound):
        raise InputError(f"|j| entries must not exceed {bound}")
    m = to_dense(h)
    m = m * np.exp(j[None, :] - j[:, None])
    return PauliSum.from_dense(m)


def hf_weight(vec: np.ndarray, hf: Sequence[int] | int, norm_tol: float = 1e-8) -> float:
    """Magnitude of the overlap between a unit vector and a basis determinant."""
    vec = np.asarray(vec)
    nrm = np.linalg.norm(vec)
    if abs(nrm - 1.0) > norm_tol:
        raise InputError(f"vector must be normalized (norm {nrm})")
    idx = hf if isinstance(hf, (int, np.integer)) else bits_to_index(hf)
    return float(abs(vec[idx]))


def ground_hf_weight(sol: EigenSolution, hf: Sequence[int] | int, tol: float = DEGENERACY_TOL) -> tuple[float, np.ndarray]:
    """HF weight of the ground state, resolving degeneracies in favour of HF.

    Inside a degenerate ground subspace the reported vector is the normalized
    projection of the HF determinant onto that subspace, which maximizes the
    overlap. If the projection vanishes, the first ground vector is returned.
    """
    idx = hf if isinstance(hf, (int, np.integer)) else bits_to_index(hf)
    sub = sol.ground_subspace(tol)
    if len(sub) == 1:
        v = sol.right_vectors[:, sub[0]]
        return float(abs(v[idx])), v
    q, _ = np.linalg.qr(sol.right_vectors[:, sub])
    proj = q @ q[idx, :].conj()
    nrm = np.linalg.norm(proj)
    if nrm < 1e-12:
        return 0.0, sol.right_vectors[:, sub[0]]
    v = proj / nrm
    return float(abs(v[idx])), v


# ---------------------------------------------------------------------------
# occupation-basis construction (independent of the Pauli encodings)


@functools.lru_cache(maxsize=64)
def annihilator(mode: int, n_modes: int) -> np.ndarray:
    """Dense ``a_mode`` in the occupation basis.

    Basis index bits are ordered like qubits: mode ``k`` is bit ``n_modes-1-k``
    of the index, and the fermionic sign counts occupied modes ``j < k``.
    """
    dim = 1 << n_modes
    out = np.zeros((dim, dim))
    bit = 1 << (n_modes - 1 - mode)
    higher = ((1 << n_modes) - 1) ^ ((bit << 1) - 1)
    for s in range(dim):
        if s & bit:
            sign = -1.0 if bin(s & higher).count("1") % 2 else 1.0
            out[s ^ bit, s] = sign
    out.setflags(write=False)
    return out


def occupation_matrix(h: FermionHamiltonian) -> np.ndarray:
    """Full Fock-space matrix of ``h`` built from ladder-operator matrices."""
    n = h.n_spatial
    m = 2 * n
    if m > 8:
        raise InputError("occupation-basis oracle is limited to 4 spatial orbitals")
    dim = 1 << m
    a = [annihilator(k, m) for k in range(m)]
    ad = [x.T for x in a]
    out = np.eye(dim, dtype=complex) * h.e0
    so = lambda p, s: p + s * n  # noqa: E731
    for p, q in itertools.product(range(n), repeat=2):
        if h.h1[p, q] != 0:
            for s in (0, 1):
                out += h.h1[p, q] * (ad[so(p, s)] @ a[so(q, s)])
    for p, q, r, s_ in itertools.product(range(n), repeat=4):
        c = h.h2[p, q, r, s_]
        if c == 0:
            continue
        for s1, s2 in itertools.product((0, 1), repeat=2):
            op = ad[so(p, s1)] @ ad[so(r, s2)] @ a[so(s_, s2)] @ a[so(q, s1)]
            out += 0.5 * c * op
    if h.h3 is not None:
        pref = h.tb_sign / 6.0
        for idx in np.argwhere(h.h3 != 0):
            p, q, r, s_, t, u = idx
            c = h.h3[tuple(idx)] * pref
            for s1, s2, s3 in itertools.product((0, 1), repeat=3):
                op = (
                    ad[so(p, s1)] @ ad[so(r, s2)] @ ad[so(t, s3)]
                    @ a[so(u, s3)] @ a[so(s_, s2)] @ a[so(q, s1)]
                )
                out += c * op
    return out


def sector_indices(n_spatial: int, n_electrons: int, n_alpha: int) -> np.ndarray:
    """Occupation-basis indices (JW ordering) with the given particle numbers."""
    m = 2 * n_spatial
    idx = np.arange(1 << m)
    alpha_mask = ((1 << n_spatial) - 1) << n_spatial
    beta_mask = (1 << n_spatial) - 1
    na = np.bitwise_count(idx & alpha_mask)
    nb = np.bitwise_count(idx & beta_mask)
    return idx[(na == n_alpha) & (nb == n_electrons - n_alpha)]


def sector_matrix(h: FermionHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """JW Hamiltonian restricted to the sector of ``h``; returns (matrix, indices)."""
    enc = encode(h, "jordan-wigner", epsilon=0.0)
    idx = sector_indices(h.n_spatial, h.n_electrons, h.n_alpha)
    sp = enc.pauli.to_sparse().tocsr()
    return sp[idx][:, idx].toarray(), idx


def fci(h: FermionHamiltonian) -> EigenSolution:
    """Exact diagonalization in the particle-number sector of ``h``.

    Eigenvectors are embedded back into the full JW register.
    """
    sub, idx = sector_matrix(h)
    sol = eig_matrix(sub, hermitian=h.hermitian)
    dim = 1 << h.n_spin_orbitals
    for name in ("right_vectors", "left_vectors"):
        small = getattr(sol, name)
        big = np.zeros((dim, small.shape[1]), dtype=complex)
        big[idx] = small
        setattr(sol, name, big)
    return sol


def fci_energy(h: FermionHamiltonian) -> complex:
    return fci(h).ground_energy


def hf_energy(h: FermionHamiltonian, pauli: PauliSum, encoding: str) -> complex:
    """Expectation of ``pauli`` in the encoded HF determinant."""
    bits = hf_bitstring(h.n_electrons, h.n_alpha, h.n_spatial, encoding)
    state = np.zeros(1 << pauli.n_qubits, dtype=complex)
    state[bits_to_index(bits)] = 1.0
    return complex(state.conj() @ pauli.apply(state))
