"""Regenerate the integral fixtures shipped in ``src/tcqite/data``.

Needs PySCF, which is not a runtime dependency. Run from the repo root::

    python3 scripts/generate_fixtures.py

The synthetic non-Hermitian fixture is drawn from a seeded generator and is
not a physical transcorrelated Hamiltonian.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np
import pyscf
from pyscf import ao2mo, fci, gto, mcscf, mp, scf

from tcqite.fermion import FermionHamiltonian, _pair_perms, write_integrals

DATA = Path(__file__).resolve().parents[1] / "src" / "tcqite" / "data"

H2_GRID = [0.4, 0.5, 0.6, 0.69, 0.70, 0.71, 0.72, 0.73, 0.74, 0.75, 0.76, 0.77, 1.0, 2.0, 5.0, 10.0]
LIH_BOND = 1.5949


def molecular_hamiltonian(mol, coeff, mf, nelec, n_alpha) -> FermionHamiltonian:
    n = coeff.shape[1]
    h1 = coeff.T @ mf.get_hcore() @ coeff
    h2 = ao2mo.restore(1, ao2mo.kernel(mol, coeff), n)
    h = FermionHamiltonian(n, nelec, n_alpha, mol.energy_nuc(), h1, h2)
    # clean numerical asymmetry from the AO transform before writing
    h.h1 = 0.5 * (h.h1 + h.h1.T)
    h.h1[np.abs(h.h1) < 1e-13] = 0.0
    h.h2[np.abs(h.h2) < 1e-13] = 0.0
    return h


def run_rhf(atom: str, basis: str):
    mol = gto.M(atom=atom, basis=basis, unit="Angstrom", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    if not mf.converged:
        raise RuntimeError(f"RHF did not converge for {atom} / {basis}")
    return mol, mf


def fci_energy(mf) -> float:
    return float(fci.FCI(mf).kernel()[0])


def mp2_no_hamiltonian(mol, mf, k: int) -> tuple[FermionHamiltonian, float]:
    """Integrals over the k most occupied unrelaxed-MP2 natural orbitals."""
    pt = mp.MP2(mf).run()
    dm = pt.make_rdm1()
    nocc = mol.nelectron // 2
    coeff = mf.mo_coeff.copy()
    blocks = []
    for sl in (slice(0, nocc), slice(nocc, None)):
        occ, vec = np.linalg.eigh(dm[sl, sl])
        order = np.argsort(-occ)
        blocks.append(vec[:, order])
    rot = np.zeros_like(dm)
    rot[:nocc, :nocc] = blocks[0]
    rot[nocc:, nocc:] = blocks[1]
    no_coeff = (coeff @ rot)[:, :k]
    h = molecular_hamiltonian(mol, no_coeff, mf, mol.nelectron, mol.nelectron // 2)
    # reference energy: CASCI over the kept NOs with all electrons active
    mc = mcscf.CASCI(mf, k, mol.nelectron)
    mc.verbose = 0
    e = float(mc.kernel(coeff @ rot)[0])
    return h, e


def synthetic_nonhermitian(seed: int = 20240) -> FermionHamiltonian:
    """H2/STO-6G at 0.74 A plus a seeded non-Hermitian 2-body and a small 3-body term."""
    mol, mf = run_rhf("H 0 0 0; H 0 0 0.74", "sto-6g")
    h = molecular_hamiltonian(mol, mf.mo_coeff, mf, 2, 1)
    rng = np.random.default_rng(seed)
    n = h.n_spatial
    k = rng.normal(scale=0.02, size=(n,) * 4)
    k = 0.5 * (k + k.transpose(2, 3, 0, 1))
    l3 = rng.normal(scale=0.005, size=(n,) * 6)
    l3 = sum(l3.transpose(p) for p in _pair_perms()) / 6.0
    return h.copy(h2=h.h2 + k, h3=l3, hermitian=False)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=DATA)
    args = ap.parse_args()
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    notes = []

    rows = ["R_angstrom,E_hartree,source"]
    for r in H2_GRID:
        mol, mf = run_rhf(f"H 0 0 0; H 0 0 {r}", "sto-6g")
        h = molecular_hamiltonian(mol, mf.mo_coeff, mf, 2, 1)
        e = fci_energy(mf)
        name = f"h2_sto6g_{r:.2f}.fcidump"
        write_integrals(h, out / name, comment=f"H2 STO-6G R={r} Angstrom, RHF orbitals; FCI {e!r}")
        rows.append(f"{r},{e!r},exact")
    (out / "h2_sto6g_fci_pec.csv").write_text("\n".join(rows) + "\n")
    notes.append("h2_sto6g_*.fcidump: H2, STO-6G, RHF canonical orbitals, 16 bond lengths; FCI energies in h2_sto6g_fci_pec.csv")

    mol, mf = run_rhf("H 0 0 0; H 0 0 0.74", "6-31g")
    h = molecular_hamiltonian(mol, mf.mo_coeff, mf, 2, 1)
    e = fci_energy(mf)
    write_integrals(h, out / "h2_631g_0.74.fcidump", comment=f"H2 6-31G R=0.74 Angstrom, RHF orbitals; FCI {e!r}")
    notes.append(f"h2_631g_0.74.fcidump: H2, 6-31G, RHF orbitals; FCI {e!r}")

    atom = f"Li 0 0 0; H 0 0 {LIH_BOND}"
    mol, mf = run_rhf(atom, "sto-3g")
    h = molecular_hamiltonian(mol, mf.mo_coeff, mf, 4, 2)
    e = fci_energy(mf)
    write_integrals(h, out / "lih_sto3g_1.5949.fcidump", comment=f"LiH STO-3G R={LIH_BOND} Angstrom, RHF orbitals; FCI {e!r}")
    notes.append(f"lih_sto3g_1.5949.fcidump: LiH, STO-3G, RHF orbitals (parent basis for NO truncation); FCI {e!r}")
    h3no, e3 = mp2_no_hamiltonian(mol, mf, 3)
    write_integrals(h3no, out / "lih_sto3g_3no_1.5949.fcidump", comment=f"LiH STO-3G, 3 MP2 natural orbitals; CASCI {e3!r}")
    notes.append(f"lih_sto3g_3no_1.5949.fcidump: same system, 3 most occupied unrelaxed-MP2 NOs from PySCF; CASCI(3o,4e) {e3!r}")

    mol, mf = run_rhf(atom, "cc-pvdz")
    h3no, e3 = mp2_no_hamiltonian(mol, mf, 3)
    write_integrals(h3no, out / "lih_ccpvdz_3no_1.5949.fcidump", comment=f"LiH cc-pVDZ, 3 MP2 natural orbitals; CASCI {e3!r}")
    notes.append(f"lih_ccpvdz_3no_1.5949.fcidump: LiH, cc-pVDZ, 3 most occupied unrelaxed-MP2 NOs from PySCF; CASCI(3o,4e) {e3!r}")

    syn = synthetic_nonhermitian()
    write_integrals(syn, out / "synthetic_nonhermitian_h2.fcidump", comment="seeded synthetic non-Hermitian test Hamiltonian, not a physical TC Hamiltonian")
    notes.append("synthetic_nonhermitian_h2.fcidump: H2/STO-6G at 0.74 A plus seeded random non-Hermitian 2-body and 3-body parts (seed 20240)")

    header = [
        "# Fixture provenance",
        "",
        f"Generated by scripts/generate_fixtures.py with PySCF {pyscf.__version__}.",
        "Geometries in Angstrom; energies in Hartree; all electrons correlated.",
        "",
    ]
    (out / "PROVENANCE.md").write_text("\n".join(header + [f"- {n}" for n in notes]) + "\n")


if __name__ == "__main__":
    main()
