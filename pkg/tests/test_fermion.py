import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import data_file, random_hamiltonian
from tcqite.errors import InputError
from tcqite.fermion import (
    FermionHamiltonian,
    encode,
    format_integrals,
    hf_bitstring,
    load_integrals,
    map_ladder_product,
    parse_integrals,
    sector_eigenvalues,
    taper_two_qubits,
    write_integrals,
)
from tcqite.oracle import annihilator, occupation_matrix, sector_indices
from tcqite.pauli import PauliSum, to_dense


def eigs(m):
    v = np.linalg.eigvals(m)
    return v[np.lexsort((v.imag.round(8), v.real.round(8)))]


def header(n=2, nelec=2, extra="HERMITIAN=1,"):
    return f"&FCI NORB={n},NELEC={nelec},MS2=0,\n ORBSYM=1,1,\n ISYM=1,{extra}\n&END\n"


# --- integral I/O ---------------------------------------------------------------


def test_hermitian_single_entry_expands_eightfold():
    h = parse_integrals(header() + "0.7 1 1 2 2\n0.0 0 0 0 0\n")
    expected = {(0, 0, 1, 1), (1, 1, 0, 0)}
    for idx in itertools.product(range(2), repeat=4):
        assert h.h2[idx] == (0.7 if idx in expected else 0.0)
    h = parse_integrals(header() + "0.3 1 2 1 2\n")
    for idx in [(0, 1, 0, 1), (1, 0, 0, 1), (0, 1, 1, 0), (1, 0, 1, 0)]:
        assert h.h2[idx] == 0.3


def test_nonhermitian_file_keeps_conjugate_pairs_independent():
    text = header(extra="HERMITIAN=0,") + "0.5 1 2 2 2\n"
    h = parse_integrals(text)
    assert h.h2[0, 1, 1, 1] == 0.5 and h.h2[1, 1, 0, 1] == 0.5  # particle exchange
    assert h.h2[1, 1, 1, 0] == 0.0 and h.h2[1, 0, 1, 1] == 0.0  # (sr|qp) stays unset
    h = parse_integrals(text + "0.2 2 2 2 1\n")
    assert h.h2[0, 1, 1, 1] == 0.5 and h.h2[1, 1, 1, 0] == 0.2


def test_shipped_synthetic_fixture_is_nonhermitian():
    h = load_integrals(data_file("synthetic_nonhermitian_h2.fcidump"))
    assert not h.hermitian and h.h3 is not None
    assert not np.allclose(h.h2, h.h2.transpose(1, 0, 3, 2).conj())
    h.check_symmetry()


@pytest.mark.parametrize(
    "body, message",
    [
        ("0.5 1 3 1 1\n", "out of range"),
        ("0.5 1 1 2 2\n0.6 2 2 1 1\n", "conflict"),
        ("0.5 1 1\n", "malformed"),
    ],
)
def test_integral_errors(body, message):
    with pytest.raises(InputError, match=message):
        parse_integrals(header() + body)


def test_complex_hermitian_file_rejected():
    with pytest.raises(InputError):
        parse_integrals(header(extra="HERMITIAN=1,COMPLEX=1,") + "0.5 0.1 1 1 1 1\n")


def test_missing_file_is_input_error(tmp_path):
    with pytest.raises(InputError):
        load_integrals(tmp_path / "absent.fcidump")


@pytest.mark.parametrize("hermitian, three_body", [(True, False), (False, False), (False, True)])
def test_integral_roundtrip(tmp_path, hermitian, three_body):
    h = random_hamiltonian(np.random.default_rng(5), 3, 2, 1, hermitian, three_body)
    path = tmp_path / "h.fcidump"
    write_integrals(h, path, comment="round trip")
    g = load_integrals(path)
    np.testing.assert_array_equal(g.h1, h.h1)
    np.testing.assert_array_equal(g.h2, h.h2)
    assert g.e0 == h.e0 and g.hermitian == h.hermitian and g.sector == h.sector
    if three_body:
        np.testing.assert_array_equal(g.h3, h.h3)
    assert format_integrals(g, "round trip") == path.read_text()


def test_shipped_fixtures_load():
    for name in ("h2_sto6g_0.74.fcidump", "h2_631g_0.74.fcidump", "lih_sto3g_1.5949.fcidump",
                 "lih_sto3g_3no_1.5949.fcidump", "lih_ccpvdz_3no_1.5949.fcidump"):
        h = load_integrals(data_file(name))
        h.check_symmetry()
        assert h.hermitian


# --- ladder products --------------------------------------------------------------


def test_number_operator_and_nilpotency():
    n0 = map_ladder_product([(0, True), (0, False)], 1)
    assert n0.allclose(PauliSum.from_list([("I", 0.5), ("Z", -0.5)]))
    assert len(map_ladder_product([(0, False), (0, False)], 3)) == 0


def test_hopping_operator_matches_dense_construction():
    op = map_ladder_product([(0, True), (1, False)], 2)
    expected = PauliSum.from_list([("XX", 0.25), ("YY", 0.25), ("XY", 0.25j), ("YX", -0.25j)])
    assert op.allclose(expected, atol=1e-15)
    dense = annihilator(0, 2).conj().T @ annihilator(1, 2)
    np.testing.assert_allclose(to_dense(op), dense, atol=1e-15)


@pytest.mark.parametrize("encoding", ["jordan-wigner", "parity"])
@pytest.mark.parametrize("n", [2, 4, 6])
def test_anticommutation_relations(encoding, n):
    ident = PauliSum.identity(n)
    for p, q in itertools.product(range(n), repeat=2):
        ap_aqd = map_ladder_product([(p, False), (q, True)], n, encoding)
        aqd_ap = map_ladder_product([(q, True), (p, False)], n, encoding)
        expected = ident if p == q else PauliSum.zero(n)
        assert (ap_aqd + aqd_ap).allclose(expected, atol=0)
        ap_aq = map_ladder_product([(p, False), (q, False)], n, encoding)
        aq_ap = map_ladder_product([(q, False), (p, False)], n, encoding)
        assert len(ap_aq + aq_ap) == 0


# --- encode -----------------------------------------------------------------------


def test_constant_hamiltonian_encodes_to_identity():
    h = FermionHamiltonian(2, 2, 1, 0.37, np.zeros((2, 2)), np.zeros((2,) * 4))
    enc = encode(h, "jordan-wigner")
    assert enc.pauli.to_dict() == {"IIII": 0.37}


def test_h2_term_counts(h2_sto6g):
    assert len(encode(h2_sto6g, "jordan-wigner").pauli) == 15
    assert len(encode(h2_sto6g, "parity").pauli) == 15
    assert len(encode(h2_sto6g, "parity-reduced").pauli) == 5


def test_h2_jw_matches_occupation_oracle(h2_sto6g):
    m = to_dense(encode(h2_sto6g, "jordan-wigner", epsilon=0).pauli)
    np.testing.assert_allclose(m, occupation_matrix(h2_sto6g), atol=1e-12)


@settings(max_examples=12, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    n=st.integers(1, 3),
    hermitian=st.booleans(),
    three_body=st.booleans(),
)
def test_encoding_isospectral_with_occupation_oracle(seed, n, hermitian, three_body):
    rng = np.random.default_rng(seed)
    n_e = int(rng.integers(1, 2 * n + 1))
    n_alpha = int(rng.integers(max(0, n_e - n), min(n, n_e) + 1))
    h = random_hamiltonian(rng, n, n_e, n_alpha, hermitian, three_body and n >= 2)
    oracle = occupation_matrix(h)
    jw = to_dense(encode(h, "jordan-wigner", epsilon=0).pauli)
    np.testing.assert_allclose(jw, oracle, atol=1e-10)
    np.testing.assert_allclose(eigs(jw), eigs(oracle), atol=1e-8)
    par = to_dense(encode(h, "parity", epsilon=0).pauli)
    np.testing.assert_allclose(eigs(par), eigs(jw), atol=1e-8)


def test_three_body_needs_enabled_path():
    h = random_hamiltonian(np.random.default_rng(2), 2, 2, 1, False, True)
    with pytest.raises(InputError, match="3-body"):
        encode(h, "jordan-wigner", include_three_body=False)


def test_encoding_tags_body_classes():
    h = random_hamiltonian(np.random.default_rng(3), 2, 2, 1, False, True)
    enc = encode(h, "jordan-wigner")
    labels = {t.label for t in map(enc.pauli.tag, enc.pauli.to_dict())}
    assert "diagonal" in labels and labels <= {"diagonal", "1-body", "2-body", "3-body", "mixed"}
    assert enc.pauli.one_norm("3-body") + enc.pauli.one_norm("mixed") > 0


# --- tapering and reference states -----------------------------------------------------


def test_sector_eigenvalues_example():
    assert sector_eigenvalues(2, 1) == (-1, 1)


def test_taper_identity_sum():
    from tcqite.fermion import EncodedHamiltonian

    enc = EncodedHamiltonian(PauliSum.identity(4, 1.5), "parity", 2, 2, 1)
    out = taper_two_qubits(enc)
    assert out.pauli.to_dict() == {"II": 1.5}


def test_taper_rejects_anticommuting_term():
    from tcqite.fermion import EncodedHamiltonian

    enc = EncodedHamiltonian(PauliSum.from_label("IXII"), "parity", 2, 2, 1)
    with pytest.raises(InputError, match="anticommutes"):
        taper_two_qubits(enc)
    with pytest.raises(InputError):
        taper_two_qubits(EncodedHamiltonian(PauliSum.identity(4), "jordan-wigner", 2, 2, 1))


def test_tapered_spectrum_contained_in_full(h2_sto6g):
    full = np.linalg.eigvalsh(to_dense(encode(h2_sto6g, "parity", epsilon=0).pauli))
    reduced = np.linalg.eigvalsh(to_dense(encode(h2_sto6g, "parity-reduced", epsilon=0).pauli))
    for e in reduced:
        assert np.min(np.abs(full - e)) < 1e-10


def test_tapered_spectrum_equals_sector_block():
    h = random_hamiltonian(np.random.default_rng(9), 3, 2, 1, hermitian=False)
    idx = sector_indices(3, 2, 1)
    block = occupation_matrix(h)[np.ix_(idx, idx)]
    reduced = to_dense(encode(h, "parity-reduced", epsilon=0).pauli)
    # the tapered register also holds the other states with matching parities
    ev_block, ev_red = np.linalg.eigvals(block), np.linalg.eigvals(reduced)
    for e in ev_block:
        assert np.min(np.abs(ev_red - e)) < 1e-10


def test_hf_bitstrings():
    assert hf_bitstring(2, 1, 2, "jordan-wigner") == (1, 0, 1, 0)
    assert hf_bitstring(2, 1, 2, "parity") == (1, 1, 0, 0)
    assert hf_bitstring(2, 1, 2, "parity-reduced") == (1, 0)
    assert hf_bitstring(4, 2, 3, "parity-reduced") == (1, 0, 1, 0)
