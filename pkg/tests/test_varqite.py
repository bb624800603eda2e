import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcqite.circuit import Circuit, build_hea, build_uccsd, simulate
from tcqite.errors import InputError, NumericalError
from tcqite.fermion import encode
from tcqite.oracle import dense_eig
from tcqite.pauli import PauliSum
from tcqite.varqite import (
    EvolutionConfig,
    HadamardTest,
    compute_A,
    compute_C,
    derivative_states,
    energy,
    evolve,
    read_trajectory,
    step,
)

EXACT = EvolutionConfig(gradient_mode="parameter-shift")
NON_HERMITIAN_2X2 = PauliSum.from_list([("X", 1.25), ("Y", 0.75j)])


def ry_circuit():
    c = Circuit(1)
    c.add("RY", 0, slot=c.new_parameter())
    return c


def random_pauli_sum(rng, n, k=6, hermitian=True):
    labels = ["".join(rng.choice(list("IXYZ"), n)) for _ in range(k)]
    coeffs = rng.normal(size=k) + (0 if hermitian else 1j * rng.normal(size=k))
    return PauliSum.from_list(list(zip(labels, coeffs)), n_qubits=n)


def numeric_state_derivatives(c, theta, h=1e-6):
    """Central differences of the simulated state: an oracle independent of the gate algebra."""
    theta = np.asarray(theta, float)
    out = []
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        out.append((simulate(c, theta + e) - simulate(c, theta - e)) / (2 * h))
    return np.array(out)


# --- A and C ---------------------------------------------------------------------------


def test_empty_circuit():
    c = Circuit(2)
    assert compute_A(c, [], EXACT).shape == (0, 0)
    assert compute_C(c, [], PauliSum.from_label("ZZ"), EXACT).shape == (0,)
    with pytest.raises(NumericalError):
        step(np.zeros((0, 0)), np.zeros(0), [], EXACT)


@pytest.mark.parametrize("mode", ["finite-difference", "parameter-shift", "hadamard-test"])
def test_single_rotation_examples(mode):
    cfg = EvolutionConfig(gradient_mode=mode)
    c, z = ry_circuit(), PauliSum.from_label("Z")
    tol = 1e-3 if mode == "finite-difference" else 1e-12
    assert compute_A(c, [0.3], cfg)[0, 0] == pytest.approx(0.25, abs=tol)
    assert compute_C(c, [np.pi / 2], z, cfg)[0] == pytest.approx(-0.5, abs=tol)
    assert compute_C(c, [np.pi], z, cfg)[0] == pytest.approx(0.0, abs=tol)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 3), hermitian=st.booleans())
def test_exact_modes_match_numeric_oracle(seed, n, hermitian):
    rng = np.random.default_rng(seed)
    c = build_hea(n, 2)
    theta = rng.uniform(-np.pi, np.pi, c.n_parameters)
    h = random_pauli_sum(rng, n, hermitian=hermitian)
    d = numeric_state_derivatives(c, theta)
    phi = simulate(c, theta)
    a_ref = np.real(d.conj() @ d.T)
    c_ref = np.real(d.conj() @ h.apply(phi))
    ps = EvolutionConfig(gradient_mode="parameter-shift")
    ht = EvolutionConfig(gradient_mode="hadamard-test")
    np.testing.assert_allclose(compute_A(c, theta, ps), a_ref, atol=1e-8)
    np.testing.assert_allclose(compute_C(c, theta, h, ps), c_ref, atol=1e-8)
    # the ancilla estimates agree with the statevector values to rounding
    np.testing.assert_allclose(compute_A(c, theta, ht), compute_A(c, theta, ps), atol=1e-10)
    np.testing.assert_allclose(compute_C(c, theta, h, ht), compute_C(c, theta, h, ps), atol=1e-10)


def test_hadamard_test_with_shots_is_unbiased():
    rng = np.random.default_rng(1)
    c = build_hea(2, 1)
    theta = rng.uniform(-1, 1, c.n_parameters)
    h = random_pauli_sum(rng, 2, hermitian=False)
    exact = compute_C(c, theta, h, EXACT)
    runs = np.array([
        HadamardTest(c, theta, EvolutionConfig(gradient_mode="hadamard-test", shots=4000, seed=s)).C(h)
        for s in range(40)
    ])
    err = np.abs(runs.mean(axis=0) - exact)
    sem = runs.std(axis=0, ddof=1) / np.sqrt(len(runs)) + 1e-12
    assert np.all(err < 5 * sem)


def test_shared_parameter_derivative_sums_occurrences():
    c = Circuit(1)
    s = c.new_parameter()
    c.add("RY", 0, slot=s, scale=1.0)
    c.add("RY", 0, slot=s, scale=2.0)
    # RY(theta) RY(2 theta) = RY(3 theta): A = 9/4
    assert compute_A(c, [0.2], EXACT)[0, 0] == pytest.approx(2.25, abs=1e-12)
    d = derivative_states(c, [0.2], EXACT)
    np.testing.assert_allclose(d, numeric_state_derivatives(c, [0.2]), atol=1e-8)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 3))
def test_A_is_symmetric_positive_semidefinite(seed, n):
    rng = np.random.default_rng(seed)
    c = build_hea(n, 2)
    theta = rng.uniform(-np.pi, np.pi, c.n_parameters)
    for mode in ("finite-difference", "parameter-shift"):
        a = compute_A(c, theta, EvolutionConfig(gradient_mode=mode))
        np.testing.assert_array_equal(a, a.T)
        assert np.linalg.eigvalsh(a).min() > -1e-10


def test_finite_difference_error_is_first_order():
    rng = np.random.default_rng(4)
    c = build_hea(2, 1)
    theta = rng.uniform(-1, 1, c.n_parameters)
    h = random_pauli_sum(rng, 2, hermitian=False)
    exact = compute_C(c, theta, h, EXACT)

    def err(delta):
        return np.linalg.norm(compute_C(c, theta, h, EvolutionConfig(fd_step=delta)) - exact)

    ratio = err(1e-3) / err(5e-4)
    assert 1.33 <= ratio <= 3.0
    assert err(1e-7) < 1e-6


# --- step ----------------------------------------------------------------------------------


def test_step_examples():
    cfg = EvolutionConfig()
    res = step([[0.25]], [-0.5], [0.0], cfg)
    assert res.theta_dot[0] == pytest.approx(2.0)
    assert res.theta_next[0] == pytest.approx(0.1)
    res = step([[0.25]], [0.0], [0.7], cfg)
    assert res.theta_next[0] == 0.7 and res.residual == 0.0


def test_step_minimum_norm_solution():
    res = step(np.full((2, 2), 0.25), [-0.5, -0.5], [0.0, 0.0], EvolutionConfig())
    np.testing.assert_allclose(res.theta_dot, [1.0, 1.0], atol=1e-12)
    assert res.rank == 1


def test_step_errors():
    with pytest.raises(NumericalError, match="rank 0"):
        step(np.zeros((2, 2)), [1.0, 0.0], [0.0, 0.0], EvolutionConfig())
    with pytest.raises(InputError):
        step(np.eye(2), [1.0], [0.0, 0.0], EvolutionConfig())


def test_config_validation():
    with pytest.raises(InputError):
        EvolutionConfig(d_tau=0)
    with pytest.raises(InputError):
        EvolutionConfig(gradient_mode="adjoint")
    with pytest.raises(InputError):
        EvolutionConfig(shots=0)


# --- evolve --------------------------------------------------------------------------------


def test_single_qubit_flow_reaches_ground_state():
    traj = evolve(ry_circuit(), [0.1], PauliSum.from_label("Z"), EvolutionConfig(max_steps=2000))
    assert traj.converged
    # the forward-difference bias moves the fixed point by O(fd_step)
    assert traj.final.energy.real == pytest.approx(-1.0, abs=1e-6)
    assert abs(np.cos(traj.theta[0] / 2)) < 1e-3


def test_energy_monotone_for_hermitian_flow():
    rng = np.random.default_rng(5)
    h = random_pauli_sum(rng, 2)
    c = build_hea(2, 2)
    traj = evolve(c, rng.uniform(-1, 1, c.n_parameters), h, EvolutionConfig(d_tau=0.01, max_steps=200, gradient_mode="parameter-shift"))
    assert np.all(np.diff(traj.energies.real) <= 1e-10)


def test_h2_uccsd_reaches_fci(h2_sto6g):
    enc = encode(h2_sto6g, "parity-reduced")
    c = build_uccsd(2, 2, 1)
    traj = evolve(c, np.zeros(3), enc.pauli)
    exact = dense_eig(enc.pauli).ground_energy
    assert traj.converged
    assert abs(traj.final.energy.real - exact) < 1e-6


@pytest.mark.parametrize("mode", ["parameter-shift", "hadamard-test"])
def test_nonhermitian_flow_targets_right_eigenvector(mode):
    c = ry_circuit()
    traj = evolve(c, [0.0], NON_HERMITIAN_2X2, EvolutionConfig(gradient_mode=mode, max_steps=3000))
    assert traj.converged
    assert traj.final.energy.real == pytest.approx(-1.0, abs=1e-6)
    ref = np.array([1, -0.5]) / np.sqrt(1.25)
    assert abs(abs(np.vdot(ref, simulate(c, traj.theta))) - 1) < 1e-6


def test_register_mismatch():
    with pytest.raises(InputError):
        evolve(ry_circuit(), [0.0], PauliSum.from_label("ZZ"))


# --- trajectory files ----------------------------------------------------------------------


def test_csv_roundtrip_and_resume(tmp_path, h2_sto6g):
    enc = encode(h2_sto6g, "parity-reduced")
    c = build_uccsd(2, 2, 1)
    full = evolve(c, np.zeros(3), enc.pauli, EvolutionConfig(max_steps=20))
    path = tmp_path / "traj.csv"
    first = evolve(c, np.zeros(3), enc.pauli, EvolutionConfig(max_steps=10), csv_path=path)
    back = read_trajectory(path)
    assert len(back) == len(first) == 11
    for a, b in zip(back.records, first.records):
        np.testing.assert_array_equal(a.theta, b.theta)
        assert a.energy == b.energy and a.residual == b.residual
    # simulate an interruption that tore the last line
    with open(path, "a") as fh:
        fh.write("11,0.55,0.1")
    resumed = evolve(c, np.zeros(3), enc.pauli, EvolutionConfig(max_steps=20), csv_path=path, resume=True)
    assert [r.step for r in resumed.records] == list(range(21))
    np.testing.assert_allclose(resumed.theta, full.theta, atol=1e-14)
    assert len(read_trajectory(path)) == 21


def test_resume_rejects_other_circuit(tmp_path):
    path = tmp_path / "traj.csv"
    evolve(ry_circuit(), [0.1], PauliSum.from_label("Z"), EvolutionConfig(max_steps=2), csv_path=path)
    with pytest.raises(InputError):
        evolve(build_hea(1, 1), [0.0, 0.0], PauliSum.from_label("Z"), csv_path=path, resume=True)


def test_not_a_trajectory_file(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n")
    with pytest.raises(InputError):
        read_trajectory(p)


def test_energy_helper():
    assert energy(ry_circuit(), [np.pi], PauliSum.from_label("Z")).real == pytest.approx(-1.0)
