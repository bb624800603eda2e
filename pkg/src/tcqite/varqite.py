"""McLachlan variational imaginary-time evolution.

Parameters follow ``A theta_dot = -C`` with ``A_ij = Re<d_i Phi|d_j Phi>`` and
``C_i = Re<d_i Phi|H|Phi>``, integrated by explicit Euler steps. ``H`` may be
non-Hermitian; the flow then targets its right ground eigenvector.

Three derivative modes are available:

* ``finite-difference``: forward differences of the simulated state.
* ``parameter-shift``: exact state derivatives from shifted gate angles.
* ``hadamard-test``: the ancilla interference estimates a quantum device
  would measure, evaluated exactly or with finite shots. The Hermitian part
  of ``H`` is read out after a Hadamard on the ancilla, the anti-Hermitian
  part after an ``Rx(pi/2)``.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .circuit import Circuit, Gate, apply_1q, apply_gate, expectation, simulate
from .errors import InputError, NumericalError
from .pauli import PauliSum

log = logging.getLogger(__name__)

GRADIENT_MODES = ("finite-difference", "parameter-shift", "hadamard-test")
SHIFT = np.pi / 2
_PAULI_OF = {"RX": "X", "RY": "Y", "RZ": "Z"}


@dataclass
class EvolutionConfig:
    """Settings of the imaginary-time flow.

    Attributes:
        d_tau: Euler time step.
        fd_step: forward-difference step for ``finite-difference`` mode.
        max_steps: upper bound on Euler updates.
        residual_tolerance: convergence threshold on ``||A^+ C||``.
        persistence: consecutive steps below the threshold needed to stop.
        gradient_mode: one of ``GRADIENT_MODES``.
        lstsq_cutoff: relative singular-value cutoff of the least-squares solve.
        shots: ancilla shots per estimate in ``hadamard-test`` mode; None is exact.
        workers: threads used for independent derivative states.
        seed: RNG seed for shot sampling.
    """

    d_tau: float = 0.05
    fd_step: float = 1e-3
    max_steps: int = 400
    residual_tolerance: float = 1e-6
    persistence: int = 5
    gradient_mode: str = "finite-difference"
    lstsq_cutoff: float = 1e-8
    shots: int | None = None
    workers: int = 1
    seed: int | None = None

    def __post_init__(self):
        if self.d_tau <= 0 or self.fd_step <= 0:
            raise InputError("d_tau and fd_step must be positive")
        if self.max_steps < 0 or self.persistence < 1:
            raise InputError("max_steps must be >= 0 and persistence >= 1")
        if self.gradient_mode not in GRADIENT_MODES:
            raise InputError(f"gradient_mode must be one of {GRADIENT_MODES}")
        if self.lstsq_cutoff < 0:
            raise InputError("lstsq_cutoff must be non-negative")
        if self.shots is not None and self.shots < 1:
            raise InputError("shots must be positive")


# ---------------------------------------------------------------------------
# derivative states


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _run(c: Circuit, theta: np.ndarray, initial, replace: dict[int, Gate | np.ndarray] | None = None) -> np.ndarray:
    """Simulate ``c``; ``replace`` swaps gate ``k`` for another gate or a raw 2x2 matrix."""
    n = c.n_qubits
    state = np.zeros(1 << n, dtype=complex) if initial is None else np.array(initial, dtype=complex)
    if initial is None:
        state[0] = 1.0
    for k, g in enumerate(c.gates):
        sub = replace.get(k) if replace else None
        if sub is None:
            state = apply_gate(state, g, theta, n)
        elif isinstance(sub, Gate):
            state = apply_gate(state, sub, theta, n)
        else:
            state = apply_1q(state, sub, g.targets[0], n)
    return state


def finite_difference_states(c: Circuit, theta, cfg: EvolutionConfig, initial=None, base: np.ndarray | None = None) -> np.ndarray:
    """Rows ``(Phi(theta + fd_step e_i) - Phi(theta)) / fd_step``."""
    theta = c.check_parameters(theta)
    phi = simulate(c, theta, initial) if base is None else base

    def one(i):
        shifted = theta.copy()
        shifted[i] += cfg.fd_step
        return (simulate(c, shifted, initial) - phi) / cfg.fd_step

    rows = _map(one, list(range(c.n_parameters)), cfg.workers)
    return np.array(rows).reshape(c.n_parameters, -1)


def _shift_gate(g: Gate, delta: float) -> Gate:
    return Gate(g.kind, g.targets, (g.angle or 0.0) + delta, g.slot, g.scale)


def parameter_shift_states(c: Circuit, theta, cfg: EvolutionConfig | None = None, initial=None) -> np.ndarray:
    """Exact derivative states via ``dR/dphi = r (R(phi+s) - R(phi-s)) / (2 sin(r s))``.

    With generator eigenvalues ``r = 1/2`` and ``s = pi/2``. Slots used by several
    gates sum the contributions of every occurrence, weighted by the gate scale.
    """
    theta = c.check_parameters(theta)
    workers = cfg.workers if cfg is not None else 1
    r = 0.5
    factor = r / (2 * np.sin(r * SHIFT))
    occ = [(k, g) for k, g in enumerate(c.gates) if g.slot is not None]

    def one(item):
        k, g = item
        plus = _run(c, theta, initial, {k: _shift_gate(g, SHIFT)})
        minus = _run(c, theta, initial, {k: _shift_gate(g, -SHIFT)})
        return g.slot, g.scale * factor * (plus - minus)

    out = np.zeros((c.n_parameters, 1 << c.n_qubits), dtype=complex)
    for slot, vec in _map(one, occ, workers):
        out[slot] += vec
    return out


def derivative_states(c: Circuit, theta, cfg: EvolutionConfig, initial=None, base=None) -> np.ndarray:
    if cfg.gradient_mode == "finite-difference":
        return finite_difference_states(c, theta, cfg, initial, base)
    return parameter_shift_states(c, theta, cfg, initial)


# ---------------------------------------------------------------------------
# A and C


def _gram_A(d: np.ndarray) -> np.ndarray:
    a = np.real(d.conj() @ d.T)
    return 0.5 * (a + a.T)


def compute_A(c: Circuit, theta, cfg: EvolutionConfig, initial=None) -> np.ndarray:
    """Symmetrized ``A_ij = Re<d_i Phi|d_j Phi>``."""
    if c.n_parameters == 0:
        return np.zeros((0, 0))
    if cfg.gradient_mode == "hadamard-test":
        return HadamardTest(c, theta, cfg, initial).A()
    return _gram_A(derivative_states(c, theta, cfg, initial))


def compute_C(c: Circuit, theta, h: PauliSum, cfg: EvolutionConfig, initial=None) -> np.ndarray:
    """``C_i = Re<d_i Phi|H|Phi>`` with complex ``H`` applied directly (or via the ancilla)."""
    if c.n_parameters == 0:
        return np.zeros(0)
    if cfg.gradient_mode == "hadamard-test":
        return HadamardTest(c, theta, cfg, initial).C(h)
    phi = simulate(c, theta, initial)
    d = derivative_states(c, theta, cfg, initial, base=phi)
    return np.real(d.conj() @ h.apply(phi))


class HadamardTest:
    """Ancilla-interference estimates of ``A`` and ``C``.

    For a gate ``exp(-i phi P/2)`` with ``phi = a + s theta``, the derivative is
    ``-i s/2`` times the branch state ``chi`` that inserts ``P`` after the gate.
    The ancilla starts in ``Rx(pi/2)|0> = (|0> - i|1>)/sqrt(2)``; the two branches
    carry ``chi`` and ``P_j Phi``. Reading the ancilla after a Hadamard gives
    ``Im<chi|P_j Phi>``, after ``Rx(pi/2)`` gives ``-Re<chi|P_j Phi>``.
    Each such number is the expectation of a +-1 outcome; with ``shots`` it is
    replaced by a binomial estimate.
    """

    def __init__(self, c: Circuit, theta, cfg: EvolutionConfig, initial=None):
        self.c = c
        self.theta = c.check_parameters(theta)
        self.cfg = cfg
        self.initial = initial
        self.rng = np.random.default_rng(cfg.seed)
        self.occ = [(k, g) for k, g in enumerate(c.gates) if g.slot is not None]
        self.phi = simulate(c, self.theta, initial)
        self.branches = np.array(_map(self._branch, self.occ, cfg.workers)).reshape(len(self.occ), -1)

    def _branch(self, item) -> np.ndarray:
        k, g = item
        pauli = _PAULI_OF[g.kind]
        m = {"X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}[pauli]
        # insert P right after gate k: replace gate k by (P . G_k)
        gk = g.matrix(self.theta)
        return _run(self.c, self.theta, self.initial, {k: m @ gk})

    def _measure(self, expval: np.ndarray) -> np.ndarray:
        expval = np.clip(np.real(expval), -1.0, 1.0)
        if self.cfg.shots is None:
            return expval
        p0 = 0.5 * (1.0 + expval)
        ones = self.rng.binomial(self.cfg.shots, p0)
        return 2.0 * ones / self.cfg.shots - 1.0

    def ancilla_expectations(self, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Ancilla ``<Z>`` after H and after Rx(pi/2), for branch overlaps ``<a|b>``.

        The joint state is ``(|0>a - i|1>b)/sqrt(2)``; its ancilla ``<X>`` is
        ``Im<a|b>`` and ``<Y>`` is ``-Re<a|b>``.
        """
        ov = a.conj() @ b.T
        return self._measure(ov.imag), self._measure(-ov.real)

    def C(self, h: PauliSum) -> np.ndarray:
        cfg_out = np.zeros(self.c.n_parameters)
        for (x, z), coeff in h.items():
            p_phi = PauliSum(h.n_qubits, {(x, z): 1.0}).apply(self.phi)
            m_h, m_rx = self.ancilla_expectations(self.branches, p_phi[None, :])
            m_h, m_rx = m_h[:, 0], m_rx[:, 0]
            # Re<d Phi|P Phi> = -(s/2) Im<chi|P Phi>; Im<d Phi|P Phi> = (s/2) Re<chi|P Phi>
            for row, (k, g) in enumerate(self.occ):
                half = 0.5 * g.scale
                re_part = -half * m_h[row]
                im_part = -half * m_rx[row]
                cfg_out[g.slot] += coeff.real * re_part - coeff.imag * im_part
        return cfg_out

    def A(self) -> np.ndarray:
        n = self.c.n_parameters
        a = np.zeros((n, n))
        # Re<chi_g|chi_h> from the ancilla read after Rx(pi/2), which returns -Re
        _, m_rx = self.ancilla_expectations(self.branches, self.branches)
        for r1, (_, g1) in enumerate(self.occ):
            for r2, (_, g2) in enumerate(self.occ):
                a[g1.slot, g2.slot] += 0.25 * g1.scale * g2.scale * (-m_rx[r1, r2])
        return 0.5 * (a + a.T)


# ---------------------------------------------------------------------------
# integration


@dataclass
class StepResult:
    theta_next: np.ndarray
    theta_dot: np.ndarray
    residual: float
    rank: int


def step(A: np.ndarray, C: np.ndarray, theta, cfg: EvolutionConfig) -> StepResult:
    """Least-squares solve of ``A theta_dot = -C`` followed by an Euler update.

    Raises:
        NumericalError: ``A`` has rank zero.
    """
    theta = np.asarray(theta, dtype=float)
    A = np.asarray(A, dtype=float)
    C = np.asarray(C, dtype=float)
    if A.shape != (theta.size, theta.size) or C.shape != (theta.size,):
        raise InputError("A, C and theta have inconsistent shapes")
    if theta.size == 0:
        raise NumericalError("nothing to evolve: the circuit has no parameters")
    theta_dot, _, rank, sv = np.linalg.lstsq(A, -C, rcond=cfg.lstsq_cutoff)
    if rank == 0:
        raise NumericalError("A matrix is singular in every direction (rank 0)")
    log.debug("lstsq rank %d/%d, cutoff %.1e, sigma_max %.3e", rank, theta.size, cfg.lstsq_cutoff, sv[0] if len(sv) else 0.0)
    return StepResult(theta + cfg.d_tau * theta_dot, theta_dot, float(np.linalg.norm(theta_dot)), int(rank))


@dataclass
class TrajectoryRecord:
    step: int
    tau: float
    theta: np.ndarray
    energy: complex
    residual: float
    update_norm: float


@dataclass
class VarQiteTrajectory:
    """Per-step parameters, energies and residuals of one evolution.

    ``residual`` is ``||A^+ C||``, which equals ``||theta_dot||``; ``update_norm``
    stores the same quantity for the record and is kept as a separate column so
    downstream tooling does not need to know that.
    """

    records: list[TrajectoryRecord] = field(default_factory=list)
    converged: bool = False

    def __len__(self) -> int:
        return len(self.records)

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    @property
    def final(self) -> TrajectoryRecord:
        if not self.records:
            raise NumericalError("empty trajectory")
        return self.records[-1]

    @property
    def theta(self) -> np.ndarray:
        return self.final.theta


def _csv_header(n_params: int) -> list[str]:
    return ["step", "tau"] + [f"theta_{i}" for i in range(n_params)] + ["E_re", "E_im", "residual", "update_norm"]


def _csv_row(rec: TrajectoryRecord) -> list[str]:
    return (
        [str(rec.step), repr(rec.tau)]
        + [repr(float(t)) for t in rec.theta]
        + [repr(rec.energy.real), repr(rec.energy.imag), repr(rec.residual), repr(rec.update_norm)]
    )


def read_trajectory(path: str | Path) -> VarQiteTrajectory:
    traj = VarQiteTrajectory()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["step", "tau"]:
            raise InputError(f"{path} is not a trajectory file")
        n_params = len(header) - 6
        for row in reader:
            if len(row) != len(header):
                break  # a torn final line from an interrupted run
            vals = [float(v) for v in row]
            traj.records.append(
                TrajectoryRecord(
                    int(vals[0]), vals[1], np.array(vals[2:2 + n_params]),
                    complex(vals[2 + n_params], vals[3 + n_params]), vals[4 + n_params], vals[5 + n_params],
                )
            )
    return traj


def energy(c: Circuit, theta, h: PauliSum, initial=None) -> complex:
    return expectation(simulate(c, theta, initial), h)


def evolve(
    c: Circuit,
    theta0,
    h: PauliSum,
    cfg: EvolutionConfig | None = None,
    initial=None,
    csv_path: str | Path | None = None,
    resume: bool = False,
    callback: Callable[[TrajectoryRecord], None] | None = None,
) -> VarQiteTrajectory:
    """Integrate the flow until ``||A^+ C||`` stays below tolerance or ``max_steps``.

    Args:
        c: ansatz circuit.
        theta0: starting parameters.
        h: Hamiltonian (Hermitian or not) on the circuit's register.
        cfg: evolution settings.
        initial: initial state; ``|0...0>`` when omitted.
        csv_path: stream one row per step to this CSV file.
        resume: continue from the last complete row of ``csv_path``.
        callback: called with each record as it is produced.
    """
    cfg = cfg or EvolutionConfig()
    if h.n_qubits != c.n_qubits:
        raise InputError("Hamiltonian and circuit act on different registers")
    theta = c.check_parameters(theta0).copy()
    traj = VarQiteTrajectory()
    start = 0
    below = 0
    if resume and csv_path is not None and Path(csv_path).exists():
        previous = read_trajectory(csv_path)
        if previous.records:
            if previous.records[-1].theta.size != c.n_parameters:
                raise InputError("checkpoint parameter count does not match the circuit")
            traj.records = previous.records[:-1]
            last = previous.records[-1]
            start, theta = last.step, last.theta.copy()
            for rec in reversed(traj.records):
                if rec.residual >= cfg.residual_tolerance:
                    break
                below += 1
    fh = None
    writer = None
    if csv_path is not None:
        fh = open(csv_path, "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(_csv_header(c.n_parameters))
        for rec in traj.records:
            writer.writerow(_csv_row(rec))
    try:
        for k in range(start, cfg.max_steps + 1):
            e = energy(c, theta, h, initial)
            A = compute_A(c, theta, cfg, initial)
            C = compute_C(c, theta, h, cfg, initial)
            res = step(A, C, theta, cfg)
            rec = TrajectoryRecord(k, k * cfg.d_tau, theta.copy(), e, res.residual, float(np.linalg.norm(res.theta_dot)))
            traj.records.append(rec)
            if writer is not None:
                writer.writerow(_csv_row(rec))
                fh.flush()
            if callback is not None:
                callback(rec)
            below = below + 1 if res.residual < cfg.residual_tolerance else 0
            if below >= cfg.persistence:
                traj.converged = True
                break
            if k < cfg.max_steps:
                theta = res.theta_next
    finally:
        if fh is not None:
            fh.close()
    return traj
