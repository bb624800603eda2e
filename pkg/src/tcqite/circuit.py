"""Parameterized circuits, ansatz builders and simulators.

States are plain ``numpy`` vectors of length ``2**n`` using the same
big-endian qubit order as :mod:`tcqite.pauli`: qubit 0 is the most
significant bit of the basis index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError
from .fermion import canonical_encoding, hf_bitstring, map_operator
from .pauli import PauliSum, masks_to_label

ROTATIONS = ("RX", "RY", "RZ")
FIXED = ("H", "X", "CNOT")
KINDS = ROTATIONS + FIXED
DENSITY_QUBIT_LIMIT = 6

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_I = np.eye(2, dtype=complex)
_PAULI_1Q = (_I, _X, _Y, _Z)


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    """``exp(-i angle P / 2)`` for ``P`` in X, Y, Z."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.array([[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]])
    raise InputError(f"not a rotation: {kind}")


@dataclass(frozen=True)
class Gate:
    """One gate. Rotations use ``angle + scale * theta[slot]`` when ``slot`` is set."""

    kind: str
    targets: tuple[int, ...]
    angle: float | None = None
    slot: int | None = None
    scale: float = 1.0

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if kind not in KINDS:
            raise InputError(f"unknown gate kind {self.kind!r}")
        width = 2 if kind == "CNOT" else 1
        if len(self.targets) != width or len(set(self.targets)) != width:
            raise InputError(f"{kind} needs {width} distinct target(s), got {self.targets}")
        if kind in ROTATIONS:
            if self.angle is None and self.slot is None:
                raise InputError(f"{kind} needs an angle or a parameter slot")
        elif self.angle is not None or self.slot is not None:
            raise InputError(f"{kind} takes no angle")

    @property
    def is_parametric(self) -> bool:
        return self.slot is not None

    def resolved_angle(self, theta: Sequence[float]) -> float:
        a = self.angle or 0.0
        if self.slot is not None:
            a += self.scale * theta[self.slot]
        return a

    def matrix(self, theta: Sequence[float] = ()) -> np.ndarray:
        if self.kind in ROTATIONS:
            return rotation_matrix(self.kind, self.resolved_angle(theta))
        if self.kind == "H":
            return _H
        if self.kind == "X":
            return _X
        raise InputError("CNOT has no single-qubit matrix")

    def inverse(self) -> "Gate":
        if self.kind in ROTATIONS:
            return Gate(
                self.kind,
                self.targets,
                None if self.angle is None else -self.angle,
                self.slot,
                -self.scale,
            )
        return self

    def to_text(self) -> str:
        parts = [self.kind] + [str(t) for t in self.targets]
        if self.angle is not None:
            parts.append(f"angle={self.angle!r}")
        if self.slot is not None:
            parts.append(f"slot={self.slot}")
            if self.scale != 1.0:
                parts.append(f"scale={self.scale!r}")
        return " ".join(parts)


@dataclass
class Circuit:
    """Ordered gate list acting on ``n_qubits``.

    Attributes:
        n_qubits: register size.
        gates: gates in application order.
        n_parameters: number of distinct parameter slots.
        labels: optional name per parameter slot (e.g. the excitation it drives).
    """

    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    n_parameters: int = 0
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        for g in self.gates:
            self._validate(g)

    def _validate(self, g: Gate) -> None:
        if any(not 0 <= t < self.n_qubits for t in g.targets):
            raise InputError(f"gate {g.to_text()} addresses qubits outside 0..{self.n_qubits - 1}")
        if g.slot is not None and not 0 <= g.slot < self.n_parameters:
            raise InputError(f"gate {g.to_text()} uses slot outside 0..{self.n_parameters - 1}")

    def add(self, kind: str, *targets: int, angle: float | None = None, slot: int | None = None, scale: float = 1.0) -> "Circuit":
        g = Gate(kind, targets, angle, slot, scale)
        self._validate(g)
        self.gates.append(g)
        return self

    def new_parameter(self, label: str = "") -> int:
        self.n_parameters += 1
        self.labels.append(label or f"p{self.n_parameters - 1}")
        return self.n_parameters - 1

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for g in gates:
            self._validate(g)
            self.gates.append(g)
        return self

    def copy(self) -> "Circuit":
        return Circuit(self.n_qubits, list(self.gates), self.n_parameters, list(self.labels))

    def __len__(self) -> int:
        return len(self.gates)

    def check_parameters(self, theta: Sequence[float]) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape[0] != self.n_parameters:
            raise InputError(f"expected {self.n_parameters} parameters, got {theta.shape[0]}")
        return theta

    def bind(self, theta: Sequence[float]) -> "Circuit":
        """Copy with every parametric angle fixed to its value at ``theta``."""
        theta = self.check_parameters(theta)
        gates = [
            Gate(g.kind, g.targets, g.resolved_angle(theta)) if g.slot is not None else g
            for g in self.gates
        ]
        return Circuit(self.n_qubits, gates, 0)

    def inverse(self) -> "Circuit":
        """Adjoint circuit (same parameter slots, reversed order, negated angles)."""
        return Circuit(self.n_qubits, [g.inverse() for g in reversed(self.gates)], self.n_parameters, list(self.labels))

    def slot_occurrences(self, slot: int) -> list[int]:
        return [i for i, g in enumerate(self.gates) if g.slot == slot]

    def to_text(self) -> str:
        head = f"circuit n_qubits={self.n_qubits} n_parameters={self.n_parameters}"
        return "\n".join([head] + [g.to_text() for g in self.gates]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines or not lines[0].startswith("circuit"):
            raise InputError("circuit text must start with a 'circuit' header")
        try:
            head = dict(kv.split("=") for kv in lines[0].split()[1:])
            c = cls(int(head["n_qubits"]), [], int(head["n_parameters"]))
            c.labels = [f"p{i}" for i in range(c.n_parameters)]
            for ln in lines[1:]:
                toks = ln.split()
                targets = [int(t) for t in toks[1:] if "=" not in t]
                opts = dict(t.split("=") for t in toks[1:] if "=" in t)
                c.add(
                    toks[0],
                    *targets,
                    angle=float(opts["angle"]) if "angle" in opts else None,
                    slot=int(opts["slot"]) if "slot" in opts else None,
                    scale=float(opts.get("scale", 1.0)),
                )
        except (KeyError, ValueError) as exc:
            raise InputError(f"malformed circuit text: {exc}") from None
        return c


# ---------------------------------------------------------------------------
# builders


def prepare_bitstring(c: Circuit, bits: Sequence[int]) -> Circuit:
    if len(bits) != c.n_qubits:
        raise InputError("bitstring length does not match the register")
    for q, b in enumerate(bits):
        if b:
            c.add("X", q)
    return c


def build_hea(n_qubits: int, layers: int, hf_bits: Sequence[int] | None = None) -> Circuit:
    """Ry layers interleaved with linear CNOT chains, ending on a rotation layer.

    Args:
        n_qubits: register size.
        layers: number of entangling blocks; there are ``layers + 1`` Ry layers.
        hf_bits: optional reference bitstring prepared with X gates first.
    """
    if layers < 0 or n_qubits < 1:
        raise InputError("need n_qubits >= 1 and layers >= 0")
    c = Circuit(n_qubits)
    if hf_bits is not None:
        prepare_bitstring(c, hf_bits)
    for layer in range(layers + 1):
        if layer:
            for q in range(n_qubits - 1):
                c.add("CNOT", q, q + 1)
        for q in range(n_qubits):
            c.add("RY", q, slot=c.new_parameter(f"ry[{layer},{q}]"))
    return c


def uccsd_excitations(n_spatial: int, n_electrons: int, n_alpha: int) -> list[tuple[int, ...]]:
    """Spin-conserving singles ``(i, a)`` then doubles ``(i, j, a, b)``, lexicographic.

    Indices are block-ordered spin orbitals; ``i < j`` occupied, ``a < b`` virtual.
    """
    n = n_spatial
    n_beta = n_electrons - n_alpha
    occ = list(range(n_alpha)) + [n + k for k in range(n_beta)]
    vir = [k for k in range(n_alpha, n)] + [n + k for k in range(n_beta, n)]
    spin = lambda k: k // n  # noqa: E731
    singles = sorted((i, a) for i in occ for a in vir if spin(i) == spin(a))
    doubles = sorted(
        (i, j, a, b)
        for i, j in itertools.combinations(occ, 2)
        for a, b in itertools.combinations(vir, 2)
        if sorted((spin(i), spin(j))) == sorted((spin(a), spin(b)))
    )
    return singles + doubles


def excitation_generator(exc: tuple[int, ...]) -> list[tuple[complex, list[tuple[int, bool]]]]:
    """Ladder-operator terms of ``T - T^dagger`` for one excitation."""
    if len(exc) == 2:
        i, a = exc
        return [(1.0, [(a, True), (i, False)]), (-1.0, [(i, True), (a, False)])]
    i, j, a, b = exc
    return [
        (1.0, [(a, True), (b, True), (j, False), (i, False)]),
        (-1.0, [(i, True), (j, True), (b, False), (a, False)]),
    ]


def append_pauli_rotation(c: Circuit, label: str, slot: int | None, scale: float, angle: float | None = None) -> None:
    """Append ``exp(-i phi P / 2)`` with ``phi = angle + scale * theta[slot]``.

    Compiled as basis change, CNOT ladder, Rz on the last support qubit, and
    the mirror image.
    """
    support = [q for q, p in enumerate(label) if p != "I"]
    if not support:
        return  # global phase
    pre, post = [], []
    for q in support:
        if label[q] == "X":
            pre.append(Gate("H", (q,)))
            post.append(Gate("H", (q,)))
        elif label[q] == "Y":
            pre.append(Gate("RX", (q,), np.pi / 2))
            post.append(Gate("RX", (q,), -np.pi / 2))
    ladder = [Gate("CNOT", (a, b)) for a, b in zip(support, support[1:])]
    c.extend(pre)
    c.extend(ladder)
    c.add("RZ", support[-1], angle=angle, slot=slot, scale=scale)
    c.extend(reversed(ladder))
    c.extend(post)


def build_uccsd(
    n_spatial: int,
    n_electrons: int,
    n_alpha: int,
    encoding: str = "parity-reduced",
    include_hf: bool = True,
) -> Circuit:
    """First-order single-step Trotterized UCCSD, one parameter per excitation.

    Each generator ``T - T^dagger`` is mapped with the chosen encoding into
    ``sum_k i c_k P_k`` and exponentiated string by string.
    """
    encoding = canonical_encoding(encoding)
    sector = (n_electrons, n_alpha)
    n_qubits = 2 * n_spatial - (2 if encoding == "parity-reduced" else 0)
    c = Circuit(n_qubits)
    if include_hf:
        prepare_bitstring(c, hf_bitstring(n_electrons, n_alpha, n_spatial, encoding))
    for exc in uccsd_excitations(n_spatial, n_electrons, n_alpha):
        gen = map_operator(excitation_generator(exc), n_spatial, encoding, sector)
        slot = c.new_parameter("exc" + ",".join(map(str, exc)))
        for (x, z), coeff in sorted(gen.items()):
            if abs(coeff.real) > 1e-12:
                raise InputError("excitation generator is not anti-Hermitian")
            # exp(theta * i c P) = exp(-i (-2 c theta) P / 2)
            append_pauli_rotation(c, masks_to_label(x, z, n_qubits), slot, -2.0 * coeff.imag)
    return c


@dataclass(frozen=True)
class CircuitStats:
    parameters: int
    gates: int
    cnots: int
    depth: int
    counts: dict

    def as_dict(self) -> dict:
        return {"parameters": self.parameters, "gates": self.gates, "cnots": self.cnots, "depth": self.depth, "counts": dict(self.counts)}


def circuit_stats(c: Circuit) -> CircuitStats:
    """Gate counts and greedy depth (each gate sits one layer above its busiest qubit)."""
    level = [0] * c.n_qubits
    counts: dict[str, int] = {}
    for g in c.gates:
        d = max(level[t] for t in g.targets) + 1
        for t in g.targets:
            level[t] = d
        counts[g.kind] = counts.get(g.kind, 0) + 1
    return CircuitStats(c.n_parameters, len(c.gates), counts.get("CNOT", 0), max(level, default=0), counts)


# ---------------------------------------------------------------------------
# statevector simulation


def zero_state(n_qubits: int) -> np.ndarray:
    s = np.zeros(1 << n_qubits, dtype=complex)
    s[0] = 1.0
    return s


def basis_state(bits: Sequence[int]) -> np.ndarray:
    s = np.zeros(1 << len(bits), dtype=complex)
    s[int("".join(str(int(b)) for b in bits), 2) if len(bits) else 0] = 1.0
    return s


def apply_1q(state: np.ndarray, m: np.ndarray, q: int, n: int) -> np.ndarray:
    """Apply a 2x2 matrix to qubit ``q`` of an ``n``-qubit tensor (flattened)."""
    psi = state.reshape(1 << q, 2, -1)
    return np.einsum("ab,ibj->iaj", m, psi).reshape(state.shape)


def apply_cnot(state: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    psi = state.reshape((2,) * n).copy()
    sl = [slice(None)] * n
    sl[control] = 1
    sub = psi[tuple(sl)]
    t_axis = target - (target > control)
    psi[tuple(sl)] = np.flip(sub, axis=t_axis)
    return psi.reshape(state.shape)


def apply_gate(state: np.ndarray, g: Gate, theta: Sequence[float], n: int) -> np.ndarray:
    if g.kind == "CNOT":
        return apply_cnot(state, g.targets[0], g.targets[1], n)
    return apply_1q(state, g.matrix(theta), g.targets[0], n)


def simulate(c: Circuit, theta: Sequence[float] = (), initial: np.ndarray | None = None) -> np.ndarray:
    """Apply ``c`` at parameters ``theta`` to ``initial`` (default ``|0...0>``)."""
    theta = c.check_parameters(theta)
    state = zero_state(c.n_qubits) if initial is None else np.array(initial, dtype=complex)
    if state.shape != (1 << c.n_qubits,):
        raise InputError("initial state has the wrong dimension")
    for g in c.gates:
        state = apply_gate(state, g, theta, c.n_qubits)
    return state


def circuit_unitary(c: Circuit, theta: Sequence[float] = ()) -> np.ndarray:
    """Dense unitary built by kron products, independent of the simulator kernels."""
    theta = c.check_parameters(theta)
    n = c.n_qubits
    u = np.eye(1 << n, dtype=complex)
    for g in c.gates:
        if g.kind == "CNOT":
            ctl, tgt = g.targets
            p0 = np.diag([1, 0]).astype(complex)
            p1 = np.diag([0, 1]).astype(complex)
            a = [_I] * n
            b = [_I] * n
            a[ctl] = p0
            b[ctl] = p1
            b[tgt] = _X
            m = _kron_all(a) + _kron_all(b)
        else:
            ops = [_I] * n
            ops[g.targets[0]] = g.matrix(theta)
            m = _kron_all(ops)
        u = m @ u
    return u


def _kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for o in ops:
        out = np.kron(out, o)
    return out


def expectation(state: np.ndarray, h: PauliSum) -> complex:
    """``<state|h|state>``; complex for non-Hermitian ``h``."""
    state = np.asarray(state)
    if state.shape != (1 << h.n_qubits,):
        raise InputError(f"state dimension {state.shape} does not match {h.n_qubits} qubits")
    return complex(np.vdot(state, h.apply(state)))


# ---------------------------------------------------------------------------
# noise


@dataclass
class NoiseModel:
    """Depolarizing gate noise plus per-qubit readout confusion.

    Attributes:
        p1: depolarizing probability after each single-qubit gate.
        p2: depolarizing probability after each CNOT.
        readout: per-qubit 2x2 matrices ``M[i, j] = P(read i | true j)``, or None.
    """

    p1: float = 1e-3
    p2: float = 1e-2
    readout: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        for p in (self.p1, self.p2):
            if not 0.0 <= p <= 1.0:
                raise InputError("depolarizing probabilities must lie in [0, 1]")
        if self.readout is not None:
            mats = tuple(np.asarray(m, dtype=float) for m in self.readout)
            for m in mats:
                if m.shape != (2, 2) or np.any(m < 0) or not np.allclose(m.sum(axis=0), 1.0, atol=1e-12):
                    raise InputError("readout matrices must be 2x2 column-stochastic")
            self.readout = mats

    @staticmethod
    def symmetric_readout(n_qubits: int, flip: float) -> tuple[np.ndarray, ...]:
        m = np.array([[1 - flip, flip], [flip, 1 - flip]])
        return tuple(m.copy() for _ in range(n_qubits))

    def readout_for(self, n_qubits: int) -> tuple[np.ndarray, ...] | None:
        if self.readout is None:
            return None
        if len(self.readout) != n_qubits:
            raise InputError(f"noise model has {len(self.readout)} readout matrices for {n_qubits} qubits")
        return self.readout


def _apply_1q_rho(rho: np.ndarray, m: np.ndarray, q: int, n: int) -> np.ndarray:
    rho = apply_1q(rho, m, q, 2 * n)
    return apply_1q(rho, m.conj(), n + q, 2 * n)


def _apply_gate_rho(rho: np.ndarray, g: Gate, theta, n: int) -> np.ndarray:
    if g.kind == "CNOT":
        c, t = g.targets
        rho = apply_cnot(rho, c, t, 2 * n)
        return apply_cnot(rho, n + c, n + t, 2 * n)
    return _apply_1q_rho(rho, g.matrix(theta), g.targets[0], n)


def depolarize(rho: np.ndarray, qubits: Sequence[int], p: float, n: int) -> np.ndarray:
    """``(1 - p) rho + p (I/d) (x) Tr_qubits(rho)`` as an exact Pauli twirl."""
    if p == 0.0:
        return rho
    k = len(qubits)
    d2 = 4 ** k
    out = (1.0 - p * (d2 - 1) / d2) * rho
    for paulis in itertools.product(range(4), repeat=k):
        if not any(paulis):
            continue
        term = rho
        for q, pi in zip(qubits, paulis):
            if pi:
                term = _apply_1q_rho(term, _PAULI_1Q[pi], q, n)
        out = out + (p / d2) * term
    return out


def density_matrix(c: Circuit, theta: Sequence[float], noise: NoiseModel | None = None, initial: np.ndarray | None = None) -> np.ndarray:
    """Exact mixed-state evolution (``<= 6`` qubits); returns a ``2**n x 2**n`` matrix."""
    theta = c.check_parameters(theta)
    n = c.n_qubits
    if n > DENSITY_QUBIT_LIMIT:
        raise InputError(f"density-matrix path limited to {DENSITY_QUBIT_LIMIT} qubits")
    psi = zero_state(n) if initial is None else np.asarray(initial, dtype=complex)
    rho = np.outer(psi, psi.conj()).reshape(-1)
    for g in c.gates:
        rho = _apply_gate_rho(rho, g, theta, n)
        if noise is not None:
            p = noise.p2 if g.kind == "CNOT" else noise.p1
            rho = depolarize(rho, g.targets, p, n)
    return rho.reshape(1 << n, 1 << n)


def trajectory_state(c: Circuit, theta: Sequence[float], noise: NoiseModel, rng: np.random.Generator, initial: np.ndarray | None = None) -> np.ndarray:
    """One stochastic Pauli-error trajectory of the depolarizing model."""
    theta = c.check_parameters(theta)
    n = c.n_qubits
    state = zero_state(n) if initial is None else np.array(initial, dtype=complex)
    for g in c.gates:
        state = apply_gate(state, g, theta, n)
        p = noise.p2 if g.kind == "CNOT" else noise.p1
        if p and rng.random() < p:
            for q in g.targets:
                pi = rng.integers(4)
                if pi:
                    state = apply_1q(state, _PAULI_1Q[pi], q, n)
    return state


def apply_readout(probs: np.ndarray, confusion: Sequence[np.ndarray]) -> np.ndarray:
    """Push a distribution through tensor-factored confusion matrices."""
    n = len(confusion)
    p = np.asarray(probs, dtype=float)
    for q, m in enumerate(confusion):
        p = apply_1q(p.astype(complex), np.asarray(m, dtype=complex), q, n).real
    return p


# ---------------------------------------------------------------------------
# measurement


def measurement_groups(h: PauliSum) -> tuple[complex, dict[str, list[tuple[int, complex]]]]:
    """Split ``h`` into its identity coefficient and identical-basis groups.

    The basis of a term is its label with ``I`` replaced by ``Z``. Each group
    entry holds the term's support mask (bits to take parity over) and coefficient.
    """
    n = h.n_qubits
    identity = 0.0 + 0.0j
    groups: dict[str, list[tuple[int, complex]]] = {}
    for (x, z), c in h.items():
        if x == 0 and z == 0:
            identity += c
            continue
        label = masks_to_label(x, z, n)
        basis = label.replace("I", "Z")
        groups.setdefault(basis, []).append((x | z, c))
    return identity, dict(sorted(groups.items()))


def basis_change(basis: str) -> list[Gate]:
    gates = []
    for q, p in enumerate(basis):
        if p == "X":
            gates.append(Gate("H", (q,)))
        elif p == "Y":
            gates.append(Gate("RX", (q,), np.pi / 2))
    return gates


def _outcome_values(n: int, terms: list[tuple[int, complex]]) -> np.ndarray:
    idx = np.arange(1 << n)
    vals = np.zeros(1 << n)
    for mask, c in terms:
        parity = np.bitwise_count(idx & mask).astype(np.int64) & 1
        vals += c.real * (1 - 2 * parity)
    return vals


def outcome_distribution(
    c: Circuit,
    theta: Sequence[float],
    basis: str,
    noise: NoiseModel | None = None,
    rng: np.random.Generator | None = None,
    trajectories: int = 200,
    initial: np.ndarray | None = None,
) -> np.ndarray:
    """Exact (or trajectory-averaged) outcome probabilities in a measurement basis."""
    meas = c.copy().extend(basis_change(basis))
    n = c.n_qubits
    if noise is None:
        probs = np.abs(simulate(meas, theta, initial)) ** 2
    elif n <= DENSITY_QUBIT_LIMIT:
        probs = np.real(np.diag(density_matrix(meas, theta, noise, initial)))
    else:
        rng = rng if rng is not None else np.random.default_rng()
        probs = np.zeros(1 << n)
        for _ in range(trajectories):
            probs += np.abs(trajectory_state(meas, theta, noise, rng, initial)) ** 2
        probs /= trajectories
    probs = np.clip(probs, 0.0, None)
    if noise is not None and noise.readout_for(n) is not None:
        probs = apply_readout(probs, noise.readout)
    return probs / probs.sum()


@dataclass(frozen=True)
class SampledValue:
    mean: float
    stderr: float
    shots: int


def _require_hermitian(h: PauliSum) -> None:
    if not h.is_hermitian():
        raise InputError("sampling needs a Hermitian observable; split non-Hermitian sums first")


def sample_expectation(
    c: Circuit,
    theta: Sequence[float],
    h: PauliSum,
    shots: int,
    noise: NoiseModel | None = None,
    rng: np.random.Generator | None = None,
    initial: np.ndarray | None = None,
    corrector=None,
) -> SampledValue:
    """Shot-based estimate of ``<h>``; every measurement basis gets ``shots`` shots.

    Args:
        corrector: optional callable mapping an empirical distribution to a
            corrected one (e.g. readout-error inversion) before averaging.
    """
    _require_hermitian(h)
    if shots < 1:
        raise InputError("shots must be positive")
    if h.n_qubits != c.n_qubits:
        raise InputError("observable and circuit act on different registers")
    rng = rng if rng is not None else np.random.default_rng()
    ident, groups = measurement_groups(h)
    mean = ident.real
    var = 0.0
    for basis, terms in groups.items():
        probs = outcome_distribution(c, theta, basis, noise, rng, initial=initial)
        counts = rng.multinomial(shots, probs)
        freq = counts / shots
        if corrector is not None:
            freq = corrector(freq)
        vals = _outcome_values(c.n_qubits, terms)
        m = float(freq @ vals)
        mean += m
        if shots > 1:
            var += float(freq @ (vals - m) ** 2) * shots / (shots - 1) / shots
    return SampledValue(mean, float(np.sqrt(var)), shots)


def exact_measured_expectation(
    c: Circuit,
    theta: Sequence[float],
    h: PauliSum,
    noise: NoiseModel | None = None,
    initial: np.ndarray | None = None,
    corrector=None,
    rng: np.random.Generator | None = None,
) -> float:
    """Infinite-shot limit of :func:`sample_expectation` (readout noise included)."""
    _require_hermitian(h)
    ident, groups = measurement_groups(h)
    total = ident.real
    for basis, terms in groups.items():
        probs = outcome_distribution(c, theta, basis, noise, rng, initial=initial)
        if corrector is not None:
            probs = corrector(probs)
        total += float(probs @ _outcome_values(c.n_qubits, terms))
    return total


def noisy_expectation(c: Circuit, theta: Sequence[float], h: PauliSum, noise: NoiseModel | None, initial: np.ndarray | None = None) -> complex:
    """``Tr(rho h)`` under gate noise only (no readout), for any ``h``."""
    rho = density_matrix(c, theta, noise, initial)
    return complex(np.trace(h.to_sparse() @ rho))


def fold(c: Circuit, scale: int) -> Circuit:
    """Global unitary folding ``U (U^dagger U)^k`` with ``scale = 2k + 1``."""
    if scale < 1 or scale % 2 == 0:
        raise InputError("fold scale must be an odd positive integer")
    out = c.copy()
    body = [g for g in c.gates]
    inv = [g.inverse() for g in reversed(body)]
    for _ in range((scale - 1) // 2):
        out.extend(inv)
        out.extend(body)
    return out
