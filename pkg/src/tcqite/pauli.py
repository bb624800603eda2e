"""Complex-coefficient Pauli-string algebra.

Strings are stored as a pair of bitmasks ``(x, z)``; the operator they denote is
``i^{|x & z|} X^x Z^z`` so that a qubit with both bits set carries a ``Y``.
Qubit ``q`` of an ``n``-qubit string lives in bit ``n - 1 - q`` of each mask,
which makes the masks act directly on big-endian computational-basis indices
(qubit 0 is the leftmost character of a label and the most significant bit of
a state index).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np
import scipy.sparse as sp

from .errors import InputError

#: Coefficients below this modulus are treated as exact zeros after arithmetic.
ZERO_FLOOR = 1e-15
#: Default user-facing truncation threshold (Hartree).
DEFAULT_TRUNCATION = 1e-8
#: Largest register for which dense matrices are built.
DENSE_QUBIT_LIMIT = 14

_PHASES = (1, 1j, -1, -1j)


class BodyClass(enum.IntEnum):
    """Provenance tag of a qubit-Hamiltonian term."""

    DIAGONAL = 0
    ONE_BODY = 1
    TWO_BODY = 2
    THREE_BODY = 3
    MIXED = 4

    @classmethod
    def parse(cls, value: "BodyClass | str | int") -> "BodyClass":
        if isinstance(value, cls):
            return value
        if isinstance(value, int):
            return cls(value)
        key = str(value).strip().lower().replace("_", "-")
        aliases = {
            "diagonal": cls.DIAGONAL,
            "1-body": cls.ONE_BODY,
            "one-body": cls.ONE_BODY,
            "2-body": cls.TWO_BODY,
            "two-body": cls.TWO_BODY,
            "3-body": cls.THREE_BODY,
            "three-body": cls.THREE_BODY,
            "mixed": cls.MIXED,
        }
        try:
            return aliases[key]
        except KeyError:
            raise InputError(f"unknown body class {value!r}") from None

    @property
    def label(self) -> str:
        return {0: "diagonal", 1: "1-body", 2: "2-body", 3: "3-body", 4: "mixed"}[int(self)]


def _popcount(v: int) -> int:
    return v.bit_count()


def label_to_masks(label: str) -> tuple[int, int]:
    """Convert an axes string such as ``"IXYZ"`` to ``(x, z)`` masks."""
    x = z = 0
    for ch in label:
        x <<= 1
        z <<= 1
        if ch == "X":
            x |= 1
        elif ch == "Y":
            x |= 1
            z |= 1
        elif ch == "Z":
            z |= 1
        elif ch != "I":
            raise InputError(f"invalid Pauli axis {ch!r} in {label!r}")
    return x, z


def masks_to_label(x: int, z: int, n_qubits: int) -> str:
    chars = []
    for q in range(n_qubits):
        bit = 1 << (n_qubits - 1 - q)
        chars.append("IZXY"[(bool(x & bit) << 1) | bool(z & bit)])
    return "".join(chars)


def multiply_masks(x1: int, z1: int, x2: int, z2: int) -> tuple[complex, int, int]:
    """Product of two unit Pauli strings as ``(phase, x, z)``."""
    x3, z3 = x1 ^ x2, z1 ^ z2
    k = _popcount(x1 & z1) + _popcount(x2 & z2) + 2 * _popcount(z1 & x2) - _popcount(x3 & z3)
    return _PHASES[k % 4], x3, z3


@dataclass(frozen=True)
class PauliTerm:
    """A single weighted Pauli string."""

    coeff: complex
    x: int
    z: int
    n_qubits: int

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> "PauliTerm":
        x, z = label_to_masks(label)
        return cls(complex(coeff), x, z, len(label))

    @property
    def label(self) -> str:
        return masks_to_label(self.x, self.z, self.n_qubits)

    @property
    def key(self) -> tuple[int, int]:
        return (self.x, self.z)

    @property
    def is_diagonal(self) -> bool:
        return self.x == 0

    def __mul__(self, other: "PauliTerm") -> "PauliTerm":
        return multiply(self, other)

    def __repr__(self) -> str:
        return f"PauliTerm({self.coeff!r}, {self.label!r})"


def multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Multiply two Pauli terms, folding the group phase into the coefficient."""
    if a.n_qubits != b.n_qubits:
        raise InputError(f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}")
    phase, x, z = multiply_masks(a.x, a.z, b.x, b.z)
    return PauliTerm(a.coeff * b.coeff * phase, x, z, a.n_qubits)


def _merge_tag(t1: int | None, t2: int | None) -> int:
    if t1 is None:
        return t2 if t2 is not None else BodyClass.MIXED
    if t2 is None or t1 == t2:
        return t1
    return BodyClass.MIXED


class PauliSum:
    """Weighted sum of Pauli strings on a fixed register.

    Instances are treated as immutable values; every operation returns a new
    sum. ``tags`` optionally maps each string to a :class:`BodyClass`.
    """

    __slots__ = ("n_qubits", "_terms", "_tags")

    def __init__(
        self,
        n_qubits: int,
        terms: Mapping[tuple[int, int], complex] | None = None,
        tags: Mapping[tuple[int, int], int] | None = None,
        *,
        floor: float = ZERO_FLOOR,
    ):
        if n_qubits < 0:
            raise InputError("n_qubits must be non-negative")
        self.n_qubits = int(n_qubits)
        limit = 1 << self.n_qubits
        clean: dict[tuple[int, int], complex] = {}
        for key, c in (terms or {}).items():
            x, z = key
            if x >= limit or z >= limit or x < 0 or z < 0:
                raise InputError(f"Pauli mask {key} exceeds {n_qubits} qubits")
            c = complex(c)
            if abs(c) >= floor:
                clean[(x, z)] = c
        self._terms = clean
        if tags is None:
            self._tags = None
        else:
            self._tags = {k: int(tags.get(k, BodyClass.MIXED)) for k in clean}

    # construction ---------------------------------------------------------
    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {(0, 0): coeff})

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> "PauliSum":
        return cls(len(label), {label_to_masks(label): coeff})

    @classmethod
    def from_list(cls, items: Iterable[tuple[str, complex]], n_qubits: int | None = None) -> "PauliSum":
        acc: dict[tuple[int, int], complex] = {}
        n = n_qubits
        for label, c in items:
            if n is None:
                n = len(label)
            elif len(label) != n:
                raise InputError(f"label {label!r} does not have {n} qubits")
            key = label_to_masks(label)
            acc[key] = acc.get(key, 0.0) + complex(c)
        if n is None:
            raise InputError("cannot infer qubit count from an empty list")
        return cls(n, acc)

    @classmethod
    def from_terms(cls, terms: Iterable[PauliTerm], n_qubits: int) -> "PauliSum":
        acc: dict[tuple[int, int], complex] = {}
        for t in terms:
            if t.n_qubits != n_qubits:
                raise InputError("term qubit count mismatch")
            acc[t.key] = acc.get(t.key, 0.0) + t.coeff
        return cls(n_qubits, acc)

    @classmethod
    def from_dense(cls, matrix: np.ndarray, *, floor: float = ZERO_FLOOR) -> "PauliSum":
        """Decompose a ``2^n x 2^n`` matrix into Pauli strings.

        Uses one fast Walsh-Hadamard transform per X-mask, so the cost is
        ``O(4^n n)``.
        """
        m = np.asarray(matrix, dtype=complex)
        d = m.shape[0]
        if m.shape != (d, d) or d & (d - 1):
            raise InputError("matrix must be square with a power-of-two dimension")
        n = d.bit_length() - 1
        idx = np.arange(d)
        terms: dict[tuple[int, int], complex] = {}
        for x in range(d):
            v = m[idx ^ x, idx]
            if not np.any(np.abs(v) >= floor):
                continue
            w = _fwht(v) / d
            for z in np.nonzero(np.abs(w) >= floor)[0]:
                z = int(z)
                phase = _PHASES[(-_popcount(x & z)) % 4]
                terms[(x, z)] = w[z] * phase
        return cls(n, terms, floor=floor)

    # container protocol ---------------------------------------------------
    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[PauliTerm]:
        for (x, z), c in self._terms.items():
            yield PauliTerm(c, x, z, self.n_qubits)

    def __contains__(self, label: str) -> bool:
        return label_to_masks(label) in self._terms

    def items(self):
        return self._terms.items()

    @property
    def terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._terms)

    @property
    def tags(self) -> dict[tuple[int, int], int] | None:
        return None if self._tags is None else dict(self._tags)

    @property
    def is_tagged(self) -> bool:
        return self._tags is not None

    def coeff(self, label: str) -> complex:
        return self._terms.get(label_to_masks(label), 0.0)

    def tag(self, label: str) -> BodyClass | None:
        if self._tags is None:
            return None
        return BodyClass(self._tags[label_to_masks(label)])

    def to_dict(self) -> dict[str, complex]:
        return {masks_to_label(x, z, self.n_qubits): c for (x, z), c in self._terms.items()}

    def sorted_items(self) -> list[tuple[str, complex]]:
        return sorted(self.to_dict().items())

    def with_tags(self, tag: int | Mapping[tuple[int, int], int]) -> "PauliSum":
        if isinstance(tag, Mapping):
            return PauliSum(self.n_qubits, self._terms, tag)
        return PauliSum(self.n_qubits, self._terms, {k: int(tag) for k in self._terms})

    def untagged(self) -> "PauliSum":
        return PauliSum(self.n_qubits, self._terms)

    # arithmetic -----------------------------------------------------------
    def _check(self, other: "PauliSum") -> None:
        if not isinstance(other, PauliSum):
            raise TypeError(f"expected PauliSum, got {type(other).__name__}")
        if other.n_qubits != self.n_qubits:
            raise InputError(f"qubit count mismatch: {self.n_qubits} vs {other.n_qubits}")

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return add(self, other)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return add(self, -other)

    def __neg__(self) -> "PauliSum":
        return self.scale(-1.0)

    def scale(self, factor: complex) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: c * factor for k, c in self._terms.items()}, self._tags)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            return self.compose(other)
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(complex(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(complex(other))
        return NotImplemented

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        return self.compose(other)

    def compose(self, other: "PauliSum") -> "PauliSum":
        """Operator product ``self * other`` (``self`` acts last)."""
        self._check(other)
        acc: dict[tuple[int, int], complex] = {}
        for (x1, z1), c1 in self._terms.items():
            a1 = _popcount(x1 & z1)
            for (x2, z2), c2 in other._terms.items():
                x3, z3 = x1 ^ x2, z1 ^ z2
                k = a1 + _popcount(x2 & z2) + 2 * _popcount(z1 & x2) - _popcount(x3 & z3)
                key = (x3, z3)
                acc[key] = acc.get(key, 0.0) + c1 * c2 * _PHASES[k % 4]
        return PauliSum(self.n_qubits, acc)

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: c.conjugate() for k, c in self._terms.items()}, self._tags)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def allclose(self, other: "PauliSum", atol: float = 1e-12) -> bool:
        self._check(other)
        keys = set(self._terms) | set(other._terms)
        return all(abs(self._terms.get(k, 0) - other._terms.get(k, 0)) <= atol for k in keys)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    __hash__ = None

    def truncate(self, epsilon: float = DEFAULT_TRUNCATION) -> tuple["PauliSum", float]:
        """Drop terms with ``|c| < epsilon``; also return the removed 1-norm."""
        if epsilon < 0:
            raise InputError("epsilon must be non-negative")
        kept = {k: c for k, c in self._terms.items() if abs(c) >= epsilon}
        removed = sum(abs(c) for k, c in self._terms.items() if k not in kept)
        tags = None if self._tags is None else {k: self._tags[k] for k in kept}
        return PauliSum(self.n_qubits, kept, tags), float(removed)

    def one_norm(self, body_class: BodyClass | str | None = None, *, normalized: bool = False) -> float:
        return one_norm(self, body_class, normalized=normalized)

    def hermitian_split(self) -> tuple["PauliSum", "PauliSum"]:
        return hermitian_split(self)

    # matrix views ---------------------------------------------------------
    def to_dense(self, max_qubits: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
        return to_dense(self, max_qubits)

    def to_sparse(self) -> sp.csr_matrix:
        d = 1 << self.n_qubits
        idx = np.arange(d)
        rows, cols, vals = [], [], []
        for (x, z), c in self._terms.items():
            rows.append(idx ^ x)
            cols.append(idx)
            vals.append(c * _phase_vector(x, z, idx))
        if not vals:
            return sp.csr_matrix((d, d), dtype=complex)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(d, d)
        )

    def apply(self, state: np.ndarray) -> np.ndarray:
        """Matrix-free product ``H @ state``."""
        state = np.asarray(state, dtype=complex)
        d = 1 << self.n_qubits
        if state.shape[0] != d:
            raise InputError(f"state of length {state.shape[0]} does not match {self.n_qubits} qubits")
        idx = np.arange(d)
        out = np.zeros_like(state)
        for x, zs in self._grouped_by_x().items():
            diag = np.zeros(d, dtype=complex)
            for z, c in zs:
                diag += c * _phase_vector(x, z, idx)
            if state.ndim == 1:
                out += (diag * state)[idx ^ x]
            else:
                out += (diag[:, None] * state)[idx ^ x]
        return out

    def expectation(self, state: np.ndarray) -> complex:
        state = np.asarray(state, dtype=complex)
        return complex(np.vdot(state, self.apply(state)))

    def _grouped_by_x(self) -> dict[int, list[tuple[int, complex]]]:
        groups: dict[int, list[tuple[int, complex]]] = {}
        for (x, z), c in self._terms.items():
            groups.setdefault(x, []).append((z, c))
        return groups

    # text I/O -------------------------------------------------------------
    def to_text(self) -> str:
        lines = [f"qubits={self.n_qubits} hermitian={str(self.is_hermitian()).lower()}"]
        for label, c in self.sorted_items():
            lines.append(f"{c.real!r} {c.imag!r} {label}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines:
            raise InputError("empty Pauli text")
        header = dict(tok.split("=", 1) for tok in lines[0].split())
        try:
            n = int(header["qubits"])
        except (KeyError, ValueError):
            raise InputError(f"bad Pauli header {lines[0]!r}") from None
        acc: dict[tuple[int, int], complex] = {}
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 3 or len(parts[2]) != n:
                raise InputError(f"bad Pauli line {ln!r}")
            key = label_to_masks(parts[2])
            acc[key] = acc.get(key, 0.0) + complex(float(parts[0]), float(parts[1]))
        out = cls(n, acc)
        if header.get("hermitian", "false").lower() == "true" and not out.is_hermitian():
            raise InputError("sum declared hermitian has complex coefficients")
        return out

    def __repr__(self) -> str:
        body = ", ".join(f"{lab}: {c:.6g}" for lab, c in self.sorted_items()[:8])
        more = "" if len(self) <= 8 else f", ... ({len(self)} terms)"
        return f"PauliSum(n_qubits={self.n_qubits}, {{{body}{more}}})"


def _phase_vector(x: int, z: int, idx: np.ndarray) -> np.ndarray:
    """Column phases of the string ``(x, z)``: ``P|i> = phase[i] |i ^ x>``."""
    signs = 1 - 2 * (np.bitwise_count(idx & z) & 1).astype(np.int8)
    return _PHASES[_popcount(x & z) % 4] * signs


def _fwht(v: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform, ``w[z] = sum_i (-1)^{|z&i|} v[i]``."""
    a = np.array(v, dtype=complex)
    h = 1
    d = a.shape[0]
    while h < d:
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1).reshape(d)
        h *= 2
    return a


def add(a: PauliSum, b: PauliSum) -> PauliSum:
    """Coefficient-wise merge; exact-zero results are removed."""
    a._check(b)
    acc = dict(a._terms)
    for k, c in b._terms.items():
        acc[k] = acc.get(k, 0.0) + c
    tags = None
    if a._tags is not None and b._tags is not None:
        tags = dict(a._tags)
        for k, t in b._tags.items():
            tags[k] = _merge_tag(tags.get(k), t)
    return PauliSum(a.n_qubits, acc, tags)


def sum_paulis(items: Iterable[PauliSum], n_qubits: int) -> PauliSum:
    """Add many sums at once (cheaper than repeated ``+``)."""
    acc: dict[tuple[int, int], complex] = {}
    tags: dict[tuple[int, int], int] | None = {}
    for s in items:
        if s.n_qubits != n_qubits:
            raise InputError("qubit count mismatch")
        for k, c in s._terms.items():
            acc[k] = acc.get(k, 0.0) + c
        if tags is not None and s._tags is not None:
            for k, t in s._tags.items():
                tags[k] = _merge_tag(tags.get(k), t)
        elif s._terms:
            tags = None
    return PauliSum(n_qubits, acc, tags)


def truncate(h: PauliSum, epsilon: float = DEFAULT_TRUNCATION) -> tuple[PauliSum, float]:
    return h.truncate(epsilon)


def one_norm(h: PauliSum, body_class: BodyClass | str | None = None, *, normalized: bool = False) -> float:
    """Sum of coefficient moduli, optionally restricted to one body class.

    Raises:
        InputError: a class filter was requested on an untagged sum.
    """
    total = float(sum(abs(c) for c in h._terms.values()))
    if body_class is None:
        value = total
    else:
        if h._tags is None:
            raise InputError("body-class filter requested on an untagged PauliSum")
        cls = BodyClass.parse(body_class)
        value = float(sum(abs(c) for k, c in h._terms.items() if h._tags[k] == cls))
    if normalized:
        return value / total if total > 0 else 0.0
    return value


def one_norm_breakdown(h: PauliSum) -> dict[str, float]:
    """1-norm per body class plus the total and normalized fractions."""
    total = one_norm(h)
    out = {"total": total}
    for cls in BodyClass:
        v = one_norm(h, cls)
        out[cls.label] = v
        out[f"{cls.label}_fraction"] = v / total if total else 0.0
    return out


def hermitian_split(h: PauliSum) -> tuple[PauliSum, PauliSum]:
    """Return ``(H + H^dagger, H - H^dagger)``; their mean reconstructs ``H``."""
    plus = {k: complex(2 * c.real, 0.0) for k, c in h._terms.items()}
    minus = {k: complex(0.0, 2 * c.imag) for k, c in h._terms.items()}
    return PauliSum(h.n_qubits, plus, h._tags), PauliSum(h.n_qubits, minus, h._tags)


def to_dense(h: PauliSum, max_qubits: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of a Pauli sum."""
    if h.n_qubits > max_qubits:
        raise InputError(f"{h.n_qubits} qubits exceeds the dense limit of {max_qubits}")
    d = 1 << h.n_qubits
    idx = np.arange(d)
    m = np.zeros((d, d), dtype=complex)
    for (x, z), c in h._terms.items():
        m[idx ^ x, idx] += c * _phase_vector(x, z, idx)
    return m
