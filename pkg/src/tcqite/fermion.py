"""Second-quantized Hamiltonians and fermion-to-qubit encodings.

Spin orbitals use block ordering: spatial orbital ``p`` with spin alpha is
spin orbital ``p``, with spin beta it is ``N + p``. Spin orbital ``k`` maps to
qubit ``k``.

Integral files are an extended FCIDUMP: the usual 4-index lines (``h2`` in
chemist notation, ``h1`` with ``k = l = 0`` and the scalar with all indices
zero), extra header keys ``HERMITIAN``, ``TBODY``, ``TBSIGN`` and ``COMPLEX``,
and an optional 6-index section introduced by an ``&TCDUMP`` line.
"""

from __future__ import annotations

import functools
import itertools
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError
from .pauli import DEFAULT_TRUNCATION, BodyClass, PauliSum, sum_paulis

ENCODINGS = ("jordan-wigner", "parity", "parity-reduced")
_ALIASES = {"jw": "jordan-wigner", "jordan_wigner": "jordan-wigner", "parity_reduced": "parity-reduced"}

SYMMETRY_TOL = 1e-12
COMPLETION_TOL = 1e-10


def canonical_encoding(name: str) -> str:
    key = _ALIASES.get(name.lower(), name.lower())
    if key not in ENCODINGS:
        raise InputError(f"unknown encoding {name!r}; expected one of {ENCODINGS}")
    return key


@dataclass
class FermionHamiltonian:
    """Spatial-orbital integrals of a (possibly transcorrelated) Hamiltonian.

    The operator is ``e0 + sum h1[p,q] a+_p a_q + 1/2 sum h2[p,q,r,s] a+_p a+_r a_s a_q
    + tb_sign/6 sum h3[p,q,r,s,t,u] a+_p a+_r a+_t a_u a_s a_q`` with spin summed
    over each (creation, annihilation) index pair.
    """

    n_spatial: int
    n_electrons: int
    n_alpha: int
    e0: complex
    h1: np.ndarray
    h2: np.ndarray
    h3: np.ndarray | None = None
    hermitian: bool = True
    tb_sign: int = -1

    def __post_init__(self):
        n = self.n_spatial
        self.h1 = np.asarray(self.h1, dtype=complex)
        self.h2 = np.asarray(self.h2, dtype=complex)
        if self.h1.shape != (n, n) or self.h2.shape != (n,) * 4:
            raise InputError("integral tensor shapes do not match n_spatial")
        if self.h3 is not None:
            self.h3 = np.asarray(self.h3, dtype=complex)
            if self.h3.shape != (n,) * 6:
                raise InputError("3-body tensor shape does not match n_spatial")
        if not 0 <= self.n_alpha <= min(self.n_electrons, n) or self.n_beta > n:
            raise InputError(f"invalid sector n_e={self.n_electrons}, n_alpha={self.n_alpha} for {n} orbitals")
        if self.tb_sign not in (-1, 1):
            raise InputError("tb_sign must be +1 or -1")

    @property
    def n_beta(self) -> int:
        return self.n_electrons - self.n_alpha

    @property
    def n_spin_orbitals(self) -> int:
        return 2 * self.n_spatial

    @property
    def sector(self) -> tuple[int, int]:
        return (self.n_electrons, self.n_alpha)

    def check_symmetry(self) -> None:
        """Raise if the tensors violate the symmetry implied by ``hermitian``."""
        h2 = self.h2
        if not np.allclose(h2, h2.transpose(2, 3, 0, 1), atol=SYMMETRY_TOL, rtol=0):
            raise InputError("h2 lacks particle-exchange symmetry (pq|rs) = (rs|pq)")
        if self.hermitian:
            if not np.allclose(self.h1, self.h1.conj().T, atol=SYMMETRY_TOL, rtol=0):
                raise InputError("h1 is not Hermitian")
            for perm in ((1, 0, 2, 3), (0, 1, 3, 2)):
                if not np.allclose(h2, h2.transpose(perm).conj(), atol=SYMMETRY_TOL, rtol=0):
                    raise InputError("h2 lacks 8-fold permutational symmetry")
        if self.h3 is not None:
            for perm in _pair_perms():
                if not np.allclose(self.h3, self.h3.transpose(perm), atol=SYMMETRY_TOL, rtol=0):
                    raise InputError("h3 is not symmetric under pair permutations")

    def copy(self, **changes) -> "FermionHamiltonian":
        return replace(self, **changes)


@functools.cache
def _pair_perms() -> tuple[tuple[int, ...], ...]:
    out = []
    for order in itertools.permutations(range(3)):
        out.append(tuple(i for pair in order for i in (2 * pair, 2 * pair + 1)))
    return tuple(out)


# ---------------------------------------------------------------------------
# integral file I/O

_HEADER_KEY = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=")


def _parse_header(text: str) -> dict[str, list[str]]:
    body = text.replace("&FCI", " ").replace("&fci", " ")
    keys = list(_HEADER_KEY.finditer(body))
    out: dict[str, list[str]] = {}
    for k, nxt in itertools.zip_longest(keys, keys[1:]):
        end = nxt.start() if nxt is not None else len(body)
        raw = body[k.end():end]
        vals = [v.strip() for v in raw.replace("\n", ",").split(",") if v.strip()]
        out[k.group(1).upper()] = vals
    return out


class _Filler:
    """Populates a tensor from symmetry-unique entries, detecting conflicts."""

    def __init__(self, shape: tuple[int, ...], kind: str):
        self.data = np.zeros(shape, dtype=complex)
        self.set = np.zeros(shape, dtype=bool)
        self.explicit: dict[tuple[int, ...], complex] = {}
        self.kind = kind

    def put(self, idx: tuple[int, ...], value: complex, images: Iterable[tuple[tuple[int, ...], bool]]) -> None:
        prev = self.explicit.get(idx)
        if prev is not None and abs(prev - value) > COMPLETION_TOL:
            raise InputError(f"duplicate conflicting {self.kind} entries at {tuple(i + 1 for i in idx)}")
        self.explicit[idx] = value
        for pos, conj in images:
            v = value.conjugate() if conj else value
            if self.set[pos] and abs(self.data[pos] - v) > COMPLETION_TOL:
                raise InputError(
                    f"symmetry-completion conflict for {self.kind} at {tuple(i + 1 for i in pos)}: "
                    f"{self.data[pos]} vs {v}"
                )
            self.data[pos] = v
            self.set[pos] = True


def _h2_images(p, q, r, s, hermitian):
    out = [((p, q, r, s), False), ((r, s, p, q), False)]
    if hermitian:
        out += [
            ((q, p, r, s), True), ((p, q, s, r), True), ((q, p, s, r), False),
            ((s, r, p, q), True), ((r, s, q, p), True), ((s, r, q, p), False),
        ]
    return out


def _h3_images(idx):
    return [(tuple(idx[i] for i in perm), False) for perm in _pair_perms()]


def load_integrals(path: str | Path) -> FermionHamiltonian:
    """Read an extended FCIDUMP file.

    Raises:
        InputError: malformed header or lines, out-of-range indices, duplicate
            conflicting entries, or symmetry-completion conflicts above 1e-10.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read integrals {path}: {exc}") from exc
    return parse_integrals(text, source=str(path))


def parse_integrals(text: str, source: str = "<string>") -> FermionHamiltonian:
    """Parse extended-FCIDUMP text. Lines starting with ``!`` are comments."""
    text = "\n".join(ln for ln in text.splitlines() if not ln.lstrip().startswith("!"))
    m = re.search(r"&END|^\s*/\s*$", text, flags=re.IGNORECASE | re.MULTILINE)
    if "&FCI" not in text.upper() or m is None:
        raise InputError(f"{source}: missing &FCI ... &END header")
    header = _parse_header(text[: m.start()])
    body = text[m.end():]

    def get(key, default=None, cast=int):
        if key not in header:
            if default is None:
                raise InputError(f"{source}: header lacks {key}")
            return default
        try:
            return cast(header[key][0])
        except (ValueError, IndexError):
            raise InputError(f"{source}: bad value for {key}") from None

    n = get("NORB")
    nelec = get("NELEC")
    ms2 = get("MS2", 0)
    hermitian = bool(get("HERMITIAN", 1))
    tbody = bool(get("TBODY", 0))
    tb_sign = get("TBSIGN", -1)
    is_complex = bool(get("COMPLEX", 0))
    if (nelec + ms2) % 2:
        raise InputError(f"{source}: NELEC and MS2 parities disagree")
    n_alpha = (nelec + ms2) // 2
    if hermitian and is_complex:
        raise InputError(f"{source}: hermitian files must be real (8-fold symmetry)")

    parts = re.split(r"^\s*&TCDUMP\s*$", body, flags=re.IGNORECASE | re.MULTILINE)
    if len(parts) > 2:
        raise InputError(f"{source}: more than one &TCDUMP section")
    if len(parts) == 2 and not tbody:
        raise InputError(f"{source}: &TCDUMP section present but TBODY=0")

    nval = 2 if is_complex else 1
    f1 = _Filler((n, n), "h1")
    f2 = _Filler((n,) * 4, "h2")
    e0 = 0.0 + 0.0j
    e0_seen = False

    def value_of(tokens):
        if is_complex:
            return complex(float(tokens[0]), float(tokens[1]))
        return complex(float(tokens[0]), 0.0)

    for lineno, line in enumerate(parts[0].splitlines(), 1):
        toks = line.split()
        if not toks:
            continue
        if len(toks) != nval + 4:
            raise InputError(f"{source}: malformed integral line {line.strip()!r}")
        try:
            v = value_of(toks)
            i, j, k, l = (int(t) for t in toks[nval:])
        except ValueError:
            raise InputError(f"{source}: malformed integral line {line.strip()!r}") from None
        if any(not 0 <= x <= n for x in (i, j, k, l)):
            raise InputError(f"{source}: orbital index out of range in {line.strip()!r}")
        if i == j == k == l == 0:
            if e0_seen and abs(e0 - v) > COMPLETION_TOL:
                raise InputError(f"{source}: duplicate conflicting scalar entries")
            e0, e0_seen = v, True
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise InputError(f"{source}: orbital index out of range in {line.strip()!r}")
            p, q = i - 1, j - 1
            images = [((p, q), False)]
            if hermitian:
                images.append(((q, p), True))
            f1.put((p, q), v, images)
        else:
            if 0 in (i, j, k, l):
                raise InputError(f"{source}: orbital index out of range in {line.strip()!r}")
            p, q, r, s = i - 1, j - 1, k - 1, l - 1
            f2.put((p, q, r, s), v, _h2_images(p, q, r, s, hermitian))

    h3 = None
    if tbody:
        f3 = _Filler((n,) * 6, "h3")
        section = parts[1] if len(parts) == 2 else ""
        for line in section.splitlines():
            toks = line.split()
            if not toks:
                continue
            if len(toks) != nval + 6:
                raise InputError(f"{source}: malformed 3-body line {line.strip()!r}")
            try:
                v = value_of(toks)
                idx = tuple(int(t) - 1 for t in toks[nval:])
            except ValueError:
                raise InputError(f"{source}: malformed 3-body line {line.strip()!r}") from None
            if any(not 0 <= x < n for x in idx):
                raise InputError(f"{source}: orbital index out of range in {line.strip()!r}")
            f3.put(idx, v, _h3_images(idx))
        h3 = f3.data

    return FermionHamiltonian(
        n_spatial=n,
        n_electrons=nelec,
        n_alpha=n_alpha,
        e0=e0,
        h1=f1.data,
        h2=f2.data,
        h3=h3,
        hermitian=hermitian,
        tb_sign=tb_sign,
    )


def _fmt(v: complex, is_complex: bool) -> str:
    re_, im_ = float(np.real(v)), float(np.imag(v))
    if is_complex:
        return f"{re_!r:>24} {im_!r:>24}"
    return f"{re_!r:>24}"


def format_integrals(h: FermionHamiltonian, comment: str | None = None) -> str:
    """Serialize ``h`` writing only symmetry-unique nonzero entries."""
    n = h.n_spatial
    tensors = [h.h1, h.h2, np.array([h.e0])] + ([h.h3] if h.h3 is not None else [])
    is_complex = any(np.any(np.asarray(t).imag != 0) for t in tensors)
    if h.hermitian and is_complex:
        raise InputError("hermitian Hamiltonians must have real integrals to be written")
    ms2 = h.n_alpha - h.n_beta
    lines = []
    if comment:
        lines += [f"! {ln}" for ln in comment.splitlines()]
    lines.append(f" &FCI NORB={n},NELEC={h.n_electrons},MS2={ms2},")
    lines.append(f"  ORBSYM={','.join(['1'] * n)},")
    lines.append(
        f"  ISYM=1,HERMITIAN={int(h.hermitian)},TBODY={int(h.h3 is not None)},"
        f"TBSIGN={h.tb_sign},COMPLEX={int(is_complex)},"
    )
    lines.append(" &END")
    seen: set[tuple[int, ...]] = set()
    for p, q, r, s in itertools.product(range(n), repeat=4):
        v = h.h2[p, q, r, s]
        if v == 0 or (p, q, r, s) in seen:
            continue
        seen.update(pos for pos, _ in _h2_images(p, q, r, s, h.hermitian))
        lines.append(f"{_fmt(v, is_complex)} {p + 1:3d} {q + 1:3d} {r + 1:3d} {s + 1:3d}")
    for p, q in itertools.product(range(n), repeat=2):
        v = h.h1[p, q]
        if v == 0 or (h.hermitian and p < q):
            continue
        lines.append(f"{_fmt(v, is_complex)} {p + 1:3d} {q + 1:3d}   0   0")
    lines.append(f"{_fmt(complex(h.e0), is_complex)}   0   0   0   0")
    if h.h3 is not None:
        lines.append("&TCDUMP")
        seen = set()
        for idx in itertools.product(range(n), repeat=6):
            v = h.h3[idx]
            if v == 0 or idx in seen:
                continue
            seen.update(pos for pos, _ in _h3_images(idx))
            lines.append(f"{_fmt(v, is_complex)} " + " ".join(f"{i + 1:3d}" for i in idx))
    return "\n".join(lines) + "\n"


def write_integrals(h: FermionHamiltonian, path: str | Path, comment: str | None = None) -> None:
    Path(path).write_text(format_integrals(h, comment))


# ---------------------------------------------------------------------------
# ladder operators


@functools.lru_cache(maxsize=4096)
def ladder_operator(index: int, dagger: bool, n_qubits: int, encoding: str = "jordan-wigner") -> PauliSum:
    """Pauli form of ``a_index`` (or its adjoint) on ``n_qubits`` modes.

    Jordan-Wigner: ``a_p = Z_0 ... Z_{p-1} (X_p + i Y_p) / 2``.
    Parity: ``a_p = X_{p+1} ... X_{n-1} (Z_{p-1} X_p + i Y_p) / 2``.
    """
    encoding = canonical_encoding(encoding)
    if not 0 <= index < n_qubits:
        raise InputError(f"spin-orbital index {index} outside register of {n_qubits}")
    bit = 1 << (n_qubits - 1 - index)
    sign = -1 if dagger else 1
    if encoding == "jordan-wigner":
        zs = 0
        for q in range(index):
            zs |= 1 << (n_qubits - 1 - q)
        # (bit, zs | bit) is the Z string times Y_p
        return PauliSum(n_qubits, {(bit, zs): 0.5, (bit, zs | bit): 0.5j * sign})
    if encoding == "parity":
        xs = 0
        for q in range(index + 1, n_qubits):
            xs |= 1 << (n_qubits - 1 - q)
        prev = 1 << (n_qubits - index) if index > 0 else 0
        return PauliSum(n_qubits, {(xs | bit, prev): 0.5, (xs | bit, bit): 0.5j * sign})
    raise InputError("ladder operators are defined for full registers; taper afterwards")


def map_ladder_product(
    ops: Sequence[tuple[int, bool]], n_qubits: int, encoding: str = "jordan-wigner"
) -> PauliSum:
    """Exact Pauli expansion of ``op_0 op_1 ... op_k`` (``op_0`` leftmost).

    Args:
        ops: ``(spin_orbital, dagger)`` pairs.
        n_qubits: register size (number of spin orbitals).
        encoding: ``"jordan-wigner"`` or ``"parity"``.
    """
    out = PauliSum.identity(n_qubits)
    for index, dagger in ops:
        out = out.compose(ladder_operator(index, bool(dagger), n_qubits, canonical_encoding(encoding)))
    return out


# ---------------------------------------------------------------------------
# encoding


@dataclass
class EncodedHamiltonian:
    """Qubit Hamiltonian together with the symmetry data needed downstream."""

    pauli: PauliSum
    encoding: str
    n_spatial: int
    n_electrons: int
    n_alpha: int
    removed_norm: float = 0.0
    orbital_order: str = field(default="block")

    @property
    def sector(self) -> tuple[int, int]:
        return (self.n_electrons, self.n_alpha)

    @property
    def n_qubits(self) -> int:
        return self.pauli.n_qubits

    @property
    def hf_bits(self) -> tuple[int, ...]:
        return hf_bitstring(self.n_electrons, self.n_alpha, self.n_spatial, self.encoding)


def _excitation_pairs(n: int, spins=(0, 1)):
    for sigma in spins:
        for p in range(n):
            for q in range(n):
                yield sigma, p, q


def _fermion_terms(h: FermionHamiltonian, n_qubits: int, encoding: str, include_three_body: bool):
    """Yield ``(PauliSum, BodyClass)`` contributions of each body order."""
    n = h.n_spatial

    @functools.cache
    def excitation(i: int, j: int) -> PauliSum:
        return map_ladder_product([(i, True), (j, False)], n_qubits, encoding)

    yield PauliSum.identity(n_qubits, h.e0), BodyClass.ONE_BODY

    one = []
    for sigma, p, q in _excitation_pairs(n):
        c = h.h1[p, q]
        if c != 0:
            one.append(excitation(p + sigma * n, q + sigma * n).scale(c))
    yield sum_paulis(one, n_qubits), BodyClass.ONE_BODY

    # 1/2 sum h2[pqrs] a+_p a+_r a_s a_q = 1/2 sum h2 (E_pq E_rs - delta_qr E_ps)
    two = []
    for p, q in itertools.product(range(n), repeat=2):
        w_parts = []
        for r, s in itertools.product(range(n), repeat=2):
            c = h.h2[p, q, r, s]
            if c != 0:
                for tau in (0, 1):
                    w_parts.append(excitation(r + tau * n, s + tau * n).scale(0.5 * c))
        if not w_parts:
            continue
        w = sum_paulis(w_parts, n_qubits)
        for sigma in (0, 1):
            two.append(excitation(p + sigma * n, q + sigma * n).compose(w))
    contraction = -0.5 * np.einsum("pqqs->ps", h.h2)
    for sigma, p, s in _excitation_pairs(n):
        c = contraction[p, s]
        if c != 0:
            two.append(excitation(p + sigma * n, s + sigma * n).scale(c))
    yield sum_paulis(two, n_qubits), BodyClass.TWO_BODY

    if h.h3 is None:
        return
    if not include_three_body:
        raise InputError("Hamiltonian carries 3-body integrals but 3-body encoding is disabled")
    yield _three_body(h, n_qubits, encoding), BodyClass.THREE_BODY


def _three_body(h: FermionHamiltonian, n_qubits: int, encoding: str) -> PauliSum:
    n = h.n_spatial
    pref = h.tb_sign / 6.0

    @functools.cache
    def triple(a: int, b: int, c: int, dagger: bool) -> PauliSum:
        return map_ladder_product([(a, dagger), (b, dagger), (c, dagger)], n_qubits, encoding)

    nz = np.argwhere(h.h3 != 0)
    by_creation: dict[tuple[int, int, int, int, int, int], list[PauliSum]] = {}
    spins = list(itertools.product((0, 1), repeat=3))
    for p, q, r, s, t, u in nz:
        c = h.h3[p, q, r, s, t, u] * pref
        for s1, s2, s3 in spins:
            P, R, T = p + s1 * n, r + s2 * n, t + s3 * n
            if len({P, R, T}) < 3:
                continue
            Q, S, U = q + s1 * n, s + s2 * n, u + s3 * n
            if len({Q, S, U}) < 3:
                continue
            by_creation.setdefault((P, R, T), []).append(triple(U, S, Q, False).scale(c))
    parts = []
    for (P, R, T), anns in by_creation.items():
        parts.append(triple(P, R, T, True).compose(sum_paulis(anns, n_qubits)))
    return sum_paulis(parts, n_qubits)


def encode(
    h: FermionHamiltonian,
    encoding: str = "jordan-wigner",
    epsilon: float = DEFAULT_TRUNCATION,
    include_three_body: bool = True,
) -> EncodedHamiltonian:
    """Map a fermionic Hamiltonian to a tagged qubit Hamiltonian.

    Terms are tagged with the body order they originate from; diagonal
    strings (only ``I``/``Z``) are tagged ``DIAGONAL`` and strings produced by
    several body orders become ``MIXED``. Coefficients below ``epsilon`` are
    dropped after assembly.
    """
    encoding = canonical_encoding(encoding)
    base = "parity" if encoding == "parity-reduced" else encoding
    n_qubits = h.n_spin_orbitals
    parts = [s.with_tags(cls) for s, cls in _fermion_terms(h, n_qubits, base, include_three_body)]
    total = sum_paulis(parts, n_qubits)
    enc = EncodedHamiltonian(_retag_diagonal(total), base, h.n_spatial, h.n_electrons, h.n_alpha)
    if encoding == "parity-reduced":
        enc = taper_two_qubits(enc)
    pauli, removed = enc.pauli.truncate(epsilon)
    enc.pauli = pauli
    enc.removed_norm = removed
    return enc


def _retag_diagonal(h: PauliSum) -> PauliSum:
    tags = h.tags or {}
    new = {k: (BodyClass.DIAGONAL if k[0] == 0 else tags.get(k, BodyClass.MIXED)) for k in h.terms}
    return h.with_tags(new)


def symmetry_qubits(n_spatial: int) -> tuple[int, int]:
    """Parity-basis qubits holding the alpha parity and the total parity."""
    return (n_spatial - 1, 2 * n_spatial - 1)


def taper_pauli(h: PauliSum, n_spatial: int, n_electrons: int, n_alpha: int) -> PauliSum:
    """Remove the two symmetry qubits of a parity-encoded operator."""
    n = h.n_qubits
    if n != 2 * n_spatial:
        raise InputError("tapering expects a full 2N-qubit parity register")
    sym = symmetry_qubits(n_spatial)
    eig = {sym[0]: (-1) ** n_alpha, sym[1]: (-1) ** n_electrons}
    keep = [q for q in range(n) if q not in sym]
    acc: dict[tuple[int, int], complex] = {}
    tags_in = h.tags
    tags: dict[tuple[int, int], int] | None = {} if tags_in is not None else None
    for (x, z), c in h.items():
        for q, val in eig.items():
            bit = 1 << (n - 1 - q)
            if x & bit:
                raise InputError(
                    "term anticommutes with a symmetry operator; check the orbital ordering and encoding"
                )
            if z & bit:
                c = c * val
        nx = nz = 0
        for q in keep:
            bit = 1 << (n - 1 - q)
            nx = (nx << 1) | bool(x & bit)
            nz = (nz << 1) | bool(z & bit)
        key = (nx, nz)
        acc[key] = acc.get(key, 0.0) + c
        if tags is not None:
            t = tags_in[(x, z)]
            prev = tags.get(key)
            tags[key] = t if prev is None or prev == t else BodyClass.MIXED
    return PauliSum(n - 2, acc, tags)


def taper_two_qubits(h: EncodedHamiltonian, sector: tuple[int, int] | None = None) -> EncodedHamiltonian:
    """Replace ``Z`` on the two parity-symmetry qubits by their sector eigenvalues.

    Raises:
        InputError: the input is not parity encoded, or a term anticommutes
            with one of the symmetry operators.
    """
    if h.encoding != "parity":
        raise InputError(f"two-qubit tapering needs a parity encoding, got {h.encoding!r}")
    n_e, n_alpha = sector if sector is not None else h.sector
    pauli = taper_pauli(h.pauli, h.n_spatial, n_e, n_alpha)
    return EncodedHamiltonian(pauli, "parity-reduced", h.n_spatial, n_e, n_alpha, h.removed_norm)


def sector_eigenvalues(n_electrons: int, n_alpha: int) -> tuple[int, int]:
    return ((-1) ** n_alpha, (-1) ** n_electrons)


def occupation_bitstring(n_electrons: int, n_alpha: int, n_spatial: int) -> tuple[int, ...]:
    n_beta = n_electrons - n_alpha
    if n_electrons > 2 * n_spatial or n_alpha > n_spatial or n_beta > n_spatial or n_beta < 0:
        raise InputError("electron count does not fit in the orbital space")
    alpha = [1] * n_alpha + [0] * (n_spatial - n_alpha)
    beta = [1] * n_beta + [0] * (n_spatial - n_beta)
    return tuple(alpha + beta)


def parity_transform(bits: Sequence[int]) -> tuple[int, ...]:
    """Cumulative parities ``p_k = sum_{j <= k} n_j mod 2``."""
    return tuple(int(v) for v in np.cumsum(bits) % 2)


def hf_bitstring(n_electrons: int, n_alpha: int, n_spatial: int, encoding: str = "jordan-wigner") -> tuple[int, ...]:
    """Hartree-Fock reference as a computational-basis bitstring."""
    encoding = canonical_encoding(encoding)
    bits = occupation_bitstring(n_electrons, n_alpha, n_spatial)
    if encoding == "jordan-wigner":
        return bits
    par = parity_transform(bits)
    if encoding == "parity":
        return par
    drop = symmetry_qubits(n_spatial)
    return tuple(b for i, b in enumerate(par) if i not in drop)


def bits_to_index(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def map_operator(
    terms: Iterable[tuple[complex, Sequence[tuple[int, bool]]]],
    n_spatial: int,
    encoding: str,
    sector: tuple[int, int] | None = None,
) -> PauliSum:
    """Encode a linear combination of ladder products under any supported encoding."""
    encoding = canonical_encoding(encoding)
    base = "parity" if encoding == "parity-reduced" else encoding
    n_qubits = 2 * n_spatial
    out = sum_paulis(
        (map_ladder_product(ops, n_qubits, base).scale(c) for c, ops in terms), n_qubits
    ).untagged()
    if encoding == "parity-reduced":
        if sector is None:
            raise InputError("parity-reduced mapping needs the (n_e, n_alpha) sector")
        out = taper_pauli(out, n_spatial, *sector)
    return out
