"""Error-mitigation post-processing: readout inversion, ZNE and REM."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .circuit import apply_readout
from .errors import InputError, NumericalError

DEFAULT_SCALES = (1, 3, 5)
SINGULAR_TOL = 1e-12


@dataclass
class MitigationRecord:
    """Raw and mitigated energies plus the inputs needed to reproduce the correction."""

    raw_energy: float
    mitigated_energy: float
    method: str
    metadata: dict = field(default_factory=dict)

    _REQUIRED = {
        "readout": ("confusion",),
        "zne": ("scales", "order", "values"),
        "rem": ("ref_noisy", "ref_exact"),
    }

    def __post_init__(self):
        parts = [p.strip().lower() for p in self.method.split("+")]
        for p in parts:
            if p not in self._REQUIRED:
                raise InputError(f"unknown mitigation method {p!r}")
            missing = [k for k in self._REQUIRED[p] if k not in self.metadata]
            if missing:
                raise InputError(f"{p} record lacks metadata {missing}")

    def as_dict(self) -> dict:
        def clean(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, (list, tuple)):
                return [clean(x) for x in v]
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        return {
            "method": self.method,
            "raw_energy": float(self.raw_energy),
            "mitigated_energy": float(self.mitigated_energy),
            "metadata": {k: clean(v) for k, v in self.metadata.items()},
        }


def invert_confusion(confusion: Sequence[np.ndarray]) -> list[np.ndarray]:
    out = []
    for m in confusion:
        m = np.asarray(m, dtype=float)
        if m.shape != (2, 2) or abs(np.linalg.det(m)) < SINGULAR_TOL:
            raise NumericalError("readout confusion matrix is singular")
        out.append(np.linalg.inv(m))
    return out


def readout_correct(distribution, confusion: Sequence[np.ndarray]):
    """Undo tensor-product readout noise on an outcome distribution.

    Args:
        distribution: probability (or count) vector of length ``2**n`` in
            big-endian qubit order, or a mapping from bitstrings to counts.
        confusion: per-qubit matrices ``M[i, j] = P(read i | true j)``.

    Returns:
        Corrected probabilities of the same kind as the input (vector or mapping),
        with negative entries clipped to zero and the total renormalized to one.
    """
    n = len(confusion)
    as_mapping = isinstance(distribution, Mapping)
    if as_mapping:
        vec = np.zeros(1 << n)
        for key, v in distribution.items():
            if len(key) != n:
                raise InputError(f"bitstring {key!r} does not have {n} bits")
            vec[int(key, 2)] += v
    else:
        vec = np.asarray(distribution, dtype=float)
        if vec.shape != (1 << n,):
            raise InputError(f"distribution needs {1 << n} entries")
    total = vec.sum()
    if total <= 0:
        raise InputError("empty distribution")
    fixed = apply_readout(vec / total, invert_confusion(confusion))
    fixed = np.clip(fixed, 0.0, None)
    fixed /= fixed.sum()
    if as_mapping:
        return {format(i, f"0{n}b"): float(p) for i, p in enumerate(fixed) if p > 0}
    return fixed


def zne(
    executor: Callable[[int], float] | Mapping[int, float],
    scales: Sequence[int] = DEFAULT_SCALES,
    order: int = 1,
    workers: int = 1,
) -> tuple[float, dict]:
    """Richardson/polynomial extrapolation of ``E(scale)`` to zero noise.

    Args:
        executor: callable mapping a noise scale to an energy, or a precomputed map.
        scales: noise scale factors (odd integers for global folding); must include 1.
        order: polynomial degree of the least-squares fit.
        workers: evaluate scales concurrently when > 1.

    Returns:
        ``(extrapolated_energy, metadata)``.

    Raises:
        InputError: fewer than ``order + 1`` distinct scales or scale 1 missing.
    """
    scales = [int(s) for s in scales]
    if len(set(scales)) != len(scales) or len(scales) < order + 1 or order < 0:
        raise InputError(f"need at least {order + 1} distinct scales for order {order}")
    if 1 not in scales:
        raise InputError("scale 1 (the unfolded circuit) must be included")
    if isinstance(executor, Mapping):
        values = [float(executor[s]) for s in scales]
    elif workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = [float(v) for v in pool.map(executor, scales)]
    else:
        values = [float(executor(s)) for s in scales]
    coeffs = np.polyfit(np.asarray(scales, dtype=float), np.asarray(values), order)
    return float(np.polyval(coeffs, 0.0)), {"scales": scales, "order": order, "values": values}


def rem(raw: float, ref_noisy: float, ref_exact: float) -> float:
    """Reference-state correction ``raw - (ref_noisy - ref_exact)``."""
    vals = np.array([raw, ref_noisy, ref_exact], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise InputError("REM inputs must be finite")
    return float(raw - (ref_noisy - ref_exact))
