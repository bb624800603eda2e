"""Run configuration and the end-to-end pipelines behind the command line."""

from __future__ import annotations

import hashlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib.resources import files
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import __version__
from .circuit import (
    Circuit,
    NoiseModel,
    build_hea,
    build_uccsd,
    circuit_stats,
    exact_measured_expectation,
    fold,
    sample_expectation,
    simulate,
)
from .errors import InputError
from .fermion import EncodedHamiltonian, FermionHamiltonian, encode, load_integrals, write_integrals
from .mp2no import mp2_natural_orbitals, truncate_and_transform
from .mitigation import MitigationRecord, readout_correct, rem, zne
from .oracle import dense_eig, fci_energy, ground_hf_weight, hf_weight
from .pauli import one_norm_breakdown
from .spectro import CONSTANTS_VERSION, PECPoint, analyze, reduced_mass, write_pec
from .varqite import EvolutionConfig, evolve

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

PKG_PREFIX = "pkg:"


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class AnsatzBlock(_Block):
    kind: Literal["uccsd", "hea"] = "uccsd"
    layers: int = Field(1, ge=0)
    hf_init: bool = True


class EvolutionBlock(_Block):
    d_tau: float = Field(0.05, gt=0)
    fd_step: float = Field(1e-3, gt=0)
    max_steps: int = Field(400, ge=0)
    residual_tolerance: float = Field(1e-6, gt=0)
    persistence: int = Field(5, ge=1)
    gradient_mode: Literal["finite-difference", "parameter-shift", "hadamard-test"] = "finite-difference"
    lstsq_cutoff: float = Field(1e-8, ge=0)
    shots: Optional[int] = Field(None, ge=1)


class SamplingBlock(_Block):
    shots: int = Field(0, ge=0, description="0 means exact expectation values")


class NoiseBlock(_Block):
    enabled: bool = False
    p1: float = Field(1e-3, ge=0, le=1)
    p2: float = Field(1e-2, ge=0, le=1)
    readout_flip: float = Field(0.0, ge=0, lt=0.5)


class MitigationBlock(_Block):
    readout: bool = False
    zne: bool = False
    zne_scales: list[int] = [1, 3, 5]
    zne_order: int = Field(1, ge=0)
    rem: bool = False

    @field_validator("zne_scales")
    @classmethod
    def _odd(cls, v):
        if any(s < 1 or s % 2 == 0 for s in v):
            raise ValueError("ZNE scales must be odd positive integers")
        return v


class ScanPoint(_Block):
    r: float = Field(gt=0)
    integrals: str


class ScanBlock(_Block):
    bond_lengths: list[float] = []
    integrals_pattern: Optional[str] = None
    points: list[ScanPoint] = []
    atoms: Optional[tuple[str, str]] = None
    reduced_mass: Optional[float] = Field(None, gt=0)
    asymptote: Union[float, Literal["plateau"]] = "plateau"
    window: int = Field(7, ge=5)

    def geometry(self) -> list[ScanPoint]:
        pts = list(self.points)
        if self.bond_lengths:
            if not self.integrals_pattern:
                raise InputError("scan.bond_lengths needs scan.integrals_pattern")
            pts += [ScanPoint(r=r, integrals=self.integrals_pattern.format(r=r)) for r in self.bond_lengths]
        return pts

    def mu(self) -> float:
        if self.reduced_mass is not None:
            return self.reduced_mass
        if self.atoms is None:
            raise InputError("scan needs either atoms or reduced_mass")
        try:
            return reduced_mass(*self.atoms)
        except KeyError as exc:
            raise InputError(f"no isotope mass for {exc}") from None


class RunConfig(_Block):
    """Validated settings of one run; unknown keys are rejected."""

    integrals: Optional[str] = None
    encoding: Literal["jordan-wigner", "parity", "parity-reduced"] = "parity-reduced"
    truncation: float = Field(1e-8, ge=0)
    thresholds: list[float] = [1e-8]
    include_three_body: bool = True
    mode: Literal["exact", "varqite", "both"] = "exact"
    seed: int = 0
    threads: int = Field(1, ge=1)
    output_dir: str = "tcqite-out"
    ansatz: AnsatzBlock = AnsatzBlock()
    evolution: EvolutionBlock = EvolutionBlock()
    sampling: SamplingBlock = SamplingBlock()
    noise: NoiseBlock = NoiseBlock()
    mitigation: MitigationBlock = MitigationBlock()
    scan: ScanBlock = ScanBlock()

    @model_validator(mode="after")
    def _mitigation_needs_noise(self):
        m = self.mitigation
        if (m.readout or m.zne or m.rem) and not self.noise.enabled:
            raise ValueError("mitigation requested but the noise block is disabled")
        return self

    def evolution_config(self) -> EvolutionConfig:
        return EvolutionConfig(**self.evolution.model_dump(), workers=self.threads, seed=self.seed)

    def noise_model(self, n_qubits: int) -> NoiseModel | None:
        if not self.noise.enabled:
            return None
        readout = NoiseModel.symmetric_readout(n_qubits, self.noise.readout_flip) if self.noise.readout_flip else None
        return NoiseModel(self.noise.p1, self.noise.p2, readout)


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    data: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise InputError(f"invalid TOML in {path}: {exc}") from exc
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        node = data
        *parents, leaf = key.split(".")
        for p in parents:
            node = node.setdefault(p, {})
        node[leaf] = value
    return RunConfig.model_validate(data)


def resolve_path(spec: str) -> Path:
    """Resolve ``pkg:<name>`` to the bundled data directory, else a filesystem path."""
    if spec.startswith(PKG_PREFIX):
        return Path(str(files("tcqite") / "data" / spec[len(PKG_PREFIX):]))
    return Path(spec)


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def manifest(cfg: RunConfig, command: str, fixtures: list[Path]) -> dict:
    blob = json.dumps(cfg.model_dump(mode="json"), sort_keys=True).encode()
    return {
        "tool": "tcqite",
        "version": __version__,
        "command": command,
        "config": cfg.model_dump(mode="json"),
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "fixtures": {str(p): sha256_file(p) for p in fixtures},
        "constants_version": CONSTANTS_VERSION,
        "seed": cfg.seed,
    }


def write_json(obj, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"not serializable: {type(o)}")


def _cplx(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


# ---------------------------------------------------------------------------
# pipelines


def load_hamiltonian(cfg: RunConfig) -> tuple[FermionHamiltonian, Path]:
    if not cfg.integrals:
        raise InputError("no integrals file configured")
    path = resolve_path(cfg.integrals)
    return load_integrals(path), path


def build_ansatz(cfg: RunConfig, enc: EncodedHamiltonian) -> Circuit:
    if cfg.ansatz.kind == "uccsd":
        return build_uccsd(enc.n_spatial, enc.n_electrons, enc.n_alpha, enc.encoding, include_hf=cfg.ansatz.hf_init)
    return build_hea(enc.n_qubits, cfg.ansatz.layers, enc.hf_bits if cfg.ansatz.hf_init else None)


def map_report(h: FermionHamiltonian, cfg: RunConfig) -> dict:
    """Pauli counts per threshold, 1-norm breakdown and ansatz resources."""
    full = encode(h, cfg.encoding, epsilon=0.0, include_three_body=cfg.include_three_body)
    counts = {}
    for eps in sorted(set(cfg.thresholds) | {cfg.truncation}):
        counts[f"{eps:g}"] = len(full.pauli.truncate(eps)[0])
    enc = encode(h, cfg.encoding, epsilon=cfg.truncation, include_three_body=cfg.include_three_body)
    norms = one_norm_breakdown(enc.pauli)
    circ = build_ansatz(cfg, enc)
    return {
        "n_spatial": h.n_spatial,
        "n_electrons": h.n_electrons,
        "hermitian": h.hermitian,
        "encoding": enc.encoding,
        "n_qubits": enc.n_qubits,
        "paulis": counts,
        "n_paulis": len(enc.pauli),
        "truncation": cfg.truncation,
        "removed_norm": enc.removed_norm,
        "one_norm": norms,
        "ansatz": cfg.ansatz.kind,
        "circuit": circuit_stats(circ).as_dict(),
    }


def _measured_energy(circ, theta, observable, cfg: RunConfig, noise, rng, corrector=None, scale: int = 1) -> float:
    c = fold(circ, scale) if scale != 1 else circ
    if cfg.sampling.shots:
        return sample_expectation(c, theta, observable, cfg.sampling.shots, noise, rng, corrector=corrector).mean
    return exact_measured_expectation(c, theta, observable, noise, corrector=corrector, rng=rng)


def noisy_energies(circ: Circuit, theta, enc: EncodedHamiltonian, cfg: RunConfig, noiseless: float) -> dict:
    """Raw and mitigated energies of the prepared state under the configured noise."""
    noise = cfg.noise_model(circ.n_qubits)
    rng = np.random.default_rng(cfg.seed)
    # the measured observable is the Hermitian part; Re<H> = <H+>/2
    observable, _ = enc.pauli.hermitian_split()
    observable = observable.scale(0.5).untagged()
    corrector = None
    if cfg.mitigation.readout and noise.readout is not None:
        confusion = noise.readout
        corrector = lambda p: readout_correct(p, confusion)  # noqa: E731
    raw = _measured_energy(circ, theta, observable, cfg, noise, rng)
    out = {"raw": raw, "noiseless": noiseless, "records": []}

    def record(method: str, value: float, meta: dict) -> None:
        rec = MitigationRecord(raw, value, method, meta)
        d = rec.as_dict()
        d["closer_than_raw"] = bool(abs(value - noiseless) < abs(raw - noiseless))
        out["records"].append(d)

    base = raw
    method_prefix = ""
    meta_base: dict = {}
    if corrector is not None:
        base = _measured_energy(circ, theta, observable, cfg, noise, rng, corrector)
        meta_base = {"confusion": [m.tolist() for m in noise.readout]}
        record("readout", base, meta_base)
        method_prefix = "readout+"
    if cfg.mitigation.zne:
        executor = lambda s: _measured_energy(circ, theta, observable, cfg, noise, rng, corrector, s)  # noqa: E731
        value, meta = zne(executor, cfg.mitigation.zne_scales, cfg.mitigation.zne_order)
        record(method_prefix + "zne", value, {**meta_base, **meta})
    if cfg.mitigation.rem:
        ref_theta = np.zeros(circ.n_parameters)
        ref_noisy = _measured_energy(circ, ref_theta, observable, cfg, noise, rng, corrector)
        ref_exact = float(np.real(simulate(circ, ref_theta).conj() @ observable.apply(simulate(circ, ref_theta))))
        value = rem(base, ref_noisy, ref_exact)
        record(method_prefix + "rem", value, {**meta_base, "ref_noisy": ref_noisy, "ref_exact": ref_exact, "reference": "hf"})
    return out


def solve(h: FermionHamiltonian, cfg: RunConfig, out_dir: Path | None = None, tag: str = "") -> dict:
    """Exact and/or VarQITE ground state of ``h`` per ``cfg``."""
    enc = encode(h, cfg.encoding, epsilon=cfg.truncation, include_three_body=cfg.include_three_body)
    result: dict = {"encoding": enc.encoding, "n_qubits": enc.n_qubits, "n_paulis": len(enc.pauli)}
    hf = enc.hf_bits
    exact_e = None
    if cfg.mode in ("exact", "both"):
        sol = dense_eig(enc.pauli)
        _, vec = ground_hf_weight(sol, hf)
        weight = hf_weight(vec / np.linalg.norm(vec), hf)
        exact_e = sol.ground_energy
        result["exact"] = {"energy": _cplx(exact_e), "c_hf": weight}
    if cfg.mode in ("varqite", "both"):
        circ = build_ansatz(cfg, enc)
        traj_path = None
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            traj_path = out_dir / f"trajectory{tag}.csv"
        traj = evolve(circ, np.zeros(circ.n_parameters), enc.pauli, cfg.evolution_config(), csv_path=traj_path)
        state = simulate(circ, traj.theta)
        e = traj.final.energy
        vq = {
            "energy": _cplx(e),
            "steps": len(traj) - 1,
            "converged": traj.converged,
            "residual": traj.final.residual,
            "theta": traj.theta.tolist(),
            "c_hf": hf_weight(state / np.linalg.norm(state), hf),
            "circuit": circuit_stats(circ).as_dict(),
        }
        if traj_path is not None:
            vq["trajectory"] = str(traj_path)
        if exact_e is not None:
            vq["error_vs_exact"] = float(abs(e - exact_e))
        if cfg.noise.enabled:
            vq["noisy"] = noisy_energies(circ, traj.theta, enc, cfg, float(np.real(e)))
        result["varqite"] = vq
    return result


def headline_energy(result: dict) -> float:
    block = result.get("varqite") or result["exact"]
    return block["energy"]["re"]


def _scan_worker(args: tuple[str, str, float, str]) -> tuple[float, float]:
    cfg_json, integrals, r, out_dir = args
    cfg = RunConfig.model_validate_json(cfg_json)
    h = load_integrals(resolve_path(integrals))
    res = solve(h, cfg, Path(out_dir) if cfg.mode != "exact" else None, tag=f"_R{r:g}")
    return r, headline_energy(res)


def scan(cfg: RunConfig, out_dir: Path) -> dict:
    """Solve every geometry, write the curve, and fit spectroscopic constants.

    On a failing geometry the completed points are still written to
    ``pec.partial.csv`` before the error propagates.
    """
    geometry = cfg.scan.geometry()
    if not geometry:
        raise InputError("scan has no geometries")
    out_dir.mkdir(parents=True, exist_ok=True)
    source = "exact" if cfg.mode == "exact" else ("sampled" if cfg.sampling.shots else "varqite")
    cfg_json = cfg.model_dump_json()
    jobs = [(cfg_json, p.integrals, p.r, str(out_dir)) for p in geometry]
    done: list[PECPoint] = []
    try:
        if cfg.threads > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
                for r, e in pool.map(_scan_worker, jobs):
                    done.append(PECPoint(r, e, source))
        else:
            for job in jobs:
                r, e = _scan_worker(job)
                done.append(PECPoint(r, e, source))
    except Exception:
        write_pec(done, out_dir / "pec.partial.csv")
        raise
    write_pec(done, out_dir / "pec.csv")
    asym = None if cfg.scan.asymptote == "plateau" else float(cfg.scan.asymptote)
    consts = analyze(done, cfg.scan.mu(), cfg.scan.window, asym)
    out = consts.as_dict()
    out["asymptote_source"] = "plateau" if asym is None else "configured"
    write_json(out, out_dir / "constants.json")
    return out


def mp2no_report(h: FermionHamiltonian, keep: list[int], out_dir: Path | None) -> dict:
    """MP2 natural occupations and, per kept size ``k``, the truncated FCI energy."""
    basis = mp2_natural_orbitals(h)
    n = h.n_spatial
    reference = float(np.real(fci_energy(h)))
    out = {
        "n_spatial": n,
        "occupations_alpha": basis.occupations[:n].tolist(),
        "occupations_beta": basis.occupations[n:].tolist(),
        "trace": float(np.sum(basis.occupations)),
        "fci_energy": reference,
        "truncations": [],
    }
    for k in keep:
        hk = truncate_and_transform(h, basis, k)
        e = float(np.real(fci_energy(hk)))
        entry = {"k": k, "fci_energy": e, "error": e - reference}
        if out_dir is not None:
            path = out_dir / f"mp2no_k{k}.fcidump"
            out_dir.mkdir(parents=True, exist_ok=True)
            write_integrals(hk, path, comment=f"MP2 natural orbitals, {k} kept")
            entry["integrals"] = str(path)
        out["truncations"].append(entry)
    return out


def scan_fixtures(cfg: RunConfig) -> list[Path]:
    return [resolve_path(p.integrals) for p in cfg.scan.geometry()]


__all__ = [
    "RunConfig",
    "load_config",
    "resolve_path",
    "manifest",
    "map_report",
    "solve",
    "scan",
]
