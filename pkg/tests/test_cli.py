import json
import os
from pathlib import Path

import pytest

from conftest import data_file
from tcqite.cli import main
from tcqite.fermion import encode, load_integrals
from tcqite.oracle import dense_eig

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
# directory holding real transcorrelated integrals; those checks skip without it
TC_DIR = os.environ.get("TCQITE_TC_FIXTURES")


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def load(path):
    return json.loads(Path(path).read_text())


def test_map_h2(tmp_path, capsys):
    code, out, _ = run(["map", "--config", str(CONFIGS / "h2_sto6g_map.toml"), "--output-dir", str(tmp_path)], capsys)
    assert code == 0
    rep = load(tmp_path / "map.json")
    assert json.loads(out) == rep
    assert rep["n_paulis"] == 5
    assert rep["circuit"]["parameters"] == 3
    assert set(rep["one_norm"]) >= {"total", "diagonal", "1-body", "2-body"}
    assert rep["paulis"] == {"1e-08": 5, "1e-06": 5, "0.0001": 5}
    assert (tmp_path / "manifest.json").exists()


def test_map_hea_flags(tmp_path, capsys):
    code, _, _ = run(["map", "--integrals", "pkg:lih_sto3g_3no_1.5949.fcidump", "--ansatz", "hea", "--layers", "2",
                      "--output-dir", str(tmp_path)], capsys)
    assert code == 0
    circ = load(tmp_path / "map.json")["circuit"]
    assert (circ["parameters"], circ["cnots"]) == (12, 6)


def test_solve_exact_is_the_dense_oracle(tmp_path, capsys):
    code, _, _ = run(["solve", "--integrals", "pkg:h2_sto6g_0.74.fcidump", "--mode", "exact",
                      "--output-dir", str(tmp_path)], capsys)
    assert code == 0
    res = load(tmp_path / "result.json")
    ref = dense_eig(encode(load_integrals(data_file("h2_sto6g_0.74.fcidump")), "parity-reduced").pauli)
    assert res["exact"]["energy"]["re"] == ref.ground_energy.real
    assert 0.9 < res["exact"]["c_hf"] <= 1.0


def test_solve_varqite_matches_exact(tmp_path, capsys):
    code, _, _ = run(["solve", "--config", str(CONFIGS / "h2_sto6g_varqite.toml"), "--output-dir", str(tmp_path)], capsys)
    assert code == 0
    res = load(tmp_path / "result.json")
    vq = res["varqite"]
    assert vq["converged"] and vq["steps"] <= 400
    assert abs(vq["energy"]["re"] - res["exact"]["energy"]["re"]) < 1e-6
    rows = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert rows[0].startswith("step,tau,theta_0") and len(rows) == vq["steps"] + 2


def test_solve_noisy_mitigation_flags(tmp_path, capsys):
    code, _, _ = run(["solve", "--config", str(CONFIGS / "h2_sto6g_noisy.toml"), "--output-dir", str(tmp_path)], capsys)
    assert code == 0
    noisy = load(tmp_path / "result.json")["varqite"]["noisy"]
    methods = {r["method"]: r for r in noisy["records"]}
    assert set(methods) == {"readout", "readout+zne", "readout+rem"}
    assert methods["readout+rem"]["closer_than_raw"] is True
    assert methods["readout+zne"]["closer_than_raw"] is True
    assert methods["readout+rem"]["metadata"]["reference"] == "hf"


def test_scan_h2_exact(tmp_path, capsys):
    code, _, _ = run(["scan", "--config", str(CONFIGS / "h2_sto6g_scan.toml"), "--output-dir", str(tmp_path),
                      "--threads", "2"], capsys)
    assert code == 0
    consts = load(tmp_path / "constants.json")
    assert consts["r_e"] == pytest.approx(0.7330, abs=2e-3)
    assert consts["asymptote_source"] == "plateau"
    lines = (tmp_path / "pec.csv").read_text().splitlines()
    assert lines[0] == "R_angstrom,E_hartree,source" and len(lines) == 17
    man = load(tmp_path / "manifest.json")
    assert len(man["fixtures"]) == 16


def test_scan_single_geometry_is_numerical_failure(tmp_path, capsys):
    cfg = tmp_path / "one.toml"
    cfg.write_text('mode = "exact"\n[scan]\nbond_lengths = [0.74]\nintegrals_pattern = "pkg:h2_sto6g_{r:.2f}.fcidump"\n'
                   'atoms = ["H", "H"]\n')
    code, _, err = run(["scan", "--config", str(cfg), "--output-dir", str(tmp_path / "out")], capsys)
    assert code == 2
    assert "minimum at grid boundary" in err


def test_scan_failure_keeps_partial_results(tmp_path, capsys):
    cfg = tmp_path / "broken.toml"
    cfg.write_text('mode = "exact"\nthreads = 1\n[scan]\nbond_lengths = [0.74, 0.75, 0.99]\n'
                   'integrals_pattern = "pkg:h2_sto6g_{r:.2f}.fcidump"\natoms = ["H", "H"]\n')
    code, _, _ = run(["scan", "--config", str(cfg), "--output-dir", str(tmp_path / "out")], capsys)
    assert code == 1
    partial = (tmp_path / "out" / "pec.partial.csv").read_text().splitlines()
    assert len(partial) == 3


def test_mp2no_command(tmp_path, capsys):
    code, _, _ = run(["mp2no", "--integrals", "pkg:lih_sto3g_1.5949.fcidump", "-k", "3", "-k", "6",
                      "--output-dir", str(tmp_path)], capsys)
    assert code == 0
    rep = load(tmp_path / "mp2no.json")
    assert rep["trace"] == pytest.approx(4.0, abs=1e-10)
    assert [t["k"] for t in rep["truncations"]] == [3, 6]
    assert abs(rep["truncations"][1]["error"]) < 1e-8
    assert (tmp_path / "mp2no_k3.fcidump").exists()


def test_constants_command(capsys):
    code, out, _ = run(["constants"], capsys)
    assert code == 0
    assert json.loads(out)["version"] == "CODATA-2018"


@pytest.mark.parametrize(
    "args",
    [
        ["solve", "--integrals", "pkg:h2_sto6g_0.74.fcidump", "--truncation", "-1"],
        ["solve", "--integrals", "pkg:absent.fcidump"],
        ["solve", "--config", "/nonexistent/config.toml"],
        ["map", "--encoding", "bravyi-kitaev"],
        ["frobnicate"],
    ],
)
def test_input_failures_exit_1(args, tmp_path, capsys):
    code, _, _ = run(args + ["--output-dir", str(tmp_path)] if args[0] != "frobnicate" else args, capsys)
    assert code == 1


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('integrals = "pkg:h2_sto6g_0.74.fcidump"\nansatz_kind = "uccsd"\n')
    code, _, err = run(["solve", "--config", str(cfg)], capsys)
    assert code == 1 and "ansatz_kind" in err


def test_mitigation_without_noise_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('integrals = "pkg:h2_sto6g_0.74.fcidump"\n[mitigation]\nrem = true\n')
    assert run(["solve", "--config", str(cfg)], capsys)[0] == 1


def test_manifest_is_deterministic(tmp_path, capsys):
    outs = []
    for tag in ("a", "b"):
        d = tmp_path / tag
        assert run(["solve", "--config", str(CONFIGS / "h2_sto6g_varqite.toml"), "--output-dir", str(d)], capsys)[0] == 0
        outs.append(d)
    ma, mb = load(outs[0] / "manifest.json"), load(outs[1] / "manifest.json")
    ma["config"].pop("output_dir"), mb["config"].pop("output_dir")
    assert ma["config"] == mb["config"] and ma["fixtures"] == mb["fixtures"]
    assert ma["seed"] == 7 and ma["constants_version"] == "CODATA-2018"
    assert (outs[0] / "result.json").read_text() == (outs[1] / "result.json").read_text().replace(str(outs[1]), str(outs[0]))


def test_sampled_mode_bit_identical_with_seed(tmp_path, capsys):
    results = []
    for tag in ("a", "b", "c"):
        seed = "5" if tag != "c" else "6"
        args = ["solve", "--config", str(CONFIGS / "h2_sto6g_noisy.toml"), "--shots", "2000", "--seed", seed,
                "--output-dir", str(tmp_path / tag)]
        assert run(args, capsys)[0] == 0
        results.append(load(tmp_path / tag / "result.json")["varqite"]["noisy"])
    assert results[0] == results[1]
    assert results[0]["raw"] != results[2]["raw"]


@pytest.mark.skipif(not TC_DIR, reason="real transcorrelated integrals not supplied")
def test_map_tc_h2_631g(tmp_path, capsys):
    path = Path(TC_DIR) / "h2_631g_tc_0.74.fcidump"
    code, _, _ = run(["map", "--integrals", str(path), "--output-dir", str(tmp_path)], capsys)
    assert code == 0
    assert load(tmp_path / "map.json")["n_paulis"] == 607
