"""Command-line driver: ``tcqite map|solve|scan|mp2no|constants``.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click
from pydantic import ValidationError

from . import workflow
from .errors import InputError, NumericalError
from .spectro import constants_table

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2

log = logging.getLogger("tcqite")


def _common(fn):
    opts = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="TOML run configuration."),
        click.option("--integrals", help="Integral file; 'pkg:<name>' selects a bundled fixture."),
        click.option("--encoding", type=click.Choice(["jordan-wigner", "parity", "parity-reduced"])),
        click.option("--truncation", type=float, help="Drop Pauli terms with |c| below this."),
        click.option("--seed", type=int),
        click.option("--threads", type=int),
        click.option("--output-dir", type=click.Path(file_okay=False)),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _config(config_path, **flags) -> workflow.RunConfig:
    return workflow.load_config(config_path, {k.replace("__", "."): v for k, v in flags.items()})


def _emit(cfg: workflow.RunConfig, command: str, name: str, payload: dict, fixtures: list[Path]) -> Path:
    out = Path(cfg.output_dir)
    workflow.write_json(payload, out / name)
    workflow.write_json(workflow.manifest(cfg, command, fixtures), out / "manifest.json")
    click.echo(json.dumps(payload, indent=2, sort_keys=True, default=workflow._json_default))
    return out


@click.group()
@click.option("-v", "--verbose", count=True, help="Increase log verbosity.")
def cli(verbose: int) -> None:
    """Transcorrelated VarQITE toolkit."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@cli.command("map")
@_common
@click.option("--ansatz", "ansatz__kind", type=click.Choice(["uccsd", "hea"]))
@click.option("--layers", "ansatz__layers", type=int)
def map_cmd(config_path, **flags):
    """Pauli counts, 1-norm breakdown and circuit resources."""
    cfg = _config(config_path, **flags)
    h, path = workflow.load_hamiltonian(cfg)
    _emit(cfg, "map", "map.json", workflow.map_report(h, cfg), [path])


@cli.command("solve")
@_common
@click.option("--mode", type=click.Choice(["exact", "varqite", "both"]))
@click.option("--ansatz", "ansatz__kind", type=click.Choice(["uccsd", "hea"]))
@click.option("--layers", "ansatz__layers", type=int)
@click.option("--gradient-mode", "evolution__gradient_mode",
              type=click.Choice(["finite-difference", "parameter-shift", "hadamard-test"]))
@click.option("--shots", "sampling__shots", type=int, help="Shots per measurement basis (0 = exact).")
def solve_cmd(config_path, **flags):
    """Ground state by exact diagonalization and/or VarQITE."""
    cfg = _config(config_path, **flags)
    h, path = workflow.load_hamiltonian(cfg)
    res = workflow.solve(h, cfg, Path(cfg.output_dir))
    _emit(cfg, "solve", "result.json", res, [path])


@cli.command("scan")
@_common
@click.option("--mode", type=click.Choice(["exact", "varqite", "both"]))
def scan_cmd(config_path, **flags):
    """Potential-energy curve and spectroscopic constants."""
    cfg = _config(config_path, **flags)
    fixtures = workflow.scan_fixtures(cfg)
    consts = workflow.scan(cfg, Path(cfg.output_dir))
    _emit(cfg, "scan", "constants.json", consts, fixtures)


@cli.command("mp2no")
@_common
@click.option("-k", "--keep", "keep", multiple=True, type=int, help="Spatial orbitals to keep (repeatable).")
def mp2no_cmd(config_path, keep, **flags):
    """MP2 natural orbitals and truncated integral files."""
    cfg = _config(config_path, **flags)
    h, path = workflow.load_hamiltonian(cfg)
    ks = sorted(set(keep)) or list(range(max(h.n_alpha, h.n_beta), h.n_spatial + 1))
    report = workflow.mp2no_report(h, ks, Path(cfg.output_dir))
    _emit(cfg, "mp2no", "mp2no.json", report, [path])


@cli.command("constants")
def constants_cmd():
    """Print the physical-constant table used for unit conversions."""
    click.echo(json.dumps(constants_table(), indent=2))


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and map failures onto exit codes."""
    try:
        cli.main(args=argv, prog_name="tcqite", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_INPUT
    except click.ClickException as exc:
        exc.show()
        return EXIT_INPUT
    except ValidationError as exc:
        click.echo(f"error: invalid configuration\n{exc}", err=True)
        return EXIT_INPUT
    except NumericalError as exc:
        click.echo(f"numerical error: {exc}", err=True)
        return EXIT_NUMERICAL
    except (InputError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
