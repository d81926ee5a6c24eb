"""Typer CLI entry point for confnodal."""

from __future__ import annotations

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.table import Table

from confnodal.shared.errors import AcceptanceError, ConfnodalError

app = typer.Typer(
    name="confnodal",
    help="confnodal - forward and inverse nodal problems for the conformable diffusion pencil",
    no_args_is_help=True,
)
console = Console()

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    datefmt="%H:%M:%S",
)


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Map library errors to process exit codes."""
    try:
        yield
    except ConfnodalError as e:
        console.print(f"[red]{type(e).__name__}: {e}[/red]")
        raise typer.Exit(e.exit_code) from e


def _load(config: Optional[Path], **overrides):
    from confnodal.config import get_settings, load_run_config

    cfg = load_run_config(config, overrides)
    logging.getLogger().setLevel(get_settings().log_level.upper())
    return cfg


ConfigOpt = typer.Option(None, "--config", "-c", help="TOML or JSON run file")
AlphaOpt = typer.Option(None, "--alpha", "-a", help="Fractional order in (0, 1]")
PresetOpt = typer.Option(None, "--preset", "-p", help="Potential preset")
NmaxOpt = typer.Option(None, "--nmax", help="Largest eigenvalue index")
NuseOpt = typer.Option(None, "--n-use", help="Index at which the limits are approximated")
OutOpt = typer.Option(None, "--out", "-o", help="Output directory")
RefineOpt = typer.Option(None, "--refine", help="Grid doublings")
CrossOpt = typer.Option(None, "--cross-check/--no-cross-check", help="Check Delta against -psi(0)")
RichardsonOpt = typer.Option(None, "--richardson/--no-richardson", help="Extrapolate limits over an index ladder")


def _show_spectrum(record) -> None:
    table = Table(title=f"Eigenvalues (alpha={record.alpha:g})")
    table.add_column("n", justify="right")
    table.add_column("lambda_n", justify="right")
    table.add_column("guess", justify="right")
    table.add_column("|Delta|", justify="right")
    for e in record.entries[:20]:
        table.add_row(str(e.n), f"{e.lambda_n:.10f}", f"{e.guess:.10f}", f"{e.residual:.1e}")
    console.print(table)
    if len(record.entries) > 20:
        console.print(f"  ... {len(record.entries) - 20} more in spectrum.csv")


def _forward(config, alpha, preset, nmax, out, refine, cross_check, shots, with_nodes: bool, ladder: bool):
    from confnodal.inverse.reconstruct import ReconstructOptions, required_indices
    from confnodal.pipeline.runner import run_forward

    with _exit_codes():
        cfg = _load(config, alpha=alpha, preset=preset, n_max=nmax, out_dir=out, refine=refine,
                    cross_check=cross_check, write_shots=shots)
        extra = required_indices(cfg.n_use, cfg.second_index(), ReconstructOptions.from_config(cfg)) if ladder else []
        outcome = run_forward(cfg, with_nodes=with_nodes, extra_indices=extra)
        _show_spectrum(outcome.spectrum)
        for path in outcome.files:
            console.print(f"  wrote {path}")


@app.command()
def forward(
    config: Optional[Path] = ConfigOpt,
    alpha: Optional[float] = AlphaOpt,
    preset: Optional[str] = PresetOpt,
    nmax: Optional[int] = NmaxOpt,
    out: Optional[Path] = OutOpt,
    refine: Optional[int] = RefineOpt,
    cross_check: Optional[bool] = CrossOpt,
    shots: Optional[bool] = typer.Option(None, "--shots/--no-shots", help="Write shots.csv"),
    ladder: bool = typer.Option(True, "--ladder/--no-ladder", help="Also compute nodes the inverse reads"),
):
    """Spectrum, nodes and (on request) shots for one potential pair."""
    _forward(config, alpha, preset, nmax, out, refine, cross_check, shots, with_nodes=True, ladder=ladder)


@app.command()
def spectrum(
    config: Optional[Path] = ConfigOpt,
    alpha: Optional[float] = AlphaOpt,
    preset: Optional[str] = PresetOpt,
    nmax: Optional[int] = NmaxOpt,
    out: Optional[Path] = OutOpt,
    refine: Optional[int] = RefineOpt,
    cross_check: Optional[bool] = CrossOpt,
):
    """Eigenvalues only (spectrum.csv)."""
    _forward(config, alpha, preset, nmax, out, refine, cross_check, None, with_nodes=False, ladder=False)


@app.command()
def nodes(
    config: Optional[Path] = ConfigOpt,
    alpha: Optional[float] = AlphaOpt,
    preset: Optional[str] = PresetOpt,
    nmax: Optional[int] = NmaxOpt,
    out: Optional[Path] = OutOpt,
    refine: Optional[int] = RefineOpt,
    ladder: bool = typer.Option(True, "--ladder/--no-ladder", help="Also compute nodes the inverse reads"),
):
    """Eigenvalues and nodal points (spectrum.csv, nodes.json)."""
    _forward(config, alpha, preset, nmax, out, refine, None, False, with_nodes=True, ladder=ladder)


@app.command()
def invert(
    nodes_path: Path = typer.Argument(..., help="nodes.json from a forward run"),
    config: Optional[Path] = ConfigOpt,
    alpha: Optional[float] = AlphaOpt,
    n_use: Optional[int] = NuseOpt,
    out: Optional[Path] = OutOpt,
    refine: Optional[int] = RefineOpt,
    richardson: Optional[bool] = RichardsonOpt,
):
    """Reconstruct p and q from nodal points (reconstruction.csv, diagnostics.json)."""
    from confnodal.pipeline.runner import run_inverse

    with _exit_codes():
        cfg = _load(config, alpha=alpha, n_use=n_use, out_dir=out, refine=refine, richardson=richardson)
        result = run_inverse(cfg, nodes_path)
        table = Table(title="Reconstruction")
        table.add_column("Step")
        table.add_column("Status")
        for step, status in result.status.items():
            table.add_row(step, status.value)
        console.print(table)
        console.print(f"[green]mean of q: {result.mean_q:.8g}[/green]")


@app.command()
def roundtrip(
    config: Optional[Path] = ConfigOpt,
    alpha: Optional[float] = AlphaOpt,
    preset: Optional[str] = PresetOpt,
    out: Optional[Path] = OutOpt,
    refine: Optional[int] = RefineOpt,
    richardson: Optional[bool] = RichardsonOpt,
):
    """Forward nodes, reconstruction over the n_use sweep, comparison with the truth."""
    from confnodal.pipeline.runner import run_roundtrip

    with _exit_codes():
        cfg = _load(config, alpha=alpha, preset=preset, out_dir=out, refine=refine, richardson=richardson)
        report = run_roundtrip(cfg)
        table = Table(title=f"Round trip (alpha={cfg.alpha:g}, preset={cfg.preset})")
        table.add_column("n_use", justify="right")
        table.add_column("err p", justify="right")
        table.add_column("err q", justify="right")
        table.add_column("err mean q", justify="right")
        for entry in report["sweeps"]["numeric"]:
            errs = entry["errors"]
            table.add_row(str(entry["n_use"]), f"{errs.get('p', float('nan')):.3e}",
                          f"{errs.get('q', float('nan')):.3e}", f"{errs.get('mean_q', float('nan')):.3e}")
        console.print(table)


@app.command()
def selftest(
    size: int = typer.Option(4001, "--size", help="Grid points"),
):
    """Calculus identity residuals for the probe functions."""
    from confnodal.checks.acceptance import IDENTITY_TOLERANCE
    from confnodal.checks.selftest import run_selftest

    rows = run_selftest(size=size)
    table = Table(title="Calculus identities")
    table.add_column("probe")
    table.add_column("alpha", justify="right")
    table.add_column("D I f - f", justify="right")
    table.add_column("I D f - f", justify="right")
    table.add_column("by parts", justify="right")
    for name, rep in rows:
        style = "red" if rep.worst > IDENTITY_TOLERANCE else "green"
        table.add_row(name, f"{rep.alpha:g}", f"{rep.derivative_of_integral:.2e}",
                      f"{rep.integral_of_derivative:.2e}", f"{rep.integration_by_parts:.2e}", style=style)
    console.print(table)
    worst_name, worst = max(rows, key=lambda row: row[1].worst)
    with _exit_codes():
        if worst.worst > IDENTITY_TOLERANCE:
            raise AcceptanceError(f"identity residual ({worst_name}, alpha={worst.alpha:g})", worst.worst,
                                  IDENTITY_TOLERANCE)
    console.print("[green]All identities within tolerance[/green]")


if __name__ == "__main__":
    app()
