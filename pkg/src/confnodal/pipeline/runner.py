"""Forward, inverse and round-trip workflows with file output."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from rich.console import Console
from rich.progress import Progress

from confnodal.asymptotics import coefficients
from confnodal.calculus import AlphaOrder, as_alpha
from confnodal.checks.acceptance import evaluate_roundtrip, guess_growth, reconstruction_errors
from confnodal.config import PotentialSpec, RunConfig
from confnodal.forward.nodal import asymptotic_nodes, compute_nodes, nodal_dataset
from confnodal.forward.shooting import characteristic, shoot_S
from confnodal.forward.spectral import locate_eigenvalues
from confnodal.inverse.reconstruct import ReconstructOptions, reconstruct, required_indices
from confnodal.model import PRESETS, Potential, PotentialPair, make_potential, sampled_potential, trig_from_spec
from confnodal.pipeline.export import (
    export_nodes,
    export_reconstruction,
    export_shots,
    export_spectrum,
    read_nodes,
    read_samples_csv,
    write_json,
)
from confnodal.shared.errors import AcceptanceError, ConfigError, DegenerateDenominatorError
from confnodal.shared.types import NodalInput, NodalSet, Provenance, ReconstructionResult, SpectrumRecord

logger = logging.getLogger(__name__)
console = Console()

# Fixed-point passes for asymptotic nodes fed to the inverse; g reads them at O(1/n^3)
INVERSE_PASSES = 8


# --- Potentials ---

def _spec_potential(spec: PotentialSpec, alpha: AlphaOrder, size: int) -> Potential:
    if spec.kind == "samples":
        x, values = read_samples_csv(spec.path)
        return sampled_potential(x, values, alpha, size)
    return trig_from_spec(spec, alpha)


def build_pair(cfg: RunConfig) -> PotentialPair:
    """Preset components, with explicit p/q specs taking precedence."""
    alpha = as_alpha(cfg.alpha)
    size = cfg.resolved_grid()
    p = q = None
    allow = cfg.allow_constant_p
    if cfg.preset is not None:
        try:
            p, q, preset_allow = PRESETS[cfg.preset](alpha)
        except KeyError:
            raise ConfigError(f"unknown preset {cfg.preset!r}; choose from {sorted(PRESETS)}") from None
        allow = allow or (preset_allow and cfg.p is None)
    if cfg.p is not None:
        p = _spec_potential(cfg.p, alpha, size)
    if cfg.q is not None:
        q = _spec_potential(cfg.q, alpha, size)
    return make_potential(p, q, alpha, allow_constant_p=allow)


# --- Forward ---

@dataclass
class ForwardOutcome:
    pp: PotentialPair
    spectrum: SpectrumRecord
    nodal_set: NodalSet | None = None
    report: dict[str, Any] = field(default_factory=dict)
    files: list[Path] = field(default_factory=list)


def _nodes_for(pp: PotentialPair, indices: list[int], cfg: RunConfig, label: str) -> dict[int, Any]:
    size, scheme = cfg.resolved_grid(), cfg.resolved_scheme()
    cap = cfg.resolved_lambda_cap()
    out = {}
    with Progress(console=console, transient=True) as progress:
        task = progress.add_task(label, total=len(indices))
        for n in indices:
            progress.update(task, description=f"[cyan]{label} n={n}")
            spectrum = locate_eigenvalues(pp, n, n, size=size, scheme=scheme, lambda_cap=cap)
            out[n] = compute_nodes(pp, n, spectrum, size, scheme)
            progress.advance(task)
    return out


def run_forward(cfg: RunConfig, with_nodes: bool = True, extra_indices: list[int] | None = None) -> ForwardOutcome:
    """Spectrum for n_min..n_max, nodes for 1..n_max plus extra_indices, optional shots."""
    out_dir = cfg.resolved_out_dir()
    size, scheme = cfg.resolved_grid(), cfg.resolved_scheme()
    pp = build_pair(cfg)
    spectrum = locate_eigenvalues(pp, cfg.n_min, cfg.n_max, size=size, scheme=scheme,
                                  lambda_cap=cfg.resolved_lambda_cap())
    outcome = ForwardOutcome(pp=pp, spectrum=spectrum)
    outcome.report["anomalies"] = spectrum.anomalies
    growth = guess_growth(spectrum)
    if growth is not None:
        outcome.report["guess_growth"] = growth
        if not growth["ok"]:
            logger.warning("Eigenvalue guess residuals grow: n^2 slope %.3f", growth["slope"])
    outcome.files.append(export_spectrum(spectrum, out_dir / "spectrum.csv"))

    if cfg.cross_check:
        checks = [characteristic(pp, e.lambda_n, cross_check=True, size=size, scheme=scheme) for e in spectrum.entries]
        outcome.report["cross_check"] = [
            {"n": e.n, "delta": c.delta, "delta_psi": c.delta_psi, "agrees": c.agrees}
            for e, c in zip(spectrum.entries, checks)
        ]
        if not all(c.agrees for c in checks):
            console.print("[yellow]Delta cross-check disagreed for some eigenvalues[/yellow]")

    if cfg.write_shots:
        shots = {e.n: shoot_S(pp, e.lambda_n, size, scheme) for e in spectrum.entries}
        outcome.files.append(export_shots(shots, out_dir / "shots.csv"))

    if with_nodes and cfg.n_max >= 1:
        nodal_set = nodal_dataset(pp, cfg.n_max, spectrum if cfg.n_min <= 1 else None, size, scheme)
        extra = sorted(set(extra_indices or []) - set(nodal_set.entries))
        for n, nodes in _nodes_for(pp, extra, cfg, "Nodes").items():
            nodal_set.add(n, nodes)
        outcome.nodal_set = nodal_set
        outcome.report["nodal"] = nodal_set.report
        outcome.files.append(export_nodes(nodal_set, out_dir / "nodes.json"))

    outcome.files.append(write_json(out_dir / "forward_report.json", outcome.report))
    outcome.files.append(write_json(out_dir / "config.json", cfg.echo()))
    console.print(f"[green]Forward run complete: {len(spectrum.entries)} eigenvalues[/green]")
    return outcome


# --- Inverse ---

def _diagnostics(result: ReconstructionResult, nodal_set: NodalSet) -> dict[str, Any]:
    return {
        "alpha": result.alpha,
        "provenance": nodal_set.provenance,
        "mean_q": result.mean_q,
        "status": result.status,
        "steps": result.diagnostics,
    }


def run_inverse(cfg: RunConfig, nodes: Path | NodalSet, out_dir: Path | None = None) -> ReconstructionResult:
    """Reconstruct from a nodes file (or set) and write reconstruction.csv and diagnostics.json."""
    out_dir = Path(out_dir) if out_dir is not None else cfg.resolved_out_dir()
    nodal_set = read_nodes(nodes) if isinstance(nodes, Path) else nodes
    input = NodalInput(alpha=as_alpha(cfg.alpha), nodal_set=nodal_set, n_use=cfg.n_use, n_use2=cfg.n_use2)
    try:
        result = reconstruct(input, ReconstructOptions.from_config(cfg))
    except DegenerateDenominatorError as e:
        if e.partial is not None:
            export_reconstruction(e.partial, out_dir / "reconstruction.csv")
            write_json(out_dir / "diagnostics.json", _diagnostics(e.partial, nodal_set))
        raise
    export_reconstruction(result, out_dir / "reconstruction.csv")
    write_json(out_dir / "diagnostics.json", _diagnostics(result, nodal_set))
    write_json(out_dir / "config.json", cfg.echo())
    return result


# --- Round trip ---

def _sweep_entry(n_use: int, result: ReconstructionResult, pp: PotentialPair, cfg: RunConfig) -> dict[str, Any]:
    diag = result.diagnostics
    return {
        "n_use": n_use,
        "errors": reconstruction_errors(result, pp, cfg.interior_fraction),
        "mean_q": result.mean_q,
        "step4_iqr": diag.get("step4", {}).get("iqr"),
        "step4_flagged": diag.get("step4", {}).get("flagged"),
        "second_pass_change": diag.get("second_pass_change"),
        "edge_bias_count": diag.get("edge_bias_count"),
    }


def run_roundtrip(cfg: RunConfig) -> dict[str, Any]:
    """Forward nodes, reconstruction at each n_use of the sweep, comparison with the truth.

    Raises AcceptanceError (after writing the report) when thresholds or
    monotonicity fail.
    """
    out_dir = cfg.resolved_out_dir()
    pp = build_pair(cfg)
    opts = ReconstructOptions.from_config(cfg)
    ladders = {n: required_indices(n, cfg.second_index(n), opts) for n in cfg.n_use_sweep}
    indices = sorted({k for ladder in ladders.values() for k in ladder})
    console.print(f"[blue]Round trip: nodes for {len(indices)} indices (n={indices[0]}..{indices[-1]})[/blue]")

    numeric = NodalSet(alpha=float(pp.alpha), entries=_nodes_for(pp, indices, cfg, "Nodes"))
    sources = {Provenance.NUMERIC: numeric}
    if cfg.asymptotic_compare:
        bundle = coefficients(pp, indices)
        sources[Provenance.ASYMPTOTIC] = NodalSet(
            alpha=float(pp.alpha),
            entries={n: asymptotic_nodes(pp, n, order=3, passes=INVERSE_PASSES, bundle=bundle) for n in indices},
            provenance=Provenance.ASYMPTOTIC,
        )

    report: dict[str, Any] = {"alpha": float(pp.alpha), "preset": cfg.preset, "sweeps": {}}
    for provenance, nodal_set in sources.items():
        sweep = []
        for n_use in cfg.n_use_sweep:
            input = NodalInput(pp.alpha, nodal_set, n_use, cfg.second_index(n_use))
            result = reconstruct(input, opts)
            sweep.append(_sweep_entry(n_use, result, pp, cfg))
            if provenance is Provenance.NUMERIC and n_use == cfg.n_use_sweep[-1]:
                export_reconstruction(result, out_dir / "reconstruction.csv")
        report["sweeps"][provenance.value] = sweep

    passed, verdict = evaluate_roundtrip(
        report["sweeps"][Provenance.NUMERIC.value],
        cfg.thresholds.p,
        cfg.thresholds.q,
        cfg.thresholds.mean_q,
    )
    report["passed"] = passed
    report["verdict"] = verdict
    write_json(out_dir / "roundtrip_report.json", report)
    write_json(out_dir / "config.json", cfg.echo())
    if not passed:
        raise AcceptanceError(verdict["worst_metric"], verdict["worst_value"], verdict["worst_threshold"])
    console.print("[green]Round trip passed[/green]")
    return report
