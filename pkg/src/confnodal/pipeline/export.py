"""Post-processing: CSV and JSON outputs, and the nodes interchange reader."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from confnodal.calculus import t_to_x
from confnodal.shared.errors import ConfigError, NodalDataError
from confnodal.shared.types import NodalSet, Provenance, ReconstructionResult, ShotSolution, SpectrumRecord
from confnodal.shared.utils import format_float, json_ready

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SCHEMA_LINE = f"# schema_version: {SCHEMA_VERSION}"

SPECTRUM_COLUMNS = ["n", "lambda_n", "guess", "residual"]
SHOTS_COLUMNS = ["n", "lambda_n", "x", "t", "S", "DS"]
RECONSTRUCTION_COLUMNS = ["x", "Q", "p", "f", "r", "q"]


def _cell(value: Any) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if value is None:
        return ""
    return format_float(value)


def write_csv(output_path: Path, columns: list[str], rows) -> Path:
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with output_path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    logger.info("Exported CSV to %s", output_path)
    return output_path


def write_json(output_path: Path, payload: dict[str, Any]) -> Path:
    output_path.parent.mkdir(parents=True, exist_ok=True)
    data = {"schema_version": SCHEMA_VERSION, **payload}
    output_path.write_text(
        json.dumps(json_ready(data), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    logger.info("Exported JSON to %s", output_path)
    return output_path


def export_spectrum(record: SpectrumRecord, output_path: Path) -> Path:
    rows = ((e.n, e.lambda_n, e.guess, e.residual) for e in record.entries)
    return write_csv(output_path, SPECTRUM_COLUMNS, rows)


def export_shots(shots: dict[int, ShotSolution], output_path: Path) -> Path:
    def rows():
        for n, shot in sorted(shots.items()):
            t = shot.y.t
            x = t_to_x(t, shot.y.alpha)
            for xi, ti, yi, dyi in zip(x, t, shot.y.values, shot.dy.values):
                yield n, shot.lam, xi, ti, yi, dyi

    return write_csv(output_path, SHOTS_COLUMNS, rows())


def export_reconstruction(result: ReconstructionResult, output_path: Path) -> Path:
    """x, Q, p, f, r, q on the canonical grid; columns of unfinished steps are left empty."""
    ref = next(g for g in (result.Q, result.p, result.f, result.r, result.q) if g is not None)
    x = ref.x
    cols = [getattr(result, name) for name in RECONSTRUCTION_COLUMNS[1:]]
    rows = (
        [x[i]] + [None if g is None else g.values[i] for g in cols]
        for i in range(x.size)
    )
    return write_csv(output_path, RECONSTRUCTION_COLUMNS, rows)


# --- Nodes interchange ---

def nodes_payload(nodal_set: NodalSet) -> dict[str, Any]:
    return {
        "alpha": nodal_set.alpha,
        "provenance": nodal_set.provenance.value,
        "entries": [{"n": n, "nodes": nodes.tolist()} for n, nodes in nodal_set.entries.items()],
    }


def export_nodes(nodal_set: NodalSet, output_path: Path) -> Path:
    return write_json(output_path, nodes_payload(nodal_set))


def read_nodes(path: Path) -> NodalSet:
    """Load a nodes.json file; schema problems raise NodalDataError."""
    if not path.exists():
        raise ConfigError(f"nodes file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise NodalDataError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise NodalDataError(f"{path}: top level must be an object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise NodalDataError(f"{path}: unsupported schema_version {version!r}")
    try:
        alpha = float(data["alpha"])
        entries = {int(item["n"]): np.asarray(item["nodes"], dtype=float) for item in data["entries"]}
        provenance = Provenance(data.get("provenance", Provenance.NUMERIC.value))
    except (KeyError, TypeError, ValueError) as e:
        raise NodalDataError(f"{path}: malformed nodes file ({e})") from e
    return NodalSet(alpha=alpha, entries=entries, provenance=provenance)


def read_samples_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """(x, value) columns of a potential samples file; '#' lines are comments."""
    if not path.exists():
        raise ConfigError(f"samples file not found: {path}")
    xs, vs = [], []
    with path.open(encoding="utf-8") as fh:
        rows = csv.reader(line for line in fh if line.strip() and not line.startswith("#"))
        for lineno, row in enumerate(rows, start=1):
            if lineno == 1 and row and not _is_number(row[0]):
                continue
            try:
                xs.append(float(row[0]))
                vs.append(float(row[1]))
            except (IndexError, ValueError) as e:
                raise ConfigError(f"{path}: data row {lineno}: expected two numbers, got {row}") from e
    if len(xs) < 4:
        raise ConfigError(f"{path}: need at least 4 samples, got {len(xs)}")
    return np.asarray(xs), np.asarray(vs)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True
