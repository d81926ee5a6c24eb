import json
import math
from pathlib import Path

import numpy as np
import pytest

from confnodal.calculus import GridFunction
from confnodal.pipeline.export import (
    SCHEMA_LINE,
    export_nodes,
    export_reconstruction,
    export_spectrum,
    read_nodes,
    read_samples_csv,
    write_json,
)
from confnodal.shared.errors import ConfigError, NodalDataError
from confnodal.shared.types import NodalSet, Provenance, ReconstructionResult, SpectrumEntry, SpectrumRecord
from confnodal.shared.utils import format_float, json_ready

GOLDEN = Path(__file__).parent / "golden"


def _golden_lines(name: str) -> list[str]:
    return (GOLDEN / name).read_text(encoding="utf-8").splitlines()


def test_spectrum_header_matches_golden(tmp_path):
    record = SpectrumRecord(alpha=1.0, entries=[SpectrumEntry(2, 2.0, 1e-15, 2.0), SpectrumEntry(1, 1.0, 0.0, 1.0)])
    lines = export_spectrum(record, tmp_path / "spectrum.csv").read_text(encoding="utf-8").splitlines()
    assert lines[:2] == _golden_lines("spectrum_header.csv")
    assert lines[2].split(",")[0] == "1"
    assert float(lines[3].split(",")[1]) == 2.0


def test_reconstruction_header_and_empty_columns(tmp_path):
    Q = GridFunction(np.zeros(5), 1.0)
    partial = ReconstructionResult(alpha=1.0, Q=Q, p=Q, f=Q, r=Q)
    lines = export_reconstruction(partial, tmp_path / "reconstruction.csv").read_text(encoding="utf-8").splitlines()
    assert lines[:2] == _golden_lines("reconstruction_header.csv")
    assert len(lines) == 2 + 5
    assert lines[2].endswith(",")


def test_nodes_file_keys_match_golden(tmp_path):
    nodal_set = NodalSet(alpha=0.5, entries={3: [0.3, 1.2], 1: []})
    path = export_nodes(nodal_set, tmp_path / "nodes.json")
    data = json.loads(path.read_text(encoding="utf-8"))
    golden = json.loads((GOLDEN / "nodes_keys.json").read_text(encoding="utf-8"))
    assert sorted(data) == golden["top"]
    assert sorted(data["entries"][0]) == golden["entry"]
    assert data["schema_version"] == 1


def test_nodes_read_back(tmp_path):
    nodal_set = NodalSet(alpha=0.75, entries={4: [0.5, 1.5, 2.5]}, provenance=Provenance.ASYMPTOTIC)
    loaded = read_nodes(export_nodes(nodal_set, tmp_path / "nodes.json"))
    assert loaded.alpha == 0.75
    assert loaded.provenance is Provenance.ASYMPTOTIC
    np.testing.assert_array_equal(loaded.nodes(4), [0.5, 1.5, 2.5])


def test_outputs_are_byte_stable(tmp_path):
    nodal_set = NodalSet(alpha=1.0, entries={3: [math.pi / 3, 2 * math.pi / 3]})
    first = export_nodes(nodal_set, tmp_path / "a.json").read_bytes()
    second = export_nodes(nodal_set, tmp_path / "b.json").read_bytes()
    assert first == second


@pytest.mark.parametrize(
    "payload, match",
    [
        ({"schema_version": 2, "alpha": 1.0, "entries": []}, "schema_version"),
        ({"schema_version": 1, "entries": []}, "malformed"),
        ({"schema_version": 1, "alpha": 1.0, "entries": [{"n": 3, "nodes": [1.0]}]}, "expected 2"),
        ({"schema_version": 1, "alpha": 1.0, "entries": [{"n": 3, "nodes": [2.0, 1.0]}]}, "increasing"),
    ],
)
def test_bad_nodes_files(tmp_path, payload, match):
    path = tmp_path / "nodes.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(NodalDataError, match=match):
        read_nodes(path)


def test_truncated_nodes_file(tmp_path):
    path = tmp_path / "nodes.json"
    path.write_text('{"schema_version": 1, "alpha": 1.0, "entries": [{"n": 3, "nod', encoding="utf-8")
    with pytest.raises(NodalDataError, match="line 1"):
        read_nodes(path)


def test_missing_nodes_file(tmp_path):
    with pytest.raises(ConfigError):
        read_nodes(tmp_path / "absent.json")


def test_samples_csv(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("# p samples\nx,value\n0,1\n1,2\n2,3\n3,4\n", encoding="utf-8")
    x, v = read_samples_csv(path)
    np.testing.assert_array_equal(x, [0, 1, 2, 3])
    np.testing.assert_array_equal(v, [1, 2, 3, 4])
    path.write_text("0,1\n1,oops\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="row 2"):
        read_samples_csv(path)


def test_json_ready_and_float_text():
    assert json_ready({"a": np.float64(float("nan")), "b": Provenance.NUMERIC, "c": np.arange(2)}) == {
        "a": None,
        "b": "numeric",
        "c": [0, 1],
    }
    assert float(format_float(0.1)) == 0.1
    text = write_json(Path("report.json"), {"x": 1}).read_text(encoding="utf-8")
    assert text.endswith("}\n")
    assert SCHEMA_LINE == "# schema_version: 1"
