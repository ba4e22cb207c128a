"""End-to-end command-line flow."""

import json

import numpy as np
from click.testing import CliRunner

from model_export import runtime
from model_export.cli import main


def test_export_with_goldens(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, [
        "export",
        "--out", str(tmp_path / "model.onnx"),
        "--weights", "random", "--seed", "0",
        "--goldens", str(tmp_path / "goldens"),
        "--golden-count", "2",
    ])
    assert result.exit_code == 0, result.output
    assert "verified" in result.output
    assert "3 golden pairs" in result.output

    data = (tmp_path / "model.onnx").read_bytes()
    index = json.loads((tmp_path / "goldens" / "index.json").read_text())
    assert index["count"] == 3
    for pair in index["pairs"].values():
        x = np.load(tmp_path / "goldens" / pair["input"])
        want = np.load(tmp_path / "goldens" / pair["output"])
        assert np.max(np.abs(runtime.run(data, x) - want)) <= 1e-4


def test_unknown_weights_mode_rejected(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["export", "--out", str(tmp_path / "m.onnx"),
                                  "--weights", "finetuned"])
    assert result.exit_code == 2
    assert "finetuned" in result.output
