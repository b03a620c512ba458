"""Command-line workflow: bundle lifecycle, reports, and the error contract."""
from __future__ import annotations

import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from fmecalab.cli import cli


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    result = runner.invoke(cli, list(args), catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result.output


def test_full_campaign_lifecycle(runner, tmp_path):
    bundle = str(tmp_path / "bundle")
    source = tmp_path / "summaries.jsonl"
    source.write_text(
        '{"id": "s1", "source_text": "note", "generated_summary": "sum"}\n'
        '{"id": "s2", "source_text": "note", "generated_summary": "sum"}\n')

    out = invoke(runner, "init", bundle, "--campaign-id", "demo",
                 "--operator-token", "tok-op")
    assert "created campaign 'demo'" in out
    out = invoke(runner, "import-summaries", bundle, str(source))
    assert "imported 2 summaries" in out
    out = invoke(runner, "add-reviewer", bundle, "--id", "ann",
                 "--token", "tok-a")
    assert "token for 'ann': tok-a" in out
    invoke(runner, "add-reviewer", bundle, "--id", "ben", "--token", "tok-b")
    out = invoke(runner, "open-round", bundle, "--round", "r1")
    assert "2 reviewers, 2 summaries" in out
    out = invoke(runner, "close-round", bundle, "--round", "r1", "--force")
    assert "closed round 'r1'" in out
    out = invoke(runner, "report", "agreement", bundle, "--round", "r1")
    assert "round r1" in out
    out = invoke(runner, "report", "risk", bundle, "--round", "r1")
    assert "omission" in out


def test_taxonomy_and_scales_inspection(runner):
    out = invoke(runner, "taxonomy", "validate", "--version", "3")
    assert "OK (14 failure modes, 6 categories)" in out
    out = invoke(runner, "taxonomy", "show", "--version", "3")
    assert "Exhaustivity" in out
    out = invoke(runner, "scales", "show")
    assert "Severity" in out and "Occurrence" in out


def test_sus_scoring_from_csv(runner, tmp_path):
    rows = tmp_path / "sus.csv"
    rows.write_text("e1,5,1,5,1,5,1,5,1,5,1\n"
                    "e2,3,3,3,3,3,3,3,3,3,3\n")
    out = invoke(runner, "sus", "score", str(rows))
    assert "e1: 100.0" in out
    assert "e2: 50.0" in out
    assert "mean: 75.0" in out


def test_matrix_export(runner, tmp_path):
    bundle = str(tmp_path / "bundle")
    source = tmp_path / "s.jsonl"
    source.write_text('{"id": "s1", "source_text": "n", '
                      '"generated_summary": "g"}\n')
    invoke(runner, "init", bundle, "--campaign-id", "demo")
    invoke(runner, "import-summaries", bundle, str(source))
    invoke(runner, "add-reviewer", bundle, "--id", "ann")
    invoke(runner, "add-reviewer", bundle, "--id", "ben")
    invoke(runner, "open-round", bundle, "--round", "r1")
    invoke(runner, "close-round", bundle, "--round", "r1", "--force")
    out_path = tmp_path / "matrix.csv"
    out = invoke(runner, "export", "matrix", bundle, "--round", "r1",
                 "--stage", "2", "--out", str(out_path))
    assert "wrote" in out
    assert out_path.read_text().count("\n") > 14


def test_errors_emit_json_on_stderr(tmp_path):
    """Domain failures exit 1 with a machine-readable JSON line."""
    empty = tmp_path / "not-a-bundle"
    empty.mkdir()
    proc = subprocess.run(
        [sys.executable, "-m", "fmecalab.cli", "report", "risk", str(empty),
         "--round", "r1"],
        capture_output=True, text=True)
    assert proc.returncode == 1
    doc = json.loads(proc.stderr.strip().splitlines()[-1])
    assert set(doc) >= {"error", "message"}
