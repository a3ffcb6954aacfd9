from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from conftest import MINI_CORPUS, SYNTAX_CSV
from opskb import cli, pipeline
from opskb.chains import CHAINS_HEADER
from opskb.miner import ITEMSETS_HEADER, RULES_HEADER
from opskb.relations import RELATIONS_HEADER
from opskb.errors import ConfigError, InputError, StageFailure
from opskb.pipeline import PipelineConfig, run_pipeline

TABLES = ("relations.csv", "itemsets.csv", "rules.csv", "chains.csv")


def _run(out, corpus=MINI_CORPUS, **kw):
    return run_pipeline(PipelineConfig(corpus=str(corpus), syntax=str(SYNTAX_CSV), out=str(out), **kw))


def _header(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return next(csv.reader(fh))


def test_pipeline_mini_corpus(tmp_path):
    m = _run(tmp_path)
    c = m.stage_counts
    assert c["ingested"] == 3 and c["validated"] == 3 and c["rejected"] == 0
    assert c["relations"] > 0 and c["chains"] == 3 and c["kb_entries"] > 0
    for name in TABLES + ("kb.jsonl", "syntax.csv", "rejects.jsonl", "relations_per_script.csv"):
        assert (tmp_path / name).is_file()
        assert m.output_digests[name] == pipeline.sha256_file(tmp_path / name)
    assert not list(tmp_path.glob("*.partial"))
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["min_support"] == 0.05
    assert set(manifest["input_digests"]["scripts"]) == {"nested.js", "parallel.js", "sequential.js"}


def test_pipeline_headers(tmp_path):
    _run(tmp_path)
    assert _header(tmp_path / "relations.csv") == RELATIONS_HEADER
    assert _header(tmp_path / "itemsets.csv") == ITEMSETS_HEADER
    assert _header(tmp_path / "rules.csv") == RULES_HEADER
    assert _header(tmp_path / "chains.csv") == CHAINS_HEADER


def test_pipeline_deterministic(tmp_path):
    _run(tmp_path / "a")
    _run(tmp_path / "b", threads=2)
    for name in TABLES + ("kb.jsonl",):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_pipeline_broken_scripts(tmp_path):
    corpus = tmp_path / "c"
    corpus.mkdir()
    (corpus / "bad1.js").write_text("var x = ;\n")
    (corpus / "bad2.js").write_text("function (\n")
    m = _run(tmp_path / "out", corpus, build_kb=False)
    assert m.stage_counts["validated"] == 0 and m.stage_counts["rejected"] == 2
    rel = (tmp_path / "out" / "relations.csv").read_text().splitlines()
    assert len(rel) == 1
    rejects = [json.loads(line) for line in (tmp_path / "out" / "rejects.jsonl").read_text().splitlines()]
    assert [r["script_id"] for r in rejects] == ["bad1.js", "bad2.js"]


def test_pipeline_errors(tmp_path):
    with pytest.raises(ConfigError):
        _run(tmp_path, min_support=0)
    with pytest.raises(ConfigError):
        _run(tmp_path, parallel_rule="bogus")
    with pytest.raises(InputError):
        run_pipeline(PipelineConfig(corpus=str(tmp_path / "none"), syntax=str(SYNTAX_CSV), out=str(tmp_path)))


def test_stage_failure(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("injected")

    monkeypatch.setattr(pipeline, "derive_rules", boom)
    with pytest.raises(StageFailure) as info:
        _run(tmp_path)
    assert info.value.stage == "mine"
    assert not (tmp_path / "manifest.json").exists()


# -- command line ----------------------------------------------------------------------------


def _main(*argv):
    return cli.main([str(a) for a in argv])


def test_cli_exit_codes(tmp_path, monkeypatch, capsys):
    base = ("pipeline", "--corpus", MINI_CORPUS, "--syntax", SYNTAX_CSV, "--out", tmp_path / "o", "--no-kb")
    assert _main(*base) == cli.EXIT_OK
    assert json.loads(capsys.readouterr().out.strip())["validated"] == 3
    with pytest.raises(SystemExit) as info:
        _main(*base, "--min-support", "1.5")
    assert info.value.code == cli.EXIT_CONFIG
    assert _main("pipeline", "--corpus", tmp_path / "missing", "--syntax", SYNTAX_CSV, "--out", tmp_path / "x") == cli.EXIT_INPUT
    monkeypatch.setattr(pipeline, "write_chains_csv", lambda *a, **k: 1 / 0)
    assert _main(*base) == cli.EXIT_STAGE


def test_cli_stages(tmp_path, capsys):
    w = tmp_path
    assert _main("ingest", MINI_CORPUS, "--out", w / "raw.jsonl") == 0
    assert _main("clean", w / "raw.jsonl", "--out", w / "clean.jsonl") == 0
    assert _main("validate", w / "clean.jsonl", "--out", w / "valid.jsonl", "--rejects", w / "rej.jsonl", "--ast-dir", w / "ast") == 0
    assert len(list((w / "ast").glob("*.ast.json"))) == 3
    assert (
        _main(
            "extract", w / "valid.jsonl", "--relations", w / "relations.csv", "--per-script", w / "per.csv",
            "--chains", w / "chains.csv", "--txns", w / "txns.jsonl",
        )
        == 0
    )
    assert _main("mine", w / "txns.jsonl", "--itemsets", w / "itemsets.csv", "--rules", w / "rules.csv") == 0
    assert _main("mine", w / "txns.jsonl", "--itemsets", w / "plain.csv", "--plain") == 0
    assert (w / "plain.csv").read_bytes() == (w / "itemsets.csv").read_bytes()
    assert _main("check-names", w / "valid.jsonl", "--syntax", SYNTAX_CSV, "--report", w / "names.json") == 0
    assert "unknown" in json.loads((w / "names.json").read_text())
    (w / "syntax.csv").write_bytes(SYNTAX_CSV.read_bytes())
    assert _main("build-kb", w) == 0
    capsys.readouterr()
    assert _main("query", "compute NDVI from an image", "--kb", w, "--top-k", "3", "--prompt-out", w / "p.txt") == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3 and lines[0].startswith("1\t")
    assert "compute NDVI from an image" in (w / "p.txt").read_text()
    assert _main("eval", "relations", "--pred", w / "per.csv", "--truth", w / "per.csv", "--report", w / "r.json") == 0
    out = json.loads(capsys.readouterr().out)
    assert out["mean"]["f1"] == "1.00"
    assert _main("eval", "chains", "--pred", w / "chains.csv", "--truth", w / "chains.csv") == 0


def test_cli_subprocess_version():
    res = subprocess.run([sys.executable, "-m", "opskb.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
    res = subprocess.run([sys.executable, "-m", "opskb.cli", "mine"], capture_output=True, text=True)
    assert res.returncode == cli.EXIT_CONFIG
