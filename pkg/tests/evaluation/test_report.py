"""Report rendering and the TSV tables written next to it."""

from __future__ import annotations

from pathlib import Path

from ooskge.evaluation import QueryResult, RankingReport, render_report, write_report


def _report() -> RankingReport:
    results = [
        QueryResult("x", "tail", "r", "a", 1, 3, 1),
        QueryResult("x", "head", "r", "c", 4, 3, 1),
    ]
    return RankingReport.from_results(results, {"method": "aggregation", "aggregator": "eravg"})


def test_render_report_lists_metrics_and_settings() -> None:
    text = render_report(_report(), title="Test part")

    assert text.startswith("Test part\n=========\n")
    assert "Queries: 2" in text
    assert "MRR         0.6250" in text
    assert "Hit@10      1.0000" in text
    assert "aggregator: eravg" in text
    assert "bin_boundaries: 1" in text


def test_write_report_emits_tables(tmp_path: Path) -> None:
    paths = write_report(_report(), tmp_path / "out")

    assert sorted(paths) == ["bins", "metrics", "ranks", "report"]
    metrics = paths["metrics"].read_text(encoding="utf-8").splitlines()
    assert metrics == [
        "metric\tvalue",
        "mrr\t0.625000",
        "hits@1\t0.500000",
        "hits@3\t0.500000",
        "hits@10\t1.000000",
        "queries\t2",
    ]
    assert paths["bins"].read_text(encoding="utf-8").splitlines() == [
        "bin\tqueries\tmrr",
        "1\t2\t0.625000",
    ]
    ranks = paths["ranks"].read_text(encoding="utf-8").splitlines()
    assert ranks[0] == "entity\tdirection\trelation\tanswer\trank\tcandidates\tneighbors"
    assert ranks[2] == "x\thead\tr\tc\t4\t3\t1"
