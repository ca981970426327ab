"""Writes ranking reports as a rendered summary plus TSV tables."""

from __future__ import annotations

from pathlib import Path
from typing import Dict

from jinja2 import Environment, FileSystemLoader

from .metrics import RankingReport

TEMPLATES_DIR = Path(__file__).resolve().parent.parent / "templates"
REPORT_TEMPLATE = "report.j2"


def _create_env() -> Environment:
    return Environment(
        loader=FileSystemLoader(str(TEMPLATES_DIR)),
        autoescape=False,
        trim_blocks=True,
        lstrip_blocks=True,
    )


def render_report(report: RankingReport, title: str = "Ranking report") -> str:
    template = _create_env().get_template(REPORT_TEMPLATE)
    return template.render(
        title=title,
        report=report,
        hits=sorted(report.hits.items()),
        metadata=sorted(report.metadata.items()),
    )


def write_report(report: RankingReport, out_dir: Path, title: str = "Ranking report") -> Dict[str, Path]:
    """Write report.txt, metrics.tsv, bins.tsv and ranks.tsv into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out_dir / "report.txt",
        "metrics": out_dir / "metrics.tsv",
        "bins": out_dir / "bins.tsv",
        "ranks": out_dir / "ranks.tsv",
    }
    paths["report"].write_text(render_report(report, title), encoding="utf-8")

    metrics = ["metric\tvalue", f"mrr\t{report.mrr:.6f}"]
    metrics.extend(f"hits@{k}\t{value:.6f}" for k, value in sorted(report.hits.items()))
    metrics.append(f"queries\t{report.num_queries}")
    paths["metrics"].write_text("\n".join(metrics) + "\n", encoding="utf-8")

    bins = ["bin\tqueries\tmrr"]
    bins.extend(f"{b.label}\t{b.queries}\t{b.mrr:.6f}" for b in report.bins)
    paths["bins"].write_text("\n".join(bins) + "\n", encoding="utf-8")

    ranks = ["entity\tdirection\trelation\tanswer\trank\tcandidates\tneighbors"]
    ranks.extend(
        f"{r.entity}\t{r.direction}\t{r.relation}\t{r.answer}\t{r.rank}"
        f"\t{r.num_candidates}\t{r.neighborhood_size}"
        for r in report.results
    )
    paths["ranks"].write_text("\n".join(ranks) + "\n", encoding="utf-8")
    return paths


__all__ = ["render_report", "write_report"]
