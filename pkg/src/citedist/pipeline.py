"""End-to-end batch run: ingest, rescale, fit grids, summarise, correlate.

Everything is computed sequentially in a fixed order so two runs over the
same inputs write byte-identical bundles.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import analysis
from .corpus import IngestConfig, cohorts, load_corpus
from .fitting import DEFAULT_ALPHA_LEVEL, DEFAULT_TAIL_MIN
from .report import RunConfig, write_csv, write_json
from .rescale import normalize, write_rescaled

log = logging.getLogger(__name__)

LEVEL_CHOICES = ("none", "area", "category", "all")


@dataclass
class PipelineOptions:
    articles: Path
    citations: Path
    out: Path
    classification: Optional[Path] = None
    normalize: bool = False
    level: str = "none"
    window: tuple = (1996, 2017)
    x_min: Union[str, float] = "scan"
    tail_min: int = DEFAULT_TAIL_MIN
    alpha_level: float = DEFAULT_ALPHA_LEVEL
    merge_journals: bool = True

    def levels(self) -> list[str]:
        if self.level not in LEVEL_CHOICES:
            raise ValueError(f"level must be one of {LEVEL_CHOICES}")
        if self.level == "all":
            return ["none", "area", "category"]
        return ["none"] if self.level == "none" else ["none", self.level]

    def to_dict(self) -> dict:
        return {
            "articles": str(self.articles),
            "citations": str(self.citations),
            "classification": None if self.classification is None else str(self.classification),
            "normalize": self.normalize,
            "level": self.level,
            "window": list(self.window),
            "x_min": self.x_min,
            "tail_min": self.tail_min,
            "alpha_level": self.alpha_level,
            "merge_journals": self.merge_journals,
            "out": str(self.out),
        }


def _grid_section(grid: analysis.BestFitGrid) -> dict:
    tally = {}
    for (yp, y), counts in grid.tally().items():
        tally[f"{yp}|{y}"] = {f.value: n for f, n in sorted(counts.items(), key=lambda kv: kv[0].value)}
    return {
        "level": grid.level,
        "status": grid.status,
        "message": grid.message,
        "n_cells": len(grid.cells),
        "n_ok": len(grid.ok_cells()),
        "cells": [grid.cells[k].to_dict() for k in sorted(grid.cells, key=_cell_key)],
        "tally": tally,
        "winner_shares": grid.winner_shares(),
        "exponent_summary": {str(d): v for d, v in analysis.exponent_summary(grid).items()},
    }


def _cell_key(k):
    yp, y, d = k
    return (yp, y, "" if d is None else d)


def _alpha_stats(grid: analysis.BestFitGrid) -> dict:
    summary = analysis.exponent_summary(grid)
    means = [v["mean"] for v in summary.values()]
    alphas = [c.ple_alpha for c in grid.ok_cells() if c.ple_alpha is not None and np.isfinite(c.ple_alpha)]
    return {
        "ple_alpha_range": [float(min(alphas)), float(max(alphas))] if alphas else None,
        "ple_alpha_mean": float(np.mean(alphas)) if alphas else None,
        "ple_alpha_std": float(np.std(alphas)) if alphas else None,
        # spread of the per-offset means: how much the exponent drifts with age
        "offset_mean_std": float(np.std(means)) if means else None,
    }


def run_pipeline(opts: PipelineOptions, config: Optional[RunConfig] = None) -> dict:
    """Run the whole analysis and write the bundle into ``opts.out``.

    Returns the report dictionary (also written as ``report.json``).
    Raises :class:`~citedist.corpus.CorpusError` when inputs are unreadable.
    """
    config = config or RunConfig("pipeline", opts.to_dict())
    out = Path(opts.out)
    out.mkdir(parents=True, exist_ok=True)
    levels = opts.levels()

    ingest = IngestConfig(window=tuple(opts.window), classification_path=opts.classification,
                          merge_journals=opts.merge_journals)
    records, table, ingest_report = load_corpus(opts.articles, opts.citations, ingest)
    log.info("loaded %d articles, %d citation cells", len(records), len(table))

    measures: dict = {"raw": table}
    rescaled = None
    if opts.normalize:
        rescaled = normalize(table, cohorts(records))
        measures["normalized"] = rescaled
        write_rescaled(rescaled, out / "rescaled.csv", out / "rescaled_exclusions.csv", header_comment=config.header())

    grids: dict = {}
    for measure, values in measures.items():
        for level in levels:
            log.info("best-fit grid: %s, level=%s", measure, level)
            grids[(measure, level)] = analysis.best_fit_grid(
                values, records, level=level, x_min=opts.x_min,
                tail_min=opts.tail_min, alpha_level=opts.alpha_level,
            )

    jm = analysis.journal_mean_distribution(table, records)

    pub_years = sorted({r.year for r in records})
    correlations: dict = {}
    for mode in measures:
        correlations[mode] = [
            analysis.correlation_matrix(table, records, yp, mode=mode, rescaled=rescaled).to_dict()
            for yp in pub_years
        ]

    summary: dict = {}
    for measure in measures:
        summary[measure] = {
            "winner_shares": {
                lvl: (grids[(measure, lvl)].winner_shares() if (measure, lvl) in grids else None)
                for lvl in ("none", "area", "category")
            },
            "forced_ple": _alpha_stats(grids[(measure, "none")]),
        }

    report = {
        "ingest": ingest_report.to_dict(),
        "n_articles": len(records),
        "n_citation_cells": len(table),
        "summary": summary,
        "grids": {m: {lvl: _grid_section(grids[(m, lvl)]) for lvl in levels} for m in measures},
        "journal_means": {"values": jm["values"], "pdf": jm["pdf"], "ccdf": jm["ccdf"]},
        "correlations": correlations,
    }
    if rescaled is not None:
        report["rescale"] = {
            "n_scores": len(rescaled),
            "n_excluded": len(rescaled.excluded),
            "singleton_cohorts": [list(c) for c in rescaled.singleton_cohorts],
        }
    write_json(out / "report.json", report, config)
    _write_series(out, grids, jm, correlations, config)
    return report


def _write_series(out: Path, grids: dict, jm: dict, correlations: dict, config: RunConfig) -> None:
    cell_rows, tally_rows, expo_rows = [], [], []
    for (measure, level), grid in sorted(grids.items()):
        for k in sorted(grid.cells, key=_cell_key):
            c = grid.cells[k]
            cell_rows.append([measure, level, c.publication_year, c.cited_year, c.offset, c.discipline or "",
                              c.status, c.n_values, c.winner, c.ple_alpha, c.n_tail, c.x_min])
        for (yp, y), counts in grid.tally().items():
            for fam in sorted(counts, key=lambda f: f.value):
                tally_rows.append([measure, level, yp, y, fam, counts[fam]])
        for d, v in analysis.exponent_summary(grid).items():
            expo_rows.append([measure, level, d, v["mean"], v["std"], v["n_cells"]])
    write_csv(out / "best_fit_grid.csv",
              ["measure", "level", "publication_year", "cited_year", "offset", "discipline", "status",
               "n_values", "winner", "ple_alpha", "n_tail", "x_min"], cell_rows, config)
    write_csv(out / "best_fit_tally.csv", ["measure", "level", "publication_year", "cited_year", "family", "count"],
              tally_rows, config)
    write_csv(out / "exponent_summary.csv", ["measure", "level", "offset", "mean", "std_population", "n_cells"],
              expo_rows, config)
    write_csv(out / "journal_means.csv", ["journal_id", "mean_yearly_citations"],
              sorted(jm["values"].items()), config)
    write_csv(out / "journal_means_pdf.csv", ["bin_lo", "bin_hi", "density"], jm["pdf"], config)
    write_csv(out / "journal_means_ccdf.csv", ["x", "ccdf"], jm["ccdf"], config)
    for mode, mats in correlations.items():
        rows = []
        for m in mats:
            offs = m["offsets"]
            for i, a in enumerate(offs):
                for j, b in enumerate(offs):
                    rows.append([m["publication_year"], a, b, m["r"][i][j], m["n_pairs"][i][j]])
        write_csv(out / f"correlation_{mode}.csv", ["publication_year", "offset_1", "offset_2", "r", "n_pairs"],
                  rows, config)
