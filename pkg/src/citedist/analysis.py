"""Analysis surfaces over a cleaned corpus.

* best-fit grids over (publication year, cited year[, discipline]) with the
  winner tally per (publication year, cited year);
* forced-PLE exponent summaries by years since publication;
* per-journal mean yearly citations with PDF/CCDF series;
* Pearson correlation between cited years for one publication year.

``values`` arguments accept either a :class:`CitationTable` (raw counts) or
a :class:`RescaledTable` (normalised scores).
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .corpus import ArticleRecord, CitationTable
from .distributions import ModelFamily
from .fitting import (
    DEFAULT_ALPHA_LEVEL,
    DEFAULT_TAIL_MIN,
    DegenerateDataError,
    InsufficientTailError,
    SelectionError,
    select_best,
)
from .rescale import RescaledTable

LEVELS = ("none", "area", "category")
MIN_PAIRS = 10


def _value_map(values) -> dict:
    if isinstance(values, CitationTable):
        return values.counts
    if isinstance(values, RescaledTable):
        return values.scores
    if isinstance(values, dict):
        return values
    raise TypeError(f"unsupported values type {type(values).__name__}")


def _years_of(vmap: dict) -> list[int]:
    return sorted({y for _, y in vmap})


def _articles_by_year(records: Iterable[ArticleRecord]) -> dict[int, list[ArticleRecord]]:
    out: dict[int, list] = defaultdict(list)
    for r in records:
        out[r.year].append(r)
    for v in out.values():
        v.sort(key=lambda r: r.article_id)
    return dict(out)


def slice_values(values, records, publication_year: int, cited_year: int,
                 discipline: Optional[str] = None, level: str = "none") -> np.ndarray:
    """Positive values of one (publication year, cited year) slice.

    Zeros and missing entries are omitted; ``discipline`` restricts to
    articles carrying that label at ``level``.  Empty slices come back as an
    empty array.
    """
    if cited_year < publication_year:
        raise ValueError("cited_year precedes publication_year")
    vmap = _value_map(values)
    out = []
    for r in sorted((r for r in records if r.year == publication_year), key=lambda r: r.article_id):
        if discipline is not None and discipline not in r.disciplines(level):
            continue
        v = vmap.get((r.article_id, cited_year))
        if v is not None and v > 0:
            out.append(float(v))
    return np.asarray(out, dtype=float)


# --------------------------------------------------------------------------
# best-fit grid


@dataclass
class GridCell:
    publication_year: int
    cited_year: int
    discipline: Optional[str]
    status: str  # ok | insufficient | failed
    n_values: int
    winner: Optional[ModelFamily] = None
    ple_alpha: Optional[float] = None
    n_tail: Optional[int] = None
    x_min: Optional[float] = None
    message: str = ""

    @property
    def offset(self) -> int:
        return self.cited_year - self.publication_year

    def to_dict(self) -> dict:
        return {
            "publication_year": self.publication_year,
            "cited_year": self.cited_year,
            "offset": self.offset,
            "discipline": self.discipline,
            "status": self.status,
            "n_values": self.n_values,
            "winner": self.winner.value if self.winner is not None else None,
            "ple_alpha": self.ple_alpha,
            "n_tail": self.n_tail,
            "x_min": self.x_min,
            "message": self.message,
        }


@dataclass
class BestFitGrid:
    level: str
    cells: dict = field(default_factory=dict)
    status: str = "ok"
    message: str = ""

    def ok_cells(self) -> list[GridCell]:
        return [c for c in self.cells.values() if c.status == "ok"]

    def tally(self) -> dict:
        """Winner counts per (publication year, cited year) over ok cells."""
        out: dict = defaultdict(Counter)
        for c in self.ok_cells():
            out[(c.publication_year, c.cited_year)][c.winner] += 1
        return {k: dict(v) for k, v in sorted(out.items())}

    def winner_shares(self) -> dict:
        ok = self.ok_cells()
        cnt = Counter(c.winner for c in ok)
        return {f.value: (cnt.get(f, 0) / len(ok) if ok else None) for f in ModelFamily}


def _fit_cell(vals: np.ndarray, key, x_min, tail_min, alpha_level) -> GridCell:
    yp, y, disc = key
    cell = GridCell(yp, y, disc, status="ok", n_values=int(vals.size))
    if vals.size < tail_min:
        cell.status = "insufficient"
        cell.message = f"{vals.size} positive values < tail minimum {tail_min}"
        return cell
    try:
        sel = select_best(vals, x_min=x_min, tail_min=tail_min, alpha_level=alpha_level)
    except InsufficientTailError as exc:
        cell.status, cell.message = "insufficient", str(exc)
        return cell
    except (DegenerateDataError, SelectionError, ValueError) as exc:
        cell.status, cell.message = "failed", str(exc)
        return cell
    cell.winner = sel.best
    cell.ple_alpha = sel.ple_alpha
    cell.n_tail = sel.fits[sel.best].n_tail
    cell.x_min = sel.x_min
    return cell


def best_fit_grid(values, records, level: str = "none", x_min="scan",
                  tail_min: int = DEFAULT_TAIL_MIN, alpha_level: float = DEFAULT_ALPHA_LEVEL) -> BestFitGrid:
    """Run model selection on every slice.

    With ``level`` other than ``"none"`` there is one cell per discipline
    label per (publication year, cited year); articles without a label are
    left out.  Cell failures are recorded as statuses, never raised.
    """
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    records = list(records)
    vmap = _value_map(values)
    grid = BestFitGrid(level=level)
    by_year = _articles_by_year(records)
    cited_years = _years_of(vmap)
    if level != "none":
        labels = sorted({d for r in records for d in r.disciplines(level)})
        if not labels:
            grid.status = "no_classification"
            grid.message = f"no article carries a {level} label; per-discipline analysis skipped"
            return grid
    for yp in sorted(by_year):
        arts = by_year[yp]
        groups: dict[Optional[str], list] = {}
        if level == "none":
            groups[None] = arts
        else:
            for r in arts:
                for d in sorted(r.disciplines(level)):
                    groups.setdefault(d, []).append(r)
        for y in cited_years:
            if y < yp:
                continue
            for disc in sorted(groups, key=lambda d: "" if d is None else d):
                vals = [vmap.get((r.article_id, y)) for r in groups[disc]]
                arr = np.asarray([v for v in vals if v is not None and v > 0], dtype=float)
                key = (yp, y, disc)
                grid.cells[key] = _fit_cell(arr, key, x_min, tail_min, alpha_level)
    return grid


def exponent_summary(grid: BestFitGrid) -> dict[int, dict]:
    """Mean and population std of forced-PLE alpha per years-since-publication."""
    by_offset: dict[int, list] = defaultdict(list)
    for c in grid.ok_cells():
        if c.ple_alpha is not None and math.isfinite(c.ple_alpha):
            by_offset[c.offset].append(c.ple_alpha)
    return {
        d: {"mean": float(np.mean(v)), "std": float(np.std(v)), "n_cells": len(v)}
        for d, v in sorted(by_offset.items())
    }


# --------------------------------------------------------------------------
# journal means


def journal_means(citations: CitationTable, records) -> dict[str, float]:
    """Mean of C_y(a) over each journal's recorded (article, cited year) cells."""
    journal_of = {r.article_id: r.journal_id for r in records}
    sums: dict = defaultdict(float)
    ns: dict = defaultdict(int)
    for (aid, _y), c in citations.counts.items():
        j = journal_of.get(aid)
        if j is None:
            continue
        sums[j] += c
        ns[j] += 1
    return {j: sums[j] / ns[j] for j in sorted(ns)}


def ccdf_series(values) -> list[tuple[float, float]]:
    """``(x, P(X >= x))`` at every distinct value."""
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        return []
    uniq, first = np.unique(x, return_index=True)
    return [(float(u), float((x.size - i) / x.size)) for u, i in zip(uniq, first)]


def ccdf_at(values, x: float) -> float:
    v = np.asarray(values, dtype=float)
    return float(np.mean(v >= x)) if v.size else float("nan")


def pdf_series(values, n_bins: int = 20) -> list[tuple[float, float, float]]:
    """Log-binned density ``(bin_lo, bin_hi, density)`` of positive values."""
    v = np.asarray(values, dtype=float)
    v = v[v > 0]
    if v.size == 0:
        return []
    lo, hi = float(v.min()), float(v.max())
    if hi <= lo:
        return [(lo, hi, float("inf"))]
    edges = np.geomspace(lo, hi, n_bins + 1)
    counts, _ = np.histogram(v, bins=edges)
    dens = counts / (v.size * np.diff(edges))
    return [(float(a), float(b), float(d)) for a, b, d in zip(edges[:-1], edges[1:], dens)]


def journal_mean_distribution(citations: CitationTable, records, n_bins: int = 20) -> dict:
    means = journal_means(citations, records)
    vals = list(means.values())
    return {
        "values": means,
        "pdf": pdf_series(vals, n_bins) if vals else [],
        "ccdf": ccdf_series(vals),
    }


# --------------------------------------------------------------------------
# cited-year correlations


@dataclass
class CorrelationMatrix:
    publication_year: int
    mode: str
    offsets: list
    r: list  # r[i][j], None where undefined
    n_pairs: list

    def to_dict(self) -> dict:
        return {
            "publication_year": self.publication_year,
            "mode": self.mode,
            "offsets": self.offsets,
            "r": self.r,
            "n_pairs": self.n_pairs,
        }

    def value(self, off1: int, off2: int) -> Optional[float]:
        return self.r[self.offsets.index(off1)][self.offsets.index(off2)]


def _pearson(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    xd = x - x.mean()
    yd = y - y.mean()
    sx = math.sqrt(float(np.dot(xd, xd)))
    sy = math.sqrt(float(np.dot(yd, yd)))
    if sx == 0.0 or sy == 0.0:
        return None
    return max(-1.0, min(1.0, float(np.dot(xd, yd)) / (sx * sy)))


def correlation_matrix(citations: CitationTable, records, publication_year: int, mode: str = "raw",
                       rescaled: Optional[RescaledTable] = None, require_cited: bool = True,
                       min_pairs: int = MIN_PAIRS) -> CorrelationMatrix:
    """Pearson r between cited years for articles of one publication year.

    For each pair of cited years only articles with at least one raw
    citation in either year enter (``require_cited``).  In ``normalized``
    mode the same raw-count filter picks the articles and their rescaled
    scores are correlated; articles without a defined score are dropped.
    Cells with fewer than ``min_pairs`` articles or zero variance are None.
    """
    if mode not in ("raw", "normalized"):
        raise ValueError("mode must be 'raw' or 'normalized'")
    if mode == "normalized" and rescaled is None:
        raise ValueError("normalized mode needs a RescaledTable")
    arts = sorted(r.article_id for r in records if r.year == publication_year)
    years = [y for y in citations.years() if y >= publication_year]
    if mode == "normalized":
        years = sorted(set(years) | {y for y in rescaled.years() if y >= publication_year})
    offsets = [y - publication_year for y in years]
    k = len(years)
    raw = np.array([[citations.get(a, y) for y in years] for a in arts], dtype=float).reshape(len(arts), k)
    if mode == "normalized":
        vals = np.array(
            [[np.nan if rescaled.get(a, y) is None else rescaled.get(a, y) for y in years] for a in arts],
            dtype=float,
        ).reshape(len(arts), k)
    else:
        vals = raw
    r = [[None] * k for _ in range(k)]
    n_pairs = [[0] * k for _ in range(k)]
    for i in range(k):
        for j in range(i, k):
            mask = np.ones(len(arts), dtype=bool)
            if require_cited:
                mask &= (raw[:, i] >= 1) | (raw[:, j] >= 1)
            mask &= np.isfinite(vals[:, i]) & np.isfinite(vals[:, j])
            n = int(mask.sum())
            n_pairs[i][j] = n_pairs[j][i] = n
            if n < min_pairs:
                continue
            rv = _pearson(vals[mask, i], vals[mask, j])
            if rv is not None and i == j:
                rv = 1.0
            r[i][j] = r[j][i] = rv
    return CorrelationMatrix(publication_year, mode, offsets, r, n_pairs)
