"""Article/journal/citation records and desk-scale ingestion.

File formats
------------
articles   JSON-lines (``.jsonl``/``.json``) or CSV with keys ``article_id,
           journal_id, journal_title, year, categories``; categories are
           ``"area/category"`` strings (a JSON list, or pipe-separated in CSV).
citations  CSV ``article_id,cited_year,count``.
classification (optional)  CSV ``journal_id,area,category``; when given it
           replaces the per-article categories of every listed journal and
           clears them for unlisted journals.
"""
from __future__ import annotations

import csv
import json
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

log = logging.getLogger(__name__)

DEFAULT_WINDOW = (1996, 2017)


class CorpusError(Exception):
    """Unreadable input file."""


@dataclass(frozen=True)
class ArticleRecord:
    article_id: str
    journal_id: str
    journal_title: str
    year: int
    classification: tuple[tuple[str, str], ...] = ()

    def disciplines(self, level: str) -> set[str]:
        if level == "area":
            return {a for a, _ in self.classification}
        if level == "category":
            return {c for _, c in self.classification}
        return set()


@dataclass
class CitationTable:
    """Sparse map ``(article_id, cited_year) -> count``; absent means zero."""

    counts: dict = field(default_factory=dict)

    def get(self, article_id: str, year: int) -> int:
        return self.counts.get((article_id, year), 0)

    def years(self) -> list[int]:
        return sorted({y for _, y in self.counts})

    def restrict(self, article_ids) -> "CitationTable":
        keep = set(article_ids)
        return CitationTable({k: v for k, v in self.counts.items() if k[0] in keep})

    def __len__(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class JournalCohort:
    journal_id: str
    publication_year: int
    members: frozenset

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class IngestConfig:
    window: tuple[int, int] = DEFAULT_WINDOW
    classification_path: Optional[Path] = None
    merge_journals: bool = True


@dataclass
class IngestReport:
    loaded: int = 0
    invalid_timestamp: int = 0
    orphan_citation: int = 0
    citation_before_publication: int = 0
    merged_journals: int = 0
    citations_loaded: int = 0
    parse_errors: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "loaded": self.loaded,
            "invalid_timestamp": self.invalid_timestamp,
            "orphan_citation": self.orphan_citation,
            "citation_before_publication": self.citation_before_publication,
            "merged_journals": self.merged_journals,
            "citations_loaded": self.citations_loaded,
            "parse_errors": list(self.parse_errors),
        }


def _parse_categories(raw) -> tuple[tuple[str, str], ...]:
    if raw is None or raw == "":
        return ()
    if isinstance(raw, str):
        items = [s for s in raw.split("|") if s.strip()]
    else:
        items = list(raw)
    out = []
    for item in items:
        area, sep, cat = str(item).partition("/")
        if not sep:
            raise ValueError(f"category {item!r} is not 'area/category'")
        out.append((area.strip(), cat.strip()))
    return tuple(sorted(set(out)))


def _article_from_row(row: dict) -> ArticleRecord:
    missing = [k for k in ("article_id", "journal_id", "year") if row.get(k) in (None, "")]
    if missing:
        raise ValueError(f"missing field(s): {', '.join(missing)}")
    year = int(str(row["year"]).strip())
    return ArticleRecord(
        article_id=str(row["article_id"]).strip(),
        journal_id=str(row["journal_id"]).strip(),
        journal_title=str(row.get("journal_title") or "").strip(),
        year=year,
        classification=_parse_categories(row.get("categories")),
    )


def _read_article_rows(path: Path, report: IngestReport):
    try:
        handle = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    with handle:
        if path.suffix.lower() == ".csv":
            reader = csv.DictReader(handle)
            for lineno, row in enumerate(reader, start=2):
                yield lineno, row
            return
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                report.parse_errors.append(f"{path.name}:{lineno}: invalid JSON ({exc.msg})")
                continue
            if not isinstance(row, dict):
                report.parse_errors.append(f"{path.name}:{lineno}: expected a JSON object")
                continue
            yield lineno, row


def read_articles(path, report: Optional[IngestReport] = None) -> list[ArticleRecord]:
    path = Path(path)
    report = report if report is not None else IngestReport()
    records = []
    seen = set()
    for lineno, row in _read_article_rows(path, report):
        try:
            rec = _article_from_row(row)
        except (ValueError, TypeError) as exc:
            report.parse_errors.append(f"{path.name}:{lineno}: {exc}")
            continue
        if rec.article_id in seen:
            report.parse_errors.append(f"{path.name}:{lineno}: duplicate article_id {rec.article_id!r}")
            continue
        seen.add(rec.article_id)
        records.append(rec)
    return records


def read_citations(path, report: Optional[IngestReport] = None) -> list[tuple[str, int, int, int]]:
    """Rows as ``(article_id, cited_year, count, lineno)``."""
    path = Path(path)
    report = report if report is not None else IngestReport()
    rows = []
    try:
        handle = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        need = {"article_id", "cited_year", "count"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise CorpusError(f"{path}: header must contain article_id,cited_year,count")
        for lineno, row in enumerate(reader, start=2):
            try:
                count = int(row["count"])
                year = int(row["cited_year"])
                aid = str(row["article_id"]).strip()
                if not aid:
                    raise ValueError("empty article_id")
                if count < 0:
                    raise ValueError("negative count")
            except (TypeError, ValueError) as exc:
                report.parse_errors.append(f"{path.name}:{lineno}: {exc}")
                continue
            rows.append((aid, year, count, lineno))
    return rows


def read_classification(path) -> dict[str, tuple[tuple[str, str], ...]]:
    path = Path(path)
    out: dict[str, set] = defaultdict(set)
    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            for row in csv.DictReader(handle):
                out[str(row["journal_id"]).strip()].add((str(row["area"]).strip(), str(row["category"]).strip()))
    except (OSError, KeyError) as exc:
        raise CorpusError(f"cannot read classification map {path}: {exc}") from exc
    return {k: tuple(sorted(v)) for k, v in out.items()}


def apply_classification(records: Iterable[ArticleRecord], cmap: dict) -> list[ArticleRecord]:
    return [replace(r, classification=cmap.get(r.journal_id, ())) for r in records]


def filter_valid(records: Iterable[ArticleRecord], window=DEFAULT_WINDOW) -> tuple[list[ArticleRecord], int]:
    """Drop records whose publication year is outside ``window`` (inclusive).

    Returns the kept records and the number removed.
    """
    records = list(records)
    lo, hi = window
    kept = [r for r in records if lo <= r.year <= hi]
    return kept, len(records) - len(kept)


def normalize_title(title: str) -> str:
    return re.sub(r"\s+", " ", title).strip().casefold()


def merge_journal_ids(records: Iterable[ArticleRecord]) -> tuple[list[ArticleRecord], dict[str, str]]:
    """Give journals with identical normalised titles one canonical id.

    The canonical id is the smallest id in the group; classifications are
    unioned over the group.  Records with an empty title are never merged.
    Returns the rewritten records and the ``old_id -> canonical_id`` map of
    ids that changed.
    """
    records = list(records)
    ids_by_title: dict[str, set] = defaultdict(set)
    for r in records:
        key = normalize_title(r.journal_title)
        if key:
            ids_by_title[key].add(r.journal_id)
    remap: dict[str, str] = {}
    for ids in ids_by_title.values():
        if len(ids) > 1:
            canon = min(ids)
            for jid in ids:
                if jid != canon:
                    remap[jid] = canon
    if not remap:
        return records, {}
    union: dict[str, set] = defaultdict(set)
    for r in records:
        union[remap.get(r.journal_id, r.journal_id)].update(r.classification)
    merged_ids = set(remap) | set(remap.values())
    out = []
    for r in records:
        jid = remap.get(r.journal_id, r.journal_id)
        if jid in merged_ids:
            r = replace(r, journal_id=jid, classification=tuple(sorted(union[jid])))
        out.append(r)
    return out, remap


def cohorts(records: Iterable[ArticleRecord]) -> dict[tuple[str, int], JournalCohort]:
    """One cohort per ``(journal_id, publication year)``."""
    members: dict[tuple[str, int], set] = defaultdict(set)
    for r in records:
        members[(r.journal_id, r.year)].add(r.article_id)
    return {
        key: JournalCohort(key[0], key[1], frozenset(ids))
        for key, ids in sorted(members.items())
    }


def build_citation_table(
    rows, records: Iterable[ArticleRecord], report: Optional[IngestReport] = None
) -> CitationTable:
    report = report if report is not None else IngestReport()
    year_of = {r.article_id: r.year for r in records}
    counts: dict = {}
    for aid, year, count, _lineno in rows:
        if aid not in year_of:
            report.orphan_citation += 1
            continue
        if year < year_of[aid]:
            report.citation_before_publication += 1
            continue
        counts[(aid, year)] = counts.get((aid, year), 0) + count
    report.citations_loaded = len(counts)
    return CitationTable(counts)


def load_corpus(articles_path, citations_path, config: Optional[IngestConfig] = None):
    """Read, validate and clean a corpus.

    Returns ``(records, citations, report)``.  Malformed rows are skipped
    and listed in ``report.parse_errors`` with their line numbers; only an
    unreadable file raises :class:`CorpusError`.
    """
    config = config or IngestConfig()
    report = IngestReport()
    records = read_articles(articles_path, report)
    records, report.invalid_timestamp = filter_valid(records, config.window)
    if config.classification_path is not None:
        records = apply_classification(records, read_classification(config.classification_path))
    if config.merge_journals:
        records, remap = merge_journal_ids(records)
        report.merged_journals = len(remap)
    report.loaded = len(records)
    table = build_citation_table(read_citations(citations_path, report), records, report)
    for msg in report.parse_errors:
        log.warning(msg)
    return records, table, report
