"""Journal- and year-normalised citation scores.

Each yearly count is divided by the mean count, in the same cited year, of
the article's cohort (same journal, same publication year).  Uncited cohort
members count as zeros in the mean.  Cohort-years whose mean is zero have
no defined score and are listed in ``RescaledTable.excluded``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from .corpus import CitationTable, JournalCohort


class MissingCohortError(KeyError):
    pass


@dataclass
class RescaledTable:
    scores: dict = field(default_factory=dict)
    excluded: set = field(default_factory=set)
    singleton_cohorts: list = field(default_factory=list)

    def get(self, article_id: str, year: int) -> Optional[float]:
        return self.scores.get((article_id, year))

    def years(self) -> list[int]:
        return sorted({y for _, y in self.scores})

    def __len__(self) -> int:
        return len(self.scores)


def cohort_mean(cohort: JournalCohort, year: int, citations: CitationTable) -> float:
    if cohort.size == 0:
        raise ValueError("empty cohort")
    total = sum(citations.get(a, year) for a in cohort.members)
    return total / cohort.size


def _as_list(cohorts) -> list[JournalCohort]:
    if isinstance(cohorts, Mapping):
        return list(cohorts.values())
    return list(cohorts)


def normalize(
    citations: CitationTable,
    cohorts: Union[Mapping, Iterable[JournalCohort]],
    years: Optional[Iterable[int]] = None,
) -> RescaledTable:
    """Rescale every ``(article, cited year)`` of every cohort.

    ``years`` defaults to the cited years present in ``citations``; each
    cohort is scored for those years not before its publication year.
    Scores are ``C * N / sum(C)`` so integer rescaling of a cohort-year
    leaves them bit-identical.
    """
    cohorts = _as_list(cohorts)
    member_of = {a for c in cohorts for a in c.members}
    unknown = sorted({a for a, _ in citations.counts} - member_of)
    if unknown:
        raise MissingCohortError(f"{len(unknown)} cited article(s) have no cohort, e.g. {unknown[0]!r}")
    all_years = sorted(set(years) if years is not None else set(citations.years()))

    out = RescaledTable()
    for cohort in sorted(cohorts, key=lambda c: (c.journal_id, c.publication_year)):
        members = sorted(cohort.members)
        n = len(members)
        if n == 1:
            out.singleton_cohorts.append((cohort.journal_id, cohort.publication_year))
        for y in all_years:
            if y < cohort.publication_year:
                continue
            vals = [citations.get(a, y) for a in members]
            total = sum(vals)
            if total == 0:
                out.excluded.update((a, y) for a in members)
                continue
            for a, c in zip(members, vals):
                out.scores[(a, y)] = c * n / total
    return out


def write_rescaled(table: RescaledTable, path, exclusions_path=None, header_comment: Optional[str] = None) -> None:
    """CSV ``article_id,cited_year,score`` plus an optional exclusions CSV."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["article_id", "cited_year", "score"])
        for (aid, y), s in sorted(table.scores.items()):
            w.writerow([aid, y, repr(float(s))])
    if exclusions_path is not None:
        with Path(exclusions_path).open("w", encoding="utf-8", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["article_id", "cited_year"])
            for aid, y in sorted(table.excluded):
                w.writerow([aid, y])
