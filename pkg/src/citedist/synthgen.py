"""Synthetic citation corpora with journal prestige, aging and memory.

Generative model (all logs natural)::

    mu_j        ~ Normal(base_log_mean, journal_mu_spread)          per journal
    p_j,y       prestige path over calendar years: p_j,y0 = mu_j,
                p_j,y+1 = m + rho (p_j,y - m) + sqrt(1 - rho^2) s eta
                (m = base_log_mean, s = journal_mu_spread, rho = persistence)
    A_a,y       = exp(p_j,y + sigma_within * eps_a,y)   eps i.i.d. N(0, 1)
    C_y(a)      ~ Poisson(A_a,y * exp(-aging_rate * (y - y_p)))

The stationary law of p_j,y is the law of mu_j, so pooling a publication
year over journals stacks log-normals with different means.  Prestige is
shared by all articles of a journal and persists year to year; the
article-level term is redrawn each year, so journal-year normalisation
removes the persistent component.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .corpus import ArticleRecord, CitationTable


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class SynthConfig:
    n_journals: int = 50
    articles_per_cohort: int = 20
    years: tuple = (2000, 2004)
    journal_mu_spread: float = 1.0
    sigma_within: float = 0.5
    prestige_persistence: float = 0.9
    aging_rate: float = 0.1
    base_log_mean: float = math.log(10.0)
    n_areas: int = 3
    categories_per_area: int = 2
    seed: int = 42

    def __post_init__(self):
        try:
            self.years = tuple(int(y) for y in self.years)
        except (TypeError, ValueError):
            raise ConfigError("years", f"must be two integers, got {self.years!r}") from None

    def validate(self) -> "SynthConfig":
        for name in ("n_journals", "articles_per_cohort", "n_areas", "categories_per_area"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise ConfigError(name, f"must be an integer >= 1, got {v!r}")
        if len(self.years) != 2 or self.years[0] > self.years[1]:
            raise ConfigError("years", f"must be [y_lo, y_hi] with y_lo <= y_hi, got {list(self.years)}")
        for name in ("journal_mu_spread", "sigma_within", "aging_rate"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ConfigError(name, f"must be a finite number >= 0, got {v!r}")
        if not (isinstance(self.prestige_persistence, (int, float)) and 0 <= self.prestige_persistence <= 1):
            raise ConfigError("prestige_persistence", f"must lie in [0, 1], got {self.prestige_persistence!r}")
        if not (isinstance(self.base_log_mean, (int, float)) and math.isfinite(self.base_log_mean)):
            raise ConfigError("base_log_mean", "must be finite")
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool):
            raise ConfigError("seed", f"must be an integer, got {self.seed!r}")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["years"] = list(self.years)
        return d

    @classmethod
    def from_dict(cls, payload: dict) -> "SynthConfig":
        known = {f.name for f in fields(cls)}
        extra = sorted(set(payload) - known)
        if extra:
            raise ConfigError(extra[0], "unknown field")
        return cls(**payload).validate()


@dataclass
class GroundTruth:
    journal_mu: dict
    journal_prestige: dict  # journal_id -> {year: log prestige}
    article_latent: dict  # article_id -> attractiveness in its publication year
    config: dict

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "journal_mu": self.journal_mu,
            "journal_prestige": {j: {str(y): v for y, v in p.items()} for j, p in self.journal_prestige.items()},
            "article_latent": self.article_latent,
        }


def _categories(j: int, cfg: SynthConfig) -> tuple[tuple[str, str], ...]:
    area = j % cfg.n_areas
    cat = (j // cfg.n_areas) % cfg.categories_per_area
    return ((f"Area{area}", f"Cat{area}.{cat}"),)


def generate(config: SynthConfig) -> tuple[list[ArticleRecord], CitationTable, GroundTruth]:
    cfg = config.validate()
    y_lo, y_hi = cfg.years
    cal_years = np.arange(y_lo, y_hi + 1)
    n_years = cal_years.size
    rho = float(cfg.prestige_persistence)
    spread = float(cfg.journal_mu_spread)
    m0 = float(cfg.base_log_mean)
    streams = np.random.SeedSequence(int(cfg.seed)).spawn(cfg.n_journals)

    records: list[ArticleRecord] = []
    counts: dict = {}
    mu_out: dict = {}
    prestige_out: dict = {}
    latent_out: dict = {}
    width = max(4, len(str(cfg.n_journals - 1)))
    for j in range(cfg.n_journals):
        rng = np.random.default_rng(streams[j])
        jid = f"J{j:0{width}d}"
        mu_j = m0 + spread * rng.standard_normal()
        path = np.empty(n_years)
        path[0] = mu_j
        shocks = rng.standard_normal(n_years)
        for t in range(1, n_years):
            path[t] = m0 + rho * (path[t - 1] - m0) + math.sqrt(1.0 - rho * rho) * spread * shocks[t]
        mu_out[jid] = float(mu_j)
        prestige_out[jid] = {int(y): float(p) for y, p in zip(cal_years, path)}
        cats = _categories(j, cfg)
        k = cfg.articles_per_cohort
        for ip, yp in enumerate(cal_years):
            n_cited = n_years - ip
            eps = rng.standard_normal((k, n_cited))
            ages = np.arange(n_cited)
            log_rate = path[ip:][None, :] + cfg.sigma_within * eps - cfg.aging_rate * ages[None, :]
            draws = rng.poisson(np.exp(log_rate))
            for i in range(k):
                aid = f"{jid}-{int(yp)}-{i:04d}"
                records.append(ArticleRecord(aid, jid, f"Synthetic Journal {j}", int(yp), cats))
                latent_out[aid] = float(math.exp(path[ip] + cfg.sigma_within * eps[i, 0]))
                for t in range(n_cited):
                    counts[(aid, int(yp) + t)] = int(draws[i, t])
    truth = GroundTruth(mu_out, prestige_out, latent_out, cfg.to_dict())
    return records, CitationTable(counts), truth


def write_corpus(records, citations: CitationTable, out_dir, truth: Optional[GroundTruth] = None) -> dict:
    """Write ``articles.jsonl``, ``citations.csv`` and ``ground_truth.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"articles": out / "articles.jsonl", "citations": out / "citations.csv"}
    with paths["articles"].open("w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            row = {
                "article_id": r.article_id,
                "journal_id": r.journal_id,
                "journal_title": r.journal_title,
                "year": r.year,
                "categories": [f"{a}/{c}" for a, c in r.classification],
            }
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    with paths["citations"].open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["article_id", "cited_year", "count"])
        for (aid, y), c in sorted(citations.counts.items()):
            w.writerow([aid, y, c])
    if truth is not None:
        paths["ground_truth"] = out / "ground_truth.json"
        paths["ground_truth"].write_text(json.dumps(truth.to_dict(), sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return paths
