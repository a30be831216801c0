import json
import math
from collections import defaultdict

import numpy as np
import pytest

from citedist.analysis import correlation_matrix, journal_means
from citedist.corpus import cohorts, load_corpus
from citedist.rescale import normalize
from citedist.synthgen import ConfigError, SynthConfig, generate, write_corpus


def test_reproducible():
    cfg = SynthConfig(n_journals=8, articles_per_cohort=5, seed=3)
    a = generate(cfg)
    b = generate(SynthConfig(n_journals=8, articles_per_cohort=5, seed=3))
    assert a[0] == b[0]
    assert a[1].counts == b[1].counts
    assert a[2].to_dict() == b[2].to_dict()
    c = generate(SynthConfig(n_journals=8, articles_per_cohort=5, seed=4))
    assert c[1].counts != a[1].counts


def test_journal_streams_independent_of_count():
    # journal j's data does not depend on how many journals follow it
    small = generate(SynthConfig(n_journals=3, seed=11))
    big = generate(SynthConfig(n_journals=6, seed=11))
    for k, v in small[1].counts.items():
        assert big[1].counts[k] == v


def test_shape_of_output():
    cfg = SynthConfig(n_journals=4, articles_per_cohort=3, years=(2000, 2002), seed=1)
    records, table, truth = generate(cfg)
    assert len(records) == 4 * 3 * 3
    assert len(cohorts(records)) == 12
    # every (article, cited year >= publication) cell is present, zeros included
    assert len(table) == sum(2002 - r.year + 1 for r in records)
    year_of = {r.article_id: r.year for r in records}
    assert all(y >= year_of[a] and c >= 0 for (a, y), c in table.counts.items())
    assert set(truth.journal_mu) == {r.journal_id for r in records}
    assert set(truth.article_latent) == {r.article_id for r in records}


def test_singleton_cohorts_normalise_to_one():
    records, table, _ = generate(SynthConfig(n_journals=10, articles_per_cohort=1, seed=2))
    out = normalize(table, cohorts(records))
    assert out.scores and all(v == 1.0 for v in out.scores.values())
    assert all(table.get(a, y) == 0 for a, y in out.excluded)


def test_validation_names_the_field():
    with pytest.raises(ConfigError) as e:
        SynthConfig(n_journals=0).validate()
    assert e.value.field == "n_journals"
    for bad, field in [({"prestige_persistence": 1.5}, "prestige_persistence"),
                       ({"journal_mu_spread": -1.0}, "journal_mu_spread"),
                       ({"years": [2005, 2000]}, "years"),
                       ({"years": "soon"}, "years"),
                       ({"colour": 1}, "colour")]:
        with pytest.raises(ConfigError) as e:
            SynthConfig.from_dict(bad)
        assert e.value.field == field


def test_config_roundtrip():
    cfg = SynthConfig(n_journals=7, years=(1999, 2001))
    assert SynthConfig.from_dict(cfg.to_dict()) == cfg


def test_mu_spread_sample_std():
    _, _, truth = generate(SynthConfig(n_journals=500, articles_per_cohort=1, years=(2000, 2000),
                                       journal_mu_spread=1.5, seed=5))
    mus = np.array(list(truth.journal_mu.values()))
    assert abs(mus.std(ddof=1) - 1.5) < 0.15


def test_normalisation_removes_prestige():
    records, table, truth = generate(SynthConfig(n_journals=200, seed=6))
    raw = journal_means(table, records)
    mu = np.array([truth.journal_mu[j] for j in raw])
    # mu_j lives in log space, so compare with the log of the raw mean
    assert np.corrcoef(mu, np.log(list(raw.values())))[0, 1] > 0.8
    resc = normalize(table, cohorts(records))
    per_j = defaultdict(list)
    journal_of = {r.article_id: r.journal_id for r in records}
    for (a, _y), s in resc.scores.items():
        per_j[journal_of[a]].append(s)
    # every journal's mean score is exactly one, so it cannot track mu_j
    assert all(abs(np.mean(v) - 1.0) < 1e-9 for v in per_j.values())


def test_memory_property():
    cfg = SynthConfig(n_journals=100, articles_per_cohort=20, journal_mu_spread=1.0, sigma_within=0.3,
                      prestige_persistence=0.9, seed=7)
    records, table, _ = generate(cfg)
    resc = normalize(table, cohorts(records))
    raw = correlation_matrix(table, records, 2000, "raw")
    nrm = correlation_matrix(table, records, 2000, "normalized", resc)
    for k in range(len(raw.offsets) - 1):
        assert raw.value(k, k + 1) > 0.5
        assert abs(nrm.value(k, k + 1)) < 0.1


def test_aging_decay():
    cfg = SynthConfig(n_journals=200, aging_rate=0.1, seed=8)
    records, table, _ = generate(cfg)
    year_of = {r.article_id: r.year for r in records}
    journal_of = {r.article_id: r.journal_id for r in records}
    cells = defaultdict(lambda: defaultdict(list))
    for (a, y), c in table.counts.items():
        cells[y - year_of[a]][journal_of[a]].append(c)
    js = sorted(cells[0])
    m0 = np.array([np.mean(cells[0][j]) for j in js])
    for d in range(1, 5):
        md = np.array([np.mean(cells[d][j]) for j in js])
        ratio = md.sum() / m0.sum()
        # jackknife over journals: articles share their journal's prestige
        jk = np.array([(md.sum() - md[i]) / (m0.sum() - m0[i]) for i in range(len(js))])
        se = math.sqrt((len(js) - 1) / len(js) * np.sum((jk - jk.mean()) ** 2))
        assert abs(ratio - math.exp(-0.1 * d)) < 3 * se


def test_write_corpus_roundtrip(tmp_path):
    records, table, truth = generate(SynthConfig(n_journals=5, articles_per_cohort=4, seed=9))
    paths = write_corpus(records, table, tmp_path, truth)
    got_records, got_table, report = load_corpus(paths["articles"], paths["citations"])
    assert sorted(got_records, key=lambda r: r.article_id) == sorted(records, key=lambda r: r.article_id)
    assert got_table.counts == table.counts
    assert report.parse_errors == []
    gt = json.loads(paths["ground_truth"].read_text())
    assert gt["config"] == truth.config and set(gt["journal_mu"]) == set(truth.journal_mu)
