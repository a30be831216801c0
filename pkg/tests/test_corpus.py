import json

import pytest

from citedist.corpus import (
    ArticleRecord,
    CorpusError,
    IngestConfig,
    cohorts,
    filter_valid,
    load_corpus,
    merge_journal_ids,
    normalize_title,
)


def _write_articles(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")


def _write_citations(path, rows, header="article_id,cited_year,count"):
    path.write_text(header + "\n" + "".join(f"{a},{y},{c}\n" for a, y, c in rows), encoding="utf-8")


@pytest.fixture
def small_corpus(tmp_path):
    arts = [
        {"article_id": "a1", "journal_id": "J1", "journal_title": "Physics Letters A", "year": 2000,
         "categories": ["Physics/Condensed"]},
        {"article_id": "a2", "journal_id": "J1", "journal_title": "Physics Letters A", "year": 2000,
         "categories": ["Physics/Condensed"]},
        {"article_id": "a3", "journal_id": "J2", "journal_title": "Cell", "year": 2001, "categories": []},
    ]
    cites = [("a1", 2000, 1), ("a1", 2001, 4), ("a2", 2003, 2), ("a3", 2001, 7)]
    ap, cp = tmp_path / "articles.jsonl", tmp_path / "citations.csv"
    _write_articles(ap, arts)
    _write_citations(cp, cites)
    return ap, cp, cites


def test_roundtrip(small_corpus):
    ap, cp, cites = small_corpus
    records, table, report = load_corpus(ap, cp)
    assert len(records) == 3 and report.loaded == 3
    assert table.counts == {(a, y): c for a, y, c in cites}
    assert table.get("a2", 2000) == 0
    assert report.to_dict()["parse_errors"] == []


def test_invalid_timestamp_and_orphans(tmp_path):
    ap, cp = tmp_path / "a.jsonl", tmp_path / "c.csv"
    _write_articles(ap, [
        {"article_id": "old", "journal_id": "J", "journal_title": "T", "year": 1990},
        {"article_id": "new", "journal_id": "J", "journal_title": "T", "year": 2005},
    ])
    _write_citations(cp, [("old", 2000, 3), ("ghost", 2006, 1), ("new", 2004, 2), ("new", 2006, 5)])
    records, table, report = load_corpus(ap, cp)
    assert [r.article_id for r in records] == ["new"]
    assert report.invalid_timestamp == 1
    # citations of a filtered article are orphans too: nothing survives for it
    assert report.orphan_citation == 2
    assert report.citation_before_publication == 1
    assert table.counts == {("new", 2006): 5}


def test_parse_errors_have_line_numbers(tmp_path):
    ap, cp = tmp_path / "a.jsonl", tmp_path / "c.csv"
    ap.write_text('{"article_id": "x", "journal_id": "J", "year": 2000}\nnot json\n'
                  '{"article_id": "y", "journal_id": "J", "year": "soon"}\n', encoding="utf-8")
    _write_citations(cp, [("x", 2000, "three")])
    records, table, report = load_corpus(ap, cp)
    assert len(records) == 1
    errs = report.parse_errors
    assert any(e.startswith("a.jsonl:2:") for e in errs)
    assert any(e.startswith("a.jsonl:3:") for e in errs)
    assert any(e.startswith("c.csv:2:") for e in errs)


def test_unreadable_files(tmp_path):
    with pytest.raises(CorpusError):
        load_corpus(tmp_path / "missing.jsonl", tmp_path / "missing.csv")
    ap = tmp_path / "a.jsonl"
    _write_articles(ap, [])
    bad = tmp_path / "c.csv"
    bad.write_text("foo,bar\n1,2\n")
    with pytest.raises(CorpusError):
        load_corpus(ap, bad)


def test_csv_articles_with_pipe_categories(tmp_path):
    ap, cp = tmp_path / "a.csv", tmp_path / "c.csv"
    ap.write_text("article_id,journal_id,journal_title,year,categories\n"
                  "p,J9,Nature,2010,Multi/Science|Bio/Genetics\n", encoding="utf-8")
    _write_citations(cp, [])
    records, _, _ = load_corpus(ap, cp)
    assert records[0].classification == (("Bio", "Genetics"), ("Multi", "Science"))
    assert records[0].disciplines("area") == {"Bio", "Multi"}
    assert records[0].disciplines("category") == {"Genetics", "Science"}


def test_classification_map_overrides(tmp_path, small_corpus):
    ap, cp, _ = small_corpus
    cmap = tmp_path / "map.csv"
    cmap.write_text("journal_id,area,category\nJ2,Bio,Cell Biology\n", encoding="utf-8")
    records, _, _ = load_corpus(ap, cp, IngestConfig(classification_path=cmap))
    by_id = {r.article_id: r for r in records}
    assert by_id["a3"].classification == (("Bio", "Cell Biology"),)
    assert by_id["a1"].classification == ()


def test_merge_journal_ids():
    recs = [
        ArticleRecord("a", "J2", "Physics Letters A", 2000, (("P", "X"),)),
        ArticleRecord("b", "J1", "physics  letters a", 2000, (("P", "Y"),)),
        ArticleRecord("c", "J3", "Other", 2000),
    ]
    merged, remap = merge_journal_ids(recs)
    assert remap == {"J2": "J1"}
    assert {r.journal_id for r in merged[:2]} == {"J1"}
    assert merged[0].classification == (("P", "X"), ("P", "Y"))
    assert merged[2] == recs[2]
    again, remap2 = merge_journal_ids(merged)
    assert again == merged and remap2 == {}


def test_merge_distinct_titles_is_noop():
    recs = [ArticleRecord(str(i), f"J{i}", t, 2000) for i, t in enumerate(["A", "B", "C"])]
    assert merge_journal_ids(recs) == (recs, {})


def test_normalize_title():
    assert normalize_title("  Physics\tLetters   A ") == "physics letters a"


def test_filter_valid():
    recs = [ArticleRecord("a", "J", "T", 2016), ArticleRecord("b", "J", "T", 2018)]
    kept, removed = filter_valid(recs, (1996, 2017))
    assert [r.article_id for r in kept] == ["a"] and removed == 1
    assert filter_valid(kept, (1996, 2017)) == (kept, 0)
    assert filter_valid([], (1996, 2017)) == ([], 0)
    kept2, _ = filter_valid(iter(recs), (1996, 2017))
    assert kept2 == kept


def test_cohorts_partition():
    assert len(cohorts([ArticleRecord("a", "J", "T", 2000), ArticleRecord("b", "J", "T", 2000)])) == 1
    assert len(cohorts([ArticleRecord("a", "J", "T", 2000), ArticleRecord("b", "J", "T", 2001)])) == 2
    recs = [ArticleRecord(f"{j}-{y}-{i}", f"J{j}", f"T{j}", y) for j in range(5) for y in (2000, 2001, 2002)
            for i in range(10)]
    cs = cohorts(recs)
    assert len(cs) == 15 and all(c.size == 10 for c in cs.values())
    for j in range(5):
        assert sum(c.size for c in cs.values() if c.journal_id == f"J{j}") == 30
    for (jid, yp), c in cs.items():
        assert all(a.startswith(f"{jid[1:]}-{yp}-") for a in c.members)
