"""Command-line front end: ``citedist {fit,pipeline,simulate,normalize,correlate}``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__, analysis
from .corpus import CorpusError, IngestConfig, cohorts, load_corpus
from .distributions import ModelFamily
from .fitting import (
    DEFAULT_ALPHA_LEVEL,
    DEFAULT_TAIL_MIN,
    DegenerateDataError,
    InsufficientTailError,
    SelectionError,
    fit_mle,
    scan_xmin,
    select_best,
)
from .pipeline import LEVEL_CHOICES, PipelineOptions, run_pipeline
from .report import RunConfig, dumps, write_csv, write_json
from .rescale import normalize, write_rescaled
from .synthgen import ConfigError, SynthConfig, generate, write_corpus

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INSUFFICIENT = 2

log = logging.getLogger("citedist")


class InputError(Exception):
    pass


def _x_min_arg(text: str):
    if text in ("auto", "scan"):
        return "scan"
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a positive number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("x_min must be positive")
    return v


def _fraction(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("must lie in (0, 1)")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def read_values(path, column: Optional[str] = None) -> np.ndarray:
    """Numbers from a one-per-line file, or one column of a CSV.

    ``column`` is a header name or a 0-based index; with a name the first
    line is the header.  Blank lines and ``#`` comments are skipped.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), start=1)
             if ln.strip() and not ln.lstrip().startswith("#")]
    values = []
    if column is None:
        for lineno, ln in lines:
            try:
                values.append(float(ln.strip()))
            except ValueError:
                raise InputError(f"{path}:{lineno}: not a number: {ln.strip()!r}") from None
        return np.asarray(values, dtype=float)
    rows = list(csv.reader([ln for _, ln in lines]))
    linenos = [i for i, _ in lines]
    start = 0
    if column.isdigit():
        idx = int(column)
    else:
        if not rows or column not in rows[0]:
            raise InputError(f"{path}:{linenos[0] if linenos else 1}: no column named {column!r}")
        idx = rows[0].index(column)
        start = 1
    for lineno, row in zip(linenos[start:], rows[start:]):
        if idx >= len(row):
            raise InputError(f"{path}:{lineno}: missing column {column}")
        try:
            values.append(float(row[idx]))
        except ValueError:
            raise InputError(f"{path}:{lineno}: not a number: {row[idx]!r}") from None
    return np.asarray(values, dtype=float)


# --------------------------------------------------------------------------
# commands


def cmd_fit(args) -> int:
    config = RunConfig("fit", {
        "data": args.data, "column": args.column, "family": args.family, "x_min": args.x_min,
        "tail_min": args.tail_min, "alpha_level": args.alpha_level, "out": args.out,
    })
    try:
        data = read_values(args.data, args.column)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        if args.family is None:
            result = select_best(data, x_min=args.x_min, tail_min=args.tail_min, alpha_level=args.alpha_level)
            payload = {"selection": result.to_dict()}
        else:
            fam = ModelFamily(args.family)
            if args.x_min == "scan":
                xm, fit = scan_xmin(fam, data, tail_min=args.tail_min)
            else:
                xm, fit = args.x_min, fit_mle(fam, data, args.x_min, tail_min=args.tail_min)
            payload = {"fit": fit.to_dict(), "x_min": xm}
    except InsufficientTailError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except (DegenerateDataError, SelectionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    payload["n_input"] = int(data.size)
    payload["run_config"] = config.to_dict()
    sys.stdout.write(dumps(payload))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        payload.pop("run_config")
        write_json(out / "fit.json", payload, config)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    opts = PipelineOptions(
        articles=Path(args.articles),
        citations=Path(args.citations),
        out=Path(args.out),
        classification=Path(args.classification) if args.classification else None,
        normalize=args.normalize,
        level=args.level,
        window=tuple(args.window),
        x_min=args.x_min,
        tail_min=args.tail_min,
        alpha_level=args.alpha_level,
        merge_journals=not args.no_merge,
    )
    options = opts.to_dict()
    options["seed"] = args.seed
    try:
        report = run_pipeline(opts, RunConfig("pipeline", options))
    except CorpusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    ing = report["ingest"]
    print(f"articles: {report['n_articles']}  citation cells: {report['n_citation_cells']}  "
          f"parse errors: {len(ing['parse_errors'])}")
    for measure, s in report["summary"].items():
        shares = s["winner_shares"]["none"] or {}
        top = max(shares, key=lambda k: shares[k] or 0) if shares else None
        print(f"{measure}: top family {top} ({(shares.get(top) or 0):.0%} of cells), "
              f"forced-PLE alpha mean {s['forced_ple']['ple_alpha_mean']}")
    print(f"report written to {Path(args.out) / 'report.json'}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    payload = {}
    if args.config:
        try:
            payload = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
            return EXIT_ERROR
        if not isinstance(payload, dict):
            print("error: config must be a JSON object", file=sys.stderr)
            return EXIT_ERROR
    if args.seed is not None:
        payload["seed"] = args.seed
    try:
        cfg = SynthConfig.from_dict(payload)
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_ERROR
    records, table, truth = generate(cfg)
    paths = write_corpus(records, table, args.out, truth)
    config = RunConfig("simulate", {"config": args.config, "seed": args.seed, "out": args.out,
                                    "synth_config": cfg.to_dict()})
    write_json(Path(args.out) / "run_config.json", {}, config)
    counts = np.fromiter(table.counts.values(), dtype=float)
    mus = np.fromiter(truth.journal_mu.values(), dtype=float)
    print(f"journals: {cfg.n_journals}  articles: {len(records)}  citation cells: {len(table)}")
    print(f"mean count: {counts.mean():.4g}  zero share: {np.mean(counts == 0):.3f}  max: {counts.max():.0f}")
    print(f"journal mu: mean {mus.mean():.4g}  std {mus.std(ddof=1) if mus.size > 1 else 0.0:.4g}")
    for name, p in sorted(paths.items()):
        print(f"{name}: {p}")
    return EXIT_OK


def _load(args):
    ingest = IngestConfig(window=tuple(args.window),
                          classification_path=Path(args.classification) if getattr(args, "classification", None) else None)
    return load_corpus(args.articles, args.citations, ingest)


def cmd_normalize(args) -> int:
    config = RunConfig("normalize", {"articles": args.articles, "citations": args.citations,
                                     "window": list(args.window), "out": args.out})
    try:
        records, table, _ = _load(args)
    except CorpusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table_r = normalize(table, cohorts(records))
    write_rescaled(table_r, out / "rescaled.csv", out / "rescaled_exclusions.csv", header_comment=config.header())
    print(f"scores: {len(table_r)}  excluded: {len(table_r.excluded)}  "
          f"singleton cohorts: {len(table_r.singleton_cohorts)}")
    return EXIT_OK


def cmd_correlate(args) -> int:
    config = RunConfig("correlate", {"articles": args.articles, "citations": args.citations,
                                     "window": list(args.window), "publication_year": args.publication_year,
                                     "mode": args.mode, "no_filter": args.no_filter, "out": args.out})
    try:
        records, table, _ = _load(args)
    except CorpusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    years = sorted({r.year for r in records})
    if args.publication_year is not None:
        if args.publication_year not in years:
            print(f"error: no articles published in {args.publication_year}", file=sys.stderr)
            return EXIT_ERROR
        years = [args.publication_year]
    modes = ["raw", "normalized"] if args.mode == "both" else [args.mode]
    rescaled = normalize(table, cohorts(records)) if "normalized" in modes else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = {}
    for mode in modes:
        mats = [analysis.correlation_matrix(table, records, yp, mode=mode, rescaled=rescaled,
                                            require_cited=not args.no_filter) for yp in years]
        result[mode] = [m.to_dict() for m in mats]
        rows = []
        for m in mats:
            for i, a in enumerate(m.offsets):
                for j, b in enumerate(m.offsets):
                    rows.append([m.publication_year, a, b, m.r[i][j], m.n_pairs[i][j]])
        write_csv(out / f"correlation_{mode}.csv", ["publication_year", "offset_1", "offset_2", "r", "n_pairs"],
                  rows, config)
        for m in mats:
            adj = [m.r[i][i + 1] for i in range(len(m.offsets) - 1)]
            print(f"{mode} y_p={m.publication_year}: adjacent-year r = "
                  + ", ".join("nan" if v is None else f"{v:.3f}" for v in adj))
    write_json(out / "correlations.json", {"correlations": result}, config)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _add_fit_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--x-min", type=_x_min_arg, default="scan",
                   help="'auto' for the KS scan under PLE, or a fixed positive value (default: auto)")
    p.add_argument("--tail-min", type=_positive_int, default=DEFAULT_TAIL_MIN,
                   help=f"minimum observations at or above x_min (default: {DEFAULT_TAIL_MIN})")
    p.add_argument("--alpha-level", type=_fraction, default=DEFAULT_ALPHA_LEVEL,
                   help=f"significance level of the likelihood-ratio tests (default: {DEFAULT_ALPHA_LEVEL})")


def _add_corpus_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--articles", required=True, help="articles file (.jsonl or .csv)")
    p.add_argument("--citations", required=True, help="citations CSV: article_id,cited_year,count")
    p.add_argument("--window", type=int, nargs=2, metavar=("LO", "HI"), default=[1996, 2017],
                   help="valid publication years, inclusive (default: 1996 2017)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="citedist", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one family or select the best of six")
    p.add_argument("data", help="one value per line, or CSV with --column")
    p.add_argument("--column", help="CSV column name or 0-based index")
    p.add_argument("--family", choices=[f.value for f in ModelFamily], help="fit only this family")
    p.add_argument("--out", help="also write fit.json into this directory")
    _add_fit_options(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("pipeline", help="full analysis of a corpus")
    _add_corpus_options(p)
    p.add_argument("--classification", help="optional CSV journal_id,area,category")
    p.add_argument("--normalize", action="store_true", help="also analyse journal-normalised scores")
    p.add_argument("--level", choices=LEVEL_CHOICES, default="none",
                   help="discipline level for per-discipline grids (default: none)")
    p.add_argument("--no-merge", action="store_true", help="do not merge journals with identical titles")
    p.add_argument("--seed", type=int, default=0, help="recorded in the run config; the analysis is deterministic")
    p.add_argument("--out", required=True, help="output directory")
    _add_fit_options(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("simulate", help="write a synthetic corpus and its ground truth")
    p.add_argument("--config", help="JSON file of generator settings (default settings if omitted)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("normalize", help="write journal-normalised scores")
    _add_corpus_options(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("correlate", help="Pearson matrices between cited years")
    _add_corpus_options(p)
    p.add_argument("--publication-year", type=int, help="only this publication year")
    p.add_argument("--mode", choices=("raw", "normalized", "both"), default="both")
    p.add_argument("--no-filter", action="store_true", help="keep articles uncited in both years")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_correlate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
