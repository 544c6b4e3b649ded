"""Command line entry point: ``semdiff <subcommand> [--config run.toml] ...``.

Stages exchange data only through files. Each stage writes a manifest
(config hash, input and output digests) next to its output.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .config import ConfigValidationError, RunConfig, load_config
from .corpus import Kind, ParseReport, RecordFilter, XmlMapping, corpus_stats, parse_records, read_records, write_records
from .dynamics import ConfigError, SimulationError, SyntheticConfig, generate_synthetic, write_trajectory
from .estimate import (
    fit_layer,
    histogram2d,
    read_fits,
    success_export,
    write_fits,
    write_rows,
)
from .graph import (
    build_graph,
    classify_treatable,
    flag_ambiguous,
    load_frequent_names,
    read_graph,
    snapshot_stats,
    write_graph,
)
from .lexicon import (
    TopicSetError,
    compute_trend,
    coverage,
    index_records,
    load_topics,
    read_indexed,
    read_trend,
    validate_disjointness,
    write_trend,
)
from .manifest import write_manifest
from .multiplex import align_names, compare_communities, integrate_domains, load_bridge, write_domain, write_report
from .profile import build_profiles, classify_semantically_treatable, read_profiles, write_profiles

logger = logging.getLogger("semdiff")

EXIT_FATAL, EXIT_CONFIG, EXIT_PREREQ = 1, 2, 3


class PrerequisiteError(RuntimeError):
    def __init__(self, path: str, stage: str):
        super().__init__(f"missing upstream artifact {path!r}: run `semdiff {stage}` first")


def _require(path: Optional[str], stage: str, what: str) -> str:
    if not path:
        raise ConfigValidationError(f"no {what} given (flag or config)")
    if not os.path.exists(path):
        raise PrerequisiteError(path, stage)
    return path


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SEMDIFF_WORKERS", "1")))
    except ValueError:
        return 1


def _chash(cfg: Optional[RunConfig]) -> Optional[str]:
    return cfg.digest if cfg else None


# --- stages -----------------------------------------------------------------


def run_ingest(source, out, fmt="jsonl", years=None, kinds=None, layer=None, cfg=None) -> dict:
    if not os.path.exists(source):
        raise FileNotFoundError(f"cannot read source {source!r}")
    year_min, year_max = years if years else (cfg.year_min, cfg.year_max) if cfg else (None, None)
    kinds = kinds if kinds else (cfg.kinds if cfg else None)
    filters = RecordFilter(year_min, year_max, frozenset(Kind.parse(k) for k in kinds) if kinds else None)
    mapping = XmlMapping.from_dict(cfg.xml_mapping) if cfg and cfg.xml_mapping else XmlMapping()
    report = ParseReport()
    seen: set[str] = set()
    n_dup = 0
    kept = []
    with open(source, "rb") as fh:
        for rec in parse_records(fh, fmt, filters, layer=layer, mapping=mapping, report=report):
            if rec.record_id in seen:
                n_dup += 1
                continue
            seen.add(rec.record_id)
            kept.append(rec)
    _mkparent(out)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        write_records(kept, fh)
    stats = corpus_stats(kept)
    params = {
        "format": fmt,
        "year_min": year_min,
        "year_max": year_max,
        "kinds": sorted(k.value for k in filters.kinds) if filters.kinds else None,
        "layer": layer,
        "n_read": report.n_read,
        "n_malformed": report.n_malformed,
        "n_filtered": report.n_filtered,
        "n_duplicate_ids": n_dup,
        "n_papers": stats.n_papers,
        "n_distinct_authors": stats.n_distinct_authors,
        "year_histogram": {str(k): v for k, v in stats.year_histogram.items()},
    }
    write_manifest("ingest", out, [source], [out], _chash(cfg), params)
    return params


def run_index(topics_path, records_path, out, stoplist=None, cfg=None) -> dict:
    _require(records_path, "ingest", "records file")
    topics = load_topics(topics_path, stoplist)
    warnings = [c for c in validate_disjointness(topics) if not c.is_hard]
    for c in warnings:
        logger.warning(
            "topic %s lexeme %r is contained in %s lexeme %r",
            c.topic_a, " ".join(c.lexeme_a), c.topic_b, " ".join(c.lexeme_b),
        )
    indexed = list(index_records(read_records(records_path), topics))
    _mkparent(out)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        for paper in indexed:
            fh.write(paper.to_json() + "\n")
    cov = coverage(indexed)
    params = {
        "n_topics": len(topics),
        "containment_warnings": len(warnings),
        "coverage_overall": cov.overall,
        "coverage_per_year": {str(k): v for k, v in cov.per_year.items()},
    }
    inputs = [p for p in (topics_path, stoplist, records_path) if p]
    write_manifest("index", out, inputs, [out], _chash(cfg), params)
    return params


def run_trend(indexed_path, out, cfg=None) -> dict:
    _require(indexed_path, "index", "indexed papers file")
    trend = compute_trend(read_indexed(indexed_path))
    _mkparent(out)
    write_trend(trend, out)
    params = {"years": trend.years, "indexed_per_year": {str(k): v for k, v in trend.totals.items()}}
    write_manifest("trend", out, [indexed_path], [out], _chash(cfg), params)
    return params


def run_graph(records_path, layer, out, max_authors=None, given=None, family=None, cfg=None) -> dict:
    _require(records_path, "ingest", "records file")
    records = read_records(records_path)
    registry, graph = build_graph(records, layer, max_authors)
    flagged = set()
    if given and family:
        flagged = flag_ambiguous(registry, load_frequent_names(given, family))
    paths = write_graph(registry, graph, out)
    years = sorted({y for ys in registry.years for y in ys})
    snap_rows = []
    for y in years:
        s = snapshot_stats(graph, y)
        snap_rows.append([y, s.n_nodes, s.n_edges, s.largest_component, s.n_isolated, s.n_small_components])
    paths.append(
        write_rows(
            os.path.join(out, "snapshots.csv"),
            ["year", "n_nodes", "n_edges", "largest_component", "n_isolated", "n_small_components"],
            snap_rows,
        )
    )
    treat = classify_treatable(registry)
    params = {
        "layer": layer,
        "max_authors": max_authors,
        "n_members": len(registry),
        "n_edges": graph.n_edges(),
        "n_treatable": treat.n_treatable,
        "n_flagged": len(flagged),
    }
    inputs = [p for p in (records_path, given, family) if p]
    write_manifest("graph", out, inputs, [out], _chash(cfg), params)
    return params


def run_profile(indexed_path, graph_dir, out, mode="cumulative", window=None, cfg=None) -> dict:
    _require(indexed_path, "index", "indexed papers file")
    _require(graph_dir, "graph", "graph directory")
    _require(os.path.join(graph_dir, "registry.csv"), "graph", "registry")
    registry, _ = read_graph(graph_dir)
    profiles = build_profiles(read_indexed(indexed_path), registry, mode, window)
    paths = write_profiles(profiles, out)
    sem = classify_semantically_treatable(profiles, classify_treatable(registry))
    treat = classify_treatable(registry)
    paths.append(
        write_rows(
            os.path.join(out, "semantic_treatability.csv"),
            ["member_id", "treatable", "semantically_treatable", "n_profile_years", "n_indexed_papers"],
            [
                [i, treat.treatable[i], sem.semantically_treatable[i], sem.n_profile_years[i], sem.n_indexed_papers[i]]
                for i in range(len(registry))
            ],
        )
    )
    params = {
        "mode": mode,
        "window": window,
        "n_profiled_members": len(profiles.members),
        "n_semantically_treatable": len(sem.members),
    }
    write_manifest("profile", out, [indexed_path, graph_dir], [out], _chash(cfg), params)
    return params


def run_fit(profiles_dir, graph_dir, trend_path, out, top_k=50, at_year=None, cfg=None) -> dict:
    _require(graph_dir, "graph", "graph directory")
    _require(os.path.join(graph_dir, "registry.csv"), "graph", "registry")
    _require(profiles_dir, "profile", "profiles directory")
    _require(os.path.join(profiles_dir, "profiles.csv"), "profile", "profiles")
    _require(trend_path, "trend", "trend file")
    registry, graph = read_graph(graph_dir)
    profiles = read_profiles(profiles_dir)
    trend = read_trend(trend_path)
    sem = classify_semantically_treatable(profiles, classify_treatable(registry))
    fits = fit_layer(profiles, graph, trend, registry, sem.members, top_k, at_year, _workers())
    _mkparent(out)
    write_fits(fits, out)
    statuses: dict[str, int] = {}
    for f in fits.values():
        statuses[f.status] = statuses.get(f.status, 0) + 1
    params = {
        "top_k": top_k,
        "authority_year": at_year,
        "profile_mode": profiles.mode,
        "profile_window": profiles.window,
        "n_fitted": len(fits),
        "status_counts": dict(sorted(statuses.items())),
    }
    write_manifest("fit", out, [profiles_dir, graph_dir, trend_path], [out], _chash(cfg), params)
    return params


def run_simulate(cfg: RunConfig, out) -> dict:
    if not cfg.simulation:
        raise ConfigValidationError("the config has no [simulation] block")
    if cfg.seed is None:
        raise ConfigValidationError("simulation requires a seed in the config")
    sim = SyntheticConfig.from_dict(cfg.simulation)
    layer = generate_synthetic(sim, cfg.seed)
    paths = write_trajectory(layer, out)
    paths.append(
        write_rows(
            os.path.join(out, "edges.csv"),
            ["member_id_a", "member_id_b", "first_year"],
            layer.graph.edge_rows(),
        )
    )
    params = {"seed": cfg.seed, "n_members": sim.n_members, "n_topics": sim.n_topics, "n_steps": sim.n_steps}
    write_manifest("simulate", out, [], [out], _chash(cfg), params)
    return params


def run_compare(
    fits_a_path, fits_b_path, out, layer_a="A", layer_b="B", cfg=None,
    topics_a=None, topics_b=None, bridge=None,
) -> dict:
    _require(fits_a_path, "fit", "fits file for layer A")
    _require(fits_b_path, "fit", "fits file for layer B")
    fits_a, fits_b = read_fits(fits_a_path), read_fits(fits_b_path)
    alignment = align_names(
        {m: f.name for m, f in fits_a.items()},
        {m: f.name for m, f in fits_b.items()},
        {m for m, f in fits_a.items() if f.flagged},
        {m for m, f in fits_b.items() if f.flagged},
        layer_a,
        layer_b,
    )
    report = compare_communities(fits_a, fits_b, alignment)
    write_report(report, out)
    params = {"layer_a": layer_a, "layer_b": layer_b, "n_shared": report.n_shared, "n_collisions": len(report.collisions)}
    inputs = [fits_a_path, fits_b_path]
    if topics_a and topics_b:
        domain = integrate_domains(
            load_topics(topics_a, strict=False),
            load_topics(topics_b, strict=False),
            load_bridge(bridge) if bridge else (),
            layer_a,
            layer_b,
        )
        write_domain(domain, os.path.join(out, "domain.csv"))
        params["n_bridged_topics"] = domain.n_shared
        inputs += [p for p in (topics_a, topics_b, bridge) if p]
    write_manifest("compare", out, inputs, [out], _chash(cfg), params)
    return params


def _layer_report(fits, layer, out_dir, width, top_n) -> list[str]:
    paths = [
        write_rows(
            os.path.join(out_dir, f"{layer}_histogram.csv"),
            ["x_i_bin", "x_is_bin", "count"],
            histogram2d(fits.values(), width),
        )
    ]
    exp = success_export(fits)
    paths.append(
        write_rows(
            os.path.join(out_dir, f"{layer}_authority_success.csv"),
            ["member_id", "name", "authority", "normalized_authority", "x_is", "success", "flagged"],
            [[r[k] for k in ("member_id", "name", "authority", "normalized_authority", "x_is", "success", "flagged")]
             for r in exp.rows],
        )
    )
    good = [fits[m] for m in sorted(fits) if fits[m].fitted]
    paths.append(
        write_rows(
            os.path.join(out_dir, f"{layer}_coauthors_authority.csv"),
            ["member_id", "name", "n_coauthors", "authority", "marker"],
            [[f.member_id, f.name, f.n_coauthors, f.authority, "cross" if f.flagged else "dot"] for f in good],
        )
    )
    top = sorted(good, key=lambda f: (-f.authority, f.name))[:top_n]
    paths.append(
        write_rows(
            os.path.join(out_dir, f"{layer}_top_members.csv"),
            ["name", "x_i_raw", "x_is_raw", "x_i_proj", "x_is_proj", "authority", "papers", "coauthors", "flagged"],
            [[f.name, f.x_raw[0], f.x_raw[1], f.x_proj[0], f.x_proj[1], f.authority, f.success, f.n_coauthors, f.flagged]
             for f in top],
        )
    )
    corr_path = os.path.join(out_dir, f"{layer}_correlations.json")
    with open(corr_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "authority_vs_success": _corr(exp.authority_vs_success),
                "trend_susceptibility_vs_success": _corr(exp.trend_vs_success),
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    paths.append(corr_path)
    return paths


def _corr(c) -> dict:
    return {"value": c.value if c.defined else None, "defined": c.defined, "n": c.n}


def run_report(fits_path, out, fits_b_path=None, layer_a="A", layer_b="B", width=0.05, top_n=10, cfg=None) -> dict:
    _require(fits_path, "fit", "fits file")
    os.makedirs(out, exist_ok=True)
    fits_a = read_fits(fits_path)
    _layer_report(fits_a, layer_a, out, width, top_n)
    inputs = [fits_path]
    params = {"layers": [layer_a], "histogram_bin": width, "top_n": top_n}
    if fits_b_path:
        _require(fits_b_path, "fit", "fits file for layer B")
        fits_b = read_fits(fits_b_path)
        _layer_report(fits_b, layer_b, out, width, top_n)
        alignment = align_names(
            {m: f.name for m, f in fits_a.items()},
            {m: f.name for m, f in fits_b.items()},
            {m for m, f in fits_a.items() if f.flagged},
            {m for m, f in fits_b.items() if f.flagged},
            layer_a,
            layer_b,
        )
        write_report(compare_communities(fits_a, fits_b, alignment), out)
        inputs.append(fits_b_path)
        params["layers"].append(layer_b)
    write_manifest("report", out, inputs, [out], _chash(cfg), params)
    return params


def run_pipeline(cfg: RunConfig, out: Optional[str] = None) -> dict:
    """Every stage for every configured layer, then compare and report."""
    out = out or cfg.path(cfg.output)
    if not cfg.layers:
        raise ConfigValidationError("the config defines no [layers.*]")
    given, family = cfg.path(cfg.given_names), cfg.path(cfg.family_names)
    fits_paths = {}
    for name, src in sorted(cfg.layers.items()):
        d = os.path.join(out, name)
        os.makedirs(d, exist_ok=True)
        records = os.path.join(d, "records.jsonl")
        indexed = os.path.join(d, "indexed.jsonl")
        trend = os.path.join(d, "trend.csv")
        graph = os.path.join(d, "graph")
        profiles = os.path.join(d, "profiles")
        fits = os.path.join(d, "fits.csv")
        years = (cfg.year_min, cfg.year_max)
        run_ingest(cfg.path(src.records), records, src.format, years, cfg.kinds, name, cfg)
        run_index(cfg.path(src.topics), records, indexed, cfg.path(src.stoplist), cfg)
        run_trend(indexed, trend, cfg)
        run_graph(records, name, graph, cfg.max_authors, given, family, cfg)
        run_profile(indexed, graph, profiles, cfg.profile_mode, cfg.profile_window, cfg)
        run_fit(profiles, graph, trend, fits, cfg.top_k, cfg.authority_year, cfg)
        fits_paths[name] = fits
    names = sorted(fits_paths)
    if len(names) == 2:
        a, b = names
        run_compare(
            fits_paths[a], fits_paths[b], os.path.join(out, "compare"), a, b, cfg,
            cfg.path(cfg.layers[a].topics), cfg.path(cfg.layers[b].topics), cfg.path(cfg.bridge),
        )
        run_report(fits_paths[a], os.path.join(out, "report"), fits_paths[b], a, b, cfg.histogram_bin, cfg.top_n, cfg)
    else:
        for name in names:
            run_report(fits_paths[name], os.path.join(out, "report", name), None, name, "B",
                       cfg.histogram_bin, cfg.top_n, cfg)
    return {"output": out, "layers": names}


# --- argument parsing -------------------------------------------------------


def _mkparent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _years(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YEAR_MIN:YEAR_MAX, got {text!r}") from None


def _top_k(text: str) -> int:
    if text.lower() in ("all", "inf", "none"):
        return 0
    k = int(text)
    if k < 0:
        raise argparse.ArgumentTypeError("top-k must be nonnegative (0 means all topics)")
    return k


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semdiff", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"semdiff {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration (TOML)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", parents=[common], help="parse records into the canonical format")
    s.add_argument("source", nargs="?")
    s.add_argument("--format", choices=["jsonl", "xml"])
    s.add_argument("--years", type=_years)
    s.add_argument("--kinds", nargs="*")
    s.add_argument("--layer")
    s.add_argument("-o", "--output", required=True)

    s = sub.add_parser("index", parents=[common], help="index titles against a topic dictionary")
    s.add_argument("--topics")
    s.add_argument("--stoplist")
    s.add_argument("--records", required=True)
    s.add_argument("--layer")
    s.add_argument("-o", "--output", required=True)

    s = sub.add_parser("trend", parents=[common], help="topic counts and trend shares per year")
    s.add_argument("--indexed", required=True)
    s.add_argument("-o", "--output", required=True)

    s = sub.add_parser("graph", parents=[common], help="temporal co-authorship graph of one layer")
    s.add_argument("--records", required=True)
    s.add_argument("--layer", required=True)
    s.add_argument("--max-authors", type=int)
    s.add_argument("--given-names")
    s.add_argument("--family-names")
    s.add_argument("-o", "--output", required=True)

    s = sub.add_parser("profile", parents=[common], help="semantic profiles of members")
    s.add_argument("--indexed", required=True)
    s.add_argument("--graph", required=True)
    s.add_argument("--mode", choices=["cumulative", "windowed"])
    s.add_argument("--window", type=int)
    s.add_argument("-o", "--output", required=True)

    s = sub.add_parser("fit", parents=[common], help="fit susceptibilities and authorities")
    s.add_argument("--profiles", required=True)
    s.add_argument("--graph", required=True)
    s.add_argument("--trend", required=True)
    s.add_argument("--top-k", type=_top_k)
    s.add_argument("--authority-year", type=int)
    s.add_argument("-o", "--output", required=True)

    s = sub.add_parser("simulate", parents=[common], help="generate a synthetic layer")
    s.add_argument("-o", "--output", required=True)

    s = sub.add_parser("compare", parents=[common], help="compare two layers' fits")
    s.add_argument("--fits-a", required=True)
    s.add_argument("--fits-b", required=True)
    s.add_argument("--layer-a", default="A")
    s.add_argument("--layer-b", default="B")
    s.add_argument("--topics-a")
    s.add_argument("--topics-b")
    s.add_argument("--bridge", help="CSV of topic_id_a,topic_id_b pairs naming the same interest")
    s.add_argument("-o", "--output", required=True)

    s = sub.add_parser("report", parents=[common], help="plot-ready tables from fits")
    s.add_argument("--fits", required=True)
    s.add_argument("--fits-b")
    s.add_argument("--layer-a", default="A")
    s.add_argument("--layer-b", default="B")
    s.add_argument("--bin", type=float)
    s.add_argument("--top-n", type=int)
    s.add_argument("-o", "--output", required=True)

    s = sub.add_parser("pipeline", parents=[common], help="run every stage from a config")
    s.add_argument("-o", "--output")
    return p


def _layer_source(cfg, layer):
    if cfg is None or not cfg.layers:
        return None
    if layer is None:
        if len(cfg.layers) == 1:
            return next(iter(cfg.layers.values()))
        return None
    return cfg.layers.get(layer)


def dispatch(args, cfg: Optional[RunConfig]) -> dict:
    cmd = args.command
    if cmd == "ingest":
        src = _layer_source(cfg, args.layer)
        source = args.source or (cfg.path(src.records) if src else None)
        if not source:
            raise ConfigValidationError("no input source given (argument or [layers.*].records)")
        fmt = args.format or (src.format if src else "jsonl")
        return run_ingest(source, args.output, fmt, args.years, args.kinds, args.layer, cfg)
    if cmd == "index":
        src = _layer_source(cfg, args.layer)
        topics = args.topics or (cfg.path(src.topics) if src else None)
        if not topics:
            raise ConfigValidationError("no topic dictionary given (--topics or [layers.*].topics)")
        stop = args.stoplist or (cfg.path(src.stoplist) if src else None)
        return run_index(topics, args.records, args.output, stop, cfg)
    if cmd == "trend":
        return run_trend(args.indexed, args.output, cfg)
    if cmd == "graph":
        given = args.given_names or (cfg.path(cfg.given_names) if cfg else None)
        family = args.family_names or (cfg.path(cfg.family_names) if cfg else None)
        max_authors = args.max_authors if args.max_authors is not None else (cfg.max_authors if cfg else None)
        return run_graph(args.records, args.layer, args.output, max_authors, given, family, cfg)
    if cmd == "profile":
        mode = args.mode or (cfg.profile_mode if cfg else "cumulative")
        window = args.window if args.window is not None else (cfg.profile_window if cfg else None)
        return run_profile(args.indexed, args.graph, args.output, mode, window, cfg)
    if cmd == "fit":
        top_k = args.top_k if args.top_k is not None else (cfg.top_k if cfg else 50)
        top_k = top_k or None
        at_year = args.authority_year if args.authority_year is not None else (cfg.authority_year if cfg else None)
        return run_fit(args.profiles, args.graph, args.trend, args.output, top_k, at_year, cfg)
    if cmd == "simulate":
        if cfg is None:
            raise ConfigValidationError("simulate needs --config with a [simulation] block")
        return run_simulate(cfg, args.output)
    if cmd == "compare":
        bridge = args.bridge or (cfg.path(cfg.bridge) if cfg else None)
        return run_compare(
            args.fits_a, args.fits_b, args.output, args.layer_a, args.layer_b, cfg,
            args.topics_a, args.topics_b, bridge,
        )
    if cmd == "report":
        width = args.bin if args.bin is not None else (cfg.histogram_bin if cfg else 0.05)
        top_n = args.top_n if args.top_n is not None else (cfg.top_n if cfg else 10)
        return run_report(args.fits, args.output, args.fits_b, args.layer_a, args.layer_b, width, top_n, cfg)
    if cmd == "pipeline":
        if cfg is None:
            raise ConfigValidationError("pipeline needs --config")
        return run_pipeline(cfg, args.output)
    raise ValueError(cmd)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config) if args.config else None
        result = dispatch(args, cfg)
    except ConfigValidationError as exc:
        print(f"semdiff: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrerequisiteError as exc:
        print(f"semdiff: {exc}", file=sys.stderr)
        return EXIT_PREREQ
    except (OSError, ValueError, TopicSetError, ConfigError, SimulationError) as exc:
        print(f"semdiff: error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    if args.verbose:
        print(json.dumps(result, indent=2, sort_keys=True, default=_json_default))
    return 0


def _json_default(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return str(obj)


if __name__ == "__main__":
    sys.exit(main())
