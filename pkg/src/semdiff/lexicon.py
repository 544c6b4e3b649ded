"""Topic dictionary, title indexing and topic trend series."""

from __future__ import annotations

import csv
import json
import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional

_TOKEN = re.compile(r"[^\W_]+")


class TopicSetError(ValueError):
    pass


def tokenize(text: str, stoplist: Iterable[str] = ()) -> tuple[str, ...]:
    """Casefolded word tokens of ``text`` with stoplist entries removed.

    Splits on whitespace and punctuation (underscore counts as punctuation).
    No stemming.
    """
    stop = stoplist if isinstance(stoplist, (set, frozenset)) else set(stoplist)
    return tuple(t for t in _TOKEN.findall(text.casefold()) if t not in stop)


@dataclass(frozen=True)
class Topic:
    topic_id: str
    canonical: tuple[str, ...]
    synonyms: tuple[tuple[str, ...], ...] = ()

    @property
    def lexemes(self) -> tuple[tuple[str, ...], ...]:
        return (self.canonical,) + self.synonyms


@dataclass(frozen=True)
class Conflict:
    kind: str  # "duplicate" (hard) or "containment" (warning)
    topic_a: str
    topic_b: str
    lexeme_a: tuple[str, ...]
    lexeme_b: tuple[str, ...]

    @property
    def is_hard(self) -> bool:
        return self.kind == "duplicate"


class TopicSet:
    """The topic basis plus a longest-match lookup table.

    Lexemes are tokenized with the same rules as titles (including the
    stoplist), so a lexeme and a title match token for token.
    """

    def __init__(self, topics: Iterable[Topic], stoplist: Iterable[str] = ()):
        self.stoplist = frozenset(t.casefold() for t in stoplist)
        cleaned = []
        seen = set()
        for topic in topics:
            if topic.topic_id in seen:
                raise TopicSetError(f"duplicate topic_id {topic.topic_id!r}")
            seen.add(topic.topic_id)
            lexemes = []
            for lex in topic.lexemes:
                toks = tokenize(" ".join(lex), self.stoplist)
                if not toks:
                    raise TopicSetError(
                        f"topic {topic.topic_id!r} has an empty lexeme {lex!r}"
                    )
                lexemes.append(toks)
            cleaned.append(Topic(topic.topic_id, lexemes[0], tuple(lexemes[1:])))
        self.topics: tuple[Topic, ...] = tuple(sorted(cleaned, key=lambda t: t.topic_id))
        self._table: dict[tuple[str, ...], str] = {}
        for topic in self.topics:  # sorted, so the smallest id claims shared lexemes
            for lex in topic.lexemes:
                self._table.setdefault(lex, topic.topic_id)
        self.max_len = max((len(k) for k in self._table), default=0)

    def __len__(self):
        return len(self.topics)

    @property
    def ids(self) -> list[str]:
        return [t.topic_id for t in self.topics]

    def lookup(self, tokens: tuple[str, ...]) -> Optional[str]:
        return self._table.get(tokens)

    @classmethod
    def from_dict(cls, data, stoplist: Iterable[str] = ()) -> "TopicSet":
        """Build from ``{"topics": [...], "stoplist": [...]}`` or a bare list.

        Each topic entry is ``{"topic_id", "lexeme", "synonyms"}``; lexemes are
        plain strings.
        """
        if isinstance(data, dict):
            entries = data.get("topics", [])
            stoplist = list(stoplist) + list(data.get("stoplist", []))
        else:
            entries = data
        topics = []
        for entry in entries:
            canonical = entry.get("lexeme") or entry.get("canonical")
            if not canonical:
                raise TopicSetError(f"topic {entry!r} lacks a lexeme")
            topics.append(
                Topic(
                    str(entry["topic_id"]),
                    tuple(canonical.split()),
                    tuple(tuple(s.split()) for s in entry.get("synonyms", [])),
                )
            )
        return cls(topics, stoplist)

    def to_dict(self) -> dict:
        return {
            "topics": [
                {
                    "topic_id": t.topic_id,
                    "lexeme": " ".join(t.canonical),
                    "synonyms": [" ".join(s) for s in t.synonyms],
                }
                for t in self.topics
            ],
            "stoplist": sorted(self.stoplist),
        }


def load_stoplist(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip() and not line.startswith("#")]


def load_topics(path, stoplist_path=None, strict: bool = True) -> TopicSet:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    stop = load_stoplist(stoplist_path) if stoplist_path else ()
    topics = TopicSet.from_dict(data, stop)
    if strict:
        hard = [c for c in validate_disjointness(topics) if c.is_hard]
        if hard:
            c = hard[0]
            raise TopicSetError(
                f"{len(hard)} lexeme(s) shared between topics, e.g. "
                f"{' '.join(c.lexeme_a)!r} under {c.topic_a} and {c.topic_b}"
            )
    return topics


def validate_disjointness(topics: TopicSet) -> list[Conflict]:
    """Lexical check of pairwise topic independence.

    Reports identical token sequences owned by two topics (hard) and a
    lexeme that occurs as a contiguous run inside another topic's lexeme
    (warning; longest-match indexing resolves it).
    """
    owners: dict[tuple, list[str]] = defaultdict(list)
    for t in topics.topics:
        for lex in set(t.lexemes):
            owners[lex].append(t.topic_id)
    conflicts = []
    for lex, ids in sorted(owners.items()):
        ids = sorted(ids)
        for a_pos, a in enumerate(ids):
            for b in ids[a_pos + 1 :]:
                conflicts.append(Conflict("duplicate", a, b, lex, lex))
    for long, long_ids in sorted(owners.items()):
        subs = {
            long[i:j]
            for i in range(len(long))
            for j in range(i + 1, len(long) + 1)
            if j - i < len(long)
        }
        for short in sorted(subs):
            for a in sorted(owners.get(short, ())):
                for b in sorted(long_ids):
                    if a != b:
                        conflicts.append(Conflict("containment", a, b, short, long))
    return conflicts


def match_spans(tokens: tuple[str, ...], topics: TopicSet) -> list[tuple[int, int, str]]:
    """Greedy left-to-right longest-match segmentation.

    Returns ``(start, stop, topic_id)`` spans; no token is used twice.
    """
    spans = []
    i, n = 0, len(tokens)
    while i < n:
        for length in range(min(topics.max_len, n - i), 0, -1):
            tid = topics.lookup(tokens[i : i + length])
            if tid is not None:
                spans.append((i, i + length, tid))
                i += length
                break
        else:
            i += 1
    return spans


def index_title(title: str, topics: TopicSet) -> frozenset[str]:
    tokens = tokenize(title, topics.stoplist)
    return frozenset(tid for _, _, tid in match_spans(tokens, topics))


@dataclass(frozen=True)
class IndexedPaper:
    record_id: str
    year: int
    topic_ids: frozenset[str]
    authors: tuple[str, ...] = ()

    def to_json(self) -> str:
        return json.dumps(
            {
                "record_id": self.record_id,
                "year": self.year,
                "topic_ids": sorted(self.topic_ids),
                "authors": list(self.authors),
            },
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "IndexedPaper":
        obj = json.loads(line)
        return cls(
            str(obj["record_id"]),
            int(obj["year"]),
            frozenset(obj.get("topic_ids", [])),
            tuple(obj.get("authors", [])),
        )


def index_records(records, topics: TopicSet):
    for rec in records:
        yield IndexedPaper(rec.record_id, rec.year, index_title(rec.title, topics), rec.authors)


def read_indexed(path) -> list[IndexedPaper]:
    with open(path, encoding="utf-8") as fh:
        return [IndexedPaper.from_json(line) for line in fh if line.strip()]


@dataclass
class Coverage:
    per_year: dict[int, float]
    overall: float
    n_papers: int = 0
    n_indexed: int = 0


def coverage(indexed: Iterable[IndexedPaper]) -> Coverage:
    total: dict[int, int] = defaultdict(int)
    hit: dict[int, int] = defaultdict(int)
    for paper in indexed:
        total[paper.year] += 1
        if paper.topic_ids:
            hit[paper.year] += 1
    n, k = sum(total.values()), sum(hit.values())
    return Coverage(
        per_year={y: hit[y] / total[y] for y in sorted(total)},
        overall=k / n if n else 0.0,
        n_papers=n,
        n_indexed=k,
    )


@dataclass
class TrendSeries:
    """Per-year topic counts and the normalized trend distribution.

    ``counts[(topic, year)]`` is the number of papers carrying the topic;
    ``trend[(topic, year)]`` is its share when every paper spreads a unit
    weight evenly over its topics. ``totals[year]`` counts indexed papers.
    """

    counts: dict[tuple[str, int], int] = field(default_factory=dict)
    trend: dict[tuple[str, int], float] = field(default_factory=dict)
    totals: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        self._rows: dict[int, dict[str, float]] = defaultdict(dict)
        for (tid, year), share in self.trend.items():
            self._rows[year][tid] = share

    @property
    def years(self) -> list[int]:
        return sorted(y for y in self._rows if self._rows[y])

    def row(self, year: int) -> dict[str, float]:
        return dict(self._rows.get(year, {}))

    def row_at_or_before(self, year: int) -> dict[str, float]:
        """Trend row for ``year``, falling back to the latest earlier year."""
        if self._rows.get(year):
            return dict(self._rows[year])
        earlier = [y for y in self.years if y <= year]
        return dict(self._rows[earlier[-1]]) if earlier else {}

    @classmethod
    def from_rows(cls, rows: dict[int, dict[str, float]]) -> "TrendSeries":
        """Wrap externally supplied shares (e.g. a simulated trend)."""
        trend = {(tid, y): v for y, row in rows.items() for tid, v in row.items() if v > 0}
        return cls(counts={}, trend=trend, totals={y: 0 for y in rows})


class TrendAccumulator:
    """Mergeable reduction behind :func:`compute_trend`."""

    def __init__(self):
        self.counts: dict[tuple[str, int], int] = defaultdict(int)
        self.weights: dict[tuple[str, int], float] = defaultdict(float)
        self.totals: dict[int, int] = defaultdict(int)

    def add(self, paper: IndexedPaper) -> None:
        if not paper.topic_ids:
            return
        w = 1.0 / len(paper.topic_ids)
        self.totals[paper.year] += 1
        for tid in sorted(paper.topic_ids):
            self.counts[(tid, paper.year)] += 1
            self.weights[(tid, paper.year)] += w

    def merge(self, other: "TrendAccumulator") -> "TrendAccumulator":
        out = TrendAccumulator()
        for src in (self, other):
            for k, v in src.counts.items():
                out.counts[k] += v
            for k, v in src.weights.items():
                out.weights[k] += v
            for k, v in src.totals.items():
                out.totals[k] += v
        return out

    def result(self) -> TrendSeries:
        by_year: dict[int, list] = defaultdict(list)
        for (tid, year), w in self.weights.items():
            by_year[year].append((tid, w))
        trend = {}
        for year in sorted(by_year):
            row = sorted(by_year[year])
            norm = math.fsum(w for _, w in row)
            for tid, w in row:
                trend[(tid, year)] = w / norm
        return TrendSeries(
            counts=dict(sorted(self.counts.items(), key=lambda kv: (kv[0][1], kv[0][0]))),
            trend=trend,
            totals=dict(sorted(self.totals.items())),
        )


def compute_trend(indexed: Iterable[IndexedPaper]) -> TrendSeries:
    acc = TrendAccumulator()
    for paper in indexed:
        acc.add(paper)
    return acc.result()


def write_trend(trend: TrendSeries, path) -> str:
    keys = sorted(set(trend.trend) | set(trend.counts), key=lambda k: (k[1], k[0]))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["year", "topic_id", "count", "share"])
        for tid, year in keys:
            w.writerow([year, tid, trend.counts.get((tid, year), 0), repr(trend.trend.get((tid, year), 0.0))])
    return str(path)


def read_trend(path) -> TrendSeries:
    counts, shares = {}, {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            key = (row["topic_id"], int(row["year"]))
            counts[key] = int(row["count"])
            share = float(row["share"])
            if share > 0:
                shares[key] = share
    # indexed-paper totals are not part of the CSV
    return TrendSeries(counts=counts, trend=shares, totals={})
