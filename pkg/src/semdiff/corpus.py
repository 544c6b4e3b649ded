"""Publication records: canonical model, streaming parsers and corpus counts.

Two input layouts are understood. The canonical one is JSON lines with the
fields ``record_id, title, authors, year, venue, kind, layer``; every later
stage reads only that. The XML adapter walks a generic element-per-publication
document (DBLP-shaped by default) whose element and attribute names come from
an :class:`XmlMapping`.
"""

from __future__ import annotations

import enum
import io
import json
import logging
import re
import unicodedata
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional

logger = logging.getLogger(__name__)

_WS = re.compile(r"\s+")

FIELDS = ("record_id", "title", "authors", "year", "venue", "kind", "layer")


class UnusableNameError(ValueError):
    """Raised when an author field is empty after normalization."""


class Kind(str, enum.Enum):
    JOURNAL = "journal"
    CONFERENCE = "conference"
    BOOK_CHAPTER = "book_chapter"
    OTHER = "other"

    @classmethod
    def parse(cls, value: Optional[str]) -> "Kind":
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            return cls.OTHER


def normalize_name(raw: str) -> str:
    """Canonical form of an author name.

    NFKC-normalizes, trims and collapses internal whitespace. Case and
    diacritics are kept, so two names denote the same member only when the
    normalized strings are equal.

    >>> normalize_name("  John   Mylopoulos ")
    'John Mylopoulos'
    """
    if raw is None:
        raise UnusableNameError("author name is missing")
    name = _WS.sub(" ", unicodedata.normalize("NFKC", raw)).strip()
    if not name:
        raise UnusableNameError(f"unusable author name {raw!r}")
    return name


@dataclass(frozen=True)
class PublicationRecord:
    record_id: str
    title: str
    authors: tuple[str, ...]
    year: int
    venue: str = ""
    kind: Kind = Kind.OTHER
    layer: str = ""

    def to_json(self) -> str:
        payload = {
            "record_id": self.record_id,
            "title": self.title,
            "authors": list(self.authors),
            "year": self.year,
            "venue": self.venue,
            "kind": self.kind.value,
            "layer": self.layer,
        }
        return json.dumps(payload, ensure_ascii=False)


@dataclass(frozen=True)
class RecordFilter:
    year_min: Optional[int] = None
    year_max: Optional[int] = None
    kinds: Optional[frozenset[Kind]] = None

    def __post_init__(self):
        if (
            self.year_min is not None
            and self.year_max is not None
            and self.year_min > self.year_max
        ):
            raise ValueError(f"year_min {self.year_min} > year_max {self.year_max}")

    def accepts(self, record: PublicationRecord) -> bool:
        if self.year_min is not None and record.year < self.year_min:
            return False
        if self.year_max is not None and record.year > self.year_max:
            return False
        if self.kinds is not None and record.kind not in self.kinds:
            return False
        return True


@dataclass
class ParseReport:
    """Mutable tally filled in while a parser generator is consumed."""

    n_read: int = 0
    n_yielded: int = 0
    n_malformed: int = 0
    n_filtered: int = 0


@dataclass(frozen=True)
class XmlMapping:
    """Element/attribute names for the XML adapter.

    ``record_tags`` maps a publication element name to a :class:`Kind` value;
    elements not listed are ignored.
    """

    record_tags: dict = field(
        default_factory=lambda: {
            "article": "journal",
            "inproceedings": "conference",
            "incollection": "book_chapter",
            "proceedings": "other",
            "book": "other",
            "phdthesis": "other",
            "mastersthesis": "other",
        }
    )
    id_attribute: str = "key"
    title_tag: str = "title"
    author_tags: tuple[str, ...] = ("author",)
    year_tag: str = "year"
    venue_tags: tuple[str, ...] = ("journal", "booktitle")

    @classmethod
    def from_dict(cls, data: dict) -> "XmlMapping":
        kwargs = dict(data)
        for key in ("author_tags", "venue_tags"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


def _make_record(
    record_id, title, authors, year, venue, kind, layer
) -> Optional[PublicationRecord]:
    if record_id is None or str(record_id) == "":
        return None
    try:
        year = int(str(year).strip())
    except (TypeError, ValueError):
        return None
    if not authors:
        return None
    try:
        names = tuple(normalize_name(a) for a in authors)
    except (UnusableNameError, TypeError):
        return None
    return PublicationRecord(
        record_id=str(record_id),
        title=title or "",
        authors=names,
        year=year,
        venue=venue or "",
        kind=Kind.parse(kind),
        layer=layer or "",
    )


def _iter_jsonl(source: IO[bytes], layer: Optional[str], report: ParseReport):
    for raw in source:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        if not raw.strip():
            continue
        report.n_read += 1
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError:
            report.n_malformed += 1
            continue
        if not isinstance(obj, dict) or not isinstance(obj.get("authors"), list):
            report.n_malformed += 1
            continue
        rec = _make_record(
            obj.get("record_id"),
            obj.get("title"),
            obj.get("authors"),
            obj.get("year"),
            obj.get("venue"),
            obj.get("kind"),
            layer if layer is not None else obj.get("layer"),
        )
        if rec is None:
            report.n_malformed += 1
            continue
        yield rec


def _text(elem) -> str:
    return _WS.sub(" ", "".join(elem.itertext())).strip()


def _iter_xml(
    source: IO[bytes], mapping: XmlMapping, layer: Optional[str], report: ParseReport
):
    tags = mapping.record_tags
    root = None
    for event, elem in ET.iterparse(source, events=("start", "end")):
        if event == "start":
            if root is None:
                root = elem
            continue
        if elem.tag not in tags:
            continue
        report.n_read += 1
        title, year, venue, authors = "", None, "", []
        for child in elem:
            if child.tag in mapping.author_tags:
                authors.append(_text(child))
            elif child.tag == mapping.title_tag:
                title = _text(child)
            elif child.tag == mapping.year_tag:
                year = _text(child)
            elif child.tag in mapping.venue_tags and not venue:
                venue = _text(child)
        rec = _make_record(
            elem.get(mapping.id_attribute),
            title,
            authors,
            year,
            venue,
            tags[elem.tag],
            layer,
        )
        # drop finished subtrees so memory stays bounded by one publication
        elem.clear()
        if root is not elem:
            root.clear()
        if rec is None:
            report.n_malformed += 1
            continue
        yield rec


def parse_records(
    source: IO[bytes],
    fmt: str = "canonical_jsonlines",
    filters: Optional[RecordFilter] = None,
    *,
    layer: Optional[str] = None,
    mapping: Optional[XmlMapping] = None,
    report: Optional[ParseReport] = None,
) -> Iterator[PublicationRecord]:
    """Stream records out of ``source`` in input order.

    ``fmt`` is ``canonical_jsonlines`` (alias ``jsonl``) or ``dblp_xml_like``
    (alias ``xml``). Records lacking a usable year or author list are skipped
    and counted in ``report.n_malformed``. ``layer`` overrides the record's
    own layer tag when given.
    """
    filters = filters or RecordFilter()
    report = report if report is not None else ParseReport()
    if fmt in ("canonical_jsonlines", "jsonl"):
        stream = _iter_jsonl(source, layer, report)
    elif fmt in ("dblp_xml_like", "xml"):
        stream = _iter_xml(source, mapping or XmlMapping(), layer, report)
    else:
        raise ValueError(f"unknown record format {fmt!r}")
    for rec in stream:
        if filters.accepts(rec):
            report.n_yielded += 1
            yield rec
        else:
            report.n_filtered += 1
    if report.n_malformed:
        logger.warning("skipped %d malformed records", report.n_malformed)


def read_records(path, **kwargs) -> list[PublicationRecord]:
    with open(path, "rb") as fh:
        return list(parse_records(fh, **kwargs))


def write_records(records: Iterable[PublicationRecord], fh: IO[str]) -> int:
    n = 0
    for rec in records:
        fh.write(rec.to_json())
        fh.write("\n")
        n += 1
    return n


def dumps_records(records: Iterable[PublicationRecord]) -> str:
    buf = io.StringIO()
    write_records(records, buf)
    return buf.getvalue()


@dataclass
class CorpusStats:
    n_papers: int = 0
    n_distinct_authors: int = 0
    year_histogram: dict[int, int] = field(default_factory=dict)


def corpus_stats(records: Iterable[PublicationRecord]) -> CorpusStats:
    names: set[str] = set()
    years: Counter = Counter()
    for rec in records:
        names.update(rec.authors)
        years[rec.year] += 1
    return CorpusStats(
        n_papers=sum(years.values()),
        n_distinct_authors=len(names),
        year_histogram=dict(sorted(years.items())),
    )
