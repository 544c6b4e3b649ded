import io
import json
import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semdiff.corpus import (
    Kind,
    ParseReport,
    PublicationRecord,
    RecordFilter,
    UnusableNameError,
    corpus_stats,
    dumps_records,
    normalize_name,
    parse_records,
    read_records,
)


def _jsonl(rows):
    return io.BytesIO("".join(json.dumps(r) + "\n" for r in rows).encode("utf-8"))


THREE = [
    {"record_id": "r1", "title": "A", "authors": ["Ann Lee"], "year": 2001, "kind": "journal"},
    {"record_id": "r2", "title": "B", "authors": ["Bo Li"], "year": 1990, "kind": "journal"},
    {"record_id": "r3", "title": "C", "authors": ["Ann Lee", "Cy Yu"], "year": 2003, "kind": "conference"},
]


def test_empty_source():
    recs = list(parse_records(io.BytesIO(b"")))
    assert recs == []
    stats = corpus_stats(recs)
    assert (stats.n_papers, stats.n_distinct_authors, stats.year_histogram) == (0, 0, {})


def test_year_filter_on_three_records():
    recs = list(parse_records(_jsonl(THREE), "jsonl", RecordFilter(2000, 2010)))
    assert [r.record_id for r in recs] == ["r1", "r3"]
    assert corpus_stats(recs).year_histogram == {2001: 1, 2003: 1}


def test_kind_filter():
    recs = list(parse_records(_jsonl(THREE), "jsonl", RecordFilter(kinds=frozenset({Kind.CONFERENCE}))))
    assert [r.record_id for r in recs] == ["r3"]


def test_malformed_lines_are_counted():
    src = io.BytesIO(
        b'{"record_id": "a", "authors": ["X Y"], "year": 2000}\n'
        b"not json\n"
        b'{"record_id": "b", "authors": [], "year": 2000}\n'
        b'{"record_id": "c", "authors": ["Z"], "year": "n/a"}\n'
    )
    report = ParseReport()
    recs = list(parse_records(src, "jsonl", report=report))
    assert [r.record_id for r in recs] == ["a"]
    assert (report.n_read, report.n_malformed, report.n_yielded) == (4, 3, 1)


def test_xml_adapter():
    xml = b"""<?xml version="1.0"?>
<dblp>
<article key="k1"><author>Ann  Lee</author><author>Bo Li</author><title>On <i>graphs</i></title>
<year>2001</year><journal>J</journal></article>
<www key="homepage"><author>Ann Lee</author><title>Home</title></www>
<inproceedings key="k2"><author>Bo Li</author><title>T</title><year>2002</year><booktitle>C</booktitle></inproceedings>
<book key="k3"><title>No authors</title><year>2002</year></book>
</dblp>"""
    report = ParseReport()
    recs = list(parse_records(io.BytesIO(xml), "xml", layer="dblp", report=report))
    assert [r.record_id for r in recs] == ["k1", "k2"]
    assert recs[0].authors == ("Ann Lee", "Bo Li")
    assert recs[0].title == "On graphs"
    assert recs[0].kind is Kind.JOURNAL and recs[1].kind is Kind.CONFERENCE
    assert recs[1].venue == "C" and recs[0].layer == "dblp"
    assert report.n_malformed == 1


def test_unknown_format():
    with pytest.raises(ValueError):
        list(parse_records(io.BytesIO(b""), "bibtex"))


def test_normalize_name_examples():
    assert normalize_name("  John   Mylopoulos ") == "John Mylopoulos"
    assert normalize_name("Erol Gelenbe") == "Erol Gelenbe"
    nfc = unicodedata.normalize("NFC", "Sara Müller")
    nfd = unicodedata.normalize("NFD", "Sara Müller")
    assert nfc != nfd
    assert normalize_name(nfc) == normalize_name(nfd)
    with pytest.raises(UnusableNameError):
        normalize_name(" \t ")


@given(st.text())
def test_normalize_name_idempotent(raw):
    try:
        once = normalize_name(raw)
    except UnusableNameError:
        return
    assert normalize_name(once) == once


def test_corpus_stats_examples(rec):
    assert corpus_stats([rec("a", ["X", "Y", "Z"], 2000)]).n_distinct_authors == 3
    stats = corpus_stats([rec("a", ["X", "Y"], 2000), rec("b", ["Y", "Z"], 2001)])
    assert stats.n_papers == 2
    assert stats.n_distinct_authors == 4 - 1


_name = st.text(st.characters(min_codepoint=65, max_codepoint=0x24F, blacklist_categories=("Cs", "Cc", "Z")), min_size=1, max_size=8)
_record = st.builds(
    PublicationRecord,
    record_id=st.text(min_size=1, max_size=6),
    title=st.text(max_size=20),
    authors=st.lists(_name, min_size=1, max_size=4).map(tuple),
    year=st.integers(1900, 2030),
    venue=st.text(max_size=8),
    kind=st.sampled_from(list(Kind)),
    layer=st.sampled_from(["", "dblp", "aps"]),
)


@settings(max_examples=60)
@given(st.lists(_record, max_size=8))
def test_roundtrip(records):
    # names drawn here are already normalized except for NFKC; normalize to compare
    records = [
        PublicationRecord(r.record_id, r.title, tuple(normalize_name(a) for a in r.authors), r.year, r.venue, r.kind, r.layer)
        for r in records
    ]
    text = dumps_records(records)
    back = list(parse_records(io.BytesIO(text.encode("utf-8")), "jsonl"))
    assert back == records
    assert dumps_records(back) == text


@settings(max_examples=60)
@given(st.lists(_record, max_size=8), st.integers(1900, 2030), st.integers(0, 60),
       st.sets(st.sampled_from(list(Kind))))
def test_filters_commute_with_parsing(records, lo, span, kinds):
    records = [
        PublicationRecord(r.record_id, r.title, tuple(normalize_name(a) for a in r.authors), r.year, r.venue, r.kind, r.layer)
        for r in records
    ]
    flt = RecordFilter(lo, lo + span, frozenset(kinds) or None)
    data = dumps_records(records).encode("utf-8")
    during = list(parse_records(io.BytesIO(data), "jsonl", flt))
    after = [r for r in parse_records(io.BytesIO(data), "jsonl") if flt.accepts(r)]
    assert during == after


def test_sample_corpus_roundtrip(sample_dir):
    import os

    for name, fmt in (("dblp.xml", "xml"), ("aps.jsonl", "jsonl")):
        recs = read_records(os.path.join(sample_dir, name), fmt=fmt)
        text = dumps_records(recs)
        assert list(parse_records(io.BytesIO(text.encode("utf-8")), "jsonl")) == recs
