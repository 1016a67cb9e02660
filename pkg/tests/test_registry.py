from __future__ import annotations

import json

import pytest

from polyroute.errors import BadConnection, ConfigParse, DuplicateKbId, EmptyCatalog, MissingContextFile
from polyroute.registry import (
    BackendKind,
    Catalog,
    GraphEndpoint,
    SourceDescriptor,
    SparqlEndpoint,
    SqlFile,
    catalog_summary,
    derive_catalog_line,
    load_catalog,
    register_source,
    render_catalog,
)


def _sql(tmp_path, kb_id="concert_singer", line=""):
    db = tmp_path / "x.sqlite"
    db.touch()
    return SourceDescriptor(kb_id, BackendKind.SQL, 'CREATE TABLE t ("a" int)', SqlFile(db), line)


def test_register_is_persistent(tmp_path):
    empty = Catalog()
    one = register_source(empty, _sql(tmp_path))
    assert len(empty) == 0 and len(one) == 1
    assert "concert_singer" in one


def test_duplicate_kb_id_rejected(tmp_path):
    cat = register_source(Catalog(), _sql(tmp_path))
    with pytest.raises(DuplicateKbId):
        register_source(cat, _sql(tmp_path))


def test_bad_connections():
    with pytest.raises(BadConnection):
        SourceDescriptor("w", BackendKind.SPARQL, "wd:Q1", SparqlEndpoint("not a url"))
    with pytest.raises(BadConnection):
        SourceDescriptor("w", BackendKind.SPARQL, "wd:Q1", GraphEndpoint("http://x"))


def test_catalog_line_derivation():
    assert derive_catalog_line("\n  Corpus: nfcorpus\nmore") == "Corpus: nfcorpus"
    assert len(derive_catalog_line("x" * 500)) == 200


def test_render_groups_in_fixed_order(tmp_path):
    cat = register_source(Catalog(), _sql(tmp_path, "b_sql", "tables"))
    cat = register_source(cat, SourceDescriptor("a_graph", BackendKind.CYPHER, "(:A)", GraphEndpoint("http://h:7474"),
                                                 "graph"))
    cat = register_source(cat, SourceDescriptor("c_wd", BackendKind.SPARQL, "wd:Q1", SparqlEndpoint("http://h/sparql"),
                                                "wd"))
    text = render_catalog(cat)
    assert text == (
        "Available knowledge bases:\n\n"
        "  SQL:\n    - b_sql [tables]\n"
        "  SPARQL:\n    - c_wd [wd]\n"
        "  CYPHER:\n    - a_graph [graph]"
    )
    assert "SEARCH" not in text


def test_render_empty_catalog():
    with pytest.raises(EmptyCatalog):
        render_catalog(Catalog())


def test_restrict_and_summary(tmp_path):
    cat = register_source(Catalog(), _sql(tmp_path))
    assert len(cat.restrict(BackendKind.SEARCH)) == 0
    assert catalog_summary(cat) == [{"kb_id": "concert_singer", "kind": "SQL", "catalog_line": 'CREATE TABLE t ("a" int)'}]


def test_kind_parse():
    assert BackendKind.parse("cypher") is BackendKind.CYPHER
    with pytest.raises(ValueError):
        BackendKind.parse("graphql")


def test_load_catalog(toy):
    cat = load_catalog(toy.catalog)
    assert [d.kb_id for d in cat] == ["toy_health", "toy_concerts", "toy_wikidata", "toy_movies"]
    assert cat.lookup("toy_health").catalog_line == "Corpus: toy_health"


def test_load_catalog_errors(tmp_path):
    with pytest.raises(ConfigParse):
        load_catalog(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigParse):
        load_catalog(bad)
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sources": [{"kb_id": "a", "kind": "SQL", "context_file": "nope.txt",
                                            "connection": {"path": "x"}}]}))
    with pytest.raises(MissingContextFile):
        load_catalog(cfg)
