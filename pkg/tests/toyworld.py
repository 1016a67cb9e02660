"""A four-source offline toy world: corpus, SQLite file, stub SPARQL and graph servers.

Run directly to materialize it and keep the stubs up for CLI experiments:

    python3 tests/toyworld.py /tmp/toy
"""

from __future__ import annotations

import json
import sqlite3
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from polyroute.registry import BackendKind

CORPUS = [
    {"doc_id": "d1", "title": "Fiber intake and colon health",
     "text": "Dietary fiber from whole grains was associated with lower colorectal cancer incidence."},
    {"doc_id": "d2", "title": "Vitamin D and fracture risk in older adults",
     "text": "Randomized trial: vitamin D supplementation reduced hip fracture risk in adults over 65."},
    {"doc_id": "d3", "title": "Green tea catechins",
     "text": "Green tea consumption and cardiovascular outcomes in a prospective cohort study."},
    {"doc_id": "d4", "title": "Calcium, vitamin D and bone density",
     "text": "Combined calcium and vitamin D intake improved bone mineral density in postmenopausal women."},
    {"doc_id": "d5", "title": "Sodium reduction",
     "text": "Lower sodium diets lowered blood pressure in hypertensive patients."},
]

CORPUS_CONTEXT = """Corpus: toy_health
Description: Short nutrition and medicine abstracts
Query type: a consumer-health question
Document style: a one-sentence research abstract with a title
"""

SQL_SCHEMA = """CREATE TABLE "singer" (
  "singer_id" int,
  "name" text,
  "country" text,
  "age" int,
  PRIMARY KEY ("singer_id")
);
CREATE TABLE "concert" (
  "concert_id" int,
  "concert_name" text,
  "year" int,
  PRIMARY KEY ("concert_id")
);
CREATE TABLE "singer_in_concert" (
  "concert_id" int,
  "singer_id" int,
  PRIMARY KEY ("concert_id", "singer_id")
);
"""

SQL_ROWS = {
    "singer": [(1, "Joe Sharp", "Netherlands", 52), (2, "Timbaland", "United States", 32),
               (3, "Justin Brown", "France", 29), (4, "Rose White", "France", 41)],
    "concert": [(1, "Auditions", 2014), (2, "Super bootcamp", 2015)],
    "singer_in_concert": [(1, 2), (1, 3), (2, 3), (2, 4)],
}

SPARQL_CONTEXT = """Knowledge graph: Wikidata
Prefixes: wd: (entity), wdt: (direct/truthy property), rdfs: (for rdfs:label)

Topic entities (from the question, already linked to Wikidata QIDs):
- wd:Q142  (France)

Linked relations (candidate properties per topic entity, choose among these):
- wd:Q142  (France):
    - P31   (instance of)
    - P36   (capital)
"""

GRAPH_CONTEXT = """Node properties:
- Movie
  - `title`: STRING Example: "The Matrix"
  - `released`: INTEGER Min: 1975, Max: 2012
- Person
  - `name`: STRING Example: "Keanu Reeves"
The relationships:
(:Person)-[:ACTED_IN]->(:Movie)
(:Person)-[:DIRECTED]->(:Movie)
"""


def _uri_binding(var: str, iri: str) -> dict:
    return {var: {"type": "uri", "value": iri}}


SPARQL_TABLE = {
    "SELECT ?capital WHERE { wd:Q142 wdt:P36 ?capital . }": {
        "head": {"vars": ["capital"]},
        "results": {"bindings": [_uri_binding("capital", "http://www.wikidata.org/entity/Q90")]},
    },
    "SELECT ?c WHERE { wd:Q142 wdt:P36 ?c }": {
        "head": {"vars": ["c"]},
        "results": {"bindings": [_uri_binding("c", "http://www.wikidata.org/entity/Q90")]},
    },
    "SELECT ?x WHERE { wd:Q142 wdt:P31 ?x }": {
        "head": {"vars": ["x"]},
        "results": {"bindings": [_uri_binding("x", "http://www.wikidata.org/entity/Q3624078")]},
    },
}

GRAPH_TABLE = {
    "MATCH (p:Person)-[:DIRECTED]->(m:Movie {title: 'The Matrix'}) RETURN p.name": {
        "fields": ["p.name"], "values": [["Lana Wachowski"], ["Lilly Wachowski"]],
    },
    "MATCH (p:Person)-[:DIRECTED]->(m:Movie {title: 'The Matrix'}) RETURN p.name AS director": {
        "fields": ["director"], "values": [["Lilly Wachowski"], ["Lana Wachowski"]],
    },
    "MATCH (m:Movie) RETURN m.title LIMIT 1": {"fields": ["m.title"], "values": [["The Matrix"]]},
}


@dataclass(frozen=True)
class ToyQuestion:
    question_id: str
    question: str
    kind: BackendKind
    kb_id: str
    gold: dict  # dataset row fields beyond the basics
    predicted: str  # what the scripted formulator answers on the gold source


KB = {
    BackendKind.SEARCH: "toy_health",
    BackendKind.SQL: "toy_concerts",
    BackendKind.SPARQL: "toy_wikidata",
    BackendKind.CYPHER: "toy_movies",
}

QUESTIONS = [
    ToyQuestion("q1", "Does vitamin D reduce fracture risk?", BackendKind.SEARCH, KB[BackendKind.SEARCH],
                {"qrels": {"d2": 2, "d4": 1}},
                "Does vitamin D reduce fracture risk?\nVitamin D supplementation reduced fracture risk in a trial."),
    ToyQuestion("q2", "How many singers are from France?", BackendKind.SQL, KB[BackendKind.SQL],
                {"gold_query": "SELECT count(*) FROM singer WHERE country = 'France'"},
                "```sql\nSELECT COUNT(*) AS n FROM singer WHERE country = 'France'\n```"),
    ToyQuestion("q3", "What is the capital of France?", BackendKind.SPARQL, KB[BackendKind.SPARQL],
                {"gold_query": "SELECT ?capital WHERE { wd:Q142 wdt:P36 ?capital . }"},
                "SELECT ?c WHERE { wd:Q142 wdt:P36 ?c }"),
    ToyQuestion("q4", "Who directed The Matrix?", BackendKind.CYPHER, KB[BackendKind.CYPHER],
                {"gold_query": "MATCH (p:Person)-[:DIRECTED]->(m:Movie {title: 'The Matrix'}) RETURN p.name"},
                "MATCH (p:Person)-[:DIRECTED]->(m:Movie {title: 'The Matrix'}) RETURN p.name AS director"),
]

# queries the scripted formulator writes when sent to a source that is not gold for the question
OFF_TOPIC = {
    BackendKind.SEARCH: "green tea",
    BackendKind.SQL: "SELECT name FROM singer ORDER BY singer_id LIMIT 1",
    BackendKind.SPARQL: "SELECT ?x WHERE { wd:Q142 wdt:P31 ?x }",
    BackendKind.CYPHER: "MATCH (m:Movie) RETURN m.title LIMIT 1",
}


def _selection(*kinds: BackendKind) -> str:
    return json.dumps({"decisions": [{"route_type": k.value, "kb_id": KB[k]} for k in kinds]})


def _formulation_entries() -> list[dict]:
    entries = []
    for q in QUESTIONS:
        entries.append({"tag": f"formulation.{q.kind.value.lower()}", "match": "contains",
                        "key": f"Question: {q.question}\n", "response": q.predicted})
    for kind, text in OFF_TOPIC.items():
        entries.append({"tag": f"formulation.{kind.value.lower()}", "match": "any", "key": "", "response": text})
    return entries


def oracle_script() -> list[dict]:
    """Routes gold first plus one distractor; evidence picks index 0; the judge agrees."""
    entries = []
    for q in QUESTIONS:
        other = BackendKind.SQL if q.kind is not BackendKind.SQL else BackendKind.SEARCH
        entries.append({"tag": "selection", "match": "contains", "key": f"Question: {q.question}\n",
                        "response": _selection(q.kind, other)})
        entries.append({"tag": "evidence", "match": "contains", "key": f"Question: {q.question}\n",
                        "response": '{"selected": 0}'})
    entries += _formulation_entries()
    entries.append({"tag": "judge", "match": "any", "key": "", "response": '{"correct": true, "reason": "match"}'})
    return entries


def misroute_script() -> list[dict]:
    """Lists all four sources with gold never at rank 0; evidence picks the gold index."""
    entries = []
    order = [BackendKind.SEARCH, BackendKind.SQL, BackendKind.SPARQL, BackendKind.CYPHER]
    for q in QUESTIONS:
        others = [k for k in order if k is not q.kind]
        ranking = [others[0], q.kind, *others[1:]]
        entries.append({"tag": "selection", "match": "contains", "key": f"Question: {q.question}\n",
                        "response": _selection(*ranking)})
        entries.append({"tag": "evidence", "match": "contains", "key": f"Question: {q.question}\n",
                        "response": json.dumps({"selected": ranking.index(q.kind)})})
    entries += _formulation_entries()
    entries.append({"tag": "judge", "match": "any", "key": "", "response": '{"correct": true, "reason": "match"}'})
    return entries


def all_search_script() -> list[dict]:
    entries = [{"tag": "selection", "match": "any", "key": "", "response": _selection(BackendKind.SEARCH)}]
    entries += _formulation_entries()
    entries.append({"tag": "judge", "match": "any", "key": "", "response": '{"correct": true, "reason": "match"}'})
    return entries


def dataset_rows() -> list[dict]:
    return [{"question_id": q.question_id, "question": q.question, "paradigm": q.kind.value,
             "gold_kb": q.kb_id, **q.gold} for q in QUESTIONS]


def build_sqlite(path: Path) -> Path:
    path.unlink(missing_ok=True)
    con = sqlite3.connect(path)
    con.executescript(SQL_SCHEMA)
    for table, rows in SQL_ROWS.items():
        marks = ",".join("?" * len(rows[0]))
        con.executemany(f"INSERT INTO {table} VALUES ({marks})", rows)
    con.commit()
    con.close()
    return path


@dataclass(frozen=True)
class ToyPaths:
    root: Path
    catalog: Path
    dataset: Path
    config: Path
    script: Path


def write_world(root: Path, sparql_url: str, graph_url: str, script: list[dict] | None = None) -> ToyPaths:
    root.mkdir(parents=True, exist_ok=True)
    (root / "corpus.jsonl").write_text("".join(json.dumps(d) + "\n" for d in CORPUS), encoding="utf-8")
    build_sqlite(root / "concerts.sqlite")
    contexts = {
        "health.txt": CORPUS_CONTEXT, "concerts.sql": SQL_SCHEMA,
        "wikidata.txt": SPARQL_CONTEXT, "movies.txt": GRAPH_CONTEXT,
    }
    for name, text in contexts.items():
        (root / name).write_text(text, encoding="utf-8")
    catalog = {"sources": [
        {"kb_id": "toy_health", "kind": "SEARCH", "context_file": "health.txt",
         "connection": {"path": "corpus.jsonl"}},
        {"kb_id": "toy_concerts", "kind": "SQL", "context_file": "concerts.sql",
         "catalog_line": "Singers, concerts and who performed where",
         "connection": {"path": "concerts.sqlite"}},
        {"kb_id": "toy_wikidata", "kind": "SPARQL", "context_file": "wikidata.txt",
         "catalog_line": "Wikidata facts about countries", "connection": {"url": sparql_url}},
        {"kb_id": "toy_movies", "kind": "CYPHER", "context_file": "movies.txt",
         "catalog_line": "Movies, actors and directors", "connection": {"url": graph_url}},
    ]}
    paths = ToyPaths(root, root / "catalog.json", root / "dataset.jsonl", root / "config.json", root / "script.json")
    paths.catalog.write_text(json.dumps(catalog, indent=2), encoding="utf-8")
    paths.dataset.write_text("".join(json.dumps(r) + "\n" for r in dataset_rows()), encoding="utf-8")
    paths.script.write_text(json.dumps({"entries": script or oracle_script()}, indent=2), encoding="utf-8")
    config = {"catalog": "catalog.json", "provider": {"kind": "scripted", "script": "script.json"},
              "k": 3, "limits": {"timeout": 10}, "concurrency": {"questions": 2}}
    paths.config.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return paths


if __name__ == "__main__":
    from polyroute.stubs import graph_stub, sparql_stub

    target = Path(sys.argv[1] if len(sys.argv) > 1 else "toy")
    with sparql_stub(SPARQL_TABLE) as sparql, graph_stub(GRAPH_TABLE) as graph:
        toy = write_world(target.resolve(), sparql.url, graph.url)
        print(f"toy world in {toy.root}; config {toy.config}. Ctrl-C to stop the stubs.", flush=True)
        try:
            while True:
                time.sleep(3600)
        except KeyboardInterrupt:
            pass
