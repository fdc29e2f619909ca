"""Acceptance suite: one test per criterion, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the report lines.
"""

import random
import time

import pytest
from fastapi.testclient import TestClient

from dbstudio import engine
from dbstudio.cli import main
from dbstudio.db import parse_db, serialize_db
from dbstudio.dbd import FieldKind
from dbstudio.diagnostics import Severity
from dbstudio.engine import RenameRecord, apply, open_session, save, semantic_state, undo
from dbstudio.layout import decode_layout
from dbstudio.service import create_app
from dbstudio.topology import GroupPath, build_graph, group_view
from test_engine import random_command

from conftest import FIXTURES

DBD = str(FIXTURES / "test.dbd")


def report(num: int, text: str):
    print(f"PASS criterion {num}: {text}")


def test_criterion_1_paper_example_fidelity(example_text, registry):
    doc, parse_diags = parse_db(example_text)
    assert len(list(doc.records())) == 2
    graph, graph_diags = build_graph(doc, registry)
    assert len(graph.edges) == 1
    edge = graph.edges[0]
    assert edge.source_field == "ai001.INP"
    assert edge.target.target_id == "ao001.VAL"
    assert edge.source_kind is FieldKind.INPUT
    table, layout_diags = decode_layout(doc)
    assert len(table.connectors) == 1
    conn = table.connectors["ai001/INP"]
    assert (conn.x, conn.y) == (2505, 2495)
    assert table.field_nodes["ai001.INP"].color == 16711731
    all_diags = parse_diags + graph_diags + layout_diags
    assert not any(d.severity is Severity.ERROR for d in all_diags)
    report(1, "paper example: 2 records, 1 INPUT edge, connector (2505,2495), "
              "color 16711731, 0 errors")


def test_criterion_2_byte_exact_round_trip(example_text, corpus_files):
    assert len(corpus_files) >= 20
    start = time.perf_counter()
    for path in corpus_files:
        text = path.read_bytes().decode("latin-1")
        doc, _ = parse_db(text)
        assert serialize_db(doc).encode("latin-1") == path.read_bytes(), path.name
    assert serialize_db(parse_db(example_text)[0]) == example_text
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    report(2, f"byte-exact round trip over {len(corpus_files)} corpus files "
              f"in {elapsed:.3f}s")


@pytest.mark.parametrize("fixture,code,strict", [
    ("diag_syntax_error.db", "SyntaxError", False),
    ("diag_duplicate_record.db", "DuplicateRecordName", False),
    ("diag_unknown_type.db", "UnknownRecordType", False),
    ("diag_broken_link.db", "BrokenLink", True),
])
def test_criterion_3_diagnostics(fixture, code, strict, capsys):
    args = ["lint", str(FIXTURES / fixture), "--dbd", DBD]
    if strict:
        args.append("--strict")
    status = main(args)
    err = capsys.readouterr().err
    assert code in err
    assert status == 1
    report(3, f"{fixture} -> {code}, lint exit 1")


def test_criterion_4_rename_fixup(example_text, registry):
    s = open_session(example_text, registry)
    apply(s, RenameRecord("ao001", "ao002"))
    assert s.document.get_record("ai001").field_value("INP") == "ao002"
    assert s.layout.connectors["ai001/INP"].next == "ao002.VAL"
    apply(s, RenameRecord("ao002", "ao001"))
    assert save(s) == example_text
    report(4, "rename fixes INP value and connector terminal; rename-back "
              "saves byte-exact original")


def test_criterion_5_auto_layout(example_text, tmp_path, capsys):
    stripped = "".join(line for line in example_text.splitlines(keepends=True)
                       if not line.startswith("#!"))
    db = tmp_path / "stripped.db"
    db.write_text(stripped)
    assert main(["layout", str(db), "--dbd", DBD]) == 0
    out = capsys.readouterr().out
    assert '#! Record(ai001,100,100,0,1,"ai001")' in out
    assert '#! Record(ao001,260,100,0,1,"ao001")' in out
    twice = tmp_path / "twice.db"
    twice.write_text(out)
    assert main(["layout", str(twice), "--dbd", DBD]) == 0
    assert capsys.readouterr().out == out
    assert main(["layout", str(FIXTURES / "nine.db"), "--dbd", DBD]) == 0
    nine = capsys.readouterr().out
    for i in range(8):
        assert f'#! Record(r{i + 1},{100 + 160 * i},100,0,1,"r{i + 1}")' in nine
    assert '#! Record(r9,100,200,0,1,"r9")' in nine
    report(5, "auto-layout grid placement, byte-level idempotence, 9-record wrap")


def test_criterion_6_undo_soundness(example_text, registry):
    seeds = 200
    for seed in range(seeds):
        rng = random.Random(seed)
        s = open_session(example_text, registry)
        start = semantic_state(s)
        applied = 0
        for _ in range(rng.randrange(1, 101)):
            try:
                apply(s, random_command(s, rng))
                applied += 1
            except engine.ValidationError:
                pass
        assert applied <= 100
        for _ in range(applied):
            undo(s)
        assert semantic_state(s) == start, f"seed {seed}"
    report(6, f"N<=100 random commands + N undos restore the session "
              f"across {seeds} seeds")


def test_criterion_7_grouping():
    text = ("record(ao,ao001) {\n}\nrecord(ao,grp1:ao001) {\n}\n"
            "record(ao,grp1:grp2:ao002) {\n}\n")
    doc, _ = parse_db(text)
    records, subgroups = group_view(doc, GroupPath((), ":"), ":")
    assert (len(records), len(subgroups)) == (1, 1)
    records, subgroups = group_view(doc, GroupPath(("grp1",), ":"), ":")
    assert (len(records), len(subgroups)) == (1, 1)
    records, subgroups = group_view(doc, GroupPath(("grp1", "grp2"), ":"), ":")
    assert (len(records), len(subgroups)) == (1, 0)
    # switching the separator regroups but never changes the record count
    total_dot = sum(
        len(group_view(doc, GroupPath(p, "."), ".")[0])
        for p in {tuple(n.split("."))[:-1] for n in doc.record_names()})
    assert total_dot == 3
    report(7, "grouping views match at ':'; '.' separator regroups, count stays 3")


def test_criterion_8_performance(registry):
    n = 10_000
    lines = []
    for i in range(n):
        lines.append(f"record(calc,rec{i:05d}) {{\n")
        lines.append(f'  field(INPA,"rec{(i * 7 + 1) % n:05d}")\n')
        if i % 2 == 0:
            lines.append(f'  field(INPB,"rec{(i * 13 + 5) % n:05d}.VAL PP")\n')
        lines.append("}\n")
    text = "".join(lines)
    start = time.perf_counter()
    doc, _ = parse_db(text)
    graph, _ = build_graph(doc, registry)
    assert serialize_db(doc) == text
    elapsed = time.perf_counter() - start
    assert len(list(doc.records())) == n
    assert len(graph.edges) == 15_000
    assert elapsed < 2.0
    report(8, f"10k records / 15k links parsed, graphed and round-tripped "
              f"in {elapsed:.3f}s")


def test_criterion_9_service_contract(example_text, dbd_text):
    client = TestClient(create_app())

    # malformed requests are 4xx, never a fault
    assert client.post("/api/documents", json=[1]).status_code == 400
    assert client.post("/api/documents",
                       content=b"garbage",
                       headers={"content-type": "application/json"}).status_code == 400

    resp = client.post("/api/documents", json={"db": example_text, "dbd": dbd_text})
    assert resp.status_code == 201
    doc_id = resp.json()["id"]
    url = f"/api/documents/{doc_id}"

    # criterion 1 through the API
    view = client.get(f"{url}/view").json()
    assert len(view["records"]) == 2
    assert len(view["links"]) == 1
    assert view["links"][0]["waypoints"] == [{"id": "ai001/INP", "x": 2505, "y": 2495}]
    ai001 = next(r for r in view["records"] if r["name"] == "ai001")
    inp = next(nd for nd in ai001["fieldNodes"] if nd["field"] == "INP")
    assert inp["kind"] == "INPUT" and inp["color"] == 16711731
    assert view["diagnostics"] == []

    # criterion 4 through the API
    assert client.post(f"{url}/commands",
                       json={"kind": "RenameRecord", "old": "ao001",
                             "new": "ao002"}).status_code == 200
    view = client.get(f"{url}/view").json()
    assert view["links"][0]["targetLabel"] == "ao002.VAL"
    assert client.post(f"{url}/undo").status_code == 200
    assert client.get(f"{url}/source").text == example_text

    assert client.post(f"{url}/commands", json={"kind": "??"}).status_code == 400
    assert client.post(f"{url}/commands",
                       json={"kind": "DeleteRecord", "name": "none"}).status_code == 409
    report(9, "open/view/command/undo/source over HTTP reproduce criteria 1 "
              "and 4; malformed requests are 4xx")
