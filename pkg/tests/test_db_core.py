import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbstudio.db import (
    CommentLine,
    FieldEntry,
    OpaqueLine,
    RecordBlock,
    UnknownFieldError,
    effective_field_value,
    get_record,
    parse_db,
    serialize_db,
)
from dbstudio.diagnostics import (
    DUPLICATE_FIELD,
    DUPLICATE_RECORD_NAME,
    SYNTAX_ERROR,
    Severity,
)


def count_comments(doc):
    n = 0
    for item in doc.items:
        if isinstance(item, CommentLine):
            n += 1
        elif isinstance(item, RecordBlock):
            n += sum(1 for b in item.body if isinstance(b, CommentLine))
    return n


def test_example_file_structure(example_text):
    doc, diags = parse_db(example_text)
    records = list(doc.records())
    assert [r.name for r in records] == ["ai001", "ao001"]
    assert records[0].record_type == "ai"
    assert records[0].field_value("INP") == "ao001"
    assert records[1].record_type == "ao"
    assert not list(records[1].fields())
    assert count_comments(doc) == 3
    assert sum(1 for _ in doc.layout_lines()) == 8
    assert not any(d.severity is Severity.ERROR for d in diags)


def test_empty_input():
    doc, diags = parse_db("")
    assert doc.items == []
    assert diags == []
    assert serialize_db(doc) == ""


def test_malformed_field_is_opaque_with_error():
    text = 'record(ai,x) { field(INP "oops") }\n'
    doc, diags = parse_db(text)
    rec = doc.get_record("x")
    assert rec is not None
    assert any(isinstance(b, OpaqueLine) for b in rec.body)
    errors = [d for d in diags if d.severity is Severity.ERROR]
    assert len(errors) == 1 and errors[0].code == SYNTAX_ERROR
    assert serialize_db(doc) == text


def test_round_trip_example(example_text):
    doc, _ = parse_db(example_text)
    assert serialize_db(doc) == example_text


def test_round_trip_corpus(corpus_files):
    for path in corpus_files:
        text = path.read_bytes().decode("latin-1")
        doc, _ = parse_db(text, str(path))
        assert serialize_db(doc) == text, path.name


def test_idempotence_corpus(corpus_files):
    for path in corpus_files:
        text = path.read_bytes().decode("latin-1")
        once = serialize_db(parse_db(text)[0])
        twice = serialize_db(parse_db(once)[0])
        assert once == twice, path.name


def test_coverage_corpus(corpus_files):
    # concatenated raw spans reproduce the input in order
    for path in corpus_files:
        text = path.read_bytes().decode("latin-1")
        doc, _ = parse_db(text)
        assert "".join(item.raw for item in doc.items) == text, path.name


def test_modified_field_canonical(example_text):
    doc, _ = parse_db(example_text)
    entry = doc.get_record("ai001").field_entry("INP")
    entry.value = "ao002"
    entry.dirty = True
    out = serialize_db(doc)
    expected = example_text.replace('  field(INP,"ao001")', '  field(INP,"ao002")')
    assert out == expected
    assert '  field(INP,"ao002")\n' in out


def test_canonical_format_stable():
    text = 'record(ai,a) {\n  field(INP,"b")\n}\n'
    doc, _ = parse_db(text)
    for entry in doc.get_record("a").fields():
        entry.dirty = True
    doc.get_record("a").header_dirty = True
    assert serialize_db(doc) == text


def test_get_record(example_text, registry):
    doc, _ = parse_db(example_text)
    rec = get_record(doc, "ai001")
    assert rec.record_type == "ai"
    assert len(list(rec.fields())) == 1
    assert get_record(doc, "nosuch") is None


def test_get_record_duplicate_name():
    text = 'record(ai,x) {\n  field(HIHI,"1")\n}\nrecord(ai,x) {\n}\n'
    doc, diags = parse_db(text)
    assert get_record(doc, "x").field_value("HIHI") == "1"
    assert any(d.code == DUPLICATE_RECORD_NAME and d.severity is Severity.ERROR
               for d in diags)


def test_duplicate_field_warning():
    doc, diags = parse_db('record(ai,f) {\n  field(HIHI,"1")\n  field(HIHI,"2")\n}\n')
    assert any(d.code == DUPLICATE_FIELD and d.severity is Severity.WARNING
               for d in diags)
    # last occurrence wins
    assert doc.get_record("f").field_value("HIHI") == "2"


def test_effective_field_value(example_text, registry):
    doc, _ = parse_db(example_text)
    ai001 = doc.get_record("ai001")
    ao001 = doc.get_record("ao001")
    assert effective_field_value(ai001, "INP", registry) == ("ao001", False)
    assert effective_field_value(ao001, "VAL", registry) == ("", True)
    with pytest.raises(UnknownFieldError):
        effective_field_value(ai001, "XYZQ", registry)


def test_value_escapes_round_trip():
    text = 'record(ao,q) {\n  field(DESC,"say \\"hi\\" \\\\ back")\n}\n'
    doc, _ = parse_db(text)
    assert doc.get_record("q").field_value("DESC") == 'say "hi" \\ back'
    assert serialize_db(doc) == text
    # canonical re-emission re-escapes identically
    entry = doc.get_record("q").field_entry("DESC")
    entry.dirty = True
    assert serialize_db(doc) == text


def test_crlf_detection():
    text = 'record(ao,b) {\r\n}\r\n'
    doc, _ = parse_db(text)
    assert doc.newline == "\r\n"
    assert serialize_db(doc) == text


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet=st.characters(min_codepoint=0, max_codepoint=255), max_size=400))
def test_parser_totality_random_text(text):
    doc, _ = parse_db(text)
    assert serialize_db(doc) == text


@settings(max_examples=100, deadline=None)
@given(st.binary(max_size=400))
def test_parser_totality_random_bytes(data):
    text = data.decode("latin-1")
    doc, _ = parse_db(text)
    assert serialize_db(doc).encode("latin-1") == data
