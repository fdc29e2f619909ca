import pytest

from dbstudio.dbd import (
    DbfType,
    FieldDef,
    FieldKind,
    classify_field,
    parse_dbd,
)
from dbstudio.diagnostics import INCLUDE_CYCLE, SYNTAX_ERROR, Severity


def test_fixture_registry(registry):
    assert set(registry.record_types) == {"ai", "ao", "calc"}
    ai = registry.record_types["ai"]
    assert ai.fields["VAL"].data_type is DbfType.DOUBLE
    assert ai.fields["INP"].data_type is DbfType.INLINK
    assert ai.fields["HIHI"].default_value == "0"
    assert ai.fields["VAL"].default_value == ""
    assert ai.fields["SCAN"].menu_name == "menuScan"
    assert registry.menus["menuScan"][0] == ("menuScanPassive", "Passive")
    assert not ai.no_val_field
    assert registry.devices and registry.devices[0].record_type == "ai"


def test_empty_dbd():
    registry, diags = parse_dbd("")
    assert registry.record_types == {}
    assert diags == []


def test_field_missing_data_type():
    registry, diags = parse_dbd("recordtype(x) { field(A) { } }")
    assert "x" not in registry.record_types
    assert any(d.code == SYNTAX_ERROR and d.severity is Severity.ERROR for d in diags)


def test_lookup_field(registry):
    assert registry.lookup_field("ai", "INP").data_type is DbfType.INLINK
    assert registry.lookup_field("ai", "ZZZ") is None
    assert registry.lookup_field("nosuchtype", "VAL") is None


@pytest.mark.parametrize("dtype", list(DbfType))
def test_classify_exhaustive(dtype):
    kind = classify_field(FieldDef("F", dtype))
    if dtype is DbfType.INLINK:
        assert kind is FieldKind.INPUT
    elif dtype is DbfType.OUTLINK:
        assert kind is FieldKind.OUTPUT
    elif dtype is DbfType.FWDLINK:
        assert kind is FieldKind.FORWARD
    else:
        assert kind is FieldKind.VARIABLE


def test_golden_requery(dbd_text):
    registry, _ = parse_dbd(dbd_text)
    expected = {
        ("ai", "VAL"): (DbfType.DOUBLE, ""),
        ("ai", "INP"): (DbfType.INLINK, ""),
        ("ai", "HIHI"): (DbfType.DOUBLE, "0"),
        ("ao", "OUT"): (DbfType.OUTLINK, ""),
        ("ao", "FLNK"): (DbfType.FWDLINK, ""),
        ("calc", "CALC"): (DbfType.STRING, "0"),
    }
    for (rtype, fname), (dtype, default) in expected.items():
        fdef = registry.lookup_field(rtype, fname)
        assert fdef.data_type is dtype
        assert fdef.default_value == default


def test_include_equivalence(dbd_text):
    # splitting the dbd in two and joining via include yields the same registry
    split = dbd_text.index("recordtype(ao)")
    parts = {"base.dbd": dbd_text[:split] + '\ninclude "rest.dbd"\n',
             "rest.dbd": dbd_text[split:]}
    whole, _ = parse_dbd(dbd_text)
    joined, diags = parse_dbd(parts["base.dbd"], resolver=parts.__getitem__)
    assert not diags
    assert set(joined.record_types) == set(whole.record_types)
    for name, rtype in whole.record_types.items():
        other = joined.record_types[name]
        for fname, fdef in rtype.fields.items():
            assert other.fields[fname].data_type is fdef.data_type
            assert other.fields[fname].default_value == fdef.default_value


def test_include_cycle():
    parts = {"a.dbd": 'include "b.dbd"', "b.dbd": 'include "a.dbd"'}
    _, diags = parse_dbd(parts["a.dbd"], resolver=parts.__getitem__, source_name="a.dbd")
    assert any(d.code == INCLUDE_CYCLE for d in diags)


def test_unrecognized_blocks_warn():
    text = 'driver(drvXy)\nregistrar(myReg)\nrecordtype(t) { field(VAL,DBF_LONG) { } }'
    registry, diags = parse_dbd(text)
    assert "t" in registry.record_types
    assert sum(1 for d in diags if d.severity is Severity.WARNING) >= 2


def test_menu_reference_warning():
    text = 'recordtype(t) { field(VAL,DBF_MENU) { menu(nosuch) } }'
    _, diags = parse_dbd(text)
    assert any(d.code == "UnresolvedMenu" for d in diags)
