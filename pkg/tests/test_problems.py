"""Problem generators and JSON round trip.

Expected values below were frozen before the implementation existed.
Derivations are stated next to each block: tables written out by hand from
the family definitions, counts recomputed independently with math.comb,
period properties checked by direct XOR arithmetic inside the test.
"""

from __future__ import annotations

import json
import math

import pytest

from retroquery.errors import FormatError, SizeError, UnknownSetting, ValidationError
from retroquery.problems import (
    OracleProblem,
    Setting,
    gen_deutsch,
    gen_deutsch_jozsa,
    gen_grover,
    gen_simon,
    load_problem,
    require_setting,
    save_problem,
)


# === Deutsch family ===

def test_deutsch_settings_frozen():
    # Hand-frozen: the four 1-bit-to-1-bit tables, b = f(0)f(1),
    # solution 0 for constant tables and 1 for balanced ones.
    p = gen_deutsch()
    assert p.arg_bits == 1 and p.out_bits == 1
    assert [s.b for s in p.settings] == ["00", "01", "10", "11"]
    assert p.settings[0].table == {"0": "0", "1": "0"}
    assert p.settings[1].table == {"0": "0", "1": "1"}
    assert p.settings[2].table == {"0": "1", "1": "0"}
    assert p.settings[3].table == {"0": "1", "1": "1"}
    assert [s.solution for s in p.settings] == ["0", "1", "1", "0"]
    # 4 settings fill the whole 2-bit space, so no structure to exploit
    assert p.structured is False
    # b doubles as the table read in increasing argument order
    assert p.is_table_suffix()


def test_deutsch_feature_defaults_to_solution():
    p = gen_deutsch()
    assert all(s.feature == s.solution for s in p.settings)


# === Grover family ===

def test_grover_n2_frozen():
    # Hand-frozen: f_b(a) = 1 iff a == b, solution is b itself.
    p = gen_grover(2)
    assert p.arg_bits == 2 and p.out_bits == 1
    assert [s.b for s in p.settings] == ["00", "01", "10", "11"]
    s01 = require_setting(p, "01")
    assert s01.table == {"00": "0", "01": "1", "10": "0", "11": "0"}
    assert s01.solution == "01"
    assert p.structured is False
    assert not p.is_table_suffix()  # table 0100 != b 01


def test_grover_sizes_and_bounds():
    for n in (1, 3, 5):
        p = gen_grover(n)
        assert len(p.settings) == 2 ** n
        for s in p.settings:
            assert sum(v == "1" for v in s.table.values()) == 1, "exactly one marked arg"
    with pytest.raises(SizeError):
        gen_grover(17)
    with pytest.raises(ValidationError):
        gen_grover(0)


# === Deutsch-Jozsa family ===

def test_dj2_settings_frozen():
    # Hand-frozen: 2 constant + C(4,2)=6 balanced tables, b = table string in
    # lex argument order. Labels: constant -> 00; a balanced class {b, ~b}
    # is labeled by the binary index of its lex-smaller member within the
    # sorted setting list (recomputed below).
    p = gen_deutsch_jozsa(2)
    bs = [s.b for s in p.settings]
    assert bs == ["0000", "0011", "0101", "0110", "1001", "1010", "1100", "1111"]
    # out_bits is the table value width; solution labels are wider strings
    assert p.arg_bits == 2 and p.out_bits == 1
    assert p.structured is True  # 8 < 2**4
    assert p.is_table_suffix()

    sol = {s.b: s.solution for s in p.settings}
    # complements share a label; constants share the all-zeros label
    assert sol["0000"] == sol["1111"] == "00"
    assert sol["0011"] == sol["1100"]
    assert sol["0101"] == sol["1010"]
    assert sol["0110"] == sol["1001"]
    assert sol["0011"] != sol["0000"]
    # concrete spelling: index of the smaller member in the sorted list
    assert sol["0011"] == format(bs.index("0011"), "02b") == "01"
    assert sol["0101"] == "10"
    assert sol["0110"] == "11"

    feat = {s.b: s.feature for s in p.settings}
    assert feat["0000"] == feat["1111"] == "constant"
    assert all(feat[b] == "balanced" for b in bs if b not in ("0000", "1111"))


def test_dj1_reduces_to_deutsch_settings():
    p = gen_deutsch_jozsa(1)
    assert [s.b for s in p.settings] == ["00", "01", "10", "11"]
    assert p.structured is False  # 4 == 2**2, nothing excluded
    # balanced class {01,10} gets the index of 01 in the sorted list
    sol = {s.b: s.solution for s in p.settings}
    assert sol["00"] == sol["11"] == "0"
    assert sol["01"] == sol["10"] == "1"


@pytest.mark.parametrize("n", [2, 3, 4])
def test_dj_counts(n):
    # Independent count: 2 constant + C(2^n, 2^(n-1)) balanced.
    p = gen_deutsch_jozsa(n)
    assert len(p.settings) == 2 + math.comb(2 ** n, 2 ** (n - 1))
    assert p.structured is True
    with pytest.raises(SizeError):
        gen_deutsch_jozsa(5)


def test_dj3_label_grouping_recomputed():
    # Independent recomputation of the labeling rule for one pair.
    p = gen_deutsch_jozsa(3)
    bs = [s.b for s in p.settings]
    sol = {s.b: s.solution for s in p.settings}
    b = "00001111"
    comp = "11110000"
    assert sol[b] == sol[comp]
    smaller = min(b, comp)
    assert sol[b] == format(bs.index(smaller), "0" + str(len(sol[b])) + "b")
    assert len({len(s.solution) for s in p.settings}) == 1, "uniform label width"


# === Simon family ===

def test_simon2_settings_frozen():
    # Hand-frozen from the family definition: 2-to-1 tables with period h.
    p = gen_simon(2)
    assert [s.b for s in p.settings] == ["0011", "0101", "0110", "1001", "1010", "1100"]
    assert p.arg_bits == 2 and p.out_bits == 1
    assert p.structured is True  # 6 < 2**4
    assert p.is_table_suffix()

    s1010 = require_setting(p, "1010")
    # b read in lex argument order: f(00)=1, f(01)=0, f(10)=1, f(11)=0
    assert s1010.table == {"00": "1", "01": "0", "10": "1", "11": "0"}

    h = {s.b: s.solution for s in p.settings}
    assert h["0011"] == h["1100"] == "01"
    assert h["0101"] == h["1010"] == "10"
    assert h["0110"] == h["1001"] == "11"
    assert p.meta is not None
    assert dict(p.meta.period) == h


def _xor_bits(a: str, b: str) -> str:
    return "".join("1" if x != y else "0" for x, y in zip(a, b))


@pytest.mark.parametrize("n", [2, 3])
def test_simon_period_property(n):
    # Independent check: every value appears exactly twice and
    # f(a) == f(a XOR h) for the recorded period h != 0.
    p = gen_simon(n)
    expected_count = {2: 6, 3: 168}[n]  # (2^n - 1) choices of h * (2^(n-1))! value assignments
    assert len(p.settings) == expected_count
    for s in p.settings:
        h = p.meta.period[s.b]
        assert h == s.solution
        assert set(h) <= {"0", "1"} and "1" in h
        values = list(s.table.values())
        assert all(values.count(v) == 2 for v in values), "2-to-1 table"
        for a in s.table:
            assert s.table[a] == s.table[_xor_bits(a, h)]
    with pytest.raises(ValidationError):
        gen_simon(4)


def test_simon3_is_16_bit_table_suffix():
    p = gen_simon(3)
    assert p.arg_bits == 3 and p.out_bits == 2
    assert all(len(s.b) == 16 for s in p.settings)
    assert p.is_table_suffix()
    assert p.structured is True


# === Construction invariants ===

def test_settings_sorted_and_duplicates_rejected():
    st = [
        Setting(b="1", table={"0": "0", "1": "1"}, solution="1"),
        Setting(b="0", table={"0": "0", "1": "0"}, solution="0"),
    ]
    p = OracleProblem(name="tiny", arg_bits=1, out_bits=1, settings=st)
    assert [s.b for s in p.settings] == ["0", "1"], "canonical lex order"

    with pytest.raises(ValidationError):
        OracleProblem(
            name="dup",
            arg_bits=1,
            out_bits=1,
            settings=[
                Setting(b="0", table={"0": "0", "1": "0"}, solution="0"),
                Setting(b="0", table={"0": "0", "1": "1"}, solution="1"),
            ],
        )


def test_structured_is_computed_not_declared():
    # structured <=> fewer settings than 2^(setting bit length)
    p2 = OracleProblem(
        name="two",
        arg_bits=1,
        out_bits=1,
        settings=[
            Setting(b="0", table={"0": "0", "1": "0"}, solution="0"),
            Setting(b="1", table={"0": "0", "1": "1"}, solution="1"),
        ],
    )
    assert p2.structured is False  # 2 settings, 1-bit labels, space is full
    assert gen_simon(2).structured is True


def test_table_must_cover_all_arguments():
    with pytest.raises(ValidationError):
        OracleProblem(
            name="gap",
            arg_bits=1,
            out_bits=1,
            settings=[Setting(b="0", table={"0": "0"}, solution="0")],
        )


def test_unknown_setting_lookup():
    with pytest.raises(UnknownSetting):
        require_setting(gen_deutsch(), "99")


# === JSON round trip ===

def test_round_trip_identity(tmp_path):
    for p in (gen_deutsch(), gen_grover(2), gen_deutsch_jozsa(2), gen_simon(2)):
        path = tmp_path / (p.name + ".json")
        save_problem(p, path)
        q = load_problem(path)
        assert q == p, p.name
    print("round trip ok for all four builtin families")


def test_saved_json_shape(tmp_path):
    path = tmp_path / "dj.json"
    save_problem(gen_deutsch_jozsa(2), path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["name"] == "deutsch_jozsa_n2"
    assert doc["arg_bits"] == 2 and doc["out_bits"] == 1
    assert [s["b"] for s in doc["settings"]] == [
        "0000", "0011", "0101", "0110", "1001", "1010", "1100", "1111"
    ]
    first = doc["settings"][1]
    assert first["table"] == {"00": "0", "01": "0", "10": "1", "11": "1"}
    assert first["solution"] == "01"
    # coarse feature serialized only when it differs from the solution
    assert first["feature"] == "balanced"
    save_problem(gen_deutsch(), tmp_path / "d.json")
    deutsch_doc = json.loads((tmp_path / "d.json").read_text(encoding="utf-8"))
    assert all("feature" not in s for s in deutsch_doc["settings"])
    # period map only for problems that carry one
    assert "period" not in doc
    simon_path = tmp_path / "s.json"
    save_problem(gen_simon(2), simon_path)
    sdoc = json.loads(simon_path.read_text(encoding="utf-8"))
    assert sdoc["period"]["0011"] == "01"


def test_load_rejects_bad_documents(tmp_path):
    good = {
        "name": "t",
        "arg_bits": 1,
        "out_bits": 1,
        "settings": [
            {"b": "0", "table": {"0": "0", "1": "0"}, "solution": "0"},
            {"b": "1", "table": {"0": "1", "1": "1"}, "solution": "1"},
        ],
    }

    def dump(doc):
        f = tmp_path / "x.json"
        f.write_text(json.dumps(doc), encoding="utf-8")
        return f

    # not JSON at all
    f = tmp_path / "x.json"
    f.write_text("{not json", encoding="utf-8")
    with pytest.raises(FormatError):
        load_problem(f)

    # missing required field
    doc = {k: v for k, v in good.items() if k != "out_bits"}
    with pytest.raises(FormatError):
        load_problem(dump(doc))

    # non-bit character is a parse failure of the field
    doc = json.loads(json.dumps(good))
    doc["settings"][0]["b"] = "2"
    with pytest.raises(FormatError):
        load_problem(dump(doc))

    # wrong table arity is an invariant violation
    doc = json.loads(json.dumps(good))
    del doc["settings"][0]["table"]["1"]
    with pytest.raises(ValidationError):
        load_problem(dump(doc))

    # duplicate setting labels
    doc = json.loads(json.dumps(good))
    doc["settings"][1]["b"] = "0"
    with pytest.raises(ValidationError):
        load_problem(dump(doc))

    # period must actually be a period of the table
    doc = json.loads(json.dumps(good))
    doc["settings"][1]["table"] = {"0": "0", "1": "1"}  # not constant, so h=1 fails
    doc["period"] = {"0": "1", "1": "1"}
    with pytest.raises(ValidationError):
        load_problem(dump(doc))

    assert load_problem(dump(good)).name == "t"


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
