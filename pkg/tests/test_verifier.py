import json
import math

import pytest

from bergman.io import to_json
from bergman.verifier import (
    REPORT_COLUMNS,
    THEOREMS,
    GridSpec,
    neck_profile,
    reference_profile_table,
    report_csv,
    report_json_obj,
    summarize,
    verify_all,
    verify_theorem,
)

FAST = tuple(t for t in THEOREMS if t != "Cor_Limit")


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(())
    with pytest.raises(ValueError):
        GridSpec((100,), points_per_interval=0)
    assert GridSpec([55, 100]).k_list == (55, 100)


def test_unknown_theorem():
    with pytest.raises(ValueError):
        verify_theorem("T9", GridSpec((100,)))


def test_deterministic_and_seeded():
    g = GridSpec((100,), 5, seed=7)
    a = [c.as_dict() for c in verify_theorem("T1_2", g)]
    b = [c.as_dict() for c in verify_theorem("T1_2", g)]
    assert a == b
    c = [x.as_dict() for x in verify_theorem("T1_2", GridSpec((100,), 5, seed=8))]
    assert [x["t"] for x in a] != [x["t"] for x in c]


def test_checks_are_sorted():
    checks = verify_all(GridSpec((100, 55), 3), FAST)
    keys = [(THEOREMS.index(c.theorem_id), c.k) for c in checks]
    assert keys == sorted(keys)


def test_skip_accounting_small_k():
    checks = verify_theorem("T1_1b", GridSpec((10,)))
    s = summarize(checks)["T1_1b"]
    assert s["pass"] + s["fail"] + s["skip"] == len(checks)
    skipped = [c for c in checks if c.status == "skip"]
    assert skipped and all(c.passed is None and c.reason for c in skipped)
    # b = 2, 3 meet k/(b(b+1)) >= log 2 at k = 10; b = 4, 5 do not
    assert sorted({c.params["b"] for c in skipped}) == [4, 5]
    stir = verify_theorem("Cor_Stirling", GridSpec((10,)))
    assert all(c.status == "skip" and c.reason == "k < 79" for c in stir)


def test_known_passes():
    g = GridSpec((200,), 4)
    for tid in ("T1_1b", "Poisson_identity", "T1_3"):
        checks = verify_theorem(tid, g)
        assert not [c for c in checks if c.status == "fail"], tid


def test_known_failures_are_reported():
    # the lattice upper sandwich of the neck theorem undershoots for small b
    lat = verify_theorem("T1_4_lattice", GridSpec((100,)))
    bad = [c for c in lat if c.status == "fail"]
    assert any(c.params["b"] == 4 for c in bad)
    for c in bad:
        assert c.margin < 0 and c.passed is False


def test_margins_match_sides():
    for c in verify_theorem("T1_1a", GridSpec((100,), 3)):
        if c.status != "skip":
            assert c.margin >= c.rhs - c.lhs - 1e-9
            assert c.passed == (c.margin >= 0)


def test_json_round_trip():
    checks = verify_all(GridSpec((100,), 2), ("T1_1b", "L_f1", "Cor_Stirling"))
    text = to_json(report_json_obj(checks))
    back = json.loads(text)
    assert len(back) == len(checks)
    for d, c in zip(back, checks):
        assert d["theorem_id"] == c.theorem_id and d["status"] == c.status
        if c.lhs is not None and math.isfinite(c.lhs):
            assert d["lhs"] == c.lhs


def test_csv_report_shape():
    checks = verify_theorem("L_fb", GridSpec((60,)))
    lines = report_csv(checks).splitlines()
    assert lines[0] == ",".join(REPORT_COLUMNS)
    assert len(lines) == len(checks) + 1


def test_reference_profile_table():
    rows = reference_profile_table(64)
    assert rows[0][0] == 0.0 and rows[-1][0] == 4.0
    h = [r[1] for r in rows]
    for i in range(len(h) - 16):
        assert abs(h[i] - h[i + 16]) <= 1e-12
    assert max(h) == pytest.approx(h[0], abs=1e-15)
    assert min(h) == pytest.approx(h[8], abs=1e-15)


def test_neck_profile_rows():
    rows = neck_profile(10 ** 4, 100, samples=8)
    assert rows[0].u == 0.0 and rows[0].b == 100
    assert rows[-1].b == 101 and rows[-1].t == pytest.approx(10 ** 4 / 101)
    for r in rows:
        assert r.log_oracle <= r.log_upper + 1e-9
