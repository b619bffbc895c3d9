from __future__ import annotations

import json
import random

import pytest

from k3cusp import census
from k3cusp.model import (NAMED_MODELS, component_automorphisms, build_named_model, is_explicit, model_canonical_form, relabel_model)


@pytest.fixture(scope="module")
def report():
    return census.count_cuspidal_cones()


def test_enumeration():
    ms = census.enumerate_admissible_models()
    assert [m.name for m in ms] == list(NAMED_MODELS)
    assert sum(m.dual_complex == "P" for m in ms) == 12
    assert sum(m.dual_complex == "T" for m in ms) == 3
    assert len({model_canonical_form(m) for m in ms}) == 15


def test_enumeration_stable_under_relabeling():
    rnd = random.Random(7)
    base = {model_canonical_form(m) for m in census.enumerate_admissible_models()}
    moved = []
    for m in census.enumerate_admissible_models():
        for k, c in enumerate(m.components):
            if is_explicit(c):
                ids = c.vertex_ids() + c.boundary_ids()
                new = ids[:]
                rnd.shuffle(new)
                m = relabel_model(m, k, {x: f"q{y}" for x, y in zip(ids, new)})
        moved.append(m)
    rnd.shuffle(moved)
    assert {model_canonical_form(m) for m in moved} == base
    rep = census.count_cuspidal_cones(moved)
    assert rep.total == 93


@pytest.mark.parametrize("label,ell", [("Y_R(-7)", 3), ("Y_T(-8,-9)", 6), ("Y_VD(-2)", 6),
                                       ("Y_T(-8,-8)", 3), ("Y_T(-9,-9)", 3), ("Y_R(0)", 6)])
def test_orbit_lengths(label, ell):
    assert census.orbit_length(build_named_model(label)) == ell


def test_orbit_length_mismatch_is_an_error():
    m = build_named_model("Y_R(-6)").replace(name="Y_R(-7)")
    with pytest.raises(census.CensusInconsistencyError):
        census.orbit_length(m)


def test_totals(report):
    assert report.total == 93
    assert report.class_P_total == 81 == 36 + 24 + 3 + 6 + 12
    assert report.class_T_total == 12 == 6 * 1 + 3 * 2
    r = {x.label: x for x in report.records}
    assert r["Y_R(-2)"].contribution == 12
    for x in report.records:
        assert x.cone_count in (1, 2) and x.orbit_length in (3, 6)
        assert x.orbit_length * len(component_automorphisms(build_named_model(x.label))) == 6


def test_maximal_cones(report):
    assert census.maximal_cone_census(report) == (31, (27, 4), (14, 3))


def test_fan_skeleton(report):
    doc = census.fan_skeleton(report)
    assert len(doc["cones"]) == 31
    assert len({c["orbit_id"] for c in doc["cones"]}) == 17
    assert census.export_fan_skeleton(None, report) == census.export_fan_skeleton(None, report)
    assert json.loads(census.export_fan_skeleton(None, report))["header"]["total"] == 93


def test_table(report):
    text = census.census_table(report)
    assert text.splitlines()[-1] == "93 = 81 + 12; 31; 17 = 14 + 3"


def test_falsifier_shallow():
    assert census.flop_search_falsifier(0) == []
    with pytest.raises(ValueError):
        census.flop_search(-1)


def test_falsifier_reports_candidates_verbatim():
    fs = census.flop_search(1)
    assert fs.reached >= 1
    for path, m in fs.candidates:
        assert path[0] in NAMED_MODELS and len(path) == 2
