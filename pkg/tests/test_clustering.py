import json
import math

import numpy as np
import pytest

from pwckit.clustering import (
    FirstOrderClustering,
    HArray,
    HSequence,
    SecondOrderClustering,
    SpecConfigError,
    capacity_uniform,
    check_monotone,
    dgff_spec,
    first_linear,
    first_logcorrected,
    load_spec_file,
    parse_preset,
    phi,
    random_capacity,
    random_first_order,
    random_second_order,
    save_spec_file,
    spec_from_doc,
    zero_spec,
)
from pwckit.tree import LeafSet

LN2 = math.log(2.0)


def test_hsequence_list_backed():
    h = HSequence.from_values([0.0, 1.0, 3.0])
    assert h(2) == 3.0
    assert h.max_age == 2
    assert not h.has_tail
    assert h.is_nondecreasing()
    with pytest.raises(IndexError):
        h(3)


def test_hsequence_closed_form():
    h = HSequence.from_function(lambda k: 0.5 * k)
    assert h.has_tail
    assert h.max_age is None
    assert h(1000) == 500.0
    assert h.is_nondecreasing(kmax=100)


def test_harray_domain():
    h = HArray.from_function(lambda k, l: k + l)
    assert h(3, 1) == 4.0
    with pytest.raises(ValueError):
        h(2, 2)
    with pytest.raises(ValueError):
        h(1, 3)
    table = HArray.from_table([[0, 0], [1.0, 0]])
    assert table(1, 0) == 1.0
    with pytest.raises(IndexError):
        table(2, 0)


def test_harray_dense_array():
    h = HArray.from_function(lambda k, l: 10 * k + l)
    arr = h.array(1)
    assert arr.shape == (3, 3)
    assert arr[2, 1] == 21.0
    assert arr[1, 1] == 0.0  # outside l < k


def test_phi_zero():
    assert phi(zero_spec(), LeafSet(3, (0, 5))) == 0.0
    assert phi(zero_spec(), LeafSet(3, ())) == 0.0


def test_phi_first_order_by_hand():
    spec = FirstOrderClustering(HSequence.from_values([0.0, 1.0, 10.0]), 100.0)
    # {0,1}: one joint of age 1.
    assert phi(spec, LeafSet(2, (0, 1))) == pytest.approx(101.0)
    # {0,3}: one joint of age 2.
    assert phi(spec, LeafSet(2, (0, 3))) == pytest.approx(110.0)
    # {0,1,2}: joints of ages 1 and 2.
    assert phi(spec, LeafSet(2, (0, 1, 2))) == pytest.approx(111.0)
    assert phi(spec, LeafSet(2, ())) == 0.0


def test_phi_first_order_default_const():
    spec = first_linear(2.0)
    # Default constant is h_n at the working depth.
    assert phi(spec, LeafSet(3, (4,))) == pytest.approx(6.0)
    assert phi(spec, LeafSet(2, (1,))) == pytest.approx(4.0)


def test_phi_second_order_by_hand():
    h = HArray.from_function(lambda k, l: 10.0 * k + l)
    spec = SecondOrderClustering(h, 1000.0)
    # {0,1,2} at depth 2: pairs (1,0) x2, (2,0), (2,1), (3,2).
    want = 2 * 10.0 + 20.0 + 21.0 + 32.0 + 1000.0
    assert phi(spec, LeafSet(2, (0, 1, 2))) == pytest.approx(want)


def test_phi_second_order_default_const():
    spec = SecondOrderClustering(HArray.from_function(lambda k, l: k + l))
    # Default constant is h[n+1][n]; a singleton pays (n+1, 0) + const.
    n = 2
    assert phi(spec, LeafSet(n, (0,))) == pytest.approx((n + 1) + (2 * n + 1))


def test_phi_capacity():
    spec = capacity_uniform(1.0)
    assert phi(spec, LeafSet(3, (0,))) == pytest.approx(1.0 / 3.0)


def test_dgff_values():
    h = dgff_spec().h
    assert h(10, 5) == pytest.approx(5 * LN2 + 1.5 * math.log(5.0), abs=1e-14)
    assert h(7, 0) == 0.0
    assert h(2, 1) == pytest.approx(LN2, abs=1e-15)


def test_logcorrected_values():
    h = first_logcorrected().h
    assert h(1) == pytest.approx(LN2, abs=1e-15)
    assert h(8) == pytest.approx(8 * LN2 + math.log(8.0), abs=1e-14)


@pytest.mark.parametrize(
    "text,variant",
    [
        ("zero", "zero"),
        ("dgff", "second"),
        ("first:logcorrected", "first"),
        ("capacity:uniform", "capacity"),
        ("capacity:uniform:2.5", "capacity"),
    ],
)
def test_parse_preset_variants(text, variant):
    assert parse_preset(text).variant == variant


def test_parse_preset_linear_forms():
    for text in ("first:linear:3ln2", "first:linear3ln2"):
        spec = parse_preset(text)
        assert spec.h(1) == pytest.approx(3 * LN2, abs=1e-15)
    assert parse_preset("first:linear:2.5").h(2) == pytest.approx(5.0)
    assert parse_preset("first:linear:ln2").h(1) == pytest.approx(LN2)


def test_parse_preset_rejects_unknown():
    with pytest.raises(SpecConfigError):
        parse_preset("first:quadratic")
    with pytest.raises(SpecConfigError):
        parse_preset("nosuch")


def test_spec_doc_roundtrip_first(tmp_path):
    spec = FirstOrderClustering(HSequence.from_values([0.0, 0.5, 2.0]), 3.0)
    path = tmp_path / "spec.json"
    save_spec_file(spec, path)
    back = load_spec_file(path)
    assert back.variant == "first"
    assert back.h_const == 3.0
    assert [back.h(k) for k in range(3)] == [0.0, 0.5, 2.0]


def test_spec_doc_roundtrip_preset(tmp_path):
    path = tmp_path / "dgff.json"
    save_spec_file(dgff_spec(), path)
    back = load_spec_file(path)
    assert back.variant == "second"
    assert back.h(10, 5) == dgff_spec().h(10, 5)


def test_spec_doc_errors_name_keys():
    with pytest.raises(SpecConfigError) as e:
        spec_from_doc({"variant": "first"})
    assert "'h'" in str(e.value)
    with pytest.raises(SpecConfigError) as e:
        spec_from_doc({"variant": "warp"})
    assert "'variant'" in str(e.value)
    with pytest.raises(SpecConfigError) as e:
        spec_from_doc({"variant": "first", "h": {"kind": "list", "values": []}})
    assert "values" in str(e.value)


def test_load_rejects_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{nope")
    with pytest.raises(SpecConfigError):
        load_spec_file(path)


def test_describe_survives_json(tmp_path):
    # Every preset's document must serialize and come back equivalent.
    for spec in (zero_spec(), first_linear(1.5), first_logcorrected(),
                 dgff_spec(), capacity_uniform(0.5)):
        doc = json.loads(json.dumps(spec.describe()))
        back = spec_from_doc(doc)
        assert back.variant == spec.variant


def test_monotone_holds_for_valid_first_order():
    spec = FirstOrderClustering(HSequence.from_values([0.0, 1.0, 2.0]), 2.0)
    report = check_monotone(spec, depth=2, size_limit=3)
    assert report.ok
    assert report.order_pairs > 0
    assert report.subadditive_pairs > 0


def test_monotone_violation_for_decreasing_weights():
    # h_1 > h_2 makes the sibling pair dearer than the split pair.
    spec = FirstOrderClustering(HSequence.from_values([0.0, 5.0, 1.0]), 5.0)
    report = check_monotone(spec, depth=2, size_limit=3)
    assert report.order_violations


def test_subadditivity_violation_for_small_constant():
    # h_const below h_n charges a union more than its parts.
    spec = FirstOrderClustering(HSequence.from_values([0.0, 1.0, 4.0]), 0.0)
    report = check_monotone(spec, depth=2, size_limit=3)
    assert report.subadditive_violations


def test_monotone_capacity_always():
    report = check_monotone(capacity_uniform(1.0), depth=2, size_limit=3)
    assert report.ok


def test_random_specs_are_valid():
    rng = np.random.default_rng(0)
    for n in (1, 3):
        s1 = random_first_order(n, rng)
        assert s1.h.is_nondecreasing()
        assert s1.h_const >= s1.h(n)
        s2 = random_second_order(n, rng)
        assert s2.h.is_nondecreasing()
        assert s2.h_const >= s2.h(n + 1, n)
        s3 = random_capacity(n, rng)
        assert all(s3.conductance(l) > 0 for l in range(n))
        profile = s3.profile(n)
        assert profile.depth == n
