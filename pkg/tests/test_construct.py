import importlib

import pytest

construct_mod = importlib.import_module("aqsteiner.construct")
from aqsteiner.construct import (
    Case,
    CaseTag,
    FallbackDisabled,
    SteinerTree,
    TreeFamily,
    base_case_search,
    classify,
    construct,
    construct_case1,
    construct_case2_image,
    construct_case2_nonimage,
    embed,
    target_family_size,
)
from aqsteiner.topology import (
    AugmentedCube,
    ContractViolation,
    Vertex,
    complement_automorphism,
    hc_swap_automorphism,
    parse_vertex,
)
from aqsteiner.verify import verify_family


def vs(*labels):
    return [parse_vertex(s) for s in labels]


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def test_classify_examples():
    g = AugmentedCube(4)
    assert classify(g, vs("0000", "0001", "0010")).case is Case.CASE1
    tag = classify(g, vs("0000", "0011", "1100"))
    assert tag.case in (Case.CASE2_1_1, Case.CASE2_1_2, Case.CASE2_1_3)
    tag = classify(g, vs("0000", "0011", "1110"))
    assert tag.case.value.startswith("Case2_2")


def test_classify_cross_twin_pair():
    # 0111 is the trailing complement of 0000, so their cross partners
    # coincide; with z equal to one of them this is the twin branch
    g = AugmentedCube(4)
    tag = classify(g, vs("0000", "0111", "1000"))
    assert tag.case is Case.CASE2_1_1


def test_classify_normalisation_flags():
    g = AugmentedCube(4)
    # two targets on the upper side: complement applied first
    tag = classify(g, vs("1000", "1011", "0100"))
    assert "complement" in tag.normalization
    # z is an all-bits partner: matching swap applied
    tag = classify(g, vs("0000", "0011", "1111"))
    assert "hc_swap" in tag.normalization
    assert tag.case in (Case.CASE2_1_1, Case.CASE2_1_2, Case.CASE2_1_3)


def test_classify_contract_errors():
    g = AugmentedCube(4)
    with pytest.raises(ContractViolation):
        classify(g, vs("0000", "0001"))
    with pytest.raises(ContractViolation):
        classify(g, vs("0000", "0000", "0001"))
    with pytest.raises(ContractViolation):
        classify(AugmentedCube(2), vs("00", "01", "10"))


# ---------------------------------------------------------------------------
# construction, small dimensions
# ---------------------------------------------------------------------------

def test_construct_dim3_example():
    g = AugmentedCube(3)
    fam = construct(g, vs("000", "001", "011"))
    assert len(fam.trees) == 3
    assert verify_family(g, fam).accepted
    assert fam.provenance[0].case is Case.BASE3
    assert not fam.fallback_used


def test_construct_dim4_samples():
    g = AugmentedCube(4)
    for trio in [
        ("0000", "0011", "1100"),
        ("0000", "0001", "0010"),
        ("0101", "1010", "1111"),
        ("0000", "0111", "1000"),
    ]:
        fam = construct(g, vs(*trio))
        assert len(fam.trees) == 5
        assert verify_family(g, fam).accepted
        assert fam.provenance[0].case is Case.BASE4


def test_count_invariant_dim6_sampled():
    from aqsteiner.cli import run_sweep, sample_triples, sweep_summary

    records = run_sweep(6, sample_triples(6, 500, 7), jobs=1)
    summary = sweep_summary(6, records)
    assert summary["triples"] == 500
    assert summary["min_size"] == summary["max_size"] == 9
    assert summary["all_verified"]
    assert summary["fallback_count"] == 0


def test_high_dimensions_sampled():
    from aqsteiner.cli import run_sweep, sample_triples, sweep_summary

    for n, count in ((7, 40), (10, 10)):
        records = run_sweep(n, sample_triples(n, count, 11), jobs=1)
        summary = sweep_summary(n, records)
        assert summary["min_size"] == summary["max_size"] == 2 * n - 3
        assert summary["all_verified"]
        assert summary["fallback_count"] == 0


def test_construct_dim5_one_side_recurses():
    g = AugmentedCube(5)
    fam = construct(g, vs("00000", "00001", "00010"))
    assert len(fam.trees) == 7
    assert verify_family(g, fam).accepted
    assert fam.provenance[0].case is Case.CASE1
    assert fam.provenance[1].case is Case.BASE4  # the recursive batch


def test_construct_case1_partition_and_attachments():
    g = AugmentedCube(5)
    targets = vs("00000", "00011", "01100")
    fam = construct_case1(g, targets)
    assert len(fam.trees) == 7
    # the two extra trees use cross edges into distinct quarters
    quarter_trees = fam.trees[5:]
    shift = 3
    seen_quarters = set()
    for tree in quarter_trees:
        upper = {v for e in tree.edges for v in e if v.bits >> 4}
        quarters = {v.bits >> shift for v in upper}
        assert len(quarters) == 1
        seen_quarters |= quarters
        # each target hangs by exactly one pendant cross edge
        for t in targets:
            touching = [e for e in tree.edges if t in e]
            assert len(touching) == 1
    assert seen_quarters == {0b10, 0b11}


def test_construct_case1_wrong_shape_rejected():
    g = AugmentedCube(5)
    with pytest.raises(ContractViolation):
        construct_case1(g, vs("00000", "00001", "10000"))


def test_branch_builders_match_dispatch():
    g = AugmentedCube(5)
    twin = vs("00000", "01111", "10000")
    tag = classify(g, twin)
    assert tag.case is Case.CASE2_1_1
    fam = construct_case2_image(g, twin, tag)
    assert len(fam.trees) == 7 and verify_family(g, fam).accepted

    other = vs("00000", "00011", "11110")
    tag = classify(g, other)
    assert tag.case.value.startswith("Case2_2")
    fam = construct_case2_nonimage(g, other, tag)
    assert len(fam.trees) == 7 and verify_family(g, fam).accepted

    with pytest.raises(ContractViolation):
        construct_case2_image(g, other, tag)


def test_construct_rejects_bad_inputs():
    g = AugmentedCube(3)
    with pytest.raises(ContractViolation):
        construct(g, vs("000", "000", "001"))
    with pytest.raises(ContractViolation):
        construct(AugmentedCube(2), vs("00", "01", "11"))


# ---------------------------------------------------------------------------
# base search
# ---------------------------------------------------------------------------

def test_base_search_targets_three_and_four():
    g = AugmentedCube(3)
    fam3 = base_case_search(g, vs("000", "001", "011"), 3)
    assert len(fam3.trees) == 3 and verify_family(g, fam3).accepted
    fam4 = base_case_search(g, vs("001", "010", "100"), 4)
    assert len(fam4.trees) == 4 and verify_family(g, fam4).accepted


def test_base_search_cache_consistency_across_orbit():
    # two triples related by an automorphism share a cached solution;
    # both must verify in their own coordinates
    g = AugmentedCube(4)
    fam_a = base_case_search(g, vs("0000", "0001", "0010"), 5)
    image = [complement_automorphism(v) for v in vs("0000", "0001", "0010")]
    fam_b = base_case_search(g, image, 5)
    assert verify_family(g, fam_a).accepted and verify_family(g, fam_b).accepted
    assert frozenset(fam_b.terminals) == frozenset(image)


def test_base_search_contract():
    with pytest.raises(ContractViolation):
        base_case_search(AugmentedCube(5), vs("00000", "00001", "00010"), 7)


# ---------------------------------------------------------------------------
# embedding and equivariance
# ---------------------------------------------------------------------------

def test_embed_trivials():
    g = AugmentedCube(3)
    fam = construct(g, vs("000", "001", "011"))
    up = embed(fam, 0)
    assert up.dim == 4
    assert sorted(t.label() for t in up.terminals) == ["0000", "0001", "0011"]
    assert verify_family(AugmentedCube(4), up).accepted
    up1 = embed(fam, 1)
    assert sorted(t.label() for t in up1.terminals) == ["1000", "1001", "1011"]
    assert verify_family(AugmentedCube(4), up1).accepted
    empty = TreeFamily(3, fam.terminals, (), fam.provenance, False)
    assert embed(empty, 0).trees == ()


@pytest.mark.parametrize("auto", [complement_automorphism, hc_swap_automorphism])
def test_family_images_under_automorphisms_verify(auto):
    g = AugmentedCube(4)
    fam = construct(g, vs("0000", "0011", "1110"))
    mapped = TreeFamily(
        dim=4,
        terminals=frozenset(auto(t) for t in fam.terminals),
        trees=tuple(
            SteinerTree(
                frozenset(auto(t) for t in tree.terminals),
                frozenset(tuple(sorted((auto(u), auto(v)))) for (u, v) in tree.edges),
            )
            for tree in fam.trees
        ),
        provenance=fam.provenance,
        fallback_used=False,
    )
    assert verify_family(g, mapped).accepted


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------

def test_construct_deterministic():
    g = AugmentedCube(5)
    for trio in [("00000", "00011", "11100"), ("00000", "01111", "10000")]:
        a = construct(g, vs(*trio))
        b = construct(g, vs(*trio))
        assert a == b


# ---------------------------------------------------------------------------
# fallback machinery
# ---------------------------------------------------------------------------

def _broken_recipe(g, x, y, z):
    n = g.dim
    a, b = Vertex(0, n), Vertex(1, n)
    return [{tuple(sorted((a, b)))} for _ in range(target_family_size(n))]


def test_fallback_repairs_broken_recipe(monkeypatch):
    g = AugmentedCube(5)
    twin = vs("00000", "01111", "10000")
    assert classify(g, twin).case is Case.CASE2_1_1
    monkeypatch.setitem(construct_mod._RECIPES, Case.CASE2_1_1, _broken_recipe)
    fam = construct(g, twin)
    assert fam.fallback_used
    assert fam.provenance[0].case is Case.FALLBACK
    assert "Case2_1_1" in fam.provenance[0].variant
    assert len(fam.trees) == 7
    assert verify_family(g, fam).accepted


def test_no_fallback_mode_raises(monkeypatch):
    g = AugmentedCube(5)
    twin = vs("00000", "01111", "10000")
    monkeypatch.setitem(construct_mod._RECIPES, Case.CASE2_1_1, _broken_recipe)
    with pytest.raises(FallbackDisabled):
        construct(g, twin, allow_fallback=False)


def test_spider_pack_finds_full_family():
    g = AugmentedCube(5)
    labels = [0b00000, 0b00011, 0b11100]
    trees = construct_mod._spider_pack(g, labels, 7)
    assert trees is not None and len(trees) == 7
    terminals = frozenset(Vertex(a, 5) for a in labels)
    fam = TreeFamily(
        5,
        terminals,
        tuple(SteinerTree(terminals, frozenset(t)) for t in trees),
        (CaseTag(Case.FALLBACK),),
        True,
    )
    assert verify_family(g, fam).accepted


# ---------------------------------------------------------------------------
# spanning-path mode for the one-side branch
# ---------------------------------------------------------------------------

def test_fidelity_mode_spans_the_quarters():
    g = AugmentedCube(5)
    targets = vs("00000", "00011", "01100")
    fam = construct(g, targets, fidelity=True)
    assert len(fam.trees) == 7
    assert verify_family(g, fam).accepted
    for tree in fam.trees[5:]:
        upper = {v for e in tree.edges for v in e if v.bits >> 4}
        assert len(upper) == 8  # the whole quarter is visited
