import itertools
import math
import random
from fractions import Fraction

import pytest

from sumrank.groups import element_add, element_neg, parse_group_spec, power_element
from sumrank.stpp import (
    STPPConstruction,
    border_from_stpp,
    collect_stpp_instances,
    difference_list,
    omega_report,
    packing_report,
    random_stpp,
    unborder,
    uniformize,
    verify_stpp,
    verify_tpp,
)
from sumrank.sumfree import verify_border, verify_sumfree


def cyclic(spec, *subsets):
    g = parse_group_spec(spec)
    return STPPConstruction(
        g, (tuple(tuple((v,) for v in subset) for subset in subsets),)
    )


def multi(spec, triples):
    g = parse_group_spec(spec)
    return STPPConstruction(
        g,
        tuple(
            tuple(tuple((v,) for v in subset) for subset in triple) for triple in triples
        ),
    )


PIPELINE_GROUPS = [
    "Z4",
    "Z5",
    "Z7",
    "Z8",
    "Z9",
    "Z2^2",
    "Z2 x Z4",
    "Z3^2",
    "Z12",
    "Z16",
]


def test_tpp_examples():
    g2 = parse_group_spec("Z2")
    assert verify_tpp(g2, ((0,),), ((0,),), ((0,),))
    assert not verify_tpp(g2, ((0,), (1,)), ((0,), (1,)), ((0,), (1,)))
    g4 = parse_group_spec("Z4")
    assert verify_tpp(g4, ((0,), (1,)), ((0,),), ((0,),))
    g5 = parse_group_spec("Z5")
    assert verify_tpp(g5, ((0,), (1,)), ((0,), (2,)), ((0,),))


def test_stpp_single_trivial():
    assert verify_stpp(cyclic("Z2", [0], [0], [0]))


def test_stpp_rejects_duplicate_trivial_triples():
    c = multi("Z2", [([0], [0], [0]), ([0], [0], [0])])
    assert not verify_stpp(c)


def test_stpp_fails_when_tpp_fails():
    assert not verify_stpp(cyclic("Z2", [0, 1], [0, 1], [0, 1]))


def test_stpp_difference_sets_disjoint():
    instances = collect_stpp_instances(
        [parse_group_spec(s) for s in ("Z8", "Z9", "Z12")], 6, seed=5
    )
    for c in instances:
        g = c.group
        for pick in (lambda t: (t[0], t[1]), lambda t: (t[1], t[2]), lambda t: (t[2], t[0])):
            sets = [set(difference_list(g, *pick(t))) for t in c.triples]
            for s1, s2 in itertools.combinations(sets, 2):
                assert not (s1 & s2)


def test_packing_trivial_and_z4():
    trivial = cyclic("Z2", [0], [0], [0])
    report = packing_report(trivial)
    assert report.ab == report.bc == report.ca == 0.0

    c4 = cyclic("Z4", [0, 1], [0], [0])
    report = packing_report(c4)
    assert report.ab == pytest.approx(0.5)
    assert report.bc == 0.0
    assert report.ca == pytest.approx(0.5)


def test_packing_absent_for_trivial_group():
    from sumrank.groups import GroupSpec

    g = GroupSpec([])
    zero = g.zero()
    c = STPPConstruction(g, (((zero,), (zero,), (zero,)),))
    assert packing_report(c) is None


def test_packing_exponents_never_exceed_one():
    instances = collect_stpp_instances(
        [parse_group_spec(s) for s in ("Z7", "Z8", "Z3^2")], 6, seed=9
    )
    for c in instances:
        report = packing_report(c)
        assert max(report.ab, report.bc, report.ca) <= 1.0 + 1e-12


def test_omega_powers_of_two():
    report = omega_report([8], 4)
    assert report.omega_bound == pytest.approx(2.0, abs=1e-9)
    assert not report.capped and not report.clamped

    assert omega_report([8], 8).omega_bound == 3.0
    assert omega_report([8], 8).capped

    low = omega_report([4], 2)
    assert low.clamped
    assert low.omega_bound == 2.0
    assert low.raw_omega == pytest.approx(1.5, abs=1e-9)


def test_omega_vacuous():
    assert omega_report([1], 4).vacuous
    assert omega_report([1, 1], 1).vacuous


def test_omega_monotone_in_extra_triples():
    base = omega_report([8], 64).omega_bound
    more = omega_report([8, 4], 64).omega_bound
    even_more = omega_report([8, 4, 4], 64).omega_bound
    assert base >= more >= even_more


def test_omega_floor_hand_computations():
    # single trivial triple in Z2: packing exponents 0, eps = 1/3, floor 3
    assert omega_report(cyclic("Z2", [0], [0], [0])).omega_floor == pytest.approx(3.0)
    # Z4 with sums (2, 1, 2): min exponent 0, floor 3 again
    assert omega_report(cyclic("Z4", [0, 1], [0], [0])).omega_floor == pytest.approx(3.0)
    # Z5 with sums (4, 2, 2): min exponent log2/log5
    expected = 2.0 / (1.0 - (1.0 - math.log(2) / math.log(5)) / 3.0)
    report = omega_report(cyclic("Z5", [0, 1], [0, 2], [0]))
    assert report.omega_floor == pytest.approx(expected, rel=1e-12)


def test_omega_requires_order_for_bare_sizes():
    with pytest.raises(ValueError):
        omega_report([8])


def test_border_trivial_example():
    border = border_from_stpp(cyclic("Z2", [0], [0], [0]))
    assert border.matching.triples == (((0,), (0,), (0,)),)
    assert border.alpha == {(0,): 6}
    assert border.beta == {(0,): -3}
    assert border.gamma == {(0,): -3}
    assert verify_border(border) == (True, None)
    assert border.cardinality >= Fraction(1, 3)


def test_border_rejects_invalid_construction():
    with pytest.raises(ValueError):
        border_from_stpp(cyclic("Z2", [0, 1], [0, 1], [0, 1]))


def test_unborder_trivial():
    border = border_from_stpp(cyclic("Z2", [0], [0], [0]))
    result = unborder(border, 1)
    assert result.cardinality == 1
    assert verify_sumfree(result) == (True, None)


def test_unborder_zero_weights_keeps_full_power():
    from sumrank.fftensor import Matching3
    from sumrank.sumfree import BorderSumFreeSet

    g = parse_group_spec("Z3")
    matching = Matching3((((0,), (0,), (0,)), ((1,), (1,), (1,))))
    border = BorderSumFreeSet(
        g,
        matching,
        {(0,): 0, (1,): 0},
        {(0,): 0, (1,): 0},
        {(0,): 0, (1,): 0},
    )
    result = unborder(border, 3)
    assert result.cardinality == 2**3
    assert verify_sumfree(result) == (True, None)


def test_unborder_guard():
    border = border_from_stpp(cyclic("Z4", [0, 1], [0], [0]))
    with pytest.raises(ValueError):
        unborder(border, 2, guard=0)


def test_pipeline_on_searched_instances():
    groups = [parse_group_spec(s) for s in PIPELINE_GROUPS]
    instances = collect_stpp_instances(groups, 8, seed=1)
    for c in instances:
        border = border_from_stpp(c)
        assert verify_border(border) == (True, None)
        promised = sum(
            Fraction(len(a) * len(b) * len(cc), len(a) + len(b) + len(cc))
            for a, b, cc in c.triples
        )
        assert Fraction(border.cardinality) >= promised
        for n in (1, 2):
            lifted = unborder(border, n)
            assert verify_sumfree(lifted) == (True, None)
            t = border.weight_range
            floor = -(-(border.cardinality**n) // (2 * n * t + 1) ** 3)
            assert lifted.cardinality >= floor


def test_uniformize_single_triple():
    c = cyclic("Z4", [0, 1], [0], [0])
    symbolic = uniformize(c, 3)
    assert symbolic.mu1 == (3,)
    product = 2  # |A| |B| |C|
    assert symbolic.size_a == product**3
    assert symbolic.size_b == product**3
    assert symbolic.size_c == product**3


def test_uniformize_brute_force_two_triples():
    g = parse_group_spec("Z16")
    instances = collect_stpp_instances([g], 4, seed=3)
    two = next((c for c in instances if len(c.triples) == 2), None)
    if two is None:
        pytest.skip("search produced no two-triple instance on this seed")
    n_power = 2
    symbolic = uniformize(two, n_power)
    sizes = [(len(a), len(b), len(c)) for a, b, c in two.triples]

    def multinomial(mu):
        out = math.factorial(sum(mu))
        for v in mu:
            out //= math.factorial(v)
        return out

    def restricted(mu, pick):
        value = multinomial(mu)
        for i, count in enumerate(mu):
            value *= pick(sizes[i]) ** count
        return value

    best = 0
    compositions = [
        (k, n_power - k) for k in range(n_power + 1)
    ]
    for mu1 in compositions:
        for mu2 in compositions:
            for mu3 in compositions:
                value = (
                    restricted(mu1, lambda s: s[0] * s[1])
                    * restricted(mu2, lambda s: s[1] * s[2])
                    * restricted(mu3, lambda s: s[2] * s[0])
                )
                best = max(best, value)
    chosen = (
        symbolic.restricted_sums[0]
        * symbolic.restricted_sums[1]
        * symbolic.restricted_sums[2]
    )
    assert chosen == best


def test_uniformize_sizes_uniform_across_indices():
    c = cyclic("Z8", [0, 1], [0], [0])
    symbolic = uniformize(c, 2)
    rng = random.Random(0)
    g = c.group
    for _ in range(5):
        u = symbolic.sample_index(symbolic.mu1, rng)
        v = symbolic.sample_index(symbolic.mu2, rng)
        w = symbolic.sample_index(symbolic.mu3, rng)
        # |A-hat| for these indices equals the symbolic size
        size = 1
        for i in u:
            size *= len(c.triples[i][0])
        for i in v:
            size *= len(c.triples[i][1])
        for i in w:
            size *= len(c.triples[i][2])
        assert size == symbolic.size_a
        member = symbolic.sample_member("A", u, v, w, rng)
        assert symbolic.power_group.contains(member)


def test_uniformize_hat_product_identity():
    # |A-hat| |B-hat| equals the product of the six per-coordinate factors
    g = parse_group_spec("Z9")
    instances = collect_stpp_instances([g], 3, seed=11)
    for c in instances:
        symbolic = uniformize(c, 2)
        sizes = [(len(a), len(b), len(cc)) for a, b, cc in c.triples]
        expected = 1
        for mu, (first, second) in (
            (symbolic.mu1, (0, 1)),
            (symbolic.mu2, (1, 2)),
            (symbolic.mu3, (2, 0)),
        ):
            for i, count in enumerate(mu):
                expected *= (sizes[i][first] * sizes[i][second]) ** count
        assert symbolic.size_a * symbolic.size_b == expected


def test_uniformize_cross_condition_spot_check():
    c = cyclic("Z8", [0, 1], [0], [0])
    symbolic = uniformize(c, 2)
    rng = random.Random(42)
    g = symbolic.power_group
    base = c.group
    u = symbolic.representative_index(symbolic.mu1)
    v = symbolic.representative_index(symbolic.mu2)
    w = symbolic.representative_index(symbolic.mu3)
    for _ in range(100):
        s = element_add(
            g,
            symbolic.sample_member("A", u, v, w, rng),
            element_neg(g, symbolic.sample_member("B", u, v, w, rng)),
        )
        t = element_add(
            g,
            symbolic.sample_member("B", u, v, w, rng),
            element_neg(g, symbolic.sample_member("C", u, v, w, rng)),
        )
        r = element_add(
            g,
            symbolic.sample_member("C", u, v, w, rng),
            element_neg(g, symbolic.sample_member("A", u, v, w, rng)),
        )
        total = element_add(g, element_add(g, s, t), r)
        if total == g.zero():
            # zero cross sums only arise from identical difference pairs
            assert element_add(g, s, t) == element_neg(g, r)


def test_uniformize_distribution_guard():
    c = cyclic("Z4", [0, 1], [0], [0])
    with pytest.raises(ValueError):
        uniformize(c, 5, guard=3)


def test_random_stpp_deterministic():
    g = parse_group_spec("Z8")
    a = random_stpp(g, random.Random(4), n_triples=1)
    b = random_stpp(g, random.Random(4), n_triples=1)
    assert a is not None and b is not None
    assert a.triples == b.triples
    assert verify_stpp(a)


def test_construction_json_round_trip():
    c = cyclic("Z4", [0, 1], [0], [0])
    assert STPPConstruction.from_dict(c.to_dict()).triples == c.triples


def test_power_element_layout_matches_unborder():
    # unborder builds elements of H^n via power_element; spot-check shapes
    g = parse_group_spec("Z2 x Z4")
    parts = [(1, 3), (0, 2)]
    combined = power_element(g, parts)
    assert len(combined) == 4
