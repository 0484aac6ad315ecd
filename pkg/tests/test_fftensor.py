import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import diagonal_tensor, random_tensor
from sumrank.fftensor import (
    Matching3,
    PrimeField,
    Tensor3,
    cyclic_shift_z,
    group_tensor,
    is_diagonal,
    lucas_binom,
    restrict,
    tensor_product,
)
from sumrank.groups import parse_group_spec


def test_prime_field_rejects_composites():
    with pytest.raises(ValueError):
        PrimeField(4)
    with pytest.raises(ValueError):
        PrimeField(1)
    assert PrimeField(7).inv(3) == 5


def test_lucas_examples():
    assert lucas_binom(5, 2, 3) == 1
    assert lucas_binom(4, 2, 2) == 0
    assert lucas_binom(17, 0, 5) == 1


def test_lucas_matches_exact_binomials():
    for p in (2, 3, 5):
        for m in range(201):
            for k in range(201):
                assert lucas_binom(m, k, p) == math.comb(m, k) % p, (m, k, p)


@pytest.mark.parametrize("p,r", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1)])
def test_lucas_descends_mod_prime_power(p, r):
    q = p**r
    for k in range(q):
        for m in range(5 * q):
            assert lucas_binom(m, k, p) == lucas_binom(m % q, k, p)


@given(st.integers(0, 10**6), st.sampled_from([2, 3, 5, 7]))
def test_lucas_choose_zero(m, p):
    assert lucas_binom(m, 0, p) == 1


def test_group_tensor_z2_support():
    t = group_tensor(parse_group_spec("Z2"), 2)
    assert sorted(t.support()) == [
        ((0,), (0,), (0,)),
        ((0,), (1,), (1,)),
        ((1,), (0,), (1,)),
        ((1,), (1,), (0,)),
    ]


def test_group_tensor_z3_entries():
    t = group_tensor(parse_group_spec("Z3"), 3)
    assert t.value((1,), (1,), (1,)) == 1
    assert t.value((1,), (1,), (0,)) == 0


@pytest.mark.parametrize("spec", ["Z2", "Z3", "Z4", "Z2^2", "Z6"])
def test_group_tensor_support_size(spec):
    g = parse_group_spec(spec)
    t = group_tensor(g, 2)
    assert len(t.support()) == g.order**2


def test_group_tensor_size_cap():
    with pytest.raises(ValueError):
        group_tensor(parse_group_spec("Z30"), 2, cap=1000)


def test_restrict_full_is_identity():
    t = group_tensor(parse_group_spec("Z3"), 3)
    assert restrict(t, t.x_labels, t.y_labels, t.z_labels) == t


def test_restrict_diagonal_example():
    # D_{Z3} on {0,1}^3: only (0,0,0) and (1,1,1) sum to zero mod 3
    t = group_tensor(parse_group_spec("Z3"), 3)
    pair = [(0,), (1,)]
    sub = restrict(t, pair, pair, pair)
    for x in pair:
        for y in pair:
            for z in pair:
                expected = 1 if (x[0] + y[0] + z[0]) % 3 == 0 else 0
                assert sub.value(x, y, z) == expected
    matching = is_diagonal(sub)
    assert matching is not None
    assert sorted(matching.triples) == [((0,), (0,), (0,)), ((1,), (1,), (1,))]


def test_restrict_empty_axis():
    t = group_tensor(parse_group_spec("Z3"), 3)
    sub = restrict(t, [], t.y_labels, t.z_labels)
    assert sub.dims == (0, 3, 3)


def test_restrict_unknown_label():
    t = group_tensor(parse_group_spec("Z3"), 3)
    with pytest.raises(ValueError):
        restrict(t, [(7,)], t.y_labels, t.z_labels)


def test_tensor_product_of_group_tensors():
    d2 = group_tensor(parse_group_spec("Z2"), 2)
    product = tensor_product(d2, d2).relabel(lambda l: (l[0][0], l[1][0]))
    assert product == group_tensor(parse_group_spec("Z2^2"), 2)


def test_tensor_product_identity_and_zero():
    d2 = group_tensor(parse_group_spec("Z2"), 2)
    one = Tensor3(PrimeField(2), ("*",), ("*",), ("*",), np.ones((1, 1, 1), dtype=np.int64))
    lifted = tensor_product(d2, one).relabel(lambda l: l[0])
    assert lifted == d2
    zero = Tensor3(PrimeField(2), ("*",), ("*",), ("*",), np.zeros((1, 1, 1), dtype=np.int64))
    assert not tensor_product(zero, d2).entries.any()


def test_tensor_product_associative_up_to_relabeling():
    rng = random.Random(7)
    for _ in range(5):
        a = random_tensor(rng, (2, 1, 2), 3)
        b = random_tensor(rng, (1, 2, 1), 3)
        c = random_tensor(rng, (2, 2, 2), 3)
        left = tensor_product(tensor_product(a, b), c)
        right = tensor_product(a, tensor_product(b, c))
        assert np.array_equal(
            left.entries.reshape(-1), right.entries.reshape(-1)
        )


def test_tensor_product_field_mismatch():
    d2 = group_tensor(parse_group_spec("Z2"), 2)
    d3 = group_tensor(parse_group_spec("Z2"), 3)
    with pytest.raises(ValueError):
        tensor_product(d2, d3)


def test_is_diagonal_cases():
    assert len(is_diagonal(diagonal_tensor(3, 3))) == 3
    assert is_diagonal(group_tensor(parse_group_spec("Z2"), 2)) is None
    missing = diagonal_tensor(3, 3, values=[1, 1, 0])
    assert is_diagonal(missing) is None


def test_matching_rejects_repeated_projection():
    with pytest.raises(ValueError):
        Matching3((((0,), (0,), (0,)), ((1,), (1,), (0,))))


def test_cyclic_shift():
    t = group_tensor(parse_group_spec("Z3"), 3)
    shifted = cyclic_shift_z(t, 1)
    for x in range(3):
        for y in range(3):
            for z in range(3):
                assert shifted.value((x,), (y,), (z,)) == t.value((x,), (y,), ((z + 1) % 3,))


def test_tensor_json_round_trip():
    t = group_tensor(parse_group_spec("Z2 x Z2"), 3)
    assert Tensor3.from_dict(t.to_dict()) == t
