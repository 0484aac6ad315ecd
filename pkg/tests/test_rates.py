import io
import itertools
import math
from fractions import Fraction

import pytest

from sumrank.rates import (
    constants,
    hoeffding_bound,
    rate_grid_rows,
    rate_I,
    rate_I_limit,
    rate_J,
    rate_J_limit,
    tuple_fraction_exact,
    write_rate_csv,
)
from sumrank.slicerank import triangle_to_slice_power_bound

CLOSED_FORM_DELTA = math.log(2 / 3) + (2 / 3) * math.log(2)


def test_constants_match_closed_form():
    c = constants()
    assert c["delta"] == pytest.approx(CLOSED_FORM_DELTA, abs=1e-12)
    assert c["epsilon"] == pytest.approx(CLOSED_FORM_DELTA / 2, abs=1e-12)
    assert c["delta"] == 2 * c["epsilon"]
    assert c["delta"] == pytest.approx(0.05663, abs=1e-4)
    assert c["epsilon"] == pytest.approx(0.02831, abs=1e-4)


def test_rate_I_examples():
    assert rate_I(1, Fraction(1, 3)).value == pytest.approx(CLOSED_FORM_DELTA, abs=1e-12)
    assert rate_I(2, Fraction(1, 3)).value > rate_I(1, Fraction(1, 3)).value
    result = rate_I(1, Fraction(1, 3))
    assert result.argmax_theta < 0


def test_rate_I_converges_to_limit():
    limit = rate_I_limit(Fraction(1, 3)).value
    near = rate_I(10**4, Fraction(1, 3)).value
    assert near < limit
    assert limit - near < 1e-3


def test_rate_I_domain():
    with pytest.raises(ValueError):
        rate_I(0, Fraction(1, 3))
    with pytest.raises(ValueError):
        rate_I(1, Fraction(1, 2))
    with pytest.raises(ValueError):
        rate_I(1, 0)


def test_rate_J_values():
    delta = constants()["delta"]
    assert rate_J(2).value == pytest.approx(math.exp(-delta), abs=1e-9)
    # closed-form oracle at the stationary point 4x^2 + x - 2 = 0
    x = (-1 + math.sqrt(33)) / 8
    j3_closed = (1 + x + x * x) * x ** (-2 / 3) / 3
    assert rate_J(3).value == pytest.approx(j3_closed, abs=1e-9)
    assert 3 * rate_J(3).value == pytest.approx(3 * j3_closed, abs=1e-9)


def test_rate_J_limit():
    limit = rate_J_limit()
    assert limit.value == pytest.approx(0.8414, abs=1e-3)
    assert abs(rate_J(10**4).value - limit.value) < 2e-3
    # sanity point: the objective at z = e dominates the infimum
    assert (math.e - math.e**-2) / 3 >= limit.value
    for s in (2, 3, 4, 5, 8, 16, 64, 10**4):
        assert limit.value < rate_J(s).value


def test_rate_J_domain():
    with pytest.raises(ValueError):
        rate_J(1)
    with pytest.raises(ValueError):
        rate_J(0.5)


def test_monotonicity_grids():
    for alpha in (Fraction(1, 4), Fraction(1, 3), 0.49):
        values = [rate_I(m, alpha).value for m in range(1, 51)]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert all(v > 0 for v in values)
    js = [rate_J(s).value for s in (2, 3, 4, 5, 8, 16, 64, 10**4)]
    assert all(b < a for a, b in zip(js, js[1:]))
    assert all(0 < j < 1 for j in js)


def test_tuple_fraction_examples():
    count, fraction = tuple_fraction_exact(1, Fraction(1, 3), 6)
    assert (count, fraction) == (22, Fraction(11, 32))
    count, fraction = tuple_fraction_exact(2, Fraction(1, 3), 6)
    assert count == 168
    assert fraction == Fraction(168, 729)
    count, fraction = tuple_fraction_exact(1, Fraction(1, 3), 1)
    assert (count, fraction) == (1, Fraction(1, 2))


def test_tuple_fraction_brute_force():
    for m, num, den, n in ((1, 1, 3, 5), (2, 1, 4, 4), (3, 2, 5, 3)):
        alpha = Fraction(num, den)
        expected = sum(
            1
            for a in itertools.product(range(m + 1), repeat=n)
            if Fraction(sum(a)) <= alpha * m * n
        )
        assert tuple_fraction_exact(m, alpha, n)[0] == expected


def test_tuple_fraction_guard():
    with pytest.raises(ValueError):
        tuple_fraction_exact(100, Fraction(1, 3), 10**4)


def test_fraction_below_rate_bound_grid():
    cases = 0
    for m in range(1, 6):
        for n in range(1, 11):
            for alpha in (Fraction(1, 4), Fraction(1, 3)):
                _, fraction = tuple_fraction_exact(m, alpha, n)
                bound = math.exp(-rate_I(m, alpha).value * n)
                assert float(fraction) <= bound + 1e-12
                assert bound <= hoeffding_bound(alpha, n) + 1e-12
                cases += 1
    assert cases == 100


def test_consistency_with_power_bound():
    for m in range(1, 5):
        for n in range(1, 7):
            count, fraction = tuple_fraction_exact(m, Fraction(1, 3), n)
            assert 3 * (m + 1) ** n * fraction == triangle_to_slice_power_bound(m + 1, n)[0]


def test_rate_grid_rows_and_csv():
    rows = rate_grid_rows([1, 2], [Fraction(1, 3)], 6)
    assert [r["m"] for r in rows] == [1, 2]
    assert rows[0]["exact_count"] == 22
    assert rows[0]["alpha"] == "1/3"
    assert rows[0]["J"] == pytest.approx(rate_J(2).value, abs=1e-12)
    buffer = io.StringIO()
    write_rate_csv(rows, buffer)
    lines = buffer.getvalue().strip().splitlines()
    assert lines[0] == "m,alpha,I,J,exact_count,fraction,hoeffding_bound,n"
    assert len(lines) == 3
