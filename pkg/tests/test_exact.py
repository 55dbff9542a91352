from fractions import Fraction

import pytest

from hml.exact import I, ONE, QQi, det_exact, inv_exact, ipow, lstsq_exact_unique, nullspace_exact, solve_exact


def test_field_ops():
    a = QQi.of(Fraction(1, 2), Fraction(-3, 4))
    b = QQi.of(2, Fraction(1, 3))
    assert a + b == QQi.of(Fraction(5, 2), Fraction(-5, 12))
    assert a * b - b * a == QQi.of(0)
    assert (a / b) * b == a
    assert a - a == QQi.of(0)
    assert a.conj().conj() == a
    assert (a * a.conj()).is_real()


def test_powers_of_i():
    assert I * I == QQi.of(-1)
    assert ipow(-1) == -I
    assert ipow(6) == QQi.of(-1)
    assert QQi.of(2) ** -2 == QQi.of(Fraction(1, 4))


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        ONE / QQi.of(0)


def test_solve_and_inverse():
    m = [[QQi.of(2), I], [QQi.of(0, -1), QQi.of(3)]]
    inv = inv_exact(m)
    prod = [[sum((m[i][k] * inv[k][j] for k in range(2)), QQi.of(0)) for j in range(2)] for i in range(2)]
    assert prod == [[ONE, QQi.of(0)], [QQi.of(0), ONE]]
    sol = solve_exact(m, [[ONE], [I]])
    back = [sum((m[i][k] * sol[k][0] for k in range(2)), QQi.of(0)) for i in range(2)]
    assert back == [ONE, I]


def test_solve_singular():
    with pytest.raises(ValueError):
        solve_exact([[ONE, ONE], [ONE, ONE]], [[ONE], [ONE]])


def test_det():
    m = [[QQi.of(1), QQi.of(2)], [QQi.of(3), QQi.of(4)]]
    assert det_exact(m) == QQi.of(-2)
    assert det_exact([[ONE, ONE], [ONE, ONE]]) == QQi.of(0)


def test_overdetermined_unique():
    # x = 2, y = -1 seen through three consistent equations
    rows = [[ONE, QQi.of(0)], [QQi.of(0), ONE], [ONE, ONE]]
    rhs = [QQi.of(2), QQi.of(-1), QQi.of(1)]
    assert lstsq_exact_unique(rows, rhs) == [QQi.of(2), QQi.of(-1)]
    with pytest.raises(ValueError):
        lstsq_exact_unique(rows, [QQi.of(2), QQi.of(-1), QQi.of(5)])


def test_nullspace():
    m = [[ONE, QQi.of(2), QQi.of(3)]]
    basis = nullspace_exact(m)
    assert len(basis) == 2
    for vec in basis:
        val = sum((m[0][j] * vec[j] for j in range(3)), QQi.of(0))
        assert val == QQi.of(0)
