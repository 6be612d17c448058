from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from valcalc.errors import ShapeError, SingularMatrixError
from valcalc.linalg import Matrix, Vector, gauss_solve, interval_gauss_solve, midpoint_inverse, norm
from valcalc.numerics import Bounds


class TestVector:
    def test_add(self):
        assert Vector([1, 2]) + Vector([3, 4]) == Vector([4, 6])

    def test_scale(self):
        assert 2 * Vector([1, 2]) == Vector([2, 4])
        assert Vector([2, 4]) / 2 == Vector([1, 2])

    def test_interval_add(self):
        v = Vector([Bounds(0, 1), Bounds(1, 2)]) + Vector([Bounds(1), Bounds(0)])
        assert v == Vector([Bounds(1, 2), Bounds(1, 2)])

    def test_subscript_and_dot(self):
        v = Vector([Fraction(1, 2), 3])
        assert v[0] == Fraction(1, 2)
        assert v.dot(Vector([2, 1])) == 4

    def test_size_mismatch(self):
        with pytest.raises(ShapeError):
            Vector([1, 2]) + Vector([1])


class TestNorm:
    @pytest.mark.parametrize("which, expected", [("sup", 4), ("euclidean", 5), ("one", 7)])
    def test_norms(self, which, expected):
        assert norm(Vector([3, -4]), which) == expected

    def test_interval_norm_encloses(self):
        n = norm(Vector([Bounds(3), Bounds(-4)]), "euclidean")
        assert n.contains(5)

    def test_unknown(self):
        with pytest.raises(ValueError):
            norm(Vector([1]), "max")


class TestMatrix:
    def test_product_matches_numpy(self):
        a = [[1, 2], [3, 4]]
        b = [[0, 1], [1, 0]]
        got = Matrix(a) @ Matrix(b)
        assert [[got[i, j] for j in range(2)] for i in range(2)] == (np.array(a) @ np.array(b)).tolist()

    def test_matrix_vector(self):
        assert Matrix([[1, 2], [3, 4]]) @ Vector([1, 1]) == Vector([3, 7])

    def test_identity_and_transpose(self):
        m = Matrix([[1, 2], [3, 4]])
        assert (Matrix.identity(2) @ m).entries == m.entries
        assert m.transpose().row(0) == [1, 3]


class TestGaussSolve:
    def test_exact_rational(self):
        A = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]]
        x = gauss_solve(A, [Fraction(3), Fraction(5)], pivot_key=lambda v: (abs(v),))
        assert list(x) == [Fraction(4, 5), Fraction(7, 5)]

    def test_identity(self):
        x = interval_gauss_solve([[1, 0], [0, 1]], [Bounds(1), Bounds(2)])
        assert list(x) == [Bounds(1), Bounds(2)]

    def test_diagonal(self):
        x = interval_gauss_solve([[2, 0], [0, 4]], [2, 4])
        assert x[0].contains(1) and x[1].contains(1)

    def test_interval_coefficient(self):
        x = interval_gauss_solve([[Bounds(1.9, 2.1), 0], [0, 1]], [2, 1])
        # corner systems give 2/2.1 and 2/1.9
        assert x[0].contains(Fraction(20, 21)) and x[0].contains(Fraction(20, 19))

    def test_encloses_random_point_systems(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = rng.integers(-5, 6, size=(3, 3))
            if round(np.linalg.det(a)) == 0:
                continue
            b = rng.integers(-5, 6, size=3)
            x = interval_gauss_solve(a.tolist(), b.tolist())
            exact = gauss_solve([[Fraction(int(v)) for v in r] for r in a], [Fraction(int(v)) for v in b],
                                pivot_key=lambda v: (abs(v),))
            assert all(xi.contains(ei) for xi, ei in zip(x, exact))

    def test_singular(self):
        with pytest.raises(SingularMatrixError):
            interval_gauss_solve([[Bounds(-1, 1), 0], [0, 1]], [1, 1])

    def test_not_square(self):
        with pytest.raises(ShapeError):
            gauss_solve([[1, 2]], [1])

    def test_midpoint_inverse(self):
        inv = midpoint_inverse([[Bounds(1.9, 2.1), 0], [0, 4]])
        assert inv[0, 0] == pytest.approx(0.5) and inv[1, 1] == pytest.approx(0.25)
        with pytest.raises(SingularMatrixError):
            midpoint_inverse([[1, 2], [2, 4]])
