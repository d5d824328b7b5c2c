import random

from epsclass import zlin
from epsclass.abgroup import AbelianGroupStructure


def test_smith_diagonal_known():
    assert zlin.smith_diagonal([[3, 0], [0, 3]]) == [3, 3]
    assert zlin.smith_diagonal([[2, 4], [4, 4]]) == [2, 4]
    assert zlin.smith_diagonal([[1, 0], [0, 0]]) == [1]


def test_smith_diagonal_random_det_invariant():
    rng = random.Random(1)
    for _ in range(100):
        n = rng.randrange(1, 5)
        M = [[rng.randrange(-9, 10) for _ in range(n)] for _ in range(n)]
        divs = zlin.smith_diagonal(M)
        det = _det(M)
        if det:
            prod = 1
            for d in divs:
                prod *= d
            assert prod == abs(det)
            # chain divisibility
            for a, b in zip(divs, divs[1:]):
                assert b % a == 0


def _det(M):
    from fractions import Fraction
    n = len(M)
    A = [[Fraction(x) for x in row] for row in M]
    det = Fraction(1)
    for j in range(n):
        piv = next((i for i in range(j, n) if A[i][j]), None)
        if piv is None:
            return 0
        if piv != j:
            A[j], A[piv] = A[piv], A[j]
            det = -det
        det *= A[j][j]
        for i in range(j + 1, n):
            f = A[i][j] / A[j][j]
            A[i] = [x - f * y for x, y in zip(A[i], A[j])]
    return det


def test_kernel_columns():
    K = zlin.kernel_columns([[1, 2, 3]])
    # columns span {x : x1 + 2x2 + 3x3 = 0}, a rank-2 lattice
    assert len(K) == 3 and len(K[0]) == 2
    for j in range(2):
        assert K[0][j] + 2 * K[1][j] + 3 * K[2][j] == 0


def test_kernel_random_membership():
    rng = random.Random(2)
    for _ in range(50):
        rows, cols = rng.randrange(1, 4), rng.randrange(1, 5)
        M = [[rng.randrange(-5, 6) for _ in range(cols)] for _ in range(rows)]
        K = zlin.kernel_columns(M)
        nk = len(K[0]) if K and K[0] else 0
        for j in range(nk):
            v = [K[i][j] for i in range(cols)]
            assert all(sum(M[r][i] * v[i] for i in range(cols)) == 0
                       for r in range(rows))


def test_solution_lattice():
    # {x in Z^2 : [x1, x2] with x1 + x2 in 3Z}
    L = zlin.solution_lattice([[1, 1]], [[3]])
    # index of L in Z^2 must be 3
    assert abs(L[0][0] * L[1][1] - L[0][1] * L[1][0]) == 3


def test_hnf_columns_preserves_lattice():
    rng = random.Random(3)
    for _ in range(30):
        rows, cols = rng.randrange(1, 4), rng.randrange(1, 5)
        M = [[rng.randrange(-5, 6) for _ in range(cols)] for _ in range(rows)]
        H = zlin.hnf_columns(M)
        # every original column solvable in H and vice versa
        nh = len(H[0]) if H and H[0] else 0
        for j in range(cols):
            v = [M[i][j] for i in range(rows)]
            if any(v):
                assert zlin.solve_lattice(H, v) is not None


def test_presentation_divisors():
    assert zlin.presentation_divisors([[4, 0], [0, 2]], 2) == [2, 4]
    got = AbelianGroupStructure.from_relation_matrix([[4, 0], [0, 2]], 2)
    assert got.divisors == (4, 2)


def test_mat_pow():
    A = [[0, -1], [1, -1]]  # order 3
    assert zlin.mat_pow(A, 3) == zlin.identity(2)
