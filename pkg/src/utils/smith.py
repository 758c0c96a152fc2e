"""Integer Smith and Hermite normal forms with their unimodular transforms.

sympy's ``smith_normal_form`` only returns the diagonal; cokernel certificates
and congruence solutions need the transforms, so both reductions are done
here on plain Python integers.
"""

import logging
from dataclasses import dataclass
from math import gcd
from typing import List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

Matrix = List[List[int]]


def identity(size: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(size)] for i in range(size)]


def mat_mul(left: Sequence[Sequence[int]], right: Sequence[Sequence[int]]) -> Matrix:
    cols = len(right[0]) if right else 0
    return [[sum(row[k] * right[k][j] for k in range(len(right))) for j in range(cols)] for row in left]


def mat_vec(matrix: Sequence[Sequence[int]], vector: Sequence[int]) -> List[int]:
    return [sum(a * b for a, b in zip(row, vector)) for row in matrix]


def lcm(values: Sequence[int]) -> int:
    result = 1
    for value in values:
        if value:
            result = result * value // gcd(result, value)
    return result


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


@dataclass
class SmithForm:
    """left * matrix * right == diagonal (as a rows x cols matrix)."""

    diagonal: List[int]
    left: Matrix
    right: Matrix
    rows: int
    cols: int

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)

    def invariant_factors(self) -> List[int]:
        """Cokernel as Z/d_1 x ... ; 0 stands for a free Z summand."""
        factors = [d for d in self.diagonal if d != 1]
        factors.extend([0] * (self.rows - len(self.diagonal)))
        return factors


def _swap_rows(a: Matrix, i: int, j: int) -> None:
    a[i], a[j] = a[j], a[i]


def _swap_cols(a: Matrix, i: int, j: int) -> None:
    for row in a:
        row[i], row[j] = row[j], row[i]


def _add_row(a: Matrix, target: int, source: int, factor: int) -> None:
    if factor:
        a[target] = [x + factor * y for x, y in zip(a[target], a[source])]


def _add_col(a: Matrix, target: int, source: int, factor: int) -> None:
    if factor:
        for row in a:
            row[target] += factor * row[source]


def smith_normal_form(matrix: Sequence[Sequence[int]]) -> SmithForm:
    a = [list(map(int, row)) for row in matrix]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    left = identity(rows)
    right = identity(cols)

    for k in range(min(rows, cols)):
        while True:
            pivot = None
            for i in range(k, rows):
                for j in range(k, cols):
                    if a[i][j] and (pivot is None or abs(a[i][j]) < abs(a[pivot[0]][pivot[1]])):
                        pivot = (i, j)
            if pivot is None:
                logger.debug("Smith normal form: rank %s of %sx%s", k, rows, cols)
                return SmithForm([a[i][i] for i in range(k)], left, right, rows, cols)
            i0, j0 = pivot
            _swap_rows(a, k, i0)
            _swap_rows(left, k, i0)
            _swap_cols(a, k, j0)
            _swap_cols(right, k, j0)

            dirty = False
            for i in range(k + 1, rows):
                factor = a[i][k] // a[k][k]
                _add_row(a, i, k, -factor)
                _add_row(left, i, k, -factor)
                dirty = dirty or a[i][k] != 0
            for j in range(k + 1, cols):
                factor = a[k][j] // a[k][k]
                _add_col(a, j, k, -factor)
                _add_col(right, j, k, -factor)
                dirty = dirty or a[k][j] != 0
            if dirty:
                continue

            offender = next(
                (i for i in range(k + 1, rows) for j in range(k + 1, cols) if a[i][j] % a[k][k]),
                None,
            )
            if offender is None:
                break
            _add_row(a, k, offender, 1)
            _add_row(left, k, offender, 1)

        if a[k][k] < 0:
            a[k] = [-x for x in a[k]]
            left[k] = [-x for x in left[k]]

    size = min(rows, cols)
    return SmithForm([a[i][i] for i in range(size)], left, right, rows, cols)


def invariant_factors(matrix: Sequence[Sequence[int]]) -> List[int]:
    return smith_normal_form(matrix).invariant_factors()


# ---------------------------------------------------------------------------
# Hermite normal form (row style)
# ---------------------------------------------------------------------------


def hermite_normal_form(matrix: Sequence[Sequence[int]]) -> Tuple[Matrix, Matrix]:
    """(H, T) with T * matrix == H, H upper triangular with positive pivots.

    Entries above a pivot are reduced into [0, pivot).
    """
    a = [list(map(int, row)) for row in matrix]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    transform = identity(rows)
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        while True:
            live = [i for i in range(r, rows) if a[i][c]]
            if not live:
                break
            i0 = min(live, key=lambda i: abs(a[i][c]))
            _swap_rows(a, r, i0)
            _swap_rows(transform, r, i0)
            if len(live) == 1:
                break
            for i in range(r + 1, rows):
                factor = a[i][c] // a[r][c]
                _add_row(a, i, r, -factor)
                _add_row(transform, i, r, -factor)
        if not a[r][c]:
            continue
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
            transform[r] = [-x for x in transform[r]]
        for i in range(r):
            factor = a[i][c] // a[r][c]
            _add_row(a, i, r, -factor)
            _add_row(transform, i, r, -factor)
        r += 1
    return a, transform


# ---------------------------------------------------------------------------
# Linear congruences A x = b (mod moduli)
# ---------------------------------------------------------------------------


@dataclass
class CongruenceSolution:
    feasible: bool
    solution: Optional[List[int]] = None
    certificate: Optional[List[int]] = None
    modulus: int = 1
    invariant_factors: Optional[List[int]] = None


def solve_congruences(
    columns: Sequence[Sequence[int]],
    target: Sequence[int],
    moduli: Sequence[int],
    character_modulus: Optional[int] = None,
) -> CongruenceSolution:
    """Solve sum_j columns[i][j] x_j = target[i] (mod moduli[i]) for every row i.

    On failure the certificate c satisfies c.A = 0 and c_i * moduli[i] = 0
    (mod character_modulus) while c.target != 0, read off a row of the left
    Smith transform of [A | diag(moduli)].
    """
    rows = len(moduli)
    unknowns = len(columns[0]) if rows else 0
    if len(columns) != rows or len(target) != rows or any(len(row) != unknowns for row in columns):
        raise ValueError("Congruence system has inconsistent dimensions.")
    if any(m <= 0 for m in moduli):
        raise ValueError("Moduli must be positive.")
    modulus = character_modulus or lcm(moduli)
    if any(modulus % m for m in moduli):
        raise ValueError("Character modulus must be a multiple of every modulus.")

    stacked = [list(columns[i]) + [moduli[i] if j == i else 0 for j in range(rows)] for i in range(rows)]
    form = smith_normal_form(stacked)
    image = mat_vec(form.left, target)
    factors = form.invariant_factors()

    scaled = []
    for i in range(rows):
        d = form.diagonal[i] if i < len(form.diagonal) else 0
        if d == 0 or image[i] % d:
            certificate = [(modulus // d) * x % modulus for x in form.left[i]] if d else None
            return CongruenceSolution(False, None, certificate, modulus, factors)
        scaled.append(image[i] // d)
    scaled.extend([0] * (unknowns + rows - len(scaled)))
    full = mat_vec(form.right, scaled)
    return CongruenceSolution(True, full[:unknowns], None, modulus, factors)
