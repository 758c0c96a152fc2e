"""Monomial Kummer theory over a complete regular local ring with parameters pi1, pi2.

Everything here lives in the monomial model: elements ``u * pi1^e1 * pi2^e2``
with ``u`` a residue-field constant, Kummer extensions generated by n-th roots
of such elements, and the branch fields of the triangle model. Exponent
lattices are handled with the integer Hermite/Smith forms of ``utils.smith``.
"""

import logging
from dataclasses import dataclass, field as dataclass_field
from math import gcd
from tokenize import TokenError
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import sympy
from sympy.ntheory import factorint, isprime
from sympy.ntheory.residue_ntheory import nthroot_mod
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)

from .. import settings
from ..utils.errors import (
    DependentGenerators,
    IncompatibleModulus,
    ParseError,
    PoleAtPoint,
    PrecisionExhausted,
    UnsupportedShape,
    ZeroInput,
)
from ..utils.smith import hermite_normal_form, solve_congruences
from .finite_field import (
    FieldElement,
    PrimeField,
    canonical_generator,
    discrete_log_base_generator,
    nth_power_test,
    primitive_root_of_unity,
    root_of_unity_log,
    unit_class,
)
from .series_local import CyclicKummerLocal, ExtElement, LaurentSeries, Scalar, nth_power_class, tame_symbol

logger = logging.getLogger(__name__)

X, Y = sympy.symbols("x y")


# ---------------------------------------------------------------------------
# Monomial classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonomialClass:
    """u * pi1^e1 * pi2^e2 with u a nonzero residue constant."""

    u: FieldElement
    e1: int = 0
    e2: int = 0

    def __post_init__(self):
        if not self.u:
            raise ZeroInput("Monomial unit must be nonzero.", q=self.u.q)

    @classmethod
    def of(cls, field: PrimeField, u: Scalar, e1: int = 0, e2: int = 0) -> "MonomialClass":
        return cls(field.element(u), e1, e2)

    @property
    def field(self) -> PrimeField:
        return self.u.field

    def __mul__(self, other: "MonomialClass") -> "MonomialClass":
        return MonomialClass(self.u * other.u, self.e1 + other.e1, self.e2 + other.e2)

    def inverse(self) -> "MonomialClass":
        return MonomialClass(self.u.inverse(), -self.e1, -self.e2)

    def __truediv__(self, other: "MonomialClass") -> "MonomialClass":
        return self * other.inverse()

    def __pow__(self, exponent: int) -> "MonomialClass":
        return MonomialClass(self.u ** exponent, self.e1 * exponent, self.e2 * exponent)

    def vector(self, n: int) -> Tuple[int, int, int]:
        """(e1, e2, unit class) in (Z/n)^3."""
        return self.e1 % n, self.e2 % n, unit_class(self.u, n)

    def reduce(self, n: int) -> "MonomialClass":
        """Canonical representative modulo n-th powers."""
        e1, e2, k = self.vector(n)
        return MonomialClass(canonical_generator(self.field) ** k, e1, e2)

    def to_literal(self) -> str:
        return f"u:{self.u.value} e1:{self.e1} e2:{self.e2}"

    def __str__(self) -> str:
        parts = [str(self.u.value)]
        for name, exponent in (("pi1", self.e1), ("pi2", self.e2)):
            if exponent:
                parts.append(name if exponent == 1 else f"{name}^{exponent}")
        return "*".join(parts)


def is_nth_power_monomial(x: MonomialClass, n: int) -> bool:
    return x.e1 % n == 0 and x.e2 % n == 0 and nth_power_test(x.u, n)


def ramification_after_root(e: int, ell: int) -> int:
    """Ramification index after adjoining an ell-th root of a uniformizer power."""
    if not isinstance(e, int) or e < 1:
        raise ValueError(f"Ramification index must be a positive integer, got {e!r}.")
    if not isinstance(ell, int) or not isprime(ell):
        raise ValueError(f"{ell!r} is not a prime.")
    return e // ell if e % ell == 0 else e


def ramification_descent(e: int) -> List[int]:
    """Indices visited by taking roots along the prime factorization of e, ending at 1."""
    steps = [e]
    for ell, multiplicity in sorted(factorint(e).items()):
        for _ in range(multiplicity):
            steps.append(ramification_after_root(steps[-1], ell))
    return steps


# ---------------------------------------------------------------------------
# Kummer extensions F(n-th roots of monomials)
# ---------------------------------------------------------------------------


def _lattice_row(x: MonomialClass, n: int) -> List[int]:
    # Column order (e2, e1, unit class): the Hermite form then exposes the
    # pi2-part first, the pi1-part second and the unramified part last.
    e1, e2, k = x.vector(n)
    return [e2, e1, k]


def _hermite_span(rows: Sequence[Sequence[int]], n: int) -> Tuple[List[List[int]], List[List[int]]]:
    stacked = [list(row) for row in rows] + [[n if i == j else 0 for j in range(3)] for i in range(3)]
    return hermite_normal_form(stacked)


def span_order(classes: Sequence[MonomialClass], n: int) -> int:
    """Size of the subgroup of F*/F*^n spanned by the classes."""
    hermite, _ = _hermite_span([_lattice_row(x, n) for x in classes], n)
    return n ** 3 // (hermite[0][0] * hermite[1][1] * hermite[2][2])


@dataclass(frozen=True)
class MonomialKummer:
    """L = F(n-th roots of the generators), of degree n^len(gens)."""

    gens: Tuple[MonomialClass, ...]
    n: int
    field: PrimeField

    def __post_init__(self):
        object.__setattr__(self, "gens", tuple(self.gens))
        self.field.require_tame(self.n)
        self.field.require_roots_of_unity(self.n)
        for x in self.gens:
            if x.field != self.field:
                raise ValueError(f"Generator {x} is not over {self.field}.")
        size = span_order(self.gens, self.n)
        if size != self.degree:
            raise DependentGenerators(
                f"Generators span a group of order {size}, expected {self.degree}.",
                gens=[x.to_literal() for x in self.gens],
                n=self.n,
            )

    @property
    def degree(self) -> int:
        return self.n ** len(self.gens)

    def product(self, exponents: Sequence[int]) -> MonomialClass:
        """prod gens[i]^exponents[i] as an element of F."""
        if len(exponents) != len(self.gens):
            raise ValueError("One exponent per generator is required.")
        result = MonomialClass(self.field.one)
        for x, a in zip(self.gens, exponents):
            result = result * x ** a
        return result


@dataclass(frozen=True)
class KummerTower:
    """F in L1 in L2 in L, with L2 = L1(alpha), alpha = n-th root of l2_radicand,
    and L = L2(beta), beta = n-th root of l3_radicand.

    [L1:F] = l1_degree (unramified), [L2:L1] = d1, [L:L2] = d2 and
    beta^d2 = v * alpha^i_exp * pi2 for a unit v of L1. ``combinations`` maps
    each radicand name to its exponents over the input generators.
    """

    l1_gens: Tuple[MonomialClass, ...]
    l1_degree: int
    d1: int
    l2_radicand: MonomialClass
    d2: int
    i_exp: int
    l3_radicand: MonomialClass
    combinations: Dict[str, Tuple[int, ...]] = dataclass_field(default_factory=dict)

    @property
    def degree(self) -> int:
        return self.l1_degree * self.d1 * self.d2

    def radicands(self) -> List[Tuple[str, MonomialClass]]:
        named = [(f"l1_{i}", x) for i, x in enumerate(self.l1_gens)]
        named.append(("l2", self.l2_radicand))
        named.append(("l3", self.l3_radicand))
        return named


def _normalized(x: MonomialClass, n: int) -> MonomialClass:
    # Multiply by pi-powers that are n-th powers so both exponents land in [0, n).
    return MonomialClass(x.u, x.e1 % n, x.e2 % n)


def kummer_decompose(K: MonomialKummer) -> KummerTower:
    n, r = K.n, len(K.gens)
    hermite, transform = _hermite_span([_lattice_row(x, n) for x in K.gens], n)
    g_b, g_a, g_0 = hermite[0][0], hermite[1][1], hermite[2][2]
    d2, d1, l1_degree = n // g_b, n // g_a, n // g_0
    logger.debug("Kummer tower pivots (pi2, pi1, unit) = %s, %s, %s", g_b, g_a, g_0)

    radicands = []
    combinations = {}
    for name, row_index in (("l3", 0), ("l2", 1), ("l1_0", 2)):
        exponents = tuple(transform[row_index][:r])
        radicand = _normalized(K.product(exponents), n)
        expected = hermite[row_index]
        if _lattice_row(radicand, n) != [value % n for value in expected]:
            raise ArithmeticError(f"Radicand {name} does not match its lattice row {expected}.")
        radicands.append(radicand)
        combinations[name] = exponents

    l3_radicand, l2_radicand, l1_radicand = radicands
    c = hermite[0][1]
    if (c * d2) % g_a:
        raise ArithmeticError("pi1-exponent of the top radicand is not compatible with the middle step.")
    i_full = c * d2 // g_a
    residual = (hermite[0][2] * d2 - hermite[1][2] * i_full) % n
    if residual % g_0:
        raise ArithmeticError("Unit relation of the top step does not lie in L1.")

    l1_gens: Tuple[MonomialClass, ...] = (l1_radicand,) if l1_degree > 1 else ()
    if not l1_gens:
        combinations.pop("l1_0")
    tower = KummerTower(
        l1_gens=l1_gens,
        l1_degree=l1_degree,
        d1=d1,
        l2_radicand=l2_radicand,
        d2=d2,
        i_exp=i_full % d2,
        l3_radicand=l3_radicand,
        combinations=combinations,
    )
    if tower.degree != K.degree:
        raise ArithmeticError(f"Tower degree {tower.degree} differs from [L:F] = {K.degree}.")
    return tower


# ---------------------------------------------------------------------------
# Norms and the norm decision
# ---------------------------------------------------------------------------


def _class_order(x: MonomialClass, n: int) -> int:
    e1, e2, k = x.vector(n)
    return n // gcd(n, gcd(e1, gcd(e2, k)))


def _root_norm(x: MonomialClass, n: int, degree: int) -> MonomialClass:
    """N_{L/F} of an n-th root of x, for L of the given degree containing it.

    With d the order of x mod n-th powers, x = w^(n/d) exactly and the root
    satisfies X^d = zeta * w; the zeta factor dies in the (degree/d)-th power.
    """
    d = _class_order(x, n)
    log = discrete_log_base_generator(x.u)
    scale = n // d
    w = MonomialClass(canonical_generator(x.field) ** (log // scale), x.e1 // scale, x.e2 // scale)
    sign = -1 if ((d - 1) * (degree // d)) % 2 else 1
    norm = w ** (degree // d)
    return MonomialClass(norm.u * sign, norm.e1, norm.e2)


def monomial_norm(K: MonomialKummer, exponents: Sequence[int], base: Optional[MonomialClass] = None) -> MonomialClass:
    """N_{L/F}(prod (n-th root of gens[i])^exponents[i] * base)."""
    if len(exponents) != len(K.gens):
        raise ValueError("One exponent per generator is required.")
    result = (base or MonomialClass(K.field.one)) ** K.degree
    for x, a in zip(K.gens, exponents):
        result = result * _root_norm(x, K.n, K.degree) ** a
    return result


class NormStep(NamedTuple):
    level: str
    radicand: Optional[MonomialClass]
    exponent: int
    norm: MonomialClass


@dataclass
class NormDescent:
    """Outcome of the norm decision; truthy iff lam is a norm."""

    is_norm: bool
    degree: int
    trail: List[NormStep] = dataclass_field(default_factory=list)
    certificate: Optional[MonomialClass] = None
    obstruction: Optional[List[int]] = None

    def __bool__(self) -> bool:
        return self.is_norm


def _unit_root(u: FieldElement, m: int) -> FieldElement:
    root = nthroot_mod(u.value, m, u.q)
    if root is None:
        raise ArithmeticError(f"{u.value} has no {m}-th root in F_{u.q}.")
    return u.field.element(int(root))


def norm_descent_2dim(K: MonomialKummer, lam: MonomialClass) -> NormDescent:
    """Decide whether lam is a norm from L.

    Modulo F*^N (N = [L:F]) the monomial norms are generated by the norms of
    the n-th roots of the tower radicands and by the residue norms g^(N/f),
    f the residue degree. lam is reduced by the product of those norms (the
    theta of each tower step); what remains must be an N-th power in F.

    For L = F(n-th root of pi1) the answer is the tame symbol criterion along
    pi1: u * pi1^a * pi2^b is a norm iff n | b and the symbol (pi1, u * pi1^a)
    over kappa((pi1)) is trivial.
    """
    if lam.field != K.field:
        raise IncompatibleModulus("Element and extension live over different residue fields.", q=lam.field.q)
    tower = kummer_decompose(K)
    field, n, degree = K.field, K.n, K.degree
    unit_modulus = gcd(degree, field.q - 1)

    steps: List[Tuple[str, Optional[MonomialClass], MonomialClass]] = []
    for name, radicand in tower.radicands():
        steps.append((name, radicand, _root_norm(radicand, n, degree)))
    residue_norm = MonomialClass(canonical_generator(field) ** (degree // tower.l1_degree))
    steps.append(("residue", None, residue_norm))

    columns = [
        [norm.e1 for _, _, norm in steps],
        [norm.e2 for _, _, norm in steps],
        [discrete_log_base_generator(norm.u) for _, _, norm in steps],
    ]
    target = [lam.e1, lam.e2, discrete_log_base_generator(lam.u)]
    solved = solve_congruences(columns, target, [degree, degree, unit_modulus])
    if not solved.feasible:
        logger.debug("%s is not a norm; character %s", lam, solved.certificate)
        return NormDescent(False, degree, obstruction=solved.certificate)

    trail = []
    theta_norm = MonomialClass(field.one)
    for (name, radicand, norm), exponent in zip(steps, solved.solution):
        if exponent:
            trail.append(NormStep(name, radicand, exponent, norm ** exponent))
            theta_norm = theta_norm * norm ** exponent
    remainder = lam / theta_norm
    if remainder.e1 % degree or remainder.e2 % degree:
        raise ArithmeticError(f"Remainder {remainder} is not an N-th power.")
    root = MonomialClass(_unit_root(remainder.u, degree), remainder.e1 // degree, remainder.e2 // degree)
    if root ** degree != remainder:
        raise ArithmeticError("N-th power certificate does not recompose.")
    return NormDescent(True, degree, trail, certificate=root)


def norm_along_pi1(K: MonomialKummer, lam: MonomialClass) -> bool:
    """Decide whether lam is a norm from L tensor F_pi1, the completion along pi1.

    F_pi1 has residue field kappa((pi2)), so pi2 counts as a unit there. For
    L = F(n-th root of x) write x = pi1^a * u_x and lam = pi1^r * u_lam; the
    cyclic algebra (x, lam) splits iff (-1)^(ar) u_lam^a / u_x^r is an n-th
    power in kappa((pi2)) and the tame symbol (u_x, u_lam) there is trivial.
    Only extensions unramified along pi2 are accepted; for those the answer
    matches norm_descent_2dim.
    """
    if lam.field != K.field:
        raise IncompatibleModulus("Element and extension live over different residue fields.", q=lam.field.q)
    n, field = K.n, K.field
    if any(x.e2 % n for x in K.gens):
        raise UnsupportedShape("L must be unramified along pi2.", gens=[x.to_literal() for x in K.gens])
    if len(K.gens) != 1:
        raise UnsupportedShape("Only cyclic extensions are decided along pi1.", gens=[x.to_literal() for x in K.gens])
    x = K.gens[0]
    a, r = x.e1, lam.e1
    coefficient = lam.u ** a * x.u ** (-r)
    if (a * r) % 2:
        coefficient = -coefficient
    residue = LaurentSeries.monomial(field, coefficient, lam.e2 * a - x.e2 * r)
    unit_x = LaurentSeries.monomial(field, x.u, x.e2)
    unit_lam = LaurentSeries.monomial(field, lam.u, lam.e2)
    symbol = tame_symbol(unit_x, unit_lam, n)
    logger.debug("Along pi1: residue %s, unit symbol %s", residue, symbol)
    return nth_power_class(residue, n) and symbol == 0


# ---------------------------------------------------------------------------
# Two-variable Laurent series
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BiLocalElement:
    """Laurent series in pi1 with LaurentSeries-in-pi2 coefficients.

    Same conventions as LaurentSeries one level up: ``coeffs[0]`` is a nonzero
    series unless ``coeffs`` is empty, in which case ``valuation`` is the
    absolute pi1-precision.
    """

    field: PrimeField
    valuation: int
    coeffs: Tuple[LaurentSeries, ...]

    @classmethod
    def build(cls, field: PrimeField, valuation: int, coeffs: Sequence[LaurentSeries]) -> "BiLocalElement":
        start = 0
        while start < len(coeffs) and coeffs[start].is_zero:
            start += 1
        return cls(field, valuation + start, tuple(coeffs[start:]))

    @classmethod
    def zero(cls, field: PrimeField, absolute_precision: int) -> "BiLocalElement":
        return cls(field, absolute_precision, ())

    @classmethod
    def constant(
        cls, field: PrimeField, value: Scalar, precision: Optional[int] = None, inner: Optional[int] = None
    ) -> "BiLocalElement":
        precision = settings.SHA_PRECISION if precision is None else precision
        inner = settings.SHA_PRECISION if inner is None else inner
        head = LaurentSeries.constant(field, value, inner)
        return cls.build(field, 0, [head] + [LaurentSeries.zero(field, inner)] * (precision - 1))

    @classmethod
    def from_terms(
        cls,
        field: PrimeField,
        terms: Dict[Tuple[int, int], int],
        precision: Optional[int] = None,
        inner: Optional[int] = None,
    ) -> "BiLocalElement":
        """Element with coefficient terms[(i, j)] at pi1^i pi2^j."""
        precision = settings.SHA_PRECISION if precision is None else precision
        inner = settings.SHA_PRECISION if inner is None else inner
        rows: Dict[int, Dict[int, int]] = {}
        for (i, j), c in terms.items():
            if int(c) % field.q:
                rows.setdefault(i, {})[j] = c
        if not rows:
            return cls.zero(field, precision)
        low = min(rows)
        coeffs = [LaurentSeries.from_terms(field, rows.get(low + k, {}), inner) for k in range(precision)]
        return cls.build(field, low, coeffs)

    @property
    def precision(self) -> int:
        return len(self.coeffs)

    @property
    def absolute_precision(self) -> int:
        return self.valuation + len(self.coeffs)

    @property
    def inner_precision(self) -> int:
        return max((c.precision for c in self.coeffs), default=settings.SHA_PRECISION)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> LaurentSeries:
        if self.is_zero:
            raise PrecisionExhausted(
                f"Leading pi1-coefficient not determinable: element is O(pi1^{self.valuation}).",
                absolute_precision=self.valuation,
            )
        return self.coeffs[0]

    def _coefficient(self, exponent: int) -> Optional[LaurentSeries]:
        if exponent < self.valuation:
            return None
        return self.coeffs[exponent - self.valuation]

    def _lift(self, other: Union["BiLocalElement", Scalar]) -> "BiLocalElement":
        if isinstance(other, BiLocalElement):
            return other
        return BiLocalElement.constant(self.field, other, max(self.absolute_precision, 1), self.inner_precision)

    def __add__(self, other: Union["BiLocalElement", Scalar]) -> "BiLocalElement":
        other = self._lift(other)
        cap = min(self.absolute_precision, other.absolute_precision)
        low = min(self.valuation, other.valuation)
        if low >= cap:
            return BiLocalElement.zero(self.field, cap)
        coeffs = []
        for k in range(low, cap):
            left, right = self._coefficient(k), other._coefficient(k)
            if left is None:
                coeffs.append(right)
            elif right is None:
                coeffs.append(left)
            else:
                coeffs.append(left + right)
        return BiLocalElement.build(self.field, low, coeffs)

    __radd__ = __add__

    def __neg__(self) -> "BiLocalElement":
        return BiLocalElement(self.field, self.valuation, tuple(-c for c in self.coeffs))

    def __sub__(self, other: Union["BiLocalElement", Scalar]) -> "BiLocalElement":
        return self + (-self._lift(other))

    def scale(self, factor: Union[LaurentSeries, Scalar]) -> "BiLocalElement":
        return BiLocalElement.build(self.field, self.valuation, [c * factor for c in self.coeffs])

    def shift(self, exponent: int) -> "BiLocalElement":
        return BiLocalElement(self.field, self.valuation + exponent, self.coeffs)

    def shift_inner(self, exponent: int) -> "BiLocalElement":
        return BiLocalElement(self.field, self.valuation, tuple(c.shift(exponent) for c in self.coeffs))

    def __mul__(self, other: Union["BiLocalElement", Scalar]) -> "BiLocalElement":
        if not isinstance(other, BiLocalElement):
            return self.scale(other)
        if self.is_zero or other.is_zero:
            cap = min(self.valuation + other.absolute_precision, other.valuation + self.absolute_precision)
            return BiLocalElement.zero(self.field, cap)
        size = min(self.precision, other.precision)
        product: List[Optional[LaurentSeries]] = [None] * size
        for i in range(size):
            for j in range(size - i):
                term = self.coeffs[i] * other.coeffs[j]
                product[i + j] = term if product[i + j] is None else product[i + j] + term
        return BiLocalElement.build(self.field, self.valuation + other.valuation, product)

    __rmul__ = __mul__

    def inverse(self) -> "BiLocalElement":
        lead_inv = self.leading().inverse()
        inv = [lead_inv]
        for k in range(1, self.precision):
            total = self.coeffs[1] * inv[k - 1]
            for i in range(2, k + 1):
                total = total + self.coeffs[i] * inv[k - i]
            inv.append(-(lead_inv * total))
        return BiLocalElement.build(self.field, -self.valuation, inv)

    def __truediv__(self, other: Union["BiLocalElement", Scalar]) -> "BiLocalElement":
        return self * self._lift(other).inverse()

    def __pow__(self, exponent: int) -> "BiLocalElement":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = BiLocalElement.constant(self.field, 1, max(self.precision, 1), self.inner_precision)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def agrees_with(self, other: Union["BiLocalElement", Scalar]) -> bool:
        return (self - other).is_zero

    def __str__(self) -> str:
        parts = []
        for offset, c in enumerate(self.coeffs):
            if c.is_zero:
                continue
            exponent = self.valuation + offset
            power = "" if exponent == 0 else ("*pi1" if exponent == 1 else f"*pi1^{exponent}")
            parts.append(f"({c.to_literal().replace('t', 'pi2')}){power}")
        body = " + ".join(parts) if parts else "0"
        return f"{body} + O(pi1^{self.absolute_precision})"


class MonomialNormalForm(NamedTuple):
    u: FieldElement
    s: int
    t: int
    b: BiLocalElement


def monomial_normal_form(x: BiLocalElement, m: int) -> MonomialNormalForm:
    """x = u * pi1^s * pi2^t * b^m with b = 1 mod the maximal ideal of the residue field."""
    x.field.require_tame(m)
    head = x.leading()
    s, t, u = x.valuation, head.valuation, head.leading()
    z = x.shift(-s).shift_inner(-t).scale(u.inverse())

    inv_m = x.field.element(m).inverse()
    root = BiLocalElement.constant(x.field, 1, z.precision, z.inner_precision)
    limit = (z.precision + 1) * (z.inner_precision.bit_length() + 2)
    for step in range(limit):
        correction = root - z * root ** (m + 1)
        if correction.is_zero:
            logger.debug("Normal form Newton iteration converged after %s steps", step)
            break
        root = root + correction.scale(inv_m)
    b = z * root ** (m - 1)
    recomposed = (b ** m).shift(s).shift_inner(t).scale(u)
    if not recomposed.agrees_with(x):
        raise PrecisionExhausted("Normal form does not recompose at working precision.", m=m)
    return MonomialNormalForm(u, s, t, b)


# ---------------------------------------------------------------------------
# Branch shapes of the triangle model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BranchShape:
    """Local shape of L at a branch field with uniformizer pi_j.

    ``uniformizer_order`` is the order of the pi_j-exponent image of the
    generators; ``unit_order`` the order of the part of the span that is a unit
    at pi_j (pi_k-exponent and residue class).
    """

    uniformizer_order: int
    unit_order: int

    @property
    def has_uniformizer_radicand(self) -> bool:
        return self.uniformizer_order > 1

    @property
    def has_unit_radicand(self) -> bool:
        return self.unit_order > 1


def branch_shape_from_generators(vectors: Sequence[Sequence[int]], n: int) -> BranchShape:
    """Shape from generator vectors (pi_j exponent, pi_k exponent, unit class)."""
    for vector in vectors:
        if len(vector) != 3:
            raise ValueError(f"Branch vectors have three entries, got {list(vector)}.")
    hermite, _ = _hermite_span([[value % n for value in vector] for vector in vectors], n)
    uniformizer_order = n // hermite[0][0]
    unit_order = n ** 2 // (hermite[1][1] * hermite[2][2])
    return BranchShape(uniformizer_order, unit_order)


def rho_order_in_branch(shape: BranchShape, n: int) -> int:
    """Order of the class of the primitive n^2-th root rho in T/RT at the branch."""
    if not shape.has_uniformizer_radicand:
        return 1
    if shape.uniformizer_order == n and shape.unit_order == n:
        return n
    raise UnsupportedShape(
        "Only trivial, unit-only and (uniformizer + independent unit) branch shapes are supported.",
        uniformizer_order=shape.uniformizer_order,
        unit_order=shape.unit_order,
        n=n,
    )


@dataclass(frozen=True)
class RhoMembership:
    """rho^t in RT iff the order divides t; ``power`` copies of tau(c)/c give rho^t when c^n = u.

    ``shift`` is the k with tau = sigma^k on the residue Kummer extension and
    ``witness`` the checked element (tau(c)/c)^power.
    """

    t: int
    order: int
    member: bool
    zeta: Optional[FieldElement] = None
    power: Optional[int] = None
    shift: Optional[int] = None
    witness: Optional[ExtElement] = None


def rho_membership(
    shape: BranchShape, t: int, field: PrimeField, n: int, residue_radicand: Optional[LaurentSeries] = None
) -> RhoMembership:
    """Decide rho^t in RT at the branch; a positive answer carries a checked witness.

    c is an n-th root of the residue of the unit radicand (pi_k when not
    given), taken in the cyclic Kummer extension of the residue field.
    """
    order = rho_order_in_branch(shape, n)
    if order == 1:
        return RhoMembership(t, 1, True)
    if t % order:
        return RhoMembership(t, order, False)
    rho = primitive_root_of_unity(field, n * n)
    zeta = rho ** n
    radicand = residue_radicand if residue_radicand is not None else LaurentSeries.monomial(field, 1, 1)
    ext = CyclicKummerLocal(radicand, n, field)
    # tau scales the n-th root of the unit radicand by rho^n.
    shift = root_of_unity_log(zeta, ext.rho, n)
    c = ext.generator()
    witness = (c.conjugate(shift) / c) ** (t // n)
    if not witness.agrees_with(ext.scalar(rho ** t)):
        raise ArithmeticError(f"(tau(c)/c)^{t // n} does not equal rho^{t}.")
    return RhoMembership(t, order, True, zeta=zeta, power=t // n, shift=shift, witness=witness)


# Triangle model: pi1 = x, pi2 = y, pi3 = x + y - 1 on the chart z = 1.
TRIANGLE_PARAMETERS = {1: X, 2: Y, 3: X + Y - 1}
TRIANGLE_POINTS = {1: (1, 0), 2: (0, 1), 3: (0, 0)}
TRIANGLE_GENERATORS = ({1: 1, 2: 1}, {2: 1, 3: 1})


def triangle_branch_shapes(n: int, field: Optional[PrimeField] = None) -> Dict[Tuple[int, int], BranchShape]:
    """Shapes of F(n-th roots of pi1 pi2, pi2 pi3) at the branches (m_i, pi_j), i != j.

    At m_i the parameters are pi_j, pi_k and pi_i is a unit whose value at the
    point gives the residue class.
    """
    field = field or _smallest_field(n)
    shapes = {}
    for i, point in TRIANGLE_POINTS.items():
        unit_value = rational_point_residue(TRIANGLE_PARAMETERS[i], point, field)
        for j in TRIANGLE_PARAMETERS:
            if j == i:
                continue
            k = 6 - i - j
            vectors = []
            for generator in TRIANGLE_GENERATORS:
                power = generator.get(i, 0)
                vectors.append([generator.get(j, 0), generator.get(k, 0), unit_class(unit_value ** power, n)])
            shapes[(i, j)] = branch_shape_from_generators(vectors, n)
            logger.debug("Branch (m%s, pi%s): %s", i, j, shapes[(i, j)])
    return shapes


def _smallest_field(n: int) -> PrimeField:
    q = n + 1
    while not isprime(q) or (q - 1) % n:
        q += 1
    return PrimeField(q)


# ---------------------------------------------------------------------------
# Rational functions over kappa
# ---------------------------------------------------------------------------

_TRANSFORMATIONS = standard_transformations + (implicit_multiplication_application, convert_xor)


def rational_function(text: str) -> sympy.Expr:
    """Parse a rational function in x, y ("xy" means x*y, "^" is a power)."""
    try:
        expr = parse_expr(text, local_dict={"x": X, "y": Y}, transformations=_TRANSFORMATIONS)
    except (SyntaxError, TokenError, TypeError, ValueError, sympy.SympifyError) as exc:
        raise ParseError(f"Cannot parse rational function {text!r}: {exc}", line=1, column=1) from exc
    extra = expr.free_symbols - {X, Y}
    if extra:
        raise ParseError(
            f"Unknown variables {sorted(str(s) for s in extra)} in {text!r}.", line=1, column=1
        )
    return expr


def _as_expression(f: Union[str, sympy.Expr]) -> sympy.Expr:
    return rational_function(f) if isinstance(f, str) else sympy.sympify(f)


def _reduce_rational(value: sympy.Rational, field: PrimeField) -> Optional[FieldElement]:
    numerator, denominator = int(value.p), int(value.q)
    if denominator % field.q == 0:
        return None
    return field.element(numerator) / denominator


def rational_point_residue(
    f: Union[str, sympy.Expr], point: Tuple[int, int], field: PrimeField
) -> FieldElement:
    """f(a, b) in kappa for a point (a, b) with the denominator nonzero there."""
    numerator, denominator = sympy.fraction(sympy.cancel(sympy.together(_as_expression(f))))
    a, b = point
    values = []
    for part in (numerator, denominator):
        evaluated = sympy.Rational(part.subs({X: a, Y: b}))
        reduced = _reduce_rational(evaluated, field)
        if reduced is None:
            raise PoleAtPoint(f"Coefficient denominator vanishes mod {field.q}.", point=list(point))
        values.append(reduced)
    if not values[1]:
        raise PoleAtPoint(f"Denominator of {f} vanishes at {point} over {field}.", point=list(point), q=field.q)
    return values[0] / values[1]


def restricts_to_one(f: Union[str, sympy.Expr], component: Union[str, sympy.Expr], field: PrimeField) -> bool:
    """True iff f is identically 1 mod q along the curve component = 0."""
    expr = _as_expression(f)
    curve = _as_expression(component)
    variable = Y if Y in curve.free_symbols else X
    solutions = sympy.solve(curve, variable)
    if len(solutions) != 1:
        raise ValueError(f"Component {curve} is not linear in {variable}.")
    restricted = sympy.cancel(sympy.together(expr.subs(variable, solutions[0])))
    numerator, denominator = sympy.fraction(restricted)
    difference = sympy.Poly(sympy.expand(numerator - denominator), X, Y)
    denominator_poly = sympy.Poly(sympy.expand(denominator), X, Y)
    if all(_reduce_rational(sympy.Rational(c), field) == 0 for c in denominator_poly.coeffs()):
        raise PoleAtPoint(f"Denominator of {f} vanishes along {curve} over {field}.", q=field.q)
    return all(_reduce_rational(sympy.Rational(c), field) == 0 for c in difference.coeffs())

