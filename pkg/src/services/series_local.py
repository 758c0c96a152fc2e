"""Complete discretely valued fields kappa((t)) with tracked precision.

A ``LaurentSeries`` stores the known window ``t^v .. t^(v+prec-1)``; every
operation keeps only the terms its inputs determine, so results are always
correct "to working precision". On top of that sit cyclic Kummer extensions
``F(y)``, ``y^n = a``, their norms and tame symbols, and the constructive
decompositions of norm-one elements into R-trivial pieces ``b / sigma^k(b)``.
"""

import logging
from dataclasses import dataclass, field as dataclass_field
from enum import Enum
from functools import cached_property
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .. import settings
from ..utils.errors import (
    NormNotOne,
    PrecisionExhausted,
    ResidueNotOne,
    TowerMismatch,
    ZeroInput,
)
from .finite_field import (
    FieldElement,
    PrimeField,
    nth_power_test,
    primitive_root_of_unity,
    root_of_unity_log,
    unit_class,
)

logger = logging.getLogger(__name__)

Scalar = Union[int, FieldElement]


# ---------------------------------------------------------------------------
# Laurent series
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    """Truncated Laurent series over a prime field.

    ``coeffs[0]`` is nonzero unless the series is zero to its precision, in
    which case ``coeffs`` is empty and ``valuation`` records the absolute
    precision ``O(t^valuation)``.
    """

    field: PrimeField
    valuation: int
    coeffs: Tuple[int, ...]

    # -- construction -------------------------------------------------------

    @classmethod
    def build(cls, field: PrimeField, valuation: int, coeffs: Sequence[int]) -> "LaurentSeries":
        values = [int(c) % field.q for c in coeffs]
        start = 0
        while start < len(values) and values[start] == 0:
            start += 1
        return cls(field, valuation + start, tuple(values[start:]))

    @classmethod
    def zero(cls, field: PrimeField, absolute_precision: int) -> "LaurentSeries":
        return cls(field, absolute_precision, ())

    @classmethod
    def constant(cls, field: PrimeField, value: Scalar, precision: Optional[int] = None) -> "LaurentSeries":
        precision = settings.SHA_PRECISION if precision is None else precision
        return cls.build(field, 0, [int(value)] + [0] * (precision - 1))

    @classmethod
    def monomial(
        cls, field: PrimeField, coefficient: Scalar, exponent: int, precision: Optional[int] = None
    ) -> "LaurentSeries":
        precision = settings.SHA_PRECISION if precision is None else precision
        return cls.build(field, exponent, [int(coefficient)] + [0] * (precision - 1))

    @classmethod
    def from_terms(
        cls, field: PrimeField, terms: Dict[int, int], precision: Optional[int] = None
    ) -> "LaurentSeries":
        """Series known in ``precision`` terms from the lowest exponent with a nonzero coefficient."""
        precision = settings.SHA_PRECISION if precision is None else precision
        live = {exp: int(c) % field.q for exp, c in terms.items() if int(c) % field.q}
        if not live:
            return cls.zero(field, precision)
        low = min(live)
        dropped = [exp for exp in live if exp >= low + precision]
        if dropped:
            logger.debug("Truncating terms %s beyond precision %s", sorted(dropped), precision)
        return cls.build(field, low, [live.get(low + i, 0) for i in range(precision)])

    # -- inspection ---------------------------------------------------------

    @property
    def precision(self) -> int:
        return len(self.coeffs)

    @property
    def absolute_precision(self) -> int:
        return self.valuation + len(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def q(self) -> int:
        return self.field.q

    def coefficient(self, exponent: int) -> int:
        if exponent >= self.absolute_precision:
            raise PrecisionExhausted(
                f"Coefficient of t^{exponent} is beyond the known precision O(t^{self.absolute_precision}).",
                exponent=exponent,
            )
        if exponent < self.valuation:
            return 0
        return self.coeffs[exponent - self.valuation]

    def leading(self) -> FieldElement:
        self._require_nonzero()
        return self.field.element(self.coeffs[0])

    def residue(self) -> FieldElement:
        """Image in the residue field of a series of nonnegative valuation."""
        if self.is_zero:
            if self.valuation > 0:
                return self.field.zero
            self._require_nonzero()
        if self.valuation < 0:
            raise ValueError("A series with a pole has no residue.")
        if self.valuation > 0:
            return self.field.zero
        return self.field.element(self.coeffs[0])

    def unit_part(self) -> "LaurentSeries":
        self._require_nonzero()
        return LaurentSeries(self.field, 0, self.coeffs)

    def truncate(self, precision: int) -> "LaurentSeries":
        return LaurentSeries.build(self.field, self.valuation, self.coeffs[: max(precision, 0)])

    def agrees_with(self, other: Union["LaurentSeries", Scalar]) -> bool:
        return (self - other).is_zero

    def is_constant(self) -> bool:
        """True when every known term above t^0 vanishes."""
        if self.is_zero:
            return True
        return self.valuation >= 0 and (self.valuation > 0 or not any(self.coeffs[1:]))

    def _require_nonzero(self) -> None:
        if self.is_zero:
            raise PrecisionExhausted(
                f"Leading term not determinable: series is O(t^{self.valuation}).",
                absolute_precision=self.valuation,
            )

    # -- arithmetic ---------------------------------------------------------

    def _lift(self, other: Union["LaurentSeries", Scalar]) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            if other.q != self.q:
                raise ValueError(f"Cannot mix series over F_{self.q} and F_{other.q}.")
            return other
        return LaurentSeries.constant(self.field, other, max(self.absolute_precision, 1))

    def __add__(self, other: Union["LaurentSeries", Scalar]) -> "LaurentSeries":
        other = self._lift(other)
        cap = min(self.absolute_precision, other.absolute_precision)
        low = min(self.valuation, other.valuation)
        if low >= cap:
            return LaurentSeries.zero(self.field, cap)
        return LaurentSeries.build(
            self.field, low, [self.coefficient(k) + other.coefficient(k) for k in range(low, cap)]
        )

    __radd__ = __add__

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(self.field, self.valuation, tuple((-c) % self.q for c in self.coeffs))

    def __sub__(self, other: Union["LaurentSeries", Scalar]) -> "LaurentSeries":
        return self + (-self._lift(other))

    def __rsub__(self, other: Scalar) -> "LaurentSeries":
        return self._lift(other) - self

    def scale(self, scalar: Scalar) -> "LaurentSeries":
        value = int(scalar) % self.q
        if not value:
            return LaurentSeries.zero(self.field, self.absolute_precision)
        return LaurentSeries(self.field, self.valuation, tuple(c * value % self.q for c in self.coeffs))

    def shift(self, exponent: int) -> "LaurentSeries":
        return LaurentSeries(self.field, self.valuation + exponent, self.coeffs)

    def __mul__(self, other: Union["LaurentSeries", Scalar]) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            return self.scale(other)
        other = self._lift(other)
        if self.is_zero or other.is_zero:
            cap = min(self.valuation + other.absolute_precision, other.valuation + self.absolute_precision)
            return LaurentSeries.zero(self.field, cap)
        size = min(self.precision, other.precision)
        q = self.q
        product = [0] * size
        for i in range(size):
            left = self.coeffs[i]
            if not left:
                continue
            for j in range(size - i):
                product[i + j] = (product[i + j] + left * other.coeffs[j]) % q
        return LaurentSeries.build(self.field, self.valuation + other.valuation, product)

    __rmul__ = __mul__

    def inverse(self) -> "LaurentSeries":
        self._require_nonzero()
        q = self.q
        size = self.precision
        lead_inv = pow(self.coeffs[0], -1, q)
        inv = [lead_inv] + [0] * (size - 1)
        for k in range(1, size):
            total = sum(self.coeffs[i] * inv[k - i] for i in range(1, k + 1))
            inv[k] = (-lead_inv * total) % q
        return LaurentSeries.build(self.field, -self.valuation, inv)

    def __truediv__(self, other: Union["LaurentSeries", Scalar]) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            return self.scale(self.field.element(other).inverse())
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other: Scalar) -> "LaurentSeries":
        return self._lift(other) * self.inverse()

    def __pow__(self, exponent: int) -> "LaurentSeries":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = LaurentSeries.constant(self.field, 1, max(self.precision, 1))
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    # -- rendering ----------------------------------------------------------

    def to_literal(self) -> str:
        """Known terms in the CLI literal grammar (no precision marker)."""
        parts = []
        for offset, c in enumerate(self.coeffs):
            if not c:
                continue
            exponent = self.valuation + offset
            if exponent == 0:
                parts.append(str(c))
            else:
                power = "t" if exponent == 1 else f"t^{exponent}"
                parts.append(power if c == 1 else f"{c}*{power}")
        return " + ".join(parts) if parts else "0"

    def __str__(self) -> str:
        return f"{self.to_literal()} + O(t^{self.absolute_precision})"

    def __repr__(self) -> str:
        return f"LaurentSeries(F_{self.q}: {self})"


def hensel_nth_root(z: LaurentSeries, n: int) -> LaurentSeries:
    """The n-th root of z that reduces to 1, by Newton iteration.

    Iterates r <- r + (r - z r^(n+1)) / n towards z^(-1/n), then returns
    z * r^(n-1), so no series division is needed inside the loop.
    """
    z.field.require_tame(n)
    if z.is_zero or z.valuation != 0 or z.coeffs[0] != 1:
        raise ResidueNotOne("Hensel lifting needs a unit with residue 1.", series=z.to_literal())
    if n == 1:
        return z
    inv_n = z.field.element(n).inverse()
    root = LaurentSeries.constant(z.field, 1, z.precision)
    for step in range(z.precision.bit_length() + 2):
        root = root + (root - z * root ** (n + 1)).scale(inv_n)
        logger.debug("Hensel step %s: %s", step, root)
    w = z * root ** (n - 1)
    if not (w ** n).agrees_with(z):
        raise PrecisionExhausted("Hensel iteration did not converge at working precision.", n=n)
    return w


def tame_symbol(f: LaurentSeries, g: LaurentSeries, n: int) -> int:
    """Class in Z/n of the residue of (-1)^(v(f)v(g)) f^v(g) / g^v(f)."""
    if f.q != g.q:
        raise ValueError("Tame symbol arguments live over different fields.")
    field = f.field
    field.require_roots_of_unity(n)
    vf, vg = f.valuation, g.valuation
    lead_f, lead_g = f.leading(), g.leading()
    value = lead_f ** vg * lead_g ** (-vf)
    if (vf * vg) % 2:
        value = -value
    return unit_class(value, n)


# ---------------------------------------------------------------------------
# Cyclic Kummer extensions F(y), y^n = a
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CyclicKummerLocal:
    a: LaurentSeries
    n: int
    field: PrimeField

    def __post_init__(self):
        if self.a.q != self.field.q:
            raise ValueError("Radicand and base field disagree.")
        self.field.require_tame(self.n)
        self.field.require_roots_of_unity(self.n)
        if self.a.is_zero:
            raise ZeroInput("Kummer radicand must be nonzero.", q=self.field.q)

    @cached_property
    def rho(self) -> FieldElement:
        """rho_n; the generator sigma acts by y -> rho_n * y."""
        return primitive_root_of_unity(self.field, self.n)

    @property
    def precision(self) -> int:
        return self.a.precision

    def scalar(self, value: Union[LaurentSeries, Scalar]) -> "ExtElement":
        if not isinstance(value, LaurentSeries):
            value = LaurentSeries.constant(self.field, value, self.precision)
        zero = LaurentSeries.zero(self.field, value.absolute_precision)
        return ExtElement(self, (value,) + (zero,) * (self.n - 1))

    def one(self) -> "ExtElement":
        return self.scalar(1)

    def generator(self) -> "ExtElement":
        one = LaurentSeries.constant(self.field, 1, self.precision)
        zero = LaurentSeries.zero(self.field, self.precision)
        coords = [zero] * self.n
        if self.n == 1:
            return ExtElement(self, (self.a,))
        coords[1] = one
        return ExtElement(self, tuple(coords))

    def element(self, coordinates: Sequence[LaurentSeries]) -> "ExtElement":
        return ExtElement(self, tuple(coordinates))


@dataclass(frozen=True, eq=False)
class ExtElement:
    """c_0 + c_1 y + ... + c_{n-1} y^{n-1} in F(y), y^n = a."""

    ext: CyclicKummerLocal
    coordinates: Tuple[LaurentSeries, ...]

    def __post_init__(self):
        if len(self.coordinates) != self.ext.n:
            raise ValueError(f"Expected {self.ext.n} coordinates, got {len(self.coordinates)}.")

    def _lift(self, other: Union["ExtElement", LaurentSeries, Scalar]) -> "ExtElement":
        if isinstance(other, ExtElement):
            return other
        return self.ext.scalar(other)

    def __add__(self, other) -> "ExtElement":
        other = self._lift(other)
        return ExtElement(self.ext, tuple(a + b for a, b in zip(self.coordinates, other.coordinates)))

    __radd__ = __add__

    def __neg__(self) -> "ExtElement":
        return ExtElement(self.ext, tuple(-c for c in self.coordinates))

    def __sub__(self, other) -> "ExtElement":
        return self + (-self._lift(other))

    def __mul__(self, other) -> "ExtElement":
        other = self._lift(other)
        n = self.ext.n
        acc: List[Optional[LaurentSeries]] = [None] * n
        for i, left in enumerate(self.coordinates):
            for j, right in enumerate(other.coordinates):
                term = left * right
                k = i + j
                if k >= n:
                    term = term * self.ext.a
                    k -= n
                acc[k] = term if acc[k] is None else acc[k] + term
        return ExtElement(self.ext, tuple(acc))

    __rmul__ = __mul__

    def conjugate(self, k: int) -> "ExtElement":
        """sigma^k, acting by y -> rho_n^k y."""
        rho = self.ext.rho
        return ExtElement(
            self.ext, tuple(c.scale(rho ** (i * k)) for i, c in enumerate(self.coordinates))
        )

    def norm(self) -> LaurentSeries:
        return norm_cyclic(self.ext, self)

    def inverse(self) -> "ExtElement":
        cofactor = self.ext.one()
        for k in range(1, self.ext.n):
            cofactor = cofactor * self.conjugate(k)
        total = (self * cofactor).coordinates[0]
        if total.is_zero:
            raise PrecisionExhausted("Element is not invertible to working precision.")
        return cofactor * total.inverse()

    def __truediv__(self, other) -> "ExtElement":
        return self * self._lift(other).inverse()

    def __pow__(self, exponent: int) -> "ExtElement":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = self.ext.one()
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.coordinates)

    def is_scalar(self) -> bool:
        return all(c.is_zero for c in self.coordinates[1:])

    def agrees_with(self, other) -> bool:
        return (self - self._lift(other)).is_zero

    def residue_in_base(self) -> Optional[FieldElement]:
        """Residue in kappa when x = c + (maximal ideal of L) with c in kappa*, else None."""
        head = self.coordinates[0]
        if head.is_zero or head.valuation != 0:
            return None
        slope = self.ext.a.valuation
        n = self.ext.n
        for i, c in enumerate(self.coordinates[1:], start=1):
            if n * c.valuation + i * slope <= 0:
                return None
        return head.residue()

    def __str__(self) -> str:
        parts = []
        for i, c in enumerate(self.coordinates):
            if c.is_zero:
                continue
            basis = "" if i == 0 else ("*y" if i == 1 else f"*y^{i}")
            parts.append(f"({c.to_literal()}){basis}")
        return " + ".join(parts) if parts else "0"


def norm_cyclic(ext: CyclicKummerLocal, x: ExtElement) -> LaurentSeries:
    """N_{L/F}(x) as the product of the conjugates sigma^k(x), k = 0..n-1."""
    product = x
    for k in range(1, ext.n):
        product = product * x.conjugate(k)
    value = product.coordinates[0]
    if value.is_zero:
        raise PrecisionExhausted("Norm is zero to working precision; leading term not determinable.")
    return value


def is_norm_cyclic(ext: CyclicKummerLocal, lam: LaurentSeries) -> bool:
    """Norm criterion for tame cyclic Kummer extensions: the symbol (a, lam) is trivial."""
    return tame_symbol(ext.a, lam, ext.n) == 0


def local_invariants(ext: CyclicKummerLocal) -> Tuple[int, int, int]:
    """(e, f, degree) of the field F(y): ramification, residue degree, [F(y):F]."""
    n = ext.n
    v = ext.a.valuation
    k = unit_class(ext.a.leading(), n)
    degree = n // gcd(n, v, k)
    e = n // gcd(n, v)
    return e, degree // e, degree


# ---------------------------------------------------------------------------
# R-trivial witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessPair:
    """The R-trivial generator b / sigma^shift(b)."""

    shift: int
    element: ExtElement

    def value(self) -> ExtElement:
        return self.element / self.element.conjugate(self.shift)


@dataclass(frozen=True)
class RTrivialDecomposition:
    j: int
    witness: List[WitnessPair] = dataclass_field(default_factory=list)
    order: int = 1

    @property
    def rho_class(self) -> int:
        return self.j % self.order


def recompose(ext: CyclicKummerLocal, witness: Sequence[WitnessPair]) -> ExtElement:
    product = ext.one()
    for pair in witness:
        product = product * pair.value()
    return product


def _require_norm_one(ext: CyclicKummerLocal, x: ExtElement) -> None:
    if not norm_cyclic(ext, x).agrees_with(1):
        raise NormNotOne("Element does not have norm 1 to working precision.", element=str(x))


def nth_power_r_witness(ext: CyclicKummerLocal, alpha: ExtElement) -> List[WitnessPair]:
    """N(alpha)^-1 alpha^n as the product of alpha / sigma^k(alpha), k = 1..n-1."""
    if alpha.is_zero:
        raise ZeroInput("Cannot factor the zero element.")
    if alpha.is_scalar():
        return []
    witness = [WitnessPair(k, alpha) for k in range(1, ext.n)]
    claimed = alpha ** ext.n / norm_cyclic(ext, alpha)
    if not recompose(ext, witness).agrees_with(claimed):
        raise PrecisionExhausted("Witness does not recompose at working precision.")
    return witness


def _ext_nth_root(ext: CyclicKummerLocal, z: ExtElement) -> ExtElement:
    n = ext.n
    inv_n = ext.field.element(n).inverse()
    root = ext.one()
    for _ in range((ext.n * ext.precision).bit_length() + 2):
        correction = root - z * root ** (n + 1)
        root = root + ExtElement(ext, tuple(c.scale(inv_n) for c in correction.coordinates))
    w = z * root ** (n - 1)
    if not (w ** n).agrees_with(z):
        raise PrecisionExhausted("Hensel iteration in the extension did not converge.", n=n)
    return w


def r_trivial_from_residue_one(ext: CyclicKummerLocal, z: ExtElement) -> Tuple[ExtElement, List[WitnessPair]]:
    """Write a norm-one z = 1 mod the maximal ideal as w^n with N(w) = 1."""
    if z.residue_in_base() != 1:
        raise ResidueNotOne("Element is not congruent to 1 modulo the maximal ideal.", element=str(z))
    _require_norm_one(ext, z)
    if ext.n == 1:
        return z, []
    w = _ext_nth_root(ext, z)
    norm_w = norm_cyclic(ext, w)
    if not norm_w.agrees_with(1):
        raise NormNotOne("Hensel root has norm different from 1.", norm=str(norm_w))
    return w, nth_power_r_witness(ext, w)


def hilbert90_witness(ext: CyclicKummerLocal, x: ExtElement) -> WitnessPair:
    """b with x = b / sigma(b) for a norm-one x.

    b = sum_k x sigma(x) ... sigma^{k-1}(x) sigma^k(theta), trying theta = y^i and
    then 1 + y^i until b is invertible at working precision.
    """
    _require_norm_one(ext, x)
    y = ext.generator()
    candidates = [y ** i for i in range(ext.n)] + [ext.one() + y ** i for i in range(1, ext.n)]
    for theta in candidates:
        partial = ext.one()
        b = theta
        for k in range(1, ext.n):
            partial = x * partial.conjugate(1)
            b = b + partial * theta.conjugate(k)
        try:
            pair = WitnessPair(1, b)
            if pair.value().agrees_with(x):
                return pair
        except PrecisionExhausted:
            continue
    raise PrecisionExhausted("No invertible Hilbert 90 element found at working precision.")


# ---------------------------------------------------------------------------
# Residue towers
# ---------------------------------------------------------------------------


class BaseKind(str, Enum):
    FINITE = "finite"
    ALGEBRAICALLY_CLOSED = "algebraically_closed"


@dataclass(frozen=True)
class TowerDescriptor:
    """(e_i, f_i) levels of L tensor F_xi over F_xi, read down the residue tower."""

    base_kind: BaseKind
    levels: Tuple[Tuple[int, int], ...]
    n: int
    q: Optional[int] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("Tower degree must be positive.")
        for e, f in self.levels:
            if e < 1 or f < 1 or self.n % (e * f):
                raise TowerMismatch(f"Level ({e}, {f}) does not divide the degree {self.n}.", level=[e, f])
            if self.base_kind == BaseKind.ALGEBRAICALLY_CLOSED and f > 1:
                raise TowerMismatch("An algebraically closed residue field has no residue extensions.", level=[e, f])
        if self.base_kind == BaseKind.FINITE:
            if self.q is None or (self.q - 1) % self.n:
                raise TowerMismatch(f"A finite base needs q = 1 mod {self.n}.", q=self.q)

    @property
    def ramification(self) -> int:
        total = 1
        for e, _ in self.levels:
            total *= e
        return total

    @property
    def inertia_degree(self) -> int:
        total = 1
        for _, f in self.levels:
            total *= f
        return total


def tower_for(ext: CyclicKummerLocal) -> TowerDescriptor:
    e, f, degree = local_invariants(ext)
    levels = ((e, f),) if degree > 1 else ()
    return TowerDescriptor(BaseKind.FINITE, levels, ext.n, ext.field.q)


def torus_quotient_order(tower: TowerDescriptor) -> int:
    """Order of the class of rho in T(F)/RT(F) for the tower.

    A single Kummer level is cyclic, so it contributes nothing whatever its
    (e, f). The class survives only when an unramified level sits over a
    different ramified level, with order gcd(n, f, e) of the tower totals.
    """
    levels = tower.levels
    crossed = any(
        levels[i][1] > 1 and levels[j][0] > 1 for i in range(len(levels)) for j in range(len(levels)) if i != j
    )
    if not crossed:
        return 1
    order = gcd(tower.n, gcd(tower.inertia_degree, tower.ramification))
    logger.debug("Crossed tower levels %s give rho order %s", levels, order)
    return order


def r_trivial_decompose(ext: CyclicKummerLocal, x: ExtElement, tower: TowerDescriptor) -> RTrivialDecomposition:
    """x = rho_n^j * (product of witness pairs).

    Scalar roots of unity are returned as pure rho-powers. Otherwise the
    residue of x is corrected by a rho-power (itself R-trivial as
    y^-j / sigma(y^-j)) and the remainder lifted from residue 1; elements whose
    residue lies outside kappa go through the Hilbert 90 construction.
    """
    e, f, degree = local_invariants(ext)
    if tower.n != ext.n or tower.ramification != e or tower.ramification * tower.inertia_degree != degree:
        raise TowerMismatch(
            "Tower does not match the extension.",
            expected={"e": e, "f": f, "degree": degree},
            levels=[list(level) for level in tower.levels],
        )
    _require_norm_one(ext, x)
    order = torus_quotient_order(tower)
    rho = ext.rho

    if x.is_scalar() and x.coordinates[0].is_constant():
        j = root_of_unity_log(x.coordinates[0].residue(), rho, ext.n)
        return RTrivialDecomposition(j, [], order)

    residue = x.residue_in_base()
    witness: List[WitnessPair] = []
    if residue is not None and residue ** ext.n == 1:
        j = root_of_unity_log(residue, rho, ext.n)
        corrected = x * ext.scalar(rho ** (-j))
        if j:
            witness.append(WitnessPair(1, ext.generator() ** (-j)))
        _, lifted = r_trivial_from_residue_one(ext, corrected)
        witness.extend(lifted)
    else:
        witness.append(hilbert90_witness(ext, x))

    if not recompose(ext, witness).agrees_with(x):
        raise PrecisionExhausted("Decomposition does not recompose at working precision.")
    return RTrivialDecomposition(0, witness, order)


def nth_power_class(a: LaurentSeries, n: int) -> bool:
    """True iff a is an n-th power in F: n | v(a) and the leading residue is an n-th power."""
    if a.valuation % n:
        return False
    return nth_power_test(a.leading(), n)
