"""Exact arithmetic in prime residue fields F_q.

Only prime fields are modelled. Roots of unity, n-th power tests and the
discrete-log coordinate on F_q*/F_q*^n are all taken relative to the
canonical generator (the smallest primitive root mod q).
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Iterator, List, Union

from sympy import isprime
from sympy.ntheory import discrete_log, n_order, primitive_root

from .. import settings
from ..utils.errors import IncompatibleModulus, WildCharacteristic, ZeroInput

logger = logging.getLogger(__name__)

IntLike = Union[int, "FieldElement"]


@dataclass(frozen=True)
class PrimeField:
    q: int

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q < 2:
            raise ValueError(f"Residue characteristic must be an integer >= 2, got {self.q!r}.")
        if self.q >= settings.SHA_MAX_PRIME:
            raise ValueError(f"Residue characteristic {self.q} exceeds the supported bound.")
        if not isprime(self.q):
            raise ValueError(f"{self.q} is not prime.")

    def __call__(self, value: IntLike) -> "FieldElement":
        return self.element(value)

    def __str__(self) -> str:
        return f"F_{self.q}"

    def element(self, value: IntLike) -> "FieldElement":
        if isinstance(value, FieldElement):
            self._same(value.field)
            return value
        return FieldElement(int(value) % self.q, self)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(0, self)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(1, self)

    def units(self) -> Iterator["FieldElement"]:
        for value in range(1, self.q):
            yield FieldElement(value, self)

    def require_tame(self, n: int) -> None:
        """Reject degrees divisible by the residue characteristic."""
        _positive(n)
        if gcd(n, self.q) != 1:
            raise WildCharacteristic(f"Degree {n} is not coprime to the characteristic {self.q}.", n=n, q=self.q)

    def require_roots_of_unity(self, m: int) -> None:
        _positive(m)
        if (self.q - 1) % m:
            raise IncompatibleModulus(f"{m} does not divide q - 1 = {self.q - 1}.", m=m, q=self.q)

    def _same(self, other: "PrimeField") -> None:
        if other.q != self.q:
            raise ValueError(f"Cannot mix elements of F_{self.q} and F_{other.q}.")


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: PrimeField

    @property
    def q(self) -> int:
        return self.field.q

    def _coerce(self, other: IntLike) -> "FieldElement":
        return self.field.element(other)

    def __add__(self, other: IntLike) -> "FieldElement":
        return FieldElement((self.value + self._coerce(other).value) % self.q, self.field)

    __radd__ = __add__

    def __neg__(self) -> "FieldElement":
        return FieldElement(-self.value % self.q, self.field)

    def __sub__(self, other: IntLike) -> "FieldElement":
        return self + (-self._coerce(other))

    def __rsub__(self, other: IntLike) -> "FieldElement":
        return self._coerce(other) - self

    def __mul__(self, other: IntLike) -> "FieldElement":
        return FieldElement(self.value * self._coerce(other).value % self.q, self.field)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if not self.value:
            raise ZeroInput("0 has no inverse.", q=self.q)
        return FieldElement(pow(self.value, -1, self.q), self.field)

    def __truediv__(self, other: IntLike) -> "FieldElement":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other: IntLike) -> "FieldElement":
        return self._coerce(other) * self.inverse()

    def __pow__(self, exponent: int) -> "FieldElement":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return FieldElement(pow(self.value, exponent, self.q), self.field)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.q == other.q and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.q
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.q))

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"FieldElement({self.value} mod {self.q})"

    def __str__(self) -> str:
        return str(self.value)


def _positive(n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"Expected a positive integer, got {n!r}.")


def _nonzero(a: FieldElement) -> None:
    if not a.value:
        raise ZeroInput("Expected a nonzero field element.", q=a.q)


# ---------------------------------------------------------------------------
# Multiplicative structure
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def _generator_value(q: int) -> int:
    generator = int(primitive_root(q))
    logger.debug("Canonical generator of F_%s is %s", q, generator)
    return generator


def canonical_generator(field: PrimeField) -> FieldElement:
    """Smallest primitive root of F_q."""
    return field.element(_generator_value(field.q))


def element_order(a: FieldElement) -> int:
    _nonzero(a)
    return int(n_order(a.value, a.q))


def discrete_log_base_generator(a: FieldElement) -> int:
    _nonzero(a)
    if a.value == 1:
        return 0
    return int(discrete_log(a.q, a.value, _generator_value(a.q)))


def nth_power_test(a: FieldElement, n: int) -> bool:
    """True iff a lies in (F_q*)^n, via Euler's criterion a^((q-1)/n) = 1."""
    _nonzero(a)
    a.field.require_roots_of_unity(n)
    return pow(a.value, (a.q - 1) // n, a.q) == 1


def primitive_root_of_unity(field: PrimeField, m: int) -> FieldElement:
    """Smallest element of exact multiplicative order m."""
    field.require_roots_of_unity(m)
    if m == 1:
        return field.one
    base = canonical_generator(field) ** ((field.q - 1) // m)
    candidates = [(base ** k).value for k in range(1, m) if gcd(k, m) == 1]
    return field.element(min(candidates))


def roots_of_unity(field: PrimeField, m: int) -> List[FieldElement]:
    rho = primitive_root_of_unity(field, m)
    return [rho ** k for k in range(m)]


def unit_class(a: FieldElement, n: int) -> int:
    """Class of a in F_q*/F_q*^n as an exponent of the canonical generator, mod n."""
    _nonzero(a)
    a.field.require_roots_of_unity(n)
    return discrete_log_base_generator(a) % n


def nth_root(a: FieldElement, n: int) -> FieldElement:
    """Smallest n-th root of an n-th power."""
    if not nth_power_test(a, n):
        raise IncompatibleModulus(f"{a.value} is not an {n}-th power in F_{a.q}.", value=a.value, n=n, q=a.q)
    exponent = discrete_log_base_generator(a)
    root = canonical_generator(a.field) ** (exponent // n)
    return min((root * zeta for zeta in roots_of_unity(a.field, n)), key=lambda item: item.value)


def root_of_unity_log(zeta: FieldElement, rho: FieldElement, m: int) -> int:
    """Exponent k in [0, m) with rho^k = zeta, where rho has order m."""
    _nonzero(zeta)
    if zeta ** m != 1:
        raise IncompatibleModulus(f"{zeta.value} is not an {m}-th root of unity in F_{zeta.q}.", value=zeta.value, m=m)
    power = zeta.field.one
    for k in range(m):
        if power == zeta:
            return k
        power = power * rho
    raise IncompatibleModulus(f"{rho.value} does not generate the {m}-th roots of unity.", value=rho.value, m=m)
