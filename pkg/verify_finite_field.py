import unittest

from hypothesis import given, settings, strategies as st

from src.services.finite_field import (
    PrimeField,
    canonical_generator,
    discrete_log_base_generator,
    element_order,
    nth_power_test,
    nth_root,
    primitive_root_of_unity,
    root_of_unity_log,
    roots_of_unity,
    unit_class,
)
from src.utils.errors import IncompatibleModulus, WildCharacteristic, ZeroInput

PRIMES = [5, 7, 13, 19]


class TestPrimeField(unittest.TestCase):
    def test_rejects_non_primes(self):
        for q in (1, 4, 9, 15):
            with self.assertRaises(ValueError):
                PrimeField(q)

    def test_elements_reduce_mod_q(self):
        F = PrimeField(7)
        self.assertEqual(F.element(9), 2)
        self.assertEqual(F(3) * 5, 1)
        self.assertEqual(F(3) - 5, 5)
        self.assertEqual(F(2) ** -1, 4)

    def test_zero_has_no_inverse(self):
        with self.assertRaises(ZeroInput):
            PrimeField(5).zero.inverse()

    def test_mixing_fields_is_an_error(self):
        with self.assertRaises(ValueError):
            PrimeField(5)(1) + PrimeField(7)(1)

    def test_require_tame_and_roots(self):
        with self.assertRaises(WildCharacteristic):
            PrimeField(5).require_tame(10)
        with self.assertRaises(IncompatibleModulus):
            PrimeField(5).require_roots_of_unity(3)
        PrimeField(13).require_roots_of_unity(4)


class TestMultiplicativeStructure(unittest.TestCase):
    def test_canonical_generators(self):
        self.assertEqual(canonical_generator(PrimeField(5)), 2)
        self.assertEqual(canonical_generator(PrimeField(7)), 3)
        self.assertEqual(canonical_generator(PrimeField(19)), 2)

    def test_orders_and_logs(self):
        F = PrimeField(7)
        self.assertEqual(element_order(F(2)), 3)
        self.assertEqual(element_order(F(3)), 6)
        self.assertEqual(discrete_log_base_generator(F(2)), 2)
        self.assertEqual(discrete_log_base_generator(F(1)), 0)

    def test_nth_power_test(self):
        F = PrimeField(7)
        self.assertFalse(nth_power_test(F(2), 3))
        self.assertTrue(nth_power_test(F(6), 3))
        self.assertTrue(nth_power_test(F(2), 2))
        with self.assertRaises(ZeroInput):
            nth_power_test(F(0), 2)

    def test_primitive_roots_of_unity(self):
        self.assertEqual(primitive_root_of_unity(PrimeField(5), 4), 2)
        self.assertEqual(primitive_root_of_unity(PrimeField(13), 4), 5)
        self.assertEqual(primitive_root_of_unity(PrimeField(7), 1), 1)
        self.assertEqual([r.value for r in roots_of_unity(PrimeField(7), 3)], [1, 2, 4])

    def test_unit_class(self):
        F = PrimeField(7)
        self.assertEqual(unit_class(F(3), 2), 1)
        self.assertEqual(unit_class(F(2), 2), 0)
        with self.assertRaises(IncompatibleModulus):
            unit_class(F(3), 4)

    def test_nth_root(self):
        F = PrimeField(7)
        self.assertEqual(nth_root(F(4), 2), 2)
        with self.assertRaises(IncompatibleModulus):
            nth_root(F(2), 3)

    def test_root_of_unity_log(self):
        F = PrimeField(7)
        self.assertEqual(root_of_unity_log(F(4), F(2), 3), 2)
        with self.assertRaises(IncompatibleModulus):
            root_of_unity_log(F(3), F(2), 3)

    @given(st.sampled_from(PRIMES), st.integers(min_value=1, max_value=10**6))
    @settings(max_examples=200, deadline=None)
    def test_field_axioms(self, q, raw):
        F = PrimeField(q)
        a = F(raw % (q - 1) + 1)
        self.assertEqual(a * a.inverse(), 1)
        self.assertEqual(a ** (q - 1), 1)
        self.assertEqual(canonical_generator(F) ** discrete_log_base_generator(a), a)

    @given(st.sampled_from(PRIMES), st.integers(min_value=1, max_value=10**6), st.sampled_from([2, 3, 6]))
    @settings(max_examples=200, deadline=None)
    def test_nth_powers_have_roots(self, q, raw, n):
        F = PrimeField(q)
        if (q - 1) % n:
            return
        a = F(raw % (q - 1) + 1)
        power = a ** n
        self.assertTrue(nth_power_test(power, n))
        self.assertEqual(unit_class(power, n), 0)
        self.assertEqual(nth_root(power, n) ** n, power)


if __name__ == "__main__":
    unittest.main()
