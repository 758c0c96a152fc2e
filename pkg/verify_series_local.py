import random
import unittest

from hypothesis import given, settings, strategies as st

from src.services.finite_field import PrimeField, canonical_generator, unit_class
from src.services.series_local import (
    BaseKind,
    CyclicKummerLocal,
    LaurentSeries,
    TowerDescriptor,
    WitnessPair,
    hensel_nth_root,
    hilbert90_witness,
    is_norm_cyclic,
    local_invariants,
    norm_cyclic,
    nth_power_class,
    nth_power_r_witness,
    r_trivial_decompose,
    r_trivial_from_residue_one,
    recompose,
    tame_symbol,
    torus_quotient_order,
    tower_for,
)
from src.utils.errors import NormNotOne, PrecisionExhausted, ResidueNotOne, TowerMismatch, WildCharacteristic

F5 = PrimeField(5)
F7 = PrimeField(7)


def series(field, terms, precision=6):
    return LaurentSeries.from_terms(field, terms, precision)


class TestLaurentSeries(unittest.TestCase):
    def test_from_terms_window(self):
        s = series(F5, {-1: 1, 0: 2}, 4)
        self.assertEqual(s.valuation, -1)
        self.assertEqual(s.coeffs, (1, 2, 0, 0))
        self.assertEqual(s.absolute_precision, 3)

    def test_zero_tracks_precision(self):
        z = series(F5, {0: 5}, 4)
        self.assertTrue(z.is_zero)
        with self.assertRaises(PrecisionExhausted):
            z.leading()

    def test_inverse(self):
        s = series(F5, {-1: 1, 0: 2}, 5)
        inv = s.inverse()
        self.assertEqual(inv.valuation, 1)
        self.assertTrue((s * inv).agrees_with(1))

    def test_coefficient_beyond_precision(self):
        s = series(F5, {0: 1, 1: 1}, 3)
        self.assertEqual(s.coefficient(1), 1)
        self.assertEqual(s.coefficient(-4), 0)
        with self.assertRaises(PrecisionExhausted):
            s.coefficient(3)

    def test_literal(self):
        self.assertEqual(series(F5, {-1: 1, 0: 2, 2: 3}, 4).to_literal(), "t^-1 + 2 + 3*t^2")
        self.assertEqual(series(F5, {}, 4).to_literal(), "0")

    def test_residue_and_unit_part(self):
        s = series(F7, {0: 3, 1: 1})
        self.assertEqual(s.residue(), 3)
        self.assertEqual(series(F7, {2: 3}).residue(), 0)
        self.assertEqual(series(F7, {2: 3, 3: 1}).unit_part().valuation, 0)
        with self.assertRaises(ValueError):
            series(F7, {-1: 1}).residue()

    @given(st.lists(st.integers(0, 4), min_size=1, max_size=6), st.integers(-3, 3))
    @settings(max_examples=100, deadline=None)
    def test_product_with_inverse_is_one(self, coeffs, valuation):
        coeffs = [1] + coeffs
        s = LaurentSeries.build(F5, valuation, coeffs)
        self.assertTrue((s * s.inverse()).agrees_with(1))
        self.assertTrue((s ** 3 / s).agrees_with(s * s))


class TestHensel(unittest.TestCase):
    def test_square_root_of_one_plus_t(self):
        z = series(F5, {0: 1, 1: 1}, 8)
        w = hensel_nth_root(z, 2)
        self.assertEqual(w.residue(), 1)
        self.assertTrue((w * w).agrees_with(z))

    def test_residue_must_be_one(self):
        with self.assertRaises(ResidueNotOne):
            hensel_nth_root(series(F5, {0: 2, 1: 1}), 2)
        with self.assertRaises(ResidueNotOne):
            hensel_nth_root(series(F5, {1: 1}), 2)

    def test_wild_degree(self):
        with self.assertRaises(WildCharacteristic):
            hensel_nth_root(series(F5, {0: 1, 1: 1}), 5)

    def test_random_corpus_recomposes(self):
        rng = random.Random(0)
        for _ in range(500):
            q = rng.choice([5, 7, 13])
            n = rng.choice([2, 3, 4])
            if q % n == 0:
                continue
            F = PrimeField(q)
            terms = {k: rng.randrange(q) for k in range(1, 8)}
            terms[0] = 1
            z = LaurentSeries.from_terms(F, terms, 8)
            w = hensel_nth_root(z, n)
            self.assertTrue((w ** n).agrees_with(z))
            self.assertEqual(w.residue(), 1)


class TestTameSymbol(unittest.TestCase):
    def test_values(self):
        t5 = series(F5, {1: 1})
        t7 = series(F7, {1: 1})
        # -1 is a square mod 5 but not mod 7.
        self.assertEqual(tame_symbol(t5, t5, 2), 0)
        self.assertEqual(tame_symbol(t7, t7, 2), 1)
        self.assertEqual(tame_symbol(series(F5, {0: 2}), t5, 2), 1)
        self.assertEqual(tame_symbol(series(F5, {0: 2}), series(F5, {2: 1}), 2), 0)

    def test_symbol_laws(self):
        F13 = PrimeField(13)
        rng = random.Random(8)

        def random_series():
            terms = {k: rng.randrange(13) for k in range(1, 4)}
            terms[0] = rng.randrange(1, 13)
            return LaurentSeries.from_terms(F13, terms, 4) * LaurentSeries.monomial(F13, 1, rng.randint(-2, 2), 4)

        for _ in range(100):
            n = rng.choice([2, 3, 4, 6, 12])
            f, g, h = random_series(), random_series(), random_series()
            self.assertEqual(tame_symbol(f, -f, n), 0)
            self.assertEqual((tame_symbol(f, g, n) + tame_symbol(g, f, n)) % n, 0)
            self.assertEqual(tame_symbol(f * g, h, n), (tame_symbol(f, h, n) + tame_symbol(g, h, n)) % n)
            self.assertEqual(tame_symbol(h, f * g, n), (tame_symbol(h, f, n) + tame_symbol(h, g, n)) % n)

    def test_norm_criterion(self):
        ext = CyclicKummerLocal(series(F5, {0: 2}), 2, F5)
        self.assertFalse(is_norm_cyclic(ext, series(F5, {1: 1})))
        self.assertTrue(is_norm_cyclic(ext, series(F5, {2: 1})))
        self.assertTrue(is_norm_cyclic(ext, series(F5, {0: 3})))

    def test_norm_oracle_matches_enumeration(self):
        precision = 3
        g = canonical_generator(F5)
        for radicand in ({0: 2}, {1: 1}, {1: 2}):
            ext = CyclicKummerLocal(series(F5, radicand, precision), 2, F5)
            reached = set()
            for a in range(5):
                for b in range(5):
                    if not a and not b:
                        continue
                    for i in range(2):
                        for j in range(2):
                            x = ext.element(
                                [
                                    LaurentSeries.monomial(F5, a, i, precision),
                                    LaurentSeries.monomial(F5, b, j, precision),
                                ]
                            )
                            norm = norm_cyclic(ext, x)
                            reached.add((norm.valuation % 2, unit_class(norm.leading(), 2)))
            for v in range(2):
                for k in range(2):
                    lam = LaurentSeries.monomial(F5, g ** k, v, precision)
                    self.assertEqual(is_norm_cyclic(ext, lam), (v, k) in reached, (radicand, v, k))

    def test_norm_oracle_matches_enumeration_degree_four(self):
        precision = 3
        g = canonical_generator(F5)
        far = LaurentSeries.zero(F5, 4 * precision)

        def coordinates(head, i, tail):
            coords = [head] + [far] * 3
            coords[i] = tail
            return coords

        for radicand in ({0: 2}, {1: 1}, {2: 2}, {1: 2}):
            ext = CyclicKummerLocal(series(F5, radicand, precision), 4, F5)
            self.assertEqual(local_invariants(ext)[2], 4)
            elements = []
            for i in range(1, 4):
                for c1 in range(1, 5):
                    for k in range(2):
                        tail = LaurentSeries.monomial(F5, c1, k, precision)
                        elements.append(coordinates(far, i, tail))
                        for c0 in range(1, 5):
                            head = LaurentSeries.constant(F5, c0, precision)
                            elements.append(coordinates(head, i, tail))
            classes = set()
            for coords in elements:
                try:
                    norm = norm_cyclic(ext, ext.element(coords))
                except PrecisionExhausted:
                    continue
                classes.add((norm.valuation % 4, unit_class(norm.leading(), 4)))
            reached = {(0, 0)}
            while True:
                grown = reached | {((v + w) % 4, (k + m) % 4) for v, k in reached for w, m in classes}
                if grown == reached:
                    break
                reached = grown
            self.assertEqual(len(reached), 4, radicand)
            for v in range(4):
                for k in range(4):
                    lam = LaurentSeries.monomial(F5, g ** k, v, precision)
                    self.assertEqual(is_norm_cyclic(ext, lam), (v, k) in reached, (radicand, v, k))


class TestCyclicKummer(unittest.TestCase):
    def test_local_invariants(self):
        self.assertEqual(local_invariants(CyclicKummerLocal(series(F5, {0: 2}), 2, F5)), (1, 2, 2))
        self.assertEqual(local_invariants(CyclicKummerLocal(series(F5, {1: 1}), 2, F5)), (2, 1, 2))
        self.assertEqual(local_invariants(CyclicKummerLocal(series(F5, {0: 4}), 2, F5)), (1, 1, 1))

    def test_norm_of_generator(self):
        ext = CyclicKummerLocal(series(F5, {1: 1}), 2, F5)
        self.assertTrue(norm_cyclic(ext, ext.generator()).agrees_with(series(F5, {1: 4})))

    def test_inverse_in_extension(self):
        ext = CyclicKummerLocal(series(F5, {1: 1}), 2, F5)
        b = ext.one() + ext.generator()
        self.assertTrue((b * b.inverse()).agrees_with(1))

    def test_norm_is_multiplicative(self):
        F13 = PrimeField(13)
        precision = 6
        rng = random.Random(21)

        def random_element(ext):
            head = {k: rng.randrange(13) for k in range(1, precision)}
            head[0] = rng.randrange(1, 13)
            coords = [LaurentSeries.from_terms(F13, head, precision)]
            for _ in range(ext.n - 1):
                tail = {k: rng.randrange(13) for k in range(2, precision + 1)}
                tail[1] = rng.randrange(1, 13)
                coords.append(LaurentSeries.from_terms(F13, tail, precision))
            return ext.element(coords)

        for _ in range(50):
            n = rng.choice([2, 3, 4])
            radicand = series(F13, {rng.randint(0, 1): rng.randrange(1, 13), 2: rng.randrange(13)}, precision)
            ext = CyclicKummerLocal(radicand, n, F13)
            x, y = random_element(ext), random_element(ext)
            product = norm_cyclic(ext, x) * norm_cyclic(ext, y)
            self.assertTrue(norm_cyclic(ext, x * y).agrees_with(product), (n, radicand.to_literal()))

    def test_nth_power_class(self):
        self.assertTrue(nth_power_class(series(F5, {2: 4}), 2))
        self.assertFalse(nth_power_class(series(F5, {1: 1}), 2))
        self.assertFalse(nth_power_class(series(F5, {0: 2}), 2))


class TestRTriviality(unittest.TestCase):
    def setUp(self):
        self.ramified = CyclicKummerLocal(series(F5, {1: 1}, 8), 2, F5)
        self.unramified = CyclicKummerLocal(series(F5, {0: 2}, 8), 2, F5)

    def _quotient(self, ext, b):
        return b / b.conjugate(1)

    def test_nth_power_witness(self):
        ext = self.ramified
        alpha = ext.one() + ext.generator()
        witness = nth_power_r_witness(ext, alpha)
        self.assertEqual([pair.shift for pair in witness], [1])
        self.assertTrue(recompose(ext, witness).agrees_with(alpha ** 2 / norm_cyclic(ext, alpha)))

    def test_hilbert90(self):
        ext = self.ramified
        x = self._quotient(ext, ext.one() + ext.generator())
        pair = hilbert90_witness(ext, x)
        self.assertTrue(pair.value().agrees_with(x))

    def test_decompose_residue_one_element(self):
        ext = self.unramified
        t = LaurentSeries.monomial(F5, 1, 1, 8)
        b = ext.one() + ext.generator() * t
        x = self._quotient(ext, b)
        decomposition = r_trivial_decompose(ext, x, tower_for(ext))
        self.assertEqual(decomposition.j, 0)
        self.assertTrue(recompose(ext, decomposition.witness).agrees_with(x))

    def test_decompose_ramified_element(self):
        ext = self.ramified
        x = self._quotient(ext, ext.one() + ext.generator())
        decomposition = r_trivial_decompose(ext, x, tower_for(ext))
        self.assertTrue(recompose(ext, decomposition.witness).agrees_with(x))
        self.assertEqual(decomposition.rho_class, 0)

    def test_scalar_root_of_unity(self):
        ext = self.unramified
        minus_one = ext.scalar(-1)
        decomposition = r_trivial_decompose(ext, minus_one, tower_for(ext))
        self.assertEqual(decomposition.j, 1)
        self.assertEqual(decomposition.witness, [])
        self.assertEqual(decomposition.order, 1)

    def test_rho_is_r_trivial_on_mixed_level(self):
        ext = CyclicKummerLocal(series(F5, {2: 2}, 8), 4, F5)
        self.assertEqual(local_invariants(ext), (2, 2, 4))
        tower = tower_for(ext)
        self.assertEqual(tower.levels, ((2, 2),))
        decomposition = r_trivial_decompose(ext, ext.scalar(ext.rho), tower)
        self.assertEqual(decomposition.j, 1)
        self.assertEqual(decomposition.order, 1)
        self.assertEqual(decomposition.rho_class, 0)
        pair = WitnessPair(1, ext.generator() ** -1)
        self.assertTrue(pair.value().agrees_with(ext.scalar(ext.rho)))

    def test_residue_one_is_an_nth_power_of_norm_one(self):
        t = LaurentSeries.monomial(F5, 1, 1, 8)
        for ext, b in (
            (self.unramified, self.unramified.one() + self.unramified.generator() * t),
            (self.ramified, self.ramified.one() + self.ramified.generator()),
        ):
            z = self._quotient(ext, b)
            w, witness = r_trivial_from_residue_one(ext, z)
            self.assertTrue((w ** 2).agrees_with(z))
            self.assertTrue(norm_cyclic(ext, w).agrees_with(1))
            self.assertTrue(recompose(ext, witness).agrees_with(z))
        with self.assertRaises(ResidueNotOne):
            r_trivial_from_residue_one(self.unramified, self.unramified.scalar(-1))

    def test_norm_must_be_one(self):
        ext = self.ramified
        with self.assertRaises(NormNotOne):
            r_trivial_decompose(ext, ext.generator(), tower_for(ext))

    def test_tower_must_match(self):
        ext = self.ramified
        wrong = TowerDescriptor(BaseKind.FINITE, ((1, 2),), 2, 5)
        with self.assertRaises(TowerMismatch):
            r_trivial_decompose(ext, ext.one(), wrong)


class TestTowers(unittest.TestCase):
    def test_quotient_orders(self):
        self.assertEqual(torus_quotient_order(TowerDescriptor(BaseKind.FINITE, ((1, 2),), 2, 5)), 1)
        self.assertEqual(torus_quotient_order(TowerDescriptor(BaseKind.FINITE, ((2, 1),), 2, 5)), 1)
        self.assertEqual(torus_quotient_order(TowerDescriptor(BaseKind.FINITE, ((1, 2), (2, 1)), 4, 5)), 2)
        self.assertEqual(torus_quotient_order(TowerDescriptor(BaseKind.ALGEBRAICALLY_CLOSED, ((2, 1),), 2)), 1)

    def test_single_level_is_cyclic(self):
        self.assertEqual(torus_quotient_order(TowerDescriptor(BaseKind.FINITE, ((2, 2),), 4, 5)), 1)
        self.assertEqual(torus_quotient_order(TowerDescriptor(BaseKind.FINITE, ((3, 3),), 9, 19)), 1)

    def test_crossed_levels(self):
        self.assertEqual(torus_quotient_order(TowerDescriptor(BaseKind.FINITE, ((1, 2), (2, 1)), 2, 5)), 2)
        self.assertEqual(torus_quotient_order(TowerDescriptor(BaseKind.FINITE, ((2, 1), (1, 2)), 4, 5)), 2)
        self.assertEqual(torus_quotient_order(TowerDescriptor(BaseKind.FINITE, ((1, 3), (3, 1)), 9, 19)), 3)
        self.assertEqual(torus_quotient_order(TowerDescriptor(BaseKind.FINITE, ((2, 2), (2, 1)), 8, 17)), 2)
        self.assertEqual(torus_quotient_order(TowerDescriptor(BaseKind.FINITE, ((2, 1), (2, 1)), 4, 5)), 1)

    def test_invalid_towers(self):
        with self.assertRaises(TowerMismatch):
            TowerDescriptor(BaseKind.ALGEBRAICALLY_CLOSED, ((1, 2),), 2)
        with self.assertRaises(TowerMismatch):
            TowerDescriptor(BaseKind.FINITE, ((3, 1),), 2, 5)
        with self.assertRaises(TowerMismatch):
            TowerDescriptor(BaseKind.FINITE, ((2, 1),), 4, 7)

    def test_tower_for_matches_invariants(self):
        ext = CyclicKummerLocal(series(F5, {1: 1}), 2, F5)
        tower = tower_for(ext)
        self.assertEqual(tower.levels, ((2, 1),))
        self.assertEqual(tower.ramification, 2)


if __name__ == "__main__":
    unittest.main()
