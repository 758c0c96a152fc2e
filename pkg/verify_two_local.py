import random
import unittest
from itertools import product

from src.services.finite_field import PrimeField, canonical_generator, primitive_root_of_unity
from src.services.series_local import CyclicKummerLocal, LaurentSeries, is_norm_cyclic
from src.services.two_local import (
    BiLocalElement,
    BranchShape,
    MonomialClass,
    MonomialKummer,
    branch_shape_from_generators,
    is_nth_power_monomial,
    kummer_decompose,
    monomial_norm,
    monomial_normal_form,
    norm_along_pi1,
    norm_descent_2dim,
    ramification_after_root,
    ramification_descent,
    rational_function,
    rational_point_residue,
    restricts_to_one,
    rho_membership,
    rho_order_in_branch,
    span_order,
    triangle_branch_shapes,
)
from src.utils.errors import (
    DependentGenerators,
    IncompatibleModulus,
    ParseError,
    PoleAtPoint,
    UnsupportedShape,
    WildCharacteristic,
    ZeroInput,
)

F5 = PrimeField(5)
F13 = PrimeField(13)


def mono(u, e1=0, e2=0, field=F5):
    return MonomialClass.of(field, u, e1, e2)


class TestRamification(unittest.TestCase):
    def test_root_of_uniformizer_power(self):
        self.assertEqual(ramification_after_root(6, 3), 2)
        self.assertEqual(ramification_after_root(6, 5), 6)
        self.assertEqual(ramification_after_root(4, 2), 2)
        self.assertEqual(ramification_after_root(1, 2), 1)

    def test_table(self):
        expected = {(12, 2): 6, (12, 3): 4, (12, 5): 12, (9, 3): 3, (10, 5): 2, (7, 2): 7}
        for (e, ell), value in expected.items():
            self.assertEqual(ramification_after_root(e, ell), value)
        for e in range(1, 13):
            for ell in (2, 3, 5):
                result = ramification_after_root(e, ell)
                self.assertEqual(result * ell == e, e % ell == 0)

    def test_invalid_input(self):
        with self.assertRaises(ValueError):
            ramification_after_root(0, 2)
        with self.assertRaises(ValueError):
            ramification_after_root(6, 4)

    def test_descent(self):
        self.assertEqual(ramification_descent(12), [12, 6, 3, 1])
        self.assertEqual(ramification_descent(1), [1])


class TestMonomialClass(unittest.TestCase):
    def test_zero_unit(self):
        with self.assertRaises(ZeroInput):
            mono(0)

    def test_rendering(self):
        x = mono(3, 1, 0)
        self.assertEqual(x.to_literal(), "u:3 e1:1 e2:0")
        self.assertEqual(str(x), "3*pi1")
        self.assertEqual(str(mono(2, 2, 1)), "2*pi1^2*pi2")

    def test_group_law(self):
        x, y = mono(3, 1, 2), mono(4, -1, 1)
        self.assertEqual(x * y, mono(2, 0, 3))
        self.assertEqual(x / x, mono(1))
        self.assertEqual(x ** 2, mono(4, 2, 4))

    def test_vector_and_reduce(self):
        x = mono(3, 3, -1)
        self.assertEqual(x.vector(2), (1, 1, 1))
        self.assertEqual(x.reduce(2), mono(2, 1, 1))

    def test_nth_power(self):
        self.assertTrue(is_nth_power_monomial(mono(4, 2, 2), 2))
        self.assertFalse(is_nth_power_monomial(mono(2, 2, 2), 2))
        self.assertFalse(is_nth_power_monomial(mono(4, 1, 2), 2))

    def test_span_order(self):
        self.assertEqual(span_order([mono(1, 1), mono(1, 0, 1)], 2), 4)
        self.assertEqual(span_order([mono(1, 1), mono(4, 1)], 2), 2)
        self.assertEqual(span_order([mono(2), mono(1, 1), mono(1, 0, 1)], 2), 8)
        self.assertEqual(span_order([], 2), 1)


class TestKummerTower(unittest.TestCase):
    def test_dependent_generators(self):
        with self.assertRaises(DependentGenerators):
            MonomialKummer([mono(1, 1), mono(4, 1)], 2, F5)

    def test_requires_roots_of_unity(self):
        with self.assertRaises(IncompatibleModulus):
            MonomialKummer([mono(1, 1)], 3, F5)
        with self.assertRaises(WildCharacteristic):
            MonomialKummer([mono(1, 1)], 5, F5)

    def test_two_uniformizers(self):
        tower = kummer_decompose(MonomialKummer([mono(1, 1), mono(1, 0, 1)], 2, F5))
        self.assertEqual((tower.l1_degree, tower.d1, tower.d2), (1, 2, 2))
        self.assertEqual(tower.degree, 4)
        self.assertEqual(tower.l1_gens, ())
        self.assertEqual(tower.l2_radicand.vector(2), (1, 0, 0))
        self.assertEqual(tower.l3_radicand.vector(2), (0, 1, 0))
        self.assertEqual(tower.i_exp, 0)

    def test_unit_and_uniformizer(self):
        tower = kummer_decompose(MonomialKummer([mono(2), mono(1, 1)], 2, F5))
        self.assertEqual((tower.l1_degree, tower.d1, tower.d2), (2, 2, 1))
        self.assertEqual(len(tower.l1_gens), 1)
        self.assertEqual(tower.l1_gens[0].vector(2), (0, 0, 1))
        self.assertEqual([name for name, _ in tower.radicands()], ["l1_0", "l2", "l3"])

    def test_exhaustive_small_towers(self):
        g = canonical_generator(F13)
        for n in (2, 3, 4):
            vectors = list(product(range(n), repeat=3))
            for r in (1, 2):
                for choice in product(vectors, repeat=r):
                    gens = [MonomialClass(g ** k, e1, e2) for e1, e2, k in choice]
                    try:
                        K = MonomialKummer(gens, n, F13)
                    except DependentGenerators:
                        continue
                    tower = kummer_decompose(K)
                    self.assertEqual(tower.l1_degree * tower.d1 * tower.d2, n ** r)
                    radicands = [x for _, x in tower.radicands()]
                    self.assertEqual(span_order(radicands, n), n ** r)
                    self.assertEqual(span_order(radicands + gens, n), n ** r)
                    self.assertTrue(0 <= tower.i_exp < tower.d2)


class TestNormDescent(unittest.TestCase):
    def test_ramified_quadratic(self):
        K = MonomialKummer([mono(1, 1)], 2, F5)
        self.assertTrue(norm_descent_2dim(K, mono(1, 1)))
        self.assertTrue(norm_descent_2dim(K, mono(4, 1)))
        self.assertTrue(norm_descent_2dim(K, mono(4)))
        self.assertFalse(norm_descent_2dim(K, mono(2)))
        self.assertFalse(norm_descent_2dim(K, mono(1, 0, 1)))

    def test_certificate_recomposes(self):
        K = MonomialKummer([mono(1, 1)], 2, F5)
        descent = norm_descent_2dim(K, mono(1, 3, 2))
        self.assertTrue(descent.is_norm)
        self.assertEqual(descent.degree, 2)
        theta = mono(1)
        for step in descent.trail:
            theta = theta * step.norm
        self.assertEqual(theta * descent.certificate ** descent.degree, mono(1, 3, 2))

    def test_obstruction_reported(self):
        K = MonomialKummer([mono(1, 1), mono(1, 0, 1)], 2, F5)
        descent = norm_descent_2dim(K, mono(1, 1))
        self.assertFalse(descent.is_norm)
        self.assertIsNotNone(descent.obstruction)
        self.assertTrue(norm_descent_2dim(K, mono(1, 2)))

    def test_cyclic_case_matches_symbol_criterion(self):
        t = LaurentSeries.monomial(F5, 1, 1)
        for n in (2, 4):
            K = MonomialKummer([mono(1, 1, 0)], n, F5)
            ext = CyclicKummerLocal(t, n, F5)
            for u in range(1, 5):
                for e1 in range(-n, 2 * n):
                    one_dim = is_norm_cyclic(ext, LaurentSeries.monomial(F5, u, e1))
                    for e2 in range(-n, 2 * n):
                        expected = one_dim and e2 % n == 0
                        self.assertEqual(bool(norm_descent_2dim(K, mono(u, e1, e2))), expected, (n, u, e1, e2))

    def test_norm_along_pi1_decides_globally(self):
        checked = 0
        for n in (2, 4):
            for u, a, e2 in product(range(1, 5), range(n), (0, n)):
                try:
                    K = MonomialKummer([mono(u, a, e2)], n, F5)
                except DependentGenerators:
                    continue
                for v, e1, f2 in product(range(1, 5), range(-1, n + 1), range(-1, n + 1)):
                    lam = mono(v, e1, f2)
                    self.assertEqual(norm_along_pi1(K, lam), bool(norm_descent_2dim(K, lam)), (n, u, a, e2, lam))
                    checked += 1
        self.assertGreater(checked, 1000)

    def test_norm_along_pi1_shapes(self):
        with self.assertRaises(UnsupportedShape):
            norm_along_pi1(MonomialKummer([mono(1, 1, 1)], 2, F5), mono(1))
        with self.assertRaises(UnsupportedShape):
            norm_along_pi1(MonomialKummer([mono(2), mono(1, 1)], 2, F5), mono(1))
        with self.assertRaises(IncompatibleModulus):
            norm_along_pi1(MonomialKummer([mono(1, 1)], 2, F5), mono(1, 0, 0, F13))
        K = MonomialKummer([mono(2)], 2, F5)
        self.assertFalse(norm_along_pi1(K, mono(1, 1)))
        self.assertTrue(norm_along_pi1(K, mono(1, 2)))
        self.assertFalse(norm_along_pi1(K, mono(1, 0, 1)))

    def test_monomial_norms_are_norms(self):
        rng = random.Random(7)
        for _ in range(40):
            n = rng.choice([2, 3, 4])
            gens = [mono(canonical_generator(F13) ** rng.randrange(n), rng.randrange(n), rng.randrange(n), F13)]
            try:
                K = MonomialKummer(gens, n, F13)
            except DependentGenerators:
                continue
            exponents = [rng.randrange(-3, 4)]
            value = monomial_norm(K, exponents, base=mono(rng.randrange(1, 13), rng.randrange(3), 0, F13))
            self.assertTrue(norm_descent_2dim(K, value), (gens, exponents))

    def test_field_mismatch(self):
        K = MonomialKummer([mono(1, 1)], 2, F5)
        with self.assertRaises(IncompatibleModulus):
            norm_descent_2dim(K, mono(1, 1, 0, F13))


class TestBiLocal(unittest.TestCase):
    def test_arithmetic(self):
        x = BiLocalElement.from_terms(F5, {(0, 0): 1, (1, 0): 1, (0, 1): 2}, 5, 5)
        self.assertTrue((x * x.inverse()).agrees_with(1))
        self.assertTrue((x ** 2 - x * x).is_zero)

    def test_normal_form(self):
        x = BiLocalElement.from_terms(F5, {(1, 2): 3, (2, 2): 1, (1, 3): 1}, 6, 6)
        form = monomial_normal_form(x, 2)
        self.assertEqual((form.u, form.s, form.t), (3, 1, 2))
        self.assertEqual(form.b.leading().residue(), 1)
        self.assertTrue((form.b ** 2).shift(1).shift_inner(2).scale(form.u).agrees_with(x))

    def test_normal_form_random_corpus(self):
        rng = random.Random(11)
        for _ in range(500):
            q = rng.choice([5, 7, 13])
            m = rng.choice([2, 3, 4])
            F = PrimeField(q)
            s, t = rng.randrange(-3, 4), rng.randrange(-3, 4)
            terms = {(s + i, t + j): rng.randrange(q) for i in range(8) for j in range(8) if rng.random() < 0.3}
            terms[(s, t)] = rng.randrange(1, q)
            x = BiLocalElement.from_terms(F, terms, 8, 8)
            form = monomial_normal_form(x, m)
            self.assertEqual((form.u, form.s, form.t), (terms[(s, t)], s, t))
            self.assertEqual(form.b.leading().residue(), 1)
            recomposed = (form.b ** m).shift(form.s).shift_inner(form.t).scale(form.u)
            self.assertTrue(recomposed.agrees_with(x), (q, m, terms))

    def test_normal_form_wild(self):
        x = BiLocalElement.constant(F5, 2, 3, 3)
        with self.assertRaises(WildCharacteristic):
            monomial_normal_form(x, 5)


class TestBranchShapes(unittest.TestCase):
    def test_triangle_shapes(self):
        for n in (2, 3):
            shapes = triangle_branch_shapes(n)
            self.assertEqual(len(shapes), 6)
            for shape in shapes.values():
                self.assertEqual(shape, BranchShape(n, n))
                self.assertEqual(rho_order_in_branch(shape, n), n)

    def test_shape_from_generators(self):
        self.assertEqual(branch_shape_from_generators([[1, 0, 0]], 2), BranchShape(2, 1))
        self.assertEqual(branch_shape_from_generators([[0, 1, 0], [0, 0, 1]], 2), BranchShape(1, 4))
        with self.assertRaises(ValueError):
            branch_shape_from_generators([[1, 0]], 2)

    def test_rho_orders(self):
        self.assertEqual(rho_order_in_branch(BranchShape(1, 4), 2), 1)
        with self.assertRaises(UnsupportedShape):
            rho_order_in_branch(BranchShape(2, 1), 2)

    def test_membership(self):
        shape = BranchShape(2, 2)
        self.assertFalse(rho_membership(shape, 1, F5, 2).member)
        member = rho_membership(shape, 2, F5, 2)
        self.assertTrue(member.member)
        self.assertEqual(member.zeta, 4)
        self.assertEqual(member.power, 1)
        self.assertTrue(member.witness.agrees_with(member.witness.ext.scalar(-1)))
        self.assertTrue(rho_membership(BranchShape(1, 1), 1, F5, 2).member)

    def test_membership_witness_is_rho_power(self):
        F19 = PrimeField(19)
        rho = primitive_root_of_unity(F19, 9)
        for t in (0, 3, 6, 9):
            member = rho_membership(BranchShape(3, 3), t, F19, 3)
            self.assertTrue(member.member)
            self.assertEqual(member.power, t // 3)
            ext = member.witness.ext
            self.assertEqual(ext.rho ** member.shift, rho ** 3)
            self.assertTrue(member.witness.agrees_with(ext.scalar(rho ** t)))
        unit = LaurentSeries.constant(F5, 2)
        member = rho_membership(BranchShape(2, 2), 4, F5, 2, residue_radicand=unit)
        self.assertTrue(member.witness.agrees_with(1))
        self.assertFalse(rho_membership(BranchShape(3, 3), 4, F19, 3).member)


class TestRationalFunctions(unittest.TestCase):
    def test_parse(self):
        expr = rational_function("x*y/(x + y - 1)")
        self.assertEqual(rational_point_residue(expr, (2, 2), F5), 4 * pow(3, -1, 5) % 5)
        with self.assertRaises(ParseError):
            rational_function("x*z")
        with self.assertRaises(ParseError):
            rational_function("x +* (")

    def test_pole(self):
        with self.assertRaises(PoleAtPoint):
            rational_point_residue("x/y", (1, 0), F5)

    def test_restriction_to_component(self):
        self.assertTrue(restricts_to_one("1 + x", "x", F5))
        self.assertFalse(restricts_to_one("1 + y", "x", F5))
        self.assertTrue(restricts_to_one("(x + y)/(1 + x*y - x*y)", "x + y - 1", F5))


if __name__ == "__main__":
    unittest.main()
