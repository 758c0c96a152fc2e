import random
import unittest
from itertools import product
from math import gcd
from unittest.mock import patch

from src import settings
from src.services.finite_field import PrimeField
from src.services.obstruction import (
    ExtensionDescriptor,
    LocalEvidence,
    ObstructionProblem,
    _triangle_problem,
    cokernel_invariants,
    edge_group_order,
    enumerate_image,
    in_image,
    multinorm_descriptors,
    multinorm_evidence,
    multinorm_reduce,
    phi_matrix,
    problem_from_model,
    random_tower,
    relabel,
    tower_problem,
    verify_local_trees,
    verify_multinorm,
    verify_triangle,
)
from src.services.patch_graph import (
    ModelDescription,
    PointSpec,
    betti_number,
    build_graph,
    connected_patch_graphs,
    is_tree,
    random_tree,
    triangle_model,
)
from src.services.series_local import BaseKind, TowerDescriptor
from src.utils.errors import (
    DimensionMismatch,
    EvidenceFailed,
    IncompatibleModulus,
    MissingEdgeValue,
    TowerMismatch,
    UnsupportedShape,
    WildCharacteristic,
)


def triangle_problem(n: int) -> ObstructionProblem:
    return ObstructionProblem(build_graph(triangle_model()), n)


def product_of(values):
    total = 1
    for value in values:
        total *= value
    return total


class TestProductMap(unittest.TestCase):
    def test_phi_rows(self):
        p = triangle_problem(2)
        phi = phi_matrix(p)
        self.assertEqual(len(phi), 6)
        self.assertTrue(all(sum(row) == 2 for row in phi))

    def test_hexagon_cokernel(self):
        self.assertEqual(cokernel_invariants(triangle_problem(2)), [2])
        self.assertEqual(cokernel_invariants(triangle_problem(4)), [4])

    def test_tree_has_trivial_cokernel(self):
        model = ModelDescription(components=("U1", "U2"), points=(PointSpec("P1", ("U1", "U2")),))
        p = problem_from_model(model, 3)
        self.assertEqual(cokernel_invariants(p), [])
        report = in_image(p, {"P1:U1": 2, "P1:U2": 1})
        self.assertTrue(report.feasible)
        self.assertTrue(report.sha_trivial)

    def test_triangle_target_is_infeasible(self):
        p = triangle_problem(2)
        target = {label: 0 for label in p.graph.labels}
        target["P1:X2"] = 1
        report = in_image(p, target)
        self.assertFalse(report.feasible)
        self.assertEqual(report.pairing(), 1)
        self.assertIsNotNone(report.cycle)
        self.assertEqual(len(report.cycle), 6)

    def test_feasible_target_gets_witness(self):
        p = triangle_problem(3)
        report = in_image(p, [1, 1, 0, 0, 0, 0])
        self.assertTrue(report.feasible)
        phi = phi_matrix(p)
        for row, value in zip(phi, report.target):
            self.assertEqual(sum(a * x for a, x in zip(row, report.witness)) % 3, value)

    def test_target_dimension(self):
        with self.assertRaises(DimensionMismatch):
            in_image(triangle_problem(2), [1, 0])
        with self.assertRaises(DimensionMismatch):
            in_image(triangle_problem(2), {"P9:X1": 1})

    def test_invalid_problems(self):
        g = build_graph(triangle_model())
        with self.assertRaises(ValueError):
            ObstructionProblem(g, 0)
        with self.assertRaises(ValueError):
            ObstructionProblem(g, 4, edge_moduli={"P1:X2": 3})
        with self.assertRaises(ValueError):
            ObstructionProblem(g, 4, vertex_orders={"P1": 3})

    def test_heterogeneous_moduli(self):
        g = build_graph(triangle_model())
        p = ObstructionProblem(g, 4, edge_moduli={"P1:X2": 2})
        self.assertTrue(p.extrapolated)
        self.assertEqual(len(enumerate_image(p)) * product_of(cokernel_invariants(p)), edge_group_order(p))
        with patch.object(settings, "SHA_ALLOW_EXTRAPOLATION", False):
            with self.assertRaises(UnsupportedShape):
                ObstructionProblem(g, 4, edge_moduli={"P1:X2": 2})

    def test_relabel_invariance(self):
        p = triangle_problem(3)
        q = relabel(p, {"P1": "A", "X2": "B"})
        self.assertIn("A:B", q.graph.labels)
        self.assertEqual(cokernel_invariants(p), cokernel_invariants(q))


class TestAcceptanceCorpora(unittest.TestCase):
    def test_trees_always_feasible(self):
        rng = random.Random(2024)
        for _ in range(200):
            g = random_tree(rng, 20)
            n = rng.choice([2, 3, 4])
            p = ObstructionProblem(g, n)
            report = in_image(p, [rng.randrange(n) for _ in g.branches])
            self.assertTrue(report.feasible)
            self.assertEqual(report.invariant_factors, [])

    def test_cokernel_matches_enumeration(self):
        graphs = list(connected_patch_graphs(8))
        self.assertEqual(sum(1 for g in graphs if len(g.branches) == 2), 2)
        self.assertEqual(sum(1 for g in graphs if len(g.branches) == 8 and is_tree(g)), 47)
        rng = random.Random(99)
        for n in (2, 3, 4):
            for g in graphs:
                p = ObstructionProblem(g, n)
                factors = cokernel_invariants(p)
                self.assertEqual(factors, [n] * betti_number(g), g.labels)
                if n ** len(g.vertices) > 729:
                    continue
                image = enumerate_image(p)
                self.assertEqual(len(image) * product_of(factors), edge_group_order(p))
                target = [rng.randrange(n) for _ in g.branches]
                self.assertEqual(in_image(p, target).feasible, tuple(target) in image)

    def test_small_trees_reach_every_target(self):
        for g in connected_patch_graphs(4):
            if not is_tree(g):
                continue
            for n in (2, 3):
                p = ObstructionProblem(g, n)
                for target in product(range(n), repeat=len(g.branches)):
                    report = in_image(p, list(target))
                    self.assertTrue(report.feasible, (g.labels, target))
                    phi = phi_matrix(p)
                    for row, value in zip(phi, target):
                        self.assertEqual(sum(a * x for a, x in zip(row, report.witness)) % n, value)


class TestScenarios(unittest.TestCase):
    def test_triangle_counterexamples(self):
        for n, q in ((2, 5), (3, 19), (2, 13)):
            report = verify_triangle(n, q)
            self.assertFalse(report.feasible)
            self.assertEqual(report.invariant_factors, [n])
            self.assertEqual(gcd(report.pairing(), n), 1)
            self.assertEqual(set(report.details["branch_orders"].values()), {n})

    def test_triangle_at_low_precision(self):
        report = verify_triangle(3, 19, precision=2)
        self.assertEqual(report.invariant_factors, [3])
        self.assertEqual(verify_multinorm(2, 5, precision=3).invariant_factors, [2])

    def test_triangle_needs_roots_of_unity(self):
        with self.assertRaises(IncompatibleModulus):
            verify_triangle(2, 7)

    def test_triangle_relabel_invariance(self):
        problem, _ = _triangle_problem(2, PrimeField(5))
        moved = relabel(problem, {"P1": "Q3", "P3": "Q1", "X1": "Y2", "X2": "Y1"})
        labels = dict(zip(problem.graph.labels, moved.graph.labels))
        target = {label: 0 for label in problem.graph.labels}
        target["P1:X2"] = 1
        before = in_image(problem, target)
        after = in_image(moved, {labels[label]: value for label, value in target.items()})
        self.assertFalse(after.feasible)
        self.assertEqual(after.invariant_factors, before.invariant_factors)
        self.assertEqual(moved.moduli, problem.moduli)
        self.assertEqual(gcd(after.pairing(), 2), 1)
        self.assertIn("Q3:Y1", moved.graph.labels)

    def test_multinorm_counterexample(self):
        for q in (5, 13):
            report = verify_multinorm(2, q)
            self.assertFalse(report.feasible)
            self.assertEqual(report.invariant_factors, [2])
            self.assertEqual(report.details["reduced_to"], "L1")
            self.assertEqual(report.details["diagonal_rho_exponent"], 2)
            self.assertEqual(set(report.details["theta_values"]), {"P1", "P2", "P3", "X1", "X2", "X3"})

    def test_multinorm_wild(self):
        with self.assertRaises(WildCharacteristic):
            verify_multinorm(2, 3)

    def test_reduction_evidence(self):
        F = PrimeField(5)
        first, second = multinorm_descriptors(2)
        reduced = multinorm_reduce(first, second, multinorm_evidence(), F)
        self.assertEqual(reduced.descriptor, first)
        self.assertEqual(reduced.places, ["P1", "P2", "P3", "X1", "X2", "X3"])

    def test_reduction_failures(self):
        F = PrimeField(5)
        first = ExtensionDescriptor("A", ("x",), 2)
        second = ExtensionDescriptor("B", ("2*x",), 2)
        with self.assertRaises(EvidenceFailed):
            multinorm_reduce(first, second, [LocalEvidence("P", point=(1, 1))], F)
        third = ExtensionDescriptor("C", ("x*(1 + y)",), 2)
        with self.assertRaises(EvidenceFailed):
            multinorm_reduce(first, third, [LocalEvidence("X", component="x")], F)
        self.assertEqual(
            multinorm_reduce(first, third, [LocalEvidence("Y", component="y")], F).values, {"Y": [1]}
        )


class TestResidueTowers(unittest.TestCase):
    def setUp(self):
        self.graph = build_graph(ModelDescription(components=("U1", "U2"), points=(PointSpec("P1", ("U1", "U2")),)))

    def test_random_towers_divide_n(self):
        rng = random.Random(1)
        for _ in range(100):
            tower = random_tower(rng, BaseKind.ALGEBRAICALLY_CLOSED, 4)
            self.assertTrue(all(f == 1 for _, f in tower.levels))
            self.assertEqual(4 % tower.ramification, 0)
            tower = random_tower(rng, BaseKind.FINITE, 4, 5)
            self.assertEqual(4 % (tower.ramification * tower.inertia_degree), 0)

    def test_tower_problem_moduli(self):
        crossed = TowerDescriptor(BaseKind.FINITE, ((1, 2), (2, 1)), 4, 5)
        cyclic = TowerDescriptor(BaseKind.FINITE, ((2, 2),), 4, 5)
        p = tower_problem(self.graph, {"P1:U1": crossed, "P1:U2": cyclic}, 4)
        self.assertEqual(p.moduli, [2, 1])
        self.assertTrue(p.extrapolated)
        uniform = tower_problem(self.graph, {"P1:U1": crossed, "P1:U2": crossed}, 4)
        self.assertEqual((uniform.n, uniform.moduli), (2, [2, 2]))
        self.assertTrue(in_image(uniform, [1, 0]).feasible)

    def test_tower_problem_errors(self):
        crossed = TowerDescriptor(BaseKind.FINITE, ((1, 2), (2, 1)), 4, 5)
        with self.assertRaises(MissingEdgeValue):
            tower_problem(self.graph, {"P1:U1": crossed}, 4)
        other = TowerDescriptor(BaseKind.FINITE, ((2, 1),), 2, 5)
        with self.assertRaises(TowerMismatch):
            tower_problem(self.graph, {"P1:U1": crossed, "P1:U2": other}, 4)

    def test_algebraically_closed_trees(self):
        summary = verify_local_trees(BaseKind.ALGEBRAICALLY_CLOSED, 4, None, 40, 10, random.Random(5))
        self.assertEqual(summary["branch_orders"], [1])
        self.assertEqual(summary["base"], "algebraically_closed")

    def test_finite_base_trees(self):
        summary = verify_local_trees(BaseKind.FINITE, 2, 5, 40, 10, random.Random(6))
        self.assertEqual(summary["branch_orders"], [1])
        summary = verify_local_trees(BaseKind.FINITE, 4, 5, 60, 8, random.Random(7))
        self.assertTrue(set(summary["branch_orders"]) <= {1, 2})


if __name__ == "__main__":
    unittest.main()
