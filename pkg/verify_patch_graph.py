import random
import unittest

from src.services.patch_graph import (
    Branch,
    GroupSpec,
    ModelDescription,
    PatchGraph,
    PointSpec,
    VertexKind,
    betti_number,
    build_graph,
    connected_components,
    cycle_basis,
    graph_summary,
    is_connected,
    is_tree,
    random_connected,
    random_tree,
    recompose_edges,
    tree_factorize,
    triangle_model,
)
from src.utils.errors import EmptyModel, MissingEdgeValue, NotATree, UnknownComponent


def path_model() -> ModelDescription:
    return ModelDescription(
        components=("U1", "U2"),
        points=(PointSpec("P1", ("U1", "U2")), PointSpec("P2", ("U2",))),
    )


class TestBuildGraph(unittest.TestCase):
    def test_triangle(self):
        g = build_graph(triangle_model())
        self.assertEqual(len(g.vertices), 6)
        self.assertEqual(g.labels, ["P1:X2", "P1:X3", "P2:X1", "P2:X3", "P3:X1", "P3:X2"])
        self.assertEqual(betti_number(g), 1)
        self.assertTrue(is_connected(g))
        self.assertFalse(is_tree(g))
        self.assertEqual(len(cycle_basis(g)), 1)
        self.assertEqual(len(cycle_basis(g)[0]), 6)

    def test_vertex_kinds(self):
        g = build_graph(triangle_model())
        self.assertEqual(g.kind("P2"), VertexKind.POINT)
        self.assertEqual(g.kind("X2"), VertexKind.COMPONENT)
        with self.assertRaises(UnknownComponent):
            g.kind("Q")

    def test_repeated_incidence(self):
        model = ModelDescription(components=("X1",), points=(PointSpec("P1", ("X1", "X1")),))
        g = build_graph(model)
        self.assertEqual(g.labels, ["P1:X1", "P1:X1#2"])
        self.assertEqual(betti_number(g), 1)
        self.assertIn(["P1", "X1"], cycle_basis(g))

    def test_disconnected(self):
        model = ModelDescription(
            components=("U1", "U2"), points=(PointSpec("P1", ("U1",)), PointSpec("P2", ("U2",)))
        )
        g = build_graph(model)
        self.assertFalse(is_connected(g))
        self.assertFalse(is_tree(g))
        self.assertEqual(connected_components(g), [["P1", "U1"], ["P2", "U2"]])
        self.assertEqual(betti_number(g), 0)

    def test_invalid_models(self):
        with self.assertRaises(EmptyModel):
            build_graph(ModelDescription(components=(), points=()))
        with self.assertRaises(EmptyModel):
            build_graph(ModelDescription(components=("U1",), points=(PointSpec("P1", ()),)))
        with self.assertRaises(UnknownComponent):
            build_graph(ModelDescription(components=("U1",), points=(PointSpec("P1", ("U9",)),)))
        with self.assertRaises(UnknownComponent):
            build_graph(ModelDescription(components=("U1",), points=(PointSpec("P1", ("U1",)),), edge_moduli={"P1:U2": 2}))
        with self.assertRaises(ValueError):
            PatchGraph(("A",), ("A",), ())

    def test_summary(self):
        summary = graph_summary(build_graph(path_model()))
        self.assertEqual(summary["vertices"], 4)
        self.assertEqual(summary["edges"], ["P1:U1", "P1:U2", "P2:U2"])
        self.assertTrue(summary["is_tree"])
        self.assertEqual(summary["betti_number"], 0)
        self.assertEqual(summary["cycles"], [])

    def test_relabel(self):
        g = build_graph(path_model()).relabel({"P1": "Q", "U2": "V"})
        self.assertEqual(g.labels, ["Q:U1", "Q:V", "P2:V"])
        self.assertTrue(is_tree(g))

    def test_branch_lookup(self):
        g = build_graph(path_model())
        self.assertEqual(g.branch("P2:U2"), Branch("P2", "U2"))
        with self.assertRaises(UnknownComponent):
            g.branch("P2:U1")


class TestRandomGraphs(unittest.TestCase):
    def test_random_trees_are_trees(self):
        rng = random.Random(0)
        for _ in range(100):
            g = random_tree(rng, 20)
            self.assertTrue(is_tree(g))
            self.assertEqual(betti_number(g), 0)
            self.assertLessEqual(len(g.vertices), 20)

    def test_extra_edges_add_cycles(self):
        rng = random.Random(1)
        for _ in range(50):
            extra = rng.randint(0, 4)
            g = random_connected(rng, 10, extra_edges=extra)
            self.assertTrue(is_connected(g))
            expected = extra if g.u_vertices else 0
            self.assertEqual(betti_number(g), expected)

    def test_same_seed_same_graph(self):
        first = random_connected(random.Random(42), 12, 3)
        second = random_connected(random.Random(42), 12, 3)
        self.assertEqual(first, second)


class TestGroups(unittest.TestCase):
    def test_cyclic(self):
        G = GroupSpec.cyclic(7)
        self.assertEqual(str(G), "zmod:7")
        self.assertEqual(G.element(9), 2)
        self.assertEqual(G.multiply(3, 5), 1)
        self.assertEqual(G.inverse(3), 4)
        self.assertEqual(list(G.elements()), list(range(7)))
        with self.assertRaises(ValueError):
            G.element([1, 2])

    def test_symmetric(self):
        G = GroupSpec.symmetric(3)
        a, b = (1, 0, 2), (0, 2, 1)
        self.assertEqual(G.multiply(a, b), (1, 2, 0))
        self.assertEqual(G.multiply(G.inverse(b), b), G.identity())
        self.assertEqual(G.serialize(a), [1, 0, 2])
        self.assertEqual(len(list(G.elements())), 6)
        with self.assertRaises(ValueError):
            G.element([0, 0, 1])

    def test_invalid_size(self):
        with self.assertRaises(ValueError):
            GroupSpec.cyclic(0)


class TestTreeFactorization(unittest.TestCase):
    def test_path(self):
        g = build_graph(path_model())
        G = GroupSpec.cyclic(7)
        values = {"P1:U1": 3, "P1:U2": 5, "P2:U2": 6}
        vertex_values = tree_factorize(g, values, G)
        self.assertEqual(recompose_edges(g, vertex_values, G), values)
        self.assertEqual(set(vertex_values), set(g.vertices))

    def test_not_a_tree(self):
        g = build_graph(triangle_model())
        with self.assertRaises(NotATree):
            tree_factorize(g, {label: 0 for label in g.labels}, GroupSpec.cyclic(2))

    def test_missing_values(self):
        g = build_graph(path_model())
        with self.assertRaises(MissingEdgeValue):
            tree_factorize(g, {"P1:U1": 1}, GroupSpec.cyclic(2))

    def test_single_vertex(self):
        g = PatchGraph(("P1",), (), ())
        self.assertEqual(tree_factorize(g, {}, GroupSpec.symmetric(3)), {"P1": (0, 1, 2)})

    def test_random_trees_nonabelian(self):
        rng = random.Random(5)
        for _ in range(200):
            g = random_tree(rng, 20)
            G = GroupSpec.symmetric(3) if rng.random() < 0.5 else GroupSpec.cyclic(rng.randint(2, 9))
            if G.kind.value == "sym":
                values = {label: tuple(rng.sample(range(3), 3)) for label in g.labels}
            else:
                values = {label: rng.randrange(G.size) for label in g.labels}
            vertex_values = tree_factorize(g, values, G)
            self.assertEqual(recompose_edges(g, vertex_values, G), values)


if __name__ == "__main__":
    unittest.main()
