"""Patching graphs of a model's special fibre and factorization along trees.

Vertices are the marked closed points ``P`` and the components ``U`` (one
piece per component); every (point, incident component) incidence is a
branch. Connectivity and cycles come from networkx.
"""

import logging
import random
from dataclasses import dataclass, field as dataclass_field
from enum import Enum
from functools import cached_property
from itertools import combinations, permutations
from typing import Dict, Iterator, List, Tuple, Union

import networkx as nx

from ..utils.errors import EmptyModel, MissingEdgeValue, NotATree, UnknownComponent

logger = logging.getLogger(__name__)

GroupElement = Union[int, Tuple[int, ...]]


# ---------------------------------------------------------------------------
# Models and graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointSpec:
    name: str
    on: Tuple[str, ...]


@dataclass(frozen=True)
class ModelDescription:
    components: Tuple[str, ...]
    points: Tuple[PointSpec, ...]
    edge_moduli: Dict[str, int] = dataclass_field(default_factory=dict)


@dataclass(frozen=True)
class Branch:
    point: str
    component: str
    occurrence: int = 1

    @property
    def label(self) -> str:
        base = f"{self.point}:{self.component}"
        return base if self.occurrence == 1 else f"{base}#{self.occurrence}"


class VertexKind(str, Enum):
    POINT = "P"
    COMPONENT = "U"


@dataclass(frozen=True)
class PatchGraph:
    p_vertices: Tuple[str, ...]
    u_vertices: Tuple[str, ...]
    branches: Tuple[Branch, ...]

    def __post_init__(self):
        names = list(self.p_vertices) + list(self.u_vertices)
        if len(set(names)) != len(names):
            raise ValueError("Point and component names must be distinct.")
        points, components = set(self.p_vertices), set(self.u_vertices)
        for branch in self.branches:
            if branch.point not in points:
                raise UnknownComponent(f"Branch {branch.label} starts at an unknown point.", branch=branch.label)
            if branch.component not in components:
                raise UnknownComponent(
                    f"Branch {branch.label} references unknown component {branch.component!r}.",
                    branch=branch.label,
                )

    @property
    def vertices(self) -> List[str]:
        """Matrix column order: points first, then components."""
        return list(self.p_vertices) + list(self.u_vertices)

    @property
    def labels(self) -> List[str]:
        return [branch.label for branch in self.branches]

    def kind(self, vertex: str) -> VertexKind:
        if vertex in self.p_vertices:
            return VertexKind.POINT
        if vertex in self.u_vertices:
            return VertexKind.COMPONENT
        raise UnknownComponent(f"Unknown vertex {vertex!r}.", vertex=vertex)

    def branch(self, label: str) -> Branch:
        for branch in self.branches:
            if branch.label == label:
                return branch
        raise UnknownComponent(f"Unknown branch {label!r}.", branch=label)

    @cached_property
    def nx_graph(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        graph.add_nodes_from(self.p_vertices, kind=VertexKind.POINT.value)
        graph.add_nodes_from(self.u_vertices, kind=VertexKind.COMPONENT.value)
        for branch in self.branches:
            graph.add_edge(branch.point, branch.component, key=branch.label)
        return graph

    def relabel(self, mapping: Dict[str, str]) -> "PatchGraph":
        return PatchGraph(
            tuple(mapping.get(p, p) for p in self.p_vertices),
            tuple(mapping.get(u, u) for u in self.u_vertices),
            tuple(
                Branch(mapping.get(b.point, b.point), mapping.get(b.component, b.component), b.occurrence)
                for b in self.branches
            ),
        )


def build_graph(model: ModelDescription) -> PatchGraph:
    if not model.components or not model.points:
        raise EmptyModel("A model needs at least one component and one marked point.")
    known = set(model.components)
    branches = []
    for point in model.points:
        if not point.on:
            raise EmptyModel(f"Point {point.name} lies on no component.", point=point.name)
        seen: Dict[str, int] = {}
        for component in point.on:
            if component not in known:
                raise UnknownComponent(
                    f"Point {point.name} lies on unknown component {component!r}.",
                    point=point.name,
                    component=component,
                )
            seen[component] = seen.get(component, 0) + 1
            branches.append(Branch(point.name, component, seen[component]))
    graph = PatchGraph(tuple(p.name for p in model.points), tuple(model.components), tuple(branches))
    for label in model.edge_moduli:
        graph.branch(label)
    logger.debug(
        "Built patch graph: %s points, %s components, %s branches",
        len(graph.p_vertices),
        len(graph.u_vertices),
        len(graph.branches),
    )
    return graph


def connected_components(g: PatchGraph) -> List[List[str]]:
    return sorted(sorted(component) for component in nx.connected_components(g.nx_graph))


def is_connected(g: PatchGraph) -> bool:
    return nx.number_connected_components(g.nx_graph) <= 1


def is_tree(g: PatchGraph) -> bool:
    return is_connected(g) and len(g.branches) == len(g.vertices) - 1


def betti_number(g: PatchGraph) -> int:
    return len(g.branches) - len(g.vertices) + nx.number_connected_components(g.nx_graph)


def cycle_basis(g: PatchGraph) -> List[List[str]]:
    """Vertex cycles; a repeated incidence contributes the 2-cycle [P, U]."""
    cycles = [list(cycle) for cycle in nx.cycle_basis(nx.Graph(g.nx_graph))]
    for branch in g.branches:
        if branch.occurrence > 1:
            cycles.append([branch.point, branch.component])
    return cycles


def triangle_model() -> ModelDescription:
    """Special fibre of xy(x+y-z) - tz^3: three lines meeting pairwise once."""
    return ModelDescription(
        components=("X1", "X2", "X3"),
        points=(
            PointSpec("P1", ("X2", "X3")),
            PointSpec("P2", ("X1", "X3")),
            PointSpec("P3", ("X1", "X2")),
        ),
    )


def random_connected(rng: random.Random, max_vertices: int, extra_edges: int = 0) -> PatchGraph:
    """Seeded random connected bipartite graph: a random tree plus extra branches."""
    size = rng.randint(1, max(1, max_vertices))
    points, components = ["P1"], []
    branches: List[Branch] = []
    for _ in range(size - 1):
        anchor = rng.choice(points + components)
        if anchor in points:
            components.append(f"U{len(components) + 1}")
            branches.append(Branch(anchor, components[-1]))
        else:
            points.append(f"P{len(points) + 1}")
            branches.append(Branch(points[-1], anchor))
    for _ in range(extra_edges if components else 0):
        point, component = rng.choice(points), rng.choice(components)
        occurrence = 1 + sum(1 for b in branches if b.point == point and b.component == component)
        branches.append(Branch(point, component, occurrence))
    return PatchGraph(tuple(points), tuple(components), tuple(branches))


def random_tree(rng: random.Random, max_vertices: int) -> PatchGraph:
    return random_connected(rng, max_vertices)


def _multiplicities(count: int, spare: int) -> Iterator[Tuple[int, ...]]:
    if count == 0:
        yield ()
        return
    for first in range(spare + 1):
        for rest in _multiplicities(count - 1, spare - first):
            yield (1 + first,) + rest


def _same_multiplicity(a: dict, b: dict) -> bool:
    return a["mult"] == b["mult"]


def connected_patch_graphs(max_branches: int) -> Iterator[PatchGraph]:
    """Every connected patch graph with 1..max_branches branches, once per isomorphism class.

    Each class has a spanning tree, so the search runs over nonisomorphic
    trees, adds branches across the bipartition and then spreads repeated
    incidences over the simple edges. Classes are those of the underlying
    multigraph; swapping the point and component sides gives the same class.
    """
    seen: Dict[str, List[nx.Graph]] = {}
    for order in range(2, max_branches + 2):
        for tree in nx.nonisomorphic_trees(order):
            left, right = nx.bipartite.sets(tree)
            points, components = sorted(left), sorted(right)
            skeleton = [(a, b) if a in left else (b, a) for a, b in tree.edges()]
            missing = [(p, u) for p in points for u in components if not tree.has_edge(p, u)]
            budget = max_branches - len(skeleton)
            for extra in range(min(budget, len(missing)) + 1):
                for added in combinations(missing, extra):
                    edges = skeleton + list(added)
                    for mults in _multiplicities(len(edges), max_branches - len(edges)):
                        simple = nx.Graph()
                        simple.add_nodes_from(tree.nodes)
                        simple.add_edges_from((p, u, {"mult": m}) for (p, u), m in zip(edges, mults))
                        bucket = seen.setdefault(nx.weisfeiler_lehman_graph_hash(simple, edge_attr="mult"), [])
                        if any(nx.is_isomorphic(simple, other, edge_match=_same_multiplicity) for other in bucket):
                            continue
                        bucket.append(simple)
                        yield _graph_from_edges(points, components, edges, mults)


def _graph_from_edges(
    points: List[int], components: List[int], edges: List[Tuple[int, int]], mults: Tuple[int, ...]
) -> PatchGraph:
    point_names = {p: f"P{i + 1}" for i, p in enumerate(points)}
    component_names = {u: f"U{i + 1}" for i, u in enumerate(components)}
    branches = [
        Branch(point_names[p], component_names[u], occurrence)
        for (p, u), m in zip(edges, mults)
        for occurrence in range(1, m + 1)
    ]
    return PatchGraph(tuple(point_names.values()), tuple(component_names.values()), tuple(branches))


# ---------------------------------------------------------------------------
# Abstract groups
# ---------------------------------------------------------------------------


class GroupKind(str, Enum):
    CYCLIC = "zmod"
    SYMMETRIC = "sym"


@dataclass(frozen=True)
class GroupSpec:
    """Z/m (ints) or S_k (permutation tuples; (a*b)(i) = a[b[i]])."""

    kind: GroupKind
    size: int

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise ValueError(f"Group size must be a positive integer, got {self.size!r}.")

    @classmethod
    def cyclic(cls, m: int) -> "GroupSpec":
        return cls(GroupKind.CYCLIC, m)

    @classmethod
    def symmetric(cls, k: int) -> "GroupSpec":
        return cls(GroupKind.SYMMETRIC, k)

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.size}"

    def identity(self) -> GroupElement:
        if self.kind == GroupKind.CYCLIC:
            return 0
        return tuple(range(self.size))

    def element(self, raw) -> GroupElement:
        if self.kind == GroupKind.CYCLIC:
            if isinstance(raw, bool) or not isinstance(raw, int):
                raise ValueError(f"Elements of {self} are integers, got {raw!r}.")
            return raw % self.size
        perm = tuple(raw) if isinstance(raw, (list, tuple)) else None
        if perm is None or sorted(perm) != list(range(self.size)):
            raise ValueError(f"{raw!r} is not a permutation of 0..{self.size - 1}.")
        return perm

    def serialize(self, element: GroupElement) -> Union[int, List[int]]:
        return element if self.kind == GroupKind.CYCLIC else list(element)

    def multiply(self, a: GroupElement, b: GroupElement) -> GroupElement:
        if self.kind == GroupKind.CYCLIC:
            return (a + b) % self.size
        return tuple(a[b[i]] for i in range(self.size))

    def inverse(self, a: GroupElement) -> GroupElement:
        if self.kind == GroupKind.CYCLIC:
            return -a % self.size
        inv = [0] * self.size
        for i, image in enumerate(a):
            inv[image] = i
        return tuple(inv)

    def elements(self) -> Iterator[GroupElement]:
        if self.kind == GroupKind.CYCLIC:
            yield from range(self.size)
        else:
            yield from permutations(range(self.size))


# ---------------------------------------------------------------------------
# Factorization along a tree
# ---------------------------------------------------------------------------


def tree_factorize(
    g: PatchGraph, edge_values: Dict[str, GroupElement], group: GroupSpec
) -> Dict[str, GroupElement]:
    """Vertex values with edge_values[(P, U)] = g_P * g_U on every branch.

    Peels the lexicographically smallest leaf until one vertex is left, gives
    that vertex the identity, then assigns the peeled leaves in reverse.
    """
    if not is_tree(g):
        raise NotATree("Patch graph is not a tree.", betti_number=betti_number(g))
    missing = [label for label in g.labels if label not in edge_values]
    if missing:
        raise MissingEdgeValue(f"No value for branches {missing}.", branches=missing)

    remaining = nx.MultiGraph(g.nx_graph)
    peeled: List[Tuple[str, str, str]] = []
    while remaining.number_of_nodes() > 1:
        leaf = min(node for node in remaining.nodes if remaining.degree(node) == 1)
        (_, neighbour, label), = remaining.edges(leaf, keys=True)
        peeled.append((leaf, neighbour, label))
        remaining.remove_node(leaf)
    logger.debug("Leaf peeling order: %s", [leaf for leaf, _, _ in peeled])

    values: Dict[str, GroupElement] = {vertex: group.identity() for vertex in remaining.nodes}
    for leaf, neighbour, label in reversed(peeled):
        edge = group.element(edge_values[label])
        if g.kind(leaf) == VertexKind.POINT:
            values[leaf] = group.multiply(edge, group.inverse(values[neighbour]))
        else:
            values[leaf] = group.multiply(group.inverse(values[neighbour]), edge)
    return {vertex: values[vertex] for vertex in g.vertices}


def recompose_edges(g: PatchGraph, values: Dict[str, GroupElement], group: GroupSpec) -> Dict[str, GroupElement]:
    return {b.label: group.multiply(values[b.point], values[b.component]) for b in g.branches}


def graph_summary(g: PatchGraph) -> Dict[str, object]:
    return {
        "vertices": len(g.vertices),
        "points": list(g.p_vertices),
        "components": list(g.u_vertices),
        "edges": g.labels,
        "is_tree": is_tree(g),
        "betti_number": betti_number(g),
        "connected_components": connected_components(g),
        "cycles": cycle_basis(g),
    }
