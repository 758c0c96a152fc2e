"""Cokernel of the patching product map on rho-power classes.

Every vertex group and edge group is cyclic, generated by the class of rho.
A vertex value is an exponent x_v; on the branch (P, U) the product map sends
(x_P, x_U) to (n/o_P) x_P + (n/o_U) x_U modulo the edge modulus d_e. Sha is
the cokernel, computed with an integer Smith form whose transforms also give
witnesses and annihilating characters.
"""

import logging
import random
from dataclasses import dataclass, field as dataclass_field
from itertools import product
from math import gcd, lcm
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import sympy

from .. import settings
from ..utils.errors import (
    DimensionMismatch,
    MissingEdgeValue,
    EvidenceFailed,
    NotATree,
    TowerMismatch,
    UnknownComponent,
    UnsupportedShape,
    VerificationMismatch,
    WildCharacteristic,
)
from ..utils.smith import invariant_factors, solve_congruences
from .finite_field import PrimeField, nth_power_test
from .patch_graph import (
    ModelDescription,
    PatchGraph,
    betti_number,
    build_graph,
    cycle_basis,
    is_tree,
    random_tree,
    triangle_model,
)
from .reports import ShaReport
from .series_local import BaseKind, LaurentSeries, TowerDescriptor, torus_quotient_order
from .two_local import (
    TRIANGLE_POINTS,
    MonomialClass,
    X,
    Y,
    rational_function,
    rational_point_residue,
    restricts_to_one,
    rho_membership,
    rho_order_in_branch,
    span_order,
    triangle_branch_shapes,
)

logger = logging.getLogger(__name__)

ENUMERATION_LIMIT = 1_000_000


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObstructionProblem:
    graph: PatchGraph
    n: int
    edge_moduli: Dict[str, int] = dataclass_field(default_factory=dict)
    vertex_orders: Dict[str, int] = dataclass_field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}.")
        labels = set(self.graph.labels)
        for label, d in self.edge_moduli.items():
            if label not in labels:
                raise UnknownComponent(f"Edge modulus given for unknown branch {label!r}.", branch=label)
            if d < 1 or self.n % d:
                raise ValueError(f"Edge modulus {d} on {label} does not divide n = {self.n}.")
        vertices = set(self.graph.vertices)
        for vertex, o in self.vertex_orders.items():
            if vertex not in vertices:
                raise UnknownComponent(f"Vertex order given for unknown vertex {vertex!r}.", vertex=vertex)
            if o < 1 or self.n % o:
                raise ValueError(f"Vertex order {o} at {vertex} does not divide n = {self.n}.")
        if self.extrapolated:
            if not settings.SHA_ALLOW_EXTRAPOLATION:
                raise UnsupportedShape(
                    "Heterogeneous edge moduli or vertex orders are disabled (SHA_ALLOW_EXTRAPOLATION).", n=self.n
                )
            logger.warning("Problem uses heterogeneous moduli; results are an extrapolation")

    def modulus(self, label: str) -> int:
        return self.edge_moduli.get(label, self.n)

    def order(self, vertex: str) -> int:
        return self.vertex_orders.get(vertex, self.n)

    @property
    def extrapolated(self) -> bool:
        return any(d != self.n for d in self.edge_moduli.values()) or any(
            o != self.n for o in self.vertex_orders.values()
        )

    @property
    def moduli(self) -> List[int]:
        return [self.modulus(label) for label in self.graph.labels]


def phi_matrix(p: ObstructionProblem) -> List[List[int]]:
    """Row per branch, column per vertex (points, then components)."""
    columns = {vertex: i for i, vertex in enumerate(p.graph.vertices)}
    matrix = []
    for branch in p.graph.branches:
        row = [0] * len(columns)
        row[columns[branch.point]] += p.n // p.order(branch.point)
        row[columns[branch.component]] += p.n // p.order(branch.component)
        matrix.append(row)
    return matrix


def _stacked(p: ObstructionProblem) -> List[List[int]]:
    moduli = p.moduli
    return [
        row + [moduli[i] if j == i else 0 for j in range(len(moduli))] for i, row in enumerate(phi_matrix(p))
    ]


def cokernel_invariants(p: ObstructionProblem) -> List[int]:
    if not p.graph.branches:
        return []
    factors = [d for d in invariant_factors(_stacked(p)) if d > 1]
    logger.debug("Cokernel of %sx%s product map: %s", len(p.graph.branches), len(p.graph.vertices), factors)
    return factors


def _target_vector(p: ObstructionProblem, target: Union[Sequence[int], Dict[str, int]]) -> List[int]:
    labels = p.graph.labels
    if isinstance(target, dict):
        unknown = sorted(set(target) - set(labels))
        if unknown:
            raise DimensionMismatch(f"Target names unknown branches {unknown}.", branches=unknown)
        values = [int(target.get(label, 0)) for label in labels]
    else:
        values = [int(v) for v in target]
        if len(values) != len(labels):
            raise DimensionMismatch(
                f"Target has {len(values)} entries for {len(labels)} branches.",
                expected=len(labels),
                got=len(values),
            )
    return [v % d for v, d in zip(values, p.moduli)]


def _obstructing_cycle(p: ObstructionProblem, certificate: Sequence[int]) -> Optional[List[str]]:
    support = {
        frozenset((b.point, b.component)) for b, c in zip(p.graph.branches, certificate) if c % p.n
    }
    for cycle in cycle_basis(p.graph):
        if any(frozenset(pair) in support for pair in zip(cycle, cycle[1:] + cycle[:1])):
            return cycle
    return None


def in_image(p: ObstructionProblem, target: Union[Sequence[int], Dict[str, int]]) -> ShaReport:
    """Solve (n/o_P) x_P + (n/o_U) x_U = target_e (mod d_e) on every branch."""
    vector = _target_vector(p, target)
    base = dict(
        n=p.n,
        edges=p.graph.labels,
        vertices=p.graph.vertices,
        invariant_factors=cokernel_invariants(p),
        target=vector,
        extrapolated=p.extrapolated,
        betti_number=betti_number(p.graph),
    )
    if not p.graph.branches:
        return ShaReport(feasible=True, witness=[0] * len(p.graph.vertices), **base)

    phi = phi_matrix(p)
    moduli = p.moduli
    solved = solve_congruences(phi, vector, moduli, character_modulus=p.n)
    if solved.feasible:
        witness = [x % p.order(v) for x, v in zip(solved.solution, p.graph.vertices)]
        for row, t, d in zip(phi, vector, moduli):
            if (sum(a * x for a, x in zip(row, witness)) - t) % d:
                raise ArithmeticError("Witness does not recompose to the target.")
        return ShaReport(feasible=True, witness=witness, **base)

    certificate = [c % p.n for c in solved.certificate]
    for j in range(len(p.graph.vertices)):
        if sum(certificate[i] * phi[i][j] for i in range(len(phi))) % p.n:
            raise ArithmeticError("Certificate does not annihilate the image.")
    if any(c * d % p.n for c, d in zip(certificate, moduli)):
        raise ArithmeticError("Certificate is not a character of the edge group.")
    if sum(c * t for c, t in zip(certificate, vector)) % p.n == 0:
        raise ArithmeticError("Certificate does not detect the target.")
    return ShaReport(
        feasible=False, certificate=certificate, cycle=_obstructing_cycle(p, certificate), **base
    )


def enumerate_image(p: ObstructionProblem) -> Set[Tuple[int, ...]]:
    """Brute-force image of the product map."""
    orders = [p.order(v) for v in p.graph.vertices]
    total = 1
    for o in orders:
        total *= o
    if total > ENUMERATION_LIMIT:
        raise ValueError(f"{total} vertex assignments exceed the enumeration limit.")
    phi, moduli = phi_matrix(p), p.moduli
    image = set()
    for assignment in product(*(range(o) for o in orders)):
        image.add(tuple(sum(a * x for a, x in zip(row, assignment)) % d for row, d in zip(phi, moduli)))
    return image


def edge_group_order(p: ObstructionProblem) -> int:
    total = 1
    for d in p.moduli:
        total *= d
    return total


def relabel(p: ObstructionProblem, mapping: Dict[str, str]) -> ObstructionProblem:
    graph = p.graph.relabel(mapping)
    labels = dict(zip(p.graph.labels, graph.labels))
    return ObstructionProblem(
        graph,
        p.n,
        {labels[label]: d for label, d in p.edge_moduli.items()},
        {mapping.get(vertex, vertex): o for vertex, o in p.vertex_orders.items()},
    )


def problem_from_model(model: ModelDescription, n: int) -> ObstructionProblem:
    return ObstructionProblem(build_graph(model), n, dict(model.edge_moduli))


# ---------------------------------------------------------------------------
# Multi-norm reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtensionDescriptor:
    """F(n-th roots of the radicands), radicands as rational functions in x, y."""

    name: str
    radicands: Tuple[str, ...]
    n: int


@dataclass(frozen=True)
class LocalEvidence:
    """A place where the two extensions must agree: a point (a, b) or a component equation."""

    place: str
    point: Optional[Tuple[int, int]] = None
    component: Optional[str] = None


@dataclass
class ReducedExtension:
    descriptor: ExtensionDescriptor
    places: List[str]
    factors: int
    values: Dict[str, List[int]] = dataclass_field(default_factory=dict)

    def rho_image(self, j: int) -> int:
        """Exponent of the image of the diagonal rho^j under the product isomorphism."""
        return self.factors * j


def multinorm_reduce(
    first: ExtensionDescriptor,
    second: ExtensionDescriptor,
    evidence: Sequence[LocalEvidence],
    field: PrimeField,
) -> ReducedExtension:
    """Check that the two extensions coincide at every listed place; return the first.

    At a point the radicand ratio must be a nonzero n-th power (Hensel lifts it
    to the completion); along a component it must be identically 1.
    """
    descriptors = (first, second)
    if len({d.n for d in descriptors}) > 1 or len({len(d.radicands) for d in descriptors}) > 1:
        raise ValueError("Descriptors must have the same degree and number of radicands.")
    ratios = [
        sympy.cancel(rational_function(b) / rational_function(a)) for a, b in zip(first.radicands, second.radicands)
    ]
    values: Dict[str, List[int]] = {}
    for item in evidence:
        if item.point is not None:
            residues = [rational_point_residue(ratio, item.point, field) for ratio in ratios]
            values[item.place] = [r.value for r in residues]
            for ratio, residue in zip(ratios, residues):
                if not residue or not nth_power_test(residue, first.n):
                    raise EvidenceFailed(
                        f"Ratio {ratio} is {residue.value} at {item.place}, not a nonzero {first.n}-th power.",
                        place=item.place,
                        value=residue.value,
                    )
        elif item.component is not None:
            for ratio in ratios:
                if not restricts_to_one(ratio, item.component, field):
                    raise EvidenceFailed(
                        f"Ratio {ratio} is not 1 along {item.component}.", place=item.place, component=item.component
                    )
            values[item.place] = [1] * len(ratios)
        else:
            raise ValueError(f"Evidence at {item.place} names neither a point nor a component.")
    logger.debug("Multi-norm evidence verified at %s", [item.place for item in evidence])
    return ReducedExtension(first, [item.place for item in evidence], len(descriptors), values)


# ---------------------------------------------------------------------------
# Scripted scenarios
# ---------------------------------------------------------------------------

TRIANGLE_COMPONENTS = {1: "x", 2: "y", 3: "x + y - 1"}
THETA_1 = "(x - 2)/(x - 2 + x*y*(x + y - 1))"
THETA_2 = "(y - 2)/(y - 2 + x*y*(x + y - 1))"
DISJOINTNESS_POINT = (2, 2)


def _triangle_problem(
    n: int, field: PrimeField, precision: Optional[int] = None
) -> Tuple[ObstructionProblem, Dict[str, int]]:
    graph = build_graph(triangle_model())
    shapes = triangle_branch_shapes(n, field)
    radicand = LaurentSeries.monomial(field, 1, 1, precision)
    edge_moduli = {}
    for (i, j), shape in sorted(shapes.items()):
        label = f"P{i}:X{j}"
        order = rho_order_in_branch(shape, n)
        if order != n:
            raise VerificationMismatch(f"rho has order {order} at branch {label}, expected {n}.", branch=label)
        if n > 1:
            if rho_membership(shape, 1, field, n, radicand).member:
                raise VerificationMismatch(f"rho is R-trivial at branch {label}.", branch=label)
            witness = rho_membership(shape, n, field, n, radicand)
            if not witness.member or witness.zeta is None:
                raise VerificationMismatch(f"No witness for rho^{n} at branch {label}.", branch=label)
        edge_moduli[label] = order
    # rho^t trivial at a vertex field stays trivial at every branch through it.
    vertex_orders: Dict[str, int] = {}
    for label, order in edge_moduli.items():
        branch = graph.branch(label)
        for vertex in (branch.point, branch.component):
            vertex_orders[vertex] = lcm(vertex_orders.get(vertex, 1), order)
    return ObstructionProblem(graph, n, edge_moduli, vertex_orders), edge_moduli


def verify_triangle(n: int, q: int, precision: Optional[int] = None) -> ShaReport:
    """Reproduce the failure of the local-global principle on the triangle model.

    ``precision`` is the series precision of the residue Kummer extensions
    that carry the rho^n witnesses; it defaults to SHA_PRECISION.
    """
    field = PrimeField(q)
    field.require_tame(n)
    field.require_roots_of_unity(n * n)
    problem, edge_moduli = _triangle_problem(n, field, precision)

    target = {label: 0 for label in problem.graph.labels}
    target["P1:X2"] = 1
    report = in_image(problem, target)
    report.details["branch_orders"] = edge_moduli
    if n == 1:
        return report

    if report.feasible or report.invariant_factors != [n]:
        raise VerificationMismatch(
            f"Expected an infeasible target with cokernel [{n}], got {report.invariant_factors}.",
            feasible=report.feasible,
            invariant_factors=report.invariant_factors,
        )
    if gcd(report.pairing(), n) != 1:
        raise VerificationMismatch("Certificate does not pair to a unit with the target.", pairing=report.pairing())
    return report


def _local_monomial(expr: sympy.Expr, point: Tuple[int, int], field: PrimeField) -> MonomialClass:
    """expr = unit * (x - a)^e1 * (y - b)^e2 near the point (a, b)."""
    a, b = point
    parameters = (X - a, Y - b)
    exponents = [0, 0]
    unit = sympy.Integer(1)
    numerator, denominator = sympy.fraction(sympy.cancel(sympy.together(expr)))
    for part, sign in ((numerator, 1), (denominator, -1)):
        constant, factors = sympy.factor_list(part)
        unit = unit * constant ** sign
        for factor, multiplicity in factors:
            if factor.subs({X: a, Y: b}) != 0:
                unit = unit * factor ** (sign * multiplicity)
                continue
            for index, parameter in enumerate(parameters):
                scale = sympy.cancel(factor / parameter)
                if not scale.free_symbols:
                    exponents[index] += sign * multiplicity
                    unit = unit * scale ** (sign * multiplicity)
                    break
            else:
                raise EvidenceFailed(f"{expr} is not monomial in the parameters at {point}.", point=list(point))
    return MonomialClass(rational_point_residue(unit, point, field), exponents[0], exponents[1])


def _disjointness(first: ExtensionDescriptor, second: ExtensionDescriptor, field: PrimeField) -> Dict[str, object]:
    n = first.n
    local_first = [_local_monomial(rational_function(r), DISJOINTNESS_POINT, field) for r in first.radicands]
    local_second = [_local_monomial(rational_function(r), DISJOINTNESS_POINT, field) for r in second.radicands]
    first_order, second_order = span_order(local_first, n), span_order(local_second, n)
    joint = span_order(local_first + local_second, n)
    if second_order != n ** len(second.radicands) or joint != first_order * second_order:
        raise EvidenceFailed(
            f"Extensions are not linearly disjoint at {DISJOINTNESS_POINT}.",
            first_order=first_order,
            second_order=second_order,
            joint_order=joint,
        )
    return {
        "point": list(DISJOINTNESS_POINT),
        "first": [list(x.vector(n)) for x in local_first],
        "second": [list(x.vector(n)) for x in local_second],
        "joint_order": joint,
    }


def multinorm_descriptors(n: int) -> Tuple[ExtensionDescriptor, ExtensionDescriptor]:
    first = ExtensionDescriptor("L1", ("x*y", "y*(x + y - 1)"), n)
    second = ExtensionDescriptor("L2", (f"x*y*{THETA_1}", f"y*(x + y - 1)*{THETA_2}"), n)
    return first, second


def multinorm_evidence() -> List[LocalEvidence]:
    evidence = [LocalEvidence(f"P{i}", point=point) for i, point in sorted(TRIANGLE_POINTS.items())]
    evidence.extend(LocalEvidence(f"X{i}", component=equation) for i, equation in sorted(TRIANGLE_COMPONENTS.items()))
    return evidence


def verify_multinorm(n: int, q: int, precision: Optional[int] = None) -> ShaReport:
    """Failure of the local-global principle for the multinorm torus of L1 x L2."""
    if (6 * n) % q == 0:
        raise WildCharacteristic(f"6n = {6 * n} must be coprime to the characteristic {q}.", n=n, q=q)
    field = PrimeField(q)
    field.require_roots_of_unity(n * n)
    first, second = multinorm_descriptors(n)
    reduced = multinorm_reduce(first, second, multinorm_evidence(), field)
    disjointness = _disjointness(first, second, field)
    report = verify_triangle(n, q, precision)
    report.details.update(
        {
            "theta_values": reduced.values,
            "reduced_to": reduced.descriptor.name,
            "diagonal_rho_exponent": reduced.rho_image(1),
            "disjointness": disjointness,
        }
    )
    return report


# ---------------------------------------------------------------------------
# Trees of residue towers
# ---------------------------------------------------------------------------


def random_tower(rng: random.Random, base_kind: BaseKind, n: int, q: Optional[int] = None) -> TowerDescriptor:
    """Up to two random Kummer levels whose degrees multiply to a divisor of n."""
    levels = []
    remaining = n
    for _ in range(rng.randint(0, 2)):
        e = rng.choice(sympy.divisors(remaining))
        f = 1 if base_kind == BaseKind.ALGEBRAICALLY_CLOSED else rng.choice(sympy.divisors(remaining // e))
        if e * f > 1:
            levels.append((e, f))
            remaining //= e * f
    return TowerDescriptor(base_kind, tuple(levels), n, q if base_kind == BaseKind.FINITE else None)


def tower_problem(graph: PatchGraph, towers: Dict[str, TowerDescriptor], n: int) -> ObstructionProblem:
    """Problem whose edge moduli are the orders of rho in T/RT along each branch's residue tower."""
    missing = [label for label in graph.labels if label not in towers]
    if missing:
        raise MissingEdgeValue(f"No residue tower for branches {missing}.", branches=missing)
    moduli = {}
    for label in graph.labels:
        tower = towers[label]
        if tower.n != n:
            raise TowerMismatch(f"Tower at {label} has degree {tower.n}, expected {n}.", branch=label)
        moduli[label] = torus_quotient_order(tower)
    orders = set(moduli.values())
    if len(orders) <= 1:
        return ObstructionProblem(graph, orders.pop() if orders else 1)
    return ObstructionProblem(graph, n, moduli)


def verify_local_trees(
    base_kind: BaseKind, n: int, q: Optional[int], count: int, max_vertices: int, rng: random.Random
) -> Dict[str, object]:
    """Sha vanishes on trees of patches whose branch quotients come from residue towers.

    With an algebraically closed residue field every branch order must be 1;
    over a finite field containing rho_n the orders vary but every tree is
    still surjective.
    """
    seen: Set[int] = set()
    for index in range(count):
        graph = random_tree(rng, max_vertices)
        if not is_tree(graph):
            raise NotATree(f"Random graph {index} is not a tree.", index=index)
        towers = {label: random_tower(rng, base_kind, n, q) for label in graph.labels}
        problem = tower_problem(graph, towers, n)
        orders = set(problem.moduli)
        if base_kind == BaseKind.ALGEBRAICALLY_CLOSED and orders - {1}:
            raise VerificationMismatch(
                f"Tree {index} has rho of order {sorted(orders)} over an algebraically closed residue field.",
                index=index,
            )
        for position in range(len(graph.labels)):
            target = [0] * len(graph.labels)
            target[position] = 1
            report = in_image(problem, target)
            if not report.feasible or report.invariant_factors:
                raise VerificationMismatch(
                    f"Tree {index} misses branch {graph.labels[position]}.", index=index, branch=graph.labels[position]
                )
        seen.update(orders)
    logger.debug("Tower trees checked: %s, branch orders %s", count, sorted(seen))
    return {"base": base_kind.value, "n": n, "q": q, "count": count, "branch_orders": sorted(seen)}
