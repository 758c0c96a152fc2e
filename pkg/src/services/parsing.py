"""Input parsing for the CLI: model/target JSON, series and monomial literals."""

import json
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Union

import sympy
from pydantic import BaseModel, Field, ValidationError, field_validator

from .. import settings
from ..utils.errors import ParseError
from .finite_field import PrimeField
from .patch_graph import GroupElement, GroupKind, GroupSpec, ModelDescription, PatchGraph, PointSpec
from .series_local import LaurentSeries
from .two_local import MonomialClass, rational_function

logger = logging.getLogger(__name__)

_TERM = re.compile(r"^(?:(?P<coeff>[+-]?\d+)\s*\*\s*)?t(?:\s*\^\s*(?P<exp>[+-]?\d+))?$|^(?P<const>[+-]?\d+)$")
_MONOMIAL_KEYS = ("u", "e1", "e2")


# ---------------------------------------------------------------------------
# JSON payloads
# ---------------------------------------------------------------------------


class PointPayload(BaseModel):
    name: str
    on: List[str]


class ModelPayload(BaseModel):
    components: List[str]
    points: List[PointPayload]
    edge_moduli: Dict[str, int] = Field(default_factory=dict)

    @field_validator("edge_moduli")
    @classmethod
    def _positive_moduli(cls, v: Dict[str, int]) -> Dict[str, int]:
        for label, d in v.items():
            if d < 1:
                raise ValueError(f"Edge modulus for {label} must be positive.")
        return v


class EdgesPayload(BaseModel):
    edges: Dict[str, Union[int, List[int]]] = Field(default_factory=dict)


def _read(source: Union[str, Path]) -> str:
    path = Path(source)
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"Cannot read {path}: {exc.strerror}", path=str(path)) from exc


def _load_json(text: str, what: str) -> object:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"Malformed {what} JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc


def _validate(model_cls, data: object, what: str):
    try:
        return model_cls.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or what
        raise ParseError(f"Invalid {what}: {location}: {first['msg']}", field=location) from exc


def parse_model_text(text: str) -> ModelDescription:
    payload = _validate(ModelPayload, _load_json(text, "model"), "model")
    return ModelDescription(
        components=tuple(payload.components),
        points=tuple(PointSpec(p.name, tuple(p.on)) for p in payload.points),
        edge_moduli=dict(payload.edge_moduli),
    )


def parse_model(path: Union[str, Path]) -> ModelDescription:
    return parse_model_text(_read(path))


def _edges(text: str, graph: PatchGraph, what: str) -> Dict[str, Union[int, List[int]]]:
    payload = _validate(EdgesPayload, _load_json(text, what), what)
    unknown = sorted(set(payload.edges) - set(graph.labels))
    if unknown:
        raise ParseError(f"{what.capitalize()} names unknown branches {unknown}.", branches=unknown)
    return payload.edges


def parse_target_text(text: str, graph: PatchGraph) -> List[int]:
    """Edge vector in branch order; branches left out are 0."""
    edges = _edges(text, graph, "target")
    vector = []
    for label in graph.labels:
        value = edges.get(label, 0)
        if not isinstance(value, int):
            raise ParseError(f"Target value for {label} must be an integer.", branch=label)
        vector.append(value)
    return vector


def parse_target(path: Union[str, Path], graph: PatchGraph) -> List[int]:
    return parse_target_text(_read(path), graph)


def parse_values(path: Union[str, Path], graph: PatchGraph, group: GroupSpec) -> Dict[str, GroupElement]:
    edges = _edges(_read(path), graph, "values")
    values = {}
    for label, raw in edges.items():
        try:
            values[label] = group.element(raw)
        except ValueError as exc:
            raise ParseError(f"Bad value for {label}: {exc}", branch=label) from exc
    return values


def parse_group(text: Optional[str], default_size: int) -> GroupSpec:
    """'zmod:M', 'sym:K' or a bare size (family from SHA_DEFAULT_GROUP)."""
    raw = (text or "").strip().lower()
    if not raw:
        return GroupSpec(GroupKind(settings.SHA_DEFAULT_GROUP), default_size)
    kind_text, _, size_text = raw.rpartition(":")
    kind_text = kind_text or settings.SHA_DEFAULT_GROUP
    try:
        kind = GroupKind(kind_text)
    except ValueError as exc:
        raise ParseError(f"Unknown group family {kind_text!r}; use zmod or sym.", line=1, column=1) from exc
    if not size_text.isdigit() or int(size_text) < 1:
        raise ParseError(f"Group size must be a positive integer, got {size_text!r}.", line=1, column=len(kind_text) + 2)
    return GroupSpec(kind, int(size_text))


# ---------------------------------------------------------------------------
# Literals
# ---------------------------------------------------------------------------


def parse_series(literal: str, field: PrimeField, precision: Optional[int] = None) -> LaurentSeries:
    """'t^-1 + 2 + 3*t^2' -> LaurentSeries over the field."""
    terms: Dict[int, int] = {}
    offset = 0
    for chunk in literal.split("+"):
        column = offset + len(chunk) - len(chunk.lstrip()) + 1
        offset += len(chunk) + 1
        text = chunk.strip()
        match = _TERM.match(text)
        if not text or match is None:
            raise ParseError(f"Cannot parse series term {text!r}.", line=1, column=column, literal=literal)
        if match.group("const") is not None:
            exponent, coefficient = 0, int(match.group("const"))
        else:
            coefficient = int(match.group("coeff") or 1)
            exponent = int(match.group("exp") or 1)
        terms[exponent] = terms.get(exponent, 0) + coefficient
    return LaurentSeries.from_terms(field, terms, precision)


def parse_monomial(literal: str, field: PrimeField) -> MonomialClass:
    """'u:<int> e1:<int> e2:<int>'; missing keys default to u=1, e1=e2=0."""
    values = {"u": 1, "e1": 0, "e2": 0}
    seen = set()
    position = 0
    for token in literal.split():
        column = literal.index(token, position) + 1
        position = column - 1 + len(token)
        key, sep, value = token.partition(":")
        if not sep or key not in _MONOMIAL_KEYS or key in seen:
            raise ParseError(f"Unexpected monomial field {token!r}.", line=1, column=column, literal=literal)
        try:
            values[key] = int(value)
        except ValueError as exc:
            raise ParseError(f"{key} needs an integer, got {value!r}.", line=1, column=column + len(key) + 1) from exc
        seen.add(key)
    if values["u"] % field.q == 0:
        raise ParseError("Monomial unit must be nonzero mod q.", line=1, column=1, literal=literal)
    return MonomialClass.of(field, values["u"], values["e1"], values["e2"])


def parse_rational_function(text: str) -> sympy.Expr:
    return rational_function(text)
