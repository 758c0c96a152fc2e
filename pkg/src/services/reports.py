"""Report payloads shared by the library scenarios and the CLI."""

import json
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class Status(str, Enum):
    OK = "ok"
    INFEASIBLE = "infeasible"
    MISMATCH = "mismatch"
    ERROR = "error"


class ShaReport(BaseModel):
    n: int
    edges: List[str]
    vertices: List[str]
    invariant_factors: List[int]
    target: List[int]
    feasible: bool
    witness: Optional[List[int]] = None
    certificate: Optional[List[int]] = None
    extrapolated: bool = False
    betti_number: int = 0
    cycle: Optional[List[str]] = None
    details: Dict[str, Any] = Field(default_factory=dict)

    @property
    def sha_trivial(self) -> bool:
        return not self.invariant_factors

    def pairing(self) -> Optional[int]:
        """certificate . target mod n, when a certificate is present."""
        if self.certificate is None:
            return None
        return sum(c * t for c, t in zip(self.certificate, self.target)) % self.n

    def render(self) -> str:
        factors = " x ".join(f"Z/{d}" for d in self.invariant_factors) or "0"
        lines = [
            f"n = {self.n}, betti number {self.betti_number}",
            f"cokernel: {factors}",
            f"target: {_pairs(self.edges, self.target)}",
        ]
        if self.feasible:
            lines.append(f"feasible; witness {_pairs(self.vertices, self.witness or [])}")
        else:
            lines.append(f"infeasible; certificate {_pairs(self.edges, self.certificate or [])}")
            lines.append(f"certificate pairs to {self.pairing()} mod {self.n}")
        if self.cycle:
            lines.append("obstructing cycle: " + " - ".join(self.cycle))
        if self.extrapolated:
            lines.append("note: heterogeneous moduli (beyond the cyclic rho-class setting)")
        return "\n".join(lines)


def _pairs(names: List[str], values: List[int]) -> str:
    return ", ".join(f"{name}={value}" for name, value in zip(names, values))


class Report(BaseModel):
    command: str
    status: Status = Status.OK
    payload: Dict[str, Any] = Field(default_factory=dict)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.model_validate_json(text)

    def render(self) -> str:
        if "sha" in self.payload:
            body = ShaReport.model_validate(self.payload["sha"]).render()
            extra = {key: value for key, value in self.payload.items() if key != "sha"}
        else:
            body, extra = "", self.payload
        lines = [f"{self.command}: {self.status.value}"]
        if body:
            lines.append(body)
        for key, value in extra.items():
            shown = value if isinstance(value, (str, int, bool)) else json.dumps(value, sort_keys=True)
            lines.append(f"{key}: {shown}")
        return "\n".join(lines)
