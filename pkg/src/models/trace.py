"""Proof trace records.

A trace is a tree stored as a flat node list: `children` hold indices into
`nodes`, node 0 is the root, and the order of `nodes` is preorder with IN
branches before OUT branches.
"""

from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class NodeKind(str, Enum):
    INIT = "init"
    DEDUCE = "deduce"
    DISPATCH = "dispatch"
    SPLIT = "split"
    CONTRADICTION = "contradiction"
    CANDIDATE = "candidate"
    # unexplored or depth-limited branch; never part of an impossibility trace
    OPEN = "open"


class TraceVerdict(str, Enum):
    IMPOSSIBLE = "impossible"
    CANDIDATE = "candidate"
    INCONCLUSIVE = "inconclusive"


class TraceDeduction(BaseModel):
    term: str
    status: str
    rule: str
    premises: list[str] = Field(default_factory=list)


class ContradictionRecord(BaseModel):
    kind: str
    deduction: TraceDeduction | None = None
    target: str | None = None
    character: int | None = None
    modulus: int | None = None


class CandidateRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    confirmed: bool
    n_value: int | None = None
    modulus: int | None = None
    elements: list[int] | None = None
    lambda_: int | None = Field(default=None, alias="lambda")


class TraceNode(BaseModel):
    kind: NodeKind
    deductions: list[TraceDeduction] = Field(default_factory=list)
    term: str | None = None
    branches: list[str] = Field(default_factory=list)
    generators: list[int] | None = None
    character: int | None = None
    modulus: int | None = None
    contradiction: ContradictionRecord | None = None
    candidate: CandidateRecord | None = None
    reason: str | None = None
    children: list[int] = Field(default_factory=list)


class ProofTrace(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    lambda_: int = Field(alias="lambda")
    bound: int
    dispatch_terms: int
    dispatch_l_max: int
    verdict: TraceVerdict
    nodes: list[TraceNode]
    stats: dict[str, float] = Field(default_factory=dict)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, exclude_none=True)

    @classmethod
    def from_json(cls, text: str) -> "ProofTrace":
        return cls.model_validate_json(text)

    def leaves(self) -> list[int]:
        return [i for i, node in enumerate(self.nodes) if not node.children]

    def count(self, kind: NodeKind) -> int:
        return sum(1 for node in self.nodes if node.kind is kind)
