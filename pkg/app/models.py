from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# Input files

class CrossingRecord(BaseModel):
    edges: List[int] = Field(..., min_length=4, max_length=4)
    sign: int

    @field_validator("edges")
    @classmethod
    def non_negative(cls, v):
        if any(e < 0 for e in v):
            raise ValueError("edge ids must be non-negative")
        return v

    @field_validator("sign")
    @classmethod
    def unit_sign(cls, v):
        if v not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        return v


class FreeLoopRecord(BaseModel):
    parity: int = Field(..., ge=0, le=1)


class SymmetryRecord(BaseModel):
    order: int = Field(..., ge=2)
    crossing_perm: List[int]
    edge_perm: Dict[int, int]
    loop_perm: Optional[List[int]] = None


class BraidRecord(BaseModel):
    strands: int = Field(..., ge=1)
    word: List[int]
    periodic: bool = False
    period: Optional[int] = Field(None, ge=2)

    @field_validator("word")
    @classmethod
    def letters_in_range(cls, v, info):
        strands = info.data.get("strands")
        for letter in v:
            if letter == 0 or (strands is not None and abs(letter) >= strands):
                raise ValueError(f"braid letter {letter} out of range")
        return v


class DiagramFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    description: Optional[str] = None
    crossings: List[CrossingRecord] = Field(default_factory=list)
    free_loops: List[FreeLoopRecord] = Field(default_factory=list)
    ray_parity: Dict[int, int] = Field(default_factory=dict)
    ray_winding: Optional[Dict[int, int]] = None
    symmetry: Optional[SymmetryRecord] = None
    braid: Optional[BraidRecord] = None
    n_plus: Optional[int] = None
    n_minus: Optional[int] = None

    @model_validator(mode="after")
    def braid_or_crossings(self):
        if self.braid is not None and (self.crossings or self.ray_parity or self.symmetry):
            raise ValueError("a braid file carries no crossings, parities or symmetry")
        return self


class PolyTerm(BaseModel):
    t: int
    q: int
    coef: int


# Reports

class PoincareBlock(BaseModel):
    i: int
    q: int
    k: Optional[int] = None
    dim: int


class PoincareReport(BaseModel):
    field: str
    annular: bool
    blocks: List[PoincareBlock]
    rendering: str
    total_dim: int


class EigenSpaceRecord(BaseModel):
    s: int
    phi: int
    blocks: List[PoincareBlock]
    delta: List[PoincareBlock]


class EigenReport(BaseModel):
    p: int
    n: int
    r: int
    total_dim: int
    spaces: List[EigenSpaceRecord]


class BorelRow(BaseModel):
    q: int
    k: Optional[int] = None
    dims: Dict[int, int]
    stable_rank: int
    expected_rank: Optional[int] = None


class BorelReport(BaseModel):
    p: int
    max_degree: int
    annular: bool
    rows: List[BorelRow]
    stable_rank: int
    stabilized: bool


class SmithEntry(BaseModel):
    family: Literal["annular", "khovanov", "filtration"]
    q: int
    k: Optional[int] = None
    i: Optional[int] = None
    link: Optional[str] = None
    left: int
    right: int
    holds: bool


class SmithReport(BaseModel):
    p: int
    entries: List[SmithEntry]
    verdict: str


class FixedBlock(BaseModel):
    q: int
    k: int
    lift_q: int
    quotient_count: int
    invariant_count: int


class FixedGeneratorsReport(BaseModel):
    p: int
    quotient_count: int
    invariant_count: int
    fixed_vertices: int
    expected_fixed_vertices: int
    blocks: List[FixedBlock]
    verdict: str


class CountingReport(BaseModel):
    max_index: int
    configs: int
    nonzero: int
    theta_histogram: Dict[int, int]
    mismatches: List[str]
    verdict: str


class CheckRecord(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class PermutohedraReport(BaseModel):
    checks: List[CheckRecord]
    verdict: str


class DecompositionRecord(BaseModel):
    parts: List[List[PolyTerm]]


class PeriodicityReport(BaseModel):
    p: int
    n: int
    s: int
    c: int
    width: int
    decompositions: List[DecompositionRecord]
    count: int
    inconclusive: bool
    verdict: str


class RunReport(BaseModel):
    command: List[str]
    digest: str
    result: Dict[str, Any]
    verdict: Literal["pass", "fail", "inconclusive", "n/a"]
    wall_time: float

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "command": ["kh", "corpus/hopf2.json", "--field", "2"],
                "digest": "3f1c0e...",
                "result": {
                    "field": "F2",
                    "annular": False,
                    "blocks": [
                        {"i": 0, "q": 0, "dim": 1},
                        {"i": 0, "q": 2, "dim": 1},
                        {"i": 2, "q": 4, "dim": 1},
                        {"i": 2, "q": 6, "dim": 1}
                    ],
                    "rendering": "q**2 + t**2*q**4 + t**2*q**6 + 1",
                    "total_dim": 4
                },
                "verdict": "n/a",
                "wall_time": 0.012
            }
        }
    )
