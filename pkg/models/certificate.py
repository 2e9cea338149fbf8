"""Schema of covering-check certificates"""
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

Verdict = Literal["outside_kzs", "covered", "unresolved"]
Bounds = List[Tuple[float, float]]


class LeafModel(BaseModel):
    box: Bounds = Field(..., title="Leaf box in log coordinates ℓ_1..ℓ_{n-1}")
    verdict: Verdict
    composition: Optional[List[int]] = Field(None, title="Composition whose region covers the leaf")

    @model_validator(mode="after")
    def _composition_iff_covered(self):
        if (self.verdict == "covered") != (self.composition is not None):
            raise ValueError("a composition is given exactly for covered leaves")
        for lo, hi in self.box:
            if lo > hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")
        return self


class CertificateFile(BaseModel):
    dim: int = Field(..., ge=1, le=7)
    variant: Literal["lemma52", "literal"]
    tolerance: float = Field(..., gt=0, title="Minimum box width")
    gamma_provenance: Dict[str, str] = Field(default_factory=dict)
    initial_box: Bounds
    derivation: List[str] = Field(default_factory=list)
    complete: bool = Field(True, title="False when the run stopped at a deadline")
    covered: bool
    leaves: List[LeafModel]
    stats: Dict[str, int] = Field(default_factory=dict)
    tool_version: Optional[str] = None
    theorem: Optional[str] = None
