"""Schema of the GammaTable config file"""
from typing import Dict, Literal, Optional

from pydantic import BaseModel, Field, field_validator


class GammaTableFile(BaseModel):
    dim_max: int = Field(12, ge=1, title="Largest dimension served")
    fallback: Literal["minkowski"] = "minkowski"
    exact: Dict[int, float] = Field(default_factory=dict, title="γ_d = sup α_1 over unimodular rank-d lattices")
    hermite_power: Dict[int, str] = Field(
        default_factory=dict, title="γ_d^(2d) as a rational string; authoritative when present"
    )
    provenance: Dict[int, str] = Field(default_factory=dict)
    source: Optional[str] = None

    @field_validator("exact")
    @classmethod
    def _at_least_one(cls, values: Dict[int, float]) -> Dict[int, float]:
        for d, v in values.items():
            if v < 1.0:
                raise ValueError(f"gamma entry {d} = {v} is below 1")
        return values
