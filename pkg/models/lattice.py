"""Schema of lattice input files"""
from typing import List, Optional, Union

from pydantic import BaseModel, Field, StrictInt, model_validator

Entry = Union[StrictInt, float, str]


class LatticeFile(BaseModel):
    dim: Optional[int] = Field(None, ge=1)
    basis: List[List[Entry]] = Field(..., title="Row i is basis vector v_i")
    rational: bool = Field(False, title="Entries are exact rationals; 'p/q' strings allowed")

    @model_validator(mode="after")
    def _square(self):
        n = self.dim if self.dim is not None else len(self.basis)
        if len(self.basis) != n or any(len(row) != n for row in self.basis):
            raise ValueError(f"basis is not {n}x{n}")
        return self

    @property
    def exact(self) -> bool:
        """Rational mode when requested or when every entry is an integer"""
        return self.rational or all(isinstance(v, int) for row in self.basis for v in row)
