"""Report envelope shared by every command"""
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field


class RunConfig(BaseModel):
    command: str
    action: Optional[str] = None
    inputs: List[str] = Field(default_factory=list, title="Input paths as given on the command line")
    seed: int = Field(0, ge=0, title="64-bit master seed")
    gamma_table: Optional[str] = None
    c1: Optional[float] = Field(None, gt=0)
    woods_variant: str = "lemma52"
    out: Optional[str] = None
    format: Literal["json", "pretty"] = "json"
    options: Dict[str, Any] = Field(default_factory=dict, title="Command-specific arguments")


class ReportMeta(BaseModel):
    tool: str
    tool_version: str
    prng: str
    seed: int
    theorem: Optional[str] = Field(None, title="Statement the result is about")
    config: RunConfig


class ErrorReport(BaseModel):
    error: str
    kind: str
