"""
Exception hierarchy shared by every service module.

The CLI maps ValidationError to exit code 2 and the cap/deadline errors to
exit code 3.
"""
from typing import Any, Optional


class GeometryError(Exception):
    """Base class for all toolkit errors"""

    kind = "error"


class ValidationError(GeometryError):
    """Malformed or inconsistent input"""

    kind = "validation"


class RankDeficiencyError(ValidationError):
    """Input vectors are linearly dependent"""

    kind = "rank_deficiency"

    def __init__(self, index: int, message: Optional[str] = None):
        self.index = index
        super().__init__(message or f"vector {index} is linearly dependent on its predecessors")


class MembershipError(ValidationError):
    kind = "membership"


class PrimitivityError(ValidationError):
    kind = "primitivity"

    def __init__(self, message: str = "subgroup is not primitive in the lattice; saturate it first"):
        super().__init__(message)


class DimensionCapError(GeometryError):
    kind = "dimension_cap"

    def __init__(self, operation: str, dim: int, cap: int):
        self.operation = operation
        self.dim = dim
        self.cap = cap
        super().__init__(f"{operation}: dimension {dim} exceeds exactness cap {cap}")


class DeadlineExceeded(GeometryError):
    """Raised when a deadline is hit; carries whatever partial result exists"""

    kind = "deadline"

    def __init__(self, message: str, partial: Any = None):
        self.partial = partial
        super().__init__(message)
