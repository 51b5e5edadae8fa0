"""
Uniform solver outcome.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional

from core.labeling import CycleCertificate


class SolveStatus(str, Enum):
    FOUND = "found"
    NOT_FOUND = "not_found"
    BELOW_THRESHOLD = "below_threshold"
    STALLED = "stalled"


@dataclass
class SolverResult:
    """
    What a solver run produced.

    A missing cycle is a status, not an exception: below the guarantee
    thresholds every solver runs best-effort and reports how it ended.
    """

    certificate: Optional[CycleCertificate]
    status: SolveStatus
    detail: str = ""
    stats: Dict[str, int] = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.certificate is not None

    @classmethod
    def success(cls, certificate: CycleCertificate, **stats: int) -> "SolverResult":
        return cls(certificate, SolveStatus.FOUND, "", dict(stats))

    @classmethod
    def failure(cls, status: SolveStatus, detail: str, **stats: int) -> "SolverResult":
        return cls(None, status, detail, dict(stats))
