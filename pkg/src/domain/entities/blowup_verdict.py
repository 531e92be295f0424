from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional


class BlowupKind(str, Enum):
    STRONG_BLOWUP = "StrongBlowup"
    BOUNDED = "Bounded"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class BlowupVerdict:
    kind: BlowupKind
    gamma: Optional[float]
    taus: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    note: str = "thresholds (relative spread, window) are run policy"
