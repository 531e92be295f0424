from dataclasses import dataclass, field
from typing import List, Tuple

from src.domain.value_objects.closed_set import ClosedSetSpec


@dataclass(frozen=True)
class SliceEntry:
    n: int
    piece: ClosedSetSpec
    radius: float  # d_{n+1} = sqrt((n+1) t)


@dataclass
class Slicing:
    """Decomposition of F into the parabolic shells sqrt(nt) <= |x - y| <= sqrt((n+1)t)"""
    center: Tuple[float, ...]
    time: float
    slices: List[SliceEntry] = field(default_factory=list)
    a_t: int = -1

    @property
    def nonempty(self) -> List[SliceEntry]:
        return [s for s in self.slices if not s.piece.is_empty]

    def rescaled_pieces(self) -> List[Tuple[int, ClosedSetSpec]]:
        """Pieces (F_n - x) / d_{n+1} of the non-empty slices"""
        shift = tuple(-c for c in self.center)
        return [(s.n, s.piece.translate(shift).scale(1.0 / s.radius)) for s in self.nonempty]

    @staticmethod
    def create(center, time: float, slices: List[SliceEntry], a_t: int) -> "Slicing":
        return Slicing(
            center=tuple(float(c) for c in center),
            time=time,
            slices=slices,
            a_t=a_t,
        )
