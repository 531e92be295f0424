from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.domain.exceptions.domain_exceptions import InvalidGeometryException
from src.domain.value_objects.grid_function import GridFunction


Atom = Tuple[Tuple[float, ...], float]


@dataclass(frozen=True, eq=False)
class RadonMeasure:
    """Nonnegative measure made of point masses plus an optional grid density"""
    atoms: Tuple[Atom, ...] = ()
    density: Optional[GridFunction] = None

    def __post_init__(self):
        atoms = tuple(
            (tuple(float(c) for c in np.atleast_1d(loc)), float(mass)) for loc, mass in self.atoms
        )
        object.__setattr__(self, "atoms", atoms)
        for loc, mass in atoms:
            if not np.isfinite(mass) or mass < 0:
                raise InvalidGeometryException(f"Atom at {loc} has invalid mass {mass}")
        if self.density is not None and self.density.values.size and self.density.values.min() < 0:
            raise InvalidGeometryException("Measure density must be nonnegative")

    @staticmethod
    def zero() -> "RadonMeasure":
        return RadonMeasure()

    @staticmethod
    def dirac(location, mass: float = 1.0) -> "RadonMeasure":
        return RadonMeasure(atoms=((tuple(np.atleast_1d(location)), mass),))

    @property
    def atom_mass(self) -> float:
        return float(sum(mass for _, mass in self.atoms))

    def total_mass(self) -> float:
        density_mass = self.density.integral() if self.density is not None else 0.0
        return self.atom_mass + density_mass

    @property
    def is_zero(self) -> bool:
        return self.total_mass() == 0.0

    def scaled(self, factor: float) -> "RadonMeasure":
        if factor < 0:
            raise InvalidGeometryException(f"Cannot scale a measure by {factor}")
        density = None
        if self.density is not None:
            density = self.density.with_values(self.density.values * factor)
        return RadonMeasure(tuple((loc, mass * factor) for loc, mass in self.atoms), density)

    def push_forward(self, shift, factor: float, mass_factor: float = 1.0) -> "RadonMeasure":
        """Image of the atoms under y -> shift + factor * y, masses multiplied by mass_factor"""
        if self.density is not None:
            raise InvalidGeometryException("Only atomic measures can be pushed forward")
        offset = np.atleast_1d(np.asarray(shift, dtype=float))
        atoms = tuple(
            (tuple(offset + factor * np.asarray(loc)), mass * mass_factor) for loc, mass in self.atoms
        )
        return RadonMeasure(atoms)

    def __add__(self, other: "RadonMeasure") -> "RadonMeasure":
        if self.density is not None and other.density is not None:
            raise InvalidGeometryException("Adding two grid densities is not supported")
        return RadonMeasure(self.atoms + other.atoms, self.density or other.density)
