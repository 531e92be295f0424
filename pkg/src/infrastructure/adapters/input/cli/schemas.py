from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EmptySchema(_Strict):
    variant: Literal["empty"]
    dimension: int = Field(default=1, ge=1)


class PointSchema(_Strict):
    variant: Literal["point"]
    center: List[float]


class BallSchema(_Strict):
    variant: Literal["ball"]
    center: List[float]
    radius: float = Field(ge=0)


class AnnulusSchema(_Strict):
    variant: Literal["annulus"]
    center: List[float]
    r_in: float = Field(ge=0)
    r_out: float = Field(ge=0)


class BoxSchema(_Strict):
    variant: Literal["box"]
    lo: List[float]
    hi: List[float]


class CantorSchema(_Strict):
    variant: Literal["cantor"]
    interval: List[float] = Field(min_length=2, max_length=2)
    ratio: float = Field(gt=0, lt=0.5)
    depth: int = Field(ge=0)


class UnionSchema(_Strict):
    variant: Literal["union"]
    members: List["SetSchema"]


class IntersectionSchema(_Strict):
    variant: Literal["intersection"]
    members: List["SetSchema"]


SetSchema = Annotated[
    Union[EmptySchema, PointSchema, BallSchema, AnnulusSchema, BoxSchema, CantorSchema,
          UnionSchema, IntersectionSchema],
    Field(discriminator="variant"),
]

UnionSchema.model_rebuild()
IntersectionSchema.model_rebuild()


class GridSchema(_Strict):
    h: float = Field(gt=0)
    dt: Optional[float] = Field(default=None, gt=0)
    T: float = Field(gt=0)
    half_width: float = Field(gt=0)
    absorption: Literal["implicit", "exact_flow"] = "implicit"


class ProbeSchema(_Strict):
    x: List[float]
    t: float = Field(gt=0)


class ExperimentConfigSchema(_Strict):
    name: str
    N: int = Field(ge=1)
    q: float = Field(gt=1)
    set: SetSchema
    grid: Optional[GridSchema] = None
    probes: List[ProbeSchema] = Field(default_factory=list)
    k_list: Optional[List[float]] = None
    eps_list: Optional[List[float]] = None
    capacity_grid_spacing: Optional[float] = Field(default=None, gt=0)
    refine: bool = True
    output_dir: Optional[str] = None
    plot: bool = False

    @model_validator(mode="after")
    def check_probes(self) -> "ExperimentConfigSchema":
        for probe in self.probes:
            if len(probe.x) != self.N:
                raise ValueError(f"Probe {probe.x} does not have {self.N} coordinates")
            if self.grid is not None:
                if probe.t > self.grid.T:
                    raise ValueError(f"Probe time {probe.t} exceeds the horizon {self.grid.T}")
                if max(abs(c) for c in probe.x) > self.grid.half_width:
                    raise ValueError(f"Probe {probe.x} lies outside the solver box")
        return self
