from typing import Any, Dict

from src.domain.exceptions.domain_exceptions import InvalidGeometryException
from src.domain.value_objects.closed_set import (
    Annulus,
    Ball,
    Box,
    CantorSet,
    ClosedSetSpec,
    Empty,
    FullSpace,
    Intersection,
    Point,
    Union,
)


class ClosedSetMapper:
    @staticmethod
    def to_entity(payload: Dict[str, Any]) -> ClosedSetSpec:
        """
        Map a tagged set payload ({"variant": ..., ...}) to a ClosedSetSpec
        """
        variant = payload.get("variant")
        if variant == "empty":
            return Empty(int(payload.get("dimension", 1)))
        if variant == "full_space":
            return FullSpace(int(payload.get("dimension", 1)))
        if variant == "point":
            return Point(tuple(payload["center"]))
        if variant == "ball":
            return Ball(tuple(payload["center"]), float(payload["radius"]))
        if variant == "annulus":
            return Annulus(tuple(payload["center"]), float(payload["r_in"]), float(payload["r_out"]))
        if variant == "box":
            return Box(tuple(payload["lo"]), tuple(payload["hi"]))
        if variant == "cantor":
            return CantorSet(tuple(payload["interval"]), float(payload["ratio"]), int(payload["depth"]))
        if variant == "union":
            return Union(tuple(ClosedSetMapper.to_entity(m) for m in payload["members"]))
        if variant == "intersection":
            return Intersection(tuple(ClosedSetMapper.to_entity(m) for m in payload["members"]))
        raise InvalidGeometryException(f"Unknown set variant: {variant}", {"payload": payload})

    @staticmethod
    def to_dict(spec: ClosedSetSpec) -> Dict[str, Any]:
        """
        Map a ClosedSetSpec back to its tagged payload
        """
        if isinstance(spec, (Empty, FullSpace)):
            return {"variant": spec.variant, "dimension": spec.dimension}
        if isinstance(spec, Point):
            return {"variant": "point", "center": list(spec.center)}
        if isinstance(spec, Ball):
            return {"variant": "ball", "center": list(spec.center), "radius": spec.radius}
        if isinstance(spec, Annulus):
            return {"variant": "annulus", "center": list(spec.center), "r_in": spec.r_in, "r_out": spec.r_out}
        if isinstance(spec, Box):
            return {"variant": "box", "lo": list(spec.lo), "hi": list(spec.hi)}
        if isinstance(spec, CantorSet):
            return {"variant": "cantor", "interval": list(spec.interval), "ratio": spec.ratio, "depth": spec.depth}
        if isinstance(spec, (Union, Intersection)):
            return {"variant": spec.variant, "members": [ClosedSetMapper.to_dict(m) for m in spec.members]}
        raise InvalidGeometryException(f"Cannot serialize set variant {spec.variant}")
