"""Scene, parameter and synthetic-spec files used by the command line."""

from __future__ import annotations

import configparser
import json
from pathlib import Path
from typing import Union

from .exceptions import InvalidInputError, SignalParseError
from .experiment import SyntheticSpec
from .geometry import BodyGeometry, KinematicState
from .risk import DEFAULT_ALPHA, DEFAULT_DT, DEFAULT_MASS, PodarParams, RoadObject, Scene

PathLike = Union[str, Path]


def object_from_dict(data: dict) -> RoadObject:
    shape = data.get("shape", "point")
    if shape == "rectangle":
        geometry = BodyGeometry.rectangle(data["length"], data["width"])
    elif shape == "point":
        geometry = BodyGeometry.point()
    else:
        raise InvalidInputError(f"unknown shape {shape!r}")
    state = KinematicState.create(data["position"], data.get("velocity", (0.0, 0.0)),
                                  data.get("heading"))
    return RoadObject(str(data["id"]), state, geometry, data.get("type", "vehicle"),
                      float(data.get("mass", DEFAULT_MASS)), data.get("sensitivity"))


def object_to_dict(obj: RoadObject) -> dict:
    out = {
        "id": obj.id,
        "type": obj.object_type,
        "position": list(obj.state.position),
        "velocity": list(obj.state.velocity),
        "heading": obj.state.heading,
        "shape": obj.geometry.shape,
        "mass": obj.mass,
        "sensitivity": obj.sensitivity,
    }
    if not obj.geometry.is_point:
        out["length"] = obj.geometry.length
        out["width"] = obj.geometry.width
    return out


def scene_to_dict(scene: Scene) -> dict:
    return {"host": object_to_dict(scene.host),
            "objects": [object_to_dict(o) for o in scene.objects]}


def read_scene(path: PathLike) -> Scene:
    """Load a JSON scene: ``{"host": {...}, "objects": [{...}, ...]}``."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        host = object_from_dict(data["host"])
        objects = [object_from_dict(o) for o in data.get("objects", [])]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise SignalParseError(f"{path}: invalid scene ({exc!r})") from None
    if not objects:
        raise InvalidInputError(f"{path}: scene has no surrounding objects")
    return Scene(host, tuple(objects))


def write_scene(path: PathLike, scene: Scene) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2) + "\n", encoding="utf-8")


def read_params(path: PathLike) -> PodarParams:
    """Model parameters from a ``[params]`` key-value file or a calibration
    result JSON record."""
    path = Path(path)
    if path.suffix == ".json":
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            return PodarParams(float(data["T"]), float(data["k"]), float(data["A"]),
                               float(data["B"]), float(data.get("alpha", DEFAULT_ALPHA)),
                               float(data.get("dt", DEFAULT_DT)))
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise SignalParseError(f"{path}: invalid parameter record ({exc!r})") from None
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
        sec = parser["params"]
        return PodarParams(
            T=sec.getfloat("T"),
            k=sec.getfloat("k", 1.0),
            A=sec.getfloat("A", 1.0),
            B=sec.getfloat("B", 1.0),
            alpha=sec.getfloat("alpha", DEFAULT_ALPHA),
            dt=sec.getfloat("dt", DEFAULT_DT),
        )
    except (configparser.Error, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise SignalParseError(f"{path}: invalid parameter file ({exc!r})") from None


def write_params(path: PathLike, params: PodarParams) -> None:
    lines = ["[params]"] + [f"{key} = {getattr(params, key)!r}"
                            for key in ("T", "k", "A", "B", "alpha", "dt")]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_synthetic_specs(path: PathLike) -> dict[str, SyntheticSpec]:
    """One section per driver with keys T, k, A, B and optional sigma, seed."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
        specs = {}
        for driver in parser.sections():
            sec = parser[driver]
            specs[driver] = SyntheticSpec(
                T=float(sec["T"]), k=float(sec["k"]), A=float(sec["A"]), B=float(sec["B"]),
                sigma=float(sec.get("sigma", "0")), seed=int(sec.get("seed", "0")))
    except (configparser.Error, KeyError, ValueError) as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise SignalParseError(f"{path}: invalid synthetic spec ({exc!r})") from None
    if not specs:
        raise SignalParseError(f"{path}: no driver sections")
    return specs
