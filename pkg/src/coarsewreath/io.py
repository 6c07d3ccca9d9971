"""JSON instance formats, report serialisation and TSV/CSV emission."""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from ._validation import as_fraction, fraction_str
from .groups import FiniteGroup, cyclic, symmetric
from .metric import DenseMap, FiniteMetricSpace, cycle_metric, path_metric, word_metric
from .walls import WallsStructure
from .wreath import WreathInstance, WreathPoint, lamplighter_instance

__all__ = [
    "InputError",
    "load_json",
    "parse_metric",
    "parse_group",
    "parse_walls",
    "parse_instance",
    "parse_points",
    "walls_to_json",
    "point_to_json",
    "jsonable",
    "dumps",
    "computed",
    "fitted",
    "tsv",
]


class InputError(ValueError):
    """Unreadable or malformed input file."""


def load_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror or exc})") from exc
    text = raw.decode("utf-8", errors="replace")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise InputError(f"{path}: malformed JSON at byte {offset} (line {exc.lineno}, column {exc.colno}): {exc.msg}") from exc


def _need(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{where}: missing field {key!r}")
    return obj[key]


def parse_metric(obj: Any, where: str = "metric") -> FiniteMetricSpace:
    """``{"points", "dist"}``, ``{"n", "edges"}`` (word metric), or ``{"cycle": n}`` / ``{"path": n}``."""
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object")
    try:
        if "cycle" in obj:
            return cycle_metric(int(obj["cycle"]))
        if "path" in obj:
            return path_metric(int(obj["path"]))
        if "edges" in obj:
            n = int(_need(obj, "n", where))
            return word_metric([tuple(e) for e in obj["edges"]], n, obj.get("points"))
        dist = _need(obj, "dist", where)
        points = obj.get("points", list(range(len(dist))))
        return FiniteMetricSpace([p if not isinstance(p, list) else tuple(p) for p in points],
                                 [[as_fraction(v) for v in row] for row in dist])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{where}: {exc}") from exc


def parse_group(obj: Any, where: str = "group") -> FiniteGroup:
    """``{"cyclic": n}``, ``{"symmetric": k}`` or ``{"mul": table, "generators": [...]}``."""
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object")
    try:
        if "cyclic" in obj:
            return cyclic(int(obj["cyclic"]))
        if "symmetric" in obj:
            return symmetric(int(obj["symmetric"]))
        return FiniteGroup(_need(obj, "mul", where), obj.get("generators", []))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{where}: {exc}") from exc


def parse_walls(obj: Any, where: str = "walls") -> WallsStructure:
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object")
    ground = _need(obj, "ground", where)
    hs = []
    for k, h in enumerate(_need(obj, "halfspaces", where)):
        try:
            hs.append(([int(i) for i in h["side"]], as_fraction(h["weight"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{where}.halfspaces[{k}]: {exc}") from exc
    try:
        return WallsStructure(ground, hs)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from exc


def parse_instance(obj: Any, where: str = "instance") -> WreathInstance:
    """``{"lamplighter": {"n", "shape"}}`` or ``{"X", "x0", "Y", "Z", "p", "C"}``."""
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object")
    try:
        if "lamplighter" in obj:
            lamp_cfg = obj["lamplighter"]
            lamp = parse_group(lamp_cfg["lamp"], f"{where}.lamplighter.lamp") if "lamp" in lamp_cfg else None
            return lamplighter_instance(int(lamp_cfg["n"]), shape=lamp_cfg.get("shape", "cycle"), lamp=lamp)
        X = parse_metric(_need(obj, "X", where), f"{where}.X")
        Y = parse_metric(_need(obj, "Y", where), f"{where}.Y")
        Z = parse_metric(obj["Z"], f"{where}.Z") if "Z" in obj else Y
        values = obj.get("p", list(range(len(Y))))
        p = DenseMap(Y, Z, tuple(int(v) for v in values), as_fraction(obj.get("C", 0)))
        return WreathInstance(X, int(obj.get("x0", 0)), p)
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from exc


def parse_points(obj: Any, W: WreathInstance, where: str = "points") -> list[WreathPoint]:
    """``{"points": [{"lamps": {"site": value}, "y": y}, ...]}`` or the bare list."""
    items = obj.get("points") if isinstance(obj, dict) else obj
    if not isinstance(items, list):
        raise InputError(f"{where}: expected a list of points")
    out = []
    for k, it in enumerate(items):
        try:
            lamps = it.get("lamps", {})
            pairs = lamps.items() if isinstance(lamps, dict) else lamps
            out.append(W.point({int(z): int(x) for z, x in pairs}, int(it.get("y", 0))))
        except (AttributeError, TypeError, ValueError) as exc:
            raise InputError(f"{where}[{k}]: {exc}") from exc
    return out


def walls_to_json(W: WallsStructure) -> dict:
    return {
        "ground": [jsonable(g) for g in W.ground],
        "halfspaces": [{"side": W.sides(A), "weight": fraction_str(w)} for A, w in W.halfspaces],
    }


def point_to_json(p: WreathPoint) -> dict:
    return {"lamps": {str(z): x for z, x in p.lamps}, "y": p.y}


def jsonable(obj: Any) -> Any:
    """Rationals become ``"num/den"`` strings; floats keep 12 significant digits."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.12g}")
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    return str(obj)


def dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def computed(value) -> dict:
    return {"value": value, "provenance": "computed"}


def fitted(value) -> dict:
    return {"value": value, "provenance": "fitted"}


def _cell(v) -> str:
    if isinstance(v, Fraction):
        return fraction_str(v)
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def tsv(header: list[str], rows) -> str:
    lines = ["\t".join(header)]
    lines += ["\t".join(_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"
