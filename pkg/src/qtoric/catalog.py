"""Built-in polytopes (shipped as JSON data files) and model manifolds."""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources

from .momentgeo import BlowupHP2, HPm, ProductHP1
from .polytope import HRepPolytope
from .serialize import polytope_from_dict


def _files():
    return resources.files("qtoric") / "data"


def polytope_names() -> list[str]:
    return sorted(p.name[:-5] for p in _files().iterdir() if p.name.endswith(".json"))


def _raw(name: str) -> dict:
    path = _files() / f"{name}.json"
    if not path.is_file():
        raise KeyError(f"no catalog polytope named {name!r}; known: {', '.join(polytope_names())}")
    return json.loads(path.read_text(encoding="utf-8"))


def load(name: str) -> HRepPolytope:
    return polytope_from_dict(_raw(name))


def description(name: str) -> str:
    return _raw(name).get("description", "")


def simplex(m: int, size=1) -> HRepPolytope:
    normals = [tuple(-int(i == k) for i in range(m)) for k in range(m)] + [(1,) * m]
    return HRepPolytope.from_data(normals, [0] * m + [Fraction(size)], f"delta{m}")


def cube(m: int) -> HRepPolytope:
    normals = ([tuple(-int(i == k) for i in range(m)) for k in range(m)]
               + [tuple(int(i == k) for i in range(m)) for k in range(m)])
    return HRepPolytope.from_data(normals, [0] * m + [1] * m, f"cube{m}")


MODELS = {
    "hp1": (HPm(1), "quaternionic projective line"),
    "hp2": (HPm(2), "quaternionic projective plane"),
    "hp3": (HPm(3), "quaternionic projective 3-space"),
    "hp1xhp1": (ProductHP1(2), "product of two quaternionic projective lines"),
    "blowup_hp2": (BlowupHP2(0.5, 0.5, 0.5), "HP^2 blown up at three points, alpha = 1/2"),
}


def model(spec: str):
    """A model by name, or ``blowup:a1,a2,a3`` with rational or decimal parameters."""
    if spec in MODELS:
        return MODELS[spec][0]
    if spec.startswith("blowup:"):
        vals = [float(Fraction(v)) for v in spec.split(":", 1)[1].split(",")]
        return BlowupHP2(*vals)
    if spec.startswith("hp") and spec[2:].isdigit():
        return HPm(int(spec[2:]))
    raise KeyError(f"unknown model {spec!r}; known: {', '.join(MODELS)}")
