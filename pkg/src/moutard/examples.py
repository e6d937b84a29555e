"""Named example pipelines: ready-to-run configs for the classical constructions."""
from __future__ import annotations

from .errors import MoutardError

__all__ = ["UnknownExample", "EXAMPLES", "list_examples", "make_example"]


class UnknownExample(MoutardError, KeyError):
    pass


def _grid(n):
    n = int(n)
    return {"lower": [0.0, 0.0], "upper": [1.0, 1.0], "shape": [n, n]}


def _example1(w="2+x1", phi="x2", n=129, output="out"):
    """sigma = w^2, u = phi / w for harmonic w, phi: one d-dimensional step from sigma = 1."""
    return {
        "description": "example1: sigma = w^2, u = phi/w",
        "grid": _grid(n),
        "sigma": 1.0,
        "solutions": {"phi": phi},
        "steps": [{"kind": "theorem3", "w": w}],
        "verify": ["hc1"],
        "output": output,
    }


def _example2(w="2+x1", phi="x2", c=0.0, n=129, output="out"):
    """sigma = w^-2 with the quadrature solution generated by harmonic w, phi."""
    return {
        "description": "example2: sigma = w^-2 and its quadrature solution",
        "grid": _grid(n),
        "sigma": {"example2": {"w": w, "phi": phi, "c": float(c)}},
        "verify": ["hc1"],
        "output": output,
    }


def _example3(w="2+x1", phi1="x2", c1=5.0, phi="1", c=0.0, n=129, output="out"):
    """sigma = w^-2 u1^2 with U = u / u1, both u1 and u from the example2 quadrature."""
    return {
        "description": "example3: sigma = w^-2 u1^2, U = u/u1",
        "grid": _grid(n),
        "sigma": {"example3": {"w": w, "phi1": phi1, "c1": float(c1), "phi": phi, "c": float(c)}},
        "verify": ["hc1"],
        "output": output,
    }


# harmonic pairs (u, v) with v the stream function of u for sigma = 1
_PAIRS = {
    "a": ("x1", "x2"),
    "b": ("x2", "-x1"),
    "c": ("x1^2 - x2^2", "2*x1*x2"),
}


def _alternating(depth=2, n=129, output="out"):
    """Alternate M_R and M_I steps from sigma = 1, each seeded by a carried pair."""
    depth = int(depth)
    if depth < 1:
        raise ValueError("depth must be at least 1")
    names = list(_PAIRS)
    steps = []
    for k in range(depth):
        name = names[k % len(names)]
        if k % 2 == 0:
            steps.append({"kind": "moutard2d", "variant": "R", "seed": {"stream": name}})
        else:
            steps.append({"kind": "moutard2d", "variant": "I", "seed": {"solution": name}})
    return {
        "description": f"alternating M_R/M_I chain of depth {depth}",
        "grid": _grid(n),
        "sigma": 1.0,
        "solutions": {k: u for k, (u, _) in _PAIRS.items()},
        "streams": {k: v for k, (_, v) in _PAIRS.items()},
        "steps": steps,
        "verify": ["hcm1", "hcm1bis", "gan1"],
        "output": output,
    }


EXAMPLES = {
    "example1": _example1,
    "example2": _example2,
    "example3": _example3,
    "alternating": _alternating,
}


def list_examples() -> dict[str, str]:
    """Name -> one-line description."""
    return {name: fn.__doc__.strip().splitlines()[0] for name, fn in EXAMPLES.items()}


def make_example(name: str, params: dict | None = None) -> dict:
    """A runnable config dict for the named construction."""
    if name not in EXAMPLES:
        raise UnknownExample(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}")
    try:
        return EXAMPLES[name](**(params or {}))
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name}: {exc}") from None
