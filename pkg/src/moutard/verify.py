"""Residual and convergence engine.

Every PDE claim in the package is certified here: ``residual`` evaluates the
literal discrete transcription of one equation on candidate fields and
reports max/L2 norms against an O(h^2) tolerance, and
``convergence_study`` fits the observed order under grid refinement.

Residuals are taken over the *interior*: points at least ``band`` cells away
from the box boundary and at least ``halo`` cells away from masked points.
The boundary band absorbs the O(h) error that nested one-sided boundary
stencils produce on the first rows; everywhere else the residual is O(h^2).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.ndimage import binary_dilation

from .errors import GridMismatch, SignatureError
from .field import Field, Grid, divergence, gradient, laplacian, wirtinger_dz, wirtinger_dzbar

__all__ = [
    "EQUATIONS",
    "ResidualReport",
    "ConvergenceReport",
    "default_tolerance",
    "interior_mask",
    "residual",
    "residual_field",
    "convergence_study",
]

TOLERANCE_FACTOR = 50.0
BOUNDARY_BAND = 3
MASK_HALO = 2


def default_tolerance(grid: Grid, scale: float = 1.0, factor: float = TOLERANCE_FACTOR) -> float:
    """``factor * h^2 * max(1, scale)``."""
    return factor * grid.h ** 2 * max(1.0, float(scale))


def _flux_divergence(coef: Field, u: Field) -> Field:
    return divergence([coef * g for g in gradient(u)])


def _conductivity(sigma, u):
    return _flux_divergence(sigma, u)


def _conjugate(sigma, v):
    return _flux_divergence(1.0 / sigma, v)


def _gaf(psi, q):
    return wirtinger_dzbar(psi) - q * psi.conj()


def _gaf_conjugate(psi_plus, q):
    return wirtinger_dzbar(psi_plus) + q.conj() * psi_plus.conj()


def _schrodinger(psi, Q):
    return -laplacian(psi) + Q * psi


def _with_potential(sigma, u, q):
    return -_flux_divergence(sigma, u) + q * u


def _compat(q):
    return wirtinger_dzbar(q) - wirtinger_dz(q.conj())


# tag -> (input names, operator, description)
EQUATIONS: dict[str, tuple[tuple[str, ...], Callable[..., Field], str]] = {
    "hc1": (("sigma", "u"), _conductivity, "div(sigma grad u) = 0"),
    "conj1.3": (("sigma", "v"), _conjugate, "div(sigma^-1 grad v) = 0"),
    "gan1": (("psi", "q"), _gaf, "dzbar psi = q conj(psi)"),
    "gan2": (("psi_plus", "q"), _gaf_conjugate, "dzbar psi+ = -conj(q) conj(psi+)"),
    "gan3": (("psi", "q"), _gaf, "dzbar psi~ = q~ conj(psi~)"),
    "gan4": (("psi_plus", "q"), _gaf_conjugate, "dzbar psi+~ = -conj(q~) conj(psi+~)"),
    "hcm1": (("sigma", "u"), _conductivity, "div(sigma~ grad u~) = 0"),
    "hcm1bis": (("sigma", "v"), _conjugate, "div(sigma~^-1 grad v~) = 0"),
    "sch2": (("psi", "Q"), _schrodinger, "-lap psi + Q psi = 0"),
    "ga1": (("sigma", "u", "q"), _with_potential, "-div(sigma grad u) + Q1 u = 0"),
    "ga2": (("sigma", "u", "q"), _with_potential, "-div(sigma~ grad u~) + q u~ = 0"),
    "mdhc2": (("sigma", "u"), _conductivity, "div(sigma~ grad u~) = 0, any d"),
    "harmonic": (("u",), laplacian, "lap u = 0"),
    "compat": (("q",), _compat, "dzbar q = dz conj(q)"),
}


# equations whose operator uses 1/sigma; their tolerance scale is taken from 1/sigma
_INVERSE_COEFFICIENT = {"conj1.3", "hcm1bis"}


@dataclass
class ResidualReport:
    equation_id: str
    norm_max: float
    norm_l2: float
    h: float
    masked_fraction: float
    tolerance: float
    passed: bool
    scale: float = 1.0
    points: int = 0
    band: int = BOUNDARY_BAND

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: Mapping) -> "ResidualReport":
        d = dict(d)
        d["passed"] = d.pop("pass")
        return cls(**d)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.equation_id}: max={self.norm_max:.3e} l2={self.norm_l2:.3e} "
                f"tol={self.tolerance:.3e} h={self.h:.3e} masked={self.masked_fraction:.3f}")


@dataclass
class ConvergenceReport:
    equation_id: str
    spacings: list[float]
    norms: list[float]
    estimated_order: float
    floor_limited: bool = False
    reports: list[ResidualReport] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "equation_id": self.equation_id,
            "spacings": list(self.spacings),
            "norms": list(self.norms),
            "estimated_order": self.estimated_order,
            "floor_limited": self.floor_limited,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def interior_mask(grid: Grid, band: int = BOUNDARY_BAND) -> np.ndarray:
    """True on points at least ``band`` cells from every face of the box."""
    keep = np.ones(grid.shape, dtype=bool)
    if band <= 0:
        return keep
    for k, n in enumerate(grid.shape):
        idx = np.arange(n)
        ok = (idx >= band) & (idx <= n - 1 - band)
        shape = [1] * grid.dim
        shape[k] = n
        keep &= ok.reshape(shape)
    return keep


def _excluded(mask, halo):
    if mask is None:
        return None
    if halo <= 0:
        return mask
    structure = np.ones((3,) * mask.ndim, dtype=bool)
    return binary_dilation(mask, structure=structure, iterations=halo)


def _check_inputs(equation_id, inputs):
    if equation_id not in EQUATIONS:
        raise SignatureError(f"unknown equation id {equation_id!r}")
    names = EQUATIONS[equation_id][0]
    missing = [n for n in names if n not in inputs]
    extra = [n for n in inputs if n not in names]
    if missing or extra:
        raise SignatureError(f"{equation_id} expects {names}; missing={missing} unexpected={extra}")
    fields = [inputs[n] for n in names]
    if not all(isinstance(f, Field) for f in fields):
        raise SignatureError(f"{equation_id} inputs must be Field instances")
    grid = fields[0].grid
    if any(f.grid != grid for f in fields):
        raise SignatureError(f"{equation_id} inputs live on different grids")
    return names, fields, grid


def residual_field(equation_id: str, **inputs: Field) -> Field:
    """The pointwise discrete residual of ``equation_id``."""
    names, fields, _ = _check_inputs(equation_id, inputs)
    try:
        return EQUATIONS[equation_id][1](*fields)
    except GridMismatch as exc:
        raise SignatureError(str(exc)) from exc


def residual(equation_id: str, *, tolerance: float | None = None, tolerance_scale: float = 1.0,
             mask=None, halo: int = MASK_HALO, band: int = BOUNDARY_BAND, **inputs: Field) -> ResidualReport:
    """Evaluate one equation's residual and judge it against the tolerance.

    ``mask`` adds degenerate points to the union of the inputs' own masks.
    When ``tolerance`` is None it defaults to ``50 h^2 max(1, scale)`` with
    ``scale`` the largest unmasked magnitude among the operator's inputs
    (1/sigma rather than sigma for the conjugate equations), times
    ``tolerance_scale``.
    """
    names, fields, grid = _check_inputs(equation_id, inputs)
    with np.errstate(all="ignore"):
        R = residual_field(equation_id, **inputs)
    full_mask = mask if mask is None else np.asarray(mask, dtype=bool)
    for f in fields:
        if f.mask is not None:
            full_mask = f.mask if full_mask is None else (full_mask | f.mask)
    excluded = _excluded(full_mask, halo)
    values = np.abs(R.values)
    keep = interior_mask(grid, band)
    if excluded is not None:
        keep &= ~excluded
    nonfinite = ~np.isfinite(values)
    dropped = (excluded if excluded is not None else np.zeros(grid.shape, bool)) | nonfinite
    keep &= ~nonfinite

    scale = 0.0
    for name, f in zip(names, fields):
        if name == "sigma" and equation_id in _INVERSE_COEFFICIENT:
            with np.errstate(divide="ignore"):
                f = 1.0 / f
        vals = np.abs(f.values)
        if excluded is not None:
            vals = vals[~excluded]
        vals = vals[np.isfinite(vals)]
        if vals.size:
            scale = max(scale, float(vals.max()))
    if tolerance is None:
        tolerance = default_tolerance(grid, scale) * tolerance_scale

    selected = values[keep]
    if selected.size:
        norm_max = float(selected.max())
        norm_l2 = float(np.sqrt(np.sum(selected ** 2) * grid.cell_volume))
    else:
        norm_max = norm_l2 = float("nan")
    passed = bool(selected.size) and norm_max <= tolerance
    return ResidualReport(
        equation_id=equation_id,
        norm_max=norm_max,
        norm_l2=norm_l2,
        h=grid.h,
        masked_fraction=float(dropped.mean()),
        tolerance=float(tolerance),
        passed=passed,
        scale=scale,
        points=int(selected.size),
        band=int(band),
    )


def convergence_study(equation_id: str, generator: Callable[[Grid], Mapping[str, Field]], base: Grid,
                      levels: int = 3, **residual_kwargs) -> ConvergenceReport:
    """Run ``residual`` on ``levels`` dyadic refinements of ``base``.

    ``generator(grid)`` must return the named inputs of ``equation_id`` on
    that grid.  The order is the least-squares slope of log(norm_max)
    against log(h).  When the norms sit at the rounding floor (about
    eps * scale / h^2 for second-order operators) the report is flagged
    ``floor_limited`` and the slope is meaningless.
    """
    if levels < 3:
        raise ValueError("need at least 3 levels to estimate an order")
    grids = [base]
    for _ in range(levels - 1):
        grids.append(grids[-1].refine())
    reports = [residual(equation_id, **residual_kwargs, **generator(g)) for g in grids]
    spacings = [g.h for g in grids]
    norms = [r.norm_max for r in reports]
    eps = np.finfo(float).eps
    floor = [1e3 * eps * max(1.0, r.scale) / r.h ** 2 for r in reports]
    floor_limited = all(n <= fl for n, fl in zip(norms, floor))
    positive = all(n > 0 for n in norms)
    if positive:
        order = float(np.polyfit(np.log(spacings), np.log(norms), 1)[0])
    else:
        order = float("nan")
    return ConvergenceReport(equation_id, spacings, norms, order, floor_limited or not positive, reports)
