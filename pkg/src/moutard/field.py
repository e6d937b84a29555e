"""Uniform grids, sampled fields and the discrete calculus built on them.

All derivatives use second-order central differences in the interior and
second-order one-sided differences on the boundary rows (``numpy.gradient``
with ``edge_order=2``).  Line integrals use the composite trapezoid rule on
grid edges, so every operator in this module is O(h^2).

Arrays are stored with ``indexing='ij'``: axis ``k`` of ``Field.values`` is
the coordinate ``x_{k+1}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import DimensionError, GridMismatch

__all__ = [
    "Grid",
    "Field",
    "partial",
    "gradient",
    "divergence",
    "laplacian",
    "wirtinger_dz",
    "wirtinger_dzbar",
    "path_integrate",
    "write_field",
    "read_field",
    "format_field",
    "parse_field",
    "near_zero",
    "zero_set",
]


@dataclass(frozen=True)
class Grid:
    """Rectangular sampling of a box in R^d with uniform spacing per axis."""

    origin: tuple[float, ...]
    spacing: tuple[float, ...]
    shape: tuple[int, ...]

    def __post_init__(self):
        origin = tuple(float(o) for o in self.origin)
        spacing = tuple(float(h) for h in self.spacing)
        shape = tuple(int(n) for n in self.shape)
        if not (len(origin) == len(spacing) == len(shape)) or len(shape) < 1:
            raise DimensionError("origin, spacing and shape must share one length >= 1")
        if any(not h > 0 for h in spacing):
            raise ValueError(f"spacings must be positive, got {spacing}")
        if any(n < 3 for n in shape):
            raise ValueError(f"need at least 3 points per axis, got {shape}")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float], shape: Sequence[int]) -> "Grid":
        """Grid whose first and last points sit on ``lower`` and ``upper``."""
        lower = [float(a) for a in lower]
        upper = [float(b) for b in upper]
        spacing = [(b - a) / (n - 1) for a, b, n in zip(lower, upper, shape)]
        return cls(tuple(lower), tuple(spacing), tuple(shape))

    @classmethod
    def unit(cls, n: int, dim: int = 2) -> "Grid":
        """``n`` points per axis on [0, 1]^dim."""
        return cls.box([0.0] * dim, [1.0] * dim, [n] * dim)

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def h(self) -> float:
        """Representative spacing (the largest one)."""
        return max(self.spacing)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis(self, k: int) -> np.ndarray:
        return self.origin[k] + np.arange(self.shape[k]) * self.spacing[k]

    def point(self, index: Sequence[int]) -> tuple[float, ...]:
        return tuple(o + float(i) * h for o, i, h in zip(self.origin, index, self.spacing))

    def coords(self) -> list[np.ndarray]:
        """Coordinate arrays ``x_1, ..., x_d`` broadcast to the full grid."""
        return np.meshgrid(*[self.axis(k) for k in range(self.dim)], indexing="ij")

    def coord(self, k: int) -> "Field":
        return Field(self, self.coords()[k])

    def z(self) -> "Field":
        """The complex coordinate z = x1 + i x2 (2D grids only)."""
        if self.dim != 2:
            raise DimensionError("z is only defined on 2D grids")
        x1, x2 = self.coords()
        return Field(self, x1 + 1j * x2)

    def constant(self, value) -> "Field":
        return Field(self, np.full(self.shape, value))

    def sample(self, func: Callable[..., np.ndarray]) -> "Field":
        """Evaluate ``func(x1, ..., xd)`` on the grid."""
        values = np.asarray(func(*self.coords()))
        return Field(self, np.broadcast_to(values, self.shape).copy())

    def refine(self) -> "Grid":
        """Halve the spacing while keeping the same box."""
        return Grid(self.origin, tuple(h / 2 for h in self.spacing), tuple(2 * n - 1 for n in self.shape))

    def normalize_index(self, index) -> tuple[int, ...]:
        if index is None:
            return (0,) * self.dim
        index = tuple(int(i) for i in index)
        if len(index) != self.dim:
            raise DimensionError(f"index {index} does not match grid dimension {self.dim}")
        return tuple(i % n for i, n in zip(index, self.shape))


class Field:
    """Real or complex samples on a :class:`Grid`, optionally with a mask.

    Masked points are degenerate (zeros/poles of a transform) and carry
    NaN values.  Arithmetic between fields requires identical grids and
    ORs the masks.
    """

    __array_priority__ = 1000
    __slots__ = ("grid", "values", "mask")

    def __init__(self, grid: Grid, values, mask=None):
        values = np.array(values, copy=True)
        if values.dtype.kind not in "fc":
            values = values.astype(float)
        if values.shape != grid.shape:
            if values.size != grid.size:
                raise GridMismatch(f"{values.size} values for grid of shape {grid.shape}")
            values = values.reshape(grid.shape)
        values.flags.writeable = False
        if mask is not None:
            mask = np.array(mask, dtype=bool)
            if mask.shape != grid.shape:
                raise GridMismatch("mask shape differs from grid shape")
            if not mask.any():
                mask = None
            else:
                mask.flags.writeable = False
        self.grid = grid
        self.values = values
        self.mask = mask

    def __repr__(self):
        kind = "complex" if self.is_complex else "real"
        return f"Field({kind}, shape={self.grid.shape})"

    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    @property
    def kind(self) -> str:
        return "complex" if self.is_complex else "real"

    @property
    def degenerate(self) -> bool:
        return self.mask is not None

    def valid(self) -> np.ndarray:
        """Boolean array of unmasked points."""
        if self.mask is None:
            return np.ones(self.grid.shape, dtype=bool)
        return ~self.mask

    def _wrap(self, values, mask=None) -> "Field":
        return Field(self.grid, values, mask)

    def _coerce(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise GridMismatch("fields live on different grids")
            return other.values, other.mask
        if isinstance(other, (Number, np.number)):
            return other, None
        return NotImplemented, None

    def _binary(self, other, op, reflect=False):
        values, mask = self._coerce(other)
        if values is NotImplemented:
            return NotImplemented
        out = op(values, self.values) if reflect else op(self.values, values)
        return self._wrap(out, _merge_masks(self.mask, mask))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __radd__(self, other):
        return self._binary(other, np.add, reflect=True)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, np.subtract, reflect=True)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    def __rmul__(self, other):
        return self._binary(other, np.multiply, reflect=True)

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __rtruediv__(self, other):
        return self._binary(other, np.divide, reflect=True)

    def __pow__(self, other):
        return self._binary(other, np.power)

    def __neg__(self):
        return self._wrap(-self.values, self.mask)

    def conj(self) -> "Field":
        if not self.is_complex:
            return self
        return self._wrap(np.conj(self.values), self.mask)

    @property
    def real(self) -> "Field":
        return self._wrap(self.values.real.copy(), self.mask)

    @property
    def imag(self) -> "Field":
        return self._wrap(np.asarray(self.values.imag).copy(), self.mask)

    def abs(self) -> "Field":
        return self._wrap(np.abs(self.values), self.mask)

    def map(self, func: Callable[[np.ndarray], np.ndarray]) -> "Field":
        """Apply an elementwise numpy function."""
        return self._wrap(func(self.values), self.mask)

    def sqrt(self) -> "Field":
        return self.map(np.sqrt)

    def log(self) -> "Field":
        return self.map(np.log)

    def astype_complex(self) -> "Field":
        return self._wrap(self.values.astype(complex), self.mask)

    def with_mask(self, mask) -> "Field":
        """Return a copy whose ``mask`` points are set to NaN."""
        mask = _merge_masks(self.mask, None if mask is None else np.asarray(mask, dtype=bool))
        if mask is None:
            return self._wrap(self.values)
        values = np.array(self.values)
        values[mask] = np.nan
        return self._wrap(values, mask)

    def max_abs(self) -> float:
        """Max |value| over unmasked points (NaN-safe)."""
        vals = np.abs(self.values)[self.valid()]
        vals = vals[np.isfinite(vals)]
        return float(vals.max()) if vals.size else 0.0

    def at(self, index) -> complex | float:
        return self.values[self.grid.normalize_index(index)].item()

    def allclose(self, other: "Field", atol: float = 0.0, rtol: float = 0.0) -> bool:
        _, _ = self._coerce(other)
        return bool(np.allclose(self.values, other.values, atol=atol, rtol=rtol, equal_nan=True))


def _merge_masks(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a | b


# discrete calculus

def partial(F: Field, axis: int) -> Field:
    """Second-order accurate derivative of ``F`` along ``axis``."""
    if not 0 <= axis < F.grid.dim:
        raise DimensionError(f"axis {axis} out of range for dimension {F.grid.dim}")
    d = np.gradient(F.values, F.grid.spacing[axis], axis=axis, edge_order=2)
    return Field(F.grid, d, F.mask)


def gradient(F: Field) -> list[Field]:
    return [partial(F, k) for k in range(F.grid.dim)]


def divergence(V: Sequence[Field]) -> Field:
    """Sum of ``partial(V[k], k)``; all components must share one grid."""
    V = list(V)
    grid = V[0].grid
    if len(V) != grid.dim:
        raise DimensionError(f"{len(V)} components for a {grid.dim}-dimensional grid")
    if any(c.grid != grid for c in V):
        raise GridMismatch("vector components live on different grids")
    out = partial(V[0], 0)
    for k in range(1, grid.dim):
        out = out + partial(V[k], k)
    return out


def laplacian(F: Field) -> Field:
    """Divergence of the gradient, with the same stencils as both factors."""
    return divergence(gradient(F))


def _wirtinger_parts(F: Field):
    if F.grid.dim != 2:
        raise DimensionError("Wirtinger derivatives need a 2D grid")
    d1 = partial(F, 0).values
    d2 = partial(F, 1).values
    return d1.real, np.imag(d1), d2.real, np.imag(d2)


def wirtinger_dz(F: Field) -> Field:
    """d/dz = (d/dx1 - i d/dx2) / 2."""
    a1, b1, a2, b2 = _wirtinger_parts(F)
    return Field(F.grid, 0.5 * (a1 + b2) + 0.5j * (b1 - a2), F.mask)


def wirtinger_dzbar(F: Field) -> Field:
    """d/dzbar = (d/dx1 + i d/dx2) / 2."""
    a1, b1, a2, b2 = _wirtinger_parts(F)
    return Field(F.grid, 0.5 * (a1 - b2) + 0.5j * (b1 + a2), F.mask)


def _cumtrapz(values, h, axis, start):
    out = cumulative_trapezoid(values, dx=h, axis=axis, initial=0)
    return out - np.take(out, [start], axis=axis)


def path_integrate(P: Field, Q: Field, base=None, *, band: int = 0) -> tuple[Field, float]:
    """Recover W with dz W = P and dzbar W = Q by trapezoidal quadrature.

    dW = (P + Q) dx1 + i (P - Q) dx2 is integrated from ``base`` along x1
    first and then along x2, with W(base) = 0.  The second return value is
    the max difference from the x2-then-x1 path; it vanishes (to O(h^2))
    exactly when dzbar P = dz Q.

    With ``band > 0`` the defect compares the two paths inside the box that
    leaves out ``band`` cells on each side, starting from its corner.  Fields
    obtained by differentiating integrated data carry O(h) errors on the
    outer rows; this keeps them from leaking into the closedness test.
    """
    if P.grid.dim != 2 or Q.grid.dim != 2:
        raise DimensionError("path integration is implemented for 2D grids")
    if P.grid != Q.grid:
        raise GridMismatch("P and Q live on different grids")
    grid = P.grid
    i0, j0 = grid.normalize_index(base)
    h1, h2 = grid.spacing
    p = P.values.astype(complex)
    q = Q.values.astype(complex)
    g1 = p + q
    g2 = 1j * (p - q)

    along_x1 = _cumtrapz(g1[:, j0], h1, 0, i0)
    W = along_x1[:, None] + _cumtrapz(g2, h2, 1, j0)

    b = int(band)
    if b > 0 and min(grid.shape) > 2 * b + 2:
        s1, s2 = g1[b:-b, b:-b], g2[b:-b, b:-b]
        inner = _cumtrapz(s1[:, 0], h1, 0, 0)[:, None] + _cumtrapz(s2, h2, 1, 0)
        inner_alt = _cumtrapz(s2[0, :], h2, 0, 0)[None, :] + _cumtrapz(s1, h1, 0, 0)
        diff = np.abs(inner_alt - inner)
    else:
        along_x2 = _cumtrapz(g2[i0, :], h2, 0, j0)
        W_alt = along_x2[None, :] + _cumtrapz(g1, h1, 0, i0)
        diff = np.abs(W_alt - W)
    finite = diff[np.isfinite(diff)]
    defect = float(finite.max()) if finite.size else float("nan")
    return Field(grid, W, _merge_masks(P.mask, Q.mask)), defect


# field files

def _fmt(x: float) -> str:
    return repr(float(x))


def format_field(F: Field) -> str:
    """Serialize ``F`` to the text field format."""
    g = F.grid
    header = "# grid d={} origin={} spacing={} shape={} kind={}".format(
        g.dim,
        ",".join(_fmt(o) for o in g.origin),
        ",".join(_fmt(h) for h in g.spacing),
        ",".join(str(n) for n in g.shape),
        F.kind,
    )
    flat = F.values.reshape(-1)
    if F.is_complex:
        lines = ["%.17g,%.17g" % (v.real, v.imag) for v in flat]
    else:
        lines = ["%.17g" % v for v in flat]
    return "\n".join([header, *lines]) + "\n"


def parse_field(text: str) -> Field:
    """Inverse of :func:`format_field`; round-trips bit-identically."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# grid"):
        raise ValueError("missing '# grid' header line")
    meta = dict(tok.split("=", 1) for tok in lines[0][len("# grid"):].split())
    dim = int(meta["d"])
    origin = [float(s) for s in meta["origin"].split(",")]
    spacing = [float(s) for s in meta["spacing"].split(",")]
    shape = [int(s) for s in meta["shape"].split(",")]
    if not (len(origin) == len(spacing) == len(shape) == dim):
        raise DimensionError("header fields disagree with d")
    grid = Grid(origin, spacing, shape)
    rows = [ln for ln in lines[1:] if ln.strip()]
    if len(rows) != grid.size:
        raise ValueError(f"expected {grid.size} value lines, found {len(rows)}")
    if meta["kind"] == "complex":
        pairs = np.array([[float(s) for s in row.split(",")] for row in rows])
        values = np.empty(len(rows), dtype=complex)
        values.real = pairs[:, 0]
        values.imag = pairs[:, 1]
    elif meta["kind"] == "real":
        values = np.array([float(row) for row in rows])
    else:
        raise ValueError(f"unknown kind {meta['kind']!r}")
    values = values.reshape(grid.shape)
    mask = ~np.isfinite(values)
    return Field(grid, values, mask)


def write_field(F: Field, path) -> Path:
    path = Path(path)
    path.write_text(format_field(F))
    return path


def read_field(path) -> Field:
    return parse_field(Path(path).read_text())


def near_zero(F: Field, rtol: float = 1e-12) -> np.ndarray:
    """Points where |F| <= rtol * max(1, max|F|), plus non-finite points."""
    mag = np.abs(F.values)
    with np.errstate(invalid="ignore"):
        return ~np.isfinite(mag) | (mag <= rtol * max(1.0, F.max_abs()))


def zero_set(F: Field, rtol: float = 1e-12) -> np.ndarray:
    """Points where F (numerically) vanishes.

    Besides :func:`near_zero` points this marks both ends of every grid edge
    across which a real or pure-imaginary field changes sign, so zeros that
    fall between grid points are caught too.
    """
    zeros = near_zero(F, rtol)
    vals = F.values
    if F.is_complex:
        re, im = np.abs(vals.real), np.abs(vals.imag)
        finite = np.isfinite(vals)
        if not finite.any():
            return zeros
        vals = vals.imag if np.nanmax(re[finite]) <= 1e-9 * max(1.0, np.nanmax(im[finite])) else (
            vals.real if np.nanmax(im[finite]) <= 1e-9 * max(1.0, np.nanmax(re[finite])) else None)
        if vals is None:
            return zeros
    sgn = np.sign(vals)
    out = zeros.copy()
    for k in range(F.grid.dim):
        a = np.take(sgn, np.arange(F.grid.shape[k] - 1), axis=k)
        b = np.take(sgn, np.arange(1, F.grid.shape[k]), axis=k)
        flip = (a * b) < 0
        pad_lo = [(0, 0)] * F.grid.dim
        pad_hi = [(0, 0)] * F.grid.dim
        pad_lo[k] = (0, 1)
        pad_hi[k] = (1, 0)
        out |= np.pad(flip, pad_lo) | np.pad(flip, pad_hi)
    return out
