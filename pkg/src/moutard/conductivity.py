"""The :class:`Conductivity` container shared by the 2D and d-dimensional code."""
from __future__ import annotations

import numpy as np

from .errors import PositivityError
from .field import Field, near_zero, zero_set


class Conductivity:
    """A conductivity sampled on a grid, with observed bounds and a degeneracy mask.

    Unmasked samples must be finite and strictly positive.  With
    ``singular=True`` non-finite and non-positive samples are moved into the
    mask instead of raising; this is how zeros and poles of transformed
    conductivities are carried around.
    """

    def __init__(self, sigma: Field, mask=None, singular: bool = False):
        if sigma.is_complex:
            imag = np.abs(sigma.values.imag)
            if np.nanmax(imag, initial=0.0) > 1e-9 * max(1.0, sigma.max_abs()):
                raise PositivityError("conductivity has a non-negligible imaginary part")
            sigma = sigma.real
        merged = sigma.mask
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
            merged = mask if merged is None else (merged | mask)
        values = sigma.values
        with np.errstate(invalid="ignore"):
            bad = ~np.isfinite(values) | ~(values > 0)
        if merged is not None:
            bad &= ~merged
        if bad.any():
            if not singular:
                idx = tuple(int(i) for i in np.argwhere(bad)[0])
                raise PositivityError(f"conductivity is not positive at grid index {idx}: {values[idx]!r}")
            merged = bad if merged is None else (merged | bad)
        self.sigma = sigma.with_mask(merged) if merged is not None else sigma
        self.mask = self.sigma.mask
        valid = self.sigma.values[self.sigma.valid()]
        self.sigma0 = float(valid.min()) if valid.size else float("nan")
        self.sigma1 = float(valid.max()) if valid.size else float("nan")

    def __repr__(self):
        flag = ", degenerate" if self.degenerate else ""
        return f"Conductivity(range=[{self.sigma0:.4g}, {self.sigma1:.4g}]{flag})"

    @property
    def grid(self):
        return self.sigma.grid

    @property
    def degenerate(self) -> bool:
        return self.mask is not None

    def inverse(self) -> "Conductivity":
        return Conductivity(1.0 / self.sigma, singular=self.degenerate)

    def sqrt(self) -> Field:
        return self.sigma.sqrt()


def as_field(sigma) -> Field:
    """Accept either a :class:`Conductivity` or a bare real :class:`Field`."""
    return sigma.sigma if isinstance(sigma, Conductivity) else sigma


def as_conductivity(sigma, singular: bool = False) -> Conductivity:
    return sigma if isinstance(sigma, Conductivity) else Conductivity(sigma, singular=singular)


ZERO_RTOL = 1e-12
SINGULAR_RTOL = 0.05


def degenerate_points(divisor: Field, singular: bool, error, what: str,
                      mask_rtol: float = SINGULAR_RTOL):
    """Mask for dividing by ``divisor``, or None when it has no zeros.

    Without ``singular`` any zero (exact or a sign change between grid
    points) raises ``error``.  In singular mode the mask is the band where
    |divisor| <= mask_rtol * max|divisor| together with the zero set, since
    discretization error near a pole decays only with the distance to it.
    """
    zeros = zero_set(divisor, ZERO_RTOL)
    if divisor.mask is not None:
        zeros &= ~divisor.mask
    if not zeros.any():
        return None
    if not singular:
        idx = tuple(int(i) for i in np.argwhere(zeros)[0])
        raise error(f"{what} vanishes at grid index {idx}")
    mask = zeros | near_zero(divisor, mask_rtol)
    if divisor.mask is not None:
        mask &= ~divisor.mask
    return mask
