"""Generalized analytic functions and their simple Moutard transform.

A generalized analytic function (GAF) solves ``dzbar psi = q conj(psi)``;
its conjugate partner solves ``dzbar psi+ = -conj(q) conj(psi+)``.  For such
a pair the 1-form ``psi psi+ dz - conj(psi psi+) dzbar`` is closed, and its
primitive ``omega`` (pure imaginary) drives the Moutard transform

    q~   = q + f conj(f+) / omega(f, f+)
    psi~ = psi - omega(psi, f+) / omega(f, f+) * f
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conductivity import SINGULAR_RTOL, Conductivity, as_field, degenerate_points
from .errors import CompatibilityError, GridMismatch, NotConductivityType, PositivityError, SingularOmega
from .field import Field, path_integrate, wirtinger_dz
from .verify import BOUNDARY_BAND, default_tolerance, residual

__all__ = [
    "GafCoefficient",
    "OmegaPotential",
    "sigma_to_q",
    "q_to_sigma",
    "check_gaf",
    "check_gaf_conjugate",
    "dirac_split",
    "dirac_join",
    "omega",
    "moutard_q",
    "moutard_psi",
    "moutard_psi_plus",
]

TOL_IMAG = 1e-9


class GafCoefficient:
    """A GAF coefficient q together with its compatibility defect.

    ``compat_defect`` is the interior max of ``dzbar q - dz conj(q)``; it
    vanishes (to O(h^2)) exactly when q = -dz log(sigma) / 2 for some
    positive sigma.
    """

    def __init__(self, q: Field):
        if q.grid.dim != 2:
            raise GridMismatch("GAF coefficients live on 2D grids")
        self.q = q if q.is_complex else q.astype_complex()
        self.compat_defect = residual("compat", q=self.q).norm_max

    def __repr__(self):
        return f"GafCoefficient(compat_defect={self.compat_defect:.3e})"

    @property
    def grid(self):
        return self.q.grid

    def compat_tolerance(self) -> float:
        return default_tolerance(self.grid, self.q.max_abs())

    def is_conductivity_type(self, tol: float | None = None) -> bool:
        tol = self.compat_tolerance() if tol is None else tol
        return self.compat_defect <= tol


@dataclass
class OmegaPotential:
    """Imaginary-valued primitive of ``psi psi+ dz - conj(psi psi+) dzbar``."""

    omega: Field
    constant: complex
    defect: float
    pair: tuple[str, str] = ("psi", "psi_plus")
    warnings: list[str] = field(default_factory=list)

    @property
    def grid(self):
        return self.omega.grid

    def min_abs(self) -> float:
        vals = np.abs(self.omega.values)[self.omega.valid()]
        vals = vals[np.isfinite(vals)]
        return float(vals.min()) if vals.size else float("nan")

    def as_real(self) -> Field:
        """``-i omega``, the real field the potential encodes."""
        return (-1j * self.omega).real


def sigma_to_q(sigma) -> GafCoefficient:
    """q = -dz log(sigma) / 2."""
    s = as_field(sigma)
    vals = s.values[s.valid()]
    if np.any(~(vals > 0)):
        raise PositivityError("sigma must be strictly positive to take its logarithm")
    return GafCoefficient(-0.5 * wirtinger_dz(s.log()))


def q_to_sigma(q: GafCoefficient, base=None, sigma_base: float = 1.0, tol: float | None = None) -> Conductivity:
    """Invert :func:`sigma_to_q` by quadrature, normalised by ``sigma(base) = sigma_base``."""
    if not sigma_base > 0:
        raise PositivityError("sigma_base must be positive")
    if not q.is_conductivity_type(tol):
        raise NotConductivityType(f"compat defect {q.compat_defect:.3e} exceeds tolerance")
    W, _ = path_integrate(q.q, q.q.conj(), base)
    return Conductivity(sigma_base * (-2.0 * W.real).map(np.exp))


def check_gaf(psi: Field, q: GafCoefficient) -> float:
    """Interior max of ``dzbar psi - q conj(psi)``."""
    return residual("gan1", psi=psi, q=q.q).norm_max


def check_gaf_conjugate(psi_plus: Field, q: GafCoefficient) -> float:
    """Interior max of ``dzbar psi+ + conj(q) conj(psi+)``."""
    return residual("gan2", psi_plus=psi_plus, q=q.q).norm_max


def dirac_split(psi1: Field, psi2: Field) -> tuple[Field, Field]:
    """Dirac pair -> two GAF solutions (psi_plus, psi_minus)."""
    if psi1.grid != psi2.grid:
        raise GridMismatch("Dirac components live on different grids")
    c2 = psi2.conj()
    return 0.5 * (psi1 + c2), (psi1 - c2) / 2j


def dirac_join(psi_plus: Field, psi_minus: Field) -> tuple[Field, Field]:
    """Two GAF solutions -> Dirac pair (psi1, psi2)."""
    if psi_plus.grid != psi_minus.grid:
        raise GridMismatch("GAF solutions live on different grids")
    return psi_plus + 1j * psi_minus, psi_plus.conj() + 1j * psi_minus.conj()


def omega(psi: Field, psi_plus: Field, mode: str = "raw", base=None, *, constant: complex | None = None,
          sign: int = 1, q: GafCoefficient | None = None, labels: tuple[str, str] = ("psi", "psi_plus"),
          defect_tolerance: float | None = None, check: bool = True) -> OmegaPotential:
    """Integrate ``d omega = psi psi+ dz - conj(psi psi+) dzbar`` from ``base``.

    ``mode='raw'`` leaves omega(base) = 0.  ``mode='nonvanishing'`` adds
    ``i*sign*(1 + max|Im omega|)`` so that |omega| >= 1 on the whole grid.
    An explicit ``constant`` (pure imaginary) overrides the mode.

    When ``q`` is given, the GAF residuals of both inputs are checked and
    any failure is recorded in ``warnings``.  The path defect is measured
    inside the boundary band.  With ``check`` on, a defect above ``defect_tolerance`` (default 50 h^2 scaled by the
    integrand size and box diameter) raises :class:`CompatibilityError`.
    """
    if mode not in ("raw", "nonvanishing"):
        raise ValueError(f"unknown omega mode {mode!r}")
    grid = psi.grid
    notes = []
    if q is not None:
        r1 = residual("gan1", psi=psi.astype_complex(), q=q.q)
        r2 = residual("gan2", psi_plus=psi_plus.astype_complex(), q=q.q)
        if not r1.passed:
            notes.append(f"{labels[0]} fails gan1: {r1.norm_max:.3e} > {r1.tolerance:.3e}")
        if not r2.passed:
            notes.append(f"{labels[1]} fails gan2: {r2.norm_max:.3e} > {r2.tolerance:.3e}")

    P = psi * psi_plus
    W, defect = path_integrate(P, -P.conj(), base, band=BOUNDARY_BAND)
    im = np.abs(W.values.imag)
    re = np.abs(W.values.real)
    finite = np.isfinite(im)
    if finite.any() and re[finite].max() > TOL_IMAG * (1.0 + im[finite].max()):
        raise CompatibilityError(f"{labels} potential is not imaginary-valued")
    if check:
        if defect_tolerance is None:
            diameter = float(np.sqrt(sum((h * (n - 1)) ** 2 for h, n in zip(grid.spacing, grid.shape))))
            defect_tolerance = default_tolerance(grid, P.max_abs() * diameter)
        if defect > defect_tolerance:
            raise CompatibilityError(
                f"{labels} is not a conjugate pair: path defect {defect:.3e} > {defect_tolerance:.3e}")
    W = Field(grid, 1j * W.values.imag, W.mask)

    if constant is None:
        if mode == "raw":
            constant = 0j
        else:
            sign = 1 if sign >= 0 else -1
            constant = 1j * sign * (1.0 + (im[finite].max() if finite.any() else 0.0))
    constant = complex(constant)
    if constant.real != 0:
        raise ValueError("omega constants must be pure imaginary")
    if constant != 0:
        W = W + constant
    return OmegaPotential(W, constant, defect, labels, notes)


def _singular_mask(w: OmegaPotential, singular: bool, rtol: float):
    return degenerate_points(w.omega, singular, SingularOmega, f"omega{w.pair}", rtol)


def moutard_q(q: GafCoefficient, f: Field, f_plus: Field, w: OmegaPotential, *, singular: bool = False,
              rtol: float = SINGULAR_RTOL) -> GafCoefficient:
    """q~ = q + f conj(f+) / omega(f, f+)."""
    zeros = _singular_mask(w, singular, rtol)
    with np.errstate(divide="ignore", invalid="ignore"):
        qt = q.q + f * f_plus.conj() / w.omega
    if zeros is not None:
        qt = qt.with_mask(zeros)
    return GafCoefficient(qt)


def moutard_psi(psi: Field, f: Field, f_plus: Field, w_ff: OmegaPotential, base=None, *,
                constant: complex = 0j, singular: bool = False, rtol: float = SINGULAR_RTOL) -> Field:
    """psi~ = psi - omega(psi, f+) / omega(f, f+) * f, with omega(psi, f+) raw at ``base`` plus ``constant``."""
    zeros = _singular_mask(w_ff, singular, rtol)
    w = omega(psi, f_plus, "raw", base, constant=constant, labels=("psi", "f_plus"))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = psi - w.omega / w_ff.omega * f
    return out.with_mask(zeros) if zeros is not None else out


def moutard_psi_plus(psi_plus: Field, f: Field, f_plus: Field, w_ff: OmegaPotential, base=None, *,
                     constant: complex = 0j, singular: bool = False, rtol: float = SINGULAR_RTOL) -> Field:
    """psi+~ = psi+ - omega(f, psi+) / omega(f, f+) * f+."""
    zeros = _singular_mask(w_ff, singular, rtol)
    w = omega(f, psi_plus, "raw", base, constant=constant, labels=("f", "psi_plus"))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = psi_plus - w.omega / w_ff.omega * f_plus
    return out.with_mask(zeros) if zeros is not None else out
