"""Dimension-independent Moutard transforms and the zero-energy Schrodinger link.

For a fixed solution w of div(sigma grad w) = 0 the map

    sigma -> w^2 sigma,   u -> u / w

sends solutions to solutions in any dimension, because
div(w^2 sigma grad(u/w)) = w div(sigma grad u) - u div(sigma grad w).
The substitution psi = sqrt(sigma) u turns the conductivity equation into
-lap psi + Q psi = 0 with Q = lap(sqrt(sigma)) / sqrt(sigma), and Q is
unchanged by the map above.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conductivity import SINGULAR_RTOL, Conductivity, as_conductivity, as_field, degenerate_points
from .errors import PreconditionError, ZeroDivisor
from .field import Field, divergence, gradient, laplacian
from .verify import ResidualReport, default_tolerance, interior_mask, residual

__all__ = [
    "NdTransform",
    "SchrodingerData",
    "theorem3_transform",
    "theorem3_identity_defect",
    "compose",
    "schrodinger_Q",
    "q_defect",
    "check_Q_invariance",
    "generalized_transform",
]


class NdTransform:
    """The transform generated by a fixed solution ``w`` for conductivity ``sigma``.

    ``residual_w`` is the interior max of div(sigma grad w).  With
    ``validate`` on, a seed that fails the hc1 tolerance is rejected.
    """

    def __init__(self, w: Field, sigma, *, validate: bool = True, singular: bool = False,
                 mask_rtol: float = SINGULAR_RTOL, tolerance_scale: float = 1.0):
        self.w = w
        self.sigma = as_conductivity(sigma, singular=singular)
        self.singular = singular
        self.mask_rtol = mask_rtol
        report = residual("hc1", sigma=self.sigma.sigma, u=w, tolerance_scale=tolerance_scale)
        self.residual_w = report.norm_max
        if validate and not report.passed:
            raise PreconditionError(f"w does not solve div(sigma grad w) = 0: {report.norm_max:.3e} "
                                    f"> {report.tolerance:.3e}")

    def __repr__(self):
        return f"NdTransform(dim={self.w.grid.dim}, residual_w={self.residual_w:.3e})"

    @property
    def grid(self):
        return self.w.grid

    def mask(self):
        return degenerate_points(self.w, self.singular, ZeroDivisor, "w", self.mask_rtol)

    def apply_sigma(self) -> Conductivity:
        return _apply(self.sigma, self.w, None, self.singular, self.mask_rtol)[0]

    def apply(self, u: Field) -> tuple[Conductivity, Field]:
        return _apply(self.sigma, self.w, u, self.singular, self.mask_rtol)


def _apply(sigma, w: Field, u: Field | None, singular: bool, mask_rtol: float):
    zeros = degenerate_points(w, singular, ZeroDivisor, "w", mask_rtol)
    s = as_field(sigma)
    st = w * w * s
    sigma_tilde = Conductivity(st if zeros is None else st.with_mask(zeros), singular=singular)
    if u is None:
        return sigma_tilde, None
    with np.errstate(divide="ignore", invalid="ignore"):
        ut = u / w
    return sigma_tilde, (ut if zeros is None else ut.with_mask(zeros))


def theorem3_transform(t: NdTransform, u: Field, *, check: bool = True,
                       tolerance_scale: float = 1.0) -> tuple[Conductivity, Field]:
    """(w^2 sigma, u / w) for a solution u of div(sigma grad u) = 0."""
    if check:
        rep = residual("hc1", sigma=t.sigma.sigma, u=u, tolerance_scale=tolerance_scale)
        if not rep.passed:
            raise PreconditionError(f"u does not solve div(sigma grad u) = 0: {rep.norm_max:.3e}")
    return t.apply(u)


def theorem3_identity_defect(sigma, w: Field, u: Field) -> float:
    """Interior max of div(w^2 sigma grad(u/w)) - [w div(sigma grad u) - u div(sigma grad w)].

    The continuum identity holds for arbitrary smooth u, w; the discrete
    defect is O(h^2).
    """
    s = as_field(sigma)

    def flux_div(coef, f):
        return divergence([coef * g for g in gradient(f)])

    with np.errstate(divide="ignore", invalid="ignore"):
        lhs = flux_div(w * w * s, u / w)
    rhs = w * flux_div(s, u) - u * flux_div(s, w)
    diff = np.abs((lhs - rhs).values)
    keep = interior_mask(w.grid) & np.isfinite(diff)
    return float(diff[keep].max())


def compose(t2_on_transformed: NdTransform, t1: NdTransform) -> NdTransform:
    """The single transform equal to applying ``t1`` and then ``t2_on_transformed``.

    ``t2_on_transformed`` must act on t1's output conductivity, seeded with
    u2 / u1; the composite is seeded with their product (= u2).
    """
    t2 = t2_on_transformed
    if t2.grid != t1.grid:
        raise PreconditionError("transforms live on different grids")
    expected = t1.apply_sigma().sigma.values
    got = t2.sigma.sigma.values
    if not np.allclose(got, expected, rtol=1e-12, atol=0.0, equal_nan=True):
        raise PreconditionError("second transform must act on the output conductivity of the first")
    return NdTransform(t1.w * t2.w, t1.sigma, validate=False,
                       singular=t1.singular or t2.singular, mask_rtol=min(t1.mask_rtol, t2.mask_rtol))


@dataclass
class SchrodingerData:
    """Zero-energy potential Q = lap(sqrt(sigma)) / sqrt(sigma) of a conductivity."""

    Q: Field
    sigma_source: Conductivity

    def to_schrodinger(self, u: Field) -> Field:
        """psi = sqrt(sigma) u."""
        return self.sigma_source.sqrt() * u

    def from_schrodinger(self, psi: Field) -> Field:
        """u = psi / sqrt(sigma)."""
        return psi / self.sigma_source.sqrt()

    def check(self, u: Field, **kwargs) -> ResidualReport:
        """Residual of -lap psi + Q psi for psi = sqrt(sigma) u."""
        return residual("sch2", psi=self.to_schrodinger(u), Q=self.Q, **kwargs)


def schrodinger_Q(sigma) -> SchrodingerData:
    sigma = as_conductivity(sigma)
    root = sigma.sqrt()
    return SchrodingerData(laplacian(root) / root, sigma)


def q_defect(sigma, sigma_tilde) -> float:
    """Interior max of |Q(sigma~) - Q(sigma)| over unmasked points."""
    a = schrodinger_Q(sigma).Q
    b = schrodinger_Q(sigma_tilde).Q
    diff = (b - a)
    keep = interior_mask(diff.grid) & np.isfinite(diff.values) & diff.valid()
    return float(np.abs(diff.values)[keep].max())


def check_Q_invariance(t: NdTransform) -> float:
    return q_defect(t.sigma, t.apply_sigma())


def generalized_transform(sigma, Q1: Field, Q2: Field, w: Field, u: Field, *, check: bool = True,
                          singular: bool = False, mask_rtol: float = SINGULAR_RTOL,
                          tolerance_scale: float = 1.0) -> tuple[Conductivity, Field, Field]:
    """(w^2 sigma, u / w, w^2 (Q1 - Q2)).

    w solves -div(sigma grad w) + Q2 w = 0 and u solves the same equation
    with Q1; the outputs satisfy -div(sigma~ grad u~) + q u~ = 0.
    """
    s = as_field(sigma)
    if check:
        for name, f, Q in (("w", w, Q2), ("u", u, Q1)):
            rep = residual("ga1", sigma=s, u=f, q=Q, tolerance_scale=tolerance_scale)
            if not rep.passed:
                raise PreconditionError(f"{name} fails -div(sigma grad {name}) + Q {name} = 0: "
                                        f"{rep.norm_max:.3e} > {rep.tolerance:.3e}")
    sigma_tilde, ut = _apply(sigma, w, u, singular, mask_rtol)
    q = w * w * (Q1 - Q2)
    if sigma_tilde.mask is not None:
        q = q.with_mask(sigma_tilde.mask)
    return sigma_tilde, ut, q
