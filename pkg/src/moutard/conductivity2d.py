"""Two-dimensional conductivity equation and its Moutard transforms.

The dictionary between div(sigma grad u) = 0 and the GAF equation is

    q   = -dz log(sigma) / 2
    psi = sqrt(sigma) dz u                 (u real solution)
    u   = -i omega(psi, i / sqrt(sigma))   (the inverse, by quadrature)
    v   = -i omega(psi, sqrt(sigma))       (the stream function of u)

and a Moutard transform of the GAF equation with f+ in {sqrt(sigma),
i/sqrt(sigma)} descends to a new conductivity

    sigma~ = -sigma / omega(f, f+)^2   for f+ = sqrt(sigma)   (variant "R")
    sigma~ = -sigma * omega(f, f+)^2   for f+ = i/sqrt(sigma) (variant "I")

whose solutions u~, v~ are again obtained from psi~ by quadrature.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conductivity import SINGULAR_RTOL, Conductivity, as_conductivity, as_field, degenerate_points
from .errors import PreconditionError, SingularOmega, ZeroDivisor
from .field import Field, partial, path_integrate, wirtinger_dz
from .gaf import GafCoefficient, OmegaPotential, moutard_psi, moutard_q, omega, sigma_to_q
from .verify import residual

__all__ = [
    "ConductivitySolution",
    "TransformPlan2D",
    "Moutard2D",
    "special_fplus",
    "u_to_psi",
    "psi_to_u",
    "current",
    "stream_function",
    "stream_from_current",
    "seed_to_f",
    "theorem1_transform",
    "theorem1_recover",
    "theorem2_MI",
    "theorem2_MR",
    "example2_solution",
    "example3_solution",
]

@dataclass
class ConductivitySolution:
    """A conductivity with a potential u, optionally its stream function and current."""

    sigma: Conductivity
    u: Field
    v: Field | None = None
    current: tuple[Field, Field] | None = None
    residual_u: float = float("nan")
    residual_v: float | None = None

    @classmethod
    def build(cls, sigma, u: Field, v: Field | None = None, with_current: bool = True) -> "ConductivitySolution":
        sigma = as_conductivity(sigma)
        res_u = residual("hc1", sigma=sigma.sigma, u=u).norm_max
        res_v = None if v is None else residual("conj1.3", sigma=sigma.sigma, v=v).norm_max
        cur = current(sigma, u) if with_current else None
        return cls(sigma, u, v, cur, res_u, res_v)

    def report_u(self, **kwargs):
        return residual("hc1", sigma=self.sigma.sigma, u=self.u, **kwargs)

    def report_v(self, **kwargs):
        if self.v is None:
            raise PreconditionError("no stream function attached")
        return residual("conj1.3", sigma=self.sigma.sigma, v=self.v, **kwargs)


@dataclass
class TransformPlan2D:
    """Parameters of one Moutard step.

    ``seed`` is the fixed real solution generating f: a solution u1 of the
    conductivity equation for variant "I", or a solution v1 of the
    conjugate equation for variant "R".
    """

    variant: str
    seed: Field
    omega_mode: str = "nonvanishing"
    base: tuple[int, int] | None = None
    constant: complex | None = None
    sign: int = 1
    singular: bool = False
    mask_rtol: float = SINGULAR_RTOL

    def __post_init__(self):
        if self.variant not in ("R", "I"):
            raise ValueError(f"variant must be 'R' or 'I', got {self.variant!r}")


def special_fplus(sigma, variant: str) -> Field:
    """The conjugate-GAF solutions sqrt(sigma) ("R") and i/sqrt(sigma) ("I")."""
    root = as_field(sigma).sqrt().astype_complex()
    if variant == "R":
        return root
    if variant == "I":
        return 1j / root
    raise ValueError(f"variant must be 'R' or 'I', got {variant!r}")


def u_to_psi(u: Field, sigma) -> Field:
    """psi = sqrt(sigma) dz u."""
    return as_field(sigma).sqrt() * wirtinger_dz(u)


def psi_to_u(psi: Field, sigma, base=None, value_at_base: float = 0.0) -> Field:
    """u = -i omega(psi, i/sqrt(sigma)) + value_at_base."""
    w = omega(psi, special_fplus(sigma, "I"), "raw", base, labels=("psi", "f+_I"))
    return w.as_real() + value_at_base


def current(sigma, u: Field) -> tuple[Field, Field]:
    """I = sigma grad u."""
    s = as_field(sigma)
    return s * partial(u, 0), s * partial(u, 1)


def stream_function(sol: ConductivitySolution, base=None, value_at_base: float = 0.0) -> Field:
    """v = -i omega(psi, sqrt(sigma)) with psi built from ``sol.u``."""
    psi = u_to_psi(sol.u, sol.sigma)
    w = omega(psi, special_fplus(sol.sigma, "R"), "raw", base, labels=("psi", "f+_R"))
    return w.as_real() + value_at_base


def stream_from_current(sigma, u: Field, base=None, value_at_base: float = 0.0) -> Field:
    """Stream function from dv = -I2 dx1 + I1 dx2 (independent of the GAF route)."""
    I1, I2 = current(sigma, u)
    P = 0.5 * (-I2 - 1j * I1)
    Q = 0.5 * (-I2 + 1j * I1)
    W, _ = path_integrate(P, Q, base)
    return W.real + value_at_base


def seed_to_f(sigma, variant: str, seed: Field) -> Field:
    """The GAF solution f whose potential against f+_variant reproduces ``seed``."""
    s = as_field(sigma)
    if variant == "I":
        return u_to_psi(seed, s)
    return 1j * wirtinger_dz(seed) / s.sqrt()


class Moutard2D:
    """One Moutard step for the 2D conductivity equation.

    Holds q, f, f+, omega(f, f+) and the transformed sigma~, q~ so that any
    number of solutions can be pushed through the same step.
    """

    def __init__(self, sigma, plan: TransformPlan2D):
        self.sigma = as_conductivity(sigma)
        self.plan = plan
        self.q = sigma_to_q(self.sigma)
        self.f = seed_to_f(self.sigma, plan.variant, plan.seed)
        self.f_plus = special_fplus(self.sigma, plan.variant)
        self.omega: OmegaPotential = omega(self.f, self.f_plus, plan.omega_mode, plan.base,
                                           constant=plan.constant, sign=plan.sign,
                                           labels=("f", f"f+_{plan.variant}"))
        mask = degenerate_points(self.omega.omega, plan.singular, SingularOmega, "omega(f, f+)", plan.mask_rtol)
        w2 = (self.omega.omega * self.omega.omega).real
        with np.errstate(divide="ignore", invalid="ignore"):
            if plan.variant == "I":
                st = -self.sigma.sigma * w2
            else:
                st = -self.sigma.sigma / w2
        self.sigma_tilde = Conductivity(st, mask=mask, singular=plan.singular)
        self.q_tilde = moutard_q(self.q, self.f, self.f_plus, self.omega, singular=plan.singular,
                                 rtol=plan.mask_rtol)

    @property
    def seed_solution(self) -> Field:
        """-i omega(f, f+): the seed actually used, i.e. ``plan.seed`` up to the omega constant."""
        return self.omega.as_real()

    def transform_psi(self, psi: Field, base=None) -> Field:
        return moutard_psi(psi, self.f, self.f_plus, self.omega, base, singular=self.plan.singular,
                           rtol=self.plan.mask_rtol)

    def transform_solution(self, u: Field, base=None) -> Field:
        """psi~ for a real solution u of the original conductivity equation."""
        return self.transform_psi(u_to_psi(u, self.sigma), base)

    def transform_stream(self, v: Field, base=None) -> Field:
        """psi~ for a real solution v of the original conjugate equation."""
        return self.transform_psi(seed_to_f(self.sigma, "R", v), base)

    def recover(self, psi_tilde: Field, base=None) -> tuple[Field, Field]:
        return theorem1_recover(self.sigma_tilde, psi_tilde, base)


def theorem1_transform(sigma, plan: TransformPlan2D) -> tuple[Conductivity, GafCoefficient]:
    """(sigma~, q~) for one Moutard step; see :class:`Moutard2D` for the full state."""
    t = Moutard2D(sigma, plan)
    return t.sigma_tilde, t.q_tilde


def theorem1_recover(sigma_tilde, psi_tilde: Field, base=None, value_u: float = 0.0,
                     value_v: float = 0.0) -> tuple[Field, Field]:
    """u~ = -i omega(psi~, i/sqrt(sigma~)), v~ = -i omega(psi~, sqrt(sigma~))."""
    u = psi_to_u(psi_tilde, sigma_tilde, base, value_u)
    w = omega(psi_tilde, special_fplus(sigma_tilde, "R"), "raw", base, labels=("psi~", "f+_R"))
    return u, w.as_real() + value_v


def _divide(num: Field, den: Field, singular: bool, what: str, mask_rtol: float = SINGULAR_RTOL):
    zeros = degenerate_points(den, singular, ZeroDivisor, what, mask_rtol)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    return (out if zeros is None else out.with_mask(zeros)), zeros


def theorem2_MI(sigma, u1: Field, u: Field, singular: bool = False) -> tuple[Conductivity, Field]:
    """(u1^2 sigma, u / u1)."""
    ut, zeros = _divide(u, u1, singular, "u1")
    st = Conductivity(u1 * u1 * as_field(sigma), mask=zeros, singular=singular)
    return st, ut


def theorem2_MR(sigma, v1: Field, v: Field, singular: bool = False) -> tuple[Conductivity, Field]:
    """(sigma / v1^2, v / v1)."""
    vt, zeros = _divide(v, v1, singular, "v1")
    with np.errstate(divide="ignore", invalid="ignore"):
        st = Conductivity(as_field(sigma) / (v1 * v1), mask=zeros, singular=singular)
    return st, vt


def _require_harmonic(name: str, F: Field, tol_scale: float):
    rep = residual("harmonic", u=F, tolerance_scale=tol_scale)
    if not rep.passed:
        raise PreconditionError(f"{name} is not harmonic: {rep.norm_max:.3e} > {rep.tolerance:.3e}")


def _example2_potential(w: Field, phi: Field, base, c: float) -> Field:
    w1, w2 = partial(w, 0), partial(w, 1)
    p1, p2 = partial(phi, 0), partial(phi, 1)
    a = -(w * p2 - phi * w2)
    b = w * p1 - phi * w1
    W, _ = path_integrate(0.5 * (a - 1j * b), 0.5 * (a + 1j * b), base)
    return W.real + c


def example2_solution(w: Field, phi: Field, base=None, c: float = 0.0, *, singular: bool = False,
                      check: bool = True, tolerance_scale: float = 1.0) -> ConductivitySolution:
    """Solution of div(w^-2 grad u) = 0 generated by harmonic w, phi.

    u = -int [(w phi_2 - phi w_2) dx1 - (w phi_1 - phi w_1) dx2] + c, taken
    along the x1-then-x2 path from ``base``.
    """
    if check:
        _require_harmonic("w", w, tolerance_scale)
        _require_harmonic("phi", phi, tolerance_scale)
    u = _example2_potential(w, phi, base, c)
    inv_w, zeros = _divide(w.grid.constant(1.0), w, singular, "w")
    sigma = Conductivity(inv_w * inv_w, mask=zeros, singular=singular)
    return ConductivitySolution.build(sigma, u)


def example3_solution(w: Field, phi1: Field, c1: float, phi: Field, c: float = 0.0, base=None, *,
                      singular: bool = False, check: bool = True,
                      tolerance_scale: float = 1.0) -> ConductivitySolution:
    """Solution U = u / u1 of div(w^-2 u1^2 grad U) = 0, with u1, u from :func:`example2_solution`."""
    if check:
        _require_harmonic("w", w, tolerance_scale)
        _require_harmonic("phi1", phi1, tolerance_scale)
        _require_harmonic("phi", phi, tolerance_scale)
    u1 = _example2_potential(w, phi1, base, c1)
    u = _example2_potential(w, phi, base, c)
    U, zeros_u1 = _divide(u, u1, singular, "u1")
    inv_w, zeros_w = _divide(w.grid.constant(1.0), w, singular, "w")
    mask = zeros_u1
    if zeros_w is not None:
        mask = zeros_w if mask is None else (mask | zeros_w)
    sigma = Conductivity(inv_w * inv_w * u1 * u1, mask=mask, singular=singular)
    return ConductivitySolution.build(sigma, U.with_mask(mask) if mask is not None else U)
