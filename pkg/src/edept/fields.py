"""Closed-form localized pulse family: potential, fields, energy densities,
and Maxwell residuals.

The family is the set of exact source-free vacuum solutions whose azimuthal
vector potential is

    A_theta(tau, rho, z) = 2 a mu0 g0^a rho [g1 + i(z - tau)]^(a-1)
                           / [r^2 - tau^2 + i(g2-g1) z - i(g2+g1) tau + g1 g2]^(a+1)

with tau = c t, r^2 = rho^2 + z^2, integer a >= 1 and positive lengths
g0, g1, g2.  The denominator never vanishes for real arguments, so the
expression is entire on real spacetime.  Physical real solutions are the
real part (odd a) or imaginary part (even a) of the complex expression.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .autodiff import (DUAL, DifferentiationScheme, Jet, Jet2, SchemeError,
                       SchemeKind)
from .constants import NATURAL, PhysicalConstants


class FieldRangeError(FloatingPointError):
    """An intermediate quantity overflowed for an extreme input.

    Far-field magnitudes that merely underflow are returned as exact zeros;
    this error fires only when the evaluation cannot produce a number."""


class Branch(Enum):
    """Which real solution is read off the complex closed form.

    ANALYTIC keeps the complex values themselves; its "real" projection is
    the componentwise modulus (the envelope)."""

    REAL = "real"
    IMAG = "imag"
    ANALYTIC = "analytic"


def parity_branch(alpha: int) -> Branch:
    """Branch attaining the slowest clean power-law: real for odd alpha,
    imaginary for even alpha."""
    return Branch.REAL if alpha % 2 else Branch.IMAG


def branch_project(values, branch: Branch):
    """Project complex field values onto the selected real solution."""
    values = np.asarray(values)
    if branch is Branch.REAL:
        return values.real
    if branch is Branch.IMAG:
        return values.imag
    return np.abs(values)


# Positive-frequency phase: the complex closed form carries only
# exp(+i omega t) content, so the analytic signal of the projected real field
# is sigma * conj(complex field) / 2.  Verified by spectrum.validate_spectrum.
_POSITIVE_FREQUENCY_PHASE = {Branch.REAL: 1.0, Branch.IMAG: 1.0j,
                             Branch.ANALYTIC: 1.0}


@dataclass(frozen=True)
class EdeptParams:
    """Pulse family parameters.  branch=None selects the parity default."""

    alpha: int
    g0: float = 1.0
    g1: float = 1.0
    g2: float = 1.0
    branch: Branch | None = None

    def __post_init__(self):
        if not isinstance(self.alpha, (int, np.integer)) or self.alpha < 1:
            raise ValueError("alpha must be an integer >= 1")
        for name in ("g0", "g1", "g2"):
            g = getattr(self, name)
            if not (np.isfinite(g) and g > 0):
                raise ValueError(f"{name} must be positive and finite")
        if self.branch is None:
            object.__setattr__(self, "branch", parity_branch(self.alpha))

    @property
    def length_scale(self) -> float:
        return max(self.g1, self.g2)

    def with_branch(self, branch: Branch) -> "EdeptParams":
        return EdeptParams(self.alpha, self.g0, self.g1, self.g2, branch)


@dataclass(frozen=True)
class SpacetimePoint:
    """Spacetime sample point; cylindrical storage with Cartesian views."""

    t: float
    rho: float
    theta: float
    z: float

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")
        for v in (self.t, self.rho, self.theta, self.z):
            if not np.isfinite(v):
                raise ValueError("spacetime coordinates must be finite")

    @classmethod
    def from_cylindrical(cls, t, rho, theta, z):
        return cls(float(t), float(rho), float(theta) % (2.0 * np.pi), float(z))

    @classmethod
    def from_cartesian(cls, t, x, y, z):
        return cls(float(t), float(np.hypot(x, y)),
                   float(np.arctan2(y, x)) % (2.0 * np.pi), float(z))

    @property
    def x(self) -> float:
        return self.rho * np.cos(self.theta)

    @property
    def y(self) -> float:
        return self.rho * np.sin(self.theta)

    @property
    def r(self) -> float:
        return float(np.hypot(self.rho, self.z))

    def tau(self, constants: PhysicalConstants = NATURAL) -> float:
        return constants.c * self.t


def _h_core(params: EdeptParams, tau, r2, z, constants: PhysicalConstants):
    """A_theta / rho, arranged so every factor stays O(1/r) or smaller.

    Works on floats, numpy arrays, and jets alike; depends on rho only
    through r^2, so it is smooth across the axis.
    """
    a = params.alpha
    num = params.g1 + 1j * (z - tau)
    den = (r2 - tau * tau) + 1j * ((params.g2 - params.g1) * z
                                   - (params.g2 + params.g1) * tau) \
        + params.g1 * params.g2
    inv = 1.0 / den
    scale = 2.0 * a * constants.mu0 * params.g0**a
    return scale * (num * inv) ** (a - 1) * inv * inv


def denominator(params: EdeptParams, tau, rho, z):
    """The complex denominator base of the closed form (provably nonzero)."""
    r2 = rho * rho + z * z
    return (r2 - tau * tau) + 1j * ((params.g2 - params.g1) * z
                                    - (params.g2 + params.g1) * tau) \
        + params.g1 * params.g2


def _finite_or_raise(values, context):
    if isinstance(values, (Jet, Jet2)):
        if not np.all(np.isfinite(values.val)):
            raise FieldRangeError(f"non-finite intermediate in {context}")
        return values
    if not np.all(np.isfinite(values)):
        raise FieldRangeError(
            f"non-finite intermediate in {context}; inputs out of double range")
    return values


def vector_potential_theta(params: EdeptParams, tau, rho, z,
                           constants: PhysicalConstants = NATURAL):
    """Complex azimuthal amplitude A_theta on broadcastable arrays.

    Underflows to exact 0 in the extreme far field; raises FieldRangeError
    if an intermediate overflow leaves no representable value.
    """
    tau = np.asarray(tau, dtype=float)
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    with np.errstate(all="ignore"):
        out = rho * _h_core(params, tau, rho * rho + z * z, z, constants)
    return _finite_or_raise(out, "vector_potential")


def vector_potential(params: EdeptParams, point: SpacetimePoint,
                     constants: PhysicalConstants = NATURAL) -> complex:
    """Complex A_theta at a spacetime point; the full vector is A_theta e_theta."""
    return complex(vector_potential_theta(params, point.tau(constants),
                                          point.rho, point.z, constants))


class FieldSample(NamedTuple):
    """Complex Cartesian A, E, B 3-vectors and their branch projections."""

    A: np.ndarray
    E: np.ndarray
    B: np.ndarray
    real_A: np.ndarray
    real_E: np.ndarray
    real_B: np.ndarray


def _cartesian_jets(params, t, x, y, z, constants):
    """Jet evaluation of the Cartesian components A_x = -y h, A_y = x h."""
    tj, xj, yj, zj = Jet.seed([t, x, y, z])
    h = _h_core(params, constants.c * tj, xj * xj + yj * yj + zj * zj, zj,
                constants)
    return -yj * h, xj * h


def _central_partials(f, coords, step):
    """First partials of f(t,x,y,z) by central differences; returns
    (value, [df/dv for v in coords])."""
    coords = [np.asarray(c, dtype=float) for c in coords]
    f0 = f(*coords)
    partials = []
    for i, c in enumerate(coords):
        h = step * (1.0 + np.abs(c))
        if np.any(c + h == c):
            raise SchemeError("central-difference step underflow")
        up = list(coords)
        dn = list(coords)
        up[i] = c + h
        dn[i] = c - h
        partials.append((f(*up) - f(*dn)) / (2.0 * h))
    return f0, partials


def em_fields_cartesian(params: EdeptParams, t, x, y, z,
                        scheme: DifferentiationScheme = DUAL,
                        constants: PhysicalConstants = NATURAL):
    """Complex Cartesian field arrays (A, E, B), each shaped (3,) + broadcast.

    E = -dA/dt and B = curl A, evaluated from the closed form with the
    requested differentiation scheme.
    """
    t, x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                       for v in (t, x, y, z)))
    if scheme.kind is SchemeKind.DUAL_NUMBER:
        with np.errstate(all="ignore"):
            Ax, Ay = _cartesian_jets(params, t, x, y, z, constants)
        zero = np.zeros_like(Ax.val)
        A = np.stack([Ax.val, Ay.val, zero])
        E = np.stack([-Ax.d[0], -Ay.d[0], zero])
        B = np.stack([-Ay.d[3], Ax.d[3], Ay.d[1] - Ax.d[2]])
    elif scheme.kind is SchemeKind.CENTRAL_DIFFERENCE:
        step = scheme.step if scheme.step is not None \
            else float(np.finfo(float).eps) ** (1.0 / 3.0)

        def eval_a(tt, xx, yy, zz):
            with np.errstate(all="ignore"):
                h = _h_core(params, constants.c * tt, xx * xx + yy * yy + zz * zz,
                            zz, constants)
            return np.stack([-yy * h, xx * h])

        a0, parts = _central_partials(eval_a, (t, x, y, z), step)
        zero = np.zeros_like(a0[0])
        A = np.stack([a0[0], a0[1], zero])
        E = np.stack([-parts[0][0], -parts[0][1], zero])
        B = np.stack([-parts[3][1], parts[3][0], parts[1][1] - parts[2][0]])
    else:
        raise SchemeError("complex-step differentiation applies to real-valued "
                          "maps only; the complex pulse fields need dual-number "
                          "or central-difference schemes")
    for arr in (A, E, B):
        _finite_or_raise(arr, "em_fields")
    return A, E, B


def em_fields(params: EdeptParams, point: SpacetimePoint,
              scheme: DifferentiationScheme = DUAL,
              constants: PhysicalConstants = NATURAL) -> FieldSample:
    """Field sample (complex vectors plus branch projections) at one point."""
    A, E, B = em_fields_cartesian(params, point.t, point.x, point.y, point.z,
                                  scheme, constants)
    return FieldSample(A, E, B,
                       branch_project(A, params.branch),
                       branch_project(E, params.branch),
                       branch_project(B, params.branch))


class EnergyDensitySample(NamedTuple):
    """Energy densities of the branch-projected real solution plus the
    photodetection-rate density (up to the detector constant)."""

    u_total: float
    u_electric: float
    u_magnetic: float
    detection_rate: float


def _vec_norm_sq(v):
    return np.sum(np.asarray(v) ** 2, axis=0)


def energy_density_cartesian(params: EdeptParams, t, x, y, z,
                             scheme: DifferentiationScheme = DUAL,
                             constants: PhysicalConstants = NATURAL):
    """Arrays (u_total, u_electric, u_magnetic, detection_rate) on broadcast
    coordinates.

    The detection rate is eps0 |E+|^2 with E+ the positive-frequency electric
    field.  For this family |E+| = |E_complex| / 2 exactly (the complex
    solution is the negative-frequency representative of the projected real
    field; the spectrum module measures this identification).
    """
    A, E, B = em_fields_cartesian(params, t, x, y, z, scheme, constants)
    rE = branch_project(E, params.branch)
    rB = branch_project(B, params.branch)
    u_e = 0.5 * constants.eps0 * _vec_norm_sq(rE)
    u_m = 0.5 * constants.eps0 * constants.c**2 * _vec_norm_sq(rB)
    rate = 0.25 * constants.eps0 * np.sum(np.abs(E) ** 2, axis=0)
    return u_e + u_m, u_e, u_m, rate


def energy_density(params: EdeptParams, point: SpacetimePoint,
                   scheme: DifferentiationScheme = DUAL,
                   constants: PhysicalConstants = NATURAL) -> EnergyDensitySample:
    u_t, u_e, u_m, rate = energy_density_cartesian(
        params, point.t, point.x, point.y, point.z, scheme, constants)
    return EnergyDensitySample(float(u_t), float(u_e), float(u_m), float(rate))


def positive_frequency_field(params: EdeptParams, t, x, y, z,
                             constants: PhysicalConstants = NATURAL):
    """Closed-form positive-frequency electric field E+ (3, ...) of the
    branch-projected real solution: sigma * conj(E_complex) / 2."""
    _, E, _ = em_fields_cartesian(params, t, x, y, z, DUAL, constants)
    return 0.5 * _POSITIVE_FREQUENCY_PHASE[params.branch] * np.conj(E)


class ResidualValues(NamedTuple):
    complex_field: float
    real_branch: float
    imag_branch: float


class MaxwellResiduals(NamedTuple):
    """Relative residuals of the source-free Maxwell system, each normalized
    by the local sum of term magnitudes."""

    wave: ResidualValues
    gauss: ResidualValues
    faraday: ResidualValues
    ampere: ResidualValues

    def worst(self) -> float:
        return float(max(np.max(v) for eq in self for v in eq))


_TINY = float(np.finfo(float).tiny)


def _relative(parts):
    """ResidualValues of sum(parts) vs. the magnitude scale of the parts,
    for the complex values and both real projections."""
    total = sum(parts)
    out = []
    for take in (np.asarray, np.real, np.imag):
        scale = sum(np.abs(take(p)) for p in parts)
        out.append(np.abs(take(total)) / (scale + _TINY))
    return ResidualValues(*out)


def _vector_relative(term_groups):
    """Like _relative for a vector equation: term_groups is a list of
    (3, ...) arrays whose sum should vanish."""
    total = sum(term_groups)
    out = []
    for take in (np.asarray, np.real, np.imag):
        num = np.sqrt(_vec_norm_sq(np.abs(take(total))))
        scale = sum(np.sqrt(_vec_norm_sq(np.abs(take(g)))) for g in term_groups)
        out.append(num / (scale + _TINY))
    return ResidualValues(*out)


def _second_partials_central(f, coords, step):
    """Value, gradient, and Hessian of f by central differences."""
    coords = [np.asarray(c, dtype=float) for c in coords]
    n = len(coords)
    steps = [step * (1.0 + np.abs(c)) for c in coords]

    def at(offsets):
        pt = [c + o * h for c, o, h in zip(coords, offsets, steps)]
        return f(*pt)

    f0 = at([0] * n)
    grad = []
    hess = [[None] * n for _ in range(n)]
    for i in range(n):
        off = [0] * n
        off[i] = 1
        fp = at(off)
        off[i] = -1
        fm = at(off)
        grad.append((fp - fm) / (2.0 * steps[i]))
        hess[i][i] = (fp - 2.0 * f0 + fm) / steps[i] ** 2
    for i in range(n):
        for j in range(i + 1, n):
            off = [0] * n
            off[i], off[j] = 1, 1
            fpp = at(off)
            off[j] = -1
            fpm = at(off)
            off[i] = -1
            fmm = at(off)
            off[j] = 1
            fmp = at(off)
            hess[i][j] = hess[j][i] = (fpp - fpm - fmp + fmm) / (4.0 * steps[i] * steps[j])
    return f0, grad, hess


def maxwell_residuals_cartesian(params: EdeptParams, t, x, y, z,
                                scheme: DifferentiationScheme = DUAL,
                                constants: PhysicalConstants = NATURAL) -> MaxwellResiduals:
    """Relative Maxwell residuals on broadcast coordinate arrays (rho > 0).

    Checks, on the complex field and each real projection:
      wave:    d^2A/dtau^2 - (lap A_theta - A_theta/rho^2) = 0
      gauss:   div E = 0
      faraday: curl E + dB/dt = 0
      ampere:  c^2 curl B - dE/dt = 0
    """
    t, x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                       for v in (t, x, y, z)))
    rho = np.hypot(x, y)
    if np.any(rho <= 0):
        raise ValueError("Maxwell residuals require rho > 0 (the azimuthal "
                         "wave operator has a removable 1/rho^2 term)")
    c = constants.c
    if scheme.kind is SchemeKind.DUAL_NUMBER:
        tj, xj, yj, zj = Jet2.seed([t, x, y, z])
        h = _h_core(params, c * tj, xj * xj + yj * yj + zj * zj, zj, constants)
        Ax = -yj * h
        Ay = xj * h
        grad = [Ax.d, Ay.d]
        hess = [Ax.h, Ay.h]
        tj2, rj2, zj2 = Jet2.seed([t, rho, z])
        at = rj2 * _h_core(params, c * tj2, rj2 * rj2 + zj2 * zj2, zj2, constants)
        at_val, at_d, at_h = at.val, at.d, at.h
    elif scheme.kind is SchemeKind.CENTRAL_DIFFERENCE:
        step = scheme.step if scheme.step is not None \
            else float(np.finfo(float).eps) ** 0.25

        def comp(which):
            def f(tt, xx, yy, zz):
                with np.errstate(all="ignore"):
                    hh = _h_core(params, c * tt, xx * xx + yy * yy + zz * zz,
                                 zz, constants)
                return -yy * hh if which == 0 else xx * hh
            return f

        _, gx, hx = _second_partials_central(comp(0), (t, x, y, z), step)
        _, gy, hy = _second_partials_central(comp(1), (t, x, y, z), step)
        grad = [gx, gy]
        hess = [hx, hy]

        def f_theta(tt, rr, zz):
            with np.errstate(all="ignore"):
                return rr * _h_core(params, c * tt, rr * rr + zz * zz, zz,
                                    constants)

        at_val, at_d, at_h = _second_partials_central(f_theta, (t, rho, z), step)
    else:
        raise SchemeError("complex-step differentiation applies to real-valued "
                          "maps only; use dual-number or central-difference")

    # indices: 0=t 1=x 2=y 3=z
    wave = _relative([at_h[0][0] / c**2,
                      -at_h[1][1], -at_d[1] / rho, -at_h[2][2], at_val / rho**2])
    gauss = _relative([-hess[0][0][1], -hess[1][0][2]])
    curl_e = np.stack([hess[1][0][3],
                       -hess[0][0][3],
                       -hess[1][0][1] + hess[0][0][2]])
    db_dt = np.stack([-hess[1][0][3],
                      hess[0][0][3],
                      hess[1][0][1] - hess[0][0][2]])
    faraday = _vector_relative([curl_e, db_dt])
    curl_b = np.stack([hess[1][1][2] - hess[0][2][2] - hess[0][3][3],
                       -hess[1][3][3] - hess[1][1][1] + hess[0][1][2],
                       hess[0][1][3] + hess[1][2][3]])
    de_dt = np.stack([-hess[0][0][0], -hess[1][0][0], np.zeros_like(at_val)])
    ampere = _vector_relative([c**2 * curl_b, -de_dt])
    return MaxwellResiduals(wave, gauss, faraday, ampere)


def maxwell_residuals(params: EdeptParams, point: SpacetimePoint,
                      scheme: DifferentiationScheme = DUAL,
                      constants: PhysicalConstants = NATURAL) -> MaxwellResiduals:
    res = maxwell_residuals_cartesian(params, point.t, point.x, point.y,
                                      point.z, scheme, constants)
    return MaxwellResiduals(*(ResidualValues(*(float(v) for v in eq))
                              for eq in res))
