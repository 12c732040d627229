"""Field-level validity checks: Maxwell residuals on random clouds, the
azimuthal structure of the solution, conjugation symmetry, and agreement
between exact and finite-difference derivatives."""

from __future__ import annotations

import numpy as np

from .autodiff import CENTRAL, DUAL, Jet
from .constants import NATURAL, PhysicalConstants
from .fields import (EdeptParams, _h_core, em_fields_cartesian,
                     maxwell_residuals_cartesian, vector_potential_theta)
from .spectrum import CheckResult


def random_cloud(n, r_lo, r_hi, t_span, seed, max_cos_polar=0.999):
    """Log-uniform radii, isotropic directions (poles excluded), uniform times."""
    rng = np.random.default_rng(seed)
    r = np.exp(rng.uniform(np.log(r_lo), np.log(r_hi), n))
    cos_th = rng.uniform(-max_cos_polar, max_cos_polar, n)
    sin_th = np.sqrt(1.0 - cos_th**2)
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    x = r * sin_th * np.cos(phi)
    y = r * sin_th * np.sin(phi)
    z = r * cos_th
    t = rng.uniform(-t_span, t_span, n)
    return t, x, y, z


def maxwell_check(params: EdeptParams, n_points=1000, seed=20260810,
                  r_lo=1e-2, r_hi=1e3, scheme=DUAL,
                  constants: PhysicalConstants = NATURAL):
    """Worst relative Maxwell residual per equation over a random cloud."""
    s = params.length_scale
    t, x, y, z = random_cloud(n_points, r_lo * s, r_hi * s,
                              2.0 * s / constants.c, seed)
    res = maxwell_residuals_cartesian(params, t, x, y, z, scheme, constants)
    return {
        "wave": float(np.max(res.wave)),
        "gauss": float(np.max(res.gauss)),
        "faraday": float(np.max(res.faraday)),
        "ampere": float(np.max(res.ampere)),
    }


def azimuthal_structure_check(params: EdeptParams, n_points=300,
                              seed=20260810,
                              constants: PhysicalConstants = NATURAL) -> float:
    """Max cylindrical-frame component that should vanish: A_rho, A_z,
    E_rho, E_z, B_theta, relative to the local vector magnitude."""
    t, x, y, z = random_cloud(n_points, 1e-2 * params.length_scale,
                              50.0 * params.length_scale,
                              2.0 * params.length_scale / constants.c, seed)
    A, E, B = em_fields_cartesian(params, t, x, y, z, constants=constants)
    rho = np.hypot(x, y)
    cos_t, sin_t = x / rho, y / rho
    worst = 0.0
    tiny = np.finfo(float).tiny
    for vec, forbidden in ((A, "rho_z"), (E, "rho_z"), (B, "theta")):
        mag = np.sqrt(np.sum(np.abs(vec) ** 2, axis=0)) + tiny
        if forbidden == "rho_z":
            bad = np.maximum(np.abs(vec[0] * cos_t + vec[1] * sin_t),
                             np.abs(vec[2]))
        else:
            bad = np.abs(-vec[0] * sin_t + vec[1] * cos_t)
        worst = max(worst, float(np.max(bad / mag)))
    return worst


def conjugation_symmetry_check(params: EdeptParams, n_points=1000,
                               seed=20260810,
                               constants: PhysicalConstants = NATURAL) -> float:
    """Max relative violation of A(tau,rho,z)* == A(-tau,rho,-z)."""
    rng = np.random.default_rng(seed)
    s = params.length_scale
    tau = rng.uniform(-3 * s, 3 * s, n_points)
    rho = np.exp(rng.uniform(np.log(1e-3 * s), np.log(1e2 * s), n_points))
    z = rng.uniform(-50 * s, 50 * s, n_points)
    a = vector_potential_theta(params, tau, rho, z, constants)
    b = vector_potential_theta(params, -tau, rho, -z, constants)
    scale = np.abs(a) + np.finfo(float).tiny
    return float(np.max(np.abs(np.conj(a) - b) / scale))


def derivative_agreement_check(params: EdeptParams, n_points=200,
                               seed=20260810,
                               constants: PhysicalConstants = NATURAL) -> float:
    """Max relative disagreement between dual-number and central-difference
    first derivatives of A_theta in tau, rho, and z."""
    rng = np.random.default_rng(seed)
    s = params.length_scale
    tau = rng.uniform(-2 * s, 2 * s, n_points)
    rho = np.exp(rng.uniform(np.log(0.1 * s), np.log(20 * s), n_points))
    z = rng.uniform(-20 * s, 20 * s, n_points)

    def a_of(*coords):
        with np.errstate(all="ignore"):
            return coords[1] * _h_core(params, coords[0],
                                       coords[1] ** 2 + coords[2] ** 2,
                                       coords[2], constants)

    worst = 0.0
    coords = [tau, rho, z]
    for i in range(3):
        jets = list(coords)
        (jets[i],) = Jet.seed([coords[i]])
        exact = a_of(*jets).d[0]
        h = CENTRAL.resolved_step(coords[i])
        up = list(coords)
        dn = list(coords)
        up[i] = coords[i] + h
        dn[i] = coords[i] - h
        approx = (a_of(*up) - a_of(*dn)) / (2 * h)
        scale = np.abs(exact) + np.finfo(float).eps
        worst = max(worst, float(np.max(np.abs(approx - exact) / scale)))
    return worst


def field_checks(params: EdeptParams, tolerances: dict, seed=20260810,
                 n_points=1000,
                 constants: PhysicalConstants = NATURAL) -> list[CheckResult]:
    """CheckResult battery for the closed-form field engine."""
    checks = []
    residuals = maxwell_check(params, n_points, seed, constants=constants)
    tol = tolerances.get("maxwell_residual", 1e-8)
    for eq, value in residuals.items():
        checks.append(CheckResult(f"maxwell_{eq}", value, tol, value <= tol))
    v = azimuthal_structure_check(params, seed=seed, constants=constants)
    tol = tolerances.get("azimuthal_structure", 1e-12)
    checks.append(CheckResult("azimuthal_structure", v, tol, v <= tol))
    v = conjugation_symmetry_check(params, n_points, seed, constants)
    tol = tolerances.get("conjugation_symmetry", 1e-12)
    checks.append(CheckResult("conjugation_symmetry", v, tol, v <= tol))
    v = derivative_agreement_check(params, seed=seed, constants=constants)
    tol = tolerances.get("derivative_agreement", 1e-5)
    checks.append(CheckResult("derivative_agreement", v, tol, v <= tol))
    return checks
