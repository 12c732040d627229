"""Momentum-space photon state built from the classical pulse.

Conventions, fixed once and locked by the acceptance suite (the literature
leaves the real-field Fourier normalization ambiguous):

    real field      X(t,r) = 2 Re int d3k/(2pi)^3 X~(k) exp(-i(w t - k.r))
    extraction      X~(k)  = [X^(k) + (i/w) (dX/dt)^(k)] / 2   on a Cauchy slice
    photon state    f_lam(k) = sqrt(eps0 w / hbar) * eps_lam*(k) . A~(k)
    norm            <phi|phi> = sum_lam int d3k/(2pi)^3 |f_lam|^2
    spectral energy E = 2 eps0 int d3k/(2pi)^3 w^2 |A~(k)|^2   (= position-space energy)

Azimuthal fields occupy only the m = +-1 angular sectors, so the 3D
transform reduces to an order-1 Hankel transform in rho times a 1D Fourier
transform in z; axial (z) components occupy m = 0 and use order 0.  A vector
field is stored as sector coefficients (c_plus, c_minus, c_z) defined by

    V~_x +- i V~_y = c_pm(k_rho, k_z) exp(+- i theta_k),    V~_z = c_z,

from which the in-plane radial component is (c_+ + c_-)/2 and the azimuthal
component is (c_+ - c_-)/(2i).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import j1

from .autodiff import Jet, Jet2
from .constants import NATURAL, PhysicalConstants
from .fields import (Branch, EdeptParams, _h_core, _POSITIVE_FREQUENCY_PHASE,
                     branch_project, em_fields_cartesian)
from .grids import CylGrid, integrate_cylindrical
from .transforms import fourier_matrix, hankel_matrix, tail_fraction


class TransversalityError(RuntimeError):
    """The spectral amplitude has a longitudinal component above tolerance."""

    def __init__(self, residual, k_rho, k_z):
        super().__init__(f"transversality residual {residual:.3e} at "
                         f"(k_rho={k_rho:.4g}, k_z={k_z:.4g})")
        self.residual = residual
        self.k_rho = k_rho
        self.k_z = k_z


@dataclass(frozen=True)
class ModeGrid:
    """Cylindrical momentum grid for the m = +-1 sectors.

    `k_rho_weights` absorb the k_rho Jacobian; the full measure of an
    azimuthally invariant integrand is
        int d3k/(2pi)^3 F = (1/(2pi)^2) sum_ij W_i V_j F_ij.
    The k_rho nodes start strictly above zero, excluding the zero mode.
    """

    k_rho: np.ndarray
    k_z: np.ndarray
    k_rho_weights: np.ndarray
    k_z_weights: np.ndarray

    def __post_init__(self):
        if self.k_rho[0] <= 0:
            raise ValueError("k_rho nodes must exclude the zero mode")
        if np.any(np.diff(self.k_rho) <= 0) or np.any(np.diff(self.k_z) <= 0):
            raise ValueError("mode nodes must be strictly increasing")
        if np.any(self.k_rho_weights <= 0) or np.any(self.k_z_weights <= 0):
            raise ValueError("mode weights must be positive")

    @classmethod
    def build(cls, k_max=14.0, n_k_rho=200, n_k_z=401):
        dk = k_max / n_k_rho
        k_rho = dk * np.arange(1, n_k_rho + 1)
        w = np.full(n_k_rho, dk)
        w[-1] = 0.5 * dk  # trapezoid closed at the (weightless) k_rho = 0 node
        k_z = np.linspace(-k_max, k_max, n_k_z)
        wz = np.full(n_k_z, k_z[1] - k_z[0])
        wz[0] = wz[-1] = 0.5 * (k_z[1] - k_z[0])
        return cls(k_rho, k_z, w * k_rho, wz)

    @property
    def k_max(self):
        return float(self.k_rho[-1])

    @property
    def shape(self):
        return (self.k_rho.size, self.k_z.size)

    def omega(self, constants: PhysicalConstants = NATURAL) -> np.ndarray:
        return constants.c * np.sqrt(self.k_rho[:, None] ** 2
                                     + self.k_z[None, :] ** 2)

    def measure(self) -> np.ndarray:
        """2D weights; (1/(2pi)^2) sum(measure * F) = int d3k/(2pi)^3 F."""
        return self.k_rho_weights[:, None] * self.k_z_weights[None, :]

    def doubled(self) -> "ModeGrid":
        return ModeGrid.build(self.k_max, 2 * self.k_rho.size,
                              2 * (self.k_z.size - 1) + 1)


def polarization_basis(k, axis=None):
    """Helicity unit vectors (eps_plus, eps_minus) for wavevectors k (..., 3).

    Convention: e1 = (axis x khat)/|axis x khat|, e2 = khat x e1,
    eps_pm = (e1 +- i e2)/sqrt(2).  On the seam khat || +-axis the anchor is
    (x^ +- i y^)/sqrt(2) at +axis and its parity image (x^ -+ i y^)/sqrt(2)
    at -axis (for axis = z; general axes use an analogous fixed pair).
    """
    k = np.asarray(k, dtype=float)
    if axis is None:
        axis = np.array([0.0, 0.0, 1.0])
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    norm = np.linalg.norm(k, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise ValueError("polarization basis undefined at k = 0")
    khat = k / norm
    e1 = np.cross(np.broadcast_to(axis, khat.shape), khat)
    s = np.linalg.norm(e1, axis=-1, keepdims=True)
    seam = s[..., 0] < 1e-12
    safe = np.where(s > 0, s, 1.0)
    e1 = e1 / safe
    e2 = np.cross(khat, e1)
    if np.any(seam):
        # fixed transverse pair orthogonal to the axis
        trial = np.array([1.0, 0.0, 0.0])
        if abs(trial @ axis) > 0.9:
            trial = np.array([0.0, 1.0, 0.0])
        u = trial - (trial @ axis) * axis
        u = u / np.linalg.norm(u)
        v = np.cross(axis, u)
        sign = np.sign(np.sum(khat * axis, axis=-1))[..., None]
        e1 = np.where(seam[..., None], u, e1)
        e2 = np.where(seam[..., None], sign * v, e2)
    eps_plus = (e1 + 1j * e2) / np.sqrt(2.0)
    eps_minus = (e1 - 1j * e2) / np.sqrt(2.0)
    return eps_plus, eps_minus


def project_helicity(vec, k, axis=None):
    """Helicity components (a_plus, a_minus) of transverse vectors vec (..., 3)."""
    eps_p, eps_m = polarization_basis(k, axis)
    return (np.sum(np.conj(eps_p) * vec, axis=-1),
            np.sum(np.conj(eps_m) * vec, axis=-1))


@dataclass
class SpectralAmplitude:
    """Transverse momentum-space amplitude on a mode grid, stored per
    azimuthal sector.

    For a purely azimuthal position-space field the two sectors are exact
    negatives of one another; both are carried so that downstream checks and
    exports treat them independently.
    """

    modes: ModeGrid
    c_plus: np.ndarray
    c_minus: np.ndarray
    c_z: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def inplane_radial(self) -> np.ndarray:
        return 0.5 * (self.c_plus + self.c_minus)

    def azimuthal(self) -> np.ndarray:
        return (self.c_plus - self.c_minus) / 2j

    def axial(self) -> np.ndarray:
        if self.c_z is None:
            return np.zeros_like(self.c_plus)
        return self.c_z

    def vector_at_zero_azimuth(self) -> np.ndarray:
        """Cartesian (..., 3) amplitude at theta_k = 0 (khat in the xz plane)."""
        ax = 0.5 * (self.c_plus + self.c_minus)
        ay = (self.c_plus - self.c_minus) / 2j
        return np.stack([ax, ay, self.axial()], axis=-1)

    def magnitude_sq(self) -> np.ndarray:
        return (0.5 * (np.abs(self.c_plus) ** 2 + np.abs(self.c_minus) ** 2)
                + np.abs(self.axial()) ** 2)

    def transversality_residuals(self, floor_rel=1e-8) -> np.ndarray:
        """|khat . V~| / |V~| where |V~| exceeds floor_rel * max |V~|; 0 below."""
        kr = self.modes.k_rho[:, None]
        kz = self.modes.k_z[None, :]
        k = np.sqrt(kr**2 + kz**2)
        longitudinal = np.abs(kr * self.inplane_radial() + kz * self.axial()) / k
        mag = np.sqrt(self.magnitude_sq())
        floor = floor_rel * mag.max()
        return np.where(mag > floor, longitudinal / np.maximum(mag, floor), 0.0)

    def transversality_max(self, floor_rel=1e-8) -> float:
        return float(self.transversality_residuals(floor_rel).max())


@dataclass(frozen=True)
class TransformSettings:
    """Controls for the position-space transform grid feeding the extraction."""

    samples_per_period: float = 8.0   # grid points per shortest kernel period
    tail_rel: float = 1e-6           # envelope level that sets the extent
    min_extent: float = 30.0
    max_extent: float = 240.0
    tail_fail: float = 1e-3          # hard error threshold at the grid edge
    chunk_rows: int = 128


DEFAULT_TRANSFORM = TransformSettings()


def transform_extent(params: EdeptParams, t0: float,
                     settings: TransformSettings = DEFAULT_TRANSFORM,
                     constants: PhysicalConstants = NATURAL) -> float:
    """Radial extent at which the projected potential drops below tail_rel."""
    scale = params.length_scale
    radii = np.geomspace(0.5 * scale, settings.max_extent * scale, 160)
    tau = constants.c * t0
    best = np.zeros_like(radii)
    for ang in (np.pi / 2, np.pi / 4, 3 * np.pi / 4):
        rho, zz = radii * np.sin(ang), radii * np.cos(ang)
        with np.errstate(all="ignore"):
            vals = np.abs(branch_project(
                rho * _h_core(params, tau, rho**2 + zz**2, zz, constants),
                params.branch))
        best = np.maximum(best, vals)
    peak = best.max()
    below = np.nonzero(best < settings.tail_rel * peak)[0]
    idx = below[0] if below.size else radii.size - 1
    extent = max(settings.min_extent * scale, float(radii[idx]),
                 constants.c * abs(t0) + 4.0 * scale)
    return min(extent, settings.max_extent * scale)


def transform_grid_for(params: EdeptParams, t0: float, modes: ModeGrid,
                       settings: TransformSettings = DEFAULT_TRANSFORM,
                       constants: PhysicalConstants = NATURAL) -> CylGrid:
    """Linear (rho, z) grid resolving the oscillatory kernels up to modes.k_max."""
    spacing = (2 * np.pi / modes.k_max) / settings.samples_per_period
    extent = transform_extent(params, t0, settings, constants)
    n_rho = int(np.ceil(extent / spacing))
    n_z = 2 * n_rho + 1
    return CylGrid.linear_rho(n_rho * spacing, n_rho, n_rho * spacing, n_z)


def _cauchy_slice(params: EdeptParams, t0: float, grid: CylGrid,
                  settings: TransformSettings,
                  constants: PhysicalConstants) -> dict[str, np.ndarray]:
    """Branch-projected A_theta and E_theta on the grid (chunked evaluation)."""
    n_rho, n_z = grid.n_rho, grid.n_z
    out = {"A": np.empty((n_rho, n_z)), "E": np.empty((n_rho, n_z))}
    zrow = grid.z[None, :]
    for lo in range(0, n_rho, settings.chunk_rows):
        hi = min(lo + settings.chunk_rows, n_rho)
        rho = grid.rho[lo:hi, None]
        (tj,) = Jet.seed([t0])
        with np.errstate(all="ignore"):
            h = _h_core(params, constants.c * tj, rho * rho + zrow * zrow,
                        zrow, constants)
        out["A"][lo:hi] = branch_project(rho * h.val, params.branch)
        out["E"][lo:hi] = branch_project(-rho * h.d[0], params.branch)
    for name, vals in out.items():
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError(f"non-finite {name} samples on transform grid")
    return out


def _cauchy_slice_full(params: EdeptParams, t0: float, grid: CylGrid,
                       settings: TransformSettings,
                       constants: PhysicalConstants):
    """Cauchy data for A, E, B and the time derivatives of E and B, plus the
    on-axis limits of the axial components (quadrature endpoint correction)."""
    n_rho, n_z = grid.n_rho, grid.n_z
    names = ("A", "E", "dtE", "Brho", "dtBrho", "Bz", "dtBz")
    out = {n: np.empty((n_rho, n_z)) for n in names}
    c = constants.c
    proj = lambda v: branch_project(v, params.branch)
    for lo in range(0, n_rho, settings.chunk_rows):
        hi = min(lo + settings.chunk_rows, n_rho)
        rho = grid.rho[lo:hi, None]
        tj, rj, zj = Jet2.seed([t0, rho, grid.z[None, :]])
        with np.errstate(all="ignore"):
            a = rj * _h_core(params, c * tj, rj * rj + zj * zj, zj, constants)
        out["A"][lo:hi] = proj(a.val)
        out["E"][lo:hi] = proj(-a.d[0])
        out["dtE"][lo:hi] = proj(-a.h[0][0])
        out["Brho"][lo:hi] = proj(-a.d[2])
        out["dtBrho"][lo:hi] = proj(-a.h[0][2])
        out["Bz"][lo:hi] = proj(a.val / rho + a.d[1])
        out["dtBz"][lo:hi] = proj(a.d[0] / rho + a.h[0][1])
    # rho -> 0 limits: B_z = 2 h, dB_z/dt = 2 dh/dt
    (tj,) = Jet.seed([t0])
    with np.errstate(all="ignore"):
        h_axis = _h_core(params, c * tj, grid.z * grid.z, grid.z, constants)
    axis = {"Bz": proj(2.0 * h_axis.val), "dtBz": proj(2.0 * h_axis.d[0])}
    return out, axis


def _sector_transform_stage(samples_by_name: dict[str, np.ndarray],
                            grid: CylGrid, modes: ModeGrid,
                            orders: dict[str, int],
                            axis_samples: dict[str, np.ndarray] | None = None
                            ) -> dict[str, np.ndarray]:
    """2 pi * (Hankel_order x Fourier_z) of each named scalar on the grid.

    Order-0 radial integrands do not vanish at rho = 0, leaving the composite
    trapezoid an O(spacing^2) Euler-Maclaurin boundary term (d^2/12) g'(0)
    with g'(0) = f(0); callers supply the axis limits in `axis_samples` and
    the correction is added (order-1 integrands vanish quadratically, no term).
    """
    fz = fourier_matrix(grid, modes.k_z)
    g_stage = {name: samples @ fz for name, samples in samples_by_name.items()}
    mats = {order: 2.0 * np.pi * hankel_matrix(grid, modes.k_rho, order=order)
            for order in set(orders.values())}
    out = {name: mats[orders[name]] @ g for name, g in g_stage.items()}
    if axis_samples:
        spacing = grid.rho[1] - grid.rho[0]
        for name, axis_vals in axis_samples.items():
            if orders.get(name) == 0:
                out[name] += 2.0 * np.pi * spacing**2 / 12.0 * (axis_vals @ fz)
    return out


def _extract(value_hat, dt_value_hat, omega):
    """Positive-frequency amplitude from transformed Cauchy data."""
    return 0.5 * (value_hat + 1j / omega * dt_value_hat)


def _ir_norm_bound(s_tilde, modes, constants):
    """Upper bound on the norm contribution of the excluded k < k_min ball."""
    k_min = float(modes.k_rho[0])
    edge = np.abs(s_tilde[0]).max()
    return float(constants.eps0 / constants.hbar * np.sqrt(2.0)
                 * k_min**4 * edge**2 / (2 * np.pi) ** 2)


def positive_frequency_spectrum(params: EdeptParams, t0: float,
                                modes: ModeGrid,
                                settings: TransformSettings = DEFAULT_TRANSFORM,
                                constants: PhysicalConstants = NATURAL,
                                grid: CylGrid | None = None,
                                cauchy: dict[str, np.ndarray] | None = None) -> SpectralAmplitude:
    """Positive-frequency transverse amplitude A~(k) of the branch-projected
    real potential at time slice t0.

    The amplitude is extracted from the Cauchy pair (A, dA/dt = -E) so that
    the real field equals 2 Re int d3k/(2pi)^3 A~ exp(-i(w t - k.r)).
    """
    if params.branch is Branch.ANALYTIC:
        raise ValueError("positive-frequency extraction needs a real solution; "
                         "use the real or imag branch")
    if grid is None:
        grid = transform_grid_for(params, t0, modes, settings, constants)
    if cauchy is None:
        cauchy = _cauchy_slice(params, t0, grid, settings, constants)
    tails = {name: max(tail_fraction(vals, last_axis_edges=("low", "high")),
                       tail_fraction(vals.T, last_axis_edges=("high",)))
             for name, vals in cauchy.items() if name in ("A", "E")}
    worst_tail = max(tails.values())
    if worst_tail > settings.tail_fail:
        raise FloatingPointError(
            f"transform-grid edge samples at {worst_tail:.2e} of peak; "
            "extent too small for this pulse")
    stage = _sector_transform_stage({k: cauchy[k] for k in ("A", "E")},
                                    grid, modes, {"A": 1, "E": 1})
    omega = modes.omega(constants)
    s_tilde = _extract(stage["A"], -stage["E"], omega)  # dA/dt = -E
    meta = {
        "t0": t0,
        "alpha": params.alpha,
        "branch": params.branch.value,
        "field": "vector_potential",
        "grid_extent": float(grid.rho[-1]),
        "grid_shape": (grid.n_rho, grid.n_z),
        "k_min": float(modes.k_rho[0]),
        "zero_mode": "excluded below k_min; bound reported",
        "ir_norm_bound": _ir_norm_bound(s_tilde, modes, constants),
        "tail_fractions": tails,
    }
    return SpectralAmplitude(modes, c_plus=s_tilde, c_minus=-s_tilde, meta=meta)


@dataclass
class HelicityAmplitudes:
    """Photon momentum amplitudes f_{+1}, f_{-1} with cached functionals."""

    modes: ModeGrid
    f_plus: np.ndarray
    f_minus: np.ndarray
    norm: float
    spectral_energy: float
    meta: dict = field(default_factory=dict)

    def helicity_shares(self) -> tuple[float, float]:
        """Fractions of the norm carried by each helicity."""
        mu = self.modes.measure()
        p = float(np.sum(mu * np.abs(self.f_plus) ** 2))
        m = float(np.sum(mu * np.abs(self.f_minus) ** 2))
        tot = p + m
        return (p / tot, m / tot) if tot > 0 else (0.0, 0.0)


def norm_and_energy(f_plus, f_minus, modes: ModeGrid,
                    constants: PhysicalConstants = NATURAL) -> tuple[float, float]:
    """Photon norm and total spectral energy from helicity amplitudes.

    norm = sum_lam int d3k/(2pi)^3 |f_lam|^2; the energy uses the locked
    factor 2 eps0 w^2 |A~|^2 = 2 hbar w sum_lam |f_lam|^2.
    """
    mu = modes.measure() / (2 * np.pi) ** 2
    dens = np.abs(f_plus) ** 2 + np.abs(f_minus) ** 2
    omega = modes.omega(constants)
    norm = float(np.sum(mu * dens))
    energy = float(2.0 * constants.hbar * np.sum(mu * omega * dens))
    if not (np.isfinite(norm) and np.isfinite(energy)):
        raise FloatingPointError("non-finite norm or spectral energy")
    return norm, energy


def helicity_amplitudes(spec: SpectralAmplitude,
                        constants: PhysicalConstants = NATURAL,
                        transversality_tol: float = 1e-6,
                        basis_axis=None) -> HelicityAmplitudes:
    """Project the transverse amplitude onto the helicity basis and attach
    the norm and spectral-energy functionals.

    Raises TransversalityError if any node with non-negligible amplitude has
    a longitudinal component above tolerance.
    """
    res = spec.transversality_residuals()
    worst = np.unravel_index(np.argmax(res), res.shape)
    if res[worst] > transversality_tol:
        raise TransversalityError(float(res[worst]),
                                  spec.modes.k_rho[worst[0]],
                                  spec.modes.k_z[worst[1]])
    kr = spec.modes.k_rho[:, None]
    kz = spec.modes.k_z[None, :]
    shape = spec.modes.shape
    kvec = np.empty(shape + (3,))
    kvec[..., 0] = np.broadcast_to(kr, shape)
    kvec[..., 1] = 0.0
    kvec[..., 2] = np.broadcast_to(kz, shape)
    vec = spec.vector_at_zero_azimuth()
    a_plus, a_minus = project_helicity(vec, kvec, axis=basis_axis)
    omega = spec.modes.omega(constants)
    root = np.sqrt(constants.eps0 * omega / constants.hbar)
    f_plus = root * a_plus
    f_minus = root * a_minus
    norm, energy = norm_and_energy(f_plus, f_minus, spec.modes, constants)
    meta = dict(spec.meta)
    meta["transversality_max"] = float(res[worst])
    return HelicityAmplitudes(spec.modes, f_plus, f_minus, norm, energy, meta)


def reconstruction_residual(hel: HelicityAmplitudes, spec: SpectralAmplitude,
                            constants: PhysicalConstants = NATURAL,
                            basis_axis=None) -> float:
    """Max deviation of sum_lam A~_lam eps_lam from the transverse part of A~,
    relative to the peak amplitude (basis-completeness identity)."""
    kr = spec.modes.k_rho[:, None]
    kz = spec.modes.k_z[None, :]
    shape = spec.modes.shape
    kvec = np.empty(shape + (3,))
    kvec[..., 0] = np.broadcast_to(kr, shape)
    kvec[..., 1] = 0.0
    kvec[..., 2] = np.broadcast_to(kz, shape)
    eps_p, eps_m = polarization_basis(kvec, axis=basis_axis)
    omega = spec.modes.omega(constants)
    back = np.sqrt(constants.hbar / (constants.eps0 * omega))
    rebuilt = (back * hel.f_plus)[..., None] * eps_p \
        + (back * hel.f_minus)[..., None] * eps_m
    vec = spec.vector_at_zero_azimuth()
    khat = kvec / np.linalg.norm(kvec, axis=-1, keepdims=True)
    transverse = vec - khat * np.sum(khat * vec, axis=-1, keepdims=True)
    num = np.abs(rebuilt - transverse).max()
    return float(num / (np.abs(vec).max() + np.finfo(float).tiny))


def _reconstruct(coef, modes: ModeGrid, t, rho, z, omega, chunk=1024):
    """sum over modes of coef * J1(k_rho rho) exp(i k_z z) exp(-i w t) / (2pi)^2."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    m = coef * np.exp(-1j * omega * t) * modes.measure()
    out = np.empty(rho.shape, dtype=complex)
    for lo in range(0, rho.size, chunk):
        hi = min(lo + chunk, rho.size)
        jp = j1(np.outer(rho[lo:hi], modes.k_rho))
        ez = np.exp(1j * np.outer(z[lo:hi], modes.k_z))
        out[lo:hi] = np.einsum("pi,ij,pj->p", jp, m, ez, optimize=True)
    return out / (2 * np.pi) ** 2


def evolve_reconstruct(spec: SpectralAmplitude, t, rho, z,
                       constants: PhysicalConstants = NATURAL) -> np.ndarray:
    """Real azimuthal field at time t rebuilt from the extracted spectrum."""
    omega = spec.modes.omega(constants)
    coef = 1j * spec.azimuthal()  # A~ = -i S e_theta  =>  S = i * azimuthal coef
    return 2.0 * np.real(_reconstruct(coef, spec.modes, t, rho, z, omega))


def reconstruct_positive_frequency_e(spec: SpectralAmplitude, t, rho, z,
                                     constants: PhysicalConstants = NATURAL) -> np.ndarray:
    """Complex positive-frequency azimuthal electric field E+ at time t."""
    omega = spec.modes.omega(constants)
    coef = 1j * omega * (1j * spec.azimuthal())
    return _reconstruct(coef, spec.modes, t, rho, z, omega)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float | None
    passed: bool
    info_only: bool = False

    def line(self) -> str:
        status = "INFO" if self.info_only else ("PASS" if self.passed else "FAIL")
        tol = "" if self.tolerance is None else f" (tol {self.tolerance:.2e})"
        return f"{status:4s} {self.name}: {self.value:.6e}{tol}"


# The relation tolerances come from a grid-resolution study: the residual is
# limited by the position-domain truncation of the potential's r^-3 tail and
# falls off ~ extent^-3/2 (2.2e-4 at extent 150, 1.2e-4 at 225, 8e-5 at 300,
# resolution-independent once the endpoint-corrected trapezoid resolves the
# kernels).  The defaults leave ~2x margin at the default validation extent.
DEFAULT_VALIDATION_TOLERANCES = {
    "transversality": 1e-6,
    "e_relation": 2.5e-4,
    "b_relation": 2.5e-4,
    "roundtrip_t0": 1e-3,
    "roundtrip_t1": 1e-3,
    "parseval": 1e-2,
    "norm_doubling": 5e-3,
}


@dataclass
class SpectrumValidationReport:
    """Outcome of the spectral validity suite; failures are reported, not raised."""

    checks: list[CheckResult]
    norm: float
    spectral_energy: float
    position_energy: float
    helicity_shares: tuple[float, float]
    t0: float
    t1: float
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.info_only)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "t0": self.t0,
            "t1": self.t1,
            "norm": self.norm,
            "spectral_energy": self.spectral_energy,
            "position_energy": self.position_energy,
            "helicity_shares": list(self.helicity_shares),
            "checks": [{"name": c.name, "value": c.value,
                        "tolerance": c.tolerance, "passed": c.passed,
                        "info_only": c.info_only} for c in self.checks],
            "meta": self.meta,
        }


def position_energy_grid(params: EdeptParams,
                         constants: PhysicalConstants = NATURAL,
                         n_rho=800, n_z=8001) -> CylGrid:
    """Log-rho grid spanning [1e-3, 1e3] * length scale for energy integrals.

    The z resolution must resolve the unit-scale pulse core, not just its
    power-law tail; the default keeps dz = 0.25 * length scale.
    """
    s = params.length_scale
    return CylGrid.log_rho(1e-3 * s, 1e3 * s, n_rho, 1e3 * s, n_z)


def position_space_energy(params: EdeptParams, t: float,
                          constants: PhysicalConstants = NATURAL,
                          grid: CylGrid | None = None,
                          chunk_rows: int = 128) -> float:
    """Total field energy: 2 pi iint u_total(rho, z) rho drho dz at time t."""
    if grid is None:
        grid = position_energy_grid(params, constants)
    c = constants.c
    u = np.empty((grid.n_rho, grid.n_z))
    zrow = grid.z[None, :]
    for lo in range(0, grid.n_rho, chunk_rows):
        hi = min(lo + chunk_rows, grid.n_rho)
        rho = grid.rho[lo:hi, None]
        tj, rj, zj = Jet.seed([float(t), rho, zrow])
        with np.errstate(all="ignore"):
            a = rj * _h_core(params, c * tj, rj * rj + zj * zj, zj, constants)
        proj = lambda v: branch_project(v, params.branch)
        e_th = proj(-a.d[0])
        b_rho = proj(-a.d[2])
        b_z = proj(a.val / rho + a.d[1])
        u[lo:hi] = (0.5 * constants.eps0 * e_th**2
                    + 0.5 * constants.eps0 * c**2 * (b_rho**2 + b_z**2))
    return integrate_cylindrical(u, grid)


def _roundtrip_cloud(params: EdeptParams, t1: float, n_points: int, seed: int,
                     constants: PhysicalConstants):
    """Random (rho, z) cloud covering the pulse at times 0..t1."""
    s = params.length_scale
    rng = np.random.default_rng(seed)
    rho = rng.uniform(0.05 * s, 6.0 * s, n_points)
    z = rng.uniform(-3.0 * s, constants.c * t1 + 3.0 * s, n_points)
    return rho, z


def validate_spectrum(params: EdeptParams, t0: float = 0.0,
                      modes: ModeGrid | None = None,
                      settings: TransformSettings = DEFAULT_TRANSFORM,
                      tolerances: dict | None = None,
                      constants: PhysicalConstants = NATURAL,
                      t1: float | None = None,
                      n_cloud: int = 1000,
                      seed: int = 20260810,
                      position_grid: CylGrid | None = None) -> SpectrumValidationReport:
    """Run the spectral validity suite for one time slice.

    Covers: transversality of A~; the spectral field relations E~ = i w A~
    and c B~ = i w khat x A~ with independently extracted E~ and B~;
    round-trip reconstruction at t0 and at t1; Parseval against the
    position-space energy; norm convergence under mode-grid doubling; and the
    relation between the complex closed form and the analytic signal
    (detection-rate identification), which is reported rather than asserted.
    """
    tol = dict(DEFAULT_VALIDATION_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    if modes is None:
        modes = ModeGrid.build()
    if t1 is None:
        t1 = t0 + 2.0 * params.g1 / constants.c
    grid = transform_grid_for(params, t0, modes, settings, constants)
    cauchy = _cauchy_slice(params, t0, grid, settings, constants)
    stage = _sector_transform_stage(cauchy, grid, modes, {"A": 1, "E": 1})
    omega = modes.omega(constants)
    s_a = _extract(stage["A"], -stage["E"], omega)
    spec = SpectralAmplitude(modes, c_plus=s_a, c_minus=-s_a,
                             meta={"t0": t0, "branch": params.branch.value,
                                   "alpha": params.alpha,
                                   "k_min": float(modes.k_rho[0]),
                                   "ir_norm_bound": _ir_norm_bound(s_a, modes, constants),
                                   "grid_extent": float(grid.rho[-1]),
                                   "grid_shape": (grid.n_rho, grid.n_z)})
    hel = helicity_amplitudes(spec, constants, transversality_tol=np.inf)
    mu = modes.measure()

    checks = []

    def add(name, value, key=None, info=False):
        checks.append(CheckResult(name, float(value),
                                  None if key is None else tol[key],
                                  True if key is None else float(value) <= tol[key],
                                  info_only=info))

    add("transversality_max", spec.transversality_max(), "transversality")
    add("basis_completeness", reconstruction_residual(hel, spec, constants),
        "transversality")

    # Spectral relations with independently extracted E~ and B~.  These are
    # relative, k-local identities, so they run on the resolved band (k up to
    # relation_k_max carries all but ~e^-16 of the spectral energy) with a
    # larger spatial extent: the residual floor is set by the domain
    # truncation of the slowest position-space tail, falling off ~ R^-3/2.
    # Residuals are energy-weighted and masked to nodes whose expected-side
    # magnitude is within `signal_floor` of its peak; below that the true
    # amplitude sits under the quadrature floor and would only compare noise.
    signal_floor = 1e-3
    relation_k_max = min(7.0, modes.k_max)
    rel_modes = ModeGrid.build(relation_k_max,
                               max(16, int(modes.k_rho.size * relation_k_max
                                           / modes.k_max)),
                               2 * max(16, int(modes.k_z.size // 2
                                               * relation_k_max / modes.k_max)) + 1)
    rel_settings = TransformSettings(
        samples_per_period=14.0,
        tail_rel=settings.tail_rel,
        min_extent=1.5 * transform_extent(params, t0, settings, constants)
        / params.length_scale,
        max_extent=2.0 * settings.max_extent,
        chunk_rows=settings.chunk_rows)
    rel_grid = transform_grid_for(params, t0, rel_modes, rel_settings, constants)
    rel_cauchy, rel_axis = _cauchy_slice_full(params, t0, rel_grid,
                                              rel_settings, constants)
    rel_stage = _sector_transform_stage(
        rel_cauchy, rel_grid, rel_modes,
        {"A": 1, "E": 1, "dtE": 1, "Brho": 1, "dtBrho": 1, "Bz": 0, "dtBz": 0},
        axis_samples=rel_axis)
    rel_omega = rel_modes.omega(constants)
    rel_mu = rel_modes.measure()
    rel_s_a = _extract(rel_stage["A"], -rel_stage["E"], rel_omega)
    e_tilde = _extract(rel_stage["E"], rel_stage["dtE"], rel_omega)
    e_expected = 1j * rel_omega * rel_s_a
    e_mask = np.abs(e_expected) >= signal_floor * np.abs(e_expected).max()
    e_num = rel_mu * np.abs(e_tilde - e_expected) ** 2
    e_den = rel_mu * np.abs(e_expected) ** 2
    add("e_relation_residual",
        np.sqrt(np.sum(e_num[e_mask]) / np.sum(e_den[e_mask])), "e_relation")
    add("e_relation_residual_unmasked",
        np.sqrt(np.sum(e_num) / np.sum(e_den)), info=True)
    b_rho_tilde = -1j * _extract(rel_stage["Brho"], rel_stage["dtBrho"], rel_omega)
    b_z_tilde = _extract(rel_stage["Bz"], rel_stage["dtBz"], rel_omega)
    kr = rel_modes.k_rho[:, None]
    kz = rel_modes.k_z[None, :]
    b_expected_mag = (rel_omega / constants.c) * np.abs(rel_s_a)
    b_mask = b_expected_mag >= signal_floor * b_expected_mag.max()
    b_num = rel_mu * (np.abs(b_rho_tilde + kz * rel_s_a) ** 2
                      + np.abs(b_z_tilde - kr * rel_s_a) ** 2)
    b_den = rel_mu * b_expected_mag**2
    add("b_relation_residual",
        np.sqrt(np.sum(b_num[b_mask]) / np.sum(b_den[b_mask])), "b_relation")
    add("b_relation_residual_unmasked",
        np.sqrt(np.sum(b_num) / np.sum(b_den)), info=True)
    b_div = np.abs(kr * b_rho_tilde + kz * b_z_tilde) / np.sqrt(kr**2 + kz**2)
    b_mag_sq = np.abs(b_rho_tilde) ** 2 + np.abs(b_z_tilde) ** 2
    add("b_divergence_weighted",
        np.sqrt(np.sum(rel_mu * b_div**2) / np.sum(rel_mu * b_mag_sq)),
        info=True)

    # round trips against direct evaluation of the closed form
    rho_c, z_c = _roundtrip_cloud(params, t1, n_cloud, seed, constants)
    for name, t_eval, key in (("roundtrip_t0", t0, "roundtrip_t0"),
                              ("roundtrip_t1", t1, "roundtrip_t1")):
        rec = evolve_reconstruct(spec, t_eval, rho_c, z_c, constants)
        with np.errstate(all="ignore"):
            direct = branch_project(
                rho_c * _h_core(params, constants.c * t_eval,
                                rho_c**2 + z_c**2, z_c, constants),
                params.branch)
        add(name, np.abs(rec - direct).max() / np.abs(direct).max(), key)

    # detection-rate identification (reported, not asserted)
    e_plus = reconstruct_positive_frequency_e(spec, t1, rho_c, z_c, constants)
    _, e_cplx, _ = em_fields_cartesian(params, t1, rho_c, 0.0 * rho_c, z_c,
                                       constants=constants)
    e_theta_cplx = e_cplx[1]  # e_theta = y-component in the theta = 0 plane
    scale = np.abs(e_theta_cplx).max() / 2
    sigma = _POSITIVE_FREQUENCY_PHASE[params.branch]
    add("detection_rate_modulus_discrepancy",
        np.abs(np.abs(e_plus) - 0.5 * np.abs(e_theta_cplx)).max() / scale,
        info=True)
    add("analytic_signal_vs_conj_complex",
        np.abs(e_plus - 0.5 * sigma * np.conj(e_theta_cplx)).max() / scale,
        info=True)
    add("analytic_signal_vs_complex",
        np.abs(e_plus - 0.5 * e_theta_cplx).max() / scale, info=True)

    # Parseval against position space
    e_pos = position_space_energy(params, t0, constants, position_grid)
    add("parseval", abs(hel.spectral_energy - e_pos) / e_pos, "parseval")

    # norm convergence under mode-grid doubling (same position samples)
    modes2 = modes.doubled()
    stage2 = _sector_transform_stage({k: cauchy[k] for k in ("A", "E")},
                                     grid, modes2, {"A": 1, "E": 1})
    s_a2 = _extract(stage2["A"], -stage2["E"], modes2.omega(constants))
    spec2 = SpectralAmplitude(modes2, c_plus=s_a2, c_minus=-s_a2)
    hel2 = helicity_amplitudes(spec2, constants, transversality_tol=np.inf)
    add("norm_doubling", abs(hel2.norm - hel.norm) / hel.norm, "norm_doubling")
    add("norm", hel.norm, info=True)
    add("ir_norm_bound", spec.meta["ir_norm_bound"], info=True)

    shares = hel.helicity_shares()
    return SpectrumValidationReport(
        checks=checks, norm=hel.norm, spectral_energy=hel.spectral_energy,
        position_energy=e_pos, helicity_shares=shares, t0=t0, t1=t1,
        meta={"doubled_norm": hel2.norm, "mode_shape": modes.shape,
              "grid_shape": (grid.n_rho, grid.n_z)})


SPECTRUM_CSV_HEADER = ("k_rho,k_z,omega,"
                       "c_plus_re,c_plus_im,c_minus_re,c_minus_im,"
                       "f_plus_re,f_plus_im,f_minus_re,f_minus_im")


def spectrum_csv_rows(spec: SpectralAmplitude, hel: HelicityAmplitudes,
                      constants: PhysicalConstants = NATURAL):
    """Yield CSV value rows (k_rho outer, k_z inner) for the spectrum export."""
    omega = spec.modes.omega(constants)
    for i, kr in enumerate(spec.modes.k_rho):
        for j, kz in enumerate(spec.modes.k_z):
            yield (kr, kz, omega[i, j],
                   spec.c_plus[i, j].real, spec.c_plus[i, j].imag,
                   spec.c_minus[i, j].real, spec.c_minus[i, j].imag,
                   hel.f_plus[i, j].real, hel.f_plus[i, j].imag,
                   hel.f_minus[i, j].real, hel.f_minus[i, j].imag)
