"""Radial falloff profiles and power-law exponent fits.

Quantities are sampled along fixed directions at fixed time and fitted to
r^(-p) by least squares in log-log coordinates.  The azimuthal quantities
(|A|, |E|, detection rate, u_electric) vanish identically on the z axis, so
exponent scans use off-axis directions for them; u_total and |B| remain
usable on-axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import DUAL, DifferentiationScheme
from .constants import NATURAL, PhysicalConstants
from .fields import (Branch, EdeptParams, FieldRangeError, branch_project,
                     em_fields_cartesian, parity_branch)

QUANTITIES = ("abs_A", "abs_E", "abs_B", "u_total", "u_electric",
              "detection_rate")

#: polar angles (degrees from the z axis) used by default; all off-axis so
#: every quantity in QUANTITIES is nonzero along them
DEFAULT_DIRECTION_ANGLES = (90.0, 45.0, 30.0)


def direction_from_polar(angle_deg: float) -> np.ndarray:
    a = np.radians(angle_deg)
    return np.array([np.sin(a), 0.0, np.cos(a)])


@dataclass(frozen=True)
class RadialProfile:
    """Samples of one field quantity along r * direction at fixed time."""

    quantity: str
    direction: np.ndarray
    t: float
    radii: np.ndarray
    values: np.ndarray
    flagged: np.ndarray  # True where the field engine raised a range error
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.radii) <= 0) or np.any(self.radii <= 0):
            raise ValueError("radii must be positive and strictly increasing")
        good = self.values[~self.flagged]
        if good.size and (np.any(~np.isfinite(good)) or np.any(good < 0)):
            raise ValueError("unflagged profile values must be finite and >= 0")


def _quantity_values(params, quantity, t, x, y, z, scheme, constants):
    A, E, B = em_fields_cartesian(params, t, x, y, z, scheme, constants)
    if quantity == "abs_A":
        return np.sqrt(np.sum(branch_project(A, params.branch) ** 2, axis=0))
    if quantity == "abs_E":
        return np.sqrt(np.sum(branch_project(E, params.branch) ** 2, axis=0))
    if quantity == "abs_B":
        return np.sqrt(np.sum(branch_project(B, params.branch) ** 2, axis=0))
    if quantity == "detection_rate":
        return 0.25 * constants.eps0 * np.sum(np.abs(E) ** 2, axis=0)
    u_e = 0.5 * constants.eps0 * np.sum(branch_project(E, params.branch) ** 2, axis=0)
    if quantity == "u_electric":
        return u_e
    if quantity == "u_total":
        u_m = 0.5 * constants.eps0 * constants.c**2 \
            * np.sum(branch_project(B, params.branch) ** 2, axis=0)
        return u_e + u_m
    raise ValueError(f"unknown quantity {quantity!r}; choose from {QUANTITIES}")


def sample_radial_profile(params: EdeptParams, quantity: str, direction,
                          t: float, radii,
                          scheme: DifferentiationScheme = DUAL,
                          constants: PhysicalConstants = NATURAL) -> RadialProfile:
    """Evaluate `quantity` at the points r * direction for each radius.

    Field-engine range errors are retried per sample and flagged rather than
    dropped, so the output always has one entry per requested radius.
    """
    radii = np.asarray(radii, dtype=float)
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    x, y, z = (radii * direction[i] for i in range(3))
    flagged = np.zeros(radii.shape, dtype=bool)
    try:
        values = _quantity_values(params, quantity, t, x, y, z, scheme, constants)
    except FieldRangeError:
        values = np.empty_like(radii)
        for i in range(radii.size):
            try:
                values[i] = _quantity_values(params, quantity, t, x[i], y[i],
                                             z[i], scheme, constants)
            except FieldRangeError:
                values[i] = np.nan
                flagged[i] = True
    return RadialProfile(quantity, direction, float(t), radii,
                         np.asarray(values, dtype=float), flagged,
                         meta={"alpha": params.alpha,
                               "branch": params.branch.value})


class FitError(ValueError):
    """Not enough usable samples for a power-law fit."""


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line fit of log(value) on log(r): value ~ prefactor * r^-exponent."""

    exponent: float
    prefactor: float
    window: tuple[float, float]
    r_squared: float
    n_used: int
    n_zero_excluded: int
    n_flagged_excluded: int
    max_log_residual: float
    reliable: bool


def fit_power_law(profile: RadialProfile, window: tuple[float, float],
                  r_squared_floor: float = 0.98,
                  min_samples: int = 8) -> PowerLawFit:
    """Fit the asymptotic exponent over radii inside `window`.

    Zero values are excluded with a recorded count; fewer than `min_samples`
    usable points raises FitError; a fit with R^2 below the floor is returned
    flagged unreliable.
    """
    lo, hi = window
    if not (profile.radii[0] <= lo < hi <= profile.radii[-1]):
        raise FitError(f"window {window} not contained in sampled radii "
                       f"[{profile.radii[0]:.3g}, {profile.radii[-1]:.3g}]")
    in_window = (profile.radii >= lo) & (profile.radii <= hi)
    flagged = in_window & profile.flagged
    candidates = in_window & ~profile.flagged
    zeros = candidates & (profile.values == 0.0)
    use = candidates & (profile.values > 0.0)
    n_use = int(np.count_nonzero(use))
    if n_use < min_samples:
        raise FitError(f"{n_use} usable samples in window {window} "
                       f"(need {min_samples}; {int(np.count_nonzero(zeros))} zeros, "
                       f"{int(np.count_nonzero(flagged))} flagged)")
    lr = np.log(profile.radii[use])
    lv = np.log(profile.values[use])
    slope, intercept = np.polyfit(lr, lv, 1)
    pred = slope * lr + intercept
    ss_res = float(np.sum((lv - pred) ** 2))
    ss_tot = float(np.sum((lv - lv.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)
    return PowerLawFit(
        exponent=float(-slope),
        prefactor=float(np.exp(intercept)),
        window=(float(lo), float(hi)),
        r_squared=r2,
        n_used=n_use,
        n_zero_excluded=int(np.count_nonzero(zeros)),
        n_flagged_excluded=int(np.count_nonzero(flagged)),
        max_log_residual=float(np.abs(lv - pred).max()),
        reliable=bool(r2 >= r_squared_floor),
    )


@dataclass(frozen=True)
class ExponentPrediction:
    """Exponents the theory pins down for a given alpha."""

    alpha: int
    potential_exponent: int          # |A| ~ r^-(alpha + 2) on the parity branch
    branch: Branch
    detection_rate_exponent: int | None         # 10, stated for alpha = 1
    electric_energy_density_exponent: int | None


def predicted_exponents(alpha: int) -> ExponentPrediction:
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    special = 10 if alpha == 1 else None
    return ExponentPrediction(alpha, alpha + 2, parity_branch(alpha),
                              special, special)


@dataclass(frozen=True)
class ScanCell:
    alpha: int
    direction_deg: float
    quantity: str
    fit: PowerLawFit | None
    alt_fit: PowerLawFit | None
    note: str = ""

    @property
    def usable(self) -> bool:
        return self.fit is not None and self.fit.reliable

    def window_agreement(self) -> float | None:
        if self.fit is None or self.alt_fit is None:
            return None
        return abs(self.fit.exponent - self.alt_fit.exponent)


@dataclass
class ExponentScan:
    """Fitted exponents per (alpha, direction, quantity) plus summaries."""

    cells: list[ScanCell]
    alphas: tuple[int, ...]
    direction_angles: tuple[float, ...]
    t: float
    window: tuple[float, float]
    alt_window: tuple[float, float]

    def cell(self, alpha, direction_deg, quantity) -> ScanCell:
        for c in self.cells:
            if (c.alpha, c.direction_deg, c.quantity) == (alpha, direction_deg, quantity):
                return c
        raise KeyError((alpha, direction_deg, quantity))

    def mean_exponent(self, alpha, quantity) -> float | None:
        vals = [c.fit.exponent for c in self.cells
                if c.alpha == alpha and c.quantity == quantity and c.usable]
        return float(np.mean(vals)) if vals else None

    def first_differences(self, quantity) -> list[float]:
        """Differences of mean exponents between consecutive alphas with a
        usable fit (zero-field cells are skipped, not interpolated)."""
        means = [(a, self.mean_exponent(a, quantity)) for a in self.alphas]
        usable = [(a, m) for a, m in means if m is not None]
        return [m2 - m1 for (_, m1), (_, m2) in zip(usable, usable[1:])]

    def rows(self):
        """Flat rows for CSV export."""
        for c in self.cells:
            fit = c.fit
            yield {
                "alpha": c.alpha,
                "direction_deg": c.direction_deg,
                "quantity": c.quantity,
                "exponent": np.nan if fit is None else fit.exponent,
                "r_squared": np.nan if fit is None else fit.r_squared,
                "n_used": 0 if fit is None else fit.n_used,
                "n_zero_excluded": 0 if fit is None else fit.n_zero_excluded,
                "window_agreement": np.nan if c.window_agreement() is None
                else c.window_agreement(),
                "reliable": 0 if fit is None else int(fit.reliable),
                "note": c.note,
            }


def default_radii(window: tuple[float, float], n: int = 56) -> np.ndarray:
    lo, hi = window
    return np.geomspace(lo / 1.8, hi * 2.2, n)


def exponent_scan(alphas, t: float = 0.0,
                  direction_angles=DEFAULT_DIRECTION_ANGLES,
                  window: tuple[float, float] = (50.0, 500.0),
                  alt_window: tuple[float, float] = (100.0, 1000.0),
                  radii=None,
                  quantities=("abs_A", "abs_E", "abs_B", "u_total",
                              "detection_rate"),
                  scheme: DifferentiationScheme = DUAL,
                  constants: PhysicalConstants = NATURAL,
                  g0: float = 1.0, g1: float = 1.0, g2: float = 1.0,
                  r_squared_floor: float = 0.98) -> ExponentScan:
    """Fit falloff exponents for each alpha (parity branch) and direction.

    Cells whose samples are identically zero (a field symmetry, e.g. the
    electric field of the odd real solution at t = 0) or otherwise unusable
    are flagged with a note instead of failing the scan.
    """
    alphas = tuple(int(a) for a in alphas)
    if radii is None:
        radii = default_radii((window[0], max(window[1], alt_window[1])))
    cells = []
    for alpha in alphas:
        params = EdeptParams(alpha, g0, g1, g2)
        for ang in direction_angles:
            direction = direction_from_polar(ang)
            for q in quantities:
                prof = sample_radial_profile(params, q, direction, t, radii,
                                             scheme, constants)
                note = ""
                fit = alt = None
                try:
                    fit = fit_power_law(prof, window, r_squared_floor)
                except FitError as err:
                    in_w = (radii >= window[0]) & (radii <= window[1])
                    if np.all(prof.values[in_w & ~prof.flagged] == 0.0):
                        note = "zero field along this direction/time"
                    else:
                        note = str(err)
                if fit is not None:
                    try:
                        alt = fit_power_law(prof, alt_window, r_squared_floor)
                    except FitError:
                        alt = None
                cells.append(ScanCell(alpha, ang, q, fit, alt, note))
    return ExponentScan(cells, alphas, tuple(direction_angles), float(t),
                        window, alt_window)
