"""Quadrature grids on the (rho, z) half-plane for azimuthally symmetric fields."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


def _trapezoid_weights(x):
    w = np.empty_like(x)
    w[1:-1] = 0.5 * (x[2:] - x[:-2])
    w[0] = 0.5 * (x[1] - x[0])
    w[-1] = 0.5 * (x[-1] - x[-2])
    return w


@dataclass(frozen=True)
class CylGrid:
    """Tensor-product (rho, z) grid with quadrature weights.

    `rho_weights` absorb the cylindrical Jacobian: sum(rho_weights * f)
    approximates integral f(rho) rho drho.  `z_weights` are plain trapezoid
    weights on the symmetric z axis.
    """

    rho: np.ndarray
    z: np.ndarray
    rho_weights: np.ndarray
    z_weights: np.ndarray
    rho_spacing: str

    def __post_init__(self):
        for name, arr in (("rho", self.rho), ("z", self.z)):
            if np.any(np.diff(arr) <= 0):
                raise ValueError(f"{name} nodes must be strictly increasing")
        if np.any(self.rho <= 0):
            raise ValueError("rho nodes must be positive")
        if np.any(self.rho_weights <= 0) or np.any(self.z_weights <= 0):
            raise ValueError("quadrature weights must be positive")

    @classmethod
    def log_rho(cls, rho_min, rho_max, n_rho, z_max, n_z):
        """Log-spaced rho in [rho_min, rho_max], linear symmetric z.

        Suited to integrands peaked near the origin with power-law tails.
        """
        rho = np.geomspace(rho_min, rho_max, n_rho)
        u = np.log(rho)
        rho_w = _trapezoid_weights(u) * rho**2  # int f rho drho = int f e^{2u} du
        z = np.linspace(-z_max, z_max, n_z)
        return cls(rho, z, rho_w, _trapezoid_weights(z), "log")

    @classmethod
    def linear_rho(cls, rho_max, n_rho, z_max, n_z):
        """Uniform rho nodes d, 2d, ..., rho_max; uniform symmetric z.

        Suited to oscillatory kernels.  The trapezoid rule is closed at the
        (virtual) rho = 0 node, where the rho Jacobian kills the integrand.
        """
        d = rho_max / n_rho
        rho = d * np.arange(1, n_rho + 1)
        rho_w = np.full(n_rho, d)
        rho_w[-1] = 0.5 * d
        rho_w = rho_w * rho
        z = np.linspace(-z_max, z_max, n_z)
        return cls(rho, z, rho_w, _trapezoid_weights(z), "linear")

    @property
    def n_rho(self):
        return self.rho.size

    @property
    def n_z(self):
        return self.z.size

    def doubled(self):
        """Refined grid with doubled node counts over the same extents."""
        if self.rho_spacing == "log":
            return CylGrid.log_rho(self.rho[0], self.rho[-1], 2 * self.n_rho,
                                   self.z[-1], 2 * (self.n_z - 1) + 1)
        return CylGrid.linear_rho(self.rho[-1], 2 * self.n_rho,
                                  self.z[-1], 2 * (self.n_z - 1) + 1)

    def meshes(self):
        """(rho, z) broadcastable column/row views."""
        return self.rho[:, None], self.z[None, :]


def integrate_cylindrical(values, grid: CylGrid) -> float:
    """2 pi * double integral of f(rho, z) rho drho dz on the grid.

    `values` is either an (n_rho, n_z) array or a callable f(rho, z)
    accepting broadcast arrays.  The integrand must be azimuthally symmetric.
    """
    if callable(values):
        r, z = grid.meshes()
        values = values(r, z)
    values = np.asarray(values)
    if values.shape != (grid.n_rho, grid.n_z):
        raise ValueError(f"values shape {values.shape} does not match grid "
                         f"({grid.n_rho}, {grid.n_z})")
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite integrand on cylindrical grid")
    return float(2.0 * np.pi * grid.rho_weights @ values @ grid.z_weights)
