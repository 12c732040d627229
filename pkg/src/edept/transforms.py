"""Hankel (order 0/1) and axial Fourier kernels on cylindrical grids.

Sign and normalization follow the momentum-space measure d3k/(2pi)^3 on the
inverse side: forward transforms carry no 2 pi factors.

    fourier_axis:   int f(z) exp(-i k_z z) dz
    hankel_order_n: int f(rho) J_n(k_rho rho) rho drho
"""

from __future__ import annotations

import numpy as np
from scipy.special import j0, j1

from .grids import CylGrid


class TailTruncationError(RuntimeError):
    """Samples do not decay at the grid edge; the truncated tail would
    contaminate the transform."""


def tail_fraction(samples, *, last_axis_edges=("high",)) -> float:
    """Edge magnitude relative to peak magnitude along the last axis.

    Hankel transforms only require decay at the outer rho edge ("high");
    Fourier transforms require decay at both z edges.
    """
    a = np.abs(np.asarray(samples))
    peak = a.max()
    if peak == 0.0:
        return 0.0
    edges = []
    if "low" in last_axis_edges:
        edges.append(a[..., 0].max())
    if "high" in last_axis_edges:
        edges.append(a[..., -1].max())
    return float(max(edges) / peak)


def _check_tail(samples, edges, tol, label):
    frac = tail_fraction(samples, last_axis_edges=edges)
    if frac > tol:
        raise TailTruncationError(
            f"{label}: edge-to-peak sample ratio {frac:.3e} exceeds {tol:.1e}; "
            "enlarge the grid extent")
    return frac


def hankel_matrix(grid: CylGrid, k_rho, order: int = 1) -> np.ndarray:
    """Weight matrix M with (M @ samples)[i] = int f(rho) J_order(k_i rho) rho drho."""
    if order not in (0, 1):
        raise ValueError("only Hankel orders 0 and 1 are provided")
    k = np.atleast_1d(np.asarray(k_rho, dtype=float))
    bessel = j1 if order == 1 else j0
    return bessel(np.outer(k, grid.rho)) * grid.rho_weights[None, :]


def fourier_matrix(grid: CylGrid, k_z) -> np.ndarray:
    """Weight matrix F with (samples @ F)[j] = int f(z) exp(-i k_j z) dz."""
    k = np.atleast_1d(np.asarray(k_z, dtype=float))
    return np.exp(-1j * np.outer(grid.z, k)) * grid.z_weights[:, None]


def _hankel(samples, grid, k_rho, order, tail_tol, label):
    samples = np.asarray(samples)
    if samples.shape[-1] != grid.n_rho:
        raise ValueError("samples must live on grid.rho")
    _check_tail(samples, ("high",), tail_tol, label)
    matrix = hankel_matrix(grid, k_rho, order=order)
    out = (matrix @ samples[..., None])[..., 0]
    if samples.ndim == 1:
        return out if np.ndim(k_rho) else out[0]
    return out if np.ndim(k_rho) else out[..., 0]


def hankel_transform_order1(samples, grid: CylGrid, k_rho, *, tail_tol=1e-3):
    """Order-1 Hankel transform of samples on grid.rho at wavenumber(s) k_rho.

    Linear in the samples; raises TailTruncationError when the samples have
    not decayed at the outer rho edge.
    """
    return _hankel(samples, grid, k_rho, 1, tail_tol, "hankel_transform_order1")


def hankel_transform_order0(samples, grid: CylGrid, k_rho, *, tail_tol=1e-3):
    """Order-0 companion of hankel_transform_order1 (axial vector components)."""
    return _hankel(samples, grid, k_rho, 0, tail_tol, "hankel_transform_order0")


def fourier_axis(samples, grid: CylGrid, k_z, *, tail_tol=1e-3):
    """Axial Fourier transform int f(z) exp(-i k_z z) dz of samples on grid.z."""
    samples = np.asarray(samples)
    if samples.shape[-1] != grid.n_z:
        raise ValueError("samples must live on grid.z")
    _check_tail(samples, ("low", "high"), tail_tol, "fourier_axis")
    out = samples @ fourier_matrix(grid, k_z)
    return out if np.ndim(k_z) else out[..., 0]
