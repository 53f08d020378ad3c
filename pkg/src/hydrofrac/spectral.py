"""Grid, Fourier-in-x transforms and the z-direction finite-difference calculus.

Fields are plain numpy arrays indexed ``[j, i]`` with ``j`` the z-node
(``z_j = j / n_z``, ``j = 0..n_z``) and ``i`` the x-node (``x_i = i / n_x``).
A real array of shape ``(n_z + 1, n_x)`` is a field in physical space; a
complex array of shape ``(n_z + 1, n_x // 2 + 1)`` is its real-to-complex
transform in x.  Every operator here accepts either representation and
returns the same representation it was given.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform grid on the periodic channel ``T x [0, 1]`` (x-period 1)."""

    n_x: int
    n_z: int

    def __post_init__(self):
        if int(self.n_x) != self.n_x or int(self.n_z) != self.n_z:
            raise ValueError("grid resolutions must be integers")
        if self.n_x < 8 or self.n_x % 2:
            raise ValueError(f"n_x must be even and >= 8, got {self.n_x}")
        if self.n_z < 8:
            raise ValueError(f"n_z must be >= 8, got {self.n_z}")

    @property
    def dx(self):
        return 1.0 / self.n_x

    @property
    def dz(self):
        return 1.0 / self.n_z

    @property
    def physical_shape(self):
        return (self.n_z + 1, self.n_x)

    @property
    def spectral_shape(self):
        return (self.n_z + 1, self.n_x // 2 + 1)

    @cached_property
    def x(self):
        return np.arange(self.n_x) * self.dx

    @cached_property
    def z(self):
        return np.arange(self.n_z + 1) * self.dz

    @cached_property
    def mesh(self):
        """``(X, Z)`` node coordinates, each of physical shape."""
        return np.meshgrid(self.x, self.z)

    @cached_property
    def k(self):
        """Non-negative integer wavenumbers stored by the r2c transform."""
        return np.arange(self.n_x // 2 + 1)

    @cached_property
    def kappa(self):
        """Angular wavenumbers ``2 pi k``."""
        return 2.0 * np.pi * self.k

    @cached_property
    def mode_weight(self):
        """Multiplicity of each stored mode in a Parseval sum (conjugate pairs count twice)."""
        w = np.full(self.n_x // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    @cached_property
    def dealias_mask(self):
        return self.k <= self.n_x / 3.0

    @cached_property
    def trapezoid_weights(self):
        w = np.full(self.n_z + 1, self.dz)
        w[0] = w[-1] = 0.5 * self.dz
        return w

    def zeros(self):
        return np.zeros(self.physical_shape)

    def to_spectral(self, f):
        return np.fft.rfft(f, axis=-1)

    def to_physical(self, f_hat):
        return np.fft.irfft(f_hat, n=self.n_x, axis=-1)

    def symbol(self, s):
        """The multiplier ``|2 pi k|^s`` of ``Lambda_h^s``; the zero mode is annihilated for ``s > 0``."""
        if s < 0:
            raise ValueError(f"fractional order must be non-negative, got {s}")
        return self.kappa ** float(s)


def _is_spectral(f):
    return np.iscomplexobj(f)


def dx_spectral(grid, f):
    """x-derivative via the multiplier ``i 2 pi k`` (Nyquist mode dropped)."""
    spectral = _is_spectral(f)
    f_hat = f if spectral else grid.to_spectral(f)
    ik = 1j * grid.kappa
    ik[-1] = 0.0
    out = f_hat * ik
    return out if spectral else grid.to_physical(out)


def dz_fd(grid, f):
    """Second-order z-derivative: central inside, one-sided three-point stencils at z = 0, 1."""
    f = np.asarray(f)
    h = grid.dz
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return out


def apply_fractional(grid, f, alpha, s=None):
    """Apply ``Lambda_h^s`` (``s`` defaults to ``alpha``) by its Fourier symbol ``|2 pi k|^s``."""
    s = alpha if s is None else s
    m = grid.symbol(s)
    if _is_spectral(f):
        return f * m
    return grid.to_physical(grid.to_spectral(f) * m)


def dealias(grid, f):
    """Two-thirds rule: zero every mode with ``|k| > n_x / 3``."""
    spectral = _is_spectral(f)
    f_hat = f if spectral else grid.to_spectral(f)
    out = np.where(grid.dealias_mask, f_hat, 0.0)
    return out if spectral else grid.to_physical(out)


def vertical_cumint(grid, f):
    """``F(x, z) = int_0^z f dz'`` by the cumulative trapezoid rule; ``F(x, 0) = 0`` exactly."""
    f = np.asarray(f)
    out = np.zeros_like(f)
    np.cumsum(0.5 * grid.dz * (f[1:] + f[:-1]), axis=0, out=out[1:])
    return out


def vertical_mean(grid, f):
    """Trapezoidal mean over ``z in [0, 1]`` at each x node (or mode).

    Taken as the last row of :func:`vertical_cumint`, so both agree bit for bit.
    """
    return vertical_cumint(grid, f)[-1]
