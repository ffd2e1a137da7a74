"""Periodic grids, Fourier transforms, spectral differentiation and norms.

Conventions used throughout the package:

* Spectral coefficients are the normalized discrete Fourier coefficients
  ``fhat = fftn(f) / f.size``, so a single mode ``exp(i*k*x)`` has the
  coefficient 1 at wavenumber ``k``.
* Physical-space L^p norms use the normalized measure ``dx / L`` (equal
  quadrature weights summing to one), making Parseval read
  ``mean(|f|^2) == sum(|fhat|^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid in 1 or 2 dimensions.

    Attributes:
        dim: spatial dimension, 1 or 2.
        n: points per axis (power of two, >= 8).
        length: domain period per axis.
    """

    dim: int = 1
    n: int = 64
    length: float = 2.0 * np.pi

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("grid dimension must be 1 or 2")
        if self.n < 8 or not _is_power_of_two(self.n):
            raise ValueError("grid resolution must be a power of two >= 8")
        if self.length <= 0:
            raise ValueError("domain period must be positive")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def dx(self) -> float:
        return self.length / self.n

    def axis_coordinates(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of the grid points (meshgrid for dim 2)."""
        x = self.axis_coordinates()
        if self.dim == 1:
            return (x,)
        return tuple(np.meshgrid(x, x, indexing="ij"))

    def mode_indices(self) -> np.ndarray:
        """Signed integer mode indices along one axis (fft layout)."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n)

    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Broadcastable wavenumber component arrays (2*pi/L * index)."""
        k1 = 2.0 * np.pi / self.length * self.mode_indices()
        if self.dim == 1:
            return (k1,)
        return (k1[:, None], k1[None, :])

    @property
    def k_squared(self) -> np.ndarray:
        ks = self.wavenumbers()
        out = np.zeros(self.shape)
        for k in ks:
            out = out + k**2
        return out

    @property
    def k_magnitude(self) -> np.ndarray:
        return np.sqrt(self.k_squared)

    @property
    def k_min_positive(self) -> float:
        return 2.0 * np.pi / self.length

    @property
    def k_max(self) -> float:
        return float(np.max(self.k_magnitude))

    def dealias_mask(self) -> np.ndarray:
        """Boolean mask keeping modes with |index| <= n/3 on every axis.

        n is a power of two so n/3 is never an integer and quadratic
        products of kept modes alias only onto discarded modes.
        """
        idx = np.abs(self.mode_indices())
        keep1 = idx <= self.n / 3.0
        if self.dim == 1:
            return keep1
        return keep1[:, None] & keep1[None, :]

    def kmax_mask(self, k_cutoff: float) -> np.ndarray:
        """Boolean mask keeping modes with |k| <= k_cutoff."""
        return self.k_magnitude <= k_cutoff + 1e-12


@dataclass
class SpectralField:
    """Field on a periodic grid, stored in physical or spectral form."""

    grid: Grid
    data: np.ndarray
    space: str = "physical"

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.data.shape} does not match grid {self.grid.shape}"
            )
        if self.space not in ("physical", "spectral"):
            raise ValueError("space must be 'physical' or 'spectral'")

    @classmethod
    def from_physical(cls, grid: Grid, values) -> "SpectralField":
        return cls(grid=grid, data=np.asarray(values, dtype=complex), space="physical")

    @classmethod
    def from_spectral(cls, grid: Grid, coeffs) -> "SpectralField":
        return cls(grid=grid, data=np.asarray(coeffs, dtype=complex), space="spectral")

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid=grid, data=np.zeros(grid.shape, dtype=complex), space="physical")

    def spectral(self) -> np.ndarray:
        """Normalized Fourier coefficients."""
        if self.space == "spectral":
            return self.data
        return np.fft.fftn(self.data) / self.grid.size

    def physical(self) -> np.ndarray:
        if self.space == "physical":
            return self.data
        return np.fft.ifftn(self.data * self.grid.size)

    def as_spectral(self) -> "SpectralField":
        return SpectralField.from_spectral(self.grid, self.spectral())

    def as_physical(self) -> "SpectralField":
        return SpectralField.from_physical(self.grid, self.physical())

    def copy(self) -> "SpectralField":
        return SpectralField(grid=self.grid, data=self.data.copy(), space=self.space)

    def is_real_valued(self, tol: float = 1e-10) -> bool:
        """True when the physical field is real (conjugate-symmetric spectrum)."""
        phys = self.physical()
        scale = max(float(np.max(np.abs(phys))), 1e-300)
        return float(np.max(np.abs(phys.imag))) <= tol * scale


def derivative(f: SpectralField, axis: int = 0, order: int = 1) -> SpectralField:
    """Spectral derivative: multiply coefficients by (i*k_axis)**order."""
    if not 0 <= axis < f.grid.dim:
        raise ValueError(f"axis {axis} out of range for dim {f.grid.dim}")
    k = f.grid.wavenumbers()[axis]
    fhat = f.spectral() * (1j * k) ** order
    return SpectralField.from_spectral(f.grid, fhat)


def laplacian(f: SpectralField) -> SpectralField:
    fhat = f.spectral() * (-f.grid.k_squared)
    return SpectralField.from_spectral(f.grid, fhat)


def dealias(f: SpectralField) -> SpectralField:
    """Zero all modes above 2/3 of the Nyquist wavenumber, per axis."""
    fhat = f.spectral() * f.grid.dealias_mask()
    return SpectralField.from_spectral(f.grid, fhat)


def lp_norm(f: SpectralField, p: float = 2.0) -> float:
    """Physical-space L^p norm with the normalized measure dx/L."""
    mag = np.abs(f.physical())
    if np.isinf(p):
        return float(np.max(mag)) if mag.size else 0.0
    if p <= 0:
        raise ValueError("p must be positive")
    return float(np.mean(mag**p) ** (1.0 / p))


def l2_norm(f: SpectralField) -> float:
    return lp_norm(f, 2.0)


def sobolev_norm(f: SpectralField, s: float) -> float:
    """H^s norm: sqrt(sum_k (1+|k|^2)^s |fhat(k)|^2)."""
    if s < 0:
        raise ValueError("Sobolev exponent s must be nonnegative")
    fhat = f.spectral()
    weight = (1.0 + f.grid.k_squared) ** s
    return float(np.sqrt(np.sum(weight * np.abs(fhat) ** 2)))


def band_limited_noise(
    grid: Grid,
    rng: np.random.Generator,
    max_index: int | None = None,
    real: bool = False,
    zero_mean: bool = False,
    amplitude: float = 1.0,
) -> SpectralField:
    """Random field with spectral support |index| <= max_index per axis."""
    if max_index is None:
        max_index = grid.n // 3
    coeffs = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    idx = np.abs(grid.mode_indices())
    keep = idx <= max_index
    if grid.dim == 1:
        mask = keep
    else:
        mask = keep[:, None] & keep[None, :]
    coeffs = coeffs * mask
    if zero_mean:
        coeffs[(0,) * grid.dim] = 0.0
    f = SpectralField.from_spectral(grid, amplitude * coeffs)
    if real:
        f = SpectralField.from_physical(grid, f.physical().real)
    return f
