"""Periodic tensor-product grids with FFT-based calculus and discrete norms.

Conventions used throughout the package:

* the fundamental cell per axis is [-L/2, L/2) with N uniformly spaced points,
  N a power of two (>= 16);
* wavenumbers are xi_k = 2*pi*k/L for k in {-N/2, ..., N/2-1} in numpy FFT
  ordering; the lone Nyquist mode is zeroed in odd-order derivatives;
* norms are quadrature norms: ||f||_{L^2}^2 = sum |f_j|^2 * dV, and the H^s
  norm uses Parseval weights so that H^0 coincides with L^2.

Fields are plain numpy arrays of shape ``grid.shape``; vector fields stack the
axis components first, shape ``(dim, *grid.shape)``.  Grid objects are
immutable after construction and all operations are pure, so they are safe to
share across concurrent runs.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from .errors import GridMismatchError


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class Grid:
    """Uniform periodic grid on a 1-D or 2-D torus."""

    def __init__(self, n, length, dim: int | None = None):
        if dim is None:
            dim = len(n) if isinstance(n, (tuple, list)) else 1
        if dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {dim}")
        shape = tuple(n) if isinstance(n, (tuple, list)) else (int(n),) * dim
        lengths = (
            tuple(float(l) for l in length)
            if isinstance(length, (tuple, list))
            else (float(length),) * dim
        )
        if len(shape) != dim or len(lengths) != dim:
            raise ValueError("n/length do not match dim")
        for ni in shape:
            if not _is_power_of_two(ni) or ni < 16:
                raise ValueError(f"points per axis must be a power of two >= 16, got {ni}")
        for li in lengths:
            if not li > 0:
                raise ValueError(f"axis length must be positive, got {li}")
        self.dim = dim
        self.shape = shape
        self.lengths = lengths
        self.dx = tuple(l / ni for l, ni in zip(lengths, shape))
        self.cell_volume = math.prod(self.dx)
        self.size = math.prod(shape)

    # -- geometry ---------------------------------------------------------

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        """1-D coordinate arrays per axis, cell [-L/2, L/2)."""
        return tuple(
            -l / 2.0 + d * np.arange(n)
            for n, l, d in zip(self.shape, self.lengths, self.dx)
        )

    @cached_property
    def coords(self) -> np.ndarray:
        """Coordinate meshes, shape (dim, *shape)."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Wavenumber meshes xi = 2*pi*k/L, shape (dim, *shape), FFT order."""
        ks = [
            2.0 * np.pi * np.fft.fftfreq(n, d=d)
            for n, d in zip(self.shape, self.dx)
        ]
        return np.stack(np.meshgrid(*ks, indexing="ij"))

    @cached_property
    def k_squared(self) -> np.ndarray:
        return np.sum(self.wavenumbers**2, axis=0)

    @cached_property
    def _deriv_multipliers(self) -> tuple[np.ndarray, ...]:
        # i*xi per axis with the asymmetric Nyquist mode removed
        mults = []
        for axis in range(self.dim):
            xi = self.wavenumbers[axis].copy()
            n = self.shape[axis]
            nyq = [slice(None)] * self.dim
            nyq[axis] = n // 2
            xi[tuple(nyq)] = 0.0
            mults.append(1j * xi)
        return tuple(mults)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: keeps |k| <= N/3 per axis."""
        mask = np.ones(self.shape, dtype=bool)
        for axis in range(self.dim):
            n = self.shape[axis]
            k_int = np.fft.fftfreq(n, d=1.0 / n)  # integer mode numbers
            keep = np.abs(k_int) <= n // 3
            shape = [1] * self.dim
            shape[axis] = n
            mask = mask & keep.reshape(shape)
        return mask

    def mode_mask(self, cutoff: int) -> np.ndarray:
        """Boolean mask keeping integer modes |k| <= cutoff on every axis."""
        mask = np.ones(self.shape, dtype=bool)
        for axis in range(self.dim):
            n = self.shape[axis]
            k_int = np.fft.fftfreq(n, d=1.0 / n)
            keep = np.abs(k_int) <= cutoff
            shape = [1] * self.dim
            shape[axis] = n
            mask = mask & keep.reshape(shape)
        return mask

    # -- transforms and calculus ------------------------------------------

    def fft(self, f: np.ndarray) -> np.ndarray:
        return np.fft.fftn(f)

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(fh)

    def _check(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != self.shape:
            raise GridMismatchError(
                f"field shape {f.shape} does not match grid shape {self.shape}"
            )
        return f

    def spectral_derivative(self, f: np.ndarray, axis: int = 0) -> np.ndarray:
        """d/dx_axis by multiplication with i*xi in spectral space."""
        if not 0 <= axis < self.dim:
            raise ValueError(f"axis {axis} out of range for dim {self.dim}")
        f = self._check(f)
        return np.fft.ifftn(self._deriv_multipliers[axis] * np.fft.fftn(f))

    def gradient(self, f: np.ndarray) -> np.ndarray:
        """All first derivatives, shape (dim, *shape)."""
        fh = np.fft.fftn(self._check(f))
        return np.stack(
            [np.fft.ifftn(m * fh) for m in self._deriv_multipliers]
        )

    def divergence(self, vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec)
        if vec.shape != (self.dim, *self.shape):
            raise GridMismatchError(
                f"vector field shape {vec.shape} != {(self.dim, *self.shape)}"
            )
        out = np.zeros(self.shape, dtype=complex)
        for axis in range(self.dim):
            out += np.fft.ifftn(
                self._deriv_multipliers[axis] * np.fft.fftn(vec[axis])
            )
        return out

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        """Second-derivative multiplier -|xi|^2 (Nyquist included: even order)."""
        return np.fft.ifftn(-self.k_squared * np.fft.fftn(self._check(f)))

    def dealias(self, f: np.ndarray) -> np.ndarray:
        """Project onto the 2/3 band (use on quadratic/cubic products)."""
        return np.fft.ifftn(self.dealias_mask * np.fft.fftn(self._check(f)))

    # -- norms -------------------------------------------------------------

    def integral(self, f: np.ndarray) -> complex | float:
        return np.sum(f) * self.cell_volume

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        return np.sum(np.conj(f) * g) * self.cell_volume

    def l2_norm(self, f: np.ndarray) -> float:
        return math.sqrt(float(np.sum(np.abs(f) ** 2)) * self.cell_volume)

    def sobolev_norm(self, f: np.ndarray, s: float, space: str = "physical") -> float:
        """H^s norm via (1+|xi|^2)^s Parseval weights; s=0 equals l2_norm."""
        if s < 0:
            raise ValueError(f"Sobolev order must be >= 0, got {s}")
        if space == "physical":
            fh = np.fft.fftn(self._check(f))
        elif space == "spectral":
            fh = self._check(f)
        else:
            raise ValueError(f"unknown space {space!r}")
        weight = (1.0 + self.k_squared) ** s
        # Parseval: sum_x |f|^2 dV = sum_k |fh|^2 dV / size
        total = float(np.sum(weight * np.abs(fh) ** 2)) * self.cell_volume / self.size
        return math.sqrt(total)

    def lebesgue_norm(self, f: np.ndarray, p: float) -> float:
        """Quadrature L^p norm; p = inf is the grid maximum of |f|."""
        f = self._check(f)
        if p == np.inf or p == math.inf:
            return float(np.max(np.abs(f)))
        if p < 1:
            raise ValueError(f"Lebesgue exponent must be >= 1, got {p}")
        return float(np.sum(np.abs(f) ** p) * self.cell_volume) ** (1.0 / p)

    def boundary_tail_fraction(self, f: np.ndarray, band_cells: int = 3) -> float:
        """Mass fraction of |f|^2 within band_cells of the cell boundary.

        Used as a support guard for x-weighted functionals, which are only
        meaningful when the data effectively vanishes near the cell edge.
        """
        f = self._check(f)
        w = np.abs(f) ** 2
        total = float(np.sum(w))
        if total == 0.0:
            return 0.0
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.dim):
            idx = [slice(None)] * self.dim
            idx[axis] = slice(0, band_cells)
            mask[tuple(idx)] = True
            idx[axis] = slice(self.shape[axis] - band_cells, self.shape[axis])
            mask[tuple(idx)] = True
        return float(np.sum(w[mask])) / total

    # ----------------------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Grid)
            and self.shape == other.shape
            and self.lengths == other.lengths
        )

    def __hash__(self):
        return hash((self.shape, self.lengths))

    def __repr__(self) -> str:
        return f"Grid(n={self.shape}, length={self.lengths})"

    def descriptor(self) -> dict:
        """JSON-ready grid descriptor used in snapshot headers and reports."""
        return {"dim": self.dim, "n": list(self.shape), "length": list(self.lengths)}
