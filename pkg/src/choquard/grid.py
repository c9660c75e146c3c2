"""Periodic-box discretization.

The box is the cube [-L/2, L/2)^N sampled with M points per axis, row-major
(C order) axis layout, ``x_j = -L/2 + j h`` with ``h = L/M``.

Transform convention, fixed for the whole package: the forward transform is the
unnormalized DFT ``f_hat[m] = sum_j f[j] exp(-2πi m j / M)`` (``scipy.fft.fftn``)
and the inverse carries the ``1/M^N``.  Discrete Parseval then reads

    sum |f|^2 h^N = (h^N / M^N) sum |f_hat|^2.

Every Fourier multiplier in :mod:`choquard.operators` is diagonal in this basis
and so is unaffected by the offset of the coordinate origin.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft as sfft


@dataclass(frozen=True)
class SpatialGrid:
    dim: int
    box_length: float
    points: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if not self.box_length > 0:
            raise ValueError("box_length must be positive")
        if self.points < 2 or self.points % 2:
            raise ValueError("points per axis must be an even integer >= 2")

    @property
    def spacing(self) -> float:
        return self.box_length / self.points

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.box_length / 2 + self.spacing * np.arange(self.points)

    @cached_property
    def axis_wavenumbers(self) -> np.ndarray:
        # k = 2π m / L in FFT order, m in {-M/2, ..., M/2-1}
        return 2 * np.pi * sfft.fftfreq(self.points, d=self.spacing)

    def coords(self) -> list[np.ndarray]:
        """Coordinate arrays, broadcastable (sparse) against the grid shape."""
        return [_along(self.axis, j, self.dim) for j in range(self.dim)]

    def wavenumbers(self) -> list[np.ndarray]:
        return [_along(self.axis_wavenumbers, j, self.dim) for j in range(self.dim)]

    @cached_property
    def k_squared(self) -> np.ndarray:
        k2 = np.zeros(self.shape)
        for kj in self.wavenumbers():
            k2 = k2 + kj**2
        return k2

    @cached_property
    def r_squared(self) -> np.ndarray:
        r2 = np.zeros(self.shape)
        for xj in self.coords():
            r2 = r2 + xj**2
        return r2

    def radius(self) -> np.ndarray:
        return np.sqrt(self.r_squared)

    def radial_field(self, eps: float | None = None) -> np.ndarray:
        """Regularized radius sqrt(|x|^2 + eps^2), eps = h/2 by default."""
        eps = self.default_eps if eps is None else eps
        if not eps > 0:
            raise ValueError(f"regularization eps must be positive, got {eps!r}")
        return np.sqrt(self.r_squared + eps**2)

    def weight_field(self, b: float, eps: float | None = None) -> np.ndarray:
        """Regularized inhomogeneous weight (|x|^2 + eps^2)^{b/2}."""
        eps = self.default_eps if eps is None else eps
        if not eps > 0:
            raise ValueError(f"regularization eps must be positive, got {eps!r}")
        return (self.r_squared + eps**2) ** (b / 2)

    def check(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != self.shape:
            raise ValueError(f"field shape {f.shape} does not match grid shape {self.shape}")
        return f

    def fft(self, f: np.ndarray) -> np.ndarray:
        return sfft.fftn(self.check(f))

    def ifft(self, coeffs: np.ndarray) -> np.ndarray:
        return sfft.ifftn(self.check(coeffs))

    def integrate(self, f: np.ndarray):
        return np.sum(self.check(f)) * self.cell_volume

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """L^2 inner product <f, g> = ∫ conj(f) g."""
        return self.integrate(np.conj(f) * g)

    def l2_norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(self.integrate(np.abs(f) ** 2).real))

    def spectral_sq(self, coeffs: np.ndarray, weight=None) -> float:
        """Σ w(k)|f_hat|^2 · h^N / M^N, i.e. ∫|f|^2 when the weight is 1 (Parseval)."""
        a = np.abs(coeffs) ** 2
        total = np.sum(a) if weight is None else np.sum(weight * a)
        return float(total * self.cell_volume / self.points**self.dim)

    @property
    def default_eps(self) -> float:
        return self.spacing / 2

    def refined(self, factor: int = 2) -> "SpatialGrid":
        return SpatialGrid(self.dim, self.box_length, self.points * factor)


def _along(v: np.ndarray, axis: int, dim: int) -> np.ndarray:
    shape = [1] * dim
    shape[axis] = v.size
    return v.reshape(shape)


# --- snapshot files ------------------------------------------------------------

SNAPSHOT_MAGIC = b"CHQS"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIIdd ddd")


@dataclass(frozen=True)
class Snapshot:
    grid: SpatialGrid
    values: np.ndarray
    time: float
    alpha: float
    b: float
    p: float


def write_snapshot(path, grid: SpatialGrid, u: np.ndarray, t: float, alpha: float, b: float, p: float):
    """Little-endian binary: header then M^N interleaved (re, im) float64, row-major."""
    u = grid.check(u)
    header = _HEADER.pack(
        SNAPSHOT_MAGIC, SNAPSHOT_VERSION, grid.dim, grid.points,
        float(grid.box_length), float(t), float(alpha), float(b), float(p),
    )
    payload = np.ascontiguousarray(u, dtype="<c16").tobytes()
    Path(path).write_bytes(header + payload)


def read_snapshot(path) -> Snapshot:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated snapshot header")
    magic, version, dim, points, L, t, alpha, b, p = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    grid = SpatialGrid(dim, L, points)
    expected = 16 * points**dim
    body = data[_HEADER.size:]
    if len(body) != expected:
        raise ValueError(f"{path}: payload has {len(body)} bytes, expected {expected}")
    values = np.frombuffer(body, dtype="<c16").reshape(grid.shape).astype(complex)
    return Snapshot(grid, values, t, alpha, b, p)
