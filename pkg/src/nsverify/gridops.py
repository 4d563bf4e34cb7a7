"""
Uniform grids, discrete differential operators, Poisson solvers and norms.

Periodic boxes use FFT differentiation.  Truncated boxes (a finite window
onto a rapidly decaying field) use fourth-order central differences with
fourth-order one-sided closures at the edges.
"""

from __future__ import annotations

import csv
import io
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping, Optional, Sequence

import numpy as np

__all__ = [
    "Grid", "SampledField", "NormSet", "BoundaryError", "sample",
    "derivative", "gradient", "divergence", "curl", "laplacian",
    "poisson_solve", "green_reference", "norms", "integrate", "bkm_integral",
    "BOUNDARY_TOL", "DEFAULT_RADIUS_FACTOR",
]

BOUNDARY_TOL = 1e-12
DEFAULT_RADIUS_FACTOR = 6.0

_KIND_CODES = {"periodic": 0.0, "truncated": 1.0}


class BoundaryError(ValueError):
    """A decaying field is not negligible on the truncated-box boundary."""

    def __init__(self, message, required_radius=None):
        super().__init__(message)
        self.required_radius = required_radius


@dataclass(frozen=True)
class Grid:
    """Uniform lattice.

    ``periodic``: ``extents`` are periods, nodes at ``j*L/N``.
    ``truncated``: ``extents`` are half-widths R, nodes at ``-R + j*2R/(N-1)``.
    """

    kind: str
    extents: tuple
    n: tuple

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise ValueError(f"grid kind must be 'periodic' or 'truncated', got {self.kind!r}")
        extents = tuple(float(e) for e in self.extents)
        n = tuple(int(v) for v in self.n)
        if len(extents) != len(n) or not 1 <= len(n) <= 3:
            raise ValueError("extents and point counts must agree in length (1 to 3 axes)")
        if any(not (math.isfinite(e) and e > 0) for e in extents):
            raise ValueError("grid extents must be positive")
        if any(v < 8 for v in n):
            raise ValueError("grids need at least 8 points per axis")
        if self.kind == "periodic" and any(v & (v - 1) for v in n):
            raise ValueError("periodic grids need a power-of-two point count")
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "n", n)

    @classmethod
    def periodic(cls, extents, n, dim=None):
        dim = dim or (len(extents) if np.ndim(extents) else 3)
        return cls("periodic", _per_axis(extents, dim), _per_axis(n, dim))

    @classmethod
    def truncated(cls, radius, n, dim=3):
        return cls("truncated", _per_axis(radius, dim), _per_axis(n, dim))

    @property
    def dim(self):
        return len(self.n)

    @property
    def shape(self):
        return self.n

    @property
    def spacing(self):
        if self.kind == "periodic":
            return tuple(e / m for e, m in zip(self.extents, self.n))
        return tuple(2 * e / (m - 1) for e, m in zip(self.extents, self.n))

    @property
    def axes(self):
        if self.kind == "periodic":
            return tuple(np.arange(m) * h for m, h in zip(self.n, self.spacing))
        return tuple(-e + np.arange(m) * h for e, m, h in zip(self.extents, self.n, self.spacing))

    @property
    def mesh(self):
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    @property
    def quadrature_weights(self):
        """Rectangle rule on periodic boxes, trapezoid on truncated ones."""
        w = np.ones(self.shape)
        for axis, h in enumerate(self.spacing):
            wa = np.full(self.n[axis], h)
            if self.kind == "truncated":
                wa[0] = wa[-1] = h / 2
            shape = [1] * self.dim
            shape[axis] = -1
            w = w * wa.reshape(shape)
        return w

    def boundary_mask(self):
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.dim):
            idx = [slice(None)] * self.dim
            idx[axis] = 0
            mask[tuple(idx)] = True
            idx[axis] = -1
            mask[tuple(idx)] = True
        return mask

    def scaled(self, factor):
        return Grid(self.kind, tuple(e * factor for e in self.extents), self.n)


def _per_axis(value, dim):
    if np.ndim(value) == 0:
        return (value,) * dim
    value = tuple(value)
    if len(value) != dim:
        raise ValueError(f"expected {dim} values, got {len(value)}")
    return value


@dataclass(frozen=True)
class SampledField:
    """Grid values: shape ``grid.shape`` if scalar else ``(ncomp, *grid.shape)``."""

    grid: Grid
    data: np.ndarray
    t: float = 0.0
    scalar: bool = False
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        expected = self.grid.shape if self.scalar else data.shape[1:]
        if tuple(expected) != self.grid.shape or (self.scalar and data.shape != self.grid.shape):
            raise ValueError(f"array shape {data.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("sampled values must be finite")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    @property
    def ncomp(self):
        return 1 if self.scalar else self.data.shape[0]

    @property
    def components(self):
        return (self.data,) if self.scalar else tuple(self.data)

    def magnitude(self):
        if self.scalar:
            return np.abs(self.data)
        return np.sqrt(np.sum(self.data ** 2, axis=0))

    def _like(self, data, scalar, **meta):
        return SampledField(self.grid, data, self.t, scalar, meta)

    # -- serialization -----------------------------------------------------

    def to_bytes(self) -> bytes:
        """Flat little-endian float64 layout.

        Header: ``dim, kind (0 periodic, 1 truncated), ncomp (0 for scalar),
        N_1..N_dim, extent_1..extent_dim, t``; body: component-major values
        in C order.
        """
        g = self.grid
        header = [g.dim, _KIND_CODES[g.kind], 0 if self.scalar else self.ncomp,
                  *g.n, *g.extents, self.t]
        return struct.pack(f"<{len(header)}d", *header) + self.data.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "SampledField":
        dim = int(struct.unpack_from("<d", blob, 0)[0])
        nhead = 3 + 2 * dim + 1
        head = struct.unpack_from(f"<{nhead}d", blob, 0)
        kind = {v: k for k, v in _KIND_CODES.items()}[head[1]]
        ncomp = int(head[2])
        n = tuple(int(v) for v in head[3:3 + dim])
        extents = head[3 + dim:3 + 2 * dim]
        grid = Grid(kind, extents, n)
        shape = n if ncomp == 0 else (ncomp, *n)
        data = np.frombuffer(blob, dtype="<f8", offset=8 * nhead).reshape(shape)
        return cls(grid, data.astype(float), head[-1], ncomp == 0)

    def to_csv(self) -> str:
        """One row per node: coordinates then components.  For small grids."""
        if self.data.size > 200_000:
            raise ValueError("grid too large for CSV export")
        names = ["x", "y", "z"][: self.grid.dim]
        comps = ["value"] if self.scalar else [f"c{i}" for i in range(self.ncomp)]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(names + comps)
        coords = [m.ravel() for m in self.grid.mesh]
        values = [c.ravel() for c in self.components]
        for row in zip(*coords, *values):
            writer.writerow([format(v, ".12g") for v in row])
        return buf.getvalue()


@dataclass(frozen=True)
class NormSet:
    energy: float
    sup_velocity: float
    sup_vorticity: float


# -- sampling ------------------------------------------------------------------

def sample(field, grid: Grid, t: float = 0.0, boundary_tol: float = BOUNDARY_TOL) -> SampledField:
    """Evaluate an analytic field on every grid node at time ``t``."""
    if field.dim != grid.dim:
        raise ValueError(f"{field.name} is {field.dim}-D but the grid is {grid.dim}-D")
    expected = {"periodic": "periodic", "schwartz": "truncated"}.get(field.decay)
    if expected != grid.kind:
        raise ValueError(f"{field.name} ({field.decay}) cannot be sampled on a {grid.kind} grid")
    if grid.kind == "periodic":
        for extent, period in zip(grid.extents, field.periods):
            ratio = extent / period
            if abs(ratio - round(ratio)) > 1e-12 * max(1.0, ratio) or round(ratio) < 1:
                raise ValueError(f"grid extent {extent} is not a multiple of the period {period}")
    data = np.asarray(field.velocity(grid.mesh, t), dtype=float)
    sf = SampledField(grid, data, float(t))
    if grid.kind == "truncated":
        mag = sf.magnitude()
        amplitude = mag.max()
        edge = mag[grid.boundary_mask()].max()
        if amplitude > 0 and edge > boundary_tol * amplitude:
            raise BoundaryError(
                f"{field.name}: boundary |u| = {edge:.3g} exceeds {boundary_tol:g} x amplitude; "
                f"need R >= {_required_radius(field, grid, t, boundary_tol, amplitude):.3g}",
                _required_radius(field, grid, t, boundary_tol, amplitude))
    return sf


def _required_radius(field, grid, t, tol, amplitude):
    radius = max(grid.extents)
    for _ in range(60):
        radius *= 1.1
        probe = Grid.truncated(radius, 17, grid.dim)
        mag = np.sqrt(np.sum(np.asarray(field.velocity(probe.mesh, t)) ** 2, axis=0))
        if mag[probe.boundary_mask()].max() <= tol * amplitude:
            return radius
    return math.inf


# -- derivatives ---------------------------------------------------------------

@lru_cache(maxsize=64)
def _wavenumbers(n, length):
    k = 2 * np.pi * np.fft.rfftfreq(n, d=length / n)
    k.setflags(write=False)
    return k


@lru_cache(maxsize=64)
def _full_wavenumbers(n, length):
    k = 2 * np.pi * np.fft.fftfreq(n, d=length / n)
    k.setflags(write=False)
    return k


def _fd_weights(offsets, order):
    """Exact finite-difference weights for ``d^order/dx^order`` at offset 0."""
    m = len(offsets)
    A = [[Fraction(o) ** p / math.factorial(p) for o in offsets] for p in range(m)]
    b = [Fraction(int(p == order)) for p in range(m)]
    for col in range(m):
        piv = next(r for r in range(col, m) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        b[col], b[piv] = b[piv], b[col]
        for r in range(m):
            if r != col and A[r][col] != 0:
                f = A[r][col] / A[col][col]
                A[r] = [a - f * c for a, c in zip(A[r], A[col])]
                b[r] -= f * b[col]
    return tuple(float(b[i] / A[i][i]) for i in range(m))


_FD_STENCILS = {
    1: {"interior": (-2, -1, 0, 1, 2), "edge": [(0, 1, 2, 3, 4), (-1, 0, 1, 2, 3)]},
    2: {"interior": (-2, -1, 0, 1, 2), "edge": [(0, 1, 2, 3, 4, 5), (-1, 0, 1, 2, 3, 4)]},
}


@lru_cache(maxsize=None)
def _stencil(order):
    spec = _FD_STENCILS[order]
    interior = (spec["interior"], _fd_weights(spec["interior"], order))
    edges = [(offs, _fd_weights(offs, order)) for offs in spec["edge"]]
    return interior, edges


def _fd_derivative(a, axis, h, order):
    a = np.moveaxis(a, axis, 0)
    n = a.shape[0]
    out = np.zeros_like(a)
    (ioffs, iw), edges = _stencil(order)
    for o, w in zip(ioffs, iw):
        out[2:n - 2] += w * a[2 + o:n - 2 + o]
    sign = -1.0 if order % 2 else 1.0
    for row, (offs, ws) in enumerate(edges):
        for o, w in zip(offs, ws):
            out[row] += w * a[row + o]
            out[n - 1 - row] += sign * w * a[n - 1 - row - o]
    return np.moveaxis(out / h ** order, 0, axis)


def _spectral_derivative(a, axis, length, order):
    n = a.shape[axis]
    k = _wavenumbers(n, length)
    factor = (1j * k) ** order
    if order % 2 and n % 2 == 0:
        factor = factor.copy()
        factor[-1] = 0.0
    shape = [1] * a.ndim
    shape[axis] = -1
    ahat = np.fft.rfft(a, axis=axis)
    return np.fft.irfft(ahat * factor.reshape(shape), n=n, axis=axis)


def derivative(a: np.ndarray, grid: Grid, axis: int, order: int = 1) -> np.ndarray:
    """``d^order a / dx_axis^order`` for an array on ``grid`` (leading axes allowed)."""
    if order not in (1, 2):
        raise ValueError("only first and second derivatives are provided")
    offset = a.ndim - grid.dim
    if grid.kind == "periodic":
        return _spectral_derivative(a, axis + offset, grid.extents[axis], order)
    return _fd_derivative(a, axis + offset, grid.spacing[axis], order)


def gradient(sf: SampledField) -> SampledField:
    if not sf.scalar:
        raise ValueError("gradient expects a scalar field")
    g = sf.grid
    return sf._like(np.stack([derivative(sf.data, g, i) for i in range(g.dim)]), False)


def divergence(sf: SampledField) -> SampledField:
    g = sf.grid
    if sf.scalar or sf.ncomp != g.dim:
        raise ValueError(f"divergence needs a {g.dim}-component vector field")
    return sf._like(sum(derivative(sf.data[i], g, i) for i in range(g.dim)), True)


def curl(sf: SampledField) -> SampledField:
    """Scalar curl in 2-D, vector curl in 3-D."""
    g = sf.grid
    if sf.scalar or sf.ncomp != g.dim or g.dim == 1:
        raise ValueError("curl needs a 2-D or 3-D vector field matching the grid dimension")
    u = sf.data
    d = lambda comp, axis: derivative(u[comp], g, axis)
    if g.dim == 2:
        return sf._like(d(1, 0) - d(0, 1), True)
    return sf._like(np.stack([d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)]), False)


def laplacian(sf: SampledField) -> SampledField:
    g = sf.grid
    out = sum(derivative(sf.data, g, i, order=2) for i in range(g.dim))
    return sf._like(out, sf.scalar)


# -- Poisson -------------------------------------------------------------------

def _green(r, dim):
    """Free-space fundamental solution of the Laplacian (``Delta G = delta``)."""
    if dim == 3:
        return -1 / (4 * np.pi * r)
    if dim == 2:
        return np.log(r) / (2 * np.pi)
    return r / 2


def _periodic_inverse(f, extents):
    """Zero-mean periodic solution of ``Delta p = f - mean(f)``."""
    n = f.shape
    axes_k = [_full_wavenumbers(m, L) for m, L in zip(n[:-1], extents[:-1])]
    axes_k.append(_wavenumbers(n[-1], extents[-1]))
    k2 = sum(k ** 2 for k in np.meshgrid(*axes_k, indexing="ij"))
    origin = (0,) * f.ndim
    k2[origin] = 1.0
    phat = -np.fft.rfftn(f) / k2
    phat[origin] = 0.0
    return np.fft.irfftn(phat, s=n, axes=tuple(range(f.ndim)))


def poisson_solve(rhs: SampledField, boundary_tol: float = BOUNDARY_TOL) -> SampledField:
    """Solve ``Delta p = rhs``.

    Periodic box: spectral inverse with the mean of ``rhs`` removed; ``p``
    has zero mean.  Truncated box: ``rhs`` is zero-padded into a periodic
    box of twice the width and solved spectrally there; the constant is
    fixed so that ``p`` averages to zero over the padding, approximating
    the decaying free-space solution.  In 3-D a net charge is first moved
    into a Gaussian whose potential is added back in closed form.  Periodic
    images of what remains contaminate the result;
    ``meta["wraparound_estimate"]`` sizes that from the remaining charge
    and dipole moment.

    ``boundary_tol`` bounds the truncated-box boundary values relative to
    the peak; sources produced by finite differences carry stencil error at
    the edges and need a looser bound than sampled closed forms.
    """
    if not rhs.scalar:
        raise ValueError("poisson_solve expects a scalar right-hand side")
    g = rhs.grid
    if g.kind == "periodic":
        p = _periodic_inverse(rhs.data, g.extents)
        return rhs._like(p, True, removed_mean=float(rhs.data.mean()))

    mag = np.abs(rhs.data)
    edge = mag[g.boundary_mask()].max()
    if mag.max() > 0 and edge > boundary_tol * mag.max():
        raise BoundaryError(f"right-hand side does not decay: boundary value {edge:.3g}")
    w = rhs.data * g.quadrature_weights
    charge = float(np.sum(w))
    source, correction = rhs.data, 0.0
    if g.dim == 3 and charge != 0.0:
        source, correction = _split_monopole(rhs.data, g, charge, w)

    padded_n = tuple(2 * n for n in g.n)
    padded_len = tuple(2 * n * h for n, h in zip(g.n, g.spacing))
    f = np.zeros(padded_n)
    inner = tuple(slice(0, n) for n in g.n)
    f[inner] = source
    p = _periodic_inverse(f, padded_len)
    shell = np.ones(padded_n, dtype=bool)
    shell[inner] = False
    p = p[inner] - p[shell].mean() + correction

    residual_charge = abs(float(np.sum(source * g.quadrature_weights)))
    dipole = float(np.sqrt(sum(np.sum(source * g.quadrature_weights * m) ** 2 for m in g.mesh)))
    D = min(padded_len)
    if g.dim == 3:
        estimate = (residual_charge / D + dipole / D ** 2) / (4 * np.pi)
    elif g.dim == 2:
        estimate = (residual_charge * math.log(D / min(g.spacing)) + dipole / D) / (2 * np.pi)
    else:
        estimate = (residual_charge * D + dipole) / 2
    return rhs._like(p, True, boundary_rhs=float(edge), net_source=charge,
                     wraparound_estimate=float(estimate))


_erf = np.vectorize(math.erf, otypes=[float])


def _split_monopole(data, g, charge, w):
    """Move the net charge of a 3-D source into a Gaussian with a closed-form potential.

    Periodic images of a charged source are not negligible (their potential
    decays like 1/D); a neutral remainder leaves only dipole-order images.
    Returns the neutral remainder and the Gaussian's free-space potential.
    """
    mesh = g.mesh
    center = [float(np.sum(w * m)) / charge for m in mesh]
    h = max(g.spacing)
    room = min(R - abs(c) for R, c in zip(g.extents, center))
    # wide enough to resolve spectrally, narrow enough to vanish on the boundary
    sigma = min(3 * h, room / 6)
    if sigma < 2 * h:
        return data, 0.0
    r = np.sqrt(sum((m - c) ** 2 for m, c in zip(mesh, center)))
    blob = np.exp(-(r / sigma) ** 2) / (np.pi ** 1.5 * sigma ** 3)
    blob *= charge / float(np.sum(blob * g.quadrature_weights))
    safe = np.where(r > 0, r, 1.0)
    potential = np.where(r > 1e-8 * sigma, -_erf(r / sigma) / (4 * np.pi * safe),
                         -1 / (2 * np.pi ** 1.5 * sigma))
    return data - blob, charge * potential


def green_reference(rhs: SampledField, points) -> np.ndarray:
    """Direct free-space Green's-function quadrature of ``Delta p = rhs``.

    O(N^d) per target point; intended as a slow oracle.  Targets must not
    coincide with grid nodes.
    """
    g = rhs.grid
    if g.kind != "truncated":
        raise ValueError("the free-space reference needs a truncated grid")
    w = rhs.data * g.quadrature_weights
    mesh = g.mesh
    out = []
    for pt in np.atleast_2d(points):
        r = np.sqrt(sum((m - c) ** 2 for m, c in zip(mesh, pt)))
        if np.any(r == 0):
            raise ValueError("target point coincides with a grid node")
        out.append(float(np.sum(_green(r, g.dim) * w)))
    return np.array(out)


# -- norms ---------------------------------------------------------------------

def integrate(values: np.ndarray, grid: Grid) -> float:
    return float(np.sum(values * grid.quadrature_weights))


def norms(sf: SampledField, omega: Optional[SampledField] = None) -> NormSet:
    """Energy ``integral |u|^2 dV`` and sup norms of velocity and vorticity."""
    if omega is None:
        omega = curl(sf) if sf.grid.dim > 1 else None
    mag = sf.magnitude()
    energy = integrate(mag ** 2, sf.grid)
    sup_w = float(omega.magnitude().max()) if omega is not None else 0.0
    return NormSet(energy, float(mag.max()), sup_w)


def bkm_integral(field, grid: Grid, t0: float, t1: float, steps: int = 200) -> float:
    """Composite trapezoid of ``sup|omega|`` over ``[t0, t1]`` with ``steps`` intervals."""
    if not t1 > t0 >= 0:
        raise ValueError("need t1 > t0 >= 0")
    if steps < 2:
        raise ValueError("need at least two intervals")
    times = np.linspace(t0, t1, steps + 1)
    sups = [norms(sample(field, grid, t)).sup_vorticity for t in times]
    return float(np.trapezoid(sups, times))
