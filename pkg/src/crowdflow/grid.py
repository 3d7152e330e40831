"""Uniform node-centred grids, exit/wall classification and shared stencils.

Fields are plain numpy arrays. A scalar field on a 1D grid has shape ``(nx,)``
and on a 2D grid ``(ny, nx)``, so that C-order flattening walks x fastest.
A vector field carries the physical component first: ``(dim, *grid.shape)``
with component 0 along x.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError

CORNERS = ("sw", "se", "nw", "ne")
ENDPOINTS = ("left", "right")

# relative tolerance used when comparing node positions to exit arcs / spacings
_POS_RTOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Uniform Cartesian grid with nodes on the boundary.

    ``extents`` and ``n_nodes`` are given per physical axis, x first.
    """

    extents: tuple[tuple[float, float], ...]
    n_nodes: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "extents", tuple((float(lo), float(hi)) for lo, hi in self.extents))
        object.__setattr__(self, "n_nodes", tuple(int(n) for n in self.n_nodes))
        if len(self.extents) not in (1, 2) or len(self.extents) != len(self.n_nodes):
            raise ConfigError("grid must be 1D or 2D with one node count per axis")
        for (lo, hi), n in zip(self.extents, self.n_nodes):
            if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
                raise ConfigError(f"empty or invalid extent [{lo}, {hi}]")
            if n < 3:
                raise ConfigError(f"need at least 3 nodes per axis, got {n}")
        spacings = [(hi - lo) / (n - 1) for (lo, hi), n in zip(self.extents, self.n_nodes)]
        if not np.allclose(spacings, spacings[0], rtol=_POS_RTOL, atol=0.0):
            raise ConfigError(f"grid spacing differs between axes: {spacings}")

    @property
    def dim(self) -> int:
        return len(self.n_nodes)

    @property
    def h(self) -> float:
        lo, hi = self.extents[0]
        return (hi - lo) / (self.n_nodes[0] - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(reversed(self.n_nodes))

    @property
    def size(self) -> int:
        return int(np.prod(self.n_nodes))

    def np_axis(self, k: int) -> int:
        """Array axis holding physical axis ``k`` (0 = x, 1 = y)."""
        return self.dim - 1 - k

    def coords(self, k: int = 0) -> np.ndarray:
        lo, _ = self.extents[k]
        return lo + self.h * np.arange(self.n_nodes[k])

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Node coordinates broadcast to ``shape``, x first."""
        if self.dim == 1:
            return (self.coords(0),)
        y, x = np.meshgrid(self.coords(1), self.coords(0), indexing="ij")
        return (x, y)

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights per node."""
        w = np.ones(1)
        for n in reversed(self.n_nodes):
            axis_w = np.full(n, self.h)
            axis_w[[0, -1]] = 0.5 * self.h
            w = np.multiply.outer(w, axis_w)
        return w.reshape(self.shape)

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for a in range(self.dim):
            idx = [slice(None)] * self.dim
            idx[a] = 0
            mask[tuple(idx)] = True
            idx[a] = -1
            mask[tuple(idx)] = True
        return mask

    def transverse_weights(self, k: int) -> np.ndarray | float:
        """Trapezoid weights of a boundary face normal to physical axis ``k``."""
        if self.dim == 1:
            return 1.0
        other = 1 - k
        w = np.full(self.n_nodes[other], self.h)
        w[[0, -1]] = 0.5 * self.h
        return w


@dataclass(frozen=True)
class BoundaryMap:
    """Exit/wall labels of the boundary nodes plus the exit rate ``beta``."""

    exit_mask: np.ndarray
    wall_mask: np.ndarray
    beta: float = 1.0

    @property
    def has_exits(self) -> bool:
        return bool(self.exit_mask.any())

    def labels(self, grid: GridSpec) -> dict[tuple[int, ...], str]:
        """Map from array index to "Exit"/"Wall" for every boundary node."""
        out = {}
        for idx in zip(*np.nonzero(grid.boundary_mask)):
            idx = tuple(int(i) for i in idx)
            out[idx] = "Exit" if self.exit_mask[idx] else "Wall"
        return out

    def exit_flux(self, f: np.ndarray) -> np.ndarray:
        """Outward Robin flux ``beta * f`` on exit nodes, zero elsewhere."""
        return np.where(self.exit_mask, self.beta * f, 0.0)


def _exit_mask(grid: GridSpec, exits: str | Sequence[str], width: float) -> np.ndarray:
    mask = np.zeros(grid.shape, dtype=bool)
    if isinstance(exits, str):
        exits = [exits]
    exits = list(exits)
    if "all" in exits:
        if len(exits) > 1:
            raise ConfigError("exit 'all' cannot be combined with other exits")
        return grid.boundary_mask.copy()
    if grid.dim == 1:
        for name in exits:
            if name not in ENDPOINTS:
                raise ConfigError(f"unknown 1D exit {name!r}; expected one of {ENDPOINTS} or 'all'")
            mask[0 if name == "left" else -1] = True
        return mask

    (xlo, xhi), (ylo, yhi) = grid.extents
    if width <= 0:
        raise ConfigError(f"exit_width must be positive, got {width}")
    if width > min(xhi - xlo, yhi - ylo):
        raise ConfigError(f"exit_width {width} exceeds the side length of the domain")
    x, y = grid.mesh()
    half = 0.5 * width * (1 + _POS_RTOL)
    boundary = grid.boundary_mask
    for name in exits:
        if name not in CORNERS:
            raise ConfigError(f"unknown 2D exit {name!r}; expected one of {CORNERS} or 'all'")
        cx = xlo if name[1] == "w" else xhi
        cy = ylo if name[0] == "s" else yhi
        # arc distance along the boundary is the offset along the edge the node sits on
        on_vertical = np.isclose(x, cx, rtol=0, atol=_POS_RTOL * grid.h)
        on_horizontal = np.isclose(y, cy, rtol=0, atol=_POS_RTOL * grid.h)
        mask |= boundary & on_vertical & (np.abs(y - cy) <= half)
        mask |= boundary & on_horizontal & (np.abs(x - cx) <= half)
    return mask


def build_grid(
    extents: Sequence[Sequence[float]],
    n_nodes: Sequence[int],
    exits: str | Sequence[str] = "all",
    exit_width: float = 0.2,
    beta: float = 1.0,
) -> tuple[GridSpec, BoundaryMap]:
    """Build the grid and classify its boundary nodes.

    In 1D the exits are named endpoints ("left", "right"). In 2D they are
    corners ("sw", "se", "nw", "ne"); every boundary node within arc distance
    ``exit_width / 2`` of a named corner becomes an exit. ``"all"`` makes the
    whole boundary an exit.
    """
    grid = GridSpec(tuple(tuple(e) for e in extents), tuple(n_nodes))
    exit_mask = _exit_mask(grid, exits, exit_width)
    if beta < 0:
        raise ConfigError(f"beta must be non-negative, got {beta}")
    if beta > 0 and not exit_mask.any():
        raise ConfigError("beta > 0 but no exits were requested")
    wall_mask = grid.boundary_mask & ~exit_mask
    return grid, BoundaryMap(exit_mask, wall_mask, float(beta))


def trapezoid(f: np.ndarray, grid: GridSpec) -> float:
    """Trapezoid-rule integral of a node field over the domain."""
    return float(np.sum(grid.weights * f))


def boundary_flux_integral(q: np.ndarray, grid: GridSpec) -> float:
    """Integral of an outward flux density over all boundary faces.

    Corner nodes belong to two faces and contribute to both.
    """
    total = 0.0
    for k in range(grid.dim):
        a = grid.np_axis(k)
        tw = grid.transverse_weights(k)
        for end in (0, -1):
            total += float(np.sum(tw * np.take(q, end, axis=a)))
    return total


def gradient_central(f: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Central differences inside, first-order one-sided differences on the boundary."""
    return np.stack([np.gradient(f, grid.h, axis=grid.np_axis(k), edge_order=1) for k in range(grid.dim)])


def face_average(f: np.ndarray, grid: GridSpec, k: int) -> np.ndarray:
    a = grid.np_axis(k)
    lo = [slice(None)] * f.ndim
    hi = [slice(None)] * f.ndim
    lo[a] = slice(0, -1)
    hi[a] = slice(1, None)
    return 0.5 * (f[tuple(lo)] + f[tuple(hi)])


def face_difference(f: np.ndarray, grid: GridSpec, k: int) -> np.ndarray:
    """``(f[i+1] - f[i]) / h`` on the faces normal to physical axis ``k``."""
    return np.diff(f, axis=grid.np_axis(k)) / grid.h


def flux_divergence(face_flux: Sequence[np.ndarray], grid: GridSpec, outward: np.ndarray | None = None) -> np.ndarray:
    """Conservative divergence of a flux given on the faces between nodes.

    ``face_flux[k]`` holds the flux component along physical axis ``k`` on the
    faces normal to it (one fewer entry than nodes along that axis).
    Boundary nodes own half cells; on them the flux through the domain
    boundary is the prescribed ``outward`` value, so that
    ``trapezoid(div) == boundary_flux_integral(outward)`` exactly.
    """
    h = grid.h
    div = np.zeros(grid.shape)
    if outward is None:
        outward = np.zeros(grid.shape)
    for k in range(grid.dim):
        a = grid.np_axis(k)
        J = np.moveaxis(face_flux[k], a, 0)
        q = np.moveaxis(outward, a, 0)
        d = np.moveaxis(div, a, 0)  # view into div
        d[1:-1] += (J[1:] - J[:-1]) / h
        d[0] += (J[0] + q[0]) * (2.0 / h)
        d[-1] += (q[-1] - J[-1]) * (2.0 / h)
    return div


def laplacian_bc(f: np.ndarray, grid: GridSpec, flux: np.ndarray | None = None, nu: float = 1.0) -> np.ndarray:
    """Discrete Laplacian with a ghost-node flux closure.

    On a boundary node whose outward normal lies along an axis the missing
    neighbour is replaced by the ghost value ``f_in - (2 h / nu) * q``, where
    ``f_in`` is the first interior neighbour and ``q`` the prescribed outward
    diffusive flux ``-nu * df/dn``. ``flux=None`` means zero flux everywhere.
    """
    h = grid.h
    out = np.zeros(grid.shape)
    if flux is not None and np.any(flux) and nu <= 0:
        raise ConfigError("a nonzero boundary flux needs a positive diffusion coefficient")
    for k in range(grid.dim):
        a = grid.np_axis(k)
        g = np.moveaxis(f, a, 0)
        lo_ghost = g[1].copy()
        hi_ghost = g[-2].copy()
        if flux is not None and nu > 0:
            q = np.moveaxis(flux, a, 0)
            lo_ghost = lo_ghost - (2.0 * h / nu) * q[0]
            hi_ghost = hi_ghost - (2.0 * h / nu) * q[-1]
        padded = np.concatenate([lo_ghost[None], g, hi_ghost[None]], axis=0)
        lap = ((padded[2:] + padded[:-2]) - 2.0 * padded[1:-1]) / (h * h)
        out += np.moveaxis(lap, 0, a)
    return out
