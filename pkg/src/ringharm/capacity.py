"""Grid solver for the capacity and conformal modulus of a ring domain.

The potential ``u`` (1 on the bounded complement component, 0 on the
unbounded one) is computed on a uniform node grid.  Grid lines are cut
exactly against the complement pieces (see :mod:`ringharm.geometry`), and
a node next to a cut gets the symmetric cut-cell treatment of Gibou et al.:
the arm of length ``tau*h`` contributes ``(u_i - g)/tau`` to the 5-point
stencil.  The resulting matrix is a symmetric M-matrix, so the discrete
maximum principle holds and the discrete Dirichlet energy equals the flux

    cap_h = sum over arms ending on the inner set of (1 - u_i) / tau.

Several nested levels are Richardson-extrapolated to first order.
Unbounded domains are truncated to a box with Dirichlet value 0 on its
sides.  The truncation changes the capacity by a factor that decays like a
power of the box size and is nearly independent of the spacing; it is
measured with two larger boxes on the coarsest grid and divided out.
"""

from __future__ import annotations

import dataclasses
import math
import struct
from dataclasses import dataclass, field

import numpy as np
import pyamg
import scipy.sparse as sp

from . import geometry as geo
from .domains import AffineMap, ExtendedModulus, RingDomain
from .elliptic import conformal_modulus_closed_form, has_closed_form

OUTER, INNER, INTERIOR = 0, 1, 2
DIRICHLET0, DIRICHLET1 = OUTER, INNER

_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))
_SNAP = 1e-3
_MAGIC = b"RINGPOT1"


class SolverError(RuntimeError):
    def __init__(self, message: str, residual: float = math.nan):
        super().__init__(message)
        self.residual = residual


@dataclass
class PotentialGrid:
    """Node values of the discrete potential.

    ``values[i, j]`` and ``mask[i, j]`` belong to the node
    ``origin + spacing*(i + 1j*j)``; the mask holds ``DIRICHLET0``,
    ``DIRICHLET1`` or ``INTERIOR``.
    """

    origin: complex
    spacing: float
    nx: int
    ny: int
    values: np.ndarray
    mask: np.ndarray
    rotation: complex = 1 + 0j

    def nodes(self) -> np.ndarray:
        """Node positions in the domain's own coordinates.

        The solver may work in a rotated frame (``rotation`` times the
        domain); the dump format stores the frame coordinates.
        """
        i = np.arange(self.nx).reshape(-1, 1)
        j = np.arange(self.ny).reshape(1, -1)
        return (self.origin + self.spacing * (i + 1j * j)) * np.conj(self.rotation)

    def dump(self, path) -> None:
        """Write ``RINGPOT1``, nx, ny (uint32), spacing, origin (float64), values."""
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<IIddd", self.nx, self.ny, self.spacing,
                                 self.origin.real, self.origin.imag))
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())

    @staticmethod
    def load(path) -> "PotentialGrid":
        with open(path, "rb") as fh:
            if fh.read(8) != _MAGIC:
                raise ValueError("not a RINGPOT1 file")
            nx, ny, h, ox, oy = struct.unpack("<IIddd", fh.read(struct.calcsize("<IIddd")))
            values = np.frombuffer(fh.read(), dtype="<f8").reshape(nx, ny).copy()
        mask = np.full((nx, ny), INTERIOR, dtype=np.int8)
        mask[values == 0.0] = DIRICHLET0
        mask[values == 1.0] = DIRICHLET1
        return PotentialGrid(complex(ox, oy), h, nx, ny, values, mask)


@dataclass
class CapacityEstimate:
    cap: float
    modulus: float
    abs_error: float
    grid_levels: list = field(default_factory=list)
    extrapolated: bool = False
    order: float | None = None
    far_field_correction: float = 0.0
    grid: PotentialGrid | None = None

    def as_modulus(self) -> ExtendedModulus:
        return ExtendedModulus(self.modulus, "grid-solver", self.abs_error)


# ---------------------------------------------------------------------------
# geometry of the computational box


@dataclass(frozen=True)
class Layout:
    """Box, scale and separation used to build the grids for a domain."""

    center: complex
    half_width: float
    half_height: float
    scale: float
    dsep: float
    unbounded: bool
    inner_size: float = math.inf


def _layout(inner, outer, domain_bounded: bool, box_factor: float, samples: int = 2048) -> Layout:
    pts = np.concatenate([s.boundary_points(samples) for s in inner])
    dist = np.full(pts.shape, np.inf)
    for s in outer:
        dist = np.minimum(dist, s.distance(pts))
    dsep = float(dist.min())
    if not (dsep > 0):
        raise ValueError("complement components touch")
    inner_size = max(float(np.ptp(pts.real)), float(np.ptp(pts.imag)))
    if domain_bounded:
        window = 4.0 * float(np.abs(pts).max()) + 10.0 * dsep
        opts = np.concatenate([s.boundary_points(samples, window) for s in outer])
        x0, x1 = opts.real.min(), opts.real.max()
        y0, y1 = opts.imag.min(), opts.imag.max()
        scale = max(x1 - x0, y1 - y0)
        margin = 0.02 * scale
        return Layout(complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)),
                      0.5 * (x1 - x0) + margin, 0.5 * (y1 - y0) + margin, scale, dsep, False,
                      inner_size)
    # nearest point of the outer component, recovered from the sampled distance
    k = int(np.argmin(dist))
    p = pts[k]
    window = 2.0 * (abs(p) + dsep)
    opts = np.concatenate([s.boundary_points(samples, window) for s in outer])
    q = opts[np.argmin(np.abs(opts - p))]
    cloud = np.append(pts, q)
    x0, x1 = cloud.real.min(), cloud.real.max()
    y0, y1 = cloud.imag.min(), cloud.imag.max()
    diam = max(x1 - x0, y1 - y0, dsep)
    half = 0.5 * box_factor * diam
    return Layout(complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)), half, half, diam, dsep, True, inner_size)


def _align_thin(inner, outer, anisotropy: float = 8.0, samples: int = 2048):
    """Rotate so that a thin bounded component lies along a grid line.

    A slit whose tip falls between grid lines is partly invisible to the
    cut-cell scheme, which makes the error irregular in ``h``.  Rotations
    keep the modulus, so when the bounded component is elongated the sets
    are turned to put its long axis on the horizontal line through its
    center.  Returns ``(inner, outer, rotation, anchor)``.
    """
    pts = np.concatenate([s.boundary_points(samples) for s in inner])
    c = pts.mean()
    xy = np.column_stack([(pts - c).real, (pts - c).imag])
    sv, vt = np.linalg.svd(xy, full_matrices=False)[1:]
    if sv[1] > sv[0] / anisotropy:
        return inner, outer, 1 + 0j, None
    axis = complex(vt[0, 0], vt[0, 1])
    rot = axis.conjugate() / abs(axis)
    phi = AffineMap(rot, 0j, 0j)
    inner = [s.transformed(phi) for s in inner]
    outer = [s.transformed(phi) for s in outer]
    rp = rot * pts
    anchor = complex(0.5 * (rp.real.min() + rp.real.max()), 0.5 * (rp.imag.min() + rp.imag.max()))
    return inner, outer, rot, anchor


# ---------------------------------------------------------------------------
# cut-cell discretization


class CutCellGrid:
    """Node labels and boundary arm fractions for one grid."""

    def __init__(self, inner, outer, origin: complex, spacing: float, nx: int, ny: int):
        self.origin, self.h, self.nx, self.ny = origin, spacing, nx, ny
        self.tau = np.full((4, nx, ny), np.inf)
        self.comp = np.zeros((4, nx, ny), dtype=np.int8)
        comps = [(OUTER, s) for s in outer] + [(INNER, s) for s in inner]
        lab_h = np.full((nx, ny), INTERIOR, dtype=np.int8)
        lab_v = np.full((nx, ny), INTERIOR, dtype=np.int8)
        for j in range(ny):
            p0 = origin + 1j * spacing * j
            self._cut_line(comps, p0, 1.0 + 0j, nx, lab_h[:, j],
                           self.tau[0, :, j], self.comp[0, :, j], self.tau[1, :, j], self.comp[1, :, j])
        for i in range(nx):
            p0 = origin + spacing * i
            self._cut_line(comps, p0, 1j, ny, lab_v[i, :],
                           self.tau[2, i, :], self.comp[2, i, :], self.tau[3, i, :], self.comp[3, i, :])
        label = lab_h
        fill = (label == INTERIOR) & (lab_v != INTERIOR)
        label[fill] = lab_v[fill]
        # nodes sitting almost on a boundary become boundary nodes
        near = (label == INTERIOR) & (self.tau.min(axis=0) < _SNAP)
        if near.any():
            which = np.argmin(self.tau, axis=0)
            snapped = np.take_along_axis(self.comp, which[None], axis=0)[0]
            label[near] = snapped[near]
        self.label = label
        self._close_arms()

    def _cut_line(self, comps, p0, d, n, lab, ftau, fcomp, btau, bcomp):
        h = self.h
        tmax = (n - 1) * h
        ivs = [(-math.inf, 0.0, OUTER), (tmax, math.inf, OUTER)]
        for c, s in comps:
            for a, b in s.line_intervals(p0, d, -h, tmax + h, h):
                ivs.append((a, b, c))
        for a, b, c in ivs:
            if b < -1e-9 * h or a > tmax + 1e-9 * h:
                continue
            lo = 0 if a == -math.inf else max(0, math.ceil(a / h - 1e-9))
            hi = n - 1 if b == math.inf else min(n - 1, math.floor(b / h + 1e-9))
            if hi >= lo:
                lab[lo:hi + 1] = np.where(lab[lo:hi + 1] == INTERIOR, c, lab[lo:hi + 1])
            if a != -math.inf:
                left = math.ceil(a / h - 1e-9) - 1
                if 0 <= left < n:
                    t = (a - left * h) / h
                    if t < ftau[left]:
                        ftau[left], fcomp[left] = t, c
            if b != math.inf:
                right = math.floor(b / h + 1e-9) + 1
                if 0 <= right < n:
                    t = (right * h - b) / h
                    if t < btau[right]:
                        btau[right], bcomp[right] = t, c

    def _close_arms(self):
        """Arms pointing at a boundary node without a recorded cut end there (tau = 1)."""
        lab = self.label
        pad = np.pad(lab, 1, constant_values=OUTER)
        for k, (di, dj) in enumerate(_DIRS):
            nb = pad[1 + di:1 + di + self.nx, 1 + dj:1 + dj + self.ny]
            missing = (lab == INTERIOR) & np.isinf(self.tau[k]) & (nb != INTERIOR)
            self.tau[k][missing] = 1.0
            self.comp[k][missing] = nb[missing]
        np.clip(self.tau, _SNAP, None, out=self.tau)

    def assemble(self):
        interior = self.label == INTERIOR
        n = int(interior.sum())
        if n == 0:
            raise ValueError("grid has no interior nodes; spacing too coarse")
        idx = -np.ones((self.nx, self.ny), dtype=np.int64)
        idx[interior] = np.arange(n)
        ii, jj = np.nonzero(interior)
        me = idx[ii, jj]
        diag = np.zeros(n)
        rhs = np.zeros(n)
        rows, cols = [], []
        for k, (di, dj) in enumerate(_DIRS):
            t = self.tau[k][ii, jj]
            c = self.comp[k][ii, jj]
            cut = np.isfinite(t)
            diag += np.where(cut, 1.0 / np.where(cut, t, 1.0), 1.0)
            rhs += np.where(cut & (c == INNER), 1.0 / np.where(cut, t, 1.0), 0.0)
            nb = idx[ii[~cut] + di, jj[~cut] + dj]
            if (nb < 0).any():
                raise SolverError("inconsistent cut-cell labels")
            rows.append(me[~cut])
            cols.append(nb)
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        data = np.concatenate([diag, -np.ones(len(r))])
        A = sp.csr_matrix((data, (np.concatenate([np.arange(n), r]), np.concatenate([np.arange(n), c]))),
                          shape=(n, n))
        return A, rhs, (ii, jj)

    def capacity(self, u_interior, where) -> float:
        ii, jj = where
        total = 0.0
        for k in range(4):
            t = self.tau[k][ii, jj]
            hit = np.isfinite(t) & (self.comp[k][ii, jj] == INNER)
            total += float(np.sum((1.0 - u_interior[hit]) / t[hit]))
        return total

    def boundary_values(self) -> np.ndarray:
        out = np.zeros((self.nx, self.ny))
        out[self.label == INNER] = 1.0
        return out


def _prolong(coarse: np.ndarray) -> np.ndarray:
    nx, ny = coarse.shape
    fine = np.zeros((2 * nx - 1, 2 * ny - 1))
    fine[::2, ::2] = coarse
    fine[1::2, ::2] = 0.5 * (coarse[:-1] + coarse[1:])
    fine[:, 1::2] = 0.5 * (fine[:, :-1:2] + fine[:, 2::2])
    return fine


def _solve_grid(grid: CutCellGrid, guess: np.ndarray | None, tol: float):
    A, rhs, where = grid.assemble()
    x0 = None if guess is None else guess[where]
    ml = pyamg.ruge_stuben_solver(A)
    residuals: list = []
    u = ml.solve(rhs, x0=x0, tol=tol, accel="cg", maxiter=400, residuals=residuals)
    rel = float(np.linalg.norm(rhs - A @ u) / max(np.linalg.norm(rhs), 1e-300))
    if not rel <= 100 * tol:
        raise SolverError(f"linear solve did not converge (relative residual {rel:.3e})", rel)
    full = grid.boundary_values()
    full[where] = u
    return grid.capacity(u, where), full


def _grid_for(inner, outer, center, half_w, half_h, h, n_cells_x=None, n_cells_y=None):
    cx = n_cells_x if n_cells_x is not None else max(2, int(math.ceil(2 * half_w / h)))
    cy = n_cells_y if n_cells_y is not None else max(2, int(math.ceil(2 * half_h / h)))
    origin = center - 0.5 * h * (cx + 1j * cy)
    return CutCellGrid(inner, outer, origin, h, cx + 1, cy + 1)


def default_spacing(layout: Layout) -> float:
    base = layout.scale / (8.0 if layout.unbounded else 16.0)
    return min(base, layout.dsep / 2.0, layout.inner_size / 4.0)


def rasterize(d: RingDomain, spacing: float, box_factor: float = 8.0) -> PotentialGrid:
    """Label the nodes of a grid with the given spacing (no solve)."""
    inner, outer = d.complement_sets()
    lay = _layout(inner, outer, d.domain_bounded, box_factor)
    if spacing > lay.dsep / 2.0:
        raise ValueError(f"spacing {spacing} too coarse to separate the boundary components "
                         f"(separation {lay.dsep:.4g})")
    g = _grid_for(inner, outer, lay.center, lay.half_width, lay.half_height, spacing)
    mask = g.label.copy()
    return PotentialGrid(g.origin, spacing, g.nx, g.ny, g.boundary_values(), mask)


def _richardson(hs, caps):
    """First-order Richardson extrapolation of the last two levels.

    Also returns the observed order from the last three levels (``None``
    with fewer levels), reported for information only: cut positions
    change irregularly with ``h`` near oblique slits, which makes the
    observed order too noisy to extrapolate with.
    """
    order = None
    if len(caps) >= 3:
        d1 = caps[-2] - caps[-3]
        d2 = caps[-1] - caps[-2]
        if d1 != 0 and d2 != 0 and d1 / d2 > 0:
            order = math.log(d1 / d2) / math.log(hs[-2] / hs[-1])
    r = hs[-2] / hs[-1]
    return caps[-1] + (caps[-1] - caps[-2]) / (r - 1.0), order


def _box_limit(far):
    """Change of capacity from box size L to an infinite box, from boxes L, 2L, 4L."""
    d1, d2 = far[0] - far[1], far[1] - far[2]
    q = 1.0
    if d1 > 0 and d2 > 0 and d1 / d2 > 1.0:
        q = min(max(math.log2(d1 / d2), 0.5), 3.0)
    tail = d2 / (2 ** q - 1.0)
    return far[2] - tail - far[0], abs(tail)


def solve_capacity(d: RingDomain, levels: int = 3, spacing: float | None = None,
                   box_factor: float = 8.0, far_field: bool = True, tol: float = 1e-10,
                   max_nodes: int = 800_000, keep_grid: bool = False) -> CapacityEstimate:
    """Capacity and modulus of ``d`` from ``levels`` successively halved grids.

    ``spacing`` is the coarsest spacing; by default it is an eighth (sixteenth
    for bounded domains) of the geometric scale, and never more than half the
    separation between the complement components.
    """
    if levels < 2:
        raise ValueError("at least two levels are needed for an error estimate")
    inner, outer = d.complement_sets()
    rotation, anchor = 1 + 0j, None
    if not d.domain_bounded:
        inner, outer, rotation, anchor = _align_thin(inner, outer)
    lay = _layout(inner, outer, d.domain_bounded, box_factor)
    if anchor is not None:
        lay = dataclasses.replace(lay, center=anchor, half_width=lay.half_width + abs(anchor - lay.center),
                                  half_height=lay.half_height + abs(anchor - lay.center))
    h0 = default_spacing(lay) if spacing is None else float(spacing)
    if h0 > lay.dsep / 2.0 * (1 + 1e-12):
        raise ValueError(f"spacing {h0} too coarse to separate the boundary components")
    def cells(h):
        return (2 * max(1, int(math.ceil(lay.half_width / h))),
                2 * max(1, int(math.ceil(lay.half_height / h))))

    cx, cy = cells(h0)
    refine = 2 ** (levels - 1)
    finest = (cx * refine + 1) * (cy * refine + 1)
    if spacing is not None and finest > 10 * max_nodes:
        raise ValueError(f"finest grid would have {finest} nodes (limit {10 * max_nodes})")
    if spacing is None and finest > max_nodes:
        # multi-scale geometry: accept a coarser start, the extrapolation error grows accordingly
        h0 *= math.sqrt(finest / max_nodes) * 1.01
        cx, cy = cells(h0)

    hs, caps = [], []
    full = None
    grid = None
    for lev in range(levels):
        h = h0 / 2 ** lev
        grid = _grid_for(inner, outer, lay.center, 0, 0, h, cx * 2 ** lev, cy * 2 ** lev)
        guess = None if full is None else _prolong(full)
        cap, full = _solve_grid(grid, guess, tol)
        hs.append(h)
        caps.append(cap)
    cap_x, order = _richardson(hs, caps)
    mod_last = 2 * math.pi / caps[-1]
    mod_x = 2 * math.pi / cap_x
    err = abs(mod_last - mod_x)

    correction = 0.0
    if lay.unbounded and far_field:
        # the relative capacity change caused by the box barely depends on h,
        # so it is measured on the coarsest spacing and applied as a factor
        far = [caps[0]]
        for m in (2, 4):
            g = _grid_for(inner, outer, lay.center, 0, 0, h0, cx * m, cy * m)
            far.append(_solve_grid(g, None, tol)[0])
        delta, tail = _box_limit(far)
        factor = (caps[0] + delta) / caps[0]
        correction = cap_x * (factor - 1.0)
        cap_x *= factor
        mod_x = 2 * math.pi / cap_x
        err += 2 * math.pi / cap_x ** 2 * (0.03 * abs(correction) + 0.2 * tail * factor)

    pg = None
    if keep_grid:
        pg = PotentialGrid(grid.origin, grid.h, grid.nx, grid.ny, full, grid.label.copy(), rotation)
    return CapacityEstimate(cap_x, mod_x, err, list(zip(hs, caps)), True, order, correction, pg)


def modulus_best(d: RingDomain, levels: int = 3, **solver_kw) -> ExtendedModulus:
    """Closed form when one exists, otherwise the grid solver."""
    if has_closed_form(d):
        return conformal_modulus_closed_form(d)
    return solve_capacity(d, levels=levels, **solver_kw).as_modulus()
