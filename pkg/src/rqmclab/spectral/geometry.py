"""Isotropic-grid geometry: boundary-cell counts and alternating sums.

Cells are the half-open boxes [k/r, (k+1)/r)^s. A cell belongs to T_tot when
its closure meets the (closed) region and to T_bdy when the region boundary
strictly straddles it, i.e. the defining functional passes through the
cell's interior; a boundary that only touches a cell edge or corner does
not count. T_tot is decomposed into axis-parallel boxes by merging maximal
runs of member cells along axis 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BudgetError
from ..integrands import AxisBox, FullCube, Halfspace, Hypersphere, PartialAxis, Region

_MAX_CELLS = 1 << 24


def alternating_sum(f, y, h) -> float:
    """Signed vertex sum over the box [y, y+h]: sum_v (-1)^|v| f(y + h off v).

    The subset v picks the coordinates held at y; all others get h added.
    f is treated as 0 outside [0,1)^s, so vertices may leave the cube.
    """
    y = np.asarray(y, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if y.shape != h.shape or y.ndim != 1:
        raise ValueError("y and h must be equal-length vectors")
    s = len(y)
    masks = np.arange(1 << s)
    in_v = ((masks[:, None] >> np.arange(s)) & 1).astype(bool)  # (2^s, s)
    verts = np.where(in_v, y, y + h)
    signs = np.where(np.sum(in_v, axis=1) % 2 == 0, 1.0, -1.0)
    inside = np.all((verts >= 0.0) & (verts < 1.0), axis=1)
    vals = np.zeros(len(verts))
    if np.any(inside):
        vals[inside] = np.asarray(f(verts[inside]), dtype=np.float64)
    return float(np.sum(signs * vals))


@dataclass
class CellCounts:
    r: int
    t_tot: int
    t_bdy: int
    boxes: list[tuple[tuple[int, ...], tuple[int, ...]]]  # integer index boxes [lo, hi)
    tot_mask: np.ndarray
    bdy_mask: np.ndarray


def _grid_corners(r: int, s: int):
    axes = [np.arange(r) for _ in range(s)]
    mesh = np.meshgrid(*axes, indexing="ij")
    lo = np.stack(mesh, axis=-1).astype(np.float64) / r
    return lo, lo + 1.0 / r


def _classify(region: Region, lo: np.ndarray, hi: np.ndarray):
    """(tot, bdy) boolean grids for one region factor."""
    if isinstance(region, FullCube):
        tot = np.ones(lo.shape[:-1], dtype=bool)
        return tot, np.zeros_like(tot)
    if isinstance(region, Hypersphere):
        # cells live in [0,1]^s and the ball is centered at the origin, so the
        # lower corner is the nearest point and the upper corner the farthest
        near = np.sum(lo * lo, axis=-1)
        far = np.sum(hi * hi, axis=-1)
        r2 = region.radius ** 2
        return near <= r2, (near < r2) & (r2 < far)
    if isinstance(region, Halfspace):
        c = np.asarray(region.coeffs)
        low = np.sum(np.where(c >= 0, lo * c, hi * c), axis=-1)
        high = np.sum(np.where(c >= 0, hi * c, lo * c), axis=-1)
        return low <= region.bound, (low < region.bound) & (region.bound < high)
    if isinstance(region, AxisBox):
        a = np.asarray(region.lower)
        b = np.asarray(region.upper)
        tot = np.all((lo < b) & (hi > a), axis=-1)
        interior = np.all((lo >= a) & (hi <= b), axis=-1)
        return tot, tot & ~interior
    raise ValueError(f"cell classification unsupported for {type(region).__name__}")


def _classify_partial(region: PartialAxis, r: int, s: int):
    axes = set(region.box_axes)
    rest = [j for j in range(s) if j not in axes]
    box = AxisBox(region.lower, region.upper)
    lo_b, hi_b = _grid_corners(r, len(region.box_axes))
    tot_b, bdy_b = _classify(box, lo_b, hi_b)
    if not rest:
        return tot_b, bdy_b
    lo_r, hi_r = _grid_corners(r, len(rest))
    # complement of the ball: the upper corner is nearest to the region
    near = np.sum(hi_r * hi_r, axis=-1)
    far = np.sum(lo_r * lo_r, axis=-1)
    r2 = region.radius ** 2
    tot_r = near >= r2
    bdy_r = (far < r2) & (r2 < near)
    # assemble on the full grid in axis order: box axes then remaining axes,
    # then transpose into natural axis order
    order = list(region.box_axes) + rest
    perm = np.argsort(order)
    tot = np.multiply.outer(tot_b, tot_r).transpose(perm)
    bdy = (np.multiply.outer(bdy_b, tot_r) | np.multiply.outer(tot_b, bdy_r)).transpose(perm)
    return tot, bdy


def _runs_to_boxes(tot: np.ndarray) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    boxes = []
    s = tot.ndim
    if s == 1:
        col = tot
        trailing = [()]
    else:
        trailing = list(np.ndindex(*tot.shape[1:]))
    for idx in trailing:
        col = tot[(slice(None),) + idx]
        run_start = None
        for k in range(len(col) + 1):
            on = k < len(col) and col[k]
            if on and run_start is None:
                run_start = k
            elif not on and run_start is not None:
                boxes.append(((run_start,) + idx, (k,) + tuple(i + 1 for i in idx)))
                run_start = None
    return boxes


def _region_dim(region: Region) -> int | None:
    if isinstance(region, Halfspace):
        return len(region.coeffs)
    if isinstance(region, AxisBox):
        return len(region.lower)
    return None  # sphere, cube, and partial regions do not pin a dimension


def count_boundary_cells(region: Region, r: int, dim: int | None = None) -> CellCounts:
    """Classify the r^s isotropic cells against the region and its boundary.

    Returns the member/boundary counts and the axis-parallel decomposition
    of T_tot (maximal runs along axis 0), which covers every member cell
    exactly once. ``dim`` is required for regions that do not pin their own
    dimension (sphere, full cube, partial axis-parallel).
    """
    if r < 1:
        raise ValueError("grid resolution r must be >= 1")
    pinned = _region_dim(region)
    if pinned is not None and dim is not None and pinned != dim:
        raise ValueError(f"region pins dimension {pinned}, got dim={dim}")
    s = pinned if pinned is not None else dim
    if s is None:
        raise ValueError(f"{type(region).__name__} needs an explicit dim")
    if r ** s > _MAX_CELLS:
        raise BudgetError(f"{r}^{s} cells exceed the classification budget")
    if isinstance(region, PartialAxis):
        tot, bdy = _classify_partial(region, r, s)
    else:
        lo, hi = _grid_corners(r, s)
        tot, bdy = _classify(region, lo, hi)
    boxes = _runs_to_boxes(tot)
    return CellCounts(r=r, t_tot=int(tot.sum()), t_bdy=int(bdy.sum()),
                      boxes=boxes, tot_mask=tot, bdy_mask=bdy)
