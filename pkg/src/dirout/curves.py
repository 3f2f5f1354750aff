"""Data model for vector-valued curves sampled on a shared grid.

A dataset is a collection of groups; each group holds curves observed at the
same ordered time points. Integration against the grid uses trapezoidal
weights normalized to sum to one, i.e. a constant weight function on the
observation interval.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CsvFormatError

__all__ = [
    "Grid",
    "Curve",
    "FunctionalGroup",
    "integrate",
    "derivative_augment",
    "read_groups_csv",
    "write_groups_csv",
]


@dataclass(frozen=True, eq=False)
class Grid:
    """Ordered observation times within a compact interval.

    Args:
        points: strictly increasing time points, length >= 2.
        measure: total length of the underlying interval; defaults to the
            span of the points.
    """

    points: np.ndarray
    measure: float = field(default=0.0)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("grid needs at least 2 one-dimensional points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)
        measure = self.measure if self.measure > 0 else float(pts[-1] - pts[0])
        object.__setattr__(self, "measure", measure)

    @property
    def m(self) -> int:
        return self.points.size

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights normalized to sum to 1."""
        gaps = np.diff(self.points)
        w = np.zeros(self.m)
        w[:-1] += 0.5 * gaps
        w[1:] += 0.5 * gaps
        return w / w.sum()

    def same_points(self, other: "Grid") -> bool:
        return self.m == other.m and np.array_equal(self.points, other.points)


@dataclass(frozen=True, eq=False)
class Curve:
    """One p-variate functional observation: an (m, p) value matrix on a grid."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2:
            raise ValueError(f"curve values must be (m, p), got shape {vals.shape}")
        if vals.shape[0] != self.grid.m:
            raise ValueError(
                f"curve has {vals.shape[0]} rows but grid has {self.grid.m} points"
            )
        if vals.shape[1] < 1:
            raise ValueError("curve needs at least one component")
        if not np.all(np.isfinite(vals)):
            raise ValueError("curve values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class FunctionalGroup:
    """A labeled collection of curves sharing one grid."""

    label: str
    curves: tuple[Curve, ...]

    def __post_init__(self):
        curves = tuple(self.curves)
        if not curves:
            raise ValueError("group must contain at least one curve")
        grid = curves[0].grid
        p = curves[0].p
        for c in curves[1:]:
            if not grid.same_points(c.grid):
                raise ValueError(f"curves in group {self.label!r} are on different grids")
            if c.p != p:
                raise ValueError(f"curves in group {self.label!r} differ in dimension")
        object.__setattr__(self, "curves", curves)

    @classmethod
    def from_values(cls, label: str, values: np.ndarray, grid: Grid) -> "FunctionalGroup":
        """Build a group from an (n, m, p) or (n, m) value array."""
        values = np.asarray(values, dtype=float)
        if values.ndim == 2:
            values = values[:, :, None]
        if values.ndim != 3:
            raise ValueError(f"expected (n, m, p) values, got shape {values.shape}")
        return cls(label, tuple(Curve(v, grid) for v in values))

    @property
    def n(self) -> int:
        return len(self.curves)

    @property
    def p(self) -> int:
        return self.curves[0].p

    @property
    def grid(self) -> Grid:
        return self.curves[0].grid

    @cached_property
    def values(self) -> np.ndarray:
        """All curves stacked into an (n, m, p) array."""
        return np.stack([c.values for c in self.curves])


def integrate(values, grid: Grid) -> float:
    """Weighted average of per-gridpoint values, approximating the mean over time.

    Args:
        values: length-m vector of integrand values at the grid points.
        grid: the grid carrying the normalized trapezoidal weights.

    Returns:
        sum_i w_i * values_i, exact for constant integrands.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.m,):
        raise ValueError(f"expected {grid.m} values, got shape {values.shape}")
    return float(grid.weights @ values)


def derivative_augment(group: FunctionalGroup) -> FunctionalGroup:
    """Append first-derivative components to every curve of a group.

    Derivatives use central differences at interior points and one-sided
    differences at the endpoints, so the output curves are 2p-variate on the
    same grid.
    """
    grid = group.grid
    if grid.m < 3:
        raise ValueError("derivative augmentation needs at least 3 grid points")
    t = grid.points
    vals = group.values  # (n, m, p)
    deriv = np.empty_like(vals)
    deriv[:, 0] = (vals[:, 1] - vals[:, 0]) / (t[1] - t[0])
    deriv[:, -1] = (vals[:, -1] - vals[:, -2]) / (t[-1] - t[-2])
    span = (t[2:] - t[:-2])[None, :, None]
    deriv[:, 1:-1] = (vals[:, 2:] - vals[:, :-2]) / span
    return FunctionalGroup.from_values(group.label, np.concatenate([vals, deriv], axis=2), grid)


def _format_float(x: float) -> str:
    return repr(float(x))


def write_groups_csv(groups, path) -> None:
    """Write groups to the long-format CSV schema.

    Header is ``curve_id,group,t,c1,...,cp``; one row per (curve, time point),
    times in grid order. Floats are written with full round-trip precision.
    """
    groups = list(groups)
    if not groups:
        raise ValueError("nothing to write")
    p = groups[0].p
    grid = groups[0].grid
    for g in groups:
        if g.p != p or not g.grid.same_points(grid):
            raise ValueError("all groups must share dimension and grid")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["curve_id", "group", "t"] + [f"c{k + 1}" for k in range(p)])
        for g in groups:
            width = max(4, len(str(g.n - 1)))
            for i, curve in enumerate(g.curves):
                cid = f"{g.label}-{i:0{width}d}"
                for j, t in enumerate(grid.points):
                    row = [cid, g.label, _format_float(t)]
                    row += [_format_float(v) for v in curve.values[j]]
                    writer.writerow(row)


def read_groups_csv(path):
    """Read the long-format curves CSV into groups keyed by the group column.

    Returns:
        (groups, report): groups is a dict label -> FunctionalGroup with labels
        in sorted order; report is a dict with keys ``n_per_group``, ``m``, ``p``.

    Raises:
        CsvFormatError: on schema violations, carrying the offending row number.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("empty file") from None
        header = [h.strip() for h in header]
        if header[:3] != ["curve_id", "group", "t"]:
            raise CsvFormatError(
                f"header must start with curve_id,group,t; got {','.join(header[:3])}", row=1
            )
        comp_names = header[3:]
        p = len(comp_names)
        if p < 1 or comp_names != [f"c{k + 1}" for k in range(p)]:
            raise CsvFormatError("component columns must be named c1..cp", row=1)

        # curve_id -> (group, [t...], [values...])
        order: list[str] = []
        by_curve: dict[str, tuple[str, list, list]] = {}
        prev_cid = None
        for rownum, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3 + p:
                raise CsvFormatError(
                    f"expected {3 + p} fields, found {len(row)}", row=rownum
                )
            cid, glabel = row[0], row[1]
            try:
                t = float(row[2])
                comps = [float(v) for v in row[3:]]
            except ValueError:
                raise CsvFormatError("non-numeric value", row=rownum) from None
            if not np.all(np.isfinite([t] + comps)):
                raise CsvFormatError("non-finite value", row=rownum)
            if cid not in by_curve:
                by_curve[cid] = (glabel, [], [])
                order.append(cid)
            elif prev_cid != cid:
                raise CsvFormatError(f"rows of curve {cid!r} are not contiguous", row=rownum)
            entry = by_curve[cid]
            if entry[0] != glabel:
                raise CsvFormatError(
                    f"curve {cid!r} listed under two groups ({entry[0]!r}, {glabel!r})",
                    row=rownum,
                )
            if entry[1] and t <= entry[1][-1]:
                raise CsvFormatError(f"t values of curve {cid!r} not increasing", row=rownum)
            entry[1].append(t)
            entry[2].append(comps)
            prev_cid = cid

    if not order:
        raise CsvFormatError("file contains no data rows")
    ref_cid = order[0]
    ref_t = np.asarray(by_curve[ref_cid][1])
    grid = Grid(ref_t)
    groups_curves: dict[str, list[tuple[str, Curve]]] = {}
    for cid in order:
        glabel, ts, vals = by_curve[cid]
        if len(ts) != ref_t.size or not np.array_equal(np.asarray(ts), ref_t):
            raise CsvFormatError(
                f"curve {cid!r} is sampled on a different grid than curve {ref_cid!r}"
            )
        groups_curves.setdefault(glabel, []).append((cid, Curve(np.asarray(vals), grid)))

    groups = {
        label: FunctionalGroup(label, tuple(c for _, c in pairs))
        for label, pairs in sorted(groups_curves.items())
    }
    report = {
        "n_per_group": {label: g.n for label, g in groups.items()},
        "m": grid.m,
        "p": p,
        "curve_ids": {label: [cid for cid, _ in pairs] for label, pairs in sorted(groups_curves.items())},
    }
    return groups, report
