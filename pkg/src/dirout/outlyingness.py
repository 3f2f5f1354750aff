"""Directional outlyingness of curves relative to a reference group.

At each grid point the outlyingness vector is (1/depth - 1) times the unit
vector from the point-wise median to the observation, with Mahalanobis depth
as the point-wise depth. Averaging over the grid yields the scalar summaries
(MO, VO, FO) and their matrix-valued counterparts (FOM, VOM); the latter
satisfy FOM = MO MO^T + VOM with FO = tr(FOM) and VO = tr(VOM), and VOM is
conjugated by A0 when the data are transformed by t-dependent positive
rescaling, an orthogonal map A0, shifts, and a time re-indexing.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from .curves import Curve, FunctionalGroup, Grid
from .errors import SingularScatterError
from .pointwise import COND_LIMIT, RIDGE_EPS, geometric_medians_batch

__all__ = [
    "ReferenceFrame",
    "OutlyingnessSummary",
    "reference_frame",
    "pointwise_outlyingness",
    "summarize",
    "summarize_values",
    "check_transformation_invariance",
]

# Below this distance from the point-wise median the direction is undefined
# and the outlyingness vector is taken to be zero.
ZERO_DIRECTION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ReferenceFrame:
    """Per-gridpoint statistics of a reference group, precomputed once.

    Holds the sample means, (ridged) inverse covariances and geometric medians
    of the group's value clouds at every grid point, plus the integration
    weights. Frames are read-only and safe to share across workers.
    """

    grid: Grid
    n: int
    p: int
    means: np.ndarray  # (m, p)
    inv_cov: np.ndarray  # (m, p, p)
    medians: np.ndarray  # (m, p)

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights


_FRAMES: "weakref.WeakKeyDictionary[FunctionalGroup, ReferenceFrame]" = (
    weakref.WeakKeyDictionary()
)


def reference_frame(group: FunctionalGroup) -> ReferenceFrame:
    """Return the cached per-gridpoint frame for a reference group."""
    frame = _FRAMES.get(group)
    if frame is None:
        frame = _build_frame(group)
        _FRAMES[group] = frame
    return frame


def _build_frame(group: FunctionalGroup) -> ReferenceFrame:
    n, p = group.n, group.p
    if n < p + 2:
        raise ValueError(
            f"reference group {group.label!r} needs at least p+2={p + 2} curves, has {n}"
        )
    values = group.values  # (n, m, p)
    means = values.mean(axis=0)
    centered = values - means[None]
    cov = np.einsum("nmi,nmj->mij", centered, centered) / (n - 1)

    traces = np.trace(cov, axis1=1, axis2=2)
    if np.any(traces <= 0.0):
        t_bad = int(np.argmin(traces))
        raise SingularScatterError(f"zero scatter at grid point index {t_bad}")
    eig = np.linalg.eigvalsh(cov)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(eig[:, 0] > 0.0, eig[:, -1] / eig[:, 0], np.inf)
    needs_ridge = cond > COND_LIMIT
    if np.any(needs_ridge):
        ridge = (RIDGE_EPS * traces / p)[:, None, None] * np.eye(p)[None]
        cov = np.where(needs_ridge[:, None, None], cov + ridge, cov)
    try:
        inv_cov = np.linalg.inv(cov)
    except np.linalg.LinAlgError:
        raise SingularScatterError("point-wise covariance singular after ridge") from None

    medians = geometric_medians_batch(values)
    return ReferenceFrame(group.grid, n, p, means, inv_cov, medians)


def _outlyingness_values(values: np.ndarray, frame: ReferenceFrame) -> np.ndarray:
    """Outlyingness vectors for a batch of curves: (N, m, p) -> (N, m, p)."""
    diff = values - frame.means[None]
    maha2 = np.einsum("nmi,mij,nmj->nm", diff, frame.inv_cov, diff)
    np.maximum(maha2, 0.0, out=maha2)
    dev = values - frame.medians[None]
    dist = np.linalg.norm(dev, axis=2)
    safe = np.maximum(dist, ZERO_DIRECTION_TOL)
    unit = dev / safe[:, :, None]
    unit[dist < ZERO_DIRECTION_TOL] = 0.0
    # 1/depth - 1 equals the squared Mahalanobis distance for this depth
    return maha2[:, :, None] * unit


def _check_query(curve: Curve, frame: ReferenceFrame) -> np.ndarray:
    if not curve.grid.same_points(frame.grid):
        raise ValueError("curve and reference group are on different grids")
    if curve.p != frame.p:
        raise ValueError(f"curve has p={curve.p}, reference has p={frame.p}")
    return curve.values[None]


def pointwise_outlyingness(curve: Curve, reference: FunctionalGroup) -> np.ndarray:
    """Directional outlyingness of one curve at every grid point, as (m, p)."""
    frame = reference_frame(reference)
    return _outlyingness_values(_check_query(curve, frame), frame)[0]


@dataclass(frozen=True, eq=False)
class OutlyingnessSummary:
    """Grid-averaged outlyingness of one curve against a reference group."""

    mo: np.ndarray  # (p,) mean directional outlyingness
    vo: float  # variation of directional outlyingness
    fo: float  # total outlyingness
    fom: np.ndarray  # (p, p)
    vom: np.ndarray  # (p, p)


@dataclass(frozen=True, eq=False)
class BatchSummaries:
    """Column-stacked summaries for a batch of curves."""

    mo: np.ndarray  # (N, p)
    vo: np.ndarray  # (N,)
    fo: np.ndarray  # (N,)
    fom: np.ndarray  # (N, p, p)
    vom: np.ndarray  # (N, p, p)

    def __getitem__(self, i: int) -> OutlyingnessSummary:
        return OutlyingnessSummary(
            self.mo[i], float(self.vo[i]), float(self.fo[i]), self.fom[i], self.vom[i]
        )


def summarize_values(values: np.ndarray, frame: ReferenceFrame) -> BatchSummaries:
    """Summaries for an (N, m, p) batch of curve values against one frame."""
    w = frame.weights
    o = _outlyingness_values(values, frame)
    mo = np.einsum("m,nmi->ni", w, o)
    fo = np.einsum("m,nmi,nmi->n", w, o, o)
    dev = o - mo[:, None, :]
    vo = np.einsum("m,nmi,nmi->n", w, dev, dev)
    fom = np.einsum("m,nmi,nmj->nij", w, o, o)
    vom = np.einsum("m,nmi,nmj->nij", w, dev, dev)
    return BatchSummaries(mo, vo, fo, fom, vom)


def summarize(curve: Curve, reference: FunctionalGroup) -> OutlyingnessSummary:
    """MO, VO, FO and the outlyingness matrices of a curve w.r.t. a group.

    The curve is never pooled into the reference: the group's empirical
    distribution alone defines the point-wise depths and medians.
    """
    frame = reference_frame(reference)
    return summarize_values(_check_query(curve, frame), frame)[0]


def _apply_transform(
    values: np.ndarray, a0: np.ndarray, b: np.ndarray, f: np.ndarray, perm: np.ndarray
) -> np.ndarray:
    """Apply x(t_i) -> f(t_{g(i)}) * A0 x(t_{g(i)}) + b along the last two axes."""
    out = f[:, None] * (values @ a0.T) + b[None, :]
    return out[..., perm, :]


def check_transformation_invariance(
    curve: Curve,
    reference: FunctionalGroup,
    a0: np.ndarray,
    b=None,
    f=None,
    g=None,
) -> float:
    """Deviation of VOM from exact conjugation under a response/time transform.

    Transforms the curve and every reference curve by
    ``T(x)(t_i) = f(t_{g(i)}) * A0 x(t_{g(i)}) + b``, recomputes VOM from
    scratch, and returns ``max |VOM_transformed - A0 VOM A0^T|``. On uniform
    grids with measure-preserving re-indexings (identity, reversal) the
    deviation is at the level of solver tolerances.

    Args:
        a0: orthogonal (p, p) matrix.
        b: constant shift, default zero.
        f: positive scale values at the grid points, default all ones.
        g: permutation of grid indices, default identity.
    """
    p = curve.p
    m = curve.grid.m
    a0 = np.asarray(a0, dtype=float)
    if a0.shape != (p, p) or np.max(np.abs(a0.T @ a0 - np.eye(p))) > 1e-10:
        raise ValueError("a0 must be orthogonal (p x p)")
    b = np.zeros(p) if b is None else np.asarray(b, dtype=float)
    if b.shape != (p,):
        raise ValueError(f"b must be a length-{p} vector")
    f = np.ones(m) if f is None else np.asarray(f, dtype=float)
    if f.shape != (m,) or np.any(f <= 0.0):
        raise ValueError("f must be positive at every grid point")
    perm = np.arange(m) if g is None else np.asarray(g)
    if sorted(perm.tolist()) != list(range(m)):
        raise ValueError("g must be a permutation of grid indices")

    vom = summarize(curve, reference).vom
    grid = curve.grid
    t_curve = Curve(_apply_transform(curve.values, a0, b, f, perm), grid)
    t_ref = FunctionalGroup.from_values(
        reference.label, _apply_transform(reference.values, a0, b, f, perm), grid
    )
    t_vom = summarize(t_curve, t_ref).vom
    return float(np.max(np.abs(t_vom - a0 @ vom @ a0.T)))
