"""Curve classifiers: outlyingness-based rules and depth-based baselines.

Two rules assign a curve to the group where it is least outlying, scored
either by the robust Mahalanobis distance of the (MO, VO) feature under a
per-group MCD fit ("RMD") or by the Frobenius norm of the outlyingness
matrix ("VOM"). Four baselines assign to the group of maximal functional
depth: integrated point-wise depth ("FM1" with random Tukey depth, "FM2"
with Mahalanobis depth) and random-projection depth ("RP1" Tukey, "RP2"
Mahalanobis). The query curve is never pooled into a reference group.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import Curve, FunctionalGroup, Grid
from .outlyingness import ReferenceFrame, reference_frame, summarize_values
from .pointwise import random_unit_directions
from .robust import McdFit, mcd_fit
from .seeding import derive_seed
from .simulate import _cholesky_with_jitter

__all__ = [
    "METHODS",
    "ClassifierConfig",
    "TrainedModel",
    "Prediction",
    "train",
    "predict",
    "predict_batch",
    "predict_rmd",
    "predict_vom",
    "predict_maxdepth",
    "functional_depth_fm",
    "functional_depth_rp",
    "rp_directions",
]

METHODS = ("RMD", "VOM", "FM1", "FM2", "RP1", "RP2")
_OUTLYINGNESS_METHODS = ("RMD", "VOM")


@dataclass(frozen=True)
class ClassifierConfig:
    """Shared knobs: projection count for RP, Tukey direction count, MCD h."""

    n_projections: int = 50
    tukey_n_dirs: int = 500
    mcd_h: int | None = None


@dataclass(frozen=True, eq=False)
class Prediction:
    """A predicted group label with the per-group scores that produced it."""

    label: str
    labels: tuple[str, ...]
    scores: np.ndarray
    higher_is_better: bool


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """Per-group reference data plus method-specific precomputations.

    Everything a prediction needs is computed at training time; the model is
    read-only afterwards and safe to share across workers.
    """

    method: str
    labels: tuple[str, ...]
    groups: tuple[FunctionalGroup, ...]
    config: ClassifierConfig
    seed: int
    frames: tuple[ReferenceFrame, ...] | None = None
    mcd_fits: tuple[McdFit, ...] | None = None
    rp_dirs: np.ndarray | None = None  # (NR, m, p), shared across groups
    rp_sorted: tuple[np.ndarray, ...] = field(default=())  # per group (NR, n) sorted
    rp_moments: tuple[tuple[np.ndarray, np.ndarray], ...] = field(default=())
    tukey_dirs: np.ndarray | None = None  # (D, p) for multivariate FM1
    fm_sorted: tuple[np.ndarray, ...] = field(default=())  # per group sorted slices/projections

    @property
    def grid(self) -> Grid:
        return self.groups[0].grid

    @property
    def p(self) -> int:
        return self.groups[0].p


# Correlation length of the random projection directions, as a fraction of
# the grid span. Directions are Gaussian-process paths with exponential
# covariance, the convention of the standard depth software; white-noise
# directions would leak high-frequency information the baselines are not
# supposed to see.
RP_DIRECTION_THETA = 0.2


def rp_directions(n_dirs: int, grid: Grid, p: int, rng) -> np.ndarray:
    """Random projection directions: exponential-covariance process paths per
    component, normalized to unit discrete L2 norm."""
    t = grid.points
    theta = RP_DIRECTION_THETA * (t[-1] - t[0])
    cov = np.exp(-np.abs(t[:, None] - t[None, :]) / theta)
    factor = _cholesky_with_jitter(cov)
    dirs = rng.standard_normal((n_dirs, p, grid.m)) @ factor.T
    dirs = dirs.transpose(0, 2, 1)  # (n_dirs, m, p)
    norms = np.sqrt(np.einsum("m,dmk,dmk->d", grid.weights, dirs, dirs))
    return dirs / norms[:, None, None]


def _project(values: np.ndarray, dirs: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Inner products <a_j, x_i> summed over components: (N, m, p) -> (N, NR)."""
    return np.einsum("dmk,m,nmk->nd", dirs, weights, values)


def _tukey_counts(sorted_vals: np.ndarray, queries: np.ndarray):
    """Halfspace counts of queries against one sorted sample."""
    le = np.searchsorted(sorted_vals, queries, side="right")
    ge = sorted_vals.size - np.searchsorted(sorted_vals, queries, side="left")
    return le, ge


def train(groups, method: str, config: ClassifierConfig | None = None, rng_seed: int = 0) -> TrainedModel:
    """Fit a classifier of the given method on K labeled groups.

    RP directions (and, for multivariate FM1, Tukey directions) are drawn once
    from the seed and shared across groups and all later queries.
    """
    method = str(method).upper()
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    groups = tuple(groups)
    if len(groups) < 2:
        raise ValueError("need at least 2 groups")
    grid, p = groups[0].grid, groups[0].p
    labels = tuple(g.label for g in groups)
    if len(set(labels)) != len(labels):
        raise ValueError("group labels must be distinct")
    for g in groups[1:]:
        if not g.grid.same_points(grid) or g.p != p:
            raise ValueError("all groups must share grid and dimension")
    config = config or ClassifierConfig()

    frames = mcd_fits = rp_dirs = tukey_dirs = None
    rp_sorted: tuple = ()
    rp_moments: tuple = ()
    fm_sorted: tuple = ()

    if method in ("RMD", "VOM", "FM2"):
        frames = tuple(reference_frame(g) for g in groups)
    if method == "RMD":
        fits = []
        for i, g in enumerate(groups):
            if g.n < p + 4:
                raise ValueError(
                    f"group {g.label!r} has n={g.n}; RMD needs at least p+4={p + 4}"
                )
            feats = _features(g.values, frames[i])
            h = config.mcd_h
            fits.append(mcd_fit(feats, h=h, rng_seed=derive_seed(rng_seed, 1, i)))
        mcd_fits = tuple(fits)
    elif method in ("RP1", "RP2"):
        rng = np.random.default_rng(derive_seed(rng_seed, 2))
        rp_dirs = rp_directions(config.n_projections, grid, p, rng)
        projections = [_project(g.values, rp_dirs, grid.weights) for g in groups]
        if method == "RP1":
            rp_sorted = tuple(np.sort(proj.T, axis=1) for proj in projections)  # (NR, n)
        else:
            rp_moments = tuple(
                (proj.mean(axis=0), proj.var(axis=0, ddof=1)) for proj in projections
            )
    elif method == "FM1":
        if p == 1:
            fm_sorted = tuple(np.sort(g.values[:, :, 0].T, axis=1) for g in groups)  # (m, n)
        else:
            rng = np.random.default_rng(derive_seed(rng_seed, 3))
            tukey_dirs = random_unit_directions(config.tukey_n_dirs, p, rng)
            fm_sorted = tuple(
                np.sort(np.einsum("nmk,dk->mdn", g.values, tukey_dirs), axis=2)
                for g in groups
            )

    return TrainedModel(
        method=method,
        labels=labels,
        groups=groups,
        config=config,
        seed=rng_seed,
        frames=frames,
        mcd_fits=mcd_fits,
        rp_dirs=rp_dirs,
        rp_sorted=rp_sorted,
        rp_moments=rp_moments,
        tukey_dirs=tukey_dirs,
        fm_sorted=fm_sorted,
    )


def _features(values: np.ndarray, frame: ReferenceFrame) -> np.ndarray:
    """(MO^T, VO) feature vectors for a batch of curves: (N, p+1)."""
    summaries = summarize_values(values, frame)
    return np.hstack([summaries.mo, summaries.vo[:, None]])


def _rmd_scores(values: np.ndarray, frame: ReferenceFrame, fit: McdFit) -> np.ndarray:
    feats = _features(values, frame)
    diff = feats - fit.location
    d2 = np.einsum("ni,in->n", diff, np.linalg.solve(fit.scatter, diff.T))
    return np.sqrt(np.maximum(d2, 0.0))


def _vom_scores(values: np.ndarray, frame: ReferenceFrame) -> np.ndarray:
    vom = summarize_values(values, frame).vom
    return np.sqrt(np.einsum("nij,nij->n", vom, vom))


def _md_depths(values: np.ndarray, frame: ReferenceFrame) -> np.ndarray:
    """Point-wise Mahalanobis depths of a batch: (N, m)."""
    diff = values - frame.means[None]
    maha2 = np.einsum("nmi,mij,nmj->nm", diff, frame.inv_cov, diff)
    return 1.0 / (1.0 + np.maximum(maha2, 0.0))


def _rowwise_counts(sorted_rows: np.ndarray, queries: np.ndarray):
    """Per-row (<=, <) counts of queries against independently sorted rows.

    sorted_rows is (D, n) with each row ascending; queries is (N, D) with
    queries[:, d] counted against row d. Rows are affinely mapped onto
    disjoint intervals so a single flat searchsorted handles all of them.
    """
    D, n = sorted_rows.shape
    lo = sorted_rows[:, 0]
    span = sorted_rows[:, -1] - lo
    span[span <= 0.0] = 1.0
    base = 2.0 * np.arange(D)
    flat = ((sorted_rows - lo[:, None]) / span[:, None] + base[:, None]).ravel()
    q = np.clip((queries - lo[None]) / span[None], -0.25, 1.25) + base[None]
    offsets = (np.arange(D) * n)[None]
    le = np.searchsorted(flat, q.ravel(), side="right").reshape(q.shape) - offsets
    lt = np.searchsorted(flat, q.ravel(), side="left").reshape(q.shape) - offsets
    return le, lt


def _fm_td_depths(values: np.ndarray, sorted_ref: np.ndarray, tukey_dirs) -> np.ndarray:
    """Integrand of FM1: per-gridpoint (random) Tukey depth, (N, m)."""
    N, m, p = values.shape
    if p == 1:
        n = sorted_ref.shape[1]
        depth = np.empty((N, m))
        for t in range(m):
            le, ge = _tukey_counts(sorted_ref[t], values[:, t, 0])
            depth[:, t] = np.minimum(le, ge) / n
        return depth
    n = sorted_ref.shape[2]
    proj = np.einsum("nmk,dk->nmd", values, tukey_dirs)  # (N, m, D)
    depth = np.empty((N, m))
    for t in range(m):
        le, lt = _rowwise_counts(sorted_ref[t], proj[:, t, :])
        depth[:, t] = np.minimum(le, n - lt).min(axis=1) / n
    return depth


def _rp_td_depths(proj_x: np.ndarray, sorted_proj: np.ndarray) -> np.ndarray:
    """Direction-wise univariate Tukey depths averaged over directions: (N,)."""
    N, NR = proj_x.shape
    n = sorted_proj.shape[1]
    depth = np.empty((N, NR))
    for d in range(NR):
        le, ge = _tukey_counts(sorted_proj[d], proj_x[:, d])
        depth[:, d] = np.minimum(le, ge) / n
    return depth.mean(axis=1)


def _rp_md_depths(proj_x: np.ndarray, moments) -> np.ndarray:
    mean, var = moments
    diff2 = (proj_x - mean[None, :]) ** 2
    # a projected sample of identical values has zero spread up to roundoff;
    # the depth limit there is 1 at the common value and 0 elsewhere
    tol2 = (1e-12 * (1.0 + np.abs(mean))) ** 2
    degenerate = var <= tol2
    safe_var = np.where(degenerate, 1.0, var)
    depth = np.where(
        degenerate[None, :],
        np.where(diff2 <= tol2[None, :], 1.0, 0.0),
        1.0 / (1.0 + diff2 / safe_var[None, :]),
    )
    return depth.mean(axis=1)


def _score_matrix(model: TrainedModel, values: np.ndarray) -> np.ndarray:
    """Per-group scores for a batch of curves: (N, K)."""
    K = len(model.groups)
    scores = np.empty((values.shape[0], K))
    method = model.method
    proj_x = None
    if method in ("RP1", "RP2"):
        proj_x = _project(values, model.rp_dirs, model.grid.weights)
    for i in range(K):
        if method == "RMD":
            scores[:, i] = _rmd_scores(values, model.frames[i], model.mcd_fits[i])
        elif method == "VOM":
            scores[:, i] = _vom_scores(values, model.frames[i])
        elif method == "FM2":
            depth = _md_depths(values, model.frames[i])
            scores[:, i] = depth @ model.grid.weights
        elif method == "FM1":
            depth = _fm_td_depths(values, model.fm_sorted[i], model.tukey_dirs)
            scores[:, i] = depth @ model.grid.weights
        elif method == "RP1":
            scores[:, i] = _rp_td_depths(proj_x, model.rp_sorted[i])
        else:
            scores[:, i] = _rp_md_depths(proj_x, model.rp_moments[i])
    return scores


def _check_batch(model: TrainedModel, curves) -> np.ndarray:
    if isinstance(curves, FunctionalGroup):
        curves = curves.curves
    curves = list(curves)
    if not curves:
        raise ValueError("no curves to classify")
    for c in curves:
        if not c.grid.same_points(model.grid) or c.p != model.p:
            raise ValueError("query curves must match the model's grid and dimension")
    return np.stack([c.values for c in curves])


def predict_batch(model: TrainedModel, curves) -> list[Prediction]:
    """Classify many curves at once; ties go to the smallest group index."""
    values = _check_batch(model, curves)
    scores = _score_matrix(model, values)
    higher = model.method not in _OUTLYINGNESS_METHODS
    best = np.argmax(scores, axis=1) if higher else np.argmin(scores, axis=1)
    return [
        Prediction(model.labels[best[i]], model.labels, scores[i], higher)
        for i in range(values.shape[0])
    ]


def predict(model: TrainedModel, x0: Curve) -> Prediction:
    """Classify a single curve with the model's method."""
    return predict_batch(model, [x0])[0]


def predict_rmd(model: TrainedModel, x0: Curve) -> Prediction:
    """Assign to the group minimizing the robust Mahalanobis feature distance."""
    if model.method != "RMD":
        raise ValueError(f"model method is {model.method}, expected RMD")
    return predict(model, x0)


def predict_vom(model: TrainedModel, x0: Curve) -> Prediction:
    """Assign to the group minimizing the Frobenius norm of the outlyingness matrix."""
    if model.method != "VOM":
        raise ValueError(f"model method is {model.method}, expected VOM")
    return predict(model, x0)


def predict_maxdepth(model: TrainedModel, x0: Curve) -> Prediction:
    """Assign to the group where the curve attains maximal functional depth."""
    if model.method not in ("FM1", "FM2", "RP1", "RP2"):
        raise ValueError(f"model method is {model.method}, expected FM1/FM2/RP1/RP2")
    return predict(model, x0)


def functional_depth_fm(
    x0: Curve,
    group: FunctionalGroup,
    pointwise: str = "MD",
    n_dirs: int = 500,
    rng_seed: int = 0,
    directions: np.ndarray | None = None,
) -> float:
    """Integrated point-wise depth of a curve within a group.

    ``pointwise`` selects the point-wise depth: "TD" (random Tukey for p >= 2,
    exact univariate halfspace for p = 1) or "MD" (Mahalanobis). Directions
    for the multivariate Tukey case may be passed in to pair evaluations
    across groups; otherwise they are drawn from ``rng_seed``.
    """
    pointwise = pointwise.upper()
    values = x0.values[None]
    if pointwise == "MD":
        depth = _md_depths(values, reference_frame(group))
    elif pointwise == "TD":
        if group.p == 1:
            sorted_ref = np.sort(group.values[:, :, 0].T, axis=1)
            depth = _fm_td_depths(values, sorted_ref, None)
        else:
            if directions is None:
                rng = np.random.default_rng(rng_seed)
                directions = random_unit_directions(n_dirs, group.p, rng)
            sorted_ref = np.sort(np.einsum("nmk,dk->mdn", group.values, directions), axis=2)
            depth = _fm_td_depths(values, sorted_ref, directions)
    else:
        raise ValueError(f"pointwise must be TD or MD, got {pointwise!r}")
    return float(depth[0] @ group.grid.weights)


def functional_depth_rp(
    x0: Curve, group: FunctionalGroup, pointwise: str, directions: np.ndarray
) -> float:
    """Random-projection depth: mean direction-wise univariate depth.

    ``directions`` is an (NR, m, p) array of projection functions, drawn once
    and shared across the groups being compared.
    """
    pointwise = pointwise.upper()
    w = group.grid.weights
    proj_x = _project(x0.values[None], directions, w)
    proj_g = _project(group.values, directions, w)
    if pointwise == "TD":
        return float(_rp_td_depths(proj_x, np.sort(proj_g.T, axis=1))[0])
    if pointwise == "MD":
        moments = (proj_g.mean(axis=0), proj_g.var(axis=0, ddof=1))
        return float(_rp_md_depths(proj_x, moments)[0])
    raise ValueError(f"pointwise must be TD or MD, got {pointwise!r}")
