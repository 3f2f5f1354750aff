"""Replicated train/test benchmark runs with correct-classification rates.

Each replicate regenerates (or re-splits) the data with seeds derived from
the master seed and the replicate index, trains every requested method on the
same stratified split, and scores the held-out curves. Results are collected
per method as one rate per replicate.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .classify import METHODS, ClassifierConfig, predict_batch, train
from .curves import FunctionalGroup, derivative_augment, read_groups_csv
from .outlyingness import summarize_values, reference_frame
from .simulate import DATASETS, GeneratorSpec, default_grid, derivative_dataset, generate
from .seeding import derive_seed

__all__ = ["ExperimentSpec", "ExperimentResult", "run_experiment", "emit_diagnostics"]

# role tags for per-replicate seed derivation
_ROLE_DATA = 10
_ROLE_SPLIT = 20
_ROLE_TRAIN = 30


@dataclass(frozen=True)
class ExperimentSpec:
    """A benchmark definition: data source, methods, split sizes, seeding.

    ``dataset`` is either a generator id ("1", "2", "3", "1c", "4", "5", "6")
    or a path to a curves CSV file. Sizes are per class.
    """

    dataset: str
    methods: tuple[str, ...]
    n_train: int
    n_test: int
    replicates: int
    seed: int = 0
    derivatives: bool = False
    m: int = 50
    config: ClassifierConfig = field(default_factory=ClassifierConfig)

    def __post_init__(self):
        methods = tuple(str(m).upper() for m in self.methods)
        if not methods:
            raise ValueError("methods must be non-empty")
        for m in methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
        object.__setattr__(self, "methods", methods)
        ds = str(self.dataset)
        object.__setattr__(self, "dataset", ds.lower() if ds.lower() in DATASETS else ds)
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("n_train and n_test must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def is_generated(self) -> bool:
        return self.dataset in DATASETS

    def to_json(self) -> str:
        payload = asdict(self)
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        payload = json.loads(text)
        config = ClassifierConfig(**payload.pop("config", {}))
        payload["methods"] = tuple(payload["methods"])
        return cls(config=config, **payload)


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    """Per-method correct-classification rates across replicates."""

    spec: ExperimentSpec
    methods: tuple[str, ...]
    rates: np.ndarray  # (n_methods, replicates)
    replicate_seeds: tuple[int, ...]

    def rates_for(self, method: str) -> np.ndarray:
        return self.rates[self.methods.index(method.upper())]

    @property
    def mean_rates(self) -> dict[str, float]:
        return {m: float(self.rates[i].mean()) for i, m in enumerate(self.methods)}

    @property
    def sd_rates(self) -> dict[str, float]:
        ddof = 1 if self.rates.shape[1] > 1 else 0
        return {m: float(self.rates[i].std(ddof=ddof)) for i, m in enumerate(self.methods)}

    def write_csv(self, path) -> None:
        """One row per (method, replicate); deterministic byte-for-byte."""
        lines = ["method,replicate,seed,p_c"]
        for i, m in enumerate(self.methods):
            for r in range(self.rates.shape[1]):
                lines.append(f"{m},{r},{self.replicate_seeds[r]},{float(self.rates[i, r])!r}")
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")

    def summary_table(self) -> str:
        header = f"{'method':<8}{'mean p_c':>12}{'sd':>12}"
        rows = [header, "-" * len(header)]
        means, sds = self.mean_rates, self.sd_rates
        for m in self.methods:
            rows.append(f"{m:<8}{means[m]:>12.4f}{sds[m]:>12.4f}")
        return "\n".join(rows)


def _load_csv_groups(path) -> list[FunctionalGroup]:
    groups, _ = read_groups_csv(path)
    return list(groups.values())


def _replicate_groups(spec: ExperimentSpec, r: int, csv_groups) -> list[FunctionalGroup]:
    if not spec.is_generated:
        if spec.derivatives:
            return [derivative_augment(g) for g in csv_groups]
        return csv_groups
    grid = default_grid(spec.m)
    out = []
    for cls in (0, 1):
        gspec = GeneratorSpec(
            spec.dataset,
            cls,
            spec.n_train + spec.n_test,
            grid=grid,
            seed=derive_seed(spec.seed, r, _ROLE_DATA + cls),
        )
        out.append(derivative_dataset(gspec) if spec.derivatives else generate(gspec))
    return out


def _split(group: FunctionalGroup, n_train: int, n_test: int, rng):
    if group.n < n_train + n_test:
        raise ValueError(
            f"group {group.label!r} has {group.n} curves, need {n_train + n_test}"
        )
    perm = rng.permutation(group.n)
    train_idx, test_idx = perm[:n_train], perm[n_train : n_train + n_test]
    train_g = FunctionalGroup(group.label, tuple(group.curves[i] for i in train_idx))
    test_curves = [group.curves[i] for i in test_idx]
    return train_g, test_curves


def _run_replicate(spec: ExperimentSpec, r: int, csv_groups) -> np.ndarray:
    try:
        groups = _replicate_groups(spec, r, csv_groups)
        rng = np.random.default_rng(derive_seed(spec.seed, r, _ROLE_SPLIT))
        train_groups, test_sets = [], []
        for g in groups:
            tr, te = _split(g, spec.n_train, spec.n_test, rng)
            train_groups.append(tr)
            test_sets.append(te)
    except Exception as exc:
        raise RuntimeError(f"replicate {r}: {exc}") from exc
    rates = np.empty(len(spec.methods))
    for i, method in enumerate(spec.methods):
        try:
            model = train(
                train_groups, method, spec.config,
                rng_seed=derive_seed(spec.seed, r, _ROLE_TRAIN + i),
            )
            correct = total = 0
            for g, test_curves in zip(train_groups, test_sets):
                for pred in predict_batch(model, test_curves):
                    correct += pred.label == g.label
                    total += 1
        except Exception as exc:
            raise RuntimeError(f"replicate {r}, method {method}: {exc}") from exc
        rates[i] = correct / total
    return rates


def _replicate_worker(args):
    spec, r, csv_groups = args
    return r, _run_replicate(spec, r, csv_groups)


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Run all replicates of a benchmark spec.

    Replicates derive their randomness independently from (seed, replicate),
    so the result is identical whether they run sequentially or in parallel.
    """
    csv_groups = None if spec.is_generated else _load_csv_groups(spec.dataset)
    rep_seeds = tuple(derive_seed(spec.seed, r) for r in range(spec.replicates))
    rates = np.empty((len(spec.methods), spec.replicates))
    if workers > 1 and spec.replicates > 1:
        jobs = [(spec, r, csv_groups) for r in range(spec.replicates)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for r, rep_rates in pool.map(_replicate_worker, jobs):
                rates[:, r] = rep_rates
    else:
        for r in range(spec.replicates):
            rates[:, r] = _run_replicate(spec, r, csv_groups)
    return ExperimentResult(spec, spec.methods, rates, rep_seeds)


def emit_diagnostics(group: FunctionalGroup, reference: FunctionalGroup, out_path, curve_ids=None) -> None:
    """Write per-curve outlyingness rows ``curve_id, MO_1..MO_p, VO, FO``.

    Scores every curve of ``group`` against ``reference``; suitable for
    scatter plots of shape versus scale outlyingness.
    """
    frame = reference_frame(reference)
    if not group.grid.same_points(reference.grid) or group.p != reference.p:
        raise ValueError("group and reference must share grid and dimension")
    summaries = summarize_values(group.values, frame)
    p = group.p
    if curve_ids is None:
        width = max(4, len(str(group.n - 1)))
        curve_ids = [f"{group.label}-{i:0{width}d}" for i in range(group.n)]
    elif len(curve_ids) != group.n:
        raise ValueError("curve_ids length must match the group size")
    header = ["curve_id"] + [f"MO_{k + 1}" for k in range(p)] + ["VO", "FO"]
    lines = [",".join(header)]
    for i, cid in enumerate(curve_ids):
        fields = [cid]
        fields += [repr(float(v)) for v in summaries.mo[i]]
        fields += [repr(float(summaries.vo[i])), repr(float(summaries.fo[i]))]
        lines.append(",".join(fields))
    with open(out_path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
