"""Evaluation protocols: balanced subsampling, repeated 5-fold CV and cross-database tests.

Morph is the positive class. FRR is the percentage of genuine samples
predicted as morph, FAR the percentage of morphs predicted as genuine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .classify import SvmModel, TrainConfig, predict_many, train_svm
from .errors import KindMismatch, MissingClass, TooFewMorphs
from .featurize import FeatureVector


@dataclass
class LabeledDataset:
    genuine: list
    morph: list
    db_name: str = ""

    def __post_init__(self):
        vectors = list(self.genuine) + list(self.morph)
        if vectors:
            kinds = {v.kind for v in vectors}
            lengths = {len(v.values) for v in vectors}
            if len(kinds) > 1 or len(lengths) > 1:
                raise KindMismatch(f"{self.db_name}: mixed feature kinds/lengths {kinds} {lengths}")
        for v in self.genuine:
            if v.label != "genuine":
                raise ValueError(f"{v.sample_id} is labelled {v.label} but listed as genuine")
        for v in self.morph:
            if v.label != "morph":
                raise ValueError(f"{v.sample_id} is labelled {v.label} but listed as morph")

    @classmethod
    def from_vectors(cls, vectors: Sequence[FeatureVector], db_name: str = "") -> "LabeledDataset":
        return cls([v for v in vectors if v.label == "genuine"],
                   [v for v in vectors if v.label == "morph"], db_name)

    @property
    def kind(self) -> Optional[str]:
        for v in list(self.genuine) + list(self.morph):
            return v.kind
        return None

    @property
    def dim(self) -> Optional[int]:
        for v in list(self.genuine) + list(self.morph):
            return len(v.values)
        return None

    def arrays(self):
        vectors = list(self.genuine) + list(self.morph)
        X = np.array([v.values for v in vectors], dtype=np.float64)
        y = np.array([-1.0] * len(self.genuine) + [1.0] * len(self.morph))
        return X, y


@dataclass(frozen=True)
class Confusion:
    tp: int = 0  # morph -> morph
    tn: int = 0  # genuine -> genuine
    fp: int = 0  # genuine -> morph (false rejection)
    fn: int = 0  # morph -> genuine (false acceptance)

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(self.tp + other.tp, self.tn + other.tn,
                         self.fp + other.fp, self.fn + other.fn)

    @property
    def frr(self) -> float:
        return 100.0 * self.fp / (self.fp + self.tn)

    @property
    def far(self) -> float:
        return 100.0 * self.fn / (self.fn + self.tp)

    def as_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


def _as_morph_flags(labels) -> np.ndarray:
    out = []
    for lab in labels:
        if lab in ("morph", 1, 1.0, True):
            out.append(True)
        elif lab in ("genuine", -1, -1.0, 0, False):
            out.append(False)
        else:
            raise ValueError(f"unknown label {lab!r}")
    return np.asarray(out, dtype=bool)


def confusion(predictions, truth) -> Confusion:
    pred = _as_morph_flags(predictions)
    true = _as_morph_flags(truth)
    if pred.shape != true.shape:
        raise ValueError(f"{len(pred)} predictions for {len(true)} labels")
    return Confusion(
        tp=int(np.sum(pred & true)), tn=int(np.sum(~pred & ~true)),
        fp=int(np.sum(pred & ~true)), fn=int(np.sum(~pred & true)),
    )


def frr_far(predictions, truth) -> tuple:
    """``(FRR %, FAR %)``; both classes must be present in ``truth``."""
    c = confusion(predictions, truth)
    if c.fp + c.tn == 0 or c.fn + c.tp == 0:
        raise MissingClass("truth labels must contain both genuine and morph samples")
    return c.frr, c.far


def balanced_subsample(ds: LabeledDataset, seed=0) -> LabeledDataset:
    """All genuine samples plus an equally sized random draw of morphs (no replacement)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = len(ds.genuine)
    if len(ds.morph) < n:
        raise TooFewMorphs(f"{ds.db_name}: {len(ds.morph)} morphs cannot balance {n} genuine")
    idx = np.sort(rng.choice(len(ds.morph), size=n, replace=False))
    return LabeledDataset(list(ds.genuine), [ds.morph[i] for i in idx], ds.db_name)


def stratified_folds(y: np.ndarray, k: int, rng: np.random.Generator) -> list:
    """Test-index arrays of ``k`` folds; each class is shuffled and dealt round-robin."""
    fold_of = np.empty(len(y), dtype=np.intp)
    offset = 0
    for cls in (-1.0, 1.0):
        members = rng.permutation(np.flatnonzero(y == cls))
        fold_of[members] = (np.arange(len(members)) + offset) % k
        offset += len(members)
    return [np.flatnonzero(fold_of == f) for f in range(k)]


def _mean_std(values: Sequence[float]) -> tuple:
    arr = np.asarray(values, dtype=np.float64)
    std = float(np.std(arr, ddof=1)) if len(arr) > 1 else 0.0
    return float(np.mean(arr)), std


@dataclass
class EvalReport:
    protocol: str
    seed: int
    kind: Optional[str]
    frr_avg: float
    frr_std: Optional[float]
    far_avg: float
    far_std: float
    per_run: list = field(default_factory=list)
    pooling: str = "micro"
    info: dict = field(default_factory=dict)

    def run_rates(self) -> tuple:
        """Per-run (FRR, FAR) lists recomputed from the stored confusion counts."""
        frr, far = [], []
        for run in self.per_run:
            if self.pooling == "macro" and run.get("folds"):
                fc = [Confusion(**{k: f[k] for k in ("tp", "tn", "fp", "fn")}) for f in run["folds"]]
                frr.append(float(np.mean([c.frr for c in fc])))
                far.append(float(np.mean([c.far for c in fc])))
            else:
                c = Confusion(**{k: run[k] for k in ("tp", "tn", "fp", "fn")})
                frr.append(c.frr)
                far.append(c.far)
        return frr, far

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "seed": self.seed,
            "kind": self.kind,
            "pooling": self.pooling,
            "frr_avg": self.frr_avg,
            "frr_std": self.frr_std,
            "far_avg": self.far_avg,
            "far_std": self.far_std,
            "per_run": self.per_run,
            "info": self.info,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(
            protocol=d["protocol"], seed=d["seed"], kind=d.get("kind"),
            frr_avg=d["frr_avg"], frr_std=d.get("frr_std"),
            far_avg=d["far_avg"], far_std=d["far_std"],
            per_run=d.get("per_run", []), pooling=d.get("pooling", "micro"),
            info=d.get("info", {}),
        )


def _report_from_runs(protocol, seed, kind, per_run, pooling, info, frr_std_absent=False):
    report = EvalReport(protocol, seed, kind, 0.0, None, 0.0, 0.0, per_run, pooling, info)
    frr, far = report.run_rates()
    report.frr_avg, frr_std = _mean_std(frr)
    report.frr_std = None if frr_std_absent else frr_std
    report.far_avg, report.far_std = _mean_std(far)
    return report


def _run_cv(ds: LabeledDataset, cfg: TrainConfig, rng_seeds, folds: int,
            keep_models: bool):
    per_run, models = [], []
    for run, child in enumerate(rng_seeds):
        rng = np.random.default_rng(child)
        sub = balanced_subsample(ds, rng)
        X, y = sub.arrays()
        pooled = Confusion()
        fold_records = []
        for f, test_idx in enumerate(stratified_folds(y, folds, rng)):
            train_idx = np.setdiff1d(np.arange(len(y)), test_idx)
            model = train_svm(X[train_idx], y[train_idx], cfg)
            c = confusion(predict_many(model, X[test_idx]), y[test_idx])
            pooled = pooled + c
            fold_records.append({"fold": f, **c.as_dict()})
            if keep_models:
                models.append((run, f, c, model))
        per_run.append({"run": run, **pooled.as_dict(), "folds": fold_records})
    return per_run, models


def five_fold_cv(ds: LabeledDataset, cfg: TrainConfig = TrainConfig(), repeats: int = 10,
                 seed: int = 0, folds: int = 5, pooling: str = "micro") -> EvalReport:
    """Repeated stratified k-fold CV, each repeat on a fresh balanced morph subsample.

    Per-run rates pool the folds' confusion counts (``pooling="micro"``) or
    average the per-fold rates (``"macro"``); avg/std are taken over runs.
    """
    if pooling not in ("micro", "macro"):
        raise ValueError("pooling must be 'micro' or 'macro'")
    seeds = np.random.SeedSequence(seed).spawn(repeats)
    per_run, _ = _run_cv(ds, cfg, seeds, folds, keep_models=False)
    info = {"db": ds.db_name, "repeats": repeats, "folds": folds,
            "n_genuine": len(ds.genuine), "n_morph": len(ds.morph)}
    return _report_from_runs("FCV5", seed, ds.kind, per_run, pooling, info)


def select_best_model(models) -> tuple:
    """Lowest validation FRR+FAR; ties go to lower FAR, then earlier run, then earlier fold."""
    return min(models, key=lambda m: (m[2].frr + m[2].far, m[2].far, m[0], m[1]))


def cross_db(train_ds: LabeledDataset, test_ds: LabeledDataset, cfg: TrainConfig = TrainConfig(),
             repeats: int = 10, seed: int = 0, folds: int = 5) -> EvalReport:
    """Pick the best CV fold-model on ``train_ds`` and test it on balanced draws of ``test_ds``."""
    if train_ds.kind != test_ds.kind or train_ds.dim != test_ds.dim:
        raise KindMismatch(
            f"train features {train_ds.kind}/{train_ds.dim} vs test {test_ds.kind}/{test_ds.dim}")
    cv_seq, test_seq = np.random.SeedSequence(seed).spawn(2)
    _, models = _run_cv(train_ds, cfg, cv_seq.spawn(repeats), folds, keep_models=True)
    run, fold, val, model = select_best_model(models)

    per_run = []
    for r, child in enumerate(test_seq.spawn(repeats)):
        sub = balanced_subsample(test_ds, np.random.default_rng(child))
        X, y = sub.arrays()
        c = confusion(predict_many(model, X), y)
        per_run.append({"run": r, **c.as_dict()})
    info = {
        "train_db": train_ds.db_name, "test_db": test_ds.db_name, "repeats": repeats,
        "selected": {"run": run, "fold": fold, "val_frr": val.frr, "val_far": val.far},
    }
    # the genuine test set never changes between repeats, so FRR has no spread
    return _report_from_runs("CrossDB", seed, train_ds.kind, per_run, "micro", info,
                             frr_std_absent=True)


def _cell(x: Optional[float]) -> str:
    return "---" if x is None else f"{x:.2f}"


def format_table(reports: Sequence[EvalReport]) -> str:
    """Aligned text table with one column per report (error / stat rows)."""
    if reports and all(r.protocol == "CrossDB" for r in reports):
        rows = [["Features", "Training", "Testing", "Stats", "FRR", "FAR"]]
        for r in reports:
            rows.append([r.kind or "", r.info.get("train_db", ""), r.info.get("test_db", ""),
                         "Avg", _cell(r.frr_avg), _cell(r.far_avg)])
            rows.append(["", "", "", "Stdev", _cell(r.frr_std), _cell(r.far_std)])
    else:
        rows = [["Error", "Stats."] + [r.kind or "?" for r in reports]]
        rows.append(["FRR", "Avg"] + [_cell(r.frr_avg) for r in reports])
        rows.append(["", "Stdev"] + [_cell(r.frr_std) for r in reports])
        rows.append(["FAR", "Avg"] + [_cell(r.far_avg) for r in reports])
        rows.append(["", "Stdev"] + [_cell(r.far_std) for r in reports])
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows) + "\n"


def train_on_dataset(ds: LabeledDataset, cfg: TrainConfig = TrainConfig()) -> SvmModel:
    X, y = ds.arrays()
    return train_svm(X, y, cfg)

