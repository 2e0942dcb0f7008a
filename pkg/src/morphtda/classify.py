"""Cubic polynomial kernel SVM trained by sequential minimal optimization.

Labels are +1 for morph and -1 for genuine. The decision function is

    score(x) = sum_i coef_i * (offset + <sv_i, x> / scale) ** 3 + bias

with ``coef_i = alpha_i * y_i``. Training follows Platt's SMO: an outer loop
alternating full sweeps and sweeps over unbounded multipliers, a second
choice maximising ``|E1 - E2|``, and randomised fallbacks driven by the seed.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, NonFiniteFeature, ParseError, SingleClass

log = logging.getLogger(__name__)

LABEL_MAP = {1: "morph", -1: "genuine"}
SUPPORT_EPS = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    kkt_tolerance: float = 1e-3
    max_passes: int = 10
    seed: int = 0
    standardize: bool = True
    degree: int = 3
    scale: float = 1.0
    offset: float = 1.0
    max_iter: int = 200_000

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if not self.kkt_tolerance > 0:
            raise ValueError("kkt_tolerance must be positive")
        if not self.scale > 0:
            raise ValueError("kernel scale must be positive")


def kernel(u, v, scale: float = 1.0, offset: float = 1.0, degree: int = 3) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatch(f"vectors of length {u.size} and {v.size}")
    return float((offset + float(u @ v) / scale) ** degree)


def kernel_matrix(a: np.ndarray, b: np.ndarray, scale=1.0, offset=1.0, degree=3) -> np.ndarray:
    return (offset + (a @ b.T) / scale) ** degree


@dataclass
class SvmModel:
    """Trained classifier; with standardization the support vectors are stored standardized."""

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    C: float = 1.0
    degree: int = 3
    scale: float = 1.0
    offset: float = 1.0
    mean: Optional[np.ndarray] = None
    std: Optional[np.ndarray] = None
    label_map: dict = field(default_factory=lambda: dict(LABEL_MAP))

    @property
    def dim(self) -> int:
        if self.mean is not None:
            return len(self.mean)
        return self.support_vectors.shape[1]

    def _prepare(self, x: np.ndarray) -> np.ndarray:
        if self.mean is not None:
            return (x - self.mean) / self.std
        return x

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"model expects {self.dim} features, got {X.shape[1]}")
        X = self._prepare(X)
        if len(self.dual_coefs) == 0:
            return np.full(len(X), self.bias)
        K = kernel_matrix(X, self.support_vectors, self.scale, self.offset, self.degree)
        return K @ self.dual_coefs + self.bias

    def to_dict(self) -> dict:
        return {
            "kernel": {"degree": self.degree, "scale": self.scale, "offset": self.offset},
            "C": self.C,
            "bias": self.bias,
            "standardization": None if self.mean is None else {
                "mean": self.mean.tolist(), "std": self.std.tolist()},
            "support_vectors": self.support_vectors.tolist(),
            "dual_coefs": self.dual_coefs.tolist(),
            "label_map": {str(k): v for k, v in self.label_map.items()},
        }

    def to_json(self) -> str:
        # json writes floats with repr(), which round-trips float64 exactly
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        try:
            std = d.get("standardization")
            sv = np.asarray(d["support_vectors"], dtype=np.float64)
            coefs = np.asarray(d["dual_coefs"], dtype=np.float64)
            return cls(
                support_vectors=sv.reshape(len(coefs), -1) if sv.size else sv.reshape(0, 0),
                dual_coefs=coefs,
                bias=float(d["bias"]),
                C=float(d.get("C", 1.0)),
                degree=int(d["kernel"]["degree"]),
                scale=float(d["kernel"]["scale"]),
                offset=float(d["kernel"]["offset"]),
                mean=None if std is None else np.asarray(std["mean"], dtype=np.float64),
                std=None if std is None else np.asarray(std["std"], dtype=np.float64),
                label_map={int(k): v for k, v in d.get("label_map", LABEL_MAP).items()},
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed model document: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "SvmModel":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc


def predict(model: SvmModel, x) -> tuple:
    """``(label, score)`` for one vector; a score of exactly 0 is genuine."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch("predict takes a single feature vector")
    score = float(model.decision_function(x)[0])
    return (model.label_map[1] if score > 0 else model.label_map[-1]), score


def predict_many(model: SvmModel, X) -> list:
    scores = model.decision_function(X)
    return [model.label_map[1] if s > 0 else model.label_map[-1] for s in scores]


def to_signs(labels: Sequence) -> np.ndarray:
    """Map 'morph'/'genuine' (or +1/-1) labels to +1/-1."""
    out = []
    for lab in labels:
        if lab in ("morph", 1, 1.0, True):
            out.append(1.0)
        elif lab in ("genuine", -1, -1.0, 0, False):
            out.append(-1.0)
        else:
            raise ValueError(f"unknown label {lab!r}")
    return np.asarray(out)


class _Smo:
    def __init__(self, K: np.ndarray, y: np.ndarray, cfg: TrainConfig, rng):
        self.K = K
        self.y = y
        self.C = cfg.C
        self.tol = cfg.kkt_tolerance
        self.rng = rng
        self.n = len(y)
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        self.E = -y.copy()  # f(x) = 0 initially
        self.steps = 0
        self.eps = 1e-12

    def take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        y, K, C = self.y, self.K, self.C
        a1, a2 = self.alpha[i1], self.alpha[i2]
        y1, y2 = y[i1], y[i2]
        E1, E2 = self.E[i1], self.E[i2]
        s = y1 * y2
        if s < 0:
            L, H = max(0.0, a2 - a1), min(C, C + a2 - a1)
        else:
            L, H = max(0.0, a1 + a2 - C), min(C, a1 + a2)
        if H - L <= 0:
            return False
        k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2_new = min(max(a2 + y2 * (E1 - E2) / eta, L), H)
        else:
            # objective at both ends of the segment
            f1 = y1 * (E1 - self.b) - a1 * k11 - s * a2 * k12
            f2 = y2 * (E2 - self.b) - s * a1 * k12 - a2 * k22
            L1, H1 = a1 + s * (a2 - L), a1 + s * (a2 - H)
            obj_l = L1 * f1 + L * f2 + 0.5 * L1 * L1 * k11 + 0.5 * L * L * k22 + s * L * L1 * k12
            obj_h = H1 * f1 + H * f2 + 0.5 * H1 * H1 * k11 + 0.5 * H * H * k22 + s * H * H1 * k12
            if obj_l < obj_h - self.eps:
                a2_new = L
            elif obj_l > obj_h + self.eps:
                a2_new = H
            else:
                a2_new = a2
        if abs(a2_new - a2) < self.eps * (a2_new + a2 + self.eps):
            return False
        a1_new = a1 + s * (a2 - a2_new)
        if a1_new < 0:
            a2_new += s * a1_new
            a1_new = 0.0
        elif a1_new > C:
            a2_new += s * (a1_new - C)
            a1_new = C

        d1, d2 = y1 * (a1_new - a1), y2 * (a2_new - a2)
        b1 = self.b - E1 - d1 * k11 - d2 * k12
        b2 = self.b - E2 - d1 * k12 - d2 * k22
        if 0 < a1_new < C:
            b_new = b1
        elif 0 < a2_new < C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)
        self.E += d1 * K[i1] + d2 * K[i2] + (b_new - self.b)
        self.alpha[i1], self.alpha[i2] = a1_new, a2_new
        self.b = b_new
        self.steps += 1
        return True

    def violates(self, i: int) -> bool:
        r = self.E[i] * self.y[i]
        a = self.alpha[i]
        return (r < -self.tol and a < self.C) or (r > self.tol and a > 0)

    def examine(self, i2: int) -> int:
        if not self.violates(i2):
            return 0
        E2 = self.E[i2]
        free = np.flatnonzero((self.alpha > 0) & (self.alpha < self.C))
        if len(free) > 1:
            i1 = int(free[np.argmax(np.abs(self.E[free] - E2))])
            if self.take_step(i1, i2):
                return 1
        if len(free):
            start = int(self.rng.integers(len(free)))
            for i1 in np.roll(free, -start):
                if self.take_step(int(i1), i2):
                    return 1
        start = int(self.rng.integers(self.n))
        for i1 in np.roll(np.arange(self.n), -start):
            if self.take_step(int(i1), i2):
                return 1
        return 0

    def refresh_errors(self):
        self.E = self.K @ (self.alpha * self.y) + self.b - self.y

    def run(self, max_passes: int, max_iter: int):
        examine_all = True
        quiet = 0
        while quiet < max_passes:
            if self.steps >= max_iter:
                log.warning("SMO stopped after %d steps without full convergence", self.steps)
                break
            candidates = range(self.n) if examine_all else np.flatnonzero(
                (self.alpha > 0) & (self.alpha < self.C))
            changed = sum(self.examine(int(i)) for i in candidates)
            self.refresh_errors()
            if examine_all:
                quiet = quiet + 1 if changed == 0 else 0
                examine_all = False
            elif changed == 0:
                examine_all = True


def _standardization(X: np.ndarray):
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 0, std, 1.0)  # constant coordinates stay constant (zero)
    return mean, std


def train_svm(X, y, cfg: TrainConfig = TrainConfig()) -> SvmModel:
    """Fit the soft-margin dual by SMO.

    ``X`` is an ``(n, d)`` array (or list of :class:`FeatureVector`, in which
    case ``y`` may be ``None`` and the vectors' labels are used). ``y`` holds
    'morph'/'genuine' or +1/-1.
    """
    if y is None:
        y = [fv.label for fv in X]
        X = [fv.values for fv in X]
    X = np.asarray(X, dtype=np.float64)
    y = to_signs(y)
    if X.ndim != 2 or len(X) != len(y):
        raise DimensionMismatch(f"{len(y)} labels for feature array of shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("training features contain NaN or infinity")
    if len(np.unique(y)) < 2:
        raise SingleClass("training data must contain both genuine and morph samples")

    mean = std = None
    Xw = X
    if cfg.standardize:
        mean, std = _standardization(X)
        Xw = (X - mean) / std

    K = kernel_matrix(Xw, Xw, cfg.scale, cfg.offset, cfg.degree)
    if np.abs(K).max() > 1e12:
        log.warning("kernel values up to %.3g; SMO is unlikely to converge without "
                    "standardization or a larger kernel scale", np.abs(K).max())
    smo = _Smo(K, y, cfg, np.random.default_rng(cfg.seed))
    smo.run(cfg.max_passes, cfg.max_iter)

    keep = smo.alpha > SUPPORT_EPS
    return SvmModel(
        support_vectors=Xw[keep].copy(),
        dual_coefs=(smo.alpha * y)[keep],
        bias=float(smo.b),
        C=cfg.C,
        degree=cfg.degree,
        scale=cfg.scale,
        offset=cfg.offset,
        mean=mean,
        std=std,
    )
