"""Stochastic gradient-boosted regression trees, from scratch.

Depth-limited trees over histogram (quantile-binned) splits are added
sequentially, each fit to the Newton step of the loss at the current
ensemble score: per-row negative gradient over hessian, with a hessian
floor of 1e-12. Two loss modes:

  - "logistic": binary labels; raw score is log-odds, predictions are
    sigmoid(initial_score + eta * sum of leaf values);
  - "squared": targets in [0, 1] (fault-revealing ratios); predictions
    are the raw additive score clipped to [0, 1].

Determinism: training canonicalizes row order (content hash) before the
seeded row subsampling, so permuting the input rows does not change the
model. Split ties break on lowest feature index, then lowest threshold.
Partitioning is done on binned values and thresholds are recorded as
strict-less bounds on the next bin edge, so training-time routing and
prediction-time routing agree exactly.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

HESS_FLOOR = 1e-12
EXTREME_SCORE = 50.0  # log-odds used for single-class training sets
MODEL_VERSION = 1


class ModelFormatError(Exception):
    pass


class SchemaMismatchError(Exception):
    pass


@dataclass
class GbdtConfig:
    trees: int = 1000
    depth: int = 5
    eta: float = 0.1
    subsample: float = 0.5
    seed: int = 0
    loss: str = "logistic"   # "logistic" or "squared"
    max_bins: int = 64


@dataclass
class LabeledDataset:
    """Encoded feature rows with labels and a group key per row."""
    X: np.ndarray
    y: np.ndarray
    groups: list[str]

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.X.ndim != 2 or len(self.y) != self.X.shape[0]:
            raise ValueError("X must be 2-D with one label per row")
        if len(self.groups) != self.X.shape[0]:
            raise ValueError("one group key per row required")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss(y: np.ndarray, score: np.ndarray) -> float:
    p = np.clip(_sigmoid(score), 1e-15, 1.0 - 1e-15)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def logistic_negative_gradient(y: np.ndarray, score: np.ndarray) -> np.ndarray:
    """label minus predicted probability."""
    return y - _sigmoid(score)


@dataclass
class BoostedModel:
    loss: str
    eta: float
    initial_score: float
    n_features: int
    schema_hash: str = ""
    trees: list[dict] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)

    # -- prediction -----------------------------------------------------
    def raw_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise SchemaMismatchError(
                f"expected {self.n_features} features, got {X.shape[1]}")
        score = np.full(X.shape[0], self.initial_score, dtype=np.float64)
        for tree in self.trees:
            score += self.eta * _tree_predict(tree, X)
        return score

    def predict(self, vector, schema_hash: str | None = None) -> float:
        return float(self.predict_many(np.asarray(vector)[None, :], schema_hash)[0])

    def predict_many(self, X: np.ndarray, schema_hash: str | None = None) -> np.ndarray:
        if schema_hash is not None and self.schema_hash and schema_hash != self.schema_hash:
            raise SchemaMismatchError("feature schema hash does not match the model")
        score = self.raw_scores(X)
        if self.loss == "logistic":
            return _sigmoid(score)
        return np.clip(score, 0.0, 1.0)

    # -- persistence ------------------------------------------------------
    def serialize(self) -> bytes:
        payload = {
            "version": MODEL_VERSION,
            "loss": self.loss,
            "eta": self.eta,
            "initial_score": self.initial_score,
            "n_features": self.n_features,
            "schema_hash": self.schema_hash,
            "trees": self.trees,
        }
        return json.dumps(payload, sort_keys=True).encode()

    @classmethod
    def deserialize(cls, blob: bytes) -> "BoostedModel":
        try:
            payload = json.loads(blob.decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise ModelFormatError(f"corrupt model payload: {e}") from None
        if not isinstance(payload, dict) or "version" not in payload:
            raise ModelFormatError("corrupt model payload: missing header")
        if payload["version"] != MODEL_VERSION:
            raise ModelFormatError(f"unsupported model version {payload['version']}")
        try:
            return cls(
                loss=payload["loss"],
                eta=payload["eta"],
                initial_score=payload["initial_score"],
                n_features=payload["n_features"],
                schema_hash=payload.get("schema_hash", ""),
                trees=payload["trees"],
            )
        except KeyError as e:
            raise ModelFormatError(f"corrupt model payload: missing {e}") from None


def _tree_predict(tree: dict, X: np.ndarray) -> np.ndarray:
    out = np.zeros(X.shape[0], dtype=np.float64)
    stack = [(tree, np.arange(X.shape[0]))]
    while stack:
        node, rows = stack.pop()
        if rows.size == 0:
            continue
        if "v" in node:
            out[rows] = node["v"]
            continue
        go_left = X[rows, node["f"]] < node["t"]
        stack.append((node["l"], rows[go_left]))
        stack.append((node["r"], rows[~go_left]))
    return out


def tree_depth(tree: dict) -> int:
    if "v" in tree:
        return 0
    return 1 + max(tree_depth(tree["l"]), tree_depth(tree["r"]))


class _BinnedData:
    """Quantile-binned design matrix with a sparse nonzero-bin layout.

    Bin 0 always holds the value 0, so histogram accumulation only has
    to touch the stored nonzero entries; the zero bin is recovered from
    per-node totals.
    """

    def __init__(self, X: np.ndarray, max_bins: int):
        n, f = X.shape
        self.n_rows = n
        self.n_features = f
        self.bin_values: list[np.ndarray] = []
        entry_rows: list[np.ndarray] = []
        entry_cols: list[np.ndarray] = []
        entry_bins: list[np.ndarray] = []
        for j in range(f):
            col = X[:, j]
            uniq = np.unique(col)
            if uniq.size > max_bins:
                qs = np.quantile(uniq, np.linspace(0, 1, max_bins))
                uniq = np.unique(qs)
            vals = np.unique(np.concatenate([[0.0], uniq]))
            self.bin_values.append(vals)
            binned = np.clip(np.searchsorted(vals, col, side="right") - 1,
                             0, len(vals) - 1).astype(np.int64)
            nz = np.flatnonzero(binned)
            entry_rows.append(nz)
            entry_cols.append(np.full(nz.size, j, dtype=np.int64))
            entry_bins.append(binned[nz])
        self.entry_row = np.concatenate(entry_rows) if entry_rows else np.zeros(0, int)
        self.entry_col = np.concatenate(entry_cols) if entry_cols else np.zeros(0, int)
        self.entry_bin = np.concatenate(entry_bins) if entry_bins else np.zeros(0, int)
        self.max_bin = max(len(v) for v in self.bin_values)
        # valid split positions: feature f splits at bins j < len(vals_f) - 1
        self.split_valid = np.zeros((f, self.max_bin), dtype=bool)
        self.split_threshold = np.zeros((f, self.max_bin), dtype=np.float64)
        for j in range(f):
            k = len(self.bin_values[j])
            if k >= 2:
                self.split_valid[j, :k - 1] = True
                self.split_threshold[j, :k - 1] = self.bin_values[j][1:k]
        # per-column entry slices for partitioning
        order = np.argsort(self.entry_col, kind="stable")
        self._by_col_rows: list[np.ndarray] = []
        self._by_col_bins: list[np.ndarray] = []
        col_sorted = self.entry_col[order]
        bounds = np.searchsorted(col_sorted, np.arange(f + 1))
        for j in range(f):
            sel = order[bounds[j]:bounds[j + 1]]
            self._by_col_rows.append(self.entry_row[sel])
            self._by_col_bins.append(self.entry_bin[sel])

    def column_bins(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        return self._by_col_rows[j], self._by_col_bins[j]


class _TreeBuilder:
    def __init__(self, data: _BinnedData, grad: np.ndarray, hess: np.ndarray,
                 depth: int):
        self.data = data
        self.grad = grad
        self.hess = hess
        self.max_depth = depth
        self.in_node = np.zeros(data.n_rows, dtype=bool)

    def build(self, rows: np.ndarray) -> dict:
        return self._node(rows, 0)

    def _leaf(self, rows: np.ndarray) -> dict:
        g = float(self.grad[rows].sum())
        h = float(self.hess[rows].sum())
        return {"v": g / max(h, HESS_FLOOR)}

    def _node(self, rows: np.ndarray, level: int) -> dict:
        if level >= self.max_depth or rows.size < 2:
            return self._leaf(rows)
        split = self._best_split(rows)
        if split is None:
            return self._leaf(rows)
        feature, bin_j, threshold = split
        col_rows, col_bins = self.data.column_bins(feature)
        x_bins = np.zeros(self.data.n_rows, dtype=np.int64)
        x_bins[col_rows] = col_bins
        go_left = x_bins[rows] <= bin_j
        left_rows = rows[go_left]
        right_rows = rows[~go_left]
        if left_rows.size == 0 or right_rows.size == 0:
            return self._leaf(rows)
        return {
            "f": int(feature),
            "t": float(threshold),
            "l": self._node(left_rows, level + 1),
            "r": self._node(right_rows, level + 1),
        }

    def _best_split(self, rows: np.ndarray):
        data = self.data
        n_bins = data.max_bin
        width = n_bins + 1
        self.in_node[rows] = True
        mask = self.in_node[data.entry_row]
        idx = np.flatnonzero(mask)
        self.in_node[rows] = False
        flat = data.entry_col[idx] * width + data.entry_bin[idx]
        size = data.n_features * width
        hist_g = np.bincount(flat, weights=self.grad[data.entry_row[idx]],
                             minlength=size).reshape(data.n_features, width)
        hist_h = np.bincount(flat, weights=self.hess[data.entry_row[idx]],
                             minlength=size).reshape(data.n_features, width)
        hist_c = np.bincount(flat, minlength=size).reshape(data.n_features, width)
        g_total = float(self.grad[rows].sum())
        h_total = float(self.hess[rows].sum())
        c_total = rows.size
        # zero bin = totals minus stored bins
        hist_g[:, 0] = g_total - hist_g[:, 1:].sum(axis=1)
        hist_h[:, 0] = h_total - hist_h[:, 1:].sum(axis=1)
        hist_c[:, 0] = c_total - hist_c[:, 1:].sum(axis=1)
        parent_score = g_total * g_total / max(h_total, HESS_FLOOR)
        # cumulative left-side sums at every candidate split position
        gl = np.cumsum(hist_g, axis=1)[:, :-1]
        hl = np.cumsum(hist_h, axis=1)[:, :-1]
        cl = np.cumsum(hist_c, axis=1)[:, :-1]
        gr = g_total - gl
        hr = h_total - hl
        cr = c_total - cl
        valid = data.split_valid[:, :gl.shape[1]] & (cl > 0) & (cr > 0)
        score = gl * gl / np.maximum(hl, HESS_FLOOR) \
            + gr * gr / np.maximum(hr, HESS_FLOOR)
        gains = np.where(valid, score - parent_score, -np.inf)
        # argmax over the flattened (feature, threshold) grid: the first
        # maximum realizes the lowest-feature-then-lowest-threshold tie rule
        flat_idx = int(np.argmax(gains))
        f, j = divmod(flat_idx, gains.shape[1])
        if gains[f, j] <= 1e-12:
            return None
        return f, j, float(data.split_threshold[f, j])


def _canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    keys = []
    for i in range(X.shape[0]):
        h = hashlib.sha256(X[i].tobytes() + repr(float(y[i])).encode()).hexdigest()
        keys.append((h, i))
    keys.sort()
    return np.array([i for _, i in keys], dtype=np.int64)


def train(dataset: LabeledDataset, config: GbdtConfig | None = None) -> BoostedModel:
    """Train a boosted ensemble; deterministic given the config seed."""
    config = config or GbdtConfig()
    if config.loss not in ("logistic", "squared"):
        raise ValueError(f"unknown loss {config.loss!r}")
    X, y = dataset.X, dataset.y
    if X.shape[0] < 1:
        raise ValueError("empty dataset")
    order = _canonical_order(X, y)
    X = X[order]
    y = y[order]
    n = X.shape[0]

    if config.loss == "logistic":
        base = float(np.mean(y))
        if base <= 0.0 or base >= 1.0:
            warnings.warn("degenerate dataset: all labels equal; constant model")
            init = -EXTREME_SCORE if base <= 0.0 else EXTREME_SCORE
            model = BoostedModel("logistic", config.eta, init, X.shape[1])
            model.train_loss = [logistic_loss(y, np.full(n, init))]
            return model
        init = float(np.log(base / (1.0 - base)))
    else:
        init = float(np.mean(y))

    model = BoostedModel(config.loss, config.eta, init, X.shape[1])
    data = _BinnedData(X, config.max_bins)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    score = np.full(n, init, dtype=np.float64)
    sample_size = max(1, int(round(config.subsample * n)))

    for _ in range(config.trees):
        if config.loss == "logistic":
            p = _sigmoid(score)
            grad = y - p                  # negative gradient
            hess = np.maximum(p * (1.0 - p), HESS_FLOOR)
            model.train_loss.append(logistic_loss(y, score))
        else:
            grad = y - score
            hess = np.ones(n)
            model.train_loss.append(float(np.mean((y - score) ** 2)))
        if config.subsample >= 1.0:
            rows = np.arange(n)
        else:
            rows = np.sort(rng.permutation(n)[:sample_size])
        tree = _TreeBuilder(data, grad, hess, config.depth).build(rows)
        model.trees.append(tree)
        score += config.eta * _tree_predict(tree, X)
    if config.loss == "logistic":
        model.train_loss.append(logistic_loss(y, score))
    else:
        model.train_loss.append(float(np.mean((y - score) ** 2)))
    return model
