"""From-scratch random forest over fault-labeled feature rows.

Bagged CART trees with Gini splits. Rows are normalized per feature by
the training maximum absolute value, each tree trains on a bootstrap
resample, and each split considers m_try features drawn without
replacement. Determinism rules: every tree's RNG is derived from
(seed, tree index) only, so parallel and sequential training coincide;
split ties go to the lower feature index then the lower threshold;
leaf pluralities and forest votes break ties in sorted-label order,
which puts the all-zero healthy label first.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .simulate import FaultLabel

MODEL_FORMAT_NAME = "trifault-forest"
MODEL_FORMAT_VERSION = 1
# gains below this are treated as float jitter, not a real improvement
_MIN_GAIN = 1e-12


class ModelFormatError(ValueError):
    """Raised for malformed or unsupported model files."""


@dataclass(frozen=True)
class ForestParams:
    """Training controls.

    m_try defaults to floor(sqrt(n_features)) when None. max_depth None
    means unlimited; a node at the depth limit becomes a leaf.
    """

    n_trees: int = 264
    m_try: int | None = None
    max_depth: int | None = None
    min_samples_leaf: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.m_try is not None and self.m_try < 1:
            raise ValueError("m_try must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")

    def resolved_m_try(self, n_features: int) -> int:
        m = self.m_try if self.m_try is not None else max(1, int(math.isqrt(n_features)))
        if m > n_features:
            raise ValueError(f"m_try={m} exceeds feature count {n_features}")
        return m


@dataclass
class TreeNode:
    """Internal node (feature_index, threshold, children) or leaf (label)."""

    feature_index: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    label: FaultLabel | None = None
    class_counts: dict[FaultLabel, int] | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature_index is None


@dataclass(frozen=True)
class TrainingSet:
    """Feature rows plus their fault labels."""

    features: np.ndarray
    labels: tuple[FaultLabel, ...]
    feature_names: tuple[str, ...]
    scaler: np.ndarray | None = None

    def __post_init__(self) -> None:
        X = np.asarray(self.features, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1:
            raise ValueError("features must be a non-empty (rows, n_features) array")
        if len(self.labels) != X.shape[0]:
            raise ValueError("labels must match the number of feature rows")
        if len(self.feature_names) != X.shape[1]:
            raise ValueError("feature_names must match the feature width")
        if self.scaler is not None and len(self.scaler) != X.shape[1]:
            raise ValueError("scaler width must match the feature width")
        object.__setattr__(self, "features", X)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass
class RandomForestModel:
    trees: tuple[TreeNode, ...]
    feature_names: tuple[str, ...]
    scaler: np.ndarray
    label_universe: tuple[FaultLabel, ...]
    params: ForestParams
    _flat: "list[_FlatTree] | None" = field(default=None, repr=False, compare=False)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)


def normalize_fit(features) -> np.ndarray:
    """Per-feature max-abs scaler; an all-zero column scales by 1."""
    X = np.asarray(features, dtype=float)
    if X.ndim != 2:
        raise ValueError("features must be 2-d")
    scaler = np.max(np.abs(X), axis=0)
    scaler[scaler == 0.0] = 1.0
    return scaler


def normalize_apply(scaler, features) -> np.ndarray:
    scaler = np.asarray(scaler, dtype=float)
    if np.any(scaler <= 0):
        raise ValueError("scaler entries must be > 0")
    return np.asarray(features, dtype=float) / scaler


def bootstrap_sample(rows, n: int, rng: np.random.Generator) -> np.ndarray:
    """n row indices drawn uniformly with replacement from rows."""
    n_rows = rows if isinstance(rows, (int, np.integer)) else len(rows)
    if n_rows < 1:
        raise ValueError("cannot bootstrap from an empty row set")
    if n < 1:
        raise ValueError("bootstrap size must be >= 1")
    return rng.integers(0, n_rows, size=n)


def label_universe_of(labels) -> tuple[FaultLabel, ...]:
    return tuple(sorted(set(labels)))


def _encode_labels(labels, universe) -> np.ndarray:
    code = {lab: k for k, lab in enumerate(universe)}
    return np.fromiter((code[lab] for lab in labels), dtype=np.int64, count=len(labels))


def _gini(counts: np.ndarray, total) -> float:
    p = counts / total
    return 1.0 - float(np.sum(p * p))


def _make_leaf(node: TreeNode, counts: np.ndarray, universe) -> None:
    winner = int(np.argmax(counts))  # first max = sorted-label tie-break
    node.feature_index = None
    node.threshold = None
    node.label = universe[winner]
    node.class_counts = {universe[k]: int(c) for k, c in enumerate(counts) if c}


def _best_split(X, codes, idx, feature_ids, n_classes, min_leaf, parent_counts):
    """Best (gain, feature, threshold) over midpoint candidates, or None.

    feature_ids must be ascending; with strictly-greater gain comparison
    that realizes the (lower feature, lower threshold) tie-break.
    """
    n = idx.size
    parent_gini = _gini(parent_counts, n)
    node_codes = codes[idx]
    best_gain = 0.0
    best = None
    for f in feature_ids:
        v = X[idx, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        ys = node_codes[order]
        change = np.nonzero(vs[1:] != vs[:-1])[0]
        if min_leaf > 1:
            change = change[(change + 1 >= min_leaf) & (n - change - 1 >= min_leaf)]
        if change.size == 0:
            continue
        cum = np.zeros((n, n_classes))
        cum[np.arange(n), ys] = 1.0
        np.cumsum(cum, axis=0, out=cum)
        left_counts = cum[change]
        left_n = (change + 1).astype(float)
        right_counts = parent_counts - left_counts
        right_n = n - left_n
        gini_left = 1.0 - np.sum(np.square(left_counts / left_n[:, None]), axis=1)
        gini_right = 1.0 - np.sum(np.square(right_counts / right_n[:, None]), axis=1)
        gains = parent_gini - (left_n * gini_left + right_n * gini_right) / n
        j = int(np.argmax(gains))  # first max = lowest threshold
        if gains[j] > best_gain:
            best_gain = float(gains[j])
            best = (f, (vs[change[j]] + vs[change[j] + 1]) / 2.0)
    if best is None or best_gain <= _MIN_GAIN:
        return None
    return best_gain, best[0], best[1]


def _grow_tree(X, codes, root_idx, n_classes, m_try, max_depth, min_leaf, rng, universe) -> TreeNode:
    """Greedy CART growth; nodes are expanded in preorder so the RNG
    stream (one feature draw per split attempt) is reproducible."""
    n_features = X.shape[1]
    root = TreeNode()
    stack = [(root, root_idx, 0)]
    while stack:
        node, idx, depth = stack.pop()
        counts = np.bincount(codes[idx], minlength=n_classes).astype(float)
        n = idx.size
        if (
            counts.max() == n
            or (max_depth is not None and depth >= max_depth)
            or n < 2 * min_leaf
            or n < 2
        ):
            _make_leaf(node, counts, universe)
            continue
        if m_try < n_features:
            feats = np.sort(rng.choice(n_features, size=m_try, replace=False))
        else:
            feats = np.arange(n_features)
        split = _best_split(X, codes, idx, feats, n_classes, min_leaf, counts)
        if split is None:
            _make_leaf(node, counts, universe)
            continue
        _, f, thr = split
        mask = X[idx, f] <= thr
        node.feature_index = int(f)
        node.threshold = float(thr)
        node.left = TreeNode()
        node.right = TreeNode()
        # push right first so the left subtree is grown first
        stack.append((node.right, idx[~mask], depth + 1))
        stack.append((node.left, idx[mask], depth + 1))
    return root


def train_tree(
    features,
    labels,
    m_try: int,
    rng: np.random.Generator,
    max_depth: int | None = None,
    min_samples_leaf: int = 1,
) -> TreeNode:
    """Grow one CART tree on the given rows (already normalized)."""
    X = np.asarray(features, dtype=float)
    universe = label_universe_of(labels)
    codes = _encode_labels(labels, universe)
    if not 1 <= m_try <= X.shape[1]:
        raise ValueError(f"m_try must be in 1..{X.shape[1]}")
    return _grow_tree(
        X, codes, np.arange(X.shape[0]), len(universe), m_try, max_depth, min_samples_leaf, rng, universe
    )


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """The RNG stream owned by one tree; depends only on (seed, index)."""
    return np.random.default_rng([seed, tree_index])


def _train_indexed_tree(X_norm, codes, n_classes, params: ForestParams, index: int, universe) -> TreeNode:
    rng = tree_rng(params.seed, index)
    boot = bootstrap_sample(X_norm.shape[0], X_norm.shape[0], rng)
    m_try = params.resolved_m_try(X_norm.shape[1])
    return _grow_tree(
        X_norm, codes, boot, n_classes, m_try, params.max_depth, params.min_samples_leaf, rng, universe
    )


_WORKER_STATE: dict = {}


def _worker_init(X_norm, codes, n_classes, params, universe):
    _WORKER_STATE.update(
        X=X_norm, codes=codes, n_classes=n_classes, params=params, universe=universe
    )


def _worker_train(index: int) -> list[str]:
    s = _WORKER_STATE
    tree = _train_indexed_tree(s["X"], s["codes"], s["n_classes"], s["params"], index, s["universe"])
    return _tree_lines(tree)


def train_forest(training_set: TrainingSet, params: ForestParams, n_jobs: int = 1) -> RandomForestModel:
    """Train a bagged forest; results are identical for any n_jobs.

    Args:
        training_set: rows to fit; the stored scaler is reused when
            present, otherwise fit from these rows.
        params: tree counts and stopping controls.
        n_jobs: worker processes; 1 trains in-process.
    """
    ts = training_set
    universe = label_universe_of(ts.labels)
    if len(universe) < 2:
        raise ValueError("training needs at least 2 distinct labels")
    scaler = ts.scaler if ts.scaler is not None else normalize_fit(ts.features)
    X_norm = normalize_apply(scaler, ts.features)
    codes = _encode_labels(ts.labels, universe)
    n_classes = len(universe)

    if n_jobs > 1 and params.n_trees > 1:
        workers = min(n_jobs, params.n_trees, os.cpu_count() or 1)
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_worker_init,
            initargs=(X_norm, codes, n_classes, params, universe),
        ) as pool:
            packed = list(pool.map(_worker_train, range(params.n_trees), chunksize=8))
        trees = tuple(_tree_from_lines(iter(lines)) for lines in packed)
    else:
        trees = tuple(
            _train_indexed_tree(X_norm, codes, n_classes, params, i, universe)
            for i in range(params.n_trees)
        )

    return RandomForestModel(
        trees=trees,
        feature_names=ts.feature_names,
        scaler=np.asarray(scaler, dtype=float),
        label_universe=universe,
        params=params,
    )


class _FlatTree:
    """Array view of one tree for vectorized batch descent."""

    __slots__ = ("feature", "threshold", "left", "right", "leaf_code")

    def __init__(self, root: TreeNode, code_of: dict[FaultLabel, int]):
        nodes: list[TreeNode] = []
        stack = [root]
        while stack:
            node = stack.pop()
            nodes.append(node)
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)
        index = {id(node): k for k, node in enumerate(nodes)}
        n = len(nodes)
        self.feature = np.full(n, -1, dtype=np.int32)
        self.threshold = np.zeros(n)
        self.left = np.zeros(n, dtype=np.int32)
        self.right = np.zeros(n, dtype=np.int32)
        self.leaf_code = np.zeros(n, dtype=np.int32)
        for k, node in enumerate(nodes):
            if node.is_leaf:
                self.leaf_code[k] = code_of[node.label]
            else:
                self.feature[k] = node.feature_index
                self.threshold[k] = node.threshold
                self.left[k] = index[id(node.left)]
                self.right[k] = index[id(node.right)]

    def predict_codes(self, X_norm: np.ndarray) -> np.ndarray:
        cur = np.zeros(X_norm.shape[0], dtype=np.int32)
        rows = np.arange(X_norm.shape[0])
        while True:
            feat = self.feature[cur]
            active = feat >= 0
            if not active.any():
                return self.leaf_code[cur]
            r = rows[active]
            c = cur[active]
            go_left = X_norm[r, feat[active]] <= self.threshold[c]
            cur[active] = np.where(go_left, self.left[c], self.right[c])


def _flat_trees(model: RandomForestModel) -> "list[_FlatTree]":
    if model._flat is None:
        code_of = {lab: k for k, lab in enumerate(model.label_universe)}
        model._flat = [_FlatTree(t, code_of) for t in model.trees]
    return model._flat


def _vote_codes(model: RandomForestModel, X_raw: np.ndarray) -> np.ndarray:
    """(rows, classes) vote counts for raw (unnormalized) feature rows."""
    X = np.asarray(X_raw, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"expected (rows, {model.n_features}) features")
    X_norm = normalize_apply(model.scaler, X)
    votes = np.zeros((X.shape[0], len(model.label_universe)), dtype=np.int32)
    rows = np.arange(X.shape[0])
    for flat in _flat_trees(model):
        votes[rows, flat.predict_codes(X_norm)] += 1
    return votes


def predict_batch(model: RandomForestModel, features) -> list[FaultLabel]:
    """Majority-vote label per row; ties go to the sorted-label order."""
    votes = _vote_codes(model, features)
    return [model.label_universe[k] for k in np.argmax(votes, axis=1)]


def predict(model: RandomForestModel, features) -> tuple[FaultLabel, dict[FaultLabel, int]]:
    """Label plus per-label vote counts for one feature row."""
    votes = _vote_codes(model, np.asarray(features, dtype=float).reshape(1, -1))[0]
    counts = {model.label_universe[k]: int(v) for k, v in enumerate(votes) if v}
    return model.label_universe[int(np.argmax(votes))], counts


@dataclass(frozen=True)
class CrossValResult:
    fold_accuracies: tuple[float, ...]
    mean_accuracy: float
    confusion: np.ndarray
    label_universe: tuple[FaultLabel, ...]


def stratified_folds(labels, k_folds: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Shuffled per-class round-robin assignment into k folds."""
    by_label: dict[FaultLabel, list[int]] = {}
    for i, lab in enumerate(labels):
        by_label.setdefault(lab, []).append(i)
    folds: list[list[int]] = [[] for _ in range(k_folds)]
    offset = 0
    for lab in sorted(by_label):
        idx = np.array(by_label[lab])
        rng.shuffle(idx)
        for j, row in enumerate(idx):
            folds[(offset + j) % k_folds].append(int(row))
        offset += len(idx)
    return [np.sort(np.array(f, dtype=np.int64)) for f in folds]


def cross_validate(training_set: TrainingSet, params: ForestParams, k_folds: int = 5) -> CrossValResult:
    """Stratified k-fold accuracy and pooled confusion matrix."""
    ts = training_set
    if k_folds < 2:
        raise ValueError("k_folds must be >= 2")
    if ts.n_rows < k_folds:
        raise ValueError(f"{ts.n_rows} rows cannot fill {k_folds} folds")
    universe = label_universe_of(ts.labels)
    code_of = {lab: k for k, lab in enumerate(universe)}
    rng = np.random.default_rng([params.seed, 0xF01D])
    folds = stratified_folds(ts.labels, k_folds, rng)

    confusion = np.zeros((len(universe), len(universe)), dtype=np.int64)
    accuracies = []
    all_rows = np.arange(ts.n_rows)
    for fold in folds:
        test_mask = np.zeros(ts.n_rows, dtype=bool)
        test_mask[fold] = True
        train_idx = all_rows[~test_mask]
        sub = TrainingSet(
            features=ts.features[train_idx],
            labels=tuple(ts.labels[i] for i in train_idx),
            feature_names=ts.feature_names,
        )
        model = train_forest(sub, params)
        predicted = predict_batch(model, ts.features[fold])
        truth = [ts.labels[i] for i in fold]
        hits = sum(p == t for p, t in zip(predicted, truth))
        accuracies.append(hits / len(fold))
        for p, t in zip(predicted, truth):
            confusion[code_of[t], code_of[p]] += 1
    return CrossValResult(
        fold_accuracies=tuple(accuracies),
        mean_accuracy=float(np.mean(accuracies)),
        confusion=confusion,
        label_universe=universe,
    )


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _tree_lines(root: TreeNode) -> list[str]:
    lines = []
    stack = [root]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            lines.append(f"L {node.label}")
        else:
            lines.append(f"I {node.feature_index} {_fmt(node.threshold)}")
            stack.append(node.right)
            stack.append(node.left)
    return lines


def _node_from_line(line: str) -> TreeNode:
    parts = line.split()
    if parts and parts[0] == "L" and len(parts) == 2:
        return TreeNode(label=FaultLabel.from_string(parts[1]))
    if parts and parts[0] == "I" and len(parts) == 3:
        return TreeNode(feature_index=int(parts[1]), threshold=float(parts[2]))
    raise ModelFormatError(f"bad tree node line: {line!r}")


def _tree_from_lines(line_iter) -> TreeNode:
    try:
        root = _node_from_line(next(line_iter))
    except StopIteration:
        raise ModelFormatError("truncated tree block") from None
    if root.is_leaf:
        return root
    pending = [root]
    while pending:
        try:
            node = _node_from_line(next(line_iter))
        except StopIteration:
            raise ModelFormatError("truncated tree block") from None
        parent = pending[-1]
        if parent.left is None:
            parent.left = node
        else:
            parent.right = node
            pending.pop()
        if not node.is_leaf:
            pending.append(node)
    return root


def model_to_lines(model: RandomForestModel) -> list[str]:
    p = model.params
    for name in model.feature_names:
        if any(ch.isspace() for ch in name):
            raise ModelFormatError(f"feature name with whitespace: {name!r}")
    lines = [
        f"{MODEL_FORMAT_NAME} {MODEL_FORMAT_VERSION}",
        f"n_trees {model.n_trees}",
        f"n_features {model.n_features}",
        "feature_names " + " ".join(model.feature_names),
        "scaler " + " ".join(_fmt(s) for s in model.scaler),
        "labels " + " ".join(str(lab) for lab in model.label_universe),
        f"seed {p.seed}",
        f"m_try {'none' if p.m_try is None else p.m_try}",
        f"max_depth {'none' if p.max_depth is None else p.max_depth}",
        f"min_samples_leaf {p.min_samples_leaf}",
    ]
    for k, tree in enumerate(model.trees):
        lines.append(f"tree {k}")
        lines.extend(_tree_lines(tree))
    lines.append("end")
    return lines


def _header_value(lines: list[str], k: int, key: str) -> str:
    if k >= len(lines):
        raise ModelFormatError(f"missing header line {key!r}")
    parts = lines[k].split(None, 1)
    if parts[0] != key:
        raise ModelFormatError(f"expected header {key!r}, got {lines[k]!r}")
    return parts[1] if len(parts) > 1 else ""


def model_from_lines(lines: list[str]) -> RandomForestModel:
    if not lines:
        raise ModelFormatError("empty model text")
    head = lines[0].split()
    if len(head) != 2 or head[0] != MODEL_FORMAT_NAME:
        raise ModelFormatError(f"not a {MODEL_FORMAT_NAME} file: {lines[0]!r}")
    if head[1] != str(MODEL_FORMAT_VERSION):
        raise ModelFormatError(f"unsupported format version {head[1]!r}")
    n_trees = int(_header_value(lines, 1, "n_trees"))
    n_features = int(_header_value(lines, 2, "n_features"))
    feature_names = tuple(_header_value(lines, 3, "feature_names").split())
    scaler = np.array([float(v) for v in _header_value(lines, 4, "scaler").split()])
    labels = tuple(FaultLabel.from_string(v) for v in _header_value(lines, 5, "labels").split())
    seed = int(_header_value(lines, 6, "seed"))
    m_try_text = _header_value(lines, 7, "m_try")
    max_depth_text = _header_value(lines, 8, "max_depth")
    min_leaf = int(_header_value(lines, 9, "min_samples_leaf"))
    if len(feature_names) != n_features or len(scaler) != n_features:
        raise ModelFormatError("feature_names/scaler width disagrees with n_features")
    params = ForestParams(
        n_trees=n_trees,
        m_try=None if m_try_text == "none" else int(m_try_text),
        max_depth=None if max_depth_text == "none" else int(max_depth_text),
        min_samples_leaf=min_leaf,
        seed=seed,
    )

    it = iter(lines[10:])
    trees = []
    for k in range(n_trees):
        try:
            marker = next(it)
        except StopIteration:
            raise ModelFormatError(f"missing tree {k}") from None
        if marker != f"tree {k}":
            raise ModelFormatError(f"expected 'tree {k}', got {marker!r}")
        trees.append(_tree_from_lines(it))
    if next(it, None) != "end":
        raise ModelFormatError("missing end marker")
    return RandomForestModel(
        trees=tuple(trees),
        feature_names=feature_names,
        scaler=scaler,
        label_universe=labels,
        params=params,
    )


def save_model(model: RandomForestModel, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(model_to_lines(model)))
        fh.write("\n")


def load_model(path) -> RandomForestModel:
    with open(path, "r", encoding="ascii") as fh:
        return model_from_lines(fh.read().splitlines())
