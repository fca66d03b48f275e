"""CART decision trees: greedy binary splits on one feature at a time.

Two growers share the split-search core: a classification tree minimizing
weighted Gini impurity, and a regression tree (used by the boosting stages)
maximizing weighted squared-error reduction. Ties break deterministically by
lowest feature index, then lowest threshold, so refits are byte-identical.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .base import ClassifierModel, class_weight_multipliers, prepare_fit_inputs, register_model

LEAF = -1


def gini_impurity(counts: np.ndarray) -> float:
    """Weighted Gini impurity 1 - sum_c (W_c / W)^2 of one node."""
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts / total
    return float(1.0 - (p ** 2).sum())


def _class_split_candidates(
    x: np.ndarray, y: np.ndarray, w: np.ndarray, min_leaf: int
) -> Optional[tuple[float, float]]:
    """Best (weighted child impurity, threshold) for one feature, or None.

    Splits are midpoints between consecutive distinct sorted values; the first
    minimum wins, which is the lowest threshold.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ws = w[order]
    w1s = ws * y[order]
    n = xs.size
    boundary = np.nonzero(xs[:-1] < xs[1:])[0]
    if min_leaf > 1 and boundary.size:
        left_n = boundary + 1
        boundary = boundary[(left_n >= min_leaf) & (n - left_n >= min_leaf)]
    if boundary.size == 0:
        return None
    cw = np.cumsum(ws)
    cw1 = np.cumsum(w1s)
    W, W1 = cw[-1], cw1[-1]
    if W <= 0:
        return None
    WL, WL1 = cw[boundary], cw1[boundary]
    WL0 = WL - WL1
    WR, WR1 = W - WL, W1 - WL1
    WR0 = WR - WR1
    with np.errstate(divide="ignore", invalid="ignore"):
        gl = np.where(WL > 0, WL - (WL0 ** 2 + WL1 ** 2) / WL, 0.0)
        gr = np.where(WR > 0, WR - (WR0 ** 2 + WR1 ** 2) / WR, 0.0)
    child = (gl + gr) / W
    j = int(np.argmin(child))
    b = boundary[j]
    return float(child[j]), float((xs[b] + xs[b + 1]) / 2.0)


def _sse_split_candidates(
    x: np.ndarray, g: np.ndarray, w: np.ndarray, min_leaf: int
) -> Optional[tuple[float, float]]:
    """Best (gain, threshold) for one feature under squared-error reduction.

    Gain is S_L^2/W_L + S_R^2/W_R - S^2/W with S the weighted target sum; the
    first maximum wins (lowest threshold).
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ws = w[order]
    gs = g[order] * ws
    n = xs.size
    boundary = np.nonzero(xs[:-1] < xs[1:])[0]
    if min_leaf > 1 and boundary.size:
        left_n = boundary + 1
        boundary = boundary[(left_n >= min_leaf) & (n - left_n >= min_leaf)]
    if boundary.size == 0:
        return None
    cw = np.cumsum(ws)
    cs = np.cumsum(gs)
    W, S = cw[-1], cs[-1]
    WL, SL = cw[boundary], cs[boundary]
    WR, SR = W - WL, S - SL
    with np.errstate(divide="ignore", invalid="ignore"):
        score = (np.where(WL > 0, SL ** 2 / WL, 0.0)
                 + np.where(WR > 0, SR ** 2 / WR, 0.0))
    gain = score - (S ** 2 / W if W > 0 else 0.0)
    j = int(np.argmax(gain))
    if gain[j] <= 0.0:
        return None
    b = boundary[j]
    return float(gain[j]), float((xs[b] + xs[b + 1]) / 2.0)


def _candidate_features(
    d: int, max_features, rng: Optional[np.random.Generator]
) -> np.ndarray:
    """Feature subset for one split, ascending order for tie-breaking."""
    if max_features in (None, "all"):
        m = d
    elif max_features == "sqrt":
        m = max(1, int(np.sqrt(d)))
    elif max_features == "log2":
        m = max(1, int(np.log2(d))) if d > 1 else 1
    elif isinstance(max_features, (int, np.integer)):
        m = min(int(max_features), d)
    else:
        raise ValueError(f"unknown max_features rule {max_features!r}")
    if m >= d or rng is None:
        return np.arange(d)
    return np.sort(rng.choice(d, size=m, replace=False))


@dataclass
class TreeArrays:
    """Flat node storage shared by all tree models."""

    feature: list = field(default_factory=list)
    threshold: list = field(default_factory=list)
    left: list = field(default_factory=list)
    right: list = field(default_factory=list)
    payload: list = field(default_factory=list)  # class counts or leaf value

    def add_node(self) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.payload.append(None)
        return len(self.feature) - 1

    def leaf_ids(self, X: np.ndarray) -> np.ndarray:
        """Vectorized root-to-leaf routing; x <= threshold goes left."""
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        idx = np.zeros(X.shape[0], dtype=np.int64)
        active = feature[idx] != LEAF
        while active.any():
            rows = np.nonzero(active)[0]
            node = idx[rows]
            go_left = X[rows, feature[node]] <= threshold[node]
            idx[rows] = np.where(go_left, left[node], right[node])
            active = feature[idx] != LEAF
        return idx

    def to_dict(self) -> dict:
        return {
            "feature": list(self.feature),
            "threshold": list(self.threshold),
            "left": list(self.left),
            "right": list(self.right),
            "payload": [list(p) if isinstance(p, (list, np.ndarray)) else p
                        for p in self.payload],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeArrays":
        return cls(
            feature=list(d["feature"]),
            threshold=list(d["threshold"]),
            left=list(d["left"]),
            right=list(d["right"]),
            payload=list(d["payload"]),
        )


@register_model
class DecisionTreeModel(ClassifierModel):
    """Fitted CART classifier with Gini splits."""

    kind = "decision_tree"

    def __init__(self, tree: TreeArrays, n_features: int, params: dict,
                 importances: np.ndarray):
        self.tree = tree
        self.n_features = n_features
        self.params = params
        self.feature_importances = importances

    def _proba(self, X: np.ndarray) -> np.ndarray:
        leaves = self.tree.leaf_ids(X)
        counts = np.array([self.tree.payload[i] for i in leaves], dtype=np.float64)
        totals = counts.sum(axis=1, keepdims=True)
        return counts / totals

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_features": self.n_features,
            "params": self.params,
            "tree": self.tree.to_dict(),
            "importances": self.feature_importances.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTreeModel":
        return cls(TreeArrays.from_dict(d["tree"]), d["n_features"], d["params"],
                   np.array(d["importances"], dtype=np.float64))


def _grow_classification(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    max_depth: Optional[int],
    min_samples_split: int,
    min_samples_leaf: int,
    max_features,
    rng: Optional[np.random.Generator],
) -> tuple[TreeArrays, np.ndarray]:
    """Grow a Gini tree with an explicit stack (no recursion-depth cap).

    A node splits whenever it is impure, large enough, and any valid split
    exists; zero-gain splits are allowed (needed for XOR-like targets whose
    first useful cut appears a level deeper).
    """
    tree = TreeArrays()
    d = X.shape[1]
    importances = np.zeros(d)
    total_weight = w.sum()

    def node_counts(idx: np.ndarray) -> np.ndarray:
        wi, yi = w[idx], y[idx]
        return np.array([wi[yi == 0].sum(), wi[yi == 1].sum()])

    root = tree.add_node()
    stack: list[tuple[int, np.ndarray, int]] = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        counts = node_counts(idx)
        tree.payload[node] = counts.tolist()
        impurity = gini_impurity(counts)
        if (
            impurity == 0.0
            or idx.size < min_samples_split
            or (max_depth is not None and depth >= max_depth)
        ):
            continue
        best_child = np.inf
        best: Optional[tuple[int, float]] = None
        for f in _candidate_features(d, max_features, rng):
            res = _class_split_candidates(X[idx, f], y[idx], w[idx],
                                          min_samples_leaf)
            if res is None:
                continue
            child_impurity, thr = res
            if child_impurity < best_child:
                best_child = child_impurity
                best = (int(f), thr)
        if best is None or best_child > impurity:
            continue
        f, thr = best
        go_left = X[idx, f] <= thr
        node_w = w[idx].sum()
        importances[f] += (node_w / total_weight) * (impurity - best_child)
        tree.feature[node] = f
        tree.threshold[node] = thr
        left = tree.add_node()
        right = tree.add_node()
        tree.left[node] = left
        tree.right[node] = right
        stack.append((right, idx[~go_left], depth + 1))
        stack.append((left, idx[go_left], depth + 1))
    return tree, importances


def train_decision_tree(
    X: np.ndarray,
    y: np.ndarray,
    sample_weight: Optional[np.ndarray] = None,
    *,
    max_depth: Optional[int] = None,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
    criterion: str = "gini",
    class_weight: Optional[dict] = None,
    max_features=None,
    seed: Optional[int] = None,
) -> DecisionTreeModel:
    """Fit a CART classifier.

    ``class_weight`` maps class label to a multiplier applied to sample
    weights. ``max_features`` restricts the candidate features per split
    (used by the forest); None considers all features.
    """
    if criterion != "gini":
        raise ValueError("only the gini criterion is supported")
    X, y, w = prepare_fit_inputs(X, y, sample_weight)
    if class_weight:
        w = w * class_weight_multipliers(class_weight)[y]
    rng = np.random.default_rng(seed) if seed is not None else None
    tree, importances = _grow_classification(
        X, y, w, max_depth, min_samples_split, min_samples_leaf,
        max_features, rng,
    )
    params = {
        "max_depth": max_depth,
        "min_samples_split": min_samples_split,
        "min_samples_leaf": min_samples_leaf,
        "criterion": criterion,
        "class_weight": class_weight,
        "max_features": max_features,
    }
    return DecisionTreeModel(tree, X.shape[1], params, importances)


@dataclass
class RegressionTree:
    """Depth- or leaf-budgeted regression tree fit to gradient targets.

    Structure is chosen by squared-error gain on the targets ``g``; leaf
    values are a single Newton step sum(w*g) / max(sum(w*h), floor) using the
    curvatures ``h``.
    """

    tree: TreeArrays

    def predict(self, X: np.ndarray) -> np.ndarray:
        leaves = self.tree.leaf_ids(np.asarray(X, dtype=np.float64))
        return np.array([self.tree.payload[i] for i in leaves], dtype=np.float64)

    def to_dict(self) -> dict:
        return self.tree.to_dict()

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        return cls(TreeArrays.from_dict(d))


NEWTON_DENOM_FLOOR = 1e-12


def grow_regression_tree(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    w: np.ndarray,
    *,
    growth_mode: str = "depthwise",
    max_depth: int = 3,
    num_leaves: int = 31,
    min_samples_leaf: int = 1,
    feature_indices: Optional[np.ndarray] = None,
) -> RegressionTree:
    """Grow one boosting stage.

    Depthwise growth expands every splittable node level by level up to
    ``max_depth``; leafwise growth repeatedly splits the highest-gain leaf
    until ``num_leaves`` leaves exist. ``feature_indices`` restricts the
    columns considered (feature-fraction subsampling).
    """
    if growth_mode not in ("depthwise", "leafwise"):
        raise ValueError(f"unknown growth_mode {growth_mode!r}")
    d = X.shape[1]
    features = np.arange(d) if feature_indices is None else np.sort(feature_indices)
    tree = TreeArrays()

    def leaf_value(idx: np.ndarray) -> float:
        denom = float((w[idx] * h[idx]).sum())
        return float((w[idx] * g[idx]).sum() / max(denom, NEWTON_DENOM_FLOOR))

    def best_split(idx: np.ndarray) -> Optional[tuple[float, int, float]]:
        best = None
        for f in features:
            res = _sse_split_candidates(X[idx, f], g[idx], w[idx],
                                        min_samples_leaf)
            if res is None:
                continue
            gain, thr = res
            if best is None or gain > best[0] + 1e-15:
                best = (gain, int(f), thr)
        return best

    root_idx = np.arange(X.shape[0])
    if growth_mode == "depthwise":
        root = tree.add_node()
        stack: list[tuple[int, np.ndarray, int]] = [(root, root_idx, 0)]
        while stack:
            node, idx, depth = stack.pop()
            tree.payload[node] = leaf_value(idx)
            if depth >= max_depth or idx.size < 2:
                continue
            found = best_split(idx)
            if found is None:
                continue
            _, f, thr = found
            go_left = X[idx, f] <= thr
            tree.feature[node] = f
            tree.threshold[node] = thr
            left = tree.add_node()
            right = tree.add_node()
            tree.left[node] = left
            tree.right[node] = right
            stack.append((right, idx[~go_left], depth + 1))
            stack.append((left, idx[go_left], depth + 1))
        return RegressionTree(tree)

    # leafwise: best-first splitting under a leaf budget
    import heapq

    root = tree.add_node()
    tree.payload[root] = leaf_value(root_idx)
    counter = 0
    heap: list[tuple[float, int, int, np.ndarray, tuple[float, int, float]]] = []
    found = best_split(root_idx) if root_idx.size >= 2 else None
    if found is not None:
        heapq.heappush(heap, (-found[0], counter, root, root_idx, found))
    n_leaves = 1
    while heap and n_leaves < num_leaves:
        _, _, node, idx, (gain, f, thr) = heapq.heappop(heap)
        go_left = X[idx, f] <= thr
        left_idx, right_idx = idx[go_left], idx[~go_left]
        tree.feature[node] = f
        tree.threshold[node] = thr
        for side_idx, is_left in ((left_idx, True), (right_idx, False)):
            child = tree.add_node()
            tree.payload[child] = leaf_value(side_idx)
            if is_left:
                tree.left[node] = child
            else:
                tree.right[node] = child
            child_split = best_split(side_idx) if side_idx.size >= 2 else None
            if child_split is not None:
                counter += 1
                heapq.heappush(
                    heap, (-child_split[0], counter, child, side_idx, child_split)
                )
        n_leaves += 1
    return RegressionTree(tree)
