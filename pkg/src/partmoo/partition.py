"""Dominance-rank labeling and the recursive SVM partition tree."""
from __future__ import annotations

import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .core import Archive, SearchDomain
from .hypervolume import HvConfig, hypervolume
from .pareto import dominance_counts
from .svm import BAD, GOOD, KernelSpec, SMOClassifier

logger = logging.getLogger(__name__)

ROOT, GOOD_SIDE, BAD_SIDE = "root", GOOD, BAD


@dataclass(frozen=True)
class PartitionParams:
    max_depth: int = 6
    min_leaf_samples: int = 8
    kernel: KernelSpec = KernelSpec()
    c_reg: float = 1.0

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.min_leaf_samples < 2:
            raise ValueError("min_leaf_samples must be at least 2")


@dataclass
class TreeNode:
    id: int
    parent: int | None
    side: str
    depth: int
    sample_ids: list
    svm: SMOClassifier | None = None
    children: tuple[int, int] | None = None
    hv: float | None = None

    @property
    def n(self) -> int:
        return len(self.sample_ids)

    @property
    def is_leaf(self) -> bool:
        return self.children is None


@dataclass(frozen=True)
class Split:
    svm: SMOClassifier
    good_ids: list
    bad_ids: list
    labels: np.ndarray
    counts: np.ndarray


def _rank_labels(counts: np.ndarray, ids: np.ndarray) -> np.ndarray:
    """1 for the ceil(n/2) best samples by (dominance number, id), else 0."""
    order = np.lexsort((ids, counts))
    labels = np.zeros(len(ids), dtype=int)
    labels[order[:math.ceil(len(ids) / 2)]] = 1
    return labels


def label_samples(samples) -> list[str]:
    """Label the better half of ``samples`` good by node-local dominance number.

    Ties at the median are broken by sample id, lower first.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise ValueError("need at least two samples to label")
    V = np.array([s.v for s in samples], dtype=float)
    ids = np.array([s.id for s in samples])
    labels = _rank_labels(dominance_counts(V), ids)
    return [GOOD if lab else BAD for lab in labels]


def split_node(node: TreeNode, archive: Archive, params: PartitionParams) -> Split | None:
    """Try to bisect ``node``; returns None when the node is not splittable."""
    if node.n < 2 * params.min_leaf_samples:
        return None
    ids = np.asarray(node.sample_ids)
    counts = dominance_counts(archive.V[ids])
    if np.all(counts == counts[0]):
        # no ranking signal: every sample is equally good
        return None
    labels = _rank_labels(counts, ids)
    domain = archive.domain
    model = SMOClassifier(C=params.c_reg, kernel=params.kernel.kind, gamma=params.kernel.gamma,
                          degree=params.kernel.degree, coef0=params.kernel.coef0,
                          feature_lower=domain.lower, feature_upper=domain.upper,
                          cardinalities=domain.cardinalities if domain.is_categorical else None)
    model.fit(archive.X[ids], labels)
    routed = model.predict(archive.X[ids]).astype(bool)
    if routed.all() or not routed.any():
        return None
    return Split(model, ids[routed].tolist(), ids[~routed].tolist(), labels, counts)


@dataclass
class PartitionTree:
    archive: Archive
    ref: np.ndarray
    nodes: dict = field(default_factory=dict)
    root: int = 0
    hv_config: HvConfig = HvConfig()
    splits: list = field(default_factory=list, repr=False)

    @property
    def leaves(self) -> list[int]:
        """Leaf ids, leftmost (good-most) first."""
        out, stack = [], [self.root]
        while stack:
            node = self.nodes[stack.pop()]
            if node.is_leaf:
                out.append(node.id)
            else:
                good, bad = node.children
                stack.extend([bad, good])
        return out

    @property
    def depth(self) -> int:
        return max(node.depth for node in self.nodes.values())

    def node(self, node_id: int) -> TreeNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise ValueError(f"unknown node id {node_id}") from None

    def node_hv(self, node_id: int) -> float:
        """Hypervolume of the node's samples, computed once and cached."""
        node = self.node(node_id)
        if node.hv is None:
            node.hv = hypervolume(self.archive.V[node.sample_ids], self.ref, self.hv_config)
        return node.hv

    def path_to(self, node_id: int) -> list[int]:
        path = [node_id]
        while self.node(path[-1]).parent is not None:
            path.append(self.nodes[path[-1]].parent)
        return path[::-1]

    def membership(self, node_id: int, X) -> np.ndarray:
        """Boolean mask of rows of ``X`` inside the region of ``node_id``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        inside = np.ones(len(X), dtype=bool)
        path = self.path_to(node_id)
        for parent_id, child_id in zip(path[:-1], path[1:]):
            idx = np.flatnonzero(inside)
            if idx.size == 0:
                break
            parent = self.nodes[parent_id]
            good = parent.svm.predict(X[idx]).astype(bool)
            want_good = self.nodes[child_id].side == GOOD
            inside[idx] = good == want_good
        return inside

    def route(self, X) -> np.ndarray:
        """Leaf id for every row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full(len(X), self.root)
        frontier = [(self.root, np.arange(len(X)))]
        while frontier:
            node_id, idx = frontier.pop()
            node = self.nodes[node_id]
            if node.is_leaf or idx.size == 0:
                out[idx] = node_id
                continue
            good = node.svm.predict(X[idx]).astype(bool)
            frontier.append((node.children[0], idx[good]))
            frontier.append((node.children[1], idx[~good]))
        return out

    def to_dict(self) -> dict:
        nodes = []
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            nodes.append({
                "id": node.id,
                "parent": node.parent,
                "side": node.side,
                "depth": node.depth,
                "n": node.n,
                "hv": self.node_hv(node.id),
                "n_support": 0 if node.svm is None else int(len(node.svm.support_)),
                "children": None if node.children is None else list(node.children),
            })
        return {"root": self.root, "leaves": self.leaves, "nodes": nodes}

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def build_tree(archive: Archive, params: PartitionParams = PartitionParams(), hv_ref=None,
               hv_config: HvConfig = HvConfig()) -> PartitionTree:
    """Split breadth-first from the root until every frontier node is a leaf.

    A node stays a leaf when it is not splittable, sits at ``max_depth``, or
    holds fewer than ``2 * min_leaf_samples`` samples. Node hypervolumes are
    computed lazily through :meth:`PartitionTree.node_hv`.
    """
    if len(archive) < 2:
        raise ValueError("need at least two samples to build a tree")
    if hv_ref is None:
        hv_ref = archive.V.min(axis=0)
    tree = PartitionTree(archive, np.asarray(hv_ref, dtype=float), hv_config=hv_config)
    tree.nodes[0] = TreeNode(0, None, ROOT, 0, archive.unique_indices().tolist())
    queue = deque([0])
    while queue:
        node = tree.nodes[queue.popleft()]
        if node.depth >= params.max_depth:
            continue
        split = split_node(node, archive, params)
        if split is None:
            continue
        good_id, bad_id = len(tree.nodes), len(tree.nodes) + 1
        tree.nodes[good_id] = TreeNode(good_id, node.id, GOOD, node.depth + 1, split.good_ids)
        tree.nodes[bad_id] = TreeNode(bad_id, node.id, BAD, node.depth + 1, split.bad_ids)
        node.svm = split.svm
        node.children = (good_id, bad_id)
        tree.splits.append((node.id, split))
        queue.extend([good_id, bad_id])
    return tree


def region_membership(tree: PartitionTree, node_id: int, x) -> bool:
    return bool(tree.membership(node_id, np.asarray(x, dtype=float)[None, :])[0])


class SpacePartitioner(BaseEstimator):
    """Estimator wrapper: ``fit(X, Y)`` learns the tree, ``predict(X)`` returns leaf ids.

    ``Y`` holds objective values under the maximization convention.
    """

    def __init__(self, domain: SearchDomain = None, max_depth=6, min_leaf_samples=8,
                 kernel="rbf", gamma="scale", c_reg=1.0, ref=None):
        self.domain = domain
        self.max_depth = max_depth
        self.min_leaf_samples = min_leaf_samples
        self.kernel = kernel
        self.gamma = gamma
        self.c_reg = c_reg
        self.ref = ref

    def fit(self, X, Y):
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        if X.ndim != 2 or Y.ndim != 2 or len(X) != len(Y):
            raise ValueError("X and Y must be 2-D with the same number of rows")
        domain = self.domain
        if domain is None:
            domain = SearchDomain.box(X.min(axis=0), X.max(axis=0) + 1e-12)
        archive = Archive(domain, Y.shape[1])
        archive.extend(X, Y)
        params = PartitionParams(self.max_depth, self.min_leaf_samples,
                                 KernelSpec(self.kernel, gamma=self.gamma), self.c_reg)
        self.tree_ = build_tree(archive, params, self.ref)
        self.leaves_ = self.tree_.leaves
        return self

    def predict(self, X):
        return self.tree_.route(X)
