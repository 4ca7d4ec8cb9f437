"""UCB1 region selection over a partition tree, and optional backpropagation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hypervolume import hypervolume
from .partition import PartitionTree

PATH = "path"
LEAF = "leaf"
ABSOLUTE = "absolute"
FRACTION = "fraction_of_current_hv"


@dataclass(frozen=True)
class SelectionConfig:
    strategy: str = LEAF
    cp: float = 0.0
    cp_mode: str = FRACTION
    fraction: float = 0.1

    def __post_init__(self):
        if self.strategy not in (PATH, LEAF):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.cp_mode not in (ABSOLUTE, FRACTION):
            raise ValueError(f"unknown cp_mode {self.cp_mode!r}")
        if self.cp < 0:
            raise ValueError("cp must be non-negative")
        if not 0 <= self.fraction <= 1:
            raise ValueError("fraction must lie in [0, 1]")

    def exploration(self, total_hv: float) -> float:
        """The exploration constant for a tree whose samples have hypervolume ``total_hv``."""
        return self.cp if self.cp_mode == ABSOLUTE else self.fraction * total_hv


@dataclass
class SelectionOutcome:
    leaf_id: int
    path: list
    ucb_trace: list = field(default_factory=list)
    hv_evaluations: int = 0


def ucb(node_hv: float, n_node: int, n_parent: int, cp: float) -> float:
    """Node hypervolume plus ``2 cp sqrt(2 ln(n_parent) / n_node)``."""
    if n_node < 1:
        raise ValueError("n_node must be at least 1")
    if n_parent < n_node:
        raise ValueError("a parent cannot hold fewer samples than its child")
    return node_hv + 2.0 * cp * math.sqrt(2.0 * math.log(n_parent) / n_node)


def _cp(tree: PartitionTree, cfg: SelectionConfig, total_hv):
    if cfg.cp_mode == ABSOLUTE:
        return cfg.cp
    if total_hv is None:
        total_hv = hypervolume(tree.archive.V[tree.nodes[tree.root].sample_ids], tree.ref,
                               tree.hv_config)
    return cfg.exploration(total_hv)


def select_path(tree: PartitionTree, cfg: SelectionConfig, total_hv: float | None = None) -> SelectionOutcome:
    """Descend from the root, taking the child with the larger UCB (good child on ties).

    The values of every non-root node are refreshed first, as a full MCTS
    value pass would, and counted in ``hv_evaluations``.
    """
    cp = _cp(tree, cfg, total_hv)
    evaluations = 0
    for node_id in tree.nodes:
        if node_id != tree.root:
            tree.node_hv(node_id)
            evaluations += 1
    path = [tree.root]
    trace = []
    node = tree.nodes[tree.root]
    while not node.is_leaf:
        good, bad = (tree.nodes[c] for c in node.children)
        u_good = ucb(tree.node_hv(good.id), good.n, node.n, cp) if good.n else -math.inf
        u_bad = ucb(tree.node_hv(bad.id), bad.n, node.n, cp) if bad.n else -math.inf
        trace.extend([(good.id, u_good), (bad.id, u_bad)])
        node = good if u_good >= u_bad else bad
        path.append(node.id)
    return SelectionOutcome(node.id, path, trace, evaluations)


def select_leaf(tree: PartitionTree, cfg: SelectionConfig, total_hv: float | None = None) -> SelectionOutcome:
    """UCB argmax over leaves only, each scored against its parent's count (leftmost on ties)."""
    cp = _cp(tree, cfg, total_hv)
    best, best_id, trace = -math.inf, None, []
    for leaf_id in tree.leaves:
        leaf = tree.nodes[leaf_id]
        parent_n = leaf.n if leaf.parent is None else tree.nodes[leaf.parent].n
        hv = tree.node_hv(leaf_id)
        value = ucb(hv, leaf.n, parent_n, cp) if leaf.n else -math.inf
        trace.append((leaf_id, value))
        if value > best or best_id is None:
            best, best_id = value, leaf_id
    return SelectionOutcome(best_id, tree.path_to(best_id), trace, len(trace))


def select(tree: PartitionTree, cfg: SelectionConfig, total_hv: float | None = None) -> SelectionOutcome:
    if cfg.strategy == PATH:
        return select_path(tree, cfg, total_hv)
    return select_leaf(tree, cfg, total_hv)


def backpropagate(tree: PartitionTree, path, new_ids) -> PartitionTree:
    """Add already-archived samples ``new_ids`` to every node on ``path``.

    Counts grow and hypervolumes are recomputed on the path only. The samples
    must lie in the region of the path's leaf.
    """
    new_ids = [int(i) for i in new_ids]
    if not new_ids:
        return tree
    X = tree.archive.X[new_ids]
    if not np.all(tree.membership(path[-1], X)):
        raise ValueError("new samples fall outside the leaf region")
    for node_id in path:
        node = tree.nodes[node_id]
        node.sample_ids = list(node.sample_ids) + new_ids
        node.hv = hypervolume(tree.archive.V[node.sample_ids], tree.ref, tree.hv_config)
    return tree
