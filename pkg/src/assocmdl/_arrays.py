"""Array views of a taxonomy for the linear-time bottom-up searches.

Nodes are grouped by depth.  Each level keeps, for every node, the position
of its parent within the level above, so a sum over children is one
``bincount`` per level and a full pass over the tree costs O(nodes).
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .taxonomy import Taxonomy


class TreeArrays:
    def __init__(self, t: Taxonomy):
        n = len(t)
        self.n = n
        self.pre = np.asarray(t.pre_index, dtype=np.int64)
        self.end = self.pre + np.asarray(t.subtree_size, dtype=np.int64)
        self.n_leaves = np.asarray(t.n_leaves, dtype=np.float64)
        self.is_leaf = np.array([not c for c in t.children], dtype=bool)
        depth = np.asarray(t.depth, dtype=np.int64)
        # nodes of each level in preorder, so a level is left to right
        by_pre = np.asarray(t.preorder, dtype=np.int64)
        order = by_pre[np.argsort(depth[by_pre], kind="stable")]
        bounds = np.searchsorted(depth[order], np.arange(depth.max() + 2))
        self.levels = [order[bounds[d]:bounds[d + 1]] for d in range(len(bounds) - 1)]
        local = np.empty(n, dtype=np.int64)
        for nodes in self.levels:
            local[nodes] = np.arange(len(nodes))
        parent = np.array([-1 if p is None else p for p in t.parents], dtype=np.int64)
        self.up = [None] + [local[parent[nodes]] for nodes in self.levels[1:]]

    def children_sum(self, d: int, values_d: np.ndarray) -> np.ndarray:
        """Sum of level-``d`` values over the children of each level ``d-1`` node."""
        return np.bincount(self.up[d], weights=values_d, minlength=len(self.levels[d - 1]))


def tree_arrays(t: Taxonomy) -> TreeArrays:
    ta = t.__dict__.get("_tree_arrays")
    if ta is None:
        ta = t.__dict__["_tree_arrays"] = TreeArrays(t)
    return ta


def subtree_totals(t: Taxonomy, counts: Mapping[str, int]) -> np.ndarray:
    """Class count of every node (int64), words outside ``t`` ignored."""
    ta = tree_arrays(t)
    leaf_of = t.leaf_of
    ids, vals = [], []
    for w, c in counts.items():
        v = leaf_of.get(w)
        if v is not None and c:
            ids.append(v)
            vals.append(c)
    by_pre = np.zeros(ta.n + 1, dtype=np.int64)
    if ids:
        np.add.at(by_pre, ta.pre[np.asarray(ids, dtype=np.int64)] + 1, np.asarray(vals, dtype=np.int64))
    prefix = np.cumsum(by_pre)
    return prefix[ta.end] - prefix[ta.pre]


def class_masses(t: Taxonomy, members: Sequence[int], q: Sequence[float]) -> np.ndarray:
    """Probability of every node's class under a tree cut model.

    A member keeps its own mass, a node below it gets a share proportional
    to its leaf count, a node above the cut sums its children.
    """
    ta = tree_arrays(t)
    owner = np.full(ta.n, -1, dtype=np.int64)
    mass = np.zeros(ta.n)
    members = np.asarray(members, dtype=np.int64)
    owner[members] = members
    mass[members] = np.asarray(q, dtype=np.float64)
    for d in range(1, len(ta.levels)):
        nodes = ta.levels[d]
        parent_owner = owner[ta.levels[d - 1]][ta.up[d]]
        inherit = (owner[nodes] < 0) & (parent_owner >= 0)
        kids, own = nodes[inherit], parent_owner[inherit]
        owner[kids] = own
        mass[kids] = ta.n_leaves[kids] / ta.n_leaves[own] * mass[own]
    for d in range(len(ta.levels) - 1, 0, -1):
        above = ta.levels[d - 1]
        free = owner[above] < 0
        if free.any():
            sums = ta.children_sum(d, mass[ta.levels[d]])
            mass[above[free]] = sums[free]
    return mass


def best_cut(t: Taxonomy, own: np.ndarray) -> tuple[tuple[int, ...], np.ndarray]:
    """Bottom-up choice between each node's own cost and the best cut below.

    A node keeps its own class only when that is strictly cheaper; ties
    keep the finer cut.  Returns the cut members in preorder and the best
    cost of every node.
    """
    ta = tree_arrays(t)
    best = own.astype(np.float64, copy=True)
    collapse = ta.is_leaf.copy()
    for d in range(len(ta.levels) - 1, 0, -1):
        above = ta.levels[d - 1]
        below = ta.children_sum(d, best[ta.levels[d]])
        inner = ~ta.is_leaf[above]
        nodes, b = above[inner], below[inner]
        keep = own[nodes] < b
        collapse[nodes] = keep
        best[nodes] = np.where(keep, own[nodes], b)
    # a member is a collapsed node with no collapsed proper ancestor
    blocked = np.zeros(ta.n, dtype=bool)
    for d in range(1, len(ta.levels)):
        par = ta.levels[d - 1][ta.up[d]]
        blocked[ta.levels[d]] = blocked[par] | collapse[par]
    members = np.flatnonzero(collapse & ~blocked)
    members = members[np.argsort(ta.pre[members])]
    return tuple(int(v) for v in members), best
