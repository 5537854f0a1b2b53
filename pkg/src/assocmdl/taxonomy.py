"""Thesaurus trees, tree cuts and the partition operations on them.

A :class:`Taxonomy` is an immutable rooted tree whose leaves carry words and
whose internal nodes stand for word classes.  Nodes are identified by their
position (an ``int``); labels are for display only.

A :class:`TreeCut` is an antichain of nodes whose leaf sets partition the
leaves of the tree.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence


class TaxonomyError(ValueError):
    """Raised for malformed taxonomy input."""


class InvalidCutError(ValueError):
    """Raised when a node list is not a tree cut of the taxonomy."""


class Taxonomy:
    """A rooted, ordered tree over a word vocabulary.

    Parameters
    ----------
    labels : sequence of str
        One label per node.  Leaf labels are the words.
    parents : sequence of int or None
        Parent id of each node, ``None`` for the root.  Children keep the
        order in which they appear in this sequence.
    """

    def __init__(self, labels: Sequence[str], parents: Sequence[Optional[int]]):
        if len(labels) != len(parents):
            raise TaxonomyError("labels and parents differ in length")
        n = len(labels)
        if n == 0:
            raise TaxonomyError("empty taxonomy")
        self.labels: tuple[str, ...] = tuple(labels)
        self.parents: tuple[Optional[int], ...] = tuple(parents)

        roots = [v for v, p in enumerate(self.parents) if p is None]
        if not roots:
            raise TaxonomyError("no root node (every node has a parent, so the graph has a cycle)")
        if len(roots) > 1:
            raise TaxonomyError(
                f"multiple roots: {self._describe(roots[0])} and {self._describe(roots[1])}"
            )
        self.root: int = roots[0]

        children: list[list[int]] = [[] for _ in range(n)]
        for v, p in enumerate(self.parents):
            if p is None:
                continue
            if not isinstance(p, int) or not 0 <= p < n:
                raise TaxonomyError(f"orphan node {self._describe(v)}: parent {p!r} does not exist")
            if p == v:
                raise TaxonomyError(f"cycle at node {self._describe(v)}")
            children[p].append(v)
        self.children: tuple[tuple[int, ...], ...] = tuple(tuple(c) for c in children)

        # preorder by explicit stack; anything unreachable from the root sits on a cycle
        preorder: list[int] = []
        depth = [0] * n
        stack = [self.root]
        seen = [False] * n
        while stack:
            v = stack.pop()
            seen[v] = True
            preorder.append(v)
            for c in reversed(self.children[v]):
                depth[c] = depth[v] + 1
                stack.append(c)
        if len(preorder) != n:
            v = next(i for i in range(n) if not seen[i])
            raise TaxonomyError(f"cycle through node {self._describe(v)}")
        self.preorder: tuple[int, ...] = tuple(preorder)
        self.depth: tuple[int, ...] = tuple(depth)
        pre_index = [0] * n
        for i, v in enumerate(preorder):
            pre_index[v] = i
        self.pre_index: tuple[int, ...] = tuple(pre_index)

        size = [1] * n
        n_leaves = [0] * n
        for v in reversed(preorder):
            if not self.children[v]:
                n_leaves[v] = 1
            p = self.parents[v]
            if p is not None:
                size[p] += size[v]
                n_leaves[p] += n_leaves[v]
        self.subtree_size: tuple[int, ...] = tuple(size)
        self.n_leaves: tuple[int, ...] = tuple(n_leaves)
        self.postorder: tuple[int, ...] = tuple(_postorder(self.root, self.children))

        leaf_of: dict[str, int] = {}
        for v in preorder:
            if self.children[v]:
                continue
            word = self.labels[v]
            if word in leaf_of:
                raise TaxonomyError(f"duplicate leaf word {word!r} (nodes {leaf_of[word]} and {v})")
            leaf_of[word] = v
        self.leaf_of: dict[str, int] = leaf_of
        self._leaves: tuple[int, ...] = tuple(leaf_of.values())

    def _describe(self, v: int) -> str:
        return f"{v} ({self.labels[v]!r})"

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"Taxonomy(nodes={len(self)}, leaves={self.n_leaves[self.root]}, root={self.labels[self.root]!r})"

    @property
    def leaves(self) -> list[int]:
        """Leaf ids in left-to-right order."""
        return list(self._leaves)

    @property
    def words(self) -> list[str]:
        return [self.labels[v] for v in self.leaves]

    def is_leaf(self, v: int) -> bool:
        return not self.children[v]

    def check_node(self, v: int) -> int:
        if not isinstance(v, (int,)) or not 0 <= v < len(self.labels):
            raise KeyError(f"unknown node id {v!r}")
        return v

    def leaf(self, word: str) -> int:
        """Leaf id of ``word``; ``KeyError`` if the word is not in the tree."""
        try:
            return self.leaf_of[word]
        except KeyError:
            raise KeyError(f"word {word!r} is not a leaf of the taxonomy") from None

    def ancestors(self, v: int) -> Iterator[int]:
        """Yield ``v`` and then each of its ancestors up to the root."""
        node: Optional[int] = v
        while node is not None:
            yield node
            node = self.parents[node]

    def dominates(self, a: int, b: int) -> bool:
        """True if ``a`` is an ancestor of ``b`` or equal to it."""
        ia, ib = self.pre_index[a], self.pre_index[b]
        return ia <= ib < ia + self.subtree_size[a]

    def subtree(self, v: int) -> tuple[int, ...]:
        """All nodes under ``v`` (inclusive) in preorder."""
        i = self.pre_index[v]
        return self.preorder[i : i + self.subtree_size[v]]

    def path(self, v: int) -> list[str]:
        """Root-to-node label sequence."""
        return [self.labels[u] for u in reversed(list(self.ancestors(v)))]

    def resolve_path(self, labels: Sequence[str]) -> int:
        """Inverse of :meth:`path`.  Sibling labels must be unambiguous."""
        if not labels or labels[0] != self.labels[self.root]:
            raise KeyError(f"path {list(labels)!r} does not start at the root")
        v = self.root
        for lab in labels[1:]:
            hits = [c for c in self.children[v] if self.labels[c] == lab]
            if len(hits) != 1:
                kind = "ambiguous" if hits else "unknown"
                raise KeyError(f"{kind} path step {lab!r} under {self._describe(v)}")
            v = hits[0]
        return v

    def cut(self, members: Iterable[int]) -> "TreeCut":
        """Validated :class:`TreeCut` with members sorted left to right."""
        c = TreeCut(tuple(sorted(members, key=self.pre_index.__getitem__)))
        problem = validate_cut(self, c)
        if problem is not None:
            raise InvalidCutError(problem)
        return c

    def root_cut(self) -> "TreeCut":
        return TreeCut((self.root,))

    def leaf_cut(self) -> "TreeCut":
        return TreeCut(tuple(self.leaves))

    # -- serialization -------------------------------------------------
    def to_sexpr(self) -> str:
        def rec(v: int) -> str:
            if not self.children[v]:
                return self.labels[v] if v != self.root else f"({self.labels[v]})"
            return "(" + " ".join([self.labels[v], *(rec(c) for c in self.children[v])]) + ")"

        return rec(self.root)

    def to_dict(self) -> dict:
        def rec(v: int) -> dict:
            return {"label": self.labels[v], "children": [rec(c) for c in self.children[v]]}

        return rec(self.root)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, tree: dict) -> "Taxonomy":
        labels: list[str] = []
        parents: list[Optional[int]] = []
        stack: list[tuple[object, Optional[int]]] = [(tree, None)]
        while stack:
            node, parent = stack.pop()
            if isinstance(node, str):
                label, kids = node, []
            elif isinstance(node, dict) and isinstance(node.get("label"), str):
                label, kids = node["label"], node.get("children", [])
                if not isinstance(kids, list):
                    raise TaxonomyError(f"children of {label!r} must be a list")
            else:
                raise TaxonomyError(f"bad JSON taxonomy node: {node!r}")
            v = len(labels)
            labels.append(label)
            parents.append(parent)
            for kid in reversed(kids):
                stack.append((kid, v))
        return cls(labels, parents)


def _postorder(root: int, children: Sequence[Sequence[int]]) -> list[int]:
    out: list[int] = []
    stack: list[tuple[int, bool]] = [(root, False)]
    while stack:
        v, expanded = stack.pop()
        if expanded:
            out.append(v)
            continue
        stack.append((v, True))
        for c in reversed(children[v]):
            stack.append((c, False))
    return out


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _parse_sexpr(text: str) -> Taxonomy:
    lines = [ln for ln in text.splitlines() if not ln.lstrip().startswith(";")]
    tokens = _TOKEN.findall("\n".join(lines))
    if not tokens:
        raise TaxonomyError("empty taxonomy text")
    labels: list[str] = []
    parents: list[Optional[int]] = []
    open_nodes: list[int] = []
    expect_label = False
    top_level = 0
    for tok in tokens:
        if expect_label:
            if tok in "()":
                raise TaxonomyError("'(' must be followed by a node label")
            labels[-1] = tok
            expect_label = False
        elif tok == "(":
            parent = open_nodes[-1] if open_nodes else None
            if parent is None:
                top_level += 1
                if top_level > 1:
                    raise TaxonomyError(f"multiple roots: second top-level tree at node {len(labels)}")
            labels.append("")
            parents.append(parent)
            open_nodes.append(len(labels) - 1)
            expect_label = True
        elif tok == ")":
            if not open_nodes:
                raise TaxonomyError("unbalanced ')'")
            open_nodes.pop()
        else:
            if not open_nodes:
                raise TaxonomyError(f"bare token {tok!r} outside any tree: orphan node")
            labels.append(tok)
            parents.append(open_nodes[-1])
    if expect_label or open_nodes:
        raise TaxonomyError("unbalanced '(': missing closing parenthesis")
    return Taxonomy(labels, parents)


def parse_taxonomy(text: str) -> Taxonomy:
    """Parse taxonomy text, either s-expression or JSON ``{label, children}``.

    >>> t = parse_taxonomy("(ANIMAL (BIRD swallow crow robin) (INSECT bee bug))")
    >>> len(t), len(t.leaves)
    (8, 5)
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            tree = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise TaxonomyError(f"invalid JSON taxonomy: {exc}") from exc
        return Taxonomy.from_dict(tree)
    return _parse_sexpr(text)


def load_taxonomy(path) -> Taxonomy:
    with open(path, encoding="utf-8") as fh:
        return parse_taxonomy(fh.read())


@dataclass(frozen=True)
class TreeCut:
    """Node ids of a tree cut, normally left to right."""

    members: tuple[int, ...]

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v: object) -> bool:
        return v in self.members

    def labels(self, t: Taxonomy) -> list[str]:
        return [t.labels[v] for v in self.members]


def leaves_under(t: Taxonomy, node: int) -> set[int]:
    """Leaf ids dominated by ``node`` (the node itself if it is a leaf)."""
    t.check_node(node)
    return {v for v in t.subtree(node) if not t.children[v]}


def validate_cut(t: Taxonomy, cut: TreeCut | Sequence[int]) -> Optional[str]:
    """Return ``None`` if ``cut`` is a tree cut of ``t``, else a description
    of the first violation found."""
    members = list(cut)
    for v in members:
        t.check_node(v)
    if not members:
        return "empty cut: no leaves covered"
    member_set = set(members)
    if len(member_set) != len(members):
        dup = next(v for v in members if members.count(v) > 1)
        return f"node {t.labels[dup]!r} appears twice"
    for v in members:
        for a in t.ancestors(t.parents[v]) if t.parents[v] is not None else ():
            if a in member_set:
                return f"{t.labels[a]} dominates {t.labels[v]}"
    covered = sum(t.n_leaves[v] for v in members)
    if covered != t.n_leaves[t.root]:
        # highest node whose subtree has no member and no member above it
        has_member = [False] * len(t)
        for v in t.postorder:
            has_member[v] = v in member_set or any(has_member[c] for c in t.children[v])
        stack = [t.root]
        while stack:
            v = stack.pop()
            if v in member_set:
                continue
            if not has_member[v]:
                return f"leaves under {t.labels[v]} uncovered"
            stack.extend(reversed(t.children[v]))
    return None


def cut_owner(t: Taxonomy, cut: TreeCut) -> dict[int, int]:
    """Map every leaf id to the cut member that dominates it."""
    owner: dict[int, int] = {}
    for m in cut:
        for v in t.subtree(m):
            if not t.children[v]:
                owner[v] = m
    return owner


def meet(t: Taxonomy, a: TreeCut, b: TreeCut) -> TreeCut:
    """Coarsest cut refining both ``a`` and ``b``.

    For each leaf the result holds the deeper of the leaf's owners in ``a``
    and in ``b``.
    """
    for c in (a, b):
        problem = validate_cut(t, c)
        if problem is not None:
            raise InvalidCutError(problem)
    oa, ob = cut_owner(t, a), cut_owner(t, b)
    chosen = {oa[leaf] if t.depth[oa[leaf]] >= t.depth[ob[leaf]] else ob[leaf] for leaf in oa}
    return TreeCut(tuple(sorted(chosen, key=t.pre_index.__getitem__)))
