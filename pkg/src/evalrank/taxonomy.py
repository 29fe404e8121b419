"""Extended evaluation-condition taxonomy.

A taxonomy is a rooted tree of nine-level typed nodes.  A node may skip
intermediate levels (a Problem directly under a ProblemDomain is fine) but a
child must always sit strictly deeper than its parent.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import (
    CycleDetected,
    DanglingParent,
    DuplicateNode,
    LevelInversion,
    MissingRoot,
    MultipleRoots,
    TaxonomyError,
    UnknownNode,
)


class ECLevel(IntEnum):
    Field = 1
    ProblemDomain = 2
    SubProblemDomain = 3
    Problem = 4
    SubProblem = 5
    ProblemInstance = 6
    AlgorithmMechanism = 7
    Implementation = 8
    SupportSystem = 9

    @classmethod
    def parse(cls, name: str) -> "ECLevel":
        try:
            return cls[name]
        except KeyError:
            raise TaxonomyError(f"unknown EC level {name!r}") from None


# Levels an achievement's key problem may name.
PROBLEM_LEVELS = frozenset(
    {ECLevel.ProblemDomain, ECLevel.SubProblemDomain, ECLevel.Problem, ECLevel.SubProblem}
)


@dataclass(frozen=True)
class ECNode:
    id: str
    level: ECLevel
    label: str = ""
    parent: str | None = None


@dataclass(frozen=True)
class Taxonomy:
    nodes: Mapping[str, ECNode]
    root: str
    _children: Mapping[str, tuple[str, ...]] = field(repr=False, compare=False, default=None)

    def __post_init__(self) -> None:
        children: dict[str, list[str]] = {nid: [] for nid in self.nodes}
        for node in self.nodes.values():
            if node.parent is not None:
                children[node.parent].append(node.id)
        object.__setattr__(self, "nodes", MappingProxyType(dict(self.nodes)))
        object.__setattr__(
            self,
            "_children",
            MappingProxyType({k: tuple(sorted(v)) for k, v in children.items()}),
        )

    def __contains__(self, node_id: object) -> bool:
        return node_id in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: str) -> ECNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(f"unknown EC node {node_id!r}") from None

    def children(self, node_id: str) -> tuple[str, ...]:
        self.node(node_id)
        return self._children[node_id]

    def ancestors(self, node_id: str) -> list[str]:
        """Parent chain of ``node_id``, nearest first, excluding the node itself."""
        chain = []
        parent = self.node(node_id).parent
        while parent is not None:
            chain.append(parent)
            parent = self.nodes[parent].parent
        return chain


def validate_taxonomy(nodes: Iterable[ECNode]) -> Taxonomy:
    """Check the tree invariants and return an immutable :class:`Taxonomy`.

    Checks run in a fixed order (duplicates, dangling parents, cycles, level
    inversions, root) so a given bad input always reports the same error.
    """
    by_id: dict[str, ECNode] = {}
    for node in nodes:
        if node.id in by_id:
            raise DuplicateNode(f"duplicate EC node id {node.id!r}")
        by_id[node.id] = node
    if not by_id:
        raise MissingRoot("taxonomy has no nodes")

    for node in by_id.values():
        if node.parent is not None and node.parent not in by_id:
            raise DanglingParent(f"node {node.id!r} has unknown parent {node.parent!r}")

    # Walk each parent chain once; `done` marks nodes known to reach a root.
    done: set[str] = set()
    for start in sorted(by_id):
        path: list[str] = []
        on_path: set[str] = set()
        cur: str | None = start
        while cur is not None and cur not in done:
            if cur in on_path:
                loop = path[path.index(cur):] + [cur]
                raise CycleDetected("parent cycle: " + " -> ".join(loop))
            path.append(cur)
            on_path.add(cur)
            cur = by_id[cur].parent
        done.update(path)

    for node in sorted(by_id.values(), key=lambda n: n.id):
        if node.parent is not None and by_id[node.parent].level >= node.level:
            parent = by_id[node.parent]
            raise LevelInversion(
                f"node {node.id!r} ({node.level.name}) sits under "
                f"{parent.id!r} ({parent.level.name})"
            )

    roots = sorted(n.id for n in by_id.values() if n.parent is None)
    if len(roots) > 1:
        raise MultipleRoots("multiple root nodes: " + ", ".join(roots))
    root = by_id[roots[0]]
    if root.level != ECLevel.Field:
        raise MissingRoot(f"root {root.id!r} is a {root.level.name}, expected Field")
    return Taxonomy(by_id, root.id)


def is_ancestor(taxonomy: Taxonomy, a: str, b: str) -> bool:
    """True iff ``a`` lies strictly above ``b`` on b's parent chain."""
    taxonomy.node(a)
    return a in taxonomy.ancestors(b)


def subtree_ids(taxonomy: Taxonomy, a: str) -> frozenset[str]:
    """``a`` together with all of its descendants."""
    taxonomy.node(a)
    out = {a}
    stack = [a]
    while stack:
        for child in taxonomy._children[stack.pop()]:
            out.add(child)
            stack.append(child)
    return frozenset(out)
