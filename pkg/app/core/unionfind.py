from typing import Dict, Hashable, Iterable, List


class UnionFind:
    """Disjoint sets over hashable items, with path compression and union by size"""

    def __init__(self, items: Iterable[Hashable] = ()):
        self.parent: Dict[Hashable, Hashable] = {}
        self.size: Dict[Hashable, int] = {}
        for x in items:
            self.add(x)

    def add(self, x: Hashable) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1

    def find(self, x: Hashable) -> Hashable:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        # collapse the chain
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: Hashable, y: Hashable) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        return True

    def groups(self) -> List[List[Hashable]]:
        """Classes as sorted lists, ordered by their smallest member"""
        classes: Dict[Hashable, List[Hashable]] = {}
        for x in self.parent:
            classes.setdefault(self.find(x), []).append(x)
        return sorted((sorted(members) for members in classes.values()), key=lambda m: m[0])
