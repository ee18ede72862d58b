"""Fixed-height prefix tree over geohashes with cached per-node entry lists.

Each node is a hash map from the next geohash character to a child node and
also carries the list of every entry stored anywhere beneath it. Retrieving
all entries sharing a prefix is therefore a walk of ``len(prefix)`` map
lookups followed by handing back that node's list; no subtree is traversed.

The root keeps a list as well and the list at depth ``h`` is the leaf data
list, so each entry is referenced ``h + 1`` times in total.

Concurrency: build with a single writer, then query from any number of
threads. Queries never mutate the tree.
"""

from __future__ import annotations

import os
from collections.abc import Hashable, Iterable, Iterator
from typing import NamedTuple

from .geohash import BASE32

MAX_HEIGHT = 12


class Entry(NamedTuple):
    record_id: Hashable
    geohash: str


class EntryView:
    """Read-only view of a node's cached list, optionally minus some ids.

    Creating a view is O(1); iteration is proportional to the bucket size.
    """

    __slots__ = ("_entries", "_exclude", "_len")

    def __init__(self, entries: list, exclude: frozenset = frozenset(), excluded_count: int = 0):
        self._entries = entries
        self._exclude = exclude
        self._len = len(entries) - excluded_count

    def __len__(self) -> int:
        return self._len

    def __iter__(self) -> Iterator[Entry]:
        if not self._exclude:
            return iter(self._entries)
        exclude = self._exclude
        return (e for e in self._entries if e.record_id not in exclude)

    def __contains__(self, item) -> bool:
        return any(e == item for e in self)

    def __bool__(self) -> bool:
        return self._len > 0

    def __repr__(self) -> str:
        return f"EntryView(len={self._len})"

    def ids(self) -> list:
        return [e.record_id for e in self]


_EMPTY_VIEW = EntryView([])


class BucketResult(NamedTuple):
    prefix: str
    depth: int
    entries: EntryView


class _Node:
    __slots__ = ("children", "entries")

    def __init__(self, leaf: bool = False):
        # leaves never get children, so they skip the dict
        self.children: dict[str, _Node] | None = None if leaf else {}
        self.entries: list[Entry] = []


class GeoTree:
    """Prefix tree of fixed ``height`` over geohash strings.

    Geohashes longer than ``height`` are truncated on insert; shorter ones
    are rejected, as are characters outside ``alphabet``. Record ids must be
    unique.

    >>> tree = GeoTree(height=6)
    >>> tree.insert("gc7j98", 1)
    >>> tree.insert("gc7j9d", 2)
    >>> tree.query_maximal("gc7j98", exclude={1}).prefix
    'gc7j9'
    """

    def __init__(self, height: int = 6, alphabet: str = BASE32):
        if isinstance(height, bool) or not isinstance(height, int) or not 1 <= height <= MAX_HEIGHT:
            raise ValueError(f"height must be an integer in 1..{MAX_HEIGHT}, got {height!r}")
        self._height = height
        self._alphabet = frozenset(alphabet)
        self._root = _Node()
        self._keys: dict[Hashable, str] = {}
        # node visits made by the most recent insert
        self.last_insert_visits = 0

    @property
    def height(self) -> int:
        return self._height

    def __len__(self) -> int:
        return len(self._keys)

    def size(self) -> int:
        return len(self._keys)

    def __contains__(self, record_id) -> bool:
        return record_id in self._keys

    def __repr__(self) -> str:
        return f"GeoTree(height={self._height}, size={len(self)})"

    def _key(self, geohash: str, min_length: int) -> str:
        if not isinstance(geohash, str) or len(geohash) < min_length:
            raise ValueError(f"geohash {geohash!r} shorter than required length {min_length}")
        key = geohash[: self._height]
        if not self._alphabet.issuperset(key):
            bad = sorted(set(key) - self._alphabet)
            raise ValueError(f"geohash {geohash!r} contains invalid characters {bad}")
        return key

    def insert(self, geohash: str, record_id: Hashable) -> None:
        key = self._key(geohash, self._height)
        if record_id in self._keys:
            raise ValueError(f"record id {record_id!r} already inserted")
        self._keys[record_id] = key
        entry = Entry(record_id, key)
        node = self._root
        node.entries.append(entry)
        last = self._height
        visits = 0
        for ch in key:
            visits += 1
            child = node.children.get(ch)
            if child is None:
                child = node.children[ch] = _Node(visits == last)
            child.entries.append(entry)
            node = child
        self.last_insert_visits = visits

    def extend(self, items: Iterable[tuple[str, Hashable]]) -> None:
        for geohash, record_id in items:
            self.insert(geohash, record_id)

    def _node_at(self, key: str) -> _Node | None:
        node = self._root
        for ch in key:
            node = node.children.get(ch)
            if node is None:
                return None
        return node

    def query_at_level(self, geohash: str, level: int) -> BucketResult:
        """Entries whose geohash shares the first ``level`` characters."""
        if isinstance(level, bool) or not isinstance(level, int) or not 1 <= level <= self._height:
            raise ValueError(f"level must be in 1..{self._height}, got {level!r}")
        prefix = self._key(geohash, level)[:level]
        node = self._node_at(prefix)
        if node is None:
            return BucketResult(prefix, level, _EMPTY_VIEW)
        return BucketResult(prefix, level, EntryView(node.entries))

    def query_maximal(self, geohash: str, exclude: Iterable[Hashable] | None = None, min_support: int = 1) -> BucketResult:
        """Deepest non-empty bucket along ``geohash``'s path.

        Entries whose ids are in ``exclude`` do not count. ``min_support``
        raises the bar from "non-empty" to "at least that many entries".
        Returns an empty bucket at depth 0 when even level 1 falls short.
        """
        if min_support < 1:
            raise ValueError(f"min_support must be >= 1, got {min_support}")
        key = self._key(geohash, self._height)
        excluded = frozenset(exclude) if exclude else frozenset()
        # shared prefix length between the query and each excluded entry
        shared = [
            len(os.path.commonprefix([key, self._keys[rid]])) for rid in excluded if rid in self._keys
        ]

        node = self._root
        depth = 0
        dropped = 0
        for d, ch in enumerate(key, 1):
            child = node.children.get(ch)
            if child is None:
                break
            n_out = sum(1 for s in shared if s >= d) if shared else 0
            if len(child.entries) - n_out < min_support:
                break
            node, depth, dropped = child, d, n_out
        if depth == 0:
            return BucketResult("", 0, _EMPTY_VIEW)
        return BucketResult(key[:depth], depth, EntryView(node.entries, excluded, dropped))

    def stored_reference_count(self) -> int:
        """Entry references held across every list in the tree."""
        total = 0
        stack = [self._root]
        while stack:
            node = stack.pop()
            total += len(node.entries)
            if node.children:
                stack.extend(node.children.values())
        return total

    def level_lists(self, level: int) -> dict[str, list[Entry]]:
        """Map each depth-``level`` prefix present in the tree to its list."""
        if not 0 <= level <= self._height:
            raise ValueError(f"level must be in 0..{self._height}, got {level!r}")
        frontier = {"": self._root}
        for _ in range(level):
            frontier = {p + ch: child for p, node in frontier.items() for ch, child in node.children.items()}
        return {p: list(node.entries) for p, node in frontier.items()}
