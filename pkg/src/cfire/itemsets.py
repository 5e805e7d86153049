"""Transaction databases of feature sets and closed frequent set enumeration.

Transactions are subsets of {0..d-1} with multiset semantics (duplicates are
distinct transactions). A set F is frequent at threshold tau if at least
ceil(tau * |db|) transactions contain it, and closed frequent if additionally
every proper superset is contained in strictly fewer transactions. Closed sets
compress the frequent sets losslessly: each frequent set maps to exactly one
closed set with the same supporting transactions (its closure).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class TransactionDB:
    """Sequence of feature subsets over the ground set {0..ground_size-1}."""

    transactions: tuple[frozenset[int], ...]
    ground_size: int

    def __post_init__(self):
        object.__setattr__(
            self, "transactions", tuple(frozenset(t) for t in self.transactions)
        )
        for t in self.transactions:
            if any(i < 0 or i >= self.ground_size for i in t):
                raise DataError(
                    f"transaction {sorted(t)} outside ground set of size {self.ground_size}"
                )

    def __len__(self) -> int:
        return len(self.transactions)


@dataclass(frozen=True)
class ClosedSet:
    """A closed frequent feature set together with its supporting transactions."""

    features: frozenset[int]
    support_count: int
    support_indices: tuple[int, ...]

    def __post_init__(self):
        if self.support_count != len(self.support_indices):
            raise DataError("support_count disagrees with support_indices")


def _min_count(db: TransactionDB, tau: float) -> int:
    if not 0.0 < tau <= 1.0:
        raise ConfigError(f"tau must lie in (0,1], got {tau}")
    return math.ceil(tau * len(db))


def support(db: TransactionDB, f: Iterable[int]) -> tuple[int, ...]:
    """Indices of transactions that are supersets of f, ascending.

    Duplicate transactions count separately.
    """
    fset = frozenset(f)
    if any(i < 0 or i >= db.ground_size for i in fset):
        raise DataError(f"feature set {sorted(fset)} outside ground set")
    return tuple(i for i, t in enumerate(db.transactions) if fset <= t)


def _item_masks(db: TransactionDB) -> list[int]:
    """Per-item bitmask of supporting transaction indices."""
    masks = [0] * db.ground_size
    for idx, t in enumerate(db.transactions):
        bit = 1 << idx
        for item in t:
            masks[item] |= bit
    return masks


def _mask_indices(mask: int) -> tuple[int, ...]:
    out = []
    idx = 0
    while mask:
        if mask & 1:
            out.append(idx)
        mask >>= 1
        idx += 1
    return tuple(out)


def enumerate_closed(db: TransactionDB, tau: float) -> list[ClosedSet]:
    """All closed frequent sets of db at relative threshold tau.

    Divide-and-conquer enumeration: starting from the closure of the empty
    set, each closed set P with supporting-transaction mask T is extended by
    an item i beyond its branching item; the extension survives iff the new
    support stays frequent and the closure of (T & tids[i]) adds no item
    smaller than i that P lacked (prefix test). Every closed set is reached
    exactly once, so no duplicate suppression table is needed, and the work
    per emitted set is polynomial in the database size.

    Output is sorted by support descending, then lexicographically on the
    sorted feature tuple. The empty set appears only when no item is common
    to all transactions (then it is its own closure, supported by everything).
    """
    if len(db) == 0:
        raise DataError("cannot enumerate closed sets of an empty database")
    t_min = _min_count(db, tau)
    n = len(db)
    d = db.ground_size
    item_masks = _item_masks(db)
    all_mask = (1 << n) - 1

    def closure(tids: int) -> frozenset[int]:
        return frozenset(
            i for i in range(d) if item_masks[i] & tids == tids and item_masks[i]
        )

    out: list[ClosedSet] = []

    def emit(features: frozenset[int], tids: int):
        idx = _mask_indices(tids)
        out.append(ClosedSet(features, len(idx), idx))

    def expand(p: frozenset[int], tids: int, branch_item: int):
        for i in range(branch_item + 1, d):
            if i in p:
                continue
            new_tids = tids & item_masks[i]
            if new_tids.bit_count() < t_min:
                continue
            q = closure(new_tids)
            # prefix test: extension by i may only add items >= i
            if any(j < i and j not in p for j in q):
                continue
            emit(q, new_tids)
            expand(q, new_tids, i)

    root = closure(all_mask)
    # support of the root is |db| >= ceil(tau*|db|), always frequent
    emit(root, all_mask)
    expand(root, all_mask, -1)

    out.sort(key=lambda cs: (-cs.support_count, tuple(sorted(cs.features))))
    return out


def count_frequent(db: TransactionDB, tau: float) -> int:
    """Number of non-empty frequent sets (diagnostic; exponential scan).

    Depth-first extension with support pruning; requires a small ground set.
    """
    if db.ground_size > 20:
        raise ConfigError(
            f"count_frequent is exponential; ground set {db.ground_size} > 20"
        )
    if len(db) == 0:
        raise DataError("cannot count frequent sets of an empty database")
    t_min = _min_count(db, tau)
    item_masks = _item_masks(db)
    all_mask = (1 << len(db)) - 1
    d = db.ground_size

    def count_from(tids: int, last_item: int) -> int:
        total = 0
        for i in range(last_item + 1, d):
            new_tids = tids & item_masks[i]
            if new_tids.bit_count() >= t_min:
                total += 1 + count_from(new_tids, i)
        return total

    return count_from(all_mask, -1)


def transactions_from_feature_sets(
    feature_sets: Sequence[Iterable[int]], ground_size: int
) -> TransactionDB:
    """Build the per-class transaction database from binarized attributions."""
    return TransactionDB(tuple(frozenset(s) for s in feature_sets), ground_size)


def dump_transactions(db: TransactionDB) -> str:
    """One line per transaction, space-separated ascending feature indices."""
    return "\n".join(" ".join(str(i) for i in sorted(t)) for t in db.transactions)
