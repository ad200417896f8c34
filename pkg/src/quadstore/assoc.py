"""Associative arrays: sparse 2-D maps from sorted string keys to values.

An AssocArray holds (row, col) -> value entries where keys are strings
ordered by code point (identical to byte order of their UTF-8 encodings)
and values are either text (str) or numbers (float). Every operation
returns another AssocArray, so selections, filters, element-wise
combinations, and semiring matrix products compose freely.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

AssocValue = str | float
# collision / combine functions fold two values into one
ValueFn = Callable[[AssocValue, AssocValue], AssocValue]


class AssocError(Exception):
    """Base class for associative-array errors."""


class CollisionError(AssocError):
    """A collision or combine function failed for a specific entry."""

    def __init__(self, row: str, col: str, cause: Exception):
        super().__init__(f"combining values at ({row!r}, {col!r}): {cause}")
        self.row = row
        self.col = col
        self.cause = cause


class RangeError(AssocError):
    """A selector range is malformed (lo > hi, or bounds below 1)."""


class NonNumericError(AssocError):
    """A numeric fold hit a text value and no text fold was provided."""

    def __init__(self, row: str, col: str, value: AssocValue):
        super().__init__(f"non-numeric value {value!r} at ({row!r}, {col!r})")
        self.row = row
        self.col = col


def is_number(v: AssocValue) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def add_values(a: AssocValue, b: AssocValue) -> float:
    """Strict numeric addition; raises TypeError on text operands."""
    if not (is_number(a) and is_number(b)):
        raise TypeError(f"numeric add of non-numeric values {a!r}, {b!r}")
    return float(a) + float(b)


def _default_collision(old: AssocValue, new: AssocValue) -> AssocValue:
    # numbers accumulate, anything else keeps the latest write
    if is_number(old) and is_number(new):
        return float(old) + float(new)
    return new


def _combine_union(a: AssocValue, b: AssocValue) -> AssocValue:
    if is_number(a) and is_number(b):
        return float(a) + float(b)
    if isinstance(a, str) and isinstance(b, str):
        return max(a, b)
    raise TypeError(f"cannot combine mixed variants {a!r} and {b!r}")


def _combine_intersection(a: AssocValue, b: AssocValue) -> AssocValue:
    if is_number(a) and is_number(b):
        return float(a) * float(b)
    if isinstance(a, str) and isinstance(b, str):
        return min(a, b)
    raise TypeError(f"cannot combine mixed variants {a!r} and {b!r}")


# ---------------------------------------------------------------------------
# Selectors
# ---------------------------------------------------------------------------


class Selector:
    """Picks a subset of a sorted key sequence by key or position."""

    def indices(self, keys: Sequence[str]) -> list[int]:
        raise NotImplementedError


@dataclass(frozen=True)
class AllKeys(Selector):
    def indices(self, keys: Sequence[str]) -> list[int]:
        return list(range(len(keys)))


@dataclass(frozen=True)
class ExactKeys(Selector):
    keys: tuple[str, ...]

    def __init__(self, keys: Iterable[str]):
        object.__setattr__(self, "keys", tuple(keys))

    def indices(self, keys: Sequence[str]) -> list[int]:
        wanted = set(self.keys)
        return [i for i, k in enumerate(keys) if k in wanted]


@dataclass(frozen=True)
class KeyPrefix(Selector):
    prefix: str

    def indices(self, keys: Sequence[str]) -> list[int]:
        return [i for i, k in enumerate(keys) if k.startswith(self.prefix)]


@dataclass(frozen=True)
class KeyRange(Selector):
    lo: str
    hi: str

    def indices(self, keys: Sequence[str]) -> list[int]:
        if self.lo > self.hi:
            raise RangeError(f"key range lo {self.lo!r} > hi {self.hi!r}")
        return [i for i, k in enumerate(keys) if self.lo <= k <= self.hi]


@dataclass(frozen=True)
class PositionRange(Selector):
    """1-based inclusive positions; out-of-range bounds clip, lo > hi errors."""

    start: int
    stop: int

    def indices(self, keys: Sequence[str]) -> list[int]:
        if self.start < 1 or self.stop < 1:
            raise RangeError(f"positions are 1-based, got {self.start}:{self.stop}")
        if self.start > self.stop:
            raise RangeError(f"position range {self.start} > {self.stop}")
        return list(range(self.start - 1, min(self.stop, len(keys))))


ALL = AllKeys()


def _coerce_selector(sel) -> Selector:
    if sel is None:
        return ALL
    if isinstance(sel, Selector):
        return sel
    if isinstance(sel, str):
        return ExactKeys((sel,))
    if isinstance(sel, (list, tuple, set, frozenset)):
        return ExactKeys(sorted(sel) if isinstance(sel, (set, frozenset)) else sel)
    raise TypeError(f"cannot interpret {sel!r} as a selector")


# ---------------------------------------------------------------------------
# Semirings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Semiring:
    """Add/multiply pair for matrix products; absent entries act as the
    additive identity, so only inner keys present on both sides contribute."""

    add: ValueFn
    mul: ValueFn
    name: str = ""


def _num_add(a: AssocValue, b: AssocValue) -> float:
    if not (is_number(a) and is_number(b)):
        raise TypeError(f"plus.times needs numbers, got {a!r}, {b!r}")
    return float(a) + float(b)


def _num_mul(a: AssocValue, b: AssocValue) -> float:
    if not (is_number(a) and is_number(b)):
        raise TypeError(f"plus.times needs numbers, got {a!r}, {b!r}")
    return float(a) * float(b)


def _str_max(a: AssocValue, b: AssocValue) -> AssocValue:
    if type(a) is not type(b) and not (is_number(a) and is_number(b)):
        raise TypeError(f"max.min needs same-variant values, got {a!r}, {b!r}")
    return max(a, b)  # type: ignore[type-var]


def _str_min(a: AssocValue, b: AssocValue) -> AssocValue:
    if type(a) is not type(b) and not (is_number(a) and is_number(b)):
        raise TypeError(f"max.min needs same-variant values, got {a!r}, {b!r}")
    return min(a, b)  # type: ignore[type-var]


PLUS_TIMES = Semiring(_num_add, _num_mul, "plus.times")
MAX_MIN = Semiring(_str_max, _str_min, "max.min")


# ---------------------------------------------------------------------------
# AssocArray
# ---------------------------------------------------------------------------


class AssocArray:
    """Immutable sparse 2-D array over sorted, duplicate-free string keys.

    Entries iterate in (row, col) order. Construction normalises numeric
    values to float; text values stay byte-for-byte as given.
    """

    __slots__ = ("_rows", "_cols", "_data")

    def __init__(
        self,
        rows: tuple[str, ...],
        cols: tuple[str, ...],
        data: dict[tuple[int, int], AssocValue],
    ):
        self._rows = rows
        self._cols = cols
        self._data = data

    # -- construction -------------------------------------------------------

    @classmethod
    def from_triples(
        cls,
        triples: Iterable[tuple[str, str, AssocValue]],
        collision: ValueFn | None = None,
    ) -> "AssocArray":
        """Build from (row, col, value) tuples, folding duplicate keys
        left-to-right through `collision` (default: numeric values add,
        anything else keeps the last write)."""
        fold = collision or _default_collision
        cells: dict[tuple[str, str], AssocValue] = {}
        for row, col, value in triples:
            v: AssocValue = float(value) if is_number(value) else value
            key = (row, col)
            if key in cells:
                try:
                    v = fold(cells[key], v)
                except Exception as e:
                    raise CollisionError(row, col, e) from e
                if is_number(v):
                    v = float(v)
            cells[key] = v
        return cls._from_cells(cells)

    @classmethod
    def _from_cells(cls, cells: dict[tuple[str, str], AssocValue]) -> "AssocArray":
        rows = tuple(sorted({r for r, _ in cells}))
        cols = tuple(sorted({c for _, c in cells}))
        ri = {r: i for i, r in enumerate(rows)}
        ci = {c: i for i, c in enumerate(cols)}
        data = {(ri[r], ci[c]): v for (r, c), v in cells.items()}
        return cls(rows, cols, data)

    @classmethod
    def empty(cls) -> "AssocArray":
        return cls((), (), {})

    # -- basic access --------------------------------------------------------

    @property
    def row_keys(self) -> tuple[str, ...]:
        return self._rows

    @property
    def col_keys(self) -> tuple[str, ...]:
        return self._cols

    @property
    def nnz(self) -> int:
        return len(self._data)

    @property
    def row_count(self) -> int:
        return len(self._rows)

    @property
    def col_count(self) -> int:
        return len(self._cols)

    def get(self, row: str, col: str, default=None):
        i = bisect_left(self._rows, row)
        j = bisect_left(self._cols, col)
        if i == len(self._rows) or self._rows[i] != row:
            return default
        if j == len(self._cols) or self._cols[j] != col:
            return default
        return self._data.get((i, j), default)

    def items(self) -> Iterator[tuple[str, str, AssocValue]]:
        """Entries as (row, col, value) in (row, col) order."""
        for i, j in sorted(self._data):
            yield self._rows[i], self._cols[j], self._data[(i, j)]

    def to_triples(self) -> list[tuple[str, str, AssocValue]]:
        return list(self.items())

    def __len__(self) -> int:
        return len(self._data)

    def __bool__(self) -> bool:
        return bool(self._data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AssocArray):
            return NotImplemented
        return (
            self._rows == other._rows
            and self._cols == other._cols
            and self._data == other._data
        )

    __hash__ = None  # not hashable: compared entry-wise by ==

    def __repr__(self) -> str:
        return f"AssocArray({self.row_count}x{self.col_count}, nnz={self.nnz})"

    # -- indexing ------------------------------------------------------------

    def select(self, rows=None, cols=None) -> "AssocArray":
        """Subarray of entries whose row and column keys both satisfy the
        given selectors. Keys without surviving entries are dropped, so the
        result is a well-formed AssocArray and selects compose."""
        rsel = _coerce_selector(rows)
        csel = _coerce_selector(cols)
        rkeep = set(rsel.indices(self._rows))
        ckeep = set(csel.indices(self._cols))
        cells = {
            (self._rows[i], self._cols[j]): v
            for (i, j), v in self._data.items()
            if i in rkeep and j in ckeep
        }
        return AssocArray._from_cells(cells)

    def value_filter(self, relation: str, operand: AssocValue) -> "AssocArray":
        """Keep entries whose value satisfies `relation` against `operand`.

        Numbers compare numerically, text compares bytewise; an entry whose
        variant differs from the operand's never matches.
        """
        ops: dict[str, Callable[[AssocValue, AssocValue], bool]] = {
            "==": lambda a, b: a == b,
            "<": lambda a, b: a < b,
            "<=": lambda a, b: a <= b,
            ">": lambda a, b: a > b,
            ">=": lambda a, b: a >= b,
        }
        if relation not in ops:
            raise ValueError(f"unknown relation {relation!r}")
        op = ops[relation]
        want_num = is_number(operand)
        cells = {}
        for (i, j), v in self._data.items():
            if is_number(v) != want_num:
                continue
            if op(v, float(operand) if want_num else operand):
                cells[(self._rows[i], self._cols[j])] = v
        return AssocArray._from_cells(cells)

    # -- element-wise algebra --------------------------------------------------

    def elementwise(
        self, other: "AssocArray", op: str, combine: ValueFn | None = None
    ) -> "AssocArray":
        """Combine two arrays entry by entry.

        add / or: key union; colliding entries folded by `combine`
        (default: numbers add / or takes the bytewise max).
        and: key intersection, folded by `combine` (default: numbers
        multiply / bytewise min).
        subtract: numeric entries subtract; otherwise set difference
        (entries of self whose key is absent from other), with
        other-only numeric entries negated.
        """
        mine = {(self._rows[i], self._cols[j]): v for (i, j), v in self._data.items()}
        theirs = {
            (other._rows[i], other._cols[j]): v for (i, j), v in other._data.items()
        }
        cells: dict[tuple[str, str], AssocValue] = {}
        if op in ("add", "or"):
            fold = combine or _combine_union
            cells.update(mine)
            for key, v in theirs.items():
                if key in cells:
                    try:
                        cells[key] = fold(cells[key], v)
                    except Exception as e:
                        raise CollisionError(key[0], key[1], e) from e
                else:
                    cells[key] = v
        elif op == "and":
            fold = combine or _combine_intersection
            for key, v in mine.items():
                if key in theirs:
                    try:
                        cells[key] = fold(v, theirs[key])
                    except Exception as e:
                        raise CollisionError(key[0], key[1], e) from e
        elif op == "subtract":
            for key, v in mine.items():
                if key not in theirs:
                    cells[key] = v
                elif is_number(v) and is_number(theirs[key]):
                    cells[key] = float(v) - float(theirs[key])
                # both present, not both numeric: set difference drops it
            for key, v in theirs.items():
                if key not in mine and is_number(v):
                    cells[key] = -float(v)
        else:
            raise ValueError(f"unknown elementwise op {op!r}")
        return AssocArray._from_cells(cells)

    def __add__(self, other: "AssocArray") -> "AssocArray":
        return self.elementwise(other, "add")

    def __sub__(self, other: "AssocArray") -> "AssocArray":
        return self.elementwise(other, "subtract")

    def __and__(self, other: "AssocArray") -> "AssocArray":
        return self.elementwise(other, "and")

    def __or__(self, other: "AssocArray") -> "AssocArray":
        return self.elementwise(other, "or")

    # -- semiring product ------------------------------------------------------

    def matmul(self, other: "AssocArray", semiring: Semiring = PLUS_TIMES) -> "AssocArray":
        """Semiring matrix multiply: result(r, c) folds mul(self(r, k),
        other(k, c)) with add over inner keys k present on both sides.
        Absent entries contribute nothing (the additive identity)."""
        # column-major view of self, row-major view of other
        by_col: dict[int, list[tuple[int, AssocValue]]] = {}
        for (i, j), v in self._data.items():
            by_col.setdefault(j, []).append((i, v))
        by_row: dict[int, list[tuple[int, AssocValue]]] = {}
        for (i, j), v in other._data.items():
            by_row.setdefault(i, []).append((j, v))

        their_rows = {k: i for i, k in enumerate(other._rows)}
        acc: dict[tuple[str, str], AssocValue] = {}
        for j, k in enumerate(self._cols):
            if k not in their_rows:
                continue
            rhs = by_row.get(their_rows[k])
            lhs = by_col.get(j)
            if not rhs or not lhs:
                continue
            for i, a in lhs:
                r = self._rows[i]
                for jj, b in rhs:
                    c = other._cols[jj]
                    p = semiring.mul(a, b)
                    key = (r, c)
                    if key in acc:
                        acc[key] = semiring.add(acc[key], p)
                    else:
                        acc[key] = p
        return AssocArray._from_cells(acc)

    def __matmul__(self, other: "AssocArray") -> "AssocArray":
        return self.matmul(other)

    # -- structural ops ----------------------------------------------------------

    def transpose(self) -> "AssocArray":
        data = {(j, i): v for (i, j), v in self._data.items()}
        return AssocArray(self._cols, self._rows, data)

    def sum(self, dim: int, fold: ValueFn | None = None) -> "AssocArray":
        """Collapse one dimension: dim=1 sums each column over its rows
        into a 1 x ncols array; dim=2 sums each row over its columns into
        an nrows x 1 array. The collapsed key is ''. Entries must be
        numeric unless a text `fold` is supplied."""
        if dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {dim}")
        if not self._data:
            return AssocArray.empty()
        totals: dict[str, AssocValue] = {}
        for (i, j), v in sorted(self._data.items()):
            key = self._cols[j] if dim == 1 else self._rows[i]
            if key in totals:
                if fold is not None:
                    totals[key] = fold(totals[key], v)
                elif is_number(totals[key]) and is_number(v):
                    totals[key] = float(totals[key]) + float(v)
                else:
                    raise NonNumericError(self._rows[i], self._cols[j], v)
            else:
                if not is_number(v) and fold is None:
                    raise NonNumericError(self._rows[i], self._cols[j], v)
                totals[key] = float(v) if is_number(v) else v
        if dim == 1:
            cells = {("", c): v for c, v in totals.items()}
        else:
            cells = {(r, ""): v for r, v in totals.items()}
        return AssocArray._from_cells(cells)
