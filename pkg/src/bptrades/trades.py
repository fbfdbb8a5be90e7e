"""Latin trades and orthogonal trades in B_p(ell).

A trade pairs a cell set T of B_p(ell) with a disjoint mate T' on the
same cells.  Swapping T for T' must leave a Latin square; an orthogonal
trade of index (ell, k) additionally keeps the result orthogonal to
B_p(k).  Validation is local: row/column mate-vs-base multiset balance
decides the Latin property, and the superimposed pair test against
B_p(k) reduces to an O(size) set comparison because the untouched cells
already realize every ordered pair exactly once.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from bptrades.core import LatinSquare, gen_bp

__all__ = [
    "TradePair",
    "ValidationReport",
    "validate_latin_trade",
    "validate_orthogonal_trade",
    "apply_trade",
    "difference_trade",
    "canonicalize",
]

Entry = tuple[int, int, int, int]


@dataclass(frozen=True)
class TradePair:
    """A trade T/T' with index (ell, k); entries are (row, col, base, mate).

    Construction checks well-formedness only (residue ranges, unit ell
    and k, distinct cells) and normalizes entry order to row-major.
    Whether the entries actually form a Latin or orthogonal trade is
    decided by the validators, so partial or broken inputs can still be
    represented and reported on.  ``k`` is None when the orthogonality
    index is unknown (e.g. for a plain difference of squares).
    """

    p: int
    ell: int
    k: "int | None"
    entries: tuple[Entry, ...]

    def __post_init__(self) -> None:
        p = self.p
        if p < 3 or p % 2 == 0:
            raise ValueError(f"p={p} must be odd and at least 3")
        if not (1 <= self.ell < p and math.gcd(self.ell, p) == 1):
            raise ValueError(f"ell={self.ell} is not a unit mod {p}")
        if self.k is not None and not (1 <= self.k < p and math.gcd(self.k, p) == 1):
            raise ValueError(f"k={self.k} is not a unit mod {p}")
        # the clean-tuple fast path keeps bulk construction (row-permutation
        # trades run to hundreds of thousands of entries) off the coercion code
        entries = []
        for e in self.entries:
            if type(e) is tuple and len(e) == 4:
                r, c, b, m = e
                if (
                    type(r) is int is type(c) is type(b) is type(m)
                    and 0 <= r < p
                    and 0 <= c < p
                    and 0 <= b < p
                    and 0 <= m < p
                ):
                    entries.append(e)
                    continue
            e = tuple(int(x) for x in e)
            if len(e) != 4:
                raise ValueError(f"entry {e} is not (row, col, base, mate)")
            if any(not 0 <= x < p for x in e):
                raise ValueError(f"entry {e} has residues out of range mod {p}")
            entries.append(e)
        cells = [(r, c) for r, c, _, _ in entries]
        if len(set(cells)) != len(cells):
            dup = [rc for rc, n in Counter(cells).items() if n > 1][0]
            raise ValueError(f"duplicate cell {dup}")
        object.__setattr__(self, "entries", tuple(sorted(entries)))

    @property
    def size(self) -> int:
        return len(self.entries)

    def rows_used(self) -> tuple[int, ...]:
        return tuple(sorted({r for r, _, _, _ in self.entries}))

    def to_json(self, pretty: bool = False) -> str:
        obj = {
            "p": self.p,
            "ell": self.ell,
            "k": self.k,
            "entries": [list(e) for e in self.entries],
        }
        if pretty:
            return json.dumps(obj, indent=2) + "\n"
        return json.dumps(obj)

    @classmethod
    def from_json(cls, text: str) -> "TradePair":
        obj = json.loads(text)
        k = obj.get("k")
        return cls(
            int(obj["p"]),
            int(obj["ell"]),
            None if k is None else int(k),
            tuple(tuple(int(x) for x in e) for e in obj["entries"]),
        )


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of trade validation.

    ``failures`` holds (code, location) pairs; codes are prefixed
    ``latin:`` or ``orth:``.  ``is_orthogonal_trade`` is meaningful only
    when ``orthogonality_checked`` is set (validate_latin_trade leaves
    it unset and the flag false).
    """

    is_latin_trade: bool
    is_orthogonal_trade: bool
    orthogonality_checked: bool
    size: int
    failures: tuple[tuple[str, str], ...]
    symbol_histogram: dict[int, int] = field(compare=False)

    def __bool__(self) -> bool:
        return self.is_latin_trade and (
            self.is_orthogonal_trade or not self.orthogonality_checked
        )


def _entry_arrays(t: TradePair) -> np.ndarray:
    a = np.asarray(t.entries, dtype=np.int64)
    return a.reshape(-1, 4)


def _latin_failures(t: TradePair, a: np.ndarray) -> list[tuple[str, str]]:
    failures: list[tuple[str, str]] = []
    if len(a) == 0:
        return failures
    r, c, base, mate = a[:, 0], a[:, 1], a[:, 2], a[:, 3]
    p = t.p

    wrong = np.nonzero(base != (t.ell * r + c) % p)[0]
    failures += [
        ("latin:base", f"cell ({a[i, 0]}, {a[i, 1]}): base {a[i, 2]} is not "
                       f"{t.ell}*{a[i, 0]}+{a[i, 1]} mod {p}")
        for i in wrong
    ]
    clash = np.nonzero(mate == base)[0]
    failures += [
        ("latin:disjoint", f"cell ({a[i, 0]}, {a[i, 1]}): mate equals base {a[i, 2]}")
        for i in clash
    ]

    # per line, the mate multiset must equal the base multiset; compare
    # lexicographically sorted (line, symbol) arrays
    for code, line in (("latin:row_balance", r), ("latin:col_balance", c)):
        b_sorted = np.sort(line * p + base)
        m_sorted = np.sort(line * p + mate)
        bad = b_sorted != m_sorted
        if bad.any():
            lines = sorted(set((b_sorted[bad] // p).tolist())
                           | set((m_sorted[bad] // p).tolist()))
            failures += [(code, f"line {ln}: mate symbols do not rearrange base "
                                f"symbols") for ln in lines]
    return failures


def _orthogonality_failures(t: TradePair, a: np.ndarray) -> list[tuple[str, str]]:
    failures: list[tuple[str, str]] = []
    if len(a) == 0:
        return failures
    assert t.k is not None
    r, c, base, mate = a[:, 0], a[:, 1], a[:, 2], a[:, 3]
    p = t.p
    aux = (t.k * r + c) % p
    new_pairs = mate * p + aux
    old_pairs = base * p + aux
    uniq, counts = np.unique(new_pairs, return_counts=True)
    for v in uniq[counts > 1]:
        failures.append(("orth:pair_collision",
                         f"pair (mate {v // p}, aux {v % p}) occurs "
                         f"{counts[uniq == v][0]} times"))
    # every pair the trade introduces must be one the trade removed,
    # otherwise it collides with an untouched cell of the superposition
    extra = np.setdiff1d(new_pairs, old_pairs)
    for v in extra:
        failures.append(("orth:pair_foreign",
                         f"pair (mate {v // p}, aux {v % p}) survives elsewhere "
                         f"in the superposition"))
    return failures


def _histogram(a: np.ndarray) -> dict[int, int]:
    if len(a) == 0:
        return {}
    vals, counts = np.unique(a[:, 2], return_counts=True)
    return {int(v): int(n) for v, n in zip(vals, counts)}


def validate_latin_trade(t: TradePair) -> ValidationReport:
    """Check that swapping T for T' leaves a Latin square.

    Violations are collected, not thrown: the report lists every cell
    with a wrong base symbol or a mate equal to its base, and every row
    or column whose mate multiset differs from its base multiset.
    """
    a = _entry_arrays(t)
    failures = _latin_failures(t, a)
    return ValidationReport(
        is_latin_trade=not failures,
        is_orthogonal_trade=False,
        orthogonality_checked=False,
        size=t.size,
        failures=tuple(failures),
        symbol_histogram=_histogram(a),
    )


def validate_orthogonal_trade(t: TradePair) -> ValidationReport:
    """Check the Latin property and orthogonality to B_p(k) after the swap.

    Requires k set (empty trades pass with k unset) and k distinct from
    ell with k - ell a unit mod p; under that condition the superimposed
    squares realize every ordered pair once, so the traded square stays
    orthogonal iff the introduced (mate, B_p(k)) pairs are distinct and
    are exactly the removed (base, B_p(k)) pairs.
    """
    if t.size == 0:
        return ValidationReport(True, True, True, 0, (), {})
    if t.k is None:
        raise ValueError("orthogonality index k is not set")
    if t.k == t.ell:
        raise ValueError(f"index k={t.k} equals ell; no orthogonal mate to preserve")
    if math.gcd(t.k - t.ell, t.p) != 1:
        raise ValueError(
            f"k-ell={t.k - t.ell} is not a unit mod {t.p}; "
            f"B_{t.p}({t.ell}) and B_{t.p}({t.k}) are not orthogonal")
    a = _entry_arrays(t)
    latin = _latin_failures(t, a)
    orth = _orthogonality_failures(t, a) if not latin else []
    failures = latin + orth
    return ValidationReport(
        is_latin_trade=not latin,
        is_orthogonal_trade=not failures,
        orthogonality_checked=True,
        size=t.size,
        failures=tuple(failures),
        symbol_histogram=_histogram(a),
    )


def apply_trade(t: TradePair) -> LatinSquare:
    """Return B_p(ell) with mate symbols substituted on the trade cells."""
    report = validate_latin_trade(t)
    if not report.is_latin_trade:
        raise ValueError(f"not a Latin trade: {report.failures[:3]}")
    cells = np.array(gen_bp(t.p, t.ell).cells)
    for r, c, _, mate in t.entries:
        cells[r, c] = mate
    return LatinSquare(cells)


def difference_trade(L: LatinSquare, M: LatinSquare) -> TradePair:
    """The trade turning L into M; L must be labeled B_p(ell).

    The orthogonality index of the result is unknown, so k is None.
    """
    if L.label is None:
        raise ValueError("left square carries no (p, ell) label")
    if L.order != M.order:
        raise ValueError(f"order mismatch: {L.order} vs {M.order}")
    p, ell = L.label
    diff = np.nonzero(L.cells != M.cells)
    entries = tuple(
        (int(r), int(c), int(L.cells[r, c]), int(M.cells[r, c]))
        for r, c in zip(*diff)
    )
    return TradePair(p, ell, None, entries)


def _scaled(t: TradePair) -> TradePair:
    # (r, c, base, mate) -> (r, c/ell, base/ell, mate/ell) moves the trade
    # into B_p(1); the index k follows as k/ell
    if t.ell == 1:
        return t
    inv = pow(t.ell, -1, t.p)
    assert t.k is not None
    return TradePair(
        t.p, 1, t.k * inv % t.p,
        tuple((r, c * inv % t.p, b * inv % t.p, m * inv % t.p)
              for r, c, b, m in t.entries),
    )


def _transposed(t: TradePair) -> TradePair:
    # transposing the applied square fixes B_p(1) and swaps the index k
    # for its inverse, via k^-1 * (k*r + c) = k^-1 * c + r
    assert t.ell == 1 and t.k is not None
    return TradePair(
        t.p, 1, pow(t.k, -1, t.p),
        tuple((c, r, b, m) for r, c, b, m in t.entries),
    )


def _translated(t: TradePair) -> TradePair:
    # shift rows by -r0 and columns by -c0 so the least cell is (0, 0);
    # symbols absorb both shifts, keeping the trade inside B_p(1) and
    # translating the superimposed pairs coordinate-wise
    if not t.entries:
        return t
    p = t.p
    r0, c0 = min((r, c) for r, c, _, _ in t.entries)
    if (r0, c0) == (0, 0):
        return t
    s = r0 + c0
    return TradePair(
        t.p, 1, t.k,
        tuple(((r - r0) % p, (c - c0) % p, (b - s) % p, (m - s) % p)
              for r, c, b, m in t.entries),
    )


def canonicalize(t: TradePair) -> TradePair:
    """Normalize an orthogonal trade to index (1, K), K = min(k', 1/k').

    Steps: scale columns and symbols by 1/ell; transpose when the index
    exceeds its inverse; translate so cell (0, 0) with base symbol 0 is
    present.  Idempotent and size-preserving; input and output are both
    re-validated.
    """
    report = validate_orthogonal_trade(t)
    if not report.is_orthogonal_trade:
        raise ValueError(f"input is not an orthogonal trade: {report.failures[:3]}")
    if t.size == 0:
        return t
    out = _scaled(t)
    assert out.k is not None
    if out.k > pow(out.k, -1, out.p):
        out = _transposed(out)
    out = _translated(out)
    check = validate_orthogonal_trade(out)
    if not check.is_orthogonal_trade:
        raise ValueError(f"canonical form failed re-validation: {check.failures[:3]}")
    return out
