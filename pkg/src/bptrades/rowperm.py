"""Orthogonal trades whose mate permutes whole rows of B_p.

A permutation sigma of Z_p with support R yields the trade that
replaces row r by row sigma(r) for r in R.  The traded square stays
orthogonal to B_p(k) exactly when the values k*r - sigma(r) are
pairwise distinct over all of Z_p; off the support these are (k-1)*r,
so the support values must hit {(k-1)*r : r in R} exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import repeat

from bptrades.core import Modulus, is_prime
from bptrades.matrices import TradeMatrix, symbol_system
from bptrades.trades import TradePair, validate_orthogonal_trade

__all__ = [
    "RowPermutation",
    "rowperm_orthogonal",
    "trade_from_rowperm",
    "rowperm_from_symbol",
    "trade_from_matrix",
    "three_row_trade",
    "sqrt_mod",
]


@dataclass(frozen=True)
class RowPermutation:
    """Permutation of Z_p as an image table; support = moved rows.

    Supports of size 1 cannot occur in a permutation and size 2 (a
    transposition) can never carry a valid trade, so both are rejected
    at construction.
    """

    p: int
    images: tuple[int, ...]
    support: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        if len(self.images) != self.p:
            raise ValueError(f"expected {self.p} images, got {len(self.images)}")
        if sorted(self.images) != list(range(self.p)):
            raise ValueError("images are not a permutation of Z_p")
        support = tuple(r for r in range(self.p) if self.images[r] != r)
        if len(support) in (1, 2):
            raise ValueError(f"support of size {len(support)} cannot carry a trade")
        object.__setattr__(self, "support", support)

    @classmethod
    def from_cycle(cls, p: int, cycle: "tuple[int, ...]") -> "RowPermutation":
        images = list(range(p))
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            images[a] = b
        return cls(p, tuple(images))

    @classmethod
    def from_map(cls, p: int, moved: dict[int, int]) -> "RowPermutation":
        images = list(range(p))
        for a, b in moved.items():
            images[a] = b
        return cls(p, tuple(images))


def rowperm_orthogonal(sigma: RowPermutation, ks: "set[int] | frozenset[int]") -> bool:
    """Whether the row-permuted square is orthogonal to B_p(k) for all k in ks."""
    p = sigma.p
    for k in ks:
        if not 2 <= k <= p - 1:
            raise ValueError(f"k={k} out of range 2..{p - 1}")
    supp = sigma.support
    for k in ks:
        vals = {(k * r - sigma.images[r]) % p for r in supp}
        target = {(k - 1) * r % p for r in supp}
        if len(vals) != len(supp) or vals != target:
            return False
    return True


def trade_from_rowperm(sigma: RowPermutation, k: int) -> TradePair:
    """The index-(1,k) trade moving each supported row r onto row sigma(r)."""
    if not sigma.support:
        raise ValueError("identity permutation carries no trade")
    if not rowperm_orthogonal(sigma, {k}):
        raise ValueError(f"row permutation is not orthogonal for k={k}")
    p = sigma.p
    # base symbols along row r are the residue ring rotated by r, mates by
    # sigma(r); zip over the doubled ring builds the tuples at C speed
    ring = list(range(p)) * 2
    cols = range(p)
    entries: list[tuple[int, int, int, int]] = []
    for r in sigma.support:
        s = sigma.images[r]
        entries.extend(zip(repeat(r), cols, ring[r : r + p], ring[s : s + p]))
    return TradePair(p, 1, k, tuple(entries))


def rowperm_from_symbol(t: TradePair, s: int) -> RowPermutation:
    """Row permutation read off a symbol of an index-(1,k) orthogonal trade.

    The phi of the symbol's linear system, extended by the identity,
    satisfies rowperm_orthogonal for the trade's own k.
    """
    sys = symbol_system(t, s)
    return RowPermutation.from_map(t.p, sys.phi)


def trade_from_matrix(A: TradeMatrix, u: tuple[int, ...], k: int, p: int) -> TradePair:
    """Rebuild a row-permutation trade from a P1-P3 matrix system.

    phi sits at the -1 entries and phi_prime at the -(k-1) entries
    (u labels the rows).  For k = 2 the two roles coincide and each row
    holds two -1 entries; the bipartite 2-regular multigraph they form
    is split into two permutations cycle by cycle, taking the least
    column edge of the least row of each cycle as phi.  A -2 entry
    would force phi = phi_prime on a row, which no trade allows.
    """
    m = A.m
    if len(u) != m or len(set(u)) != m:
        raise ValueError("u must label the rows with distinct residues")
    if any(not 0 <= x < p for x in u):
        raise ValueError(f"u entries out of range mod {p}")
    if not 2 <= k <= p - 1:
        raise ValueError(f"k={k} out of range 2..{p - 1}")

    if k == 2:
        cols: list[list[int]] = []
        for i, row in enumerate(A.entries):
            if row[i] != 2:
                raise ValueError(f"diagonal entry ({i},{i}) = {row[i]}, expected 2")
            if any(row[j] < -1 for j in range(m) if j != i):
                raise ValueError(
                    f"row {i} holds a -2; phi and phi_prime cannot coincide")
            ones = [j for j in range(m) if j != i and row[j] == -1]
            if len(ones) != 2:
                raise ValueError(f"row {i} needs exactly two -1 entries, got {ones}")
            cols.append(ones)
        rows_of: list[list[int]] = [[] for _ in range(m)]
        for i, pair in enumerate(cols):
            for j in pair:
                rows_of[j].append(i)
        if any(len(rs) != 2 for rs in rows_of):
            raise ValueError("columns must each hold exactly two -1 entries")
        # the -1 entries form a bipartite 2-regular graph; walk each cycle,
        # alternating edges between phi and phi_prime, starting from the
        # least row along its least column (fixes the orientation)
        phi_idx: dict[int, int] = {}
        for start in range(m):
            if start in phi_idx:
                continue
            i, j = start, min(cols[start])
            while True:
                phi_idx[i] = j
                i = rows_of[j][1] if rows_of[j][0] == i else rows_of[j][0]
                if i == start:
                    break
                j = cols[i][1] if cols[i][0] == j else cols[i][0]
        phi_map = {u[i]: u[j] for i, j in phi_idx.items()}
    else:
        phi_map = {}
        for i, row in enumerate(A.entries):
            if row[i] != k:
                raise ValueError(f"diagonal entry ({i},{i}) = {row[i]}, expected {k}")
            ones = [j for j in range(m) if j != i and row[j] == -1]
            big = [j for j in range(m) if j != i and row[j] == 1 - k]
            if len(ones) != 1 or len(big) != 1:
                raise ValueError(f"row {i} does not split into one -1 and one -(k-1)")
            phi_map[u[i]] = u[ones[0]]

    if sorted(phi_map.values()) != sorted(u):
        raise ValueError("phi read from the matrix is not a permutation")
    if any(v % p for v in A.apply(u)):
        raise ValueError(f"A*u != 0 mod {p}")
    return trade_from_rowperm(RowPermutation.from_map(p, phi_map), k)


def sqrt_mod(a: int, p: int) -> "int | None":
    """Least square root of a mod p, or None; Tonelli-Shanks.

    The auxiliary non-residue is the smallest one, so results are
    deterministic.
    """
    if not is_prime(p) or p == 2:
        raise ValueError(f"p={p} must be an odd prime")
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        r = pow(a, (p + 1) // 4, p)
        return min(r, p - r)
    # write p-1 = q * 2^s with q odd
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = next(x for x in range(2, p) if pow(x, (p - 1) // 2, p) == p - 1)
    c = pow(z, q, p)
    r = pow(a, (q + 1) // 2, p)
    t = pow(a, q, p)
    mm = s
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (mm - i - 1), p)
        r = r * b % p
        c = b * b % p
        t = t * c % p
        mm = i
    return min(r, p - r)


def three_row_trade(p: "int | Modulus") -> "tuple[RowPermutation, int] | None":
    """The three-cycle trade (0 -> 1 -> k -> 0), present iff p = 1 mod 6.

    k is the root of k^2 - k + 1 = 0 mod p lying in [2, (p+1)/2].
    """
    mod = p if isinstance(p, Modulus) else Modulus.of_odd(p)
    if not mod.prime:
        raise ValueError(f"p={mod.p} must be prime")
    p = mod.p
    if p % 6 != 1:
        return None
    s = sqrt_mod(-3, p)
    assert s is not None, f"-3 must be a square mod {p} when p = 1 mod 6"
    inv2 = pow(2, -1, p)
    roots = {(1 + s) * inv2 % p, (1 - s) * inv2 % p}
    k = next(r for r in roots if 2 <= r <= (p + 1) // 2)
    sigma = RowPermutation.from_cycle(p, (0, 1, k))
    assert rowperm_orthogonal(sigma, {k})
    return sigma, k
