"""Explicit orthogonal-trade family of size 3k(k-1) for p = 1 mod 6.

k solves k^2 - k + 1 = 0 mod p, normalized into [2, (p+1)/2].  The
trade occupies row 0 plus the row pairs i(k-1), i(k-1)+1 for
1 <= i <= k-1; its mate is given by six explicit column-range tables.
Applying the trade plants an intercalate (a 2x2 subsquare) into the
traded square, something no cyclic square of odd order contains.
"""

from __future__ import annotations

from dataclasses import dataclass

from bptrades.core import Modulus, are_orthogonal, gen_bp
from bptrades.rowperm import sqrt_mod
from bptrades.trades import TradePair, apply_trade, validate_orthogonal_trade

__all__ = ["FamilyWitness", "find_k", "construct", "intercalate_witness"]


@dataclass(frozen=True)
class FamilyWitness:
    p: int
    k: int
    trade: TradePair
    intercalate: tuple[tuple[int, int, int], ...]


def find_k(p: "int | Modulus") -> int:
    """The root of k^2 - k + 1 = 0 mod p lying in [2, (p+1)/2].

    Roots come in pairs k, 1-k, so exactly one representative lands in
    the range; it exists iff p = 1 mod 6.
    """
    mod = p if isinstance(p, Modulus) else Modulus.of_odd(p)
    if not mod.prime:
        raise ValueError(f"p={mod.p} must be prime")
    p = mod.p
    if p % 6 != 1:
        raise ValueError(f"p={p} is not 1 mod 6; no k with k^2-k+1 = 0 exists")
    s = sqrt_mod(-3, p)
    assert s is not None
    inv2 = pow(2, -1, p)
    k = next(r for r in ((1 + s) * inv2 % p, (1 - s) * inv2 % p)
             if 2 <= r <= (p + 1) // 2)
    assert (k * k - k + 1) % p == 0
    return k


def construct(p: "int | Modulus") -> FamilyWitness:
    """Build the size-3k(k-1) orthogonal trade of index (1, k).

    Cell sets follow the displayed unions verbatim; ranges that come
    out empty (the first mate set at i = k-1, the last at i = 0) are
    handled by ordinary range emptiness.
    """
    k = find_k(p)
    p = p.p if isinstance(p, Modulus) else p
    base: dict[tuple[int, int], int] = {}
    mate: dict[tuple[int, int], int] = {}

    for j in range(0, k - 1):
        base[0, j] = j
        base[0, k + j] = (k + j) % p
        mate[0, j] = (k + j) % p
        mate[0, k + j] = j

    for i in range(1, k):
        r0 = i * (k - 1) % p
        r1 = (i * (k - 1) + 1) % p
        for j in range(i, 2 * (k - 1) + 1):
            base[r0, j] = (i * (k - 1) + j) % p
        for j in range(0, k + i - 1):
            base[r1, j] = (i * (k - 1) + j + 1) % p
        # row i(k-1) of the mate, three column ranges
        for j in range(i, k - 1):
            mate[r0, j] = (i * (k - 1) + j + k) % p
        for j in range(k - 1, k + i - 1):
            mate[r0, j] = (i * (k - 1) + j + 1) % p
        for j in range(k + i - 1, 2 * (k - 1) + 1):
            mate[r0, j] = ((i - 1) * (k - 1) + j) % p
        # row i(k-1)+1 of the mate, three column ranges
        for j in range(0, i):
            mate[r1, j] = (i * (k - 1) + j + k) % p
        for j in range(i, k):
            mate[r1, j] = (i * (k - 1) + j) % p
        for j in range(k, k + i - 1):
            mate[r1, j] = (i * (k - 1) + j - k + 1) % p

    if set(base) != set(mate):
        raise ValueError("base and mate cell sets differ; construction bug")
    trade = TradePair(p, 1, k, tuple(
        (r, c, base[r, c], mate[r, c]) for r, c in sorted(base)))
    if trade.size != 3 * k * (k - 1):
        raise ValueError(f"size {trade.size} != 3k(k-1) = {3 * k * (k - 1)}")
    report = validate_orthogonal_trade(trade)
    if not report.is_orthogonal_trade:
        raise ValueError(f"constructed trade invalid: {report.failures[:3]}")
    intercalate = (
        ((k - 1) % p, 1, 2 * k % p),
        ((k - 1) % p, k, k),
        (k % p, 1, k),
        (k % p, k, 2 * k % p),
    )
    return FamilyWitness(p=p, k=k, trade=trade, intercalate=intercalate)


def intercalate_witness(w: FamilyWitness) -> tuple[tuple[int, int, int], ...]:
    """Check the 2x2 subsquare the trade plants and return its triples.

    The four cells (k-1,1), (k-1,k), (k,1), (k,k) of the traded square
    must hold 2k, k, k, 2k; the traded square must also stay orthogonal
    to B_p(k).
    """
    applied = apply_trade(w.trade)
    for r, c, s in w.intercalate:
        if applied[r, c] != s:
            raise ValueError(
                f"cell ({r},{c}) holds {applied[r, c]}, expected {s}")
    (r1, c1, s1), (_, c2, s2), (r2, _, _), _ = w.intercalate
    if not (s1 != s2 and applied[r1, c1] == applied[r2, c2] == s1
            and applied[r1, c2] == applied[r2, c1] == s2):
        raise ValueError("witness cells do not form an intercalate")
    if not are_orthogonal(applied, gen_bp(w.p, w.k)):
        raise ValueError("traded square lost orthogonality")
    return w.intercalate
