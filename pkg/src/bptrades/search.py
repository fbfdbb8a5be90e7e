"""Exhaustive searches: trade-size spectra, row-permutation support sets,
transversal and orthomorphism enumeration.

A Latin square orthogonal to B_p(k) is the same thing as a labeling of a
partition of the p x p grid into p disjoint transversals of B_p(k).  The
spectrum search therefore enumerates such partitions as exact covers by
transversal bitmasks, and factors the p! symbol labelings into a
subset-sum dynamic program over per-transversal agreement vectors
(agreement of transversal tau with label s = number of cells (r, c) of
tau with r + c = s).  The trade size is p^2 minus the total agreement.

Row-permutation searches and orthomorphism scans cut the space by the
affine conjugation symmetry, which preserves support sizes and per-k
orthogonality; sets of achievable values are unaffected.
"""

from __future__ import annotations

import itertools
import os
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import gcd, log2

from bptrades.core import LatinSquare, Modulus, Orthomorphism, Transversal, gen_bp
from bptrades.rowperm import RowPermutation, rowperm_orthogonal
from bptrades.trades import TradePair, validate_orthogonal_trade

__all__ = [
    "TRANSVERSAL_CAP",
    "SpectrumResult",
    "RowPermSearchResult",
    "enumerate_transversals",
    "count_transversals",
    "diagonal_histogram",
    "admissible_mates",
    "spectrum",
    "spectrum_all",
    "rowperm_sizes",
    "enumerate_orthomorphisms",
    "min_distance_from_linear",
]

TRANSVERSAL_CAP = 13


class BudgetExpired(Exception):
    """Internal signal: the search deadline passed; partial results stand."""


def _default_threads() -> int:
    return max(1, int(os.environ.get("MOLS_THREADS", "1")))


def _deadline(budget: "float | None") -> "float | None":
    return None if budget is None else time.monotonic() + budget


# -- transversals ----------------------------------------------------------------


def _check_cap(order: int, force: bool) -> None:
    if order > TRANSVERSAL_CAP and not force:
        raise ValueError(
            f"order {order} above the exhaustive cap {TRANSVERSAL_CAP};"
            " pass force=True to override"
        )


def enumerate_transversals(L: LatinSquare, force: bool = False):
    """Yield every transversal of L exactly once, lexicographic by the
    column chosen in each row."""
    _check_cap(L.order, force)
    p = L.order
    grid = [L.row(r) for r in range(p)]
    cols = [0] * p

    def rec(r: int, used_c: int, used_s: int):
        if r == p:
            yield Transversal(p, tuple((i, cols[i]) for i in range(p)))
            return
        row = grid[r]
        for c in range(p):
            bit = 1 << c
            if used_c & bit:
                continue
            sbit = 1 << row[c]
            if used_s & sbit:
                continue
            cols[r] = c
            yield from rec(r + 1, used_c | bit, used_s | sbit)

    yield from rec(0, 0, 0)


def count_transversals(L: LatinSquare, force: bool = False) -> int:
    """Number of transversals of L, without materializing them."""
    _check_cap(L.order, force)
    p = L.order
    grid = [L.row(r) for r in range(p)]

    def rec(r: int, used_c: int, used_s: int) -> int:
        if r == p:
            return 1
        row = grid[r]
        total = 0
        for c in range(p):
            bit = 1 << c
            if used_c & bit:
                continue
            sbit = 1 << row[c]
            if used_s & sbit:
                continue
            total += rec(r + 1, used_c | bit, used_s | sbit)
        return total

    return rec(0, 0, 0)


def diagonal_histogram(p: "int | Modulus", force: bool = False) -> dict[int, int]:
    """Histogram of diagonal-hit counts over all transversals of B_p(1).

    Exploits the column-shift symmetry: transversals with column 0 in row
    0 represent each shift orbit once, and the p shifts of a
    representative hit the diagonal delta(v) times for each residue v,
    where delta(v) counts rows with c_r - r = v.  Checks that the only
    keys are p itself or values at most p - log2(p) - 1.
    """
    mod = p if isinstance(p, Modulus) else Modulus.of_odd(p)
    if not mod.prime:
        raise ValueError(f"p={mod.p} must be prime")
    p = mod.p
    _check_cap(p, force)
    hist: Counter = Counter()
    delta = [0] * p
    # row 0 pinned to column 0; symbol 0 used
    def rec(r: int, used_c: int, used_s: int):
        if r == p:
            for v in range(p):
                hist[delta[v]] += 1
            return
        for c in range(p):
            bit = 1 << c
            if used_c & bit:
                continue
            sbit = 1 << ((r + c) % p)
            if used_s & sbit:
                continue
            v = (c - r) % p
            delta[v] += 1
            rec(r + 1, used_c | bit, used_s | sbit)
            delta[v] -= 1

    delta[0] = 1
    rec(1, 1, 1)
    delta[0] = 0
    cutoff = p - log2(p) - 1
    bad = [key for key in hist if key != p and key > cutoff]
    if bad:
        raise AssertionError(f"diagonal-hit keys {bad} violate the gap bound")
    return dict(sorted(hist.items()))


# -- spectra ---------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumResult:
    """Achievable orthogonal-trade sizes, with one certificate per size.

    ``per_k`` maps each admissible k to the sizes found for index (1, k);
    ``via_duality`` lists the k whose entry was copied from its inverse
    via transposition.  ``exhaustive`` is True only when every cover
    enumeration ran to completion.
    """

    p: int
    per_k: dict[int, frozenset]
    sizes: frozenset
    certificates: dict[int, TradePair] = field(repr=False)
    exhaustive: bool = True
    budget_used: float = 0.0
    via_duality: tuple[int, ...] = ()


def admissible_mates(p: int) -> tuple[int, ...]:
    """The k in 2..p-1 with B_p(k) Latin and orthogonal to B_p(1)."""
    return tuple(
        k for k in range(2, p) if gcd(k, p) == 1 and gcd(k - 1, p) == 1
    )


def _mask_cells(p: int, mask: int) -> list[tuple[int, int]]:
    cells = []
    while mask:
        low = mask & -mask
        cells.append(divmod(low.bit_length() - 1, p))
        mask ^= low
    return cells


def _cells_mask(p: int, cells) -> int:
    m = 0
    for r, c in cells:
        m |= 1 << (r * p + c)
    return m


def _root_representatives(p: int, k: int, masks: list[int]) -> list[int]:
    """One root index per orbit of transversals under the maps that fix
    the search problem: translations, unit scalings, and the transpose
    when k is self-inverse.

    Achievable size sets are invariant under these maps, so every
    partition orbit is reached from some representative through (0, 0);
    restricting the first branch this way only drops repeats.
    """
    units = [a for a in range(2, p) if gcd(a, p) == 1]
    transpose = pow(k, 2, p) == 1
    index = {m: i for i, m in enumerate(masks)}
    seen = [False] * len(masks)
    reps = []
    for start in range(len(masks)):
        if seen[start]:
            continue
        orbit = {masks[start]}
        frontier = [masks[start]]
        while frontier:
            m = frontier.pop()
            cells = _mask_cells(p, m)
            images = [
                _cells_mask(p, (((r + 1) % p, c) for r, c in cells)),
                _cells_mask(p, ((r, (c + 1) % p) for r, c in cells)),
            ]
            images += [
                _cells_mask(p, ((a * r % p, a * c % p) for r, c in cells))
                for a in units
            ]
            if transpose:
                images.append(_cells_mask(p, ((c, r) for r, c in cells)))
            for im in images:
                if im not in orbit:
                    orbit.add(im)
                    frontier.append(im)
        for m in orbit:
            seen[index[m]] = True
        reps.append(index[min(m for m in orbit if m & 1)])
    return reps


def _transversal_masks(L: LatinSquare) -> list[int]:
    p = L.order
    grid = [L.row(r) for r in range(p)]
    masks: list[int] = []
    cols = [0] * p

    def rec(r: int, used_c: int, used_s: int):
        if r == p:
            m = 0
            for i in range(p):
                m |= 1 << (i * p + cols[i])
            masks.append(m)
            return
        row = grid[r]
        for c in range(p):
            bit = 1 << c
            if used_c & bit:
                continue
            sbit = 1 << row[c]
            if used_s & sbit:
                continue
            cols[r] = c
            rec(r + 1, used_c | bit, used_s | sbit)

    rec(0, 0, 0)
    return masks


def _agreement_vector(p: int, mask: int) -> tuple[int, ...]:
    # a[s] = number of cells (r, c) in the transversal with r + c = s
    a = [0] * p
    m = mask
    while m:
        low = m & -m
        cell = low.bit_length() - 1
        r, c = divmod(cell, p)
        a[(r + c) % p] += 1
        m ^= low
    return tuple(a)


def _achievable_sums(p: int, vectors: tuple[tuple[int, ...], ...]) -> int:
    # dp[S] = bitset of agreement sums after labeling the first
    # popcount(S) transversals with the label set S
    dp = [0] * (1 << p)
    dp[0] = 1
    full = (1 << p) - 1
    for state in range(1 << p):
        cur = dp[state]
        if not cur:
            continue
        if state == full:
            continue
        vec = vectors[bin(state).count("1")]
        for s in range(p):
            bit = 1 << s
            if not state & bit:
                dp[state | bit] |= cur << vec[s]
    return dp[full]


def _labeling_for(
    p: int, vectors: tuple[tuple[int, ...], ...], target: int
) -> "list[int] | None":
    dp = [0] * (1 << p)
    dp[0] = 1
    full = (1 << p) - 1
    for state in range(1 << p):
        cur = dp[state]
        if not cur or state == full:
            continue
        vec = vectors[bin(state).count("1")]
        for s in range(p):
            bit = 1 << s
            if not state & bit:
                dp[state | bit] |= cur << vec[s]
    if not (dp[full] >> target) & 1:
        return None
    labels = [0] * p
    state, remaining = full, target
    for i in range(p - 1, -1, -1):
        for s in range(p):
            bit = 1 << s
            if not state & bit:
                continue
            a = vectors[i][s]
            if remaining >= a and (dp[state ^ bit] >> (remaining - a)) & 1:
                labels[i] = s
                state ^= bit
                remaining -= a
                break
        else:
            return None
    return labels


def _certificate(
    p: int, k: int, chosen_masks: list[int], labels: list[int]
) -> TradePair:
    entries = []
    for mask, s in zip(chosen_masks, labels):
        m = mask
        while m:
            low = m & -m
            cell = low.bit_length() - 1
            r, c = divmod(cell, p)
            base = (r + c) % p
            if base != s:
                entries.append((r, c, base, s))
            m ^= low
    return TradePair(p, 1, k, tuple(entries))


def _spectrum_worker(
    p: int,
    k: int,
    masks: list[int],
    by_cell: list[list[int]],
    roots: list[int],
    deadline: "float | None",
    targets: "frozenset | None",
    dp_memo: dict,
):
    full = (1 << (p * p)) - 1
    sizes: set[int] = set()
    certificates: dict[int, TradePair] = {}
    chosen: list[int] = []
    counter = 0

    def handle_cover():
        vectors = tuple(_agreement_vector(p, masks[i]) for i in chosen)
        key = tuple(sorted(vectors))
        sums = dp_memo.get(key)
        if sums is None:
            sums = _achievable_sums(p, vectors)
            dp_memo[key] = sums
        bits = sums
        agreement = 0
        while bits:
            if bits & 1:
                size = p * p - agreement
                if size not in sizes:
                    sizes.add(size)
                    labels = _labeling_for(p, vectors, agreement)
                    certificates[size] = _certificate(
                        p, k, [masks[i] for i in chosen], labels
                    )
            bits >>= 1
            agreement += 1

    def done() -> bool:
        return targets is not None and targets <= sizes

    def rec(used: int):
        nonlocal counter
        counter += 1
        if counter % 2048 == 0 and deadline is not None:
            if time.monotonic() > deadline:
                raise BudgetExpired
        if used == full:
            handle_cover()
            return done()
        pivot = ((~used) & (used + 1)).bit_length() - 1
        for i in by_cell[pivot]:
            m = masks[i]
            if m & used:
                continue
            chosen.append(i)
            stop = rec(used | m)
            chosen.pop()
            if stop:
                return True
        return False

    exhausted = True
    try:
        for root in roots:
            chosen.append(root)
            stop = rec(masks[root])
            chosen.pop()
            if stop:
                exhausted = False
                break
    except BudgetExpired:
        chosen.clear()
        exhausted = False
    return sizes, certificates, exhausted


def spectrum(
    p: "int | Modulus",
    k: int,
    budget: "float | None" = None,
    threads: "int | None" = None,
    targets: "frozenset | None" = None,
) -> SpectrumResult:
    """Sizes of orthogonal trades of index (1, k) in B_p.

    Enumerates partitions of the grid into transversals of B_p(k) (exact
    cover by bitmasks, anti-diagonals tried first so near-identity
    labelings surface early) and runs the labeling DP per partition.
    Stops early once ``targets`` is covered or the budget expires, in
    which case exhaustive is False.
    """
    mod = p if isinstance(p, Modulus) else Modulus.of_odd(p)
    p = mod.p
    if k not in admissible_mates(p):
        raise ValueError(f"k={k} is not an admissible orthogonal mate mod {p}")
    start = time.monotonic()
    deadline = _deadline(budget)
    workers = _default_threads() if threads is None else max(1, threads)

    masks = _transversal_masks(gen_bp(mod, k))
    diagonals = {
        sum(1 << (r * p + (s - r) % p) for r in range(p)) for s in range(p)
    }
    order = sorted(range(len(masks)), key=lambda i: (masks[i] not in diagonals, i))
    rank = {i: n for n, i in enumerate(order)}
    by_cell: list[list[int]] = [[] for _ in range(p * p)]
    for i, m in enumerate(masks):
        mm = m
        while mm:
            low = mm & -mm
            by_cell[low.bit_length() - 1].append(i)
            mm ^= low
    for cell in range(p * p):
        by_cell[cell].sort(key=rank.__getitem__)

    roots = sorted(_root_representatives(p, k, masks), key=rank.__getitem__)
    slices = [roots[w::workers] for w in range(workers)]
    dp_memo: dict = {}
    if workers == 1:
        results = [
            _spectrum_worker(p, k, masks, by_cell, roots, deadline, targets, dp_memo)
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    _spectrum_worker, p, k, masks, by_cell, sl, deadline, targets, {}
                )
                for sl in slices
            ]
            results = [f.result() for f in futures]

    sizes: set[int] = set()
    certificates: dict[int, TradePair] = {}
    exhaustive = True
    for s_part, c_part, ex_part in results:
        sizes |= s_part
        for size, cert in sorted(c_part.items()):
            certificates.setdefault(size, cert)
        exhaustive = exhaustive and ex_part
    return SpectrumResult(
        p=p,
        per_k={k: frozenset(sizes)},
        sizes=frozenset(sizes),
        certificates=certificates,
        exhaustive=exhaustive,
        budget_used=time.monotonic() - start,
    )


def spectrum_all(
    p: "int | Modulus",
    budget: "float | None" = None,
    threads: "int | None" = None,
    targets: "frozenset | None" = None,
) -> SpectrumResult:
    """Union of spectrum(p, k) over admissible k.

    Transposition maps index-(1, k) trades to index-(1, k^-1) trades of
    the same size, so only one k per inverse pair is enumerated; the
    copied entries are listed in via_duality.
    """
    mod = p if isinstance(p, Modulus) else Modulus.of_odd(p)
    p = mod.p
    start = time.monotonic()
    deadline = _deadline(budget)
    ks = admissible_mates(p)
    canonical = tuple(k for k in ks if k <= pow(k, -1, p))
    per_k: dict[int, frozenset] = {}
    certificates: dict[int, TradePair] = {}
    union: set[int] = set()
    exhaustive = True
    dual: list[int] = []
    for k in canonical:
        remaining = None if targets is None else targets - union
        if remaining is not None and not remaining:
            exhaustive = False
            break
        left = None if deadline is None else max(0.0, deadline - time.monotonic())
        res = spectrum(mod, k, budget=left, threads=threads, targets=remaining)
        per_k[k] = res.per_k[k]
        inv = pow(k, -1, p)
        if inv != k:
            per_k[inv] = res.per_k[k]
            dual.append(inv)
        union |= res.sizes
        for size, cert in sorted(res.certificates.items()):
            certificates.setdefault(size, cert)
        exhaustive = exhaustive and res.exhaustive
    return SpectrumResult(
        p=p,
        per_k=dict(sorted(per_k.items())),
        sizes=frozenset(union),
        certificates=certificates,
        exhaustive=exhaustive,
        budget_used=time.monotonic() - start,
        via_duality=tuple(sorted(dual)),
    )


# -- row-permutation support sizes ---------------------------------------------


@dataclass(frozen=True)
class RowPermSearchResult:
    """Achievable moved-row counts for trades preserving ``mates_count``
    orthogonal mates simultaneously, with one witness per count."""

    p: int
    mates_count: int
    m_values: frozenset
    witnesses: dict[int, tuple[RowPermutation, tuple[int, ...]]] = field(repr=False)
    exhaustive: bool = True
    budget_used: float = 0.0

    @property
    def nontrivial_m(self) -> frozenset:
        return self.m_values - {self.p - 1, self.p}


def _sigma_search(p, ks, record, deadline):
    # exhaustive over sigma with sigma(0) = 1; affine conjugation maps any
    # permutation with nonempty support to such a representative without
    # changing the support size or the preserved mate set
    sigma = [0] * p
    sigma[0] = 1
    dmasks = list(ks)
    for i, k in enumerate(ks):
        dmasks[i] = 1 << ((-1) % p)
    counter = 0

    def rec(r, used, moved):
        nonlocal counter
        counter += 1
        if counter % 4096 == 0 and deadline is not None:
            if time.monotonic() > deadline:
                raise BudgetExpired
        if r == p:
            record(moved, sigma)
            return
        for v in range(p):
            if (used >> v) & 1:
                continue
            ok = True
            for i, k in enumerate(ks):
                if (dmasks[i] >> ((k * r - v) % p)) & 1:
                    ok = False
                    break
            if not ok:
                continue
            bits = [0] * len(ks)
            for i, k in enumerate(ks):
                bits[i] = 1 << ((k * r - v) % p)
                dmasks[i] |= bits[i]
            sigma[r] = v
            rec(r + 1, used | (1 << v), moved + (v != r))
            for i in range(len(ks)):
                dmasks[i] ^= bits[i]

    rec(1, 2, 1)


def rowperm_sizes(
    p: "int | Modulus", mates: int, budget: "float | None" = None
) -> RowPermSearchResult:
    """Moved-row counts m achievable by permutations preserving
    orthogonality with ``mates`` squares B_p(k) simultaneously.

    Exhausts all mate sets (up to the inverse-set symmetry) and all
    permutations up to affine conjugation; m = p is always present (the
    shifts) and m = p-1 whenever some scaling avoids the mate set.
    """
    mod = p if isinstance(p, Modulus) else Modulus.of_odd(p)
    if not mod.prime:
        raise ValueError(f"p={mod.p} must be prime")
    p = mod.p
    if p > TRANSVERSAL_CAP:
        raise ValueError(f"p={p} above the exhaustive cap {TRANSVERSAL_CAP}")
    if not 1 <= mates <= 5:
        raise ValueError(f"mates={mates} out of range 1..5")
    start = time.monotonic()
    deadline = _deadline(budget)

    witnesses: dict[int, tuple[RowPermutation, tuple[int, ...]]] = {}
    exhaustive = True
    seen = set()
    for K in itertools.combinations(range(2, p), mates):
        inv = tuple(sorted(pow(k, -1, p) for k in K))
        if min(K, inv) in seen:
            continue
        seen.add(K)

        def record(m, sigma, K=K):
            if m not in witnesses:
                rp = RowPermutation(p, tuple(sigma))
                assert rowperm_orthogonal(rp, set(K))
                witnesses[m] = (rp, K)

        try:
            _sigma_search(p, K, record, deadline)
        except BudgetExpired:
            exhaustive = False
            break
    return RowPermSearchResult(
        p=p,
        mates_count=mates,
        m_values=frozenset(witnesses),
        witnesses=witnesses,
        exhaustive=exhaustive,
        budget_used=time.monotonic() - start,
    )


# -- orthomorphisms --------------------------------------------------------------


def enumerate_orthomorphisms(p: "int | Modulus", force: bool = False):
    """Yield every orthomorphism of Z_p, lexicographic by image tuple."""
    mod = p if isinstance(p, Modulus) else Modulus.of_odd(p)
    p = mod.p
    _check_cap(p, force)
    images = [0] * p

    def rec(x: int, used: int, used_d: int):
        if x == p:
            yield Orthomorphism(p, tuple(images))
            return
        for v in range(p):
            if (used >> v) & 1:
                continue
            d = (v - x) % p
            if (used_d >> d) & 1:
                continue
            images[x] = v
            yield from rec(x + 1, used | (1 << v), used_d | (1 << d))

    yield from rec(0, 0, 0)


def _normalized_orthomorphism_images(p: int):
    # theta(0) = 0; every orthomorphism has exactly one fixed point, so
    # each translation-conjugacy orbit is represented exactly once
    images = [0] * p

    def rec(x: int, used: int, used_d: int):
        if x == p:
            yield tuple(images)
            return
        for v in range(p):
            if (used >> v) & 1:
                continue
            d = (v - x) % p
            if (used_d >> d) & 1:
                continue
            images[x] = v
            yield from rec(x + 1, used | (1 << v), used_d | (1 << d))

    yield from rec(1, 1, 1)


def min_distance_from_linear(p: "int | Modulus", k: int, force: bool = False) -> int:
    """Exact minimum Hamming distance from x -> k*x to any other
    orthomorphism of Z_p.

    Scans normalized representatives; within an orbit the distance to the
    linear map varies over the residue histogram of theta(x) - k*x, so
    the orbit minimum is p minus the largest frequency (excluding the
    linear map itself, frequency p at 0).
    """
    mod = p if isinstance(p, Modulus) else Modulus.of_odd(p)
    if not mod.prime:
        raise ValueError(f"p={mod.p} must be prime")
    p = mod.p
    _check_cap(p, force)
    if not 2 <= k <= p - 1:
        raise ValueError(f"k={k} out of range 2..{p - 1}")
    best = p
    for images in _normalized_orthomorphism_images(p):
        freq = [0] * p
        for x in range(p):
            freq[(images[x] - k * x) % p] += 1
        for count in freq:
            if count == p:
                continue
            if p - count < best:
                best = p - count
    return best
