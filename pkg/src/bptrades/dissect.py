"""Square dissections of n x (n+3) rectangles and the small trades they give.

Cutting each square of a dissection along its anti-diagonal, and adding
two corner triangles, tiles the right triangle with legs w + h.  The
right-angle vertices of the tiles are cells of a Latin trade in the
addition table of Z_{w+h}; when the dissection is good, every symbol of
that trade occurs exactly twice.  Recursing on quartered rectangles
keeps the square count at O(log n), so for prime p = 2n + 3 this yields
a trade of size O(log p) whose balance matrix feeds trade_from_matrix
with k = 2.

Frame: x rightward in [0, w], y upward in [0, h].  The goodness
conditions treat (0, h) as the distinguished corner, and the two
forbidden anti-diagonals become x + y = h + 1 and x + y = h + 2.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass
from importlib import resources

from bptrades.core import Modulus
from bptrades.matrices import balance_matrix
from bptrades.rowperm import RowPermutation, trade_from_matrix
from bptrades.trades import TradePair, validate_latin_trade

__all__ = [
    "SquareDissection",
    "GoodnessReport",
    "check_good",
    "base_dissection",
    "good_dissection",
    "dissection_to_trade",
    "dissection_svg",
    "log_trade",
    "small_rowperm_pipeline",
    "symbol_twice_search",
]

Square = tuple[int, int, int]
_Rect = tuple[int, int, int, int]


def _overlaps(a: _Rect, b: _Rect) -> bool:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    return ax < bx + bw and bx < ax + aw and ay < by + bh and by < ay + ah


@dataclass(frozen=True)
class SquareDissection:
    """Integer squares partitioning a w x h rectangle.

    Construction validates the partition: positive sides, containment,
    pairwise interior-disjointness, and total area w*h.  Squares are
    stored sorted.
    """

    w: int
    h: int
    squares: tuple[Square, ...]

    def __post_init__(self) -> None:
        if self.w < 1 or self.h < 1:
            raise ValueError(f"rectangle {self.w}x{self.h} is degenerate")
        squares = []
        for sq in self.squares:
            sq = tuple(int(v) for v in sq)
            if len(sq) != 3:
                raise ValueError(f"square {sq} is not (x, y, side)")
            squares.append(sq)
        squares = tuple(sorted(squares))
        area = 0
        for x, y, s in squares:
            if s < 1:
                raise ValueError(f"square {(x, y, s)} has nonpositive side")
            if x < 0 or y < 0 or x + s > self.w or y + s > self.h:
                raise ValueError(f"square {(x, y, s)} leaves the rectangle")
            area += s * s
        for a, b in itertools.combinations(squares, 2):
            if _overlaps((a[0], a[1], a[2], a[2]), (b[0], b[1], b[2], b[2])):
                raise ValueError(f"squares {a} and {b} overlap")
        if area != self.w * self.h:
            raise ValueError(f"square areas cover {area} of {self.w * self.h}")
        object.__setattr__(self, "squares", squares)

    @property
    def order(self) -> int:
        return len(self.squares)

    def to_json(self, pretty: bool = False) -> str:
        obj = {
            "n": self.h,
            "w": self.w,
            "h": self.h,
            "squares": [list(sq) for sq in self.squares],
        }
        if pretty:
            return json.dumps(obj, indent=2) + "\n"
        return json.dumps(obj)

    @classmethod
    def from_json(cls, text: str) -> "SquareDissection":
        obj = json.loads(text)
        return cls(
            int(obj["w"]),
            int(obj["h"]),
            tuple(tuple(int(v) for v in sq) for sq in obj["squares"]),
        )


@dataclass(frozen=True)
class GoodnessReport:
    """Flags certifying that a dissection converts to a symbol-twice trade.

    ``failures`` lists (flag, detail) pairs with the offending
    coordinates; the report is truthy when every flag holds.
    """

    g1_oplus_free: bool
    g2_origin_side_ge_3: bool
    g4_avoids_lines: bool
    pairing_ok: bool
    vertex_collision_free: bool
    failures: tuple[tuple[str, str], ...] = ()

    def __bool__(self) -> bool:
        return (
            self.g1_oplus_free
            and self.g2_origin_side_ge_3
            and self.g4_avoids_lines
            and self.pairing_ok
            and self.vertex_collision_free
        )


def _trade_vertices(d: SquareDissection) -> list[tuple[int, int]]:
    # lower-left and upper-right corners plus the two filler vertices
    pts = []
    for x, y, s in d.squares:
        pts.append((x, y))
        pts.append((x + s, y + s))
    pts.append((d.w, 0))
    pts.append((0, d.h))
    return pts


def check_good(d: SquareDissection) -> GoodnessReport:
    """Decide whether a dissection yields a symbol-twice trade.

    g1: no lattice point touches four squares.  g2: the square with a
    corner at (0, h) has side at least 3.  g4: no square corner lies on
    x + y = h + 1 or x + y = h + 2.  pairing_ok: over the squares'
    lower-left and upper-right corners plus the filler vertices (w, 0)
    and (0, h), every residue (x + y) mod (w + h) occurs exactly twice.
    vertex_collision_free: those vertices are pairwise distinct.
    """
    failures: list[tuple[str, str]] = []
    modulus = d.w + d.h

    corners: set[tuple[int, int]] = set()
    for x, y, s in d.squares:
        corners.update(((x, y), (x + s, y), (x, y + s), (x + s, y + s)))
    g1 = True
    for px, py in sorted(corners):
        touching = sum(
            1 for x, y, s in d.squares if x <= px <= x + s and y <= py <= y + s
        )
        if touching >= 4:
            g1 = False
            failures.append(("g1", f"point ({px}, {py}) touches {touching} squares"))

    origin_sq = next(
        ((x, y, s) for x, y, s in d.squares if x == 0 and y + s == d.h), None
    )
    g2 = origin_sq is not None and origin_sq[2] >= 3
    if not g2:
        failures.append(("g2", f"corner (0, {d.h}) square {origin_sq}"))

    g4 = True
    for x, y, s in d.squares:
        for px, py in ((x, y), (x + s, y), (x, y + s), (x + s, y + s)):
            if px + py in (d.h + 1, d.h + 2):
                g4 = False
                failures.append(("g4", f"corner ({px}, {py}) on x+y={px + py}"))

    vertices = _trade_vertices(d)
    residues = Counter((px + py) % modulus for px, py in vertices)
    pairing = all(cnt == 2 for cnt in residues.values())
    for res in sorted(r for r, cnt in residues.items() if cnt != 2):
        failures.append(("pairing", f"residue {res} hit {residues[res]} times"))

    dup = sorted(pt for pt, cnt in Counter(vertices).items() if cnt > 1)
    vertex_ok = not dup
    for pt in dup:
        failures.append(("vertex", f"vertex {pt} reused"))

    return GoodnessReport(g1, g2, g4, pairing, vertex_ok, tuple(failures))


# -- constructing good dissections -----------------------------------------------


def _free_point(w: int, h: int, obstacles: list[_Rect]) -> "tuple[int, int] | None":
    # lowest then leftmost uncovered unit cell; its coordinates always lie
    # on existing right/top edges, so only those need scanning
    xs = sorted({0, *(x + rw for x, _, rw, _ in obstacles)})
    ys = sorted({0, *(y + rh for _, y, _, rh in obstacles)})
    for py in ys:
        if py >= h:
            continue
        for px in xs:
            if px >= w:
                continue
            if not any(
                x <= px < x + rw and y <= py < y + rh for x, y, rw, rh in obstacles
            ):
                return px, py
    return None


def _side_candidates(
    w: int, h: int, obstacles: list[_Rect], px: int, py: int
) -> list[int]:
    # snap distances to rectangle and obstacle edges; feasibility is
    # downward closed and the max feasible side is itself a snap, so an
    # ascending scan with early exit finds the full candidate list
    snaps = {w - px, h - py}
    for x, y, rw, rh in obstacles:
        for bound in (x, x + rw):
            if bound > px:
                snaps.add(bound - px)
        for bound in (y, y + rh):
            if bound > py:
                snaps.add(bound - py)
    smax = 0
    for s in sorted(snaps):
        if px + s > w or py + s > h:
            break
        if any(_overlaps((px, py, s, s), ob) for ob in obstacles):
            break
        smax = s
    return sorted((s for s in snaps if 1 <= s <= smax), reverse=True)


def _fill_region(w, h, obstacles, budget):
    """Yield square tuples completing the cover, trying larger sides first."""

    def rec(obs, placed):
        pt = _free_point(w, h, obs)
        if pt is None:
            yield tuple(placed)
            return
        if len(placed) >= budget:
            return
        px, py = pt
        for s in _side_candidates(w, h, obs, px, py):
            placed.append((px, py, s))
            obs.append((px, py, s, s))
            yield from rec(obs, placed)
            obs.pop()
            placed.pop()

    yield from rec(list(obstacles), [])


def base_dissection(n: int) -> SquareDissection:
    """Good dissection of n x (n+3) for 3 <= n <= 14, at most 8 squares.

    Fixes the n-square at the origin and the 3-square at the far bottom
    corner, then fills the leftover 3-wide strip greedily; if the greedy
    fill fails check_good, bounded backtracking tries the remaining
    strip dissections.
    """
    if not 3 <= n <= 14:
        raise ValueError(f"n={n} out of range 3..14")
    w, h = n + 3, n
    fixed = ((0, 0, n), (n, 0, 3))
    obstacles = [(0, 0, n, n), (n, 0, 3, 3)]
    for fill in _fill_region(w, h, obstacles, budget=6):
        d = SquareDissection(w, h, fixed + fill)
        if check_good(d):
            return d
    raise ValueError(f"no good dissection found for n={n}")


def _wrap_inner(n: int, inner: SquareDissection) -> SquareDissection:
    # place the doubled inner dissection in a corner and pack at most five
    # squares around it; the top-left corner with no reflection is the
    # stock layout, the other placements are fallbacks
    w, h = n + 3, n
    iw, ih = 2 * inner.w, 2 * inner.h
    doubled = tuple((2 * x, 2 * y, 2 * s) for x, y, s in inner.squares)
    for ox, oy in ((0, h - ih), (w - iw, h - ih), (0, 0), (w - iw, 0)):
        for flip_x, flip_y in itertools.product((False, True), repeat=2):
            sqs = tuple(
                (
                    ox + (iw - x - s if flip_x else x),
                    oy + (ih - y - s if flip_y else y),
                    s,
                )
                for x, y, s in doubled
            )
            for fill in _fill_region(w, h, [(ox, oy, iw, ih)], budget=5):
                d = SquareDissection(w, h, sqs + fill)
                if check_good(d):
                    return d
    raise ValueError(f"no good wrapping found for n={n}")


def good_dissection(
    n: int, cache: "dict[int, SquareDissection] | None" = None
) -> SquareDissection:
    """Good dissection of n x (n+3) using at most 3 + 5*log4(n+1) squares.

    For n <= 14 this is base_dissection.  For n = 4k + z (z in 3..6,
    k >= 3) the dissection for k is doubled and wrapped in at most five
    squares.  Results are memoized per n in the caller-supplied cache;
    there is no hidden shared state.
    """
    if n < 3:
        raise ValueError(f"n={n} must be at least 3")
    if cache is not None and n in cache:
        return cache[n]
    if n <= 14:
        d = base_dissection(n)
    else:
        z = 3 + (n - 3) % 4
        k = (n - z) // 4
        d = _wrap_inner(n, good_dissection(k, cache))
    if cache is not None:
        cache[n] = d
    return d


# -- conversion to trades ----------------------------------------------------


def dissection_to_trade(d: SquareDissection) -> TradePair:
    """Latin trade in Z_{w+h} read off the triangle tiling of a good dissection.

    Each square (x, y, s) contributes the entries (x, y, x+y, x+y+s) and
    (x+s, y+s, x+y+2s, x+y+s); the filler triangles contribute
    (w, 0, w, 0) and (0, h, h, 0), all mod w+h.  The result has size
    2*order + 2 and every symbol occurs exactly twice.  A composite
    modulus is allowed; validity in the Z_{w+h} addition table is
    checked either way.
    """
    report = check_good(d)
    if not report:
        raise ValueError(f"dissection is not good: {report.failures}")
    modulus = d.w + d.h
    entries = []
    for x, y, s in d.squares:
        entries.append((x, y, (x + y) % modulus, (x + y + s) % modulus))
        entries.append(
            (x + s, y + s, (x + y + 2 * s) % modulus, (x + y + s) % modulus)
        )
    entries.append((d.w, 0, d.w % modulus, 0))
    entries.append((0, d.h, d.h % modulus, 0))
    t = TradePair(modulus, 1, None, tuple(entries))
    rep = validate_latin_trade(t)
    if not rep.is_latin_trade:
        raise ValueError(f"dissection trade failed validation: {rep.failures}")
    if any(cnt != 2 for cnt in rep.symbol_histogram.values()):
        raise ValueError("dissection trade is not symbol-twice")
    return t


def dissection_svg(d: SquareDissection) -> str:
    """Deterministic SVG: the embedding triangle, squares at 16px per unit,
    the two filler triangles, and dashed anti-diagonal cut lines."""
    unit = 16
    total = d.w + d.h

    def pt(x: int, y: int) -> str:
        return f"{x * unit},{(total - y) * unit}"

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total * unit}"'
        f' height="{total * unit}" viewBox="0 0 {total * unit} {total * unit}">',
        f'<polygon points="{pt(0, 0)} {pt(total, 0)} {pt(0, total)}"'
        ' fill="none" stroke="black"/>',
        f'<polygon points="{pt(d.w, 0)} {pt(total, 0)} {pt(d.w, d.h)}"'
        ' fill="#dddddd" stroke="black"/>',
        f'<polygon points="{pt(0, d.h)} {pt(0, total)} {pt(d.w, d.h)}"'
        ' fill="#dddddd" stroke="black"/>',
    ]
    for x, y, s in d.squares:
        lines.append(
            f'<rect x="{x * unit}" y="{(total - y - s) * unit}"'
            f' width="{s * unit}" height="{s * unit}" fill="none" stroke="black"/>'
        )
        lines.append(
            f'<line x1="{x * unit}" y1="{(total - y - s) * unit}"'
            f' x2="{(x + s) * unit}" y2="{(total - y) * unit}"'
            ' stroke="black" stroke-dasharray="4 4"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# -- the O(log p) pipeline ------------------------------------------------------


def _stored_small_trade(p: int) -> TradePair:
    text = (
        resources.files("bptrades").joinpath(f"data/small_trade_{p}.json").read_text()
    )
    return TradePair.from_json(text)


def log_trade(p: "int | Modulus") -> TradePair:
    """Symbol-twice Latin trade in B_p of size O(log p), p an odd prime >= 5.

    p = 5 and 7 sit below the dissection construction and use stored
    trades found by symbol_twice_search; larger primes go through
    good_dissection((p-3)/2), so the size is at most
    2*(3 + 5*log4((p-1)/2)) + 2.
    """
    mod = p if isinstance(p, Modulus) else Modulus.of_odd(p)
    if not mod.prime:
        raise ValueError(f"p={mod.p} must be prime")
    if mod.p < 5:
        raise ValueError(f"p={mod.p} admits no symbol-twice trade")
    if mod.p in (5, 7):
        return _stored_small_trade(mod.p)
    return dissection_to_trade(good_dissection((mod.p - 3) // 2))


def small_rowperm_pipeline(
    p: "int | Modulus",
) -> tuple[RowPermutation, TradePair]:
    """Orthogonal trade of index (1, 2) permuting O(log p) rows of B_p.

    Chains log_trade -> balance_matrix -> trade_from_matrix with k = 2.
    The symbol-twice property pins every diagonal entry of the balance
    matrix at 2 and rules out -2 off the diagonal, which is exactly what
    the k = 2 recovery needs.  The moved rows are the symbols of the
    small trade, so their count is half its size.
    """
    t = log_trade(p)
    D, u = balance_matrix(t)
    trade = trade_from_matrix(D, u, 2, t.p)
    # row-major entries: each moved row's column-0 cell sits every p positions
    moved = {}
    for r, c, _, mate in trade.entries[:: t.p]:
        assert c == 0
        moved[r] = mate
    sigma = RowPermutation.from_map(t.p, moved)
    return sigma, trade


# -- exhaustive search for the sub-dissection primes ------------------------------


def _matrix_feasible(p: int, u: tuple[int, ...]) -> bool:
    # necessary condition: every symbol must be the average of two others
    for i, ui in enumerate(u):
        target = 2 * ui % p
        others = [v for j, v in enumerate(u) if j != i]
        if not any(
            (a + b) % p == target for a, b in itertools.combinations(others, 2)
        ):
            return False
    return True


def _mate_completions(p: int, cellmap: dict[tuple[int, int], int]):
    # assign mates row by row (a derangement of the row's bases), pruning
    # against the per-column base multisets
    rows: dict[int, list[tuple[int, int]]] = {}
    col_base: dict[int, Counter] = {}
    for (r, c), s in cellmap.items():
        rows.setdefault(r, []).append((c, s))
        col_base.setdefault(c, Counter())[s] += 1
    if any(len(group) < 2 for group in rows.values()):
        return
    if any(sum(cnt.values()) < 2 for cnt in col_base.values()):
        return
    row_items = sorted((r, sorted(group)) for r, group in rows.items())
    col_mate: dict[int, Counter] = {c: Counter() for c in col_base}

    def rec(i: int):
        if i == len(row_items):
            if all(col_mate[c] == col_base[c] for c in col_base):
                entries = tuple(
                    (r, c, s, assignment[(r, c)])
                    for (r, c), s in cellmap.items()
                )
                yield TradePair(p, 1, None, entries)
            return
        r, group = row_items[i]
        bases = [s for _, s in group]
        for perm in itertools.permutations(bases):
            if any(m == s for m, (_, s) in zip(perm, group)):
                continue
            ok = True
            taken = []
            for m, (c, _) in zip(perm, group):
                col_mate[c][m] += 1
                taken.append((c, m))
                if col_mate[c][m] > col_base[c][m]:
                    ok = False
                    break
            if ok:
                for m, (c, _) in zip(perm, group):
                    assignment[(r, c)] = m
                yield from rec(i + 1)
            for c, m in taken:
                col_mate[c][m] -= 1

    assignment: dict[tuple[int, int], int] = {}
    yield from rec(0)


def symbol_twice_search(p: int, symbols: int) -> "TradePair | None":
    """Exhaustive search for a symbol-twice trade in B_p on a given number
    of symbols (size 2*symbols) that the k = 2 pipeline accepts.

    Candidates are normalized up to translation and scaling by fixing
    cells (0, 0) and (1, p-1) with base symbol 0, so a None return rules
    out the size entirely.  Deterministic: the first hit in lexicographic
    order is returned.
    """
    mod = Modulus.of_odd(p)
    p = mod.p
    if symbols < 3 or symbols > p:
        return None
    diag = {s: tuple((r, (s - r) % p) for r in range(p)) for s in range(p)}
    zero_cells = ((0, 0), (1, p - 1))
    for extra in itertools.combinations(range(1, p), symbols - 1):
        if not _matrix_feasible(p, (0,) + extra):
            continue
        pools = [list(itertools.combinations(diag[s], 2)) for s in extra]
        for choice in itertools.product(*pools):
            cellmap = {cell: 0 for cell in zero_cells}
            clash = False
            for s, pair in zip(extra, choice):
                for cell in pair:
                    if cell in cellmap:
                        clash = True
                        break
                    cellmap[cell] = s
                if clash:
                    break
            if clash:
                continue
            for t in _mate_completions(p, cellmap):
                if not validate_latin_trade(t).is_latin_trade:
                    continue
                try:
                    D, u = balance_matrix(t)
                    trade_from_matrix(D, u, 2, p)
                except ValueError:
                    continue
                return t
    return None
