import math

import pytest

from bptrades.matrices import TradeMatrix, balance_matrix, size_bounds, symbol_system
from bptrades.rowperm import (
    RowPermutation,
    rowperm_orthogonal,
    rowperm_from_symbol,
    sqrt_mod,
    three_row_trade,
    trade_from_matrix,
    trade_from_rowperm,
)
from bptrades.trades import validate_orthogonal_trade

from test_trades import B13, FIG1, FIG2

FIG2_SIGMA = RowPermutation.from_map(7, {0: 4, 4: 5, 5: 0})


# -- RowPermutation ----------------------------------------------------------


def test_support_is_computed():
    assert FIG2_SIGMA.support == (0, 4, 5)
    assert RowPermutation(5, (0, 1, 2, 3, 4)).support == ()


def test_transpositions_rejected():
    with pytest.raises(ValueError):
        RowPermutation(5, (1, 0, 2, 3, 4))


def test_non_permutation_rejected():
    with pytest.raises(ValueError):
        RowPermutation(3, (0, 0, 2))
    with pytest.raises(ValueError):
        RowPermutation(3, (0, 1))


def test_from_cycle():
    sigma = RowPermutation.from_cycle(7, (0, 1, 3))
    assert sigma.images[0] == 1 and sigma.images[1] == 3 and sigma.images[3] == 0
    assert sigma.support == (0, 1, 3)


# -- orthogonality test ------------------------------------------------------


def test_fig2_sigma_orthogonal_for_k3():
    assert rowperm_orthogonal(FIG2_SIGMA, {3})


def test_three_cycle_zero_one_three_orthogonal_for_k3():
    assert rowperm_orthogonal(RowPermutation.from_cycle(7, (0, 1, 3)), {3})


def test_identity_orthogonal_for_all_k():
    assert rowperm_orthogonal(RowPermutation(7, tuple(range(7))), {2, 3, 4, 5, 6})


def test_fig2_sigma_not_orthogonal_for_k2_or_k4():
    # k=2: the differences 2r - sigma(r) all collapse to 3
    assert not rowperm_orthogonal(FIG2_SIGMA, {2})
    # k=4: differences are distinct but miss the required set 3*{0,4,5}
    assert not rowperm_orthogonal(FIG2_SIGMA, {4})
    assert not rowperm_orthogonal(FIG2_SIGMA, {3, 4})


def test_k_one_rejected():
    with pytest.raises(ValueError):
        rowperm_orthogonal(FIG2_SIGMA, {1})


# -- trades from row permutations ---------------------------------------------


def test_trade_from_fig2_sigma_is_fig2():
    t = trade_from_rowperm(FIG2_SIGMA, 3)
    assert t == FIG2
    assert t.size == 21 == 7 * len(FIG2_SIGMA.support)


def test_trade_from_rowperm_rejects_identity():
    with pytest.raises(ValueError):
        trade_from_rowperm(RowPermutation(7, tuple(range(7))), 3)


def test_trade_from_rowperm_rejects_non_orthogonal():
    with pytest.raises(ValueError):
        trade_from_rowperm(FIG2_SIGMA, 4)


# -- sigma from a symbol of a trade -------------------------------------------


def test_fig1_symbol_zero_gives_fig2_sigma():
    sigma = rowperm_from_symbol(FIG1, 0)
    assert sigma.images == FIG2_SIGMA.images


def test_fig1_symbol_five_gives_valid_sigma():
    sigma = rowperm_from_symbol(FIG1, 5)
    assert set(sigma.support) == {2, 3, 5}
    assert rowperm_orthogonal(sigma, {3})


@pytest.mark.parametrize("trade", [FIG1, FIG2], ids=["fig1", "fig2"])
def test_every_symbol_yields_orthogonal_rowperm(trade):
    assert trade.k is not None
    for s in sorted({b for _, _, b, _ in trade.entries}):
        sigma = rowperm_from_symbol(trade, s)
        assert rowperm_orthogonal(sigma, {trade.k})
        t = trade_from_rowperm(sigma, trade.k)
        assert validate_orthogonal_trade(t).is_orthogonal_trade
        assert t.size == trade.p * len(sigma.support)


# -- trades from matrix systems ------------------------------------------------


def test_matrix_system_rebuilds_fig2():
    A = symbol_system(FIG1, 0).matrix
    t = trade_from_matrix(A, (0, 4, 5), 3, 7)
    assert t == FIG2


def test_b13_balance_matrix_gives_index_two_trade():
    D, u = balance_matrix(B13)
    t = trade_from_matrix(D, u, 2, 13)
    assert (t.ell, t.k) == (1, 2)
    assert t.rows_used() == (0, 5, 8, 10, 11, 12)
    assert t.size == 13 * 6
    assert validate_orthogonal_trade(t).is_orthogonal_trade


def test_minus_two_entry_rejected():
    A = TradeMatrix(3, ((2, -2, 0), (-2, 2, 0), (0, 0, 2)))
    with pytest.raises(ValueError):
        trade_from_matrix(A, (0, 1, 2), 2, 7)


def test_duplicate_u_rejected():
    A = symbol_system(FIG1, 0).matrix
    with pytest.raises(ValueError):
        trade_from_matrix(A, (0, 4, 4), 3, 7)


def test_inconsistent_u_rejected():
    A = symbol_system(FIG1, 0).matrix
    with pytest.raises(ValueError):
        trade_from_matrix(A, (0, 4, 6), 3, 7)


# -- three-row family ----------------------------------------------------------


def test_three_row_p7():
    out = three_row_trade(7)
    assert out is not None
    sigma, k = out
    assert k == 3
    assert sigma.support == (0, 1, 3)
    assert trade_from_rowperm(sigma, k).size == 21


def test_three_row_p13():
    out = three_row_trade(13)
    assert out is not None
    sigma, k = out
    assert k == 4  # 4^2 - 4 + 1 = 13
    t = trade_from_rowperm(sigma, k)
    assert t.size == 39
    assert validate_orthogonal_trade(t).is_orthogonal_trade


@pytest.mark.parametrize("p", [5, 11, 17, 23])
def test_three_row_absent_off_residue_class(p):
    assert three_row_trade(p) is None


def test_three_row_rejects_composite():
    with pytest.raises(ValueError):
        three_row_trade(9)


def test_p3_degenerate_full_square_rowperm():
    # p=3 sits outside the p=1 mod 6 family, yet the full 3-cycle moves
    # every row and is orthogonal for k=2 (k^2-k+1 = 3 = 0 has the double
    # root 2 because -3 = 0 is a square); the constructor still declines
    sigma = RowPermutation.from_cycle(3, (0, 1, 2))
    assert rowperm_orthogonal(sigma, {2})
    assert three_row_trade(3) is None


@pytest.mark.parametrize("p", [7, 13, 19, 31, 37, 43])
def test_three_row_k_solves_quadratic(p):
    out = three_row_trade(p)
    assert out is not None
    sigma, k = out
    assert (k * k - k + 1) % p == 0
    assert 2 <= k <= (p + 1) // 2
    assert len(sigma.support) > math.log(p) / math.log(size_bounds(p, k).K)


# -- modular square roots --------------------------------------------------------


def test_sqrt_mod_examples():
    assert sqrt_mod(-3, 7) == 2
    assert sqrt_mod(-3, 11) is None
    assert sqrt_mod(0, 13) == 0
    assert sqrt_mod(-3, 13) == 6
    assert sqrt_mod(2, 17) == 6
    assert sqrt_mod(2, 41) == 17


def test_sqrt_mod_rejects_composite():
    with pytest.raises(ValueError):
        sqrt_mod(4, 9)


@pytest.mark.parametrize("p", [13, 17, 29, 97, 193])
def test_sqrt_mod_round_trip(p):
    for a in range(p):
        r = sqrt_mod(a, p)
        if r is None:
            assert all(x * x % p != a for x in range(p))
        else:
            assert r * r % p == a % p
            assert r <= p - r  # least root
