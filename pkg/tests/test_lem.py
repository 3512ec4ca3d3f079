import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from crowdflow.grid import B, BL, BR, F, FL, FR, L, R, CellState, distance_table, neighborhood, state_from_grid
from crowdflow.lem import STAY, CandidateScores, lem_choose, lem_decide, lem_scores, lem_select
from crowdflow.rng import Phase, RngKey, seed64

from oracles import hand_lem, lem_slot_probabilities

ALL_EMPTY = [1, 0.70711, 0.70711, 0.44721, 0.44721, 0.33333, 0.31623, 0.31623]


def _nbhd(blocked=(), group=CellState.TOP):
    """Agent at (8, 8) on a 16x16 grid with the given slots occupied."""
    grid = np.zeros((16, 16), dtype=np.int8)
    grid[8, 8] = group
    sign = 1 if group == CellState.TOP else -1
    offsets = [(1, 0), (1, -1), (1, 1), (0, -1), (0, 1), (-1, 0), (-1, -1), (-1, 1)]
    for slot in blocked:
        f, dc = offsets[slot]
        grid[8 + f * sign, 8 + dc] = CellState.BOTTOM
    st_ = state_from_grid(grid)
    return neighborhood(st_, int(st_.index[8, 8]))


def test_all_empty_scores() -> None:
    sc = lem_scores(_nbhd(), distance_table(2.0)).scores
    assert sc == pytest.approx(ALL_EMPTY, abs=5e-6)


def test_all_occupied_scores() -> None:
    assert not lem_scores(_nbhd(range(8)), distance_table()).scores.any()


def test_forward_blocked_scores() -> None:
    sc = lem_scores(_nbhd([F]), distance_table()).scores
    assert sc[F] == 0
    assert sc[1:] == pytest.approx(ALL_EMPTY[1:], abs=5e-6)


@given(st.lists(st.booleans(), min_size=8, max_size=8), st.floats(1.01, 20))
def test_scores_match_hand_evaluation(free: list[bool], d0: float) -> None:
    blocked = [i for i in range(8) if not free[i]]
    sc = lem_scores(_nbhd(blocked), distance_table(d0)).scores
    assert np.abs(sc - hand_lem(free, d0)).max() <= 1e-12
    assert np.all((sc >= 0) & (sc <= 1))
    assert (sc == 1.0).sum() == int(free[F])
    assert np.array_equal(sc > 0, np.array(free))


def test_forward_empty_moves_forward() -> None:
    nb = _nbhd([L, R, B])
    for entity in range(50):
        dec = lem_select(lem_scores(nb, distance_table()), nb, RngKey(1, 0, Phase.LEM_SELECT, entity))
        assert dec.slot == F and dec.target == (9, 8)


def test_boxed_in_stays() -> None:
    nb = _nbhd(range(8))
    dec = lem_select(lem_scores(nb, distance_table()), nb, RngKey(1, 0, Phase.LEM_SELECT, 1))
    assert dec.is_stay and dec.target is None


def test_clamped_draw_tie_break_picks_first_diagonal() -> None:
    free = np.ones(8, dtype=np.bool_)
    free[F] = False
    sc = np.array([0, *ALL_EMPTY[1:]])
    c_max = np.float64(0.70711)
    assert lem_choose(sc, free, c_max, 0.3) == FL
    assert lem_choose(sc, free, c_max, 0.7) == FR


def test_choose_nearest_level() -> None:
    free = np.ones(8, dtype=np.bool_)
    free[F] = False
    sc = lem_scores(_nbhd([F]), distance_table()).scores
    assert lem_choose(sc, free, 0.45, 0.1) == L
    assert lem_choose(sc, free, 0.45, 0.9) == R
    assert lem_choose(sc, free, 0.335, 0.0) == B
    assert lem_choose(sc, free, 0.0, 0.99) == BR
    assert lem_choose(np.zeros(8), np.zeros(8, dtype=np.bool_), 0.0, 0.5) == STAY


@given(st.lists(st.booleans(), min_size=8, max_size=8), st.integers(0, 10**6))
def test_stay_iff_no_free_slot(free: list[bool], entity: int) -> None:
    blocked = [i for i in range(8) if not free[i]]
    nb = _nbhd(blocked)
    dec = lem_select(lem_scores(nb, distance_table()), nb, RngKey(3, 1, Phase.LEM_SELECT, entity))
    assert dec.is_stay == (not any(free))
    if not dec.is_stay:
        assert nb.free[dec.slot]


def _frequencies(trials: int) -> np.ndarray:
    free = np.ones(8, dtype=np.bool_)
    free[F] = False
    sc = lem_scores(_nbhd([F]), distance_table()).scores
    counts = np.zeros(8)
    for agent in range(trials):
        counts[lem_decide(sc, free, seed64(21), np.uint64(0), np.uint64(agent), 1.0, 0.5)] += 1
    return counts


def test_selection_frequencies_match_clamped_normal() -> None:
    trials = 10**5
    counts = _frequencies(trials)
    sc = lem_scores(_nbhd([F]), distance_table()).scores
    p = lem_slot_probabilities(list(sc))
    assert p.sum() == pytest.approx(1.0)
    keep = p > 0
    assert stats.chisquare(counts[keep], p[keep] * trials).pvalue > 0.01


def test_forward_dominance() -> None:
    counts = _frequencies(10**5)
    diag, lateral = counts[FL] + counts[FR], counts[L] + counts[R]
    assert diag > lateral
    assert all(lateral > counts[s] for s in (B, BL, BR))
    assert abs(counts[FL] - counts[FR]) < 4 * np.sqrt(counts[FL])
