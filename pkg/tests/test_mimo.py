import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cinediff.mimo import make_plan, ungroup, window


def _video(t, h=4, w=4, seed=0):
    return np.random.default_rng(seed).normal(size=(t, h, w))


def test_plan_t25_g3():
    plan = make_plan(25, 3)
    assert plan.n_windows == 9
    assert plan.padded_length == 27
    assert plan.n_padded == 2
    assert plan.frames[-1] == (24, 0, 1)  # tail wraps to the start of the cycle
    assert plan.frames[0] == (0, 1, 2)


def test_plan_no_padding_when_divisible():
    plan = make_plan(6, 3)
    assert plan.n_windows == 2
    assert plan.n_padded == 0
    assert plan.frames == ((0, 1, 2), (3, 4, 5))


def test_plan_group_one_degenerates_per_frame():
    plan = make_plan(5, 1)
    assert plan.n_windows == 5
    assert plan.frames == ((0,), (1,), (2,), (3,), (4,))


def test_windows_disjoint_cover_padded_length():
    plan = make_plan(25, 3)
    slots = [w * plan.group + j for w in range(plan.n_windows) for j in range(plan.group)]
    assert slots == list(range(plan.padded_length))


def test_window_contents():
    v = _video(7)
    groups, plan = window(v, 3)
    assert len(groups) == 3
    np.testing.assert_array_equal(groups[0], v[[0, 1, 2]])
    np.testing.assert_array_equal(groups[2], v[[6, 0, 1]])  # cyclic pad


def test_round_trip_t25_g3():
    v = _video(25)
    groups, plan = window(v, 3)
    np.testing.assert_array_equal(ungroup(groups, plan), v)


def test_round_trip_t7_g3():
    v = _video(7, seed=1)
    groups, plan = window(v, 3)
    np.testing.assert_array_equal(ungroup(groups, plan), v)


def test_padded_slots_never_read_back():
    v = _video(7, seed=2)
    groups, plan = window(v, 3)
    groups[2][1] = 999.0  # pad slot for frame 0's duplicate
    groups[2][2] = -999.0
    out = ungroup(groups, plan)
    np.testing.assert_array_equal(out, v)  # originals win, duplicates dropped


@settings(max_examples=60, deadline=None)
@given(t=st.integers(1, 40), g=st.integers(1, 10), seed=st.integers(0, 1000))
def test_round_trip_property(t, g, seed):
    v = _video(t, seed=seed)
    groups, plan = window(v, g)
    assert plan.n_windows == -(-t // g)
    np.testing.assert_array_equal(ungroup(groups, plan), v)


def test_window_count_drives_nfe_accounting():
    assert make_plan(25, 3).n_windows * 10 == 90
    assert make_plan(25, 1).n_windows * 1000 == 25000


def test_invalid_inputs():
    with pytest.raises(ValueError):
        make_plan(0, 3)
    with pytest.raises(ValueError):
        make_plan(5, 0)
    with pytest.raises(ValueError):
        window(np.zeros((4, 4)), 2)
    groups, plan = window(_video(6), 3)
    with pytest.raises(ValueError):
        ungroup(groups[:1], plan)
    bad = [g.copy() for g in groups]
    bad[1] = bad[1][:2]
    with pytest.raises(ValueError):
        ungroup(bad, plan)
