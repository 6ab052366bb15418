import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linkbrush.table import ALL_ROWS, BRUSH_COL, COLOR_COL, augment


def small_table():
    return augment({"x": [1.0, 2.0, 3.0, 4.0], "y": [10.0, 20.0, 30.0, 40.0]})


class TestAugment:
    def test_cars_columns(self, cars_table):
        assert cars_table.column_names() == ["speed", "dist", ".brushed", ".color"]
        assert cars_table.nrow == 50
        assert not cars_table.brushed.any()

    def test_empty_table_rejected(self):
        with pytest.raises(ValueError):
            augment({})

    def test_minimal_table(self):
        t = augment({"x": [3.0]})
        assert t.nrow == 1
        assert t.brushed.tolist() == [False]

    def test_duplicate_column_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            augment([("x", [1.0]), ("x", [2.0])])

    def test_reserved_name_rejected(self):
        with pytest.raises(ValueError, match="reserved"):
            augment({".brushed": [True]})

    def test_uniform_color_default(self):
        t = small_table()
        assert len(set(t.values(COLOR_COL).tolist())) == 1

    def test_kind_inference(self):
        t = augment({"n": [1, 2, None], "s": ["a", None, "b"], "b": [True, False, True]})
        assert t.column("n").kind == "numeric"
        assert t.column("s").kind == "categorical"
        assert t.column("b").kind == "boolean"
        assert t.column("n").missing.tolist() == [False, False, True]
        assert t.column("s").labels() == ["a", None, "b"]

    def test_ragged_columns_rejected(self):
        with pytest.raises(ValueError):
            augment({"x": [1.0, 2.0], "y": [1.0]})


class TestListeners:
    def test_brush_listener_fires_once(self, counting_listener):
        t = small_table()
        cb = counting_listener()
        t.add_listener(cb, watched={BRUSH_COL})
        t.set_brushed([0, 1])
        assert len(cb.calls) == 1
        assert cb.calls[0].columns == frozenset({BRUSH_COL})

    def test_unwatched_column_does_not_fire(self, counting_listener):
        t = small_table()
        cb = counting_listener()
        t.add_listener(cb, watched={"x", "y", BRUSH_COL})
        t.set_column(COLOR_COL, ["#ff0000"] * 4)
        assert cb.calls == []

    def test_registration_order(self):
        t = small_table()
        order = []
        t.add_listener(lambda n: order.append("A"), watched={"x"})
        t.add_listener(lambda n: order.append("B"), watched={"x"})
        t.set_column("x", [0.0, 0.0, 0.0, 0.0])
        assert order == ["A", "B"]

    def test_unknown_watch_rejected(self):
        t = small_table()
        with pytest.raises(KeyError):
            t.add_listener(lambda n: None, watched={"nope"})

    def test_remove_listener(self, counting_listener):
        t = small_table()
        cb = counting_listener()
        lid = t.add_listener(cb)
        t.remove_listener(lid)
        t.set_brushed([0])
        assert cb.calls == []

    def test_remove_twice_errors(self):
        t = small_table()
        lid = t.add_listener(lambda n: None)
        t.remove_listener(lid)
        with pytest.raises(KeyError):
            t.remove_listener(lid)

    def test_remove_one_of_two(self, counting_listener):
        t = small_table()
        a, b = counting_listener(), counting_listener()
        lid_a = t.add_listener(a)
        t.add_listener(b)
        t.remove_listener(lid_a)
        t.set_brushed([0])
        assert len(a.calls) == 0 and len(b.calls) == 1

    def test_suppress_unchanged_flag(self, counting_listener):
        t = small_table()
        quiet, loud = counting_listener(), counting_listener()
        t.add_listener(quiet, watched={"x"}, suppress_unchanged=True)
        t.add_listener(loud, watched={"x"})
        t.set_column("x", t.values("x"))  # no-op values
        assert len(quiet.calls) == 0 and len(loud.calls) == 1
        t.set_column("x", [9.0, 9.0, 9.0, 9.0])
        assert len(quiet.calls) == 1 and len(loud.calls) == 2


class TestSetColumn:
    def test_transform_fires_watchers(self, cars_table, counting_listener):
        cb = counting_listener()
        cars_table.add_listener(cb, watched={"dist"})
        cars_table.set_column("dist", np.sqrt(cars_table.values("dist")))
        assert len(cb.calls) == 1
        assert cb.calls[0].rows is ALL_ROWS
        assert cb.calls[0].values_changed

    def test_identical_assignment_still_fires(self, counting_listener):
        t = small_table()
        cb = counting_listener()
        t.add_listener(cb, watched={"x"})
        t.set_column("x", t.values("x"))
        assert len(cb.calls) == 1
        assert not cb.calls[0].values_changed

    def test_streaming_reassignment_one_notice_each(self, counting_listener):
        t = small_table()
        cb = counting_listener()
        t.add_listener(cb, watched={"x", "y"})
        rng = np.random.default_rng(0)
        for _ in range(10):
            t.set_column("x", rng.normal(size=4))
        assert len(cb.calls) == 10

    def test_length_mismatch_rejected(self):
        t = small_table()
        with pytest.raises(ValueError):
            t.set_column("x", [1.0, 2.0])

    def test_type_mismatch_rejected(self):
        t = small_table()
        with pytest.raises(ValueError):
            t.set_column("x", ["a", "b", "c", "d"])


class TestSetCells:
    def test_targeted_rows(self, counting_listener):
        t = small_table()
        cb = counting_listener()
        t.add_listener(cb, watched={"x"})
        t.set_cells("x", [1, 2], [99.0, 98.0])
        assert t.values("x").tolist() == [1.0, 99.0, 98.0, 4.0]
        assert cb.calls[0].rows.tolist() == [1, 2]

    def test_empty_rows_noop(self, counting_listener):
        t = small_table()
        cb = counting_listener()
        t.add_listener(cb)
        t.set_cells("x", [], [])
        assert cb.calls == []

    def test_out_of_range_rejected(self):
        t = small_table()
        with pytest.raises(IndexError):
            t.set_cells("x", [4], [0.0])

    def test_unsorted_rows_align_with_values(self):
        t = small_table()
        t.set_cells("x", [3, 0], [30.0, 0.5])
        assert t.values("x").tolist() == [0.5, 2.0, 3.0, 30.0]


class TestSetBrushed:
    def test_replace_first_four(self, cars_table):
        cars_table.set_brushed([0, 1, 2, 3], "replace")
        assert cars_table.brushed_rows().tolist() == [0, 1, 2, 3]

    def test_replace_supersedes(self, cars_table):
        cars_table.set_brushed([0, 1, 2, 3], "replace")
        cars_table.set_brushed(list(range(9, 28)), "replace")
        assert cars_table.brushed_rows().tolist() == list(range(9, 28))

    def test_toggle_all_true_rows(self):
        t = small_table()
        t.set_brushed([0, 1, 2, 3], "replace")
        t.set_brushed([0, 1, 2, 3], "toggle")
        assert not t.brushed.any()

    def test_union_and_intersect(self):
        t = small_table()
        t.set_brushed([0, 1], "replace")
        t.set_brushed([1, 2], "union")
        assert t.brushed_rows().tolist() == [0, 1, 2]
        t.set_brushed([1, 3], "intersect")
        assert t.brushed_rows().tolist() == [1]

    def test_notice_rows_are_flips(self, counting_listener):
        t = small_table()
        cb = counting_listener()
        t.add_listener(cb, watched={BRUSH_COL})
        t.set_brushed([0, 1], "replace")
        assert cb.calls[0].rows is ALL_ROWS
        t.set_brushed([1, 2], "union")
        assert cb.calls[1].rows.tolist() == [2]
        t.set_brushed([0, 1, 2], "union")  # nothing flips, assignment still fires
        assert len(cb.calls) == 3
        assert cb.calls[2].rows.size == 0
        assert not cb.calls[2].values_changed

    def test_bad_mode_rejected(self):
        t = small_table()
        with pytest.raises(ValueError):
            t.set_brushed([0], "xor")

    def test_invalid_row_rejected(self):
        t = small_table()
        with pytest.raises(IndexError):
            t.set_brushed([17], "replace")


class TestTransaction:
    def test_two_columns_one_notice(self, counting_listener):
        t = small_table()
        cb = counting_listener()
        t.add_listener(cb)
        with t.transaction():
            t.set_column("x", [0.0] * 4)
            t.set_column("y", [1.0] * 4)
        assert len(cb.calls) == 1
        assert cb.calls[0].columns == frozenset({"x", "y"})

    def test_empty_transaction_silent(self, counting_listener):
        t = small_table()
        cb = counting_listener()
        t.add_listener(cb)
        with t.transaction():
            pass
        assert cb.calls == []

    def test_brush_and_color_coalesce(self, counting_listener):
        t = small_table()
        cb = counting_listener()
        t.add_listener(cb)
        with t.transaction():
            t.set_brushed([0], "replace")
            t.set_cells(COLOR_COL, [0], ["#ff0000"])
        assert len(cb.calls) == 1
        assert cb.calls[0].columns == frozenset({BRUSH_COL, COLOR_COL})

    def test_nested_transactions_flatten(self, counting_listener):
        t = small_table()
        cb = counting_listener()
        t.add_listener(cb)
        with t.transaction():
            t.set_column("x", [0.0] * 4)
            with t.transaction():
                t.set_column("y", [0.0] * 4)
        assert len(cb.calls) == 1

    def test_coalescing_vs_unbatched(self, counting_listener):
        t = small_table()
        cb = counting_listener()
        t.add_listener(cb, watched={"x"})
        for _ in range(5):
            t.set_column("x", [1.0] * 4)
        assert len(cb.calls) == 5
        with t.transaction():
            for _ in range(5):
                t.set_column("x", [2.0] * 4)
        assert len(cb.calls) == 6


class TestSubsetView:
    def test_child_write_reaches_parent(self, cars_table):
        child = cars_table.subset_view(range(9, 28))
        child.set_brushed([0], "replace")
        # index-map oracle: child row 0 is parent row 9
        assert cars_table.brushed_rows().tolist() == [9]

    def test_parent_write_reaches_child(self, cars_table):
        child = cars_table.subset_view(range(9, 28))
        cars_table.set_brushed([9], "replace")
        assert child.brushed_rows().tolist() == [0]

    def test_identity_child_matches_parent(self, cars_table):
        child = cars_table.subset_view(range(cars_table.nrow))
        child.set_brushed([5, 6], "replace")
        assert cars_table.brushed_rows().tolist() == [5, 6]
        assert child.brushed_rows().tolist() == [5, 6]

    def test_invalid_rows_rejected(self, cars_table):
        with pytest.raises(IndexError):
            cars_table.subset_view([50])
        with pytest.raises(ValueError):
            cars_table.subset_view([1, 1])

    def test_child_listener_sees_parent_change(self, cars_table, counting_listener):
        child = cars_table.subset_view([10, 20, 30])
        cb = counting_listener()
        child.add_listener(cb, watched={BRUSH_COL})
        cars_table.set_brushed([20], "replace")
        assert len(cb.calls) == 1
        cars_table.set_cells("dist", [5], [1.0])  # outside the child: silent
        assert len(cb.calls) == 1

    def test_column_write_through(self, cars_table):
        child = cars_table.subset_view([0, 1])
        child.set_column("speed", [100.0, 200.0])
        assert cars_table.values("speed")[:2].tolist() == [100.0, 200.0]

    def test_subset_round_trip_matches_mapped_mutation(self, cars_table):
        rowmap = [3, 7, 11, 19, 42]
        child = cars_table.subset_view(rowmap)
        subset = [0, 2, 4]
        child.set_brushed(subset, "replace")
        mapped = sorted(rowmap[i] for i in subset)
        assert cars_table.brushed_rows().tolist() == mapped
        # same outcome as mutating the parent directly from a clean state
        cars_table.set_brushed([], "replace")
        cars_table.set_brushed(mapped, "replace")
        assert cars_table.brushed_rows().tolist() == mapped


# -- property tests ---------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(
    ops=st.lists(
        st.tuples(
            st.sampled_from(["set_column", "set_cells", "set_brushed", "toggle"]),
            st.integers(0, 9),
        ),
        max_size=12,
    )
)
def test_column_lengths_invariant_under_random_ops(ops):
    t = augment({"x": list(np.arange(10.0)), "s": list("abcabcabca")})
    for op, row in ops:
        if op == "set_column":
            t.set_column("x", np.full(10, float(row)))
        elif op == "set_cells":
            t.set_cells("x", [row], [float(row)])
        elif op == "set_brushed":
            t.set_brushed([row], "replace")
        else:
            t.set_brushed([row], "toggle")
        for name in t.column_names():
            assert len(t.column(name)) == t.nrow
            assert len(t.column(name).missing) == t.nrow


@settings(max_examples=60, deadline=None)
@given(
    watched=st.sets(st.sampled_from(["x", "y", BRUSH_COL, COLOR_COL]), min_size=1),
    target=st.sampled_from(["x", "y", BRUSH_COL, COLOR_COL]),
)
def test_notification_exactness(watched, target):
    t = small_table()
    calls = []
    t.add_listener(lambda n: calls.append(n), watched=watched)
    if target == BRUSH_COL:
        t.set_brushed([0], "replace")
    elif target == COLOR_COL:
        t.set_cells(COLOR_COL, [0], ["#123456"])
    else:
        t.set_cells(target, [0], [123.0])
    assert len(calls) == (1 if target in watched else 0)


@settings(max_examples=40, deadline=None)
@given(
    rowmap=st.lists(st.integers(0, 49), min_size=1, max_size=20, unique=True),
    pick=st.data(),
)
def test_subset_round_trip_property(rowmap, pick):
    table = augment({"v": list(np.arange(50.0))})
    child = table.subset_view(rowmap)
    subset = pick.draw(st.sets(st.integers(0, len(rowmap) - 1)))
    child.set_brushed(sorted(subset), "replace")
    expected = sorted(rowmap[i] for i in subset)
    assert table.brushed_rows().tolist() == expected
    assert child.brushed_rows().tolist() == sorted(subset)
