import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpcat import (
    CategorySpace,
    Database,
    DatabaseSet,
    DataFormatError,
    EnumerationBudgetError,
    LengthMismatchError,
    NeighborPair,
    database_from_index,
    database_index,
    enumerate_databases,
    enumerate_neighbor_pairs,
    hamming_distance,
    load_category_space,
    load_database_csv,
    naive_check_count,
    neighbor_pair_count,
)
from conftest import make_space

import _oracles


class TestHamming:
    def test_single_differing_row(self):
        assert hamming_distance(Database((0, 1)), Database((2, 1))) == 1

    def test_identical(self):
        d = Database((1, 0, 2))
        assert hamming_distance(d, d) == 0

    def test_all_rows_differ(self):
        assert hamming_distance(Database((0, 1)), Database((2, 0))) == 2

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            hamming_distance(Database((0,)), Database((0, 1)))

    @given(st.data())
    @settings(max_examples=200, deadline=None)
    def test_metric_axioms(self, data):
        m = data.draw(st.integers(1, 4))
        n = data.draw(st.integers(1, 5))
        rows = st.tuples(*[st.integers(0, m)] * n)
        a, b, c = (Database(data.draw(rows)) for _ in range(3))
        assert hamming_distance(a, a) == 0
        assert (hamming_distance(a, b) == 0) == (a == b)
        assert hamming_distance(a, b) == hamming_distance(b, a)
        assert (hamming_distance(a, c)
                <= hamming_distance(a, b) + hamming_distance(b, c))


class TestEnumeration:
    def test_counts(self, space3):
        assert len(list(enumerate_databases(space3, 2))) == 9
        assert len(list(enumerate_databases(make_space(4), 6))) == 5 ** 6

    def test_two_categories_one_row(self):
        dbs = list(enumerate_databases(make_space(1), 1))
        assert [d.rows for d in dbs] == [(0,), (1,)]

    def test_lexicographic_row0_most_significant(self, space3):
        dbs = [d.rows for d in enumerate_databases(space3, 2)]
        assert dbs[:4] == [(0, 0), (0, 1), (0, 2), (1, 0)]
        assert dbs == sorted(dbs)

    def test_order_is_stable(self, space3):
        first = [d.rows for d in enumerate_databases(space3, 3)]
        second = [d.rows for d in enumerate_databases(space3, 3)]
        assert first == second

    def test_budget_error_names_size(self):
        with pytest.raises(EnumerationBudgetError) as err:
            list(enumerate_databases(make_space(9), 8, budget=10 ** 6))
        assert err.value.count == 10 ** 8
        assert "100000000" in str(err.value)

    @given(st.integers(1, 4), st.integers(1, 4), st.data())
    @settings(max_examples=100, deadline=None)
    def test_index_round_trip(self, m, n, data):
        space = make_space(m)
        idx = data.draw(st.integers(0, (m + 1) ** n - 1))
        assert database_index(space, database_from_index(space, n, idx)) == idx


class TestNeighborPairs:
    def test_counts(self, space3):
        assert len(list(enumerate_neighbor_pairs(space3, 2))) == 36
        assert len(list(enumerate_neighbor_pairs(make_space(1), 1))) == 2
        assert len(list(enumerate_neighbor_pairs(space3, 3))) == 162
        assert neighbor_pair_count(space3, 3) == 2 * 3 * 27

    def test_pairs_are_distance_one_and_unique(self, space3):
        pairs = list(enumerate_neighbor_pairs(space3, 2))
        seen = set()
        for pair in pairs:
            assert hamming_distance(pair.d, pair.d_prime) == 1
            assert pair.d.rows[pair.differing_row] != \
                pair.d_prime.rows[pair.differing_row]
            seen.add((pair.d.rows, pair.d_prime.rows))
        assert len(seen) == len(pairs)

    def test_both_orientations_present(self, space3):
        pairs = {(p.d.rows, p.d_prime.rows)
                 for p in enumerate_neighbor_pairs(space3, 2)}
        assert all((b, a) in pairs for a, b in pairs)

    def test_matches_reference_enumeration(self):
        pairs = [(p.d.rows, p.d_prime.rows)
                 for p in enumerate_neighbor_pairs(make_space(3), 2)]
        assert sorted(pairs) == sorted(_oracles.ordered_neighbor_pairs(4, 2))

    def test_invalid_pair_rejected(self):
        with pytest.raises(DataFormatError):
            NeighborPair(Database((0, 0)), Database((1, 1)), 0)
        with pytest.raises(DataFormatError):
            NeighborPair(Database((0, 0)), Database((0, 1)), 0)


class TestNaiveCheckCount:
    def test_three_categories_two_rows(self, space3):
        assert naive_check_count(space3, 2) == 18360

    def test_smallest_space(self):
        assert naive_check_count(make_space(1), 1) == 1 * 1 * 2 * (2 ** 2 - 2)

    def test_exceeds_64_bits(self, space3):
        assert naive_check_count(space3, 3) == 162 * (2 ** 27 - 2)
        assert naive_check_count(make_space(2), 5) \
            == 5 * 2 * 243 * (2 ** 243 - 2)


class TestTypes:
    def test_space_validation(self):
        with pytest.raises(DataFormatError):
            CategorySpace(("only",))
        with pytest.raises(DataFormatError):
            CategorySpace(("a", "a"))

    def test_database_set_canonical(self, space3):
        s = DatabaseSet(space3, 2, (4, 1, 4, 0))
        assert s.indices == (0, 1, 4)
        assert s.mask() == 0b10011
        assert Database((0, 1)) in s
        assert len(s) == 3

    def test_database_set_from_databases(self, space3):
        s = DatabaseSet.from_databases(space3, 2,
                                       [Database((0, 1)), Database((2, 0))])
        assert [d.rows for d in s.databases()] == [(0, 1), (2, 0)]


class TestLoaders:
    def test_category_file(self, tmp_path):
        path = tmp_path / "cats.txt"
        path.write_text("red\ngreen\n\nblue\n")
        space = load_category_space(path)
        assert space.labels == ("red", "green", "blue")
        assert space.m == 2

    def test_duplicate_labels_rejected(self, tmp_path):
        path = tmp_path / "cats.txt"
        path.write_text("red\nred\n")
        with pytest.raises(DataFormatError):
            load_category_space(path)

    def test_csv_headerless_first_column(self, tmp_path):
        space = CategorySpace(("red", "green", "blue"))
        path = tmp_path / "data.csv"
        path.write_text("red,junk\nblue,junk\n")
        assert load_database_csv(path, space).rows == (0, 2)

    def test_csv_named_column_implies_header(self, tmp_path):
        space = CategorySpace(("red", "green", "blue"))
        path = tmp_path / "data.csv"
        path.write_text("id,colour\n1,green\n2,red\n")
        assert load_database_csv(path, space, column="colour").rows == (1, 0)

    def test_unknown_label_names_row(self, tmp_path):
        space = CategorySpace(("red", "green"))
        path = tmp_path / "data.csv"
        path.write_text("red\nmagenta\n")
        with pytest.raises(DataFormatError, match="row 2.*magenta"):
            load_database_csv(path, space)

    def test_missing_column_rejected(self, tmp_path):
        space = CategorySpace(("red", "green"))
        path = tmp_path / "data.csv"
        path.write_text("id,colour\n1,red\n")
        with pytest.raises(DataFormatError, match="shade"):
            load_database_csv(path, space, column="shade")
