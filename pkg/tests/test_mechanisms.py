import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpcat import (
    Database,
    DataFormatError,
    EnumerationBudgetError,
    ExponentialSpec,
    HammingUtility,
    IncompleteUtilityError,
    NegL1Utility,
    ParameterRangeError,
    ProductSpec,
    SolutionMatrix,
    TableUtility,
    database_from_index,
    enumerate_databases,
    exp_norm_constant,
    exp_pmf,
    hamming_distance,
    make_symmetric_product,
    product_pmf,
    sample,
    symmetric_matrix,
)
from conftest import make_space

import _oracles


class TestExponentialPmf:
    def test_zero_weight_is_uniform(self, space3):
        spec = ExponentialSpec(space3, 2, HammingUtility(0.0))
        for d_prime in enumerate_databases(space3, 2):
            assert exp_pmf(spec, Database((0, 1)), d_prime) \
                == pytest.approx(1 / 9)

    @pytest.mark.parametrize("m,n,k", [(1, 1, 0.3), (2, 2, 1.0), (3, 2, 0.25),
                                       (2, 3, 2.0)])
    def test_self_probability_closed_form(self, m, n, k):
        # reference: direct normalisation of e^{-k h} over the whole space
        table = _oracles.pmf_table_from_utility(
            m + 1, n, lambda a, b: -k * _oracles.hamming(a, b))
        spec = ExponentialSpec(make_space(m), n, HammingUtility(k))
        d = Database((0,) * n)
        expect = (1 + m * math.exp(-k)) ** -n
        assert exp_pmf(spec, d, d) == pytest.approx(expect, abs=1e-15)
        assert table[d.rows][d.rows] == pytest.approx(expect, abs=1e-15)

    def test_l1_matches_direct_normalisation(self, l1_spec, space3):
        table = _oracles.pmf_table_from_utility(
            3, 2, lambda a, b: -sum(abs(x - y) for x, y in zip(a, b)))
        for d in enumerate_databases(space3, 2):
            for d_prime in enumerate_databases(space3, 2):
                assert exp_pmf(l1_spec, d, d_prime) == pytest.approx(
                    table[d.rows][d_prime.rows], abs=1e-14)

    def test_monotone_in_distance(self, space3):
        spec = ExponentialSpec(space3, 2, HammingUtility(0.8))
        d = Database((1, 1))
        by_h = {}
        for d_prime in enumerate_databases(space3, 2):
            by_h.setdefault(hamming_distance(d, d_prime), set()).add(
                exp_pmf(spec, d, d_prime))
        assert all(len(v) == 1 for v in by_h.values())
        probs = [by_h[h].pop() for h in sorted(by_h)]
        assert probs == sorted(probs, reverse=True)
        assert probs[0] > probs[1] > probs[2]

    def test_no_noise_endpoint(self, space3):
        spec = ExponentialSpec(space3, 2, HammingUtility(math.inf))
        d = Database((2, 0))
        assert exp_pmf(spec, d, d) == 1.0
        assert exp_pmf(spec, d, Database((2, 1))) == 0.0

    def test_scales_without_enumeration(self):
        # hamming pmf has a closed form; n = 60 must not enumerate 2^60 states
        spec = ExponentialSpec(make_space(1), 60, HammingUtility(1.0))
        d = Database((0,) * 60)
        assert exp_pmf(spec, d, d) == pytest.approx(
            (1 + math.exp(-1)) ** -60)

    def test_row_normalisation(self, l1_spec):
        for i in range(9):
            assert float(l1_spec.pmf_row(i).sum()) == pytest.approx(1.0,
                                                                    abs=1e-9)


class TestNormConstant:
    def test_uniform_prefactor(self, space3):
        spec = ExponentialSpec(space3, 2, HammingUtility(0.0))
        assert exp_norm_constant(spec, Database((1, 2))) \
            == pytest.approx(1 / 9)

    def test_k_log2_prefactor_quarter(self, space3):
        # independent check: sum e^{-k h} over all 9 databases, then invert
        k = math.log(2)
        total = sum(math.exp(-k * _oracles.hamming((0, 1), x))
                    for x in _oracles.all_dbs(3, 2))
        assert 1 / total == pytest.approx(1 / 4, abs=1e-15)
        spec = ExponentialSpec(space3, 2, HammingUtility(k))
        assert exp_norm_constant(spec, Database((0, 1))) \
            == pytest.approx(1 / 4, abs=1e-15)

    def test_l1_prefactor_matches_exhaustive_sum(self, l1_spec):
        d = Database((0, 1))
        total = sum(math.exp(-sum(abs(x - y) for x, y in zip((0, 1), b)))
                    for b in _oracles.all_dbs(3, 2))
        assert exp_norm_constant(l1_spec, d) == pytest.approx(1 / total,
                                                              abs=1e-15)

    def test_prefactor_orientation(self, l1_spec):
        # pmf(d, d') must equal prefactor * e^u exactly by construction
        d, d_prime = Database((0, 1)), Database((2, 2))
        u = NegL1Utility().value(d, d_prime)
        assert exp_pmf(l1_spec, d, d_prime) == pytest.approx(
            exp_norm_constant(l1_spec, d) * math.exp(u), rel=1e-12)


class TestProduct:
    def test_hobby_example_parent_probabilities(self):
        space = make_space(4)
        spec = make_symmetric_product(space, 1, 0.1)
        tv, cars = Database((2,)), Database((1,))
        assert product_pmf(spec, tv, tv) == pytest.approx(0.6)
        assert product_pmf(spec, tv, cars) == pytest.approx(0.1)

    def test_identity_matrix(self, space3):
        spec = ProductSpec(space3, 2, SolutionMatrix(np.eye(3)))
        d = Database((1, 2))
        for d_prime in enumerate_databases(space3, 2):
            assert product_pmf(spec, d, d_prime) == (1.0 if d_prime == d
                                                     else 0.0)

    @given(st.integers(1, 3), st.integers(1, 3), st.floats(0.01, 0.24),
           st.data())
    @settings(max_examples=100, deadline=None)
    def test_symmetric_pmf_depends_only_on_distance(self, m, n, p, data):
        p = min(p, 1 / (m + 1))
        spec = make_symmetric_product(make_space(m), n, p)
        rows = st.tuples(*[st.integers(0, m)] * n)
        d = Database(data.draw(rows))
        d_prime = Database(data.draw(rows))
        h = hamming_distance(d, d_prime)
        assert product_pmf(spec, d, d_prime) == pytest.approx(
            (1 - p * m) ** (n - h) * p ** h)

    def test_pmf_row_matches_reference_table(self, space3):
        matrix = [[0.5, 0.3, 0.2], [0.1, 0.8, 0.1], [0.25, 0.25, 0.5]]
        spec = ProductSpec(space3, 2, SolutionMatrix(np.array(matrix)))
        table = _oracles.product_pmf_table(matrix, 2)
        for i in range(9):
            d = database_from_index(space3, 2, i)
            row = spec.pmf_row(i)
            for j in range(9):
                d_prime = database_from_index(space3, 2, j)
                assert row[j] == pytest.approx(table[d.rows][d_prime.rows],
                                               abs=1e-15)

    def test_symmetric_matrix_construction(self):
        mat = symmetric_matrix(4, 0.1)
        assert np.allclose(np.diag(mat.values), 0.6)
        assert mat.symmetric_p() == pytest.approx(0.1)
        uniform = symmetric_matrix(4, 1 / 5)
        assert np.allclose(uniform.values, 0.2)
        identity = symmetric_matrix(4, 0.0)
        assert np.array_equal(identity.values, np.eye(5))

    def test_flip_probability_range(self):
        with pytest.raises(ParameterRangeError, match="1/\\(m\\+1\\)"):
            make_symmetric_product(make_space(4), 2, 0.25)
        with pytest.raises(ParameterRangeError):
            make_symmetric_product(make_space(4), 2, -0.01)

    def test_exact_fraction_entries(self):
        mat = symmetric_matrix(3, Fraction(1, 10))
        assert mat.fractions()[0][0] == Fraction(7, 10)
        assert mat.fractions()[0][1] == Fraction(1, 10)

    def test_exact_rows_sum_to_one(self, space3):
        spec = make_symmetric_product(space3, 2, Fraction(1, 5))
        for i in range(9):
            assert sum(spec.exact_pmf_row(i)) == 1


class TestEquivalence:
    @pytest.mark.parametrize("m,n", [(1, 1), (2, 2), (3, 2)])
    def test_pmf_tables_identical_under_conversion(self, m, n):
        rng = np.random.default_rng(m * 10 + n)
        space = make_space(m)
        for _ in range(10):
            p = float(rng.uniform(0.02, 1 / (m + 1)))
            k = math.log(1 / p - m)
            pspec = make_symmetric_product(space, n, p)
            espec = ExponentialSpec(space, n, HammingUtility(k))
            for i in range((m + 1) ** n):
                np.testing.assert_allclose(pspec.pmf_row(i),
                                           espec.pmf_row(i), atol=1e-12,
                                           rtol=0)


class TestSolutionMatrix:
    def test_row_sum_validation(self):
        with pytest.raises(DataFormatError, match="row 1"):
            SolutionMatrix(np.array([[0.5, 0.5], [0.6, 0.5]]))

    def test_entry_range_validation(self):
        with pytest.raises(DataFormatError):
            SolutionMatrix(np.array([[1.2, -0.2], [0.5, 0.5]]))

    def test_csv_round_trip(self, tmp_path):
        mat = symmetric_matrix(2, 0.123456789)
        buf = io.StringIO()
        mat.to_csv(buf)
        path = tmp_path / "m.csv"
        path.write_text(buf.getvalue())
        again = SolutionMatrix.from_csv(path)
        assert np.array_equal(again.values, mat.values)

    def test_csv_exact_mode_parses_fractions(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0.6,0.4\n0.4,0.6\n")
        mat = SolutionMatrix.from_csv(path, exact=True)
        assert mat.fractions()[0][0] == Fraction(3, 5)

    def test_symmetry_detection(self):
        assert symmetric_matrix(2, 0.2).is_symmetric()
        skew = SolutionMatrix(np.array([[0.6, 0.2, 0.2],
                                        [0.2, 0.6, 0.2],
                                        [0.2, 0.3, 0.5]]))
        assert not skew.is_symmetric()


class TestTableUtility:
    def test_shape_validation(self, space3):
        with pytest.raises(IncompleteUtilityError):
            TableUtility(space3, 2, np.zeros((9, 8)))

    def test_missing_mapping_entries(self, space3):
        mapping = {(Database((0, 0)), Database((0, 0))): -1.0}
        with pytest.raises(IncompleteUtilityError, match="80"):
            TableUtility.from_mapping(space3, 2, mapping)

    def test_full_mapping_round_trip(self):
        space = make_space(1)
        dbs = [Database((0,)), Database((1,))]
        mapping = {(a, b): -float(abs(a.rows[0] - b.rows[0]))
                   for a in dbs for b in dbs}
        utility = TableUtility.from_mapping(space, 1, mapping)
        assert utility.value(dbs[0], dbs[1]) == -1.0


class TestSampling:
    def test_identity_returns_input(self, space3, rng):
        spec = ProductSpec(space3, 4, SolutionMatrix(np.eye(3)))
        d = Database((0, 2, 1, 1))
        assert sample(spec, d, rng) == d

    def test_deterministic_under_seed(self, space3):
        spec = make_symmetric_product(space3, 50, 0.2)
        d = Database(tuple([0, 1, 2] * 17)[:50])
        out1 = sample(spec, d, np.random.default_rng(99))
        out2 = sample(spec, d, np.random.default_rng(99))
        assert out1 == out2

    def test_flip_rate_within_three_sigma(self, rng):
        m, p, n = 3, 0.15, 20000
        spec = make_symmetric_product(make_space(m), n, p)
        d = Database(tuple(rng.integers(0, m + 1, n)))
        out = sample(spec, d, rng)
        flips = hamming_distance(d, out)
        expect = p * m
        sigma = math.sqrt(expect * (1 - expect) / n)
        assert abs(flips / n - expect) <= 3 * sigma

    def test_hamming_error_rate_within_three_sigma(self, rng):
        # sampling a hamming spec goes through the equivalent flip matrix
        m, k, n = 2, 1.1, 20000
        spec = ExponentialSpec(make_space(m), n, HammingUtility(k))
        d = Database(tuple(rng.integers(0, m + 1, n)))
        out = sample(spec, d, rng)
        per_row = 1 / (1 + math.exp(k) / m)
        sigma = math.sqrt(per_row * (1 - per_row) / n)
        assert abs(hamming_distance(d, out) / n - per_row) <= 3 * sigma

    def test_general_utility_inverse_cdf(self, l1_spec, rng):
        counts = {}
        d = Database((0, 1))
        for _ in range(4000):
            out = sample(l1_spec, d, rng)
            counts[out.rows] = counts.get(out.rows, 0) + 1
        prob_self = exp_pmf(l1_spec, d, d)
        freq = counts[(0, 1)] / 4000
        sigma = math.sqrt(prob_self * (1 - prob_self) / 4000)
        assert abs(freq - prob_self) <= 4 * sigma

    def test_general_utility_budget(self):
        space = make_space(3)
        table = np.zeros((16, 16))
        spec = ExponentialSpec(space, 2, TableUtility(space, 2, table))
        with pytest.raises(EnumerationBudgetError):
            sample(spec, Database((0, 0)), np.random.default_rng(0),
                   budget=9)
