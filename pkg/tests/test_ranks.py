"""Rank search, greedy bounds, and independent sets, with brute-force oracles."""

from itertools import combinations, product

import pytest

from biasrank.bias import analytic_rank, bias_fiber
from biasrank.gf import PrimeField, matrix_rank
from biasrank.ranks import (
    candidate_terms,
    greedy_decomposition,
    is_independent_set,
    max_independent_set,
    prank_lower_bound,
    rank_bounds,
    rank_exact,
    rank_upper_greedy,
)
from biasrank.rng import substream
from biasrank.tensor import (
    Tensor,
    all_tensors,
    from_entries,
    identity_tensor,
    random_tensor,
    zero_tensor,
)

F2 = PrimeField(2)
F3 = PrimeField(3)


def oracle_max_independent_set(t):
    """Exhaustive subset enumeration (sound for n <= 12)."""
    best = ()
    for size in range(t.dim, 0, -1):
        found = None
        for subset in combinations(range(t.dim), size):
            if is_independent_set(t, subset):
                found = subset
                break
        if found:
            best = found
            break
    return best


def make_partition_rank_one(field, n, seed):
    """L(x^1) * B(x^2, x^3) from seeded nonzero factors."""
    gen = substream(seed, 0)
    while True:
        lin = tuple(gen.below(field.p) for _ in range(n))
        if any(lin):
            break
    while True:
        mat = tuple(gen.below(field.p) for _ in range(n * n))
        if any(mat):
            break
    entries = []
    for i in range(n):
        if not lin[i]:
            continue
        for j in range(n):
            for k in range(n):
                c = lin[i] * mat[j * n + k] % field.p
                if c:
                    entries.append(((i, j, k), c))
    return from_entries(field, n, 3, entries)


class TestExactSearch:
    def test_zero_tensor_all_kinds(self):
        t = zero_tensor(F2, 2, 3)
        for kind in ("rank", "srank", "prank"):
            report = rank_exact(t, kind)
            assert report.exact and report.value == 0

    def test_partition_rank_one_detected(self):
        for seed in range(10):
            t = make_partition_rank_one(F2, 2, seed)
            report = rank_exact(t, "prank")
            assert report.value == 1

    def test_identity_prank_is_dimension(self):
        report = rank_exact(identity_tensor(F2, 2, 3), "prank")
        assert report.exact and report.value == 2
        assert len(report.certificate) == 2

    def test_certificates_resum(self):
        for trial in range(20):
            t = random_tensor(F2, 2, 3, substream(88, trial).next_u64())
            for kind in ("rank", "srank", "prank"):
                report = rank_exact(t, kind)
                assert report.exact
                total = zero_tensor(F2, 2, 3)
                for term in report.certificate:
                    total = total + term.expand()
                assert total == t

    def test_rank_ordering_exhaustive_cube(self):
        for t in all_tensors(F2, 2, 3):
            prank = rank_exact(t, "prank").value
            srank = rank_exact(t, "srank").value
            rank = rank_exact(t, "rank").value
            assert prank <= srank <= rank
            assert prank == srank  # order 3: bipartitions have a singleton side

    def test_order_two_equals_matrix_rank(self):
        for t in all_tensors(F2, 2, 2):
            rows = [t.coeffs[0:2], t.coeffs[2:4]]
            expected = matrix_rank(F2, rows)
            for kind in ("rank", "srank", "prank"):
                assert rank_exact(t, kind).value == expected

    def test_budget_exhaustion_returns_interval(self):
        t = random_tensor(F3, 2, 3, 5)
        report = rank_exact(t, "prank", budget=100)
        # no search happened: bounds come from the analytic rank and greedy,
        # and the value is exact only when they happen to coincide
        assert report.lower_source == "analytic-rank"
        assert report.upper_source == "greedy"
        assert report.lower <= report.upper
        assert report.exact == (report.lower == report.upper)
        tiny = rank_exact(t, "prank", budget=10)
        assert not tiny.exact and tiny.lower_source == "trivial"
        with pytest.raises(ValueError):
            tiny.value

    def test_envelope_cap_refuses_oversized_search(self):
        t = random_tensor(F3, 3, 3, 1)
        report = rank_exact(t, "prank")
        assert report.lower_source in ("analytic-rank", "trivial")
        assert report.upper_source == "greedy"


class TestGreedy:
    def test_zero(self):
        assert rank_upper_greedy(zero_tensor(F2, 2, 3), "prank") == 0

    def test_probe_finds_rank_one(self):
        for seed in range(10):
            t = make_partition_rank_one(F3, 2, seed)
            assert rank_upper_greedy(t, "prank") == 1

    def test_greedy_at_least_exact(self):
        for trial in range(25):
            t = random_tensor(F2, 2, 3, substream(123, trial).next_u64())
            for kind in ("rank", "srank", "prank"):
                exact = rank_exact(t, kind).value
                assert rank_upper_greedy(t, kind) >= exact

    def test_identity_greedy_equals_dimension(self):
        assert rank_upper_greedy(identity_tensor(F2, 2, 3), "prank") == 2
        assert rank_upper_greedy(identity_tensor(F2, 5, 3), "prank") == 5

    def test_matrix_peel_is_exact(self):
        for trial in range(20):
            t = random_tensor(F3, 3, 2, substream(321, trial).next_u64())
            rows = [t.coeffs[i * 3:(i + 1) * 3] for i in range(3)]
            assert rank_upper_greedy(t, "rank") == matrix_rank(F3, rows)

    def test_full_rank_probe(self):
        # product of three linear forms has rank 1
        entries = []
        for i, j, k in product(range(2), repeat=3):
            c = (i + 1) * (j + 1) * (k + 1) % 3  # (1,2)x(1,2)x(1,2) outer cube
            if c:
                entries.append(((i, j, k), c))
        t = from_entries(F3, 2, 3, entries)
        assert rank_upper_greedy(t, "rank") == 1


class TestBoundsReport:
    def test_identity_bounds(self):
        report = rank_bounds(identity_tensor(F2, 5, 3), "prank")
        assert report.lower == 3  # ceil(5 * c(3,2)) = ceil(2.075)
        assert report.upper == 5
        assert report.lower_source == "analytic-rank"
        assert report.upper_source == "greedy"

    def test_lower_bound_sound_on_cube(self):
        for t in all_tensors(F2, 2, 3):
            exact = rank_exact(t, "prank").value
            if t.is_zero():
                continue
            report = rank_bounds(t, "prank")
            assert report.lower <= exact <= report.upper


class TestPrankLowerBound:
    def test_zero_tensor(self):
        assert prank_lower_bound(zero_tensor(F2, 2, 3)) == 0.0

    def test_identity_value(self):
        from biasrank.bias import c_constant
        value = prank_lower_bound(identity_tensor(F2, 3, 3))
        assert abs(value - 3 * c_constant(3, 2)) < 1e-9

    def test_never_exceeds_exact_prank(self):
        for t in all_tensors(F2, 2, 3):
            exact = rank_exact(t, "prank").value
            assert prank_lower_bound(t) <= exact + 1e-12


class TestIndependentSets:
    def test_identity_full_set(self):
        t = identity_tensor(F2, 3, 3)
        assert is_independent_set(t, range(3))
        assert max_independent_set(t) == (0, 1, 2)

    def test_zero_tensor(self):
        t = zero_tensor(F2, 3, 3)
        assert not is_independent_set(t, (0,))
        assert is_independent_set(t, ())
        assert max_independent_set(t) == ()

    def test_singleton_iff_diagonal_nonzero(self):
        t = from_entries(F3, 3, 3, [((1, 1, 1), 2)])
        assert is_independent_set(t, (1,))
        assert not is_independent_set(t, (0,))

    def test_off_diagonal_conflict(self):
        entries = [((0, 0, 0), 1), ((1, 1, 1), 1), ((0, 1, 1), 1)]
        t = from_entries(F2, 2, 3, entries)
        assert not is_independent_set(t, (0, 1))
        assert max_independent_set(t) in ((0,), (1,))
        assert max_independent_set(t) == (0,)  # lexicographic tie-break

    @pytest.mark.parametrize("p,n,d", [(2, 5, 3), (3, 4, 3), (2, 6, 2)])
    def test_matches_exhaustive_oracle(self, p, n, d):
        field = PrimeField(p)
        for trial in range(20):
            t = random_tensor(field, n, d, substream(777 * p + n, trial).next_u64())
            found = max_independent_set(t)
            oracle = oracle_max_independent_set(t)
            assert len(found) == len(oracle)
            assert is_independent_set(t, found)

    def test_larger_instance(self):
        t = identity_tensor(F2, 12, 3)
        assert max_independent_set(t) == tuple(range(12))

    def test_rejects_bad_indices(self):
        t = identity_tensor(F2, 2, 2)
        with pytest.raises(ValueError):
            is_independent_set(t, (0, 5))
        with pytest.raises(ValueError):
            is_independent_set(t, (0, 0))


class TestCandidates:
    def test_arrays_unique_and_sorted(self):
        terms = candidate_terms(F2, 2, 3, "prank", max_candidates=10 ** 6)
        arrays = [term.tensor.coeffs for term in terms]
        assert len(arrays) == len(set(arrays))
        assert arrays == sorted(arrays)

    def test_every_candidate_verifies_rank_one(self):
        for kind in ("rank", "srank", "prank"):
            for term in candidate_terms(F2, 2, 3, kind, max_candidates=10 ** 6):
                assert rank_upper_greedy(term.tensor, kind) == 1

    def test_slice_candidates_subset_of_partition(self):
        slice_arrays = {t.tensor.coeffs
                        for t in candidate_terms(F3, 2, 3, "srank", max_candidates=10 ** 6)}
        partition_arrays = {t.tensor.coeffs
                            for t in candidate_terms(F3, 2, 3, "prank", max_candidates=10 ** 6)}
        assert slice_arrays <= partition_arrays


class TestRankInequalitiesOnCube:
    def test_arank_below_prank_exhaustive(self):
        q = 2
        for t in all_tensors(F2, 2, 3):
            b = bias_fiber(t)
            prank = rank_exact(t, "prank").value
            # bias >= q^-prank, cross-multiplied
            assert b.numerator * q ** prank >= q ** b.exponent

    def test_independent_set_bound_exhaustive(self):
        for t in all_tensors(F2, 2, 3):
            size = len(max_independent_set(t))
            rank = analytic_rank(bias_fiber(t))
            assert rank.value >= 2 ** (-3) * size - 1e-12
