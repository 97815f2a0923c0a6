import math
import random

import pytest

from treeshift.counting import MODE_EXACT, MODE_LOG, block_counts
from treeshift.matrices import (
    BinaryMatrix,
    LogNonnegMatrix,
    is_primitive,
    product,
    spectral_radius,
)
from treeshift.oracle import brute_strip_counts, path_strip_region
from treeshift.ray import Ray, lambda_strip, period_sites, step_profile
from treeshift.sampling import random_primitive_matrix
from treeshift.transfer import (
    TAG_FREE_BRANCH,
    TAG_NO_BRANCH,
    TAG_OTHER,
    TAG_RESTRICTED_BRANCH,
    classify_golden_step,
    initial_strip_counts,
    period_matrix,
    step_matrix,
    strip_counts,
    strip_entropy_closed,
    strip_entropy_iterative,
)
from treeshift.tree import crt_preset, validate_tree

G = BinaryMatrix.golden()
PHI = (1 + 5**0.5) / 2

RAY_STRAIGHT = Ray((), (0,))
RAY_MIXED = Ray((), (0, 1))


def one_level_weight_matrix(tree, a, n):
    """a^T Hadamard B with b_st = sum_l a(s,l) * block(n-1)(l)."""
    beta = block_counts(tree, a, n - 1, MODE_EXACT).values
    k = a.dim
    rows = [
        [
            a.entry(i, s) * sum(a.entry(s, l) * beta[l] for l in range(k))
            for i in range(k)
        ]
        for s in range(k)
    ]
    return tuple(tuple(r) for r in rows)


def two_level_weight_matrix(tree, a, n):
    """a^T Hadamard B with b_st = sum_j (sum_l a(s,l) a(l,j)) * block(n-2)(j)."""
    beta = block_counts(tree, a, n - 2, MODE_EXACT).values
    k = a.dim
    rows = []
    for s in range(k):
        weight = sum(
            sum(a.entry(s, l) * a.entry(l, j) for l in range(k)) * beta[j]
            for j in range(k)
        )
        rows.append(tuple(a.entry(i, s) * weight for i in range(k)))
    return tuple(rows)


class TestStepMatrix:
    def test_no_branch_step_is_bare_transpose(self, golden_tree):
        for n in (1, 3, 6):
            step = step_matrix(golden_tree, G, RAY_MIXED, 2, n, MODE_EXACT)
            assert step.matrix.exact == G.transpose().rows

    @pytest.mark.parametrize("seed", [None, 0, 1])
    def test_free_branch_step_uses_one_level_counts(self, golden_tree, seed):
        a = G if seed is None else random_primitive_matrix(
            random.Random(seed).choice([2, 3]), random.Random(seed)
        )
        for n in range(1, 7):
            step = step_matrix(golden_tree, a, RAY_MIXED, 1, n, MODE_EXACT)
            assert step.matrix.exact == one_level_weight_matrix(golden_tree, a, n)

    @pytest.mark.parametrize("seed", [None, 0, 1])
    def test_restricted_branch_step_uses_two_level_counts(self, golden_tree, seed):
        a = G if seed is None else random_primitive_matrix(
            random.Random(seed).choice([2, 3]), random.Random(seed)
        )
        for n in range(2, 7):
            step = step_matrix(golden_tree, a, RAY_STRAIGHT, 1, n, MODE_EXACT)
            assert step.matrix.exact == two_level_weight_matrix(golden_tree, a, n)

    def test_support_is_adjacency_transpose(self, crt3_tree):
        for seed in range(4):
            rng = random.Random(seed)
            a = random_primitive_matrix(rng.choice([2, 3]), rng)
            for j in (1, 2, 3):
                step = step_matrix(crt3_tree, a, Ray((), (0, 1, 2)), j, 4, MODE_EXACT)
                assert step.matrix.support() == a.transpose()

    def test_golden_step_supports_primitive_for_primitive_a(self, golden_tree):
        for seed in range(4):
            rng = random.Random(10 + seed)
            a = random_primitive_matrix(rng.choice([2, 3]), rng)
            for ray, j in [(RAY_STRAIGHT, 1), (RAY_MIXED, 1), (RAY_MIXED, 2)]:
                step = step_matrix(golden_tree, a, ray, j, 4, MODE_EXACT)
                assert is_primitive(step.matrix.support())

    def test_log_mode_tracks_exact(self, golden_tree):
        for n in (2, 4):
            exact = step_matrix(golden_tree, G, RAY_STRAIGHT, 1, n, MODE_EXACT)
            logged = step_matrix(golden_tree, G, RAY_STRAIGHT, 1, n, MODE_LOG)
            for s in range(2):
                for i in range(2):
                    e = exact.matrix.exact[s][i]
                    if e == 0:
                        assert logged.matrix.logs[s, i] == float("-inf")
                    else:
                        assert logged.matrix.logs[s, i] == pytest.approx(
                            math.log(e), rel=1e-12
                        )

    def test_step_index_must_be_positive(self, golden_tree):
        with pytest.raises(ValueError):
            step_matrix(golden_tree, G, RAY_STRAIGHT, 0, 3)


class TestTwoTreeReduction:
    def test_step_matrix_reduces_to_block_count_form(self, two_tree):
        # on the full 2-tree every interior step has one off-branch and the
        # step matrix collapses to [[b, b], [b0, 0]] with b the total and b0
        # the first-symbol block count one level down
        for n in range(1, 9):
            beta = block_counts(two_tree, G, n - 1, MODE_EXACT).values
            expected = (
                (beta[0] + beta[1], beta[0] + beta[1]),
                (beta[0], 0),
            )
            for ray, j in [(RAY_STRAIGHT, 1), (RAY_MIXED, 1), (RAY_MIXED, 2)]:
                step = step_matrix(two_tree, G, ray, j, n, MODE_EXACT)
                assert step.matrix.exact == expected

    def test_reduced_closed_form_matches_pipeline(self, two_tree):
        for n in range(1, 9):
            beta = block_counts(two_tree, G, n - 1, MODE_EXACT).values
            reduced = LogNonnegMatrix.from_exact(
                [[beta[0] + beta[1], beta[0] + beta[1]], [beta[0], 0]]
            )
            by_hand = spectral_radius(reduced).rho_log / 2**n
            general = strip_entropy_closed(two_tree, G, RAY_STRAIGHT, n).value
            assert general == pytest.approx(by_hand, abs=1e-9)


class TestInitialCounts:
    def test_single_symbol(self, crt3_tree):
        one = BinaryMatrix.from_rows([[1]])
        assert initial_strip_counts(crt3_tree, one, Ray((), (0,)), 3, MODE_EXACT).values == (1,)

    def test_golden_mean_width_two(self, golden_tree):
        got = initial_strip_counts(golden_tree, G, RAY_STRAIGHT, 2, MODE_EXACT)
        assert got.values == (3, 2)

    @pytest.mark.parametrize("k", [2, 3])
    def test_full_shift_free_labeling(self, two_tree, k):
        ek = BinaryMatrix.full(k)
        for n in (1, 2, 4):
            lam = lambda_strip(two_tree, step_profile(two_tree, RAY_STRAIGHT, 0), n)
            got = initial_strip_counts(two_tree, ek, RAY_STRAIGHT, n, MODE_EXACT)
            assert got.values == (k ** (lam - 1),) * k


class TestStripCounts:
    @pytest.mark.parametrize(
        "prefix,period",
        [((), (0,)), ((), (0, 1)), ((1,), (0,))],
    )
    def test_exact_matches_oracle_golden(self, golden_tree, prefix, period):
        ray = Ray(prefix, period)
        for n in (2, 3):
            for m in range(0, 5):
                got = strip_counts(golden_tree, G, ray, n, m, MODE_EXACT)[0].values
                expected = brute_strip_counts(golden_tree, G, ray, n, m)
                assert got == expected

    def test_full_shift_total(self, two_tree):
        e2 = BinaryMatrix.full(2)
        vec, norm = strip_counts(two_tree, e2, RAY_STRAIGHT, 2, 3, MODE_EXACT)
        region = path_strip_region(two_tree, RAY_STRAIGHT, 2, 3)
        assert norm == 0.0
        assert vec.total() == 2 ** len(region.nodes)

    def test_single_symbol_log_mode(self, chain_tree):
        one = BinaryMatrix.from_rows([[1]])
        vec, norm = strip_counts(chain_tree, one, Ray((), (0,)), 2, 5, MODE_LOG)
        assert norm + vec.total() == pytest.approx(0.0, abs=1e-14)

    def test_log_mode_tracks_exact(self, crt3_tree):
        rng = random.Random(7)
        a = random_primitive_matrix(3, rng)
        ray = Ray((1,), (2, 0))
        for n, m in [(2, 4), (3, 6)]:
            exact_vec, _ = strip_counts(crt3_tree, a, ray, n, m, MODE_EXACT)
            log_vec, norm = strip_counts(crt3_tree, a, ray, n, m, MODE_LOG)
            for e, l in zip(exact_vec.values, log_vec.values):
                if e == 0:
                    assert l == float("-inf")
                else:
                    assert norm + l == pytest.approx(math.log(e), rel=1e-9)


class TestPeriodMatrix:
    def test_single_step_period(self, golden_tree):
        pm = period_matrix(golden_tree, G, RAY_STRAIGHT, 3, MODE_EXACT)
        step = step_matrix(golden_tree, G, RAY_STRAIGHT, 1, 3, MODE_EXACT)
        assert pm.matrix.exact == step.matrix.exact
        assert pm.support_primitivity

    def test_chain_tree_is_bare_transpose(self, chain_tree):
        a = BinaryMatrix.from_rows([[0, 1], [1, 1]])  # non-symmetric, primitive
        pm = period_matrix(chain_tree, a, Ray((), (0,)), 4, MODE_EXACT)
        assert pm.matrix.exact == a.transpose().rows

    def test_two_step_composition_order(self, golden_tree):
        # steps act in ray order: the free-branch step at phase 1 first, then
        # the bare step at phase 2; composed = A3 . A2 in application order
        n = 3
        pm = period_matrix(golden_tree, G, RAY_MIXED, n, MODE_EXACT)
        first = step_matrix(golden_tree, G, RAY_MIXED, 1, n, MODE_EXACT).matrix
        second = step_matrix(golden_tree, G, RAY_MIXED, 2, n, MODE_EXACT).matrix
        assert pm.matrix.exact == product([second, first]).exact
        # frozen hand product for A = G, n = 3: block counts (15, 8) one level
        # down give the free-branch weights 23, 15
        assert first.exact == ((23, 23), (15, 0))
        assert pm.matrix.exact == ((38, 23), (23, 23))

    def test_two_step_entries_match_oracle(self, golden_tree):
        # entry (s, i) of the period product counts labelings of the strip
        # pieces at phases 1 and 2 alone, given label i at the period start
        # and s at its end (the root strip piece belongs to the initial
        # vector, not to the period product)
        from treeshift.oracle import Region, count_labelings
        from treeshift.ray import strip_region

        n = 3
        pm = period_matrix(golden_tree, G, RAY_MIXED, n, MODE_EXACT)
        pieces = set(strip_region(golden_tree, RAY_MIXED, n, 3)) - set(
            strip_region(golden_tree, RAY_MIXED, n, 1)
        )
        region = Region(tuple(pieces | {()}))
        for s in range(2):
            for i in range(2):
                pinned = region.with_pins({(): i, (0, 1): s})
                assert pm.matrix.exact[s][i] == count_labelings(pinned, G)

    def test_phase_shift_preserves_spectral_radius(self, golden_tree):
        n = 4
        d1 = period_matrix(golden_tree, G, RAY_MIXED, n, MODE_EXACT)
        d2 = period_matrix(golden_tree, G, Ray((0,), (1, 0)), n, MODE_EXACT)
        r1 = spectral_radius(d1.matrix).rho_log
        r2 = spectral_radius(d2.matrix).rho_log
        assert r1 == pytest.approx(r2, rel=1e-11)

    def test_composition_order_matters_for_longer_periods(self, crt3_tree):
        # regression for the period product order: with a non-symmetric
        # adjacency and two distinct weighted steps in one period, composing
        # the steps backwards changes the spectral radius
        a = BinaryMatrix.from_rows([[1, 1, 0], [0, 0, 1], [1, 0, 0]])
        ray = Ray((), (0, 0, 1, 2))
        n = 5
        steps = [
            step_matrix(crt3_tree, a, ray, j, n, MODE_EXACT).matrix
            for j in (1, 2, 3, 4)
        ]
        forward = product(list(reversed(steps)))
        backward = product(steps)
        pm = period_matrix(crt3_tree, a, ray, n, MODE_EXACT)
        assert pm.matrix.exact == forward.exact
        rho_fwd = spectral_radius(forward).rho_log
        rho_bwd = spectral_radius(backward).rho_log
        assert abs(rho_fwd - rho_bwd) > 1e-3
        # the iterated counts single out the application order
        sites = period_sites(crt3_tree, ray, n)
        iterative = strip_entropy_iterative(crt3_tree, a, ray, n, 400).value
        assert iterative == pytest.approx(rho_fwd / sites, abs=1e-9)
        assert abs(iterative - rho_bwd / sites) > 1e-5


class TestStripEntropyClosed:
    def test_straight_golden_width_three_analytic(self, golden_tree):
        # period product is [[9,9],[5,0]]; its Perron root is (9+sqrt(261))/2
        result = strip_entropy_closed(golden_tree, G, RAY_STRAIGHT, 3)
        expected = math.log((9 + math.sqrt(261)) / 2) / 5
        assert result.method == "closed_form"
        assert result.denominator == 5
        assert result.value == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("k", [2, 3])
    def test_full_shift_exact(self, golden_tree, k):
        ek = BinaryMatrix.full(k)
        for n in (1, 4, 8):
            result = strip_entropy_closed(golden_tree, ek, RAY_MIXED, n)
            assert abs(result.value - math.log(k)) < 1e-12

    def test_chain_reduction(self, chain_tree):
        for n in range(1, 21):
            result = strip_entropy_closed(chain_tree, G, Ray((), (0,)), n)
            assert result.denominator == 1
            assert abs(result.value - math.log(PHI)) < 1e-9

    def test_prefix_does_not_change_closed_form(self, golden_tree):
        plain = strip_entropy_closed(golden_tree, G, RAY_STRAIGHT, 5)
        prefixed = strip_entropy_closed(golden_tree, G, Ray((1,), (0,)), 5)
        assert plain.value == prefixed.value

    def test_non_primitive_period_product_falls_back(self, golden_tree):
        swap = BinaryMatrix.from_rows([[0, 1], [1, 0]])
        with pytest.warns(UserWarning, match="not primitive"):
            result = strip_entropy_closed(golden_tree, swap, RAY_STRAIGHT, 3)
        assert result.method == "iterative"
        assert "closed_form_refused" in result.diagnostics

    def test_values_within_entropy_bounds(self, crt3_tree):
        for seed in range(5):
            rng = random.Random(seed)
            a = random_primitive_matrix(rng.choice([2, 3]), rng)
            for n in (2, 5):
                value = strip_entropy_closed(crt3_tree, a, Ray((), (0,)), n).value
                assert -1e-12 <= value <= math.log(a.dim) + 1e-12


class TestStripEntropyIterative:
    @pytest.mark.parametrize(
        "prefix,period",
        [((), (0,)), ((), (0, 1)), ((1,), (0, 1))],
    )
    def test_matches_closed_form(self, golden_tree, prefix, period):
        ray = Ray(prefix, period)
        for n in (2, 5, 10):
            closed = strip_entropy_closed(golden_tree, G, ray, n)
            iterative = strip_entropy_iterative(golden_tree, G, ray, n, 1000)
            assert abs(closed.value - iterative.value) < 1e-6
            assert iterative.diagnostics["oscillation_width"] < 1e-6

    def test_matches_closed_form_on_crt_preset(self, crt3_tree):
        a = random_primitive_matrix(3, random.Random(11))
        for ray in [Ray((), (0,)), Ray((0,), (1, 2, 0))]:
            for n in (3, 10):
                closed = strip_entropy_closed(crt3_tree, a, ray, n)
                iterative = strip_entropy_iterative(crt3_tree, a, ray, n, 1000)
                assert abs(closed.value - iterative.value) < 1e-6

    def test_single_symbol_gives_zero(self, chain_tree):
        one = BinaryMatrix.from_rows([[1]])
        result = strip_entropy_iterative(chain_tree, one, Ray((), (0,)), 3, 50)
        assert result.value == 0.0

    def test_full_shift(self, two_tree):
        e2 = BinaryMatrix.full(2)
        result = strip_entropy_iterative(two_tree, e2, RAY_STRAIGHT, 4, 200)
        assert abs(result.value - math.log(2)) < 1e-12

    def test_m_max_too_small(self, golden_tree):
        with pytest.raises(ValueError):
            strip_entropy_iterative(golden_tree, G, Ray((1,), (0, 1)), 3, 2)

    def test_raw_quotient_reported(self, golden_tree):
        result = strip_entropy_iterative(golden_tree, G, RAY_STRAIGHT, 3, 120)
        raw = result.diagnostics["raw_quotient"]
        # the cumulative quotient drags boundary terms along; it agrees only
        # coarsely at this depth
        assert abs(raw - result.value) < 1e-2
        assert abs(raw - result.value) > 1e-7


class TestDefinitionalCrossCheck:
    def test_closed_form_matches_oracle_count_growth_golden(self, golden_tree):
        # the growth of the raw brute-force region counts over one period
        # must converge to the closed-form value; the count iteration is
        # geometric, so m = 40 is already at machine precision
        ray = RAY_STRAIGHT
        n = 3
        sites = period_sites(golden_tree, ray, n)
        totals = {
            m: sum(brute_strip_counts(golden_tree, G, ray, n, m))
            for m in (39, 40)
        }
        oracle_rate = (math.log(totals[40]) - math.log(totals[39])) / sites
        closed = strip_entropy_closed(golden_tree, G, ray, n).value
        assert closed == pytest.approx(oracle_rate, abs=1e-9)

    def test_closed_form_matches_oracle_count_growth_crt3(self, crt3_tree):
        a = random_primitive_matrix(3, random.Random(23))
        ray = Ray((1,), (2, 0))
        n = 3
        sites = period_sites(crt3_tree, ray, n)
        totals = {
            m: sum(brute_strip_counts(crt3_tree, a, ray, n, m))
            for m in (39, 41)
        }
        oracle_rate = (math.log(totals[41]) - math.log(totals[39])) / sites
        closed = strip_entropy_closed(crt3_tree, a, ray, n).value
        assert closed == pytest.approx(oracle_rate, abs=1e-9)


class TestScaleCovariance:
    def test_rescaling_counts_shifts_entropy_bookkeeping(self, golden_tree):
        # multiplying every branch weight by kappa multiplies each step by
        # kappa^(number of off-branches), so log rho shifts additively by
        # log(kappa) * (off-branches per period); guards log bookkeeping
        n = 4
        kappa_log = 0.37
        ray = RAY_MIXED
        phases = range(ray.c + 1, ray.c + ray.ell + 1)
        steps = [step_matrix(golden_tree, G, ray, j, n, MODE_LOG) for j in phases]
        total_branches = sum(len(s.profile.off_branches) for s in steps)
        scaled = [
            s.matrix.scaled(kappa_log * len(s.profile.off_branches)) for s in steps
        ]
        base = spectral_radius(product(list(reversed([s.matrix for s in steps]))))
        moved = spectral_radius(product(list(reversed(scaled))))
        assert moved.rho_log == pytest.approx(
            base.rho_log + kappa_log * total_branches, abs=1e-10
        )


class TestClassifyGoldenStep:
    def test_straight_ray_all_restricted_branch(self, golden_tree):
        for j in range(1, 6):
            step = step_matrix(golden_tree, G, RAY_STRAIGHT, j, 3)
            assert classify_golden_step(golden_tree, G, step) == TAG_RESTRICTED_BRANCH

    def test_mixed_ray_alternates(self, golden_tree):
        tags = [
            classify_golden_step(
                golden_tree, G, step_matrix(golden_tree, G, RAY_MIXED, j, 3)
            )
            for j in range(1, 5)
        ]
        assert tags == [TAG_FREE_BRANCH, TAG_NO_BRANCH, TAG_FREE_BRANCH, TAG_NO_BRANCH]

    def test_other_tree(self, crt3_tree):
        step = step_matrix(crt3_tree, BinaryMatrix.full(3), Ray((), (0, 1, 2)), 1, 3)
        assert classify_golden_step(crt3_tree, BinaryMatrix.full(3), step) == TAG_OTHER
