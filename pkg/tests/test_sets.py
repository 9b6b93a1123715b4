import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mipsearch.errors import DomainError
from mipsearch.loss import GaussianMIOracle, entropy_oracle
from mipsearch.sets import (
    GroundSet,
    LossOracle,
    MergeState,
    Subset,
    cardinality_oracle,
    check_submodular,
    check_symmetric,
    complement,
    constant_oracle,
    full_mask,
    indices_of,
    mask_of,
    merge,
    popcount,
)

from helpers import random_system


def subsets(max_n=40):
    return st.integers(1, max_n).flatmap(
        lambda n: st.builds(lambda m: Subset(m, n), st.integers(0, full_mask(n))))


class TestSubset:
    @pytest.mark.parametrize("idx, n, expected", [
        ({0, 1}, 4, {2, 3}),
        (set(), 3, {0, 1, 2}),
        (set(range(20)), 40, set(range(20, 40))),
    ])
    def test_complement_examples(self, idx, n, expected):
        assert set(complement(Subset.from_indices(idx, n))) == expected

    @given(subsets())
    def test_complement_laws(self, s):
        c = s.complement()
        assert c.complement() == s
        assert (s | c) == GroundSet(s.n).full
        assert not (s & c)

    @given(subsets())
    def test_canonical_equality(self, s):
        again = Subset.from_indices(reversed(s.indices), s.n)
        assert again == s and hash(again) == hash(s)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            Subset.from_indices([4], 4)
        with pytest.raises(DomainError):
            Subset(1 << 5, 5)

    def test_mixed_ground_sets(self):
        with pytest.raises(DomainError):
            Subset(1, 3) | Subset(1, 4)

    def test_lexicographic_order(self):
        a, b = Subset.from_indices([0, 5], 6), Subset.from_indices([1], 6)
        assert a < b
        assert sorted([b, a]) == [a, b]

    def test_mask_helpers(self):
        assert mask_of([0, 3]) == 0b1001
        assert indices_of(0b1001) == (0, 3)
        assert popcount(0b1011) == 3
        big = mask_of([999])
        assert indices_of(big) == (999,)


class TestGroundSet:
    def test_labels(self):
        g = GroundSet(3, ("a", "b", "c"))
        assert g.label(1) == "b"
        assert GroundSet(3).label(0) == "1"

    @pytest.mark.parametrize("kwargs", [dict(n=0), dict(n=2, labels=("a",)), dict(n=2, labels=("a", "a"))])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            GroundSet(**kwargs)


class TestLossOracle:
    def test_memo_counts_misses_only(self):
        f = cardinality_oracle(5)
        for m in (1, 3, 1, 3, 7):
            f(m)
        assert f.call_count == 3

    def test_memo_transparency(self):
        sys_ = random_system(6, 0)
        rng = np.random.default_rng(1)
        masks = [int(m) for m in rng.integers(1, full_mask(6), size=200)]
        on, off = GaussianMIOracle(sys_), GaussianMIOracle(sys_, memoize=False)
        assert [on(m) for m in masks] == [off(m) for m in masks]
        assert on.call_count <= off.call_count == len(masks)

    def test_evaluate_accepts_subsets_and_indices(self):
        f = cardinality_oracle(4)
        assert f.evaluate(Subset.from_indices([0, 2], 4)) == f.evaluate([0, 2]) == f.evaluate(0b101) == 2


class TestMerge:
    def test_examples(self):
        s = MergeState.singletons(4)
        s = merge(s, 1, 2)
        assert [set(s.flatten(i)) for i in range(len(s))] == [{0}, {1, 2}, {3}]
        s = merge(s, 0, 1)
        assert [set(s.flatten(i)) for i in range(len(s))] == [{0, 1, 2}, {3}]
        assert s.history == ((0b0010, 0b0100), (0b0001, 0b0110))

    @pytest.mark.parametrize("t, u", [(0, 0), (-1, 1), (0, 4)])
    def test_invalid_indices(self, t, u):
        with pytest.raises(DomainError):
            MergeState.singletons(4).merge(t, u)

    def test_partition_invariant_exhaustive(self):
        # every merge sequence from 5 singletons down to 2 elements
        def walk(state):
            masks = state.blocks
            assert all(a & b == 0 for a, b in itertools.combinations(masks, 2))
            assert state.ground_mask == full_mask(5)
            if len(state) == 2:
                return 1
            return sum(walk(state.merge(t, u))
                       for t, u in itertools.permutations(range(len(state)), 2))
        assert walk(MergeState.singletons(5)) == 20 * 12 * 6

    @settings(max_examples=50)
    @given(st.integers(2, 30), st.randoms(use_true_random=False))
    def test_random_merges_keep_partition(self, n, rnd):
        s = MergeState.singletons(n)
        while len(s) > 1:
            t, u = rnd.sample(range(len(s)), 2)
            fused = s.blocks[t] | s.blocks[u]
            s = s.merge(t, u)
            assert fused in s.blocks
            assert sum(popcount(b) for b in s.blocks) == n
        assert s.blocks == (full_mask(n),)


class TestPropertyChecks:
    def test_gaussian_mi_submodular(self):
        sys_ = random_system(8, 3)
        rep = check_submodular(GaussianMIOracle(sys_), GroundSet(8), trials=1000, tol=1e-9)
        assert rep.ok and rep.max_violation >= -1e-9

    def test_cardinality_is_modular(self):
        f = cardinality_oracle(6)
        rep = check_submodular(f, GroundSet(6), trials=100)
        assert rep.ok and rep.max_violation == 0.0

    def test_square_cardinality_counterexample(self):
        f = LossOracle(lambda m: popcount(m) ** 2, 3)
        # brute force over all pairs: the margin is -2 |X - Y| |Y - X|
        margins = {(x, y): f(x) + f(y) - f(x | y) - f(x & y)
                   for x in range(8) for y in range(8)}
        assert margins[(0b001, 0b010)] == -2
        assert min(margins.values()) == -4 == margins[(0b001, 0b110)]
        rep = check_submodular(f, GroundSet(3), trials=200, seed=0)
        assert not rep.ok
        assert rep.max_violation in (-2, -4)
        assert all(margins[sets] == m for sets, m in rep.violations)

    def test_mi_symmetric(self):
        rep = check_symmetric(GaussianMIOracle(random_system(9, 4)), GroundSet(9), trials=1000)
        assert rep.ok

    def test_entropy_not_symmetric(self):
        sys_ = random_system(5, 5)
        h = entropy_oracle(sys_)
        # direct evaluation on one subset
        assert abs(h(0b00011) - h(0b11100)) > 1e-6
        assert not check_symmetric(h, GroundSet(5), trials=200).ok

    def test_constant_symmetric(self):
        assert check_symmetric(constant_oracle(4, 2.5), GroundSet(4), trials=100).ok

    def test_report_serializable(self):
        rep = check_submodular(LossOracle(lambda m: popcount(m) ** 2, 3), GroundSet(3), trials=50)
        d = rep.to_dict()
        assert d["n_violations"] == len(rep.violations) and d["ok"] is False

    @pytest.mark.parametrize("kwargs", [dict(trials=0), dict(tol=-1.0)])
    def test_bad_arguments(self, kwargs):
        with pytest.raises(DomainError):
            check_submodular(cardinality_oracle(3), GroundSet(3), **kwargs)
