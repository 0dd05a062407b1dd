"""Instance construction, analysis oracles, and the instance file format."""

import itertools

import numpy as np
import pytest

from linres import (
    Field,
    InfeasibleParams,
    LinearSystem,
    code_distance,
    gen_instance,
    optimal_rate_check,
    zero_one_image,
    zero_one_sat,
)
from linres.errors import ParseError
from linres.instances import (
    load_instance,
    parse_instance,
    pick_nonimage_rhs,
    reed_solomon_matrix,
    save_instance,
    serialize_instance,
)
from linres.linalg import rank


F5 = Field(5)
F7 = Field(7)


def brute_image(a, p):
    n = a.shape[1]
    out = set()
    for bits in itertools.product((0, 1), repeat=n):
        out.add(tuple(int(v) for v in (a @ np.array(bits)) % p))
    return out


class TestCodeDistance:
    def test_identity(self):
        assert code_distance(F5.matrix(np.eye(2, dtype=int)), F5) == 1

    def test_single_row(self):
        assert code_distance(F5.matrix([[1, 1, 1]]), F5) == 3

    def test_reed_solomon_is_mds(self):
        # MDS oracle: d = n - k + 1 for Reed-Solomon generators
        a = reed_solomon_matrix(F7, 7, 3)
        assert code_distance(a, F7) == 7 - 3 + 1

    @pytest.mark.parametrize("p,n,k", [(5, 5, 2), (5, 4, 3), (7, 6, 2), (7, 7, 4), (11, 8, 3)])
    def test_reed_solomon_mds_sweep(self, p, n, k):
        f = Field(p)
        assert code_distance(reed_solomon_matrix(f, n, k), f) == n - k + 1

    def test_zero_iff_dependent_rows(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            a = F5.matrix(rng.integers(0, 5, size=(3, 5)))
            assert (code_distance(a, F5) > 0) == (rank(a, 5) == 3)


class TestZeroOneImage:
    def test_row_of_ones(self):
        assert zero_one_image(F5.matrix([[1, 1, 1]]), F5) == {(0,), (1,), (2,), (3,)}

    def test_identity(self):
        got = zero_one_image(F5.matrix(np.eye(2, dtype=int)), F5)
        assert got == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_zero_matrix(self):
        assert zero_one_image(F5.matrix([[0, 0], [0, 0]]), F5) == {(0, 0)}

    def test_matches_independent_enumeration(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            a = F7.matrix(rng.integers(0, 7, size=(3, 6)))
            assert zero_one_image(a, F7) == brute_image(a, 7)

    def test_size_bounds_and_block_monotonicity(self):
        rng = np.random.default_rng(37)
        for _ in range(10):
            a1 = F5.matrix(rng.integers(0, 5, size=(2, 3)))
            a2 = F5.matrix(rng.integers(0, 5, size=(2, 4)))
            both = F5.matrix(np.concatenate([a1, a2], axis=1))
            s1, s2, s = zero_one_image(a1, F5), zero_one_image(a2, F5), zero_one_image(both, F5)
            assert len(s) <= min(2 ** both.shape[1], 5 ** 2)
            assert len(s) >= max(len(s1), len(s2))


class TestZeroOneSat:
    def test_unsat_small(self):
        assert zero_one_sat(LinearSystem(F5, [[1, 1]], [3])) is None

    def test_lexicographic_first(self):
        assert zero_one_sat(LinearSystem(F5, [[1, 1]], [1])) == (0, 1)

    def test_matches_independent_enumeration(self):
        rng = np.random.default_rng(41)
        for _ in range(15):
            a = rng.integers(0, 5, size=(3, 6))
            b = rng.integers(0, 5, size=3)
            sys_ = LinearSystem(F5, a, b)
            brute = None
            for bits in itertools.product((0, 1), repeat=6):
                if all(int((a[i] @ bits) % 5) == int(b[i]) for i in range(3)):
                    brute = bits
                    break
            assert zero_one_sat(sys_) == brute


class TestGenInstance:
    def test_reed_solomon_instance(self):
        inst = gen_instance("reed-solomon", 7, 7, 3, seed=1)
        assert inst.d == 5
        assert tuple(int(v) for v in inst.system.b) not in zero_one_image(inst.system.a, F7)
        inst.verify()

    def test_rhs_hook_row_of_ones(self):
        b = pick_nonimage_rhs(F5.matrix([[1, 1, 1]]), F5)
        assert b.tolist() == [4]

    def test_infeasible_params(self):
        with pytest.raises(InfeasibleParams):
            gen_instance("reed-solomon", 5, 10, 2, seed=1)

    def test_random_distance_generator(self):
        inst = gen_instance("random-distance", 5, 6, 3, min_d=3, seed=9)
        assert inst.d >= 3
        assert zero_one_sat(inst.system) is None
        inst.verify()

    def test_random_requires_seed(self):
        with pytest.raises(ValueError):
            gen_instance("random-distance", 5, 6, 3, min_d=3)

    def test_rhs_fails_membership_recheck(self):
        rng = np.random.default_rng(43)
        for seed in range(5):
            n = int(rng.integers(5, 7))
            inst = gen_instance("random-distance", 5, n, 3, min_d=2, seed=seed)
            assert tuple(int(v) for v in inst.system.b) not in brute_image(inst.system.a, 5)


class TestOptimalRate:
    def test_identity_passes(self):
        ok, worst = optimal_rate_check(F5.matrix(np.eye(3, dtype=int)), F5)
        assert ok and worst is None

    def test_zero_column_fails(self):
        a = F5.matrix([[1, 0, 1], [0, 0, 1]])
        ok, worst = optimal_rate_check(a, F5)
        assert not ok
        assert 1 in worst  # the zero column must participate in the worst subset

    def test_matches_direct_recomputation(self):
        rng = np.random.default_rng(47)
        for _ in range(5):
            a = F5.matrix(rng.integers(0, 5, size=(3, 6)))
            ok, worst = optimal_rate_check(a, F5)
            k, n = a.shape
            direct_ok = True
            for size in range(1, n + 1):
                for cols in itertools.combinations(range(n), size):
                    if rank(a[:, list(cols)], 5) < (k / n) * size - 1e-12:
                        direct_ok = False
            assert ok == direct_ok
            if not ok:
                assert rank(a[:, list(worst)], 5) < (k / n) * len(worst) - 1e-12


class TestInstanceFiles:
    def test_round_trip_bit_exact(self, tmp_path):
        inst = gen_instance("reed-solomon", 7, 7, 3, seed=1)
        path = tmp_path / "i.lsys"
        save_instance(inst.system, path, comments=["kind=reed-solomon seed=1"])
        text = path.read_text()
        loaded = load_instance(path)
        assert loaded == inst.system
        assert serialize_instance(loaded, comments=["kind=reed-solomon seed=1"]) == text

    def test_parse_rejects_garbage(self):
        with pytest.raises(ParseError):
            parse_instance("")
        with pytest.raises(ParseError):
            parse_instance("p 5\ndims 1 2\n1 2 3 | 0\n")
        with pytest.raises(ParseError):
            parse_instance("p 5\ndims 1 2\n1 7 | 0\n")
        with pytest.raises(ParseError):
            parse_instance("p 5\ndims 2 2\n1 1 | 0\n")

    def test_comments_ignored(self):
        sys_ = parse_instance("# hello\np 5\n# again\ndims 1 2\n1 2 | 3\n")
        assert sys_ == LinearSystem(F5, [[1, 2]], [3])
