"""Construction, evaluation and transform tests for the QUBO module."""

from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alkane_qubo.qubo import (
    IsingProblem,
    PenaltyConfig,
    build_qubo,
    ising_eval,
    ising_from_matrix,
    matrix_eval,
    matrix_eval_batch,
    objective_eval,
    perturb,
    problem_from_json,
    problem_to_json,
    qubo_to_ising,
    scale_ising,
)


def all_states(m):
    return [np.array(bits) for bits in product([0, 1], repeat=m)]


def toleranced_sign(diffs, tol=1e-6):
    return np.where(np.abs(diffs) <= tol, 0.0, np.sign(diffs))


class TestPenaltyConfig:
    def test_defaults(self):
        cfg = PenaltyConfig()
        assert cfg.p1 == 1.0 and cfg.p2 == 1.0

    @pytest.mark.parametrize("p1,p2", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (1.0, -0.5)])
    def test_rejects_non_positive(self, p1, p2):
        with pytest.raises(ValueError):
            PenaltyConfig(p1=p1, p2=p2)


class TestBuildQubo:
    def test_butane_dimensions(self):
        problem = build_qubo(4)
        assert problem.m == 8

    def test_butane_offset(self):
        # 4*(n-2)^2*p2 + (n-2)*p1 with n=4, unit penalties
        assert build_qubo(4).offset == 18.0

    def test_butane_first_diagonal(self):
        # p2*alpha^2 + b = 1 - 9 for the degree-1 variable of block 0
        assert build_qubo(4).q[0, 0] == -8.0

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            build_qubo(2)

    def test_matrix_is_immutable(self):
        problem = build_qubo(4)
        with pytest.raises(ValueError):
            problem.q[0, 0] = 0.0

    def test_butane_exhaustive_minimum(self):
        # independent oracle: enumerate all 256 states directly
        problem = build_qubo(4)
        energies = [matrix_eval(problem, y) for y in all_states(8)]
        assert min(energies) == -18.0
        assert sum(1 for e in energies if e == -18.0) == 3

    @pytest.mark.parametrize("n", [4, 5])
    def test_matches_direct_objective_exhaustively(self, n):
        problem = build_qubo(n)
        for y in all_states(problem.m):
            assert matrix_eval(problem, y) + problem.offset == pytest.approx(
                objective_eval(y, n), rel=1e-9, abs=1e-9
            )

    def test_ground_state_set_independent_of_penalties(self):
        # squared violations: any positive weights share the same zero set
        for n in (4, 5):
            sets = []
            for penalties in (PenaltyConfig(1.0, 1.0), PenaltyConfig(3.0, 0.5)):
                problem = build_qubo(n, penalties)
                energies = np.array([matrix_eval(problem, y) for y in all_states(problem.m)])
                sets.append(set(np.flatnonzero(energies == energies.min()).tolist()))
            assert sets[0] == sets[1]


class TestObjectiveEval:
    def test_butane_chain_is_feasible(self):
        assert objective_eval([0, 1, 0, 0, 0, 1, 0, 0], 4) == 0.0

    def test_all_zero(self):
        # both blocks empty and a degree-sum deficit of 4
        p1, p2 = 2.0, 3.0
        got = objective_eval(np.zeros(8), 4, PenaltyConfig(p1, p2))
        assert got == p1 * 2 + p2 * 16

    def test_pentane_chain_is_feasible(self):
        y = [0, 1, 0, 0] * 3
        assert objective_eval(y, 5) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            objective_eval([0, 1], 4)

    def test_non_negative_everywhere(self):
        for y in all_states(8):
            assert objective_eval(y, 4) >= 0.0


class TestMatrixEval:
    def test_butane_chain(self):
        problem = build_qubo(4)
        assert matrix_eval(problem, [0, 1, 0, 0, 0, 1, 0, 0]) == -18.0

    def test_zero_vector(self):
        assert matrix_eval(build_qubo(4), np.zeros(8)) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            matrix_eval(build_qubo(4), np.zeros(9))

    def test_batch_agrees_with_scalar(self):
        problem = build_qubo(5)
        rng = np.random.default_rng(0)
        ys = rng.integers(0, 2, size=(64, problem.m))
        batch = matrix_eval_batch(problem, ys)
        for y, e in zip(ys, batch):
            assert matrix_eval(problem, y) == e

    @given(st.integers(min_value=0, max_value=2**12 - 1))
    @settings(max_examples=200, deadline=None)
    def test_identity_with_objective(self, packed):
        problem = build_qubo(5)
        y = np.array([(packed >> i) & 1 for i in range(12)])
        assert matrix_eval(problem, y) + problem.offset == pytest.approx(
            objective_eval(y, 5), rel=1e-9, abs=1e-9
        )


class TestIsingTransform:
    def test_single_variable(self):
        # q*x with x = (s+1)/2 gives field q/2 and constant q/2
        for q in (-1.0, 2.5):
            ising = ising_from_matrix([[q]])
            assert ising.h[0] == q / 2
            assert ising.offset == q / 2
            assert ising.j[0, 0] == 0.0

    def test_zero_matrix(self):
        ising = ising_from_matrix(np.zeros((3, 3)))
        assert not ising.h.any() and not ising.j.any() and ising.offset == 0.0

    def test_butane_energy_equality_exhaustive(self):
        problem = build_qubo(4)
        ising = qubo_to_ising(problem)
        for y in all_states(8):
            spins = 2 * y - 1
            assert ising_eval(ising, spins) == pytest.approx(matrix_eval(problem, y), rel=1e-9, abs=1e-9)

    def test_larger_sizes_on_random_states(self):
        rng = np.random.default_rng(7)
        for n in (6, 7):
            problem = build_qubo(n)
            ising = qubo_to_ising(problem)
            ys = rng.integers(0, 2, size=(500, problem.m))
            for y in ys:
                assert ising_eval(ising, 2 * y - 1) == pytest.approx(
                    matrix_eval(problem, y), rel=1e-9, abs=1e-9
                )


class TestScaleIsing:
    def test_uniform_factor(self):
        ising = IsingProblem(h=np.array([4.0, -4.0]), j=np.zeros((2, 2)), offset=6.0)
        scaled = scale_ising(ising, h_bound=2.0, j_bound=1.0)
        assert scaled.h.tolist() == [2.0, -2.0]
        assert scaled.offset == 3.0

    def test_already_within_bounds_unchanged(self):
        ising = IsingProblem(h=np.array([1.0, -0.5]), j=np.zeros((2, 2)), offset=1.0)
        assert scale_ising(ising) is ising

    def test_all_zero_unchanged(self):
        ising = IsingProblem(h=np.zeros(2), j=np.zeros((2, 2)), offset=0.0)
        assert scale_ising(ising) is ising

    def test_rejects_bad_bounds(self):
        ising = IsingProblem(h=np.array([1.0]), j=np.zeros((1, 1)), offset=0.0)
        with pytest.raises(ValueError):
            scale_ising(ising, h_bound=0.0)

    def test_butane_ordering_preserved(self):
        problem = build_qubo(4)
        ising = qubo_to_ising(problem)
        scaled = scale_ising(ising)
        assert np.max(np.abs(scaled.h)) <= 2.0 + 1e-12
        assert np.max(np.abs(scaled.j)) <= 1.0 + 1e-12
        before = np.array([ising_eval(ising, 2 * y - 1) for y in all_states(8)])
        after = np.array([ising_eval(scaled, 2 * y - 1) for y in all_states(8)])
        # one positive factor relates every pair; ties compare at the
        # documented post-scaling energy tolerance
        order_before = toleranced_sign(before[:, None] - before[None, :])
        order_after = toleranced_sign(after[:, None] - after[None, :])
        assert np.array_equal(order_before, order_after)
        assert set(np.flatnonzero(before == before.min())) == set(np.flatnonzero(after == after.min()))

    def test_tighter_coupling_floor(self):
        # emulating a -0.8 floor by passing it as the coupling bound
        ising = qubo_to_ising(build_qubo(5))
        scaled = scale_ising(ising, h_bound=2.0, j_bound=0.8)
        assert np.max(np.abs(scaled.j)) <= 0.8 + 1e-12


class TestPerturb:
    def test_self_overlap_shift(self):
        problem = build_qubo(4)
        psi = np.array([0, 1, 0, 0, 0, 1, 0, 0])
        lam = 0.25
        shifted = perturb(problem, psi, lam)
        k = psi.sum()
        assert matrix_eval(shifted, psi) - matrix_eval(problem, psi) == pytest.approx(lam * k**2)

    def test_feasible_state_has_interior_count_ones(self):
        for n in (4, 5, 6):
            problem = build_qubo(n)
            psi = np.array(([0, 1, 0, 0] * (n - 2)))
            assert psi.sum() == n - 2
            shifted = perturb(problem, psi, 1.0)
            assert matrix_eval(shifted, psi) - matrix_eval(problem, psi) == pytest.approx((n - 2) ** 2)

    def test_zero_overlap_no_shift(self):
        problem = build_qubo(4)
        psi = np.array([1, 0, 0, 0, 0, 0, 0, 0])
        y = np.array([0, 1, 1, 1, 1, 1, 1, 1])
        shifted = perturb(problem, psi, 5.0)
        assert matrix_eval(shifted, y) == matrix_eval(problem, y)

    def test_matches_direct_formula_on_random_states(self):
        # strength used in the frequency-redistribution study
        lam = 5e-5
        problem = build_qubo(5)
        psi = np.array([0, 1, 0, 0] * 3)
        shifted = perturb(problem, psi, lam)
        rng = np.random.default_rng(3)
        for y in rng.integers(0, 2, size=(200, problem.m)):
            expected = matrix_eval(problem, y) + lam * float(psi @ y) ** 2
            assert matrix_eval(shifted, y) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_offset_and_original_untouched(self):
        problem = build_qubo(4)
        before = problem.q.copy()
        psi = np.ones(8)
        shifted = perturb(problem, psi, 1.0)
        assert shifted.offset == problem.offset
        assert np.array_equal(problem.q, before)

    def test_rejects_bad_arguments(self):
        problem = build_qubo(4)
        with pytest.raises(ValueError):
            perturb(problem, np.ones(7), 1.0)
        with pytest.raises(ValueError):
            perturb(problem, np.ones(8), 0.0)
        with pytest.raises(ValueError):
            perturb(problem, np.ones(8), -1.0)


class TestSerialization:
    def test_round_trip_bit_exact(self):
        problem = build_qubo(6, PenaltyConfig(p1=3.0, p2=0.5))
        again = problem_from_json(problem_to_json(problem))
        assert np.array_equal(again.q, problem.q)
        assert again.offset == problem.offset
        assert again.penalties == problem.penalties
        assert again.n == problem.n

    def test_round_trip_after_perturbation(self):
        # awkward floats must survive exactly
        problem = perturb(build_qubo(4), np.array([0, 1, 0, 0, 0, 0, 1, 0]), 5e-6)
        again = problem_from_json(problem_to_json(problem))
        assert np.array_equal(again.q, problem.q)

    def test_entries_are_upper_triangular(self):
        import json

        doc = json.loads(problem_to_json(build_qubo(4)))
        assert all(i <= j for i, j, _ in doc["entries"])
        assert doc["n"] == 4 and doc["offset"] == 18.0

    def test_rejects_lower_triangle_entries(self):
        import json

        doc = json.loads(problem_to_json(build_qubo(4)))
        doc["entries"].append([5, 2, 1.0])
        with pytest.raises(ValueError):
            problem_from_json(json.dumps(doc))
