import numpy as np
import pytest
from hypothesis import given, strategies as st

from dcqo.ising import SpinGlass, random_spin_glass
from dcqo.schedule import (
    CdMoments,
    DegenerateInstanceError,
    Schedule,
    alpha1,
    cd_profile,
    cd_weight,
    classify_regimes,
    lam,
    lam_dot,
    select_impulse_steps,
)

import oracles

SINGLE = SpinGlass([1.0], [[0.0]])

# values of -Gamma1/Gamma2 from oracles.alpha1_commutator on random_spin_glass(3, 0)
FROZEN_ALPHA1 = {0.0: -0.08396610533111322, 0.5: -0.23376596509775538, 1.0: -0.19224989655715177}


class TestLambda:
    def test_boundaries(self):
        assert lam(0, 0.7) == 0
        assert lam(0.7, 0.7) == pytest.approx(1, abs=1e-15)
        assert lam(0.35, 0.7) == pytest.approx(0.5, abs=1e-15)

    def test_derivative_vanishes_at_ends(self):
        assert lam_dot(0, 2.0) == 0
        assert abs(lam_dot(2.0, 2.0)) < 1e-15

    def test_outside_range(self):
        with pytest.raises(ValueError):
            lam(-0.1, 1.0)
        with pytest.raises(ValueError):
            lam_dot(1.1, 1.0)
        with pytest.raises(ValueError):
            lam(0.1, 0.0)

    @pytest.mark.parametrize("T", [0.1, 0.7, 1.0, 10.0])
    def test_derivative_matches_central_differences(self, T):
        t = np.linspace(0, T, 1000)
        h = 1e-6 * T
        inner = t[(t > h) & (t < T - h)]
        fd = (lam(inner + h, T) - lam(inner - h, T)) / (2 * h)
        assert np.max(np.abs(lam_dot(inner, T) - fd)) <= 1e-6

    @pytest.mark.parametrize("T", [0.1, 0.7, 10.0])
    def test_monotone(self, T):
        assert np.all(np.diff(lam(np.linspace(0, T, 10_001), T)) >= 0)


class TestAlpha1:
    def test_single_spin_closed_form(self):
        assert alpha1(SINGLE, 0.0) == pytest.approx(-0.25)
        assert alpha1(SINGLE, 0.5) == pytest.approx(-0.5)

    def test_frozen_oracle_values(self):
        sg = random_spin_glass(3, 0)
        for l, want in FROZEN_ALPHA1.items():
            assert alpha1(sg, l) == pytest.approx(want, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_matches_commutator_oracle(self, n):
        for seed in range(5):
            sg = random_spin_glass(n, 100 * n + seed)
            for l in (0, 0.25, 0.5, 0.75, 1):
                ref, g1 = oracles.alpha1_commutator(sg.h, sg.J, l)
                assert alpha1(sg, l) == pytest.approx(ref, abs=1e-10)
                assert g1 == pytest.approx(4 * (sg.h**2).sum() + 4 * (sg.J_sym**2).sum(), abs=1e-10)

    def test_sparse_instance(self):
        # zero fields and a single coupling exercise the J-only branches
        sg = SpinGlass.from_couplings([0, 0, 0], [(0, 2, 1.3)])
        for l in (0, 0.4, 1):
            assert alpha1(sg, l) == pytest.approx(oracles.alpha1_commutator(sg.h, sg.J, l)[0], abs=1e-12)

    @given(st.integers(1, 6), st.integers(0, 10_000), st.floats(0, 1))
    def test_negative(self, n, seed, l):
        assert alpha1(random_spin_glass(n, seed), l) < 0

    def test_all_zero_instance(self):
        with pytest.raises(DegenerateInstanceError):
            alpha1(SpinGlass([0.0, 0.0], np.zeros((2, 2))), 0.3)

    def test_lambda_range(self):
        with pytest.raises(ValueError):
            CdMoments.of(SINGLE).alpha1(1.5)


class TestWeight:
    def test_endpoints(self):
        sg = random_spin_glass(4, 0)
        assert cd_weight(sg, 0, 0.7)[0] == 0
        assert abs(cd_weight(sg, 0.7, 0.7)[0]) < 1e-15

    def test_midpoint_single_spin(self):
        # finite-difference lambda_dot times the commutator alpha1, frozen
        w, mag = cd_weight(SINGLE, 0.5, 1.0)
        assert w == pytest.approx(-1.2337005500366744, abs=1e-8)
        assert mag == abs(w)


class TestSchedule:
    def test_steps(self):
        s = Schedule()
        assert (s.T, s.dt, s.N) == (0.7, 0.1, 7)
        assert Schedule.from_steps(12, 0.1).N == 12
        np.testing.assert_allclose(Schedule(1.0, 0.25).times(), [0.25, 0.5, 0.75, 1.0])

    @pytest.mark.parametrize("T,dt", [(0, 0.1), (1, 0), (0.01, 0.1)])
    def test_invalid(self, T, dt):
        with pytest.raises(ValueError):
            Schedule(T, dt)

    def test_profile_csv(self):
        prof = cd_profile(random_spin_glass(3, 0), Schedule())
        lines = prof.to_csv().splitlines()
        assert lines[0] == "step,t,lambda,lambda_dot,alpha1,weight,selected"
        assert len(lines) == 8
        np.testing.assert_allclose(prof.cd_strength, -2 * prof.lam_dot * prof.alpha1)


class TestSelection:
    def setup_method(self):
        self.prof = cd_profile(SINGLE, Schedule(1.0, 0.1))

    def test_keep_all(self):
        assert select_impulse_steps(self.prof, keep=10) == list(range(10))

    def test_fraction_one_is_argmax(self):
        assert select_impulse_steps(self.prof, min_weight_fraction=1.0) == [4]

    def test_keep_four_matches_tabulation(self):
        # |lambda_dot alpha1| tabulated by the oracle at t = 0.1..1.0:
        # 0.01468 0.11204 0.36796 0.85226 1.2337 0.85226 0.36796 0.11204 0.01468 0
        # the 0.36796 tie between steps 2 and 6 goes to the earlier one
        assert select_impulse_steps(self.prof, keep=4) == [2, 3, 4, 5]

    def test_errors(self):
        with pytest.raises(ValueError):
            select_impulse_steps(self.prof)
        with pytest.raises(ValueError):
            select_impulse_steps(self.prof, keep=0)
        with pytest.raises(ValueError):
            select_impulse_steps(self.prof, keep=11)
        with pytest.raises(ValueError):
            select_impulse_steps(self.prof, min_weight_fraction=0)

    def test_regimes(self):
        labels = classify_regimes(self.prof)
        assert labels[4] == "impulse"
        assert labels[-1] == "adiabatic"
