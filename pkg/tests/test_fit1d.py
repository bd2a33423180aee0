import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chirp2d.fit1d import (
    DEGENERACY_TOL,
    DegenerateDesignError,
    Fit1D,
    SearchConfig1D,
    build_z,
    canonical_freq_rate,
    estimate_1d,
    grid_search_1d,
    reduced_ss,
    refine_1d,
    solve_amplitudes,
)
from chirp2d.model import TWO_PI, column_effective, synthesize, wrap_two_pi
from tests.conftest import lstsq_residual
from tests.test_model import PARAMS_REF


def design(k: int, freq: float, rate: float) -> np.ndarray:
    t = np.arange(1, k + 1, dtype=float)
    ph = freq * t + rate * t * t
    return np.column_stack([np.cos(ph), np.sin(ph)])


def chirp_vec(k: int, freq: float, rate: float, a: float, b: float) -> np.ndarray:
    return design(k, freq, rate) @ np.array([a, b])


def is_degenerate(k: int, freq: float, rate: float) -> bool:
    z = design(k, freq, rate)
    g = z.T @ z
    return abs(np.linalg.det(g)) < DEGENERACY_TOL * (np.trace(g) / 2.0) ** 2


class TestDesign:
    def test_build_z_scalar_oracle(self):
        z = build_z(5, 0.3, 0.07)
        for t in range(1, 6):
            ph = 0.3 * t + 0.07 * t * t
            assert z[t - 1, 0] == pytest.approx(math.cos(ph), abs=1e-15)
            assert z[t - 1, 1] == pytest.approx(math.sin(ph), abs=1e-15)

    def test_build_z_rejects_short(self):
        with pytest.raises(ValueError):
            build_z(1, 0.3, 0.07)


class TestReducedSS:
    def test_matches_lstsq_oracle_many_cases(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            k = int(rng.integers(4, 40))
            freq = float(rng.uniform(0.1, TWO_PI - 0.1))
            rate = float(rng.uniform(0.01, np.pi / 2 - 0.01))
            if is_degenerate(k, freq, rate):
                continue
            y = rng.normal(size=k)
            assert reduced_ss(y, freq, rate) == pytest.approx(
                lstsq_residual(design(k, freq, rate), y), abs=1e-9
            )

    def test_exact_chirp_leaves_nothing(self):
        y = chirp_vec(25, 0.8, 0.12, 1.3, -0.4)
        assert reduced_ss(y, 0.8, 0.12) == pytest.approx(0.0, abs=1e-18)

    def test_orthogonal_complement_keeps_everything(self):
        rng = np.random.default_rng(11)
        k, freq, rate = 20, 1.1, 0.2
        z = design(k, freq, rate)
        y = rng.normal(size=k)
        y_perp = y - z @ np.linalg.lstsq(z, y, rcond=None)[0]
        assert reduced_ss(y_perp, freq, rate) == pytest.approx(
            float(y_perp @ y_perp), rel=1e-12
        )

    def test_degenerate_points_raise(self):
        y = np.ones(10)
        with pytest.raises(DegenerateDesignError):
            reduced_ss(y, 0.0, 0.0)
        with pytest.raises(DegenerateDesignError):
            reduced_ss(y, np.pi, 0.0)

    @given(
        seed=st.integers(0, 2**16),
        k=st.integers(4, 30),
        freq=st.floats(0.05, 3.0),
        rate=st.floats(0.01, 1.5),
    )
    @settings(max_examples=60, deadline=None)
    def test_bounded_by_total_energy(self, seed, k, freq, rate):
        if is_degenerate(k, freq, rate):
            return
        y = np.random.default_rng(seed).normal(size=k)
        r = reduced_ss(y, freq, rate)
        assert 0.0 <= r <= float(y @ y) * (1 + 1e-12) + 1e-12


class TestSolveAmplitudes:
    def test_matches_lstsq_coefficients(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            k = int(rng.integers(5, 30))
            freq = float(rng.uniform(0.2, 3.0))
            rate = float(rng.uniform(0.02, 1.0))
            if is_degenerate(k, freq, rate):
                continue
            y = rng.normal(size=k)
            coef = np.linalg.lstsq(design(k, freq, rate), y, rcond=None)[0]
            a, b = solve_amplitudes(y, freq, rate)
            assert a == pytest.approx(coef[0], abs=1e-10)
            assert b == pytest.approx(coef[1], abs=1e-10)

    def test_recovers_planted_pair(self):
        y = chirp_vec(30, 0.6, 0.09, -2.0, 0.75)
        a, b = solve_amplitudes(y, 0.6, 0.09)
        assert a == pytest.approx(-2.0, abs=1e-12)
        assert b == pytest.approx(0.75, abs=1e-12)


class TestConfig:
    def test_for_length_defaults(self):
        cfg = SearchConfig1D.for_length(50)
        assert cfg.freq_grid_count == 100
        assert cfg.rate_grid_count == 2500
        assert SearchConfig1D.for_length(100).rate_grid_count == 4096

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            SearchConfig1D(freq_grid_count=0, rate_grid_count=10)
        with pytest.raises(ValueError):
            SearchConfig1D(freq_grid_count=10, rate_grid_count=10, freq_range=(1.0, 1.0))
        with pytest.raises(ValueError):
            SearchConfig1D.for_length(1)


class TestGridSearch:
    CFG = SearchConfig1D(freq_grid_count=24, rate_grid_count=60)

    def grids(self, cfg):
        f_lo, f_hi = cfg.freq_range
        r_lo, r_hi = cfg.rate_range
        freqs = f_lo + (f_hi - f_lo) * np.arange(cfg.freq_grid_count) / cfg.freq_grid_count
        rates = r_lo + (r_hi - r_lo) * np.arange(cfg.rate_grid_count) / cfg.rate_grid_count
        return freqs, rates

    def brute_force(self, y, cfg):
        """Row-major scan over the lattice with the lstsq oracle."""
        freqs, rates = self.grids(cfg)
        best = (None, None, np.inf)
        evals = skipped = 0
        for f in freqs:
            for r in rates:
                if is_degenerate(y.size, f, r):
                    skipped += 1
                    continue
                evals += 1
                obj = lstsq_residual(design(y.size, f, r), y)
                if obj < best[2]:
                    best = (f, r, obj)
        return best, evals, skipped

    def test_recovers_on_lattice_chirp(self):
        freqs, rates = self.grids(self.CFG)
        f0, r0 = float(freqs[7]), float(rates[23])
        rng = np.random.default_rng(3)
        y = chirp_vec(12, f0, r0, 1.0, 0.5) + 0.05 * rng.normal(size=12)
        out = grid_search_1d(y, self.CFG)
        assert out.freq == f0
        assert out.rate == r0

    def test_matches_brute_force_oracle(self):
        freqs, rates = self.grids(self.CFG)
        rng = np.random.default_rng(17)
        y = chirp_vec(12, float(freqs[15]), float(rates[41]), 0.8, -0.6)
        y += 0.1 * rng.normal(size=12)
        out = grid_search_1d(y, self.CFG)
        (bf, br, bobj), evals, skipped = self.brute_force(y, self.CFG)
        assert out.freq == bf
        assert out.rate == br
        assert out.objective == pytest.approx(bobj, abs=1e-9)
        assert out.evals == evals
        assert out.skipped == skipped

    def test_pure_noise_objective_near_oracle_minimum(self):
        # single-precision ranking may pick a near-tied cell, but its
        # double-precision objective must sit within the scan's resolution
        y = np.random.default_rng(29).normal(size=12)
        out = grid_search_1d(y, self.CFG)
        (_, _, bobj), _, _ = self.brute_force(y, self.CFG)
        assert out.objective >= bobj - 1e-9
        assert out.objective <= bobj + 1e-4 * float(y @ y)

    def test_skips_degenerate_lattice_points(self):
        # the default ranges place (0, 0) and (pi, 0) exactly on this lattice
        y = np.random.default_rng(1).normal(size=12)
        out = grid_search_1d(y, self.CFG)
        assert out.skipped == 2
        assert out.evals == 24 * 60 - 2

    def test_objective_is_double_precision_value(self):
        y = np.random.default_rng(100).normal(size=12)
        out = grid_search_1d(y, self.CFG)
        assert out.objective == pytest.approx(
            lstsq_residual(design(12, out.freq, out.rate), y), abs=1e-9
        )


class TestCanonicalFold:
    def test_identity_inside_domain(self):
        f, r, s = canonical_freq_rate(1.3, 0.4)
        assert (f, r, s) == (1.3, 0.4, 1.0)

    def test_reflection_folds_back(self):
        f, r, s = canonical_freq_rate(TWO_PI - 1.3, -0.4)
        assert f == pytest.approx(1.3, abs=1e-12)
        assert r == pytest.approx(0.4, abs=1e-12)
        assert s == -1.0

    def test_pi_pair_translation(self):
        f, r, s = canonical_freq_rate(1.3 + math.pi, 0.4 + math.pi)
        assert f == pytest.approx(1.3, abs=1e-12)
        assert r == pytest.approx(0.4, abs=1e-12)
        assert s == 1.0

    def test_rate_half_pi_is_fixed_point(self):
        f, r, s = canonical_freq_rate(1.0, math.pi / 2)
        assert r == math.pi / 2
        assert s == 1.0

    @given(
        f0=st.floats(0.05, TWO_PI - 0.05),
        r0=st.floats(0.01, math.pi / 2 - 0.01),
        wraps_f=st.integers(-2, 2),
        wraps_r=st.integers(-2, 2),
        pair_shift=st.integers(-1, 1),
        reflect=st.booleans(),
    )
    @settings(max_examples=80, deadline=None)
    def test_fold_inverts_every_alias(self, f0, r0, wraps_f, wraps_r, pair_shift, reflect):
        f = f0 + wraps_f * TWO_PI + pair_shift * math.pi
        r = r0 + wraps_r * TWO_PI + pair_shift * math.pi
        if reflect:
            f, r = -f, -r
        fc, rc, s = canonical_freq_rate(f, r)
        assert fc == pytest.approx(f0, abs=1e-9)
        assert rc == pytest.approx(r0, abs=1e-9)
        assert s == (-1.0 if reflect else 1.0)

    @given(
        f0=st.floats(0.05, TWO_PI - 0.05),
        r0=st.floats(0.01, math.pi / 2 - 0.01),
        pair_shift=st.integers(-1, 1),
        reflect=st.booleans(),
        seed=st.integers(0, 2**31),
    )
    @settings(max_examples=40, deadline=None)
    def test_fold_preserves_fit_on_data(self, f0, r0, pair_shift, reflect, seed):
        # the folded point must explain any data vector exactly as well as
        # the alias it came from, with only the sine amplitude changing sign
        k = 17
        f = f0 + pair_shift * math.pi
        r = r0 + pair_shift * math.pi
        if reflect:
            f, r = -f, -r
        y = np.random.default_rng(seed).normal(size=k)
        fc, rc, s = canonical_freq_rate(f, r)
        assert reduced_ss(y, fc, rc) == pytest.approx(reduced_ss(y, f, r), rel=1e-9, abs=1e-9)
        a0, b0 = solve_amplitudes(y, f, r)
        a1, b1 = solve_amplitudes(y, fc, rc)
        assert a1 == pytest.approx(a0, rel=1e-7, abs=1e-9)
        assert b1 == pytest.approx(s * b0, rel=1e-7, abs=1e-9)


class TestRefine:
    def test_stays_at_truth(self):
        y = chirp_vec(24, 0.9, 0.11, 1.0, -0.3)
        fit = refine_1d(y, (0.9, 0.11), SearchConfig1D.for_length(24))
        assert fit.converged
        assert fit.objective == pytest.approx(0.0, abs=1e-15)
        assert fit.freq == pytest.approx(0.9, abs=1e-6)
        assert fit.rate == pytest.approx(0.11, abs=1e-7)

    def test_recovers_from_lattice_offset(self):
        k = 24
        y = chirp_vec(k, 0.9, 0.11, 1.0, -0.3)
        init = (0.9 + np.pi / (2 * k) * 0.4, 0.11 - np.pi / (4 * k * k) * 0.4)
        fit = refine_1d(y, init, SearchConfig1D.for_length(k))
        assert fit.freq == pytest.approx(0.9, abs=1e-6)
        assert fit.rate == pytest.approx(0.11, abs=1e-7)
        assert fit.amp_cos == pytest.approx(1.0, abs=1e-5)
        assert fit.amp_sin == pytest.approx(-0.3, abs=1e-5)

    def test_iteration_budget_flag(self):
        y = chirp_vec(24, 0.9, 0.11, 1.0, -0.3) + 0.2 * np.random.default_rng(4).normal(size=24)
        cfg = SearchConfig1D(freq_grid_count=48, rate_grid_count=64, refine_max_iters=1)
        fit = refine_1d(y, (0.5, 0.2), cfg)
        assert not fit.converged
        assert "refine-not-converged" in fit.flags


class TestEstimate1D:
    def test_noiseless_column_recovery(self):
        M, N = 32, 8
        g = synthesize(PARAMS_REF, M, N)
        n0 = 3
        eff = column_effective(PARAMS_REF, n0)
        fit = estimate_1d(g.column(n0))
        assert fit.freq == pytest.approx(wrap_two_pi(eff.freq), abs=1e-6)
        assert fit.rate == pytest.approx(eff.rate, abs=1e-8)
        assert fit.amp_cos == pytest.approx(eff.amp_cos, abs=1e-5)
        assert fit.amp_sin == pytest.approx(eff.amp_sin, abs=1e-5)
        assert fit.objective == pytest.approx(0.0, abs=1e-12)

    def test_eval_bookkeeping(self):
        y = chirp_vec(16, 0.7, 0.05, 1.0, 0.2)
        fit = estimate_1d(y)
        assert fit.grid_evals > 0
        assert fit.evals > fit.grid_evals

    def test_zero_vector_short_circuits(self):
        fit = estimate_1d(np.zeros(16))
        assert fit.flags == ("zero-signal",)
        assert fit.amp_cos == 0.0 and fit.amp_sin == 0.0
        assert fit.objective == 0.0
        assert fit.evals == fit.grid_evals

    def test_sign_flip_negates_amplitudes_exactly(self):
        rng = np.random.default_rng(9)
        y = chirp_vec(20, 1.3, 0.17, 0.9, 0.4) + 0.1 * rng.normal(size=20)
        f1 = estimate_1d(y)
        f2 = estimate_1d(-y)
        assert f2.freq == f1.freq
        assert f2.rate == f1.rate
        assert f2.amp_cos == -f1.amp_cos
        assert f2.amp_sin == -f1.amp_sin

    def test_frequency_reported_mod_two_pi(self):
        rng = np.random.default_rng(15)
        for seed in range(3):
            y = np.random.default_rng(seed).normal(size=14)
            fit = estimate_1d(y)
            assert 0.0 <= fit.freq < TWO_PI

    def test_short_vector_stays_in_domain(self):
        # wide basins on short vectors let the simplex wander across the
        # rate boundary into the reflected alias; the fit must come back
        # folded, with the true rate sign
        for k in (5, 6, 7):
            y = chirp_vec(k, 0.4167, 0.125, 1.0, 0.5)
            fit = estimate_1d(y)
            assert 0.0 <= fit.freq < TWO_PI
            assert 0.0 <= fit.rate <= np.pi / 2
            assert fit.freq == pytest.approx(0.4167, abs=1e-5)
            assert fit.rate == pytest.approx(0.125, abs=1e-5)
            assert fit.amp_cos == pytest.approx(1.0, abs=1e-4)
            assert fit.amp_sin == pytest.approx(0.5, abs=1e-4)

    def test_noisy_short_vectors_stay_in_domain(self):
        rng = np.random.default_rng(33)
        for _ in range(20):
            k = int(rng.integers(5, 10))
            y = chirp_vec(k, 1.1, 0.3, 1.0, -0.4) + 0.5 * rng.normal(size=k)
            fit = estimate_1d(y)
            assert 0.0 <= fit.freq < TWO_PI
            assert 0.0 <= fit.rate <= np.pi / 2

    def test_result_type(self):
        fit = estimate_1d(chirp_vec(12, 0.5, 0.1, 1.0, 0.0))
        assert isinstance(fit, Fit1D)
