import math

import numpy as np
import pytest
from scipy.stats import binom

from jdd.channel import ChannelParams, FramePlan
from jdd.codebook import hamming_7_4, repetition_code
from jdd.detectors import DetectorSpec
from jdd.montecarlo import (
    RateEstimate,
    calibrate_threshold,
    clopper_pearson,
    estimate_rates,
    write_manifest,
)
from jdd.numerics import q_func, q_inv


def cp_bisect_oracle(successes, trials, level=0.95):
    """Clopper-Pearson by direct bisection on the binomial CDF tails."""
    alpha = 1.0 - level

    def solve(f, lo, hi):
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if f(mid):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    low = 0.0 if successes == 0 else solve(
        lambda p: binom.sf(successes - 1, trials, p) < alpha / 2, 0.0, 1.0
    )
    high = 1.0 if successes == trials else solve(
        lambda p: binom.cdf(successes, trials, p) > alpha / 2, 0.0, 1.0
    )
    return low, high


class TestClopperPearson:
    @pytest.mark.parametrize("successes,trials", [(0, 50), (1, 50), (7, 200), (199, 200), (200, 200)])
    def test_against_bisection_oracle(self, successes, trials):
        got = clopper_pearson(successes, trials)
        want = cp_bisect_oracle(successes, trials)
        assert got[0] == pytest.approx(want[0], abs=1e-9)
        assert got[1] == pytest.approx(want[1], abs=1e-9)

    def test_contains_point_estimate(self):
        low, high = clopper_pearson(13, 400)
        assert low < 13 / 400 < high

    def test_edge_cases(self):
        assert clopper_pearson(0, 100)[0] == 0.0
        assert clopper_pearson(100, 100)[1] == 1.0

    def test_domain(self):
        with pytest.raises(ValueError):
            clopper_pearson(5, 4)
        with pytest.raises(ValueError):
            clopper_pearson(1, 10, level=1.0)

    def test_rate_estimate_wrapper(self):
        est = RateEstimate.from_counts(3, 60)
        assert est.p_hat == pytest.approx(0.05)
        assert est.ci_low < 0.05 < est.ci_high


class TestCalibrateThreshold:
    def test_trials_precondition(self):
        params = ChannelParams.from_db(-3.0, 8)
        plan = FramePlan(n_p=8, n_c=0)
        with pytest.raises(ValueError):
            calibrate_threshold(DetectorSpec(kind="preamble"), plan, params, 100, 1e-4, 0)

    def test_genie_gamma_matches_quantile(self):
        # idle genie statistic ~ N(0, n sigma2): gamma ~= sqrt(n sigma2) Q^-1(eps_fa)
        params = ChannelParams.from_db(-3.0, 84)
        plan = FramePlan(n_p=0, n_c=84)
        eps_fa = 1e-3
        trials = 200_000
        res = calibrate_threshold(DetectorSpec(kind="genie"), plan, params, trials, eps_fa, 11)
        scale = math.sqrt(84 * params.sigma2)
        gamma_true = scale * q_inv(eps_fa)
        # standard error of the empirical quantile via the density at the target
        pdf = math.exp(-q_inv(eps_fa) ** 2 / 2) / math.sqrt(2 * math.pi) / scale
        se = math.sqrt(eps_fa * (1 - eps_fa) / trials) / pdf
        assert abs(res.gamma - gamma_true) < 5 * se
        assert not res.infeasible
        assert res.achieved_pfa.ci_low <= eps_fa <= res.achieved_pfa.ci_high

    def test_deterministic(self):
        params = ChannelParams.from_db(-2.0, 16)
        plan = FramePlan(n_p=4, n_c=12)
        spec = DetectorSpec(kind="hyped-exact")
        a = calibrate_threshold(spec, plan, params, 5000, 1e-1, 7)
        b = calibrate_threshold(spec, plan, params, 5000, 1e-1, 7)
        assert a == b

    def test_seed_changes_result(self):
        params = ChannelParams.from_db(-2.0, 16)
        plan = FramePlan(n_p=4, n_c=12)
        spec = DetectorSpec(kind="hyped-exact")
        a = calibrate_threshold(spec, plan, params, 5000, 1e-1, 7)
        b = calibrate_threshold(spec, plan, params, 5000, 1e-1, 8)
        assert a.gamma != b.gamma

    def test_degenerate_statistic_flagged_infeasible(self):
        # noiseless idle slots give a one-atom statistic; no threshold can
        # achieve a sub-atom false alarm rate
        params = ChannelParams(es_n0_db=0.0, sigma2=0.0, n=8)
        plan = FramePlan(n_p=8, n_c=0)
        res = calibrate_threshold(DetectorSpec(kind="hyped-heuristic"), plan, params, 1000, 0.1, 0)
        assert res.infeasible


class TestEstimateRates:
    def setup_method(self):
        self.cb = hamming_7_4()
        self.params = ChannelParams.from_db(0.0, 10)
        self.plan = FramePlan(n_p=3, n_c=7)

    def test_requires_threshold(self):
        with pytest.raises(ValueError):
            estimate_rates(DetectorSpec(kind="dad"), self.plan, self.params, 100, 0, cb=self.cb)

    def test_noiseless_all_rates_zero(self):
        params = ChannelParams(es_n0_db=0.0, sigma2=0.0, n=10)
        spec = DetectorSpec(kind="dad").with_gamma(5.0)  # 0 < gamma < n
        rates = estimate_rates(spec, self.plan, params, 2000, 0, cb=self.cb)
        assert rates["pfa"].p_hat == 0.0
        assert rates["pmd"].p_hat == 0.0
        assert rates["pcw"].p_hat == 0.0
        assert rates["pie"].p_hat == 0.0

    def test_deterministic(self):
        spec = DetectorSpec(kind="dad").with_gamma(6.0)
        a = estimate_rates(spec, self.plan, self.params, 20_000, 5, cb=self.cb)
        b = estimate_rates(spec, self.plan, self.params, 20_000, 5, cb=self.cb)
        assert a == b

    def test_genie_pmd_matches_closed_form(self):
        # active genie statistic ~ N(n, n sigma2)
        params = ChannelParams.from_db(-3.0, 84)
        plan = FramePlan(n_p=0, n_c=84)
        gamma = 30.0
        spec = DetectorSpec(kind="genie").with_gamma(gamma)
        trials = 100_000
        rates = estimate_rates(spec, plan, params, trials, 3, cb=None)
        scale = math.sqrt(84 * params.sigma2)
        pmd_true = 1.0 - q_func((gamma - 84) / scale)
        se = math.sqrt(pmd_true * (1 - pmd_true) / trials)
        assert abs(rates["pmd"].p_hat - pmd_true) < 5 * se

    def test_inclusive_error_counting_identity(self):
        # an inclusive error is a miss or a detected-but-wrong decode, so the
        # raw counts must satisfy n_ie = n_md + n_cw exactly
        spec = DetectorSpec(kind="dad").with_gamma(5.0)
        trials = 20_000
        rates = estimate_rates(spec, self.plan, self.params, trials, 9, cb=self.cb)
        n_md = round(rates["pmd"].p_hat * trials)
        n_ie = round(rates["pie"].p_hat * trials)
        n_cw = round(rates["pcw"].p_hat * rates["pcw"].trials)
        assert n_ie == n_md + n_cw
        assert rates["pcw"].trials == trials - n_md

    def test_sandwich_holds_empirically(self):
        spec = DetectorSpec(kind="dad").with_gamma(6.0)
        rates = estimate_rates(spec, self.plan, self.params, 20_000, 4, cb=self.cb)
        pmd, pie = rates["pmd"].p_hat, rates["pie"].p_hat
        assert max(pmd, rates["pcw"].p_hat * rates["pcw"].trials / 20_000) <= pie
        assert pie <= pmd + rates["pcw"].p_hat + 1e-12

    def test_no_codebook_gives_no_pcw(self):
        spec = DetectorSpec(kind="preamble").with_gamma(2.0)
        rates = estimate_rates(spec, self.plan, self.params, 5000, 2, cb=None)
        assert rates["pcw"] is None
        assert rates["pie"].p_hat == rates["pmd"].p_hat

    def test_decode_disabled(self):
        spec = DetectorSpec(kind="preamble").with_gamma(2.0)
        rates = estimate_rates(spec, self.plan, self.params, 5000, 2, cb=self.cb, decode=False)
        assert rates["pcw"] is None

    def test_repetition_pcw_beats_high_rate_code(self):
        # at equal n_c the repetition code should decode more reliably
        params = ChannelParams.from_db(-3.0, 7)
        plan = FramePlan(n_p=0, n_c=7)
        spec = DetectorSpec(kind="dad").with_gamma(-1e9)  # always detect
        rep = estimate_rates(spec, plan, params, 20_000, 6, cb=repetition_code(7))
        ham = estimate_rates(spec, plan, params, 20_000, 6, cb=hamming_7_4())
        assert rep["pcw"].p_hat < ham["pcw"].p_hat


class TestWriteManifest:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "manifest.txt"
        write_manifest(path, {"seed": 7, "trials": 1000, "scheme": "dad"})
        text = path.read_text().splitlines()
        assert "seed=7" in text
        assert "trials=1000" in text
        assert any(line.startswith("written_unix=") for line in text)
