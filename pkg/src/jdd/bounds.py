"""Finite-blocklength bounds for joint detection and decoding on BI-AWGN.

Closed forms: the genie-aided converse on the blocklength/SNR, the
decoder-aided-detection (DAD) achievability bounds and threshold choice, and
the inclusive-error sandwich. Monte Carlo: the dependence-testing (DT)
achievability bound and the meta-converse bound, both driven by the BI-AWGN
information density with equiprobable inputs.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .channel import TRIALS_PER_BLOCK, gaussian_block
from .numerics import q_func, q_inv

__all__ = [
    "Requirements",
    "BoundPoint",
    "min_blocklength",
    "min_snr_db",
    "dad_gamma",
    "dad_error_bounds",
    "dad_max_code_size",
    "info_density_samples",
    "dt_error_estimate",
    "dt_bound_max_M",
    "meta_converse_beta",
    "meta_converse_max_M",
    "meta_converse_min_error",
    "pie_sandwich",
]


@dataclass(frozen=True)
class Requirements:
    """Target error rates: false alarm, missed detection, inclusive error."""

    eps_fa: float
    eps_md: float
    eps_ie: float

    def __post_init__(self):
        for name in ("eps_fa", "eps_md", "eps_ie"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")


@dataclass(frozen=True)
class BoundPoint:
    n: int
    es_n0_db: float
    value: float
    kind: str    # "achievability" | "converse"
    scheme: str


def _clip01(p):
    return float(min(1.0, max(0.0, p)))


def min_blocklength(sigma2, req):
    """Genie converse: n >= sigma2 * (Q^-1(eps_fa) - Q^-1(1 - eps_md))^2.

    Returns the real-valued bound; take the ceiling for integer feasibility.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    gap = q_inv(req.eps_fa) - q_inv(1.0 - req.eps_md)
    return float(sigma2 * gap * gap)


def min_snr_db(n, req):
    """Same converse solved for the SNR at fixed n, in dB.

    Returns -inf when the detection targets are met at any SNR (gap = 0).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    gap = q_inv(req.eps_fa) - q_inv(1.0 - req.eps_md)
    if gap <= 0:
        return float("-inf")
    return float(10.0 * np.log10(gap * gap / (2.0 * n)))


def dad_gamma(n, sigma2, eps_fa, M):
    """Union-bound threshold gamma = sqrt(n sigma2) * Q^-1(eps_fa / M)."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return float(np.sqrt(n * sigma2) * q_inv(eps_fa / M))


def dad_error_bounds(n, sigma2, gamma, M):
    """DAD achievability: (P_FA upper bound, P_MD upper bound).

    P_FA <= M Q(gamma / sqrt(n sigma2)), P_MD <= 1 - Q((gamma - n) / sqrt(n sigma2));
    both clipped to [0, 1]. The inclusive-error upper bound is pmd_ub plus an
    achievable codeword error rate, see pie_sandwich.
    """
    scale = np.sqrt(n * sigma2)
    pfa_ub = _clip01(M * q_func(gamma / scale))
    pmd_ub = _clip01(1.0 - q_func((gamma - n) / scale))
    return pfa_ub, pmd_ub


def dad_max_code_size(n, sigma2, req, m_star, max_rounds=100):
    """Largest code size certified by the DAD achievability bound.

    Fixed-point iteration: start at the detection-limited term
    floor(eps_fa / Q(Q^-1(1 - eps_md) + sqrt(n / sigma2))), then repeatedly
    cap by m_star(p_e, n, sigma2) where
    p_e = eps_ie - 1 + Q(Q^-1(eps_fa / M) - sqrt(n / sigma2)) until M is
    stable. Returns 0 when infeasible. `m_star` is any achievability oracle
    for synchronous transmission (the DT bound in this package).
    """
    if n < min_blocklength(sigma2, req):
        return 0
    root = np.sqrt(n / sigma2)
    denom = q_func(q_inv(1.0 - req.eps_md) + root)
    if denom > 0:
        m_det = min(1 << n, int(np.floor(req.eps_fa / denom)))
    else:
        m_det = 1 << n  # detection term underflows: detection is unconstraining
    if m_det < 1:
        return 0
    M = m_det
    for _ in range(max_rounds):
        p_e = req.eps_ie - 1.0 + q_func(q_inv(req.eps_fa / M) - root)
        if p_e <= 0.0:
            # the missed-detection term alone exceeds the eps_ie budget
            M //= 2
            if M < 1:
                return 0
            continue
        M_new = min(m_det, int(m_star(p_e, n, sigma2)))
        if M_new < 1:
            return 0
        if M_new >= M:
            return M
        M = M_new
    return M


# ---------------------------------------------------------------------------
# information-density Monte Carlo machinery (DT and meta-converse)
# ---------------------------------------------------------------------------

def info_density_samples(n, sigma2, trials, seed, stream=1):
    """i.i.d. samples of the n-use BI-AWGN information density under the joint law.

    Equiprobable +/-1 inputs; by symmetry the all-plus input is transmitted
    and i = n ln 2 - sum_j ln(1 + exp(-2 y_j / sigma2)) with y_j = 1 + z_j.
    """
    trials = int(trials)
    out = np.empty(trials)
    done = 0
    block = 0
    while done < trials:
        b = min(TRIALS_PER_BLOCK, trials - done)
        z = gaussian_block(sigma2, seed, stream, block, (TRIALS_PER_BLOCK, n))[:b]
        y = 1.0 + z
        t = -2.0 * y / sigma2
        # stable softplus: ln(1 + e^t)
        sp = np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))
        out[done : done + b] = n * np.log(2.0) - sp.sum(axis=1)
        done += b
        block += 1
    return out


def dt_error_estimate(info_dens, M):
    """DT bound on the average error for code size M: (estimate, stderr).

    E[exp(-max(0, i - ln((M - 1) / 2)))] over the supplied information-density
    samples. M = 1 is error-free by convention.
    """
    if M <= 1:
        return 0.0, 0.0
    thr = np.log((M - 1) / 2.0)
    vals = np.exp(-np.maximum(0.0, info_dens - thr))
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(vals.size))


def dt_bound_max_M(n, sigma2, target_error, trials, seed):
    """Largest M whose DT error bound stays below target_error (Monte Carlo).

    A single sample of information densities is reused across the binary
    search over M. Emits a warning when the standard error at the returned M
    exceeds 10% of the target.
    """
    if trials < 1e4:
        raise ValueError("need at least 1e4 trials for the DT bound")
    dens = info_density_samples(n, sigma2, trials, seed, stream=1)
    lo, hi = 1, 1 << n  # noiseless BPSK cannot carry more than n bits
    if dt_error_estimate(dens, hi)[0] <= target_error:
        lo = hi
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if dt_error_estimate(dens, mid)[0] <= target_error:
            lo = mid
        else:
            hi = mid - 1
    est, se = dt_error_estimate(dens, lo)
    if se > 0.1 * target_error:
        warnings.warn(
            f"DT bound at n={n}: stderr {se:.2e} exceeds 10% of target {target_error:.1e}; "
            "increase trials",
            stacklevel=2,
        )
    return lo


def meta_converse_beta(n, sigma2, eps, trials, seed):
    """beta_{1-eps} for the test joint-law vs (input x induced output law).

    The Neyman-Pearson threshold keeps power 1 - eps under the joint law: it
    is the interpolated lower eps-quantile of the information density (one
    sample stream). The type-II error is estimated on an independent stream
    by the exact change of measure E_P[exp(-i) 1{i >= t}]. Returns
    (beta_hat, stderr, threshold).
    """
    if trials < 1e4:
        raise ValueError("need at least 1e4 trials for the meta-converse bound")
    dens_thr = info_density_samples(n, sigma2, trials, seed, stream=2)
    t = float(np.quantile(dens_thr, eps, method="linear"))
    dens = info_density_samples(n, sigma2, trials, seed, stream=3)
    w = np.where(dens >= t, np.exp(-dens), 0.0)
    return float(w.mean()), float(w.std(ddof=1) / np.sqrt(w.size)), t


def meta_converse_max_M(n, sigma2, target_error, trials, seed):
    """Converse on the code size: M <= 1 / beta_{1 - target_error}."""
    beta, se, _ = meta_converse_beta(n, sigma2, target_error, trials, seed)
    if se > 0.1 * max(beta, 1e-300):
        warnings.warn(
            f"meta-converse at n={n}: relative stderr {se / max(beta, 1e-300):.1%} above 10%; "
            "increase trials",
            stacklevel=2,
        )
    if beta <= 0.0:
        return 1 << n
    # tolerate last-ulp jitter in the weights before flooring
    return min(1 << n, int(np.floor((1.0 / beta) * (1.0 + 1e-9))))


def meta_converse_min_error(n, sigma2, M, trials, seed):
    """Smallest error rate consistent with code size M under the meta-converse.

    Finds the threshold t at which the estimated type-II error equals 1/M and
    reports the joint-law lower-tail mass below t. Returns 0 when even the
    largest threshold keeps beta above 1/M at the sample resolution.
    """
    if trials < 1e4:
        raise ValueError("need at least 1e4 trials for the meta-converse bound")
    dens_thr = np.sort(info_density_samples(n, sigma2, trials, seed, stream=2))
    dens = info_density_samples(n, sigma2, trials, seed, stream=3)
    target_beta = 1.0 / M

    def beta_at(t):
        return float(np.where(dens >= t, np.exp(-dens), 0.0).mean())

    lo, hi = dens_thr[0], dens_thr[-1]
    if beta_at(hi) > target_beta:
        # M out of reach even for the most selective observed threshold
        return float((dens_thr.size - 1) / dens_thr.size)
    if beta_at(lo) <= target_beta:
        return 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if beta_at(mid) > target_beta:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    return float(np.searchsorted(dens_thr, t) / dens_thr.size)


def pie_sandwich(pmd, pcw_lower, pcw_upper):
    """Inclusive-error sandwich: (max(pmd, pcw_lower), min(1, pmd + pcw_upper))."""
    for v in (pmd, pcw_lower, pcw_upper):
        if not 0.0 <= v <= 1.0:
            raise ValueError("sandwich inputs must lie in [0, 1]")
    return max(pmd, pcw_lower), min(1.0, pmd + pcw_upper)
