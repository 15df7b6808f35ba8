"""Seeded Monte Carlo engine: threshold calibration and error-rate estimation.

Streams
-------
Each purpose gets its own Philox stream tag so estimates never share noise:
calibration idle slots, evaluation idle slots, active-slot noise, message
draws, and random payloads are all independent. Within a stream, trial t
lives in block t // TRIALS_PER_BLOCK, so results are bit-stable and
independent of how trials are sharded across workers.

The threshold is always fit on the calibration stream and the achieved false
alarm rate re-estimated on the evaluation stream, avoiding the optimistic
bias of reusing the fitting sample.
"""

import time
from dataclasses import dataclass

import numpy as np
from scipy.stats import beta as beta_dist

from .channel import TRIALS_PER_BLOCK, gaussian_block, uniform_block
from .detectors import batch_statistic

__all__ = [
    "RateEstimate",
    "CalibrationResult",
    "clopper_pearson",
    "calibrate_threshold",
    "estimate_rates",
    "write_manifest",
]

# stream tags (streams 0-3 are taken by emit_slot and the bound estimators)
STREAM_CALIBRATION = 4
STREAM_IDLE_EVAL = 5
STREAM_ACTIVE_NOISE = 6
STREAM_MESSAGES = 7
STREAM_PAYLOAD = 8


def clopper_pearson(successes, trials, level=0.95):
    """Exact two-sided binomial confidence interval."""
    if not 0 <= successes <= trials:
        raise ValueError("need 0 <= successes <= trials")
    if not 0.0 < level < 1.0:
        raise ValueError("confidence level must lie in (0, 1)")
    alpha = 1.0 - level
    low = 0.0 if successes == 0 else float(beta_dist.ppf(alpha / 2, successes, trials - successes + 1))
    high = 1.0 if successes == trials else float(beta_dist.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return low, high


@dataclass(frozen=True)
class RateEstimate:
    p_hat: float
    trials: int
    ci_low: float
    ci_high: float

    @classmethod
    def from_counts(cls, successes, trials, level=0.95):
        low, high = clopper_pearson(successes, trials, level)
        return cls(p_hat=successes / trials, trials=trials, ci_low=low, ci_high=high)


@dataclass(frozen=True)
class CalibrationResult:
    gamma: float
    achieved_pfa: RateEstimate
    infeasible: bool = False


def _blocks(trials):
    done = 0
    block = 0
    while done < trials:
        yield block, min(TRIALS_PER_BLOCK, trials - done)
        done += TRIALS_PER_BLOCK
        block += 1


def _idle_stats(spec, plan, params, trials, seed, stream, cb=None):
    out = np.empty(trials)
    done = 0
    genie_x = np.ones(params.n) if spec.kind == "genie" else None
    for block, count in _blocks(trials):
        y = gaussian_block(params.sigma2, seed, stream, block, (TRIALS_PER_BLOCK, params.n))[:count]
        stats, _ = batch_statistic(spec, y, plan, params, cb=cb, genie_x=genie_x)
        out[done : done + count] = stats
        done += count
    return out


def calibrate_threshold(spec, plan, params, trials, eps_fa, seed, cb=None):
    """Fit gamma to the empirical (1 - eps_fa)-quantile of the idle statistic.

    The quantile is linearly interpolated between order statistics; the
    achieved false alarm rate is re-estimated on an independent stream with
    the same trial count. Requires trials >= 50 / eps_fa so the target
    quantile is resolvable.
    """
    trials = int(trials)
    if trials < 50 / eps_fa:
        raise ValueError(f"need >= {int(np.ceil(50 / eps_fa))} trials to resolve eps_fa={eps_fa}")
    stats = _idle_stats(spec, plan, params, trials, seed, STREAM_CALIBRATION, cb)
    gamma = float(np.quantile(stats, 1.0 - eps_fa, method="linear"))
    # degenerate statistic: an atom at the maximum heavier than the target
    infeasible = bool(np.mean(stats >= stats.max()) > eps_fa)
    eval_stats = _idle_stats(spec, plan, params, trials, seed, STREAM_IDLE_EVAL, cb)
    achieved = RateEstimate.from_counts(int(np.sum(eval_stats >= gamma)), trials)
    return CalibrationResult(gamma=gamma, achieved_pfa=achieved, infeasible=infeasible)


def _draw_messages(M, seed, block, count):
    u = uniform_block(seed, STREAM_MESSAGES, block, (TRIALS_PER_BLOCK,))[:count]
    return np.minimum((u * M).astype(np.int64), M - 1) + 1


def _draw_payload(n_c, seed, block, count):
    u = uniform_block(seed, STREAM_PAYLOAD, block, (TRIALS_PER_BLOCK, n_c))[:count]
    return np.where(u < 0.5, 1.0, -1.0)


def estimate_rates(spec, plan, params, trials, seed, cb=None, decode=True):
    """Monte Carlo error rates at the calibrated threshold in `spec.gamma`.

    Returns a dict with keys pfa, pmd, pcw, pie. Idle slots drive pfa; active
    slots with uniformly drawn messages (or i.i.d. random payload when no
    codebook is supplied) drive the rest. pcw is conditioned on detection and
    is None when no codebook is attached or no trial was detected.
    """
    trials = int(trials)
    if not np.isfinite(spec.gamma):
        raise ValueError("detector threshold gamma is not set; calibrate first")
    gamma = spec.gamma

    idle_stats = _idle_stats(spec, plan, params, trials, seed, STREAM_IDLE_EVAL, cb)
    n_fa = int(np.sum(idle_stats >= gamma))

    from .codebook import ml_decode  # local import avoids a cycle at module load

    n_md = 0
    n_detected = 0
    n_cw_err = 0
    n_ie = 0
    for block, count in _blocks(trials):
        z = gaussian_block(params.sigma2, seed, STREAM_ACTIVE_NOISE, block,
                           (TRIALS_PER_BLOCK, params.n))[:count]
        if cb is not None:
            m = _draw_messages(cb.M, seed, block, count)
            x_c = cb.codewords[m - 1]
        else:
            m = None
            x_c = _draw_payload(plan.n_c, seed, block, count)
        x = np.concatenate([np.broadcast_to(plan.preamble, (count, plan.n_p)), x_c], axis=1)
        y = x + z

        stats, m_hat = batch_statistic(spec, y, plan, params, cb=cb, genie_x=x)
        detected = stats >= gamma
        if m_hat is None and cb is not None and decode:
            m_hat, _ = ml_decode(cb, y[:, plan.n_p :])

        n_md += int(np.sum(~detected))
        n_detected += int(np.sum(detected))
        if m is not None and m_hat is not None:
            wrong = m_hat != m
            n_cw_err += int(np.sum(detected & wrong))
            n_ie += int(np.sum(~detected | wrong))
        else:
            n_ie += int(np.sum(~detected))

    out = {
        "pfa": RateEstimate.from_counts(n_fa, trials),
        "pmd": RateEstimate.from_counts(n_md, trials),
        "pie": RateEstimate.from_counts(n_ie, trials),
    }
    if cb is not None and decode and n_detected > 0:
        out["pcw"] = RateEstimate.from_counts(n_cw_err, n_detected)
    else:
        out["pcw"] = None
    return out


def write_manifest(path, entries):
    """Write a run manifest as line-based key=value text."""
    lines = [f"{k}={v}" for k, v in entries.items()]
    lines.append(f"written_unix={time.time():.3f}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
