"""Experiment runner: rate-over-blocklength and error-rate-over-SNR sweeps.

Outputs one CSV per run with the fixed schema
``scheme,kind,n,es_n0_db,value,stderr,flag`` plus a line-based key=value run
manifest. Reference curves from other tools can be merged in untouched; their
value columns are copied byte for byte.
"""

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bounds
from .bounds import Requirements, dt_error_estimate, info_density_samples
from .channel import ChannelParams, FramePlan
from .codebook import load_generator
from .detectors import DetectorSpec
from .montecarlo import calibrate_threshold, estimate_rates, write_manifest
from .numerics import q_func, q_inv

__all__ = [
    "SweepConfig",
    "parse_config",
    "run_rate_sweep",
    "run_pie_sweep",
    "optimize_preamble_split",
    "run_bounds_report",
    "write_rows",
]

CSV_HEADER = ["scheme", "kind", "n", "es_n0_db", "value", "stderr", "flag"]

DEFAULT_SCHEMES = ("genie", "dad", "hyped", "preamble")


@dataclass
class SweepConfig:
    schemes: tuple = DEFAULT_SCHEMES
    es_n0_db: float = -3.0          # fixed SNR for rate sweeps
    n_grid: tuple = ()              # blocklength grid for rate sweeps
    snr_grid: tuple = ()            # SNR grid for error-rate sweeps
    n: int = 84                     # fixed slot length for error-rate sweeps
    k: int = 12
    eps_fa: float = 1e-4
    eps_md: float = 1e-4
    eps_ie: float = 1e-3
    trials: int = 100_000
    calib_trials: int = 0           # 0 = derive from eps_fa
    seed: int = 0
    out: str = "."
    codes: tuple = ()               # generator-matrix files for simulated points
    refs: tuple = ()                # external reference CSVs, merged untouched
    np_grid: tuple = ()             # preamble-split candidates; () = automatic

    @property
    def requirements(self):
        return Requirements(self.eps_fa, self.eps_md, self.eps_ie)

    def calibration_trials(self):
        floor = int(np.ceil(50 / self.eps_fa))
        return max(self.calib_trials or 0, floor, self.trials)


_LIST_KEYS = {"schemes": str, "n_grid": int, "snr_grid": float, "codes": str,
              "refs": str, "np_grid": int}
_SCALAR_KEYS = {"es_n0_db": float, "n": int, "k": int, "eps_fa": float, "eps_md": float,
                "eps_ie": float, "trials": int, "calib_trials": int, "seed": int, "out": str}


def parse_config(text):
    """Parse the line-based key=value grammar; lists are comma-separated."""
    cfg = SweepConfig()
    for raw in str(text).splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (expected key=value): {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in _LIST_KEYS:
            conv = _LIST_KEYS[key]
            items = tuple(conv(v.strip()) for v in value.split(",") if v.strip())
            setattr(cfg, key, items)
        elif key in _SCALAR_KEYS:
            setattr(cfg, key, _SCALAR_KEYS[key](value))
        else:
            raise ValueError(f"unknown config key {key!r}")
    return cfg


def _row(scheme, kind, n, es_n0_db, value, stderr="", flag=""):
    return {
        "scheme": scheme,
        "kind": kind,
        "n": str(n),
        "es_n0_db": f"{es_n0_db:g}" if not isinstance(es_n0_db, str) else es_n0_db,
        "value": f"{value:.10g}" if not isinstance(value, str) else value,
        "stderr": f"{stderr:.4g}" if isinstance(stderr, float) else str(stderr),
        "flag": flag,
    }


def _sort_key(row):
    try:
        sweep = (float(row["n"]), float(row["es_n0_db"]))
    except ValueError:
        sweep = (0.0, 0.0)
    # flag/value keep ties deterministic (e.g. several report rows per point)
    return (row["scheme"], row["kind"], *sweep, row["flag"], row["value"])


def ingest_reference(path):
    """Read an external reference CSV; value/stderr columns stay verbatim."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"reference CSV {path} lacks columns: {sorted(missing)}")
        for rec in reader:
            rec = {k: rec[k] for k in CSV_HEADER}
            if not rec["scheme"].startswith("ref:"):
                rec["scheme"] = "ref:" + rec["scheme"]
            rows.append(rec)
    return rows


def write_rows(rows, path):
    rows = sorted(rows, key=_sort_key)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        writer.writeheader()
        writer.writerows(rows)
    return path


def _dt_max_M(cfg):
    def oracle(target_error, n, sigma2):
        return bounds.dt_bound_max_M(n, sigma2, target_error, cfg.trials, cfg.seed)
    return oracle


def _split_candidates(cfg, n_total, k, scheme):
    if cfg.np_grid:
        cands = [p for p in cfg.np_grid if 0 <= p <= n_total - k]
    else:
        step = max(1, n_total // 8)
        cands = sorted({0, *range(step, n_total - k + 1, step), n_total - k})
    if scheme == "preamble":
        cands = [p for p in cands if p >= 1]
    return cands


def _hyped_pmd(n_p, n_c, params, cfg, scheme):
    """Calibrate the detector for one split and estimate its missed-detection rate.

    Uses the exact HyPED statistic (or the preamble-only statistic) with an
    i.i.d. random payload, which is exactly the model under which the HyPED
    LLR is the optimal Neyman-Pearson statistic.
    """
    plan = FramePlan(n_p=n_p, n_c=n_c)
    kind = "preamble" if scheme == "preamble" else "hyped-exact"
    spec = DetectorSpec(kind=kind)
    calib = calibrate_threshold(spec, plan, params, cfg.calibration_trials(), cfg.eps_fa, cfg.seed)
    rates = estimate_rates(spec.with_gamma(calib.gamma), plan, params, cfg.trials, cfg.seed)
    return plan, calib, rates["pmd"]


def run_rate_sweep(cfg, out_csv=None):
    """Rate-over-blocklength sweep at fixed SNR (bounds only).

    Per blocklength and scheme: the genie feasibility mask from the
    blocklength converse, the DAD achievable rate log2(M)/n, HyPED
    detection-feasibility combined with DT/meta-converse payload rates, and
    the genie DT/meta-converse reference rates.
    """
    if not cfg.n_grid:
        raise ValueError("rate sweep needs n_grid")
    req = cfg.requirements
    sigma2 = 1.0 / (2.0 * 10.0 ** (cfg.es_n0_db / 10.0))
    n_min = bounds.min_blocklength(sigma2, req)
    dt_oracle = _dt_max_M(cfg)
    rows = []
    for n in cfg.n_grid:
        if n < n_min:
            for scheme in cfg.schemes:
                rows.append(_row(scheme, "achievability", n, cfg.es_n0_db, 0.0, flag="infeasible"))
            continue
        if "genie" in cfg.schemes:
            m_ach = bounds.dt_bound_max_M(n, sigma2, cfg.eps_ie, cfg.trials, cfg.seed)
            m_con = bounds.meta_converse_max_M(n, sigma2, cfg.eps_ie, cfg.trials, cfg.seed)
            rows.append(_row("genie", "achievability", n, cfg.es_n0_db, np.log2(m_ach) / n))
            rows.append(_row("genie", "converse", n, cfg.es_n0_db, np.log2(max(m_con, 1)) / n))
        if "dad" in cfg.schemes:
            M = bounds.dad_max_code_size(n, sigma2, req, dt_oracle)
            if M >= 1:
                rows.append(_row("dad", "achievability", n, cfg.es_n0_db, np.log2(M) / n))
            else:
                rows.append(_row("dad", "achievability", n, cfg.es_n0_db, 0.0, flag="infeasible"))
        if "hyped" in cfg.schemes:
            rows.extend(_hyped_rate_point(cfg, n, sigma2, req))
    rows.extend(r for ref in cfg.refs for r in ingest_reference(ref))
    if out_csv:
        write_rows(rows, out_csv)
    return rows


def _hyped_rate_point(cfg, n, sigma2, req):
    """Best HyPED rate bounds over the preamble-split grid at one blocklength."""
    params = ChannelParams.from_db(cfg.es_n0_db, n)
    best_ach = None
    best_con = None
    for n_p in _split_candidates(cfg, n, 1, "hyped"):
        n_c = n - n_p
        if n_c < 1:
            continue
        _, _, pmd = _hyped_pmd(n_p, n_c, params, cfg, "hyped")
        if pmd.p_hat > req.eps_md:
            continue
        budget = req.eps_ie - pmd.p_hat
        if budget > 0:
            m_ach = bounds.dt_bound_max_M(n_c, sigma2, budget, cfg.trials, cfg.seed)
            rate = np.log2(m_ach) / n
            if best_ach is None or rate > best_ach[0]:
                best_ach = (rate, n_p)
        m_con = bounds.meta_converse_max_M(n_c, sigma2, req.eps_ie, cfg.trials, cfg.seed)
        rate = np.log2(max(m_con, 1)) / n
        if best_con is None or rate > best_con[0]:
            best_con = (rate, n_p)
    rows = []
    if best_ach:
        rows.append(_row("hyped", "achievability", n, cfg.es_n0_db, best_ach[0], flag=f"n_p={best_ach[1]}"))
    else:
        rows.append(_row("hyped", "achievability", n, cfg.es_n0_db, 0.0, flag="infeasible"))
    if best_con:
        rows.append(_row("hyped", "converse", n, cfg.es_n0_db, best_con[0], flag=f"n_p={best_con[1]}"))
    else:
        rows.append(_row("hyped", "converse", n, cfg.es_n0_db, 0.0, flag="infeasible"))
    return rows


def run_pie_sweep(cfg, out_csv=None):
    """Inclusive-error-rate sweep over SNR at fixed (n, k).

    Emits bound rows per scheme and, when generator matrices are supplied,
    simulated operating points (kind = "simulated").
    """
    if not cfg.snr_grid:
        raise ValueError("error-rate sweep needs snr_grid")
    req = cfg.requirements
    n, k = cfg.n, cfg.k
    M = 1 << k
    snr_floor = bounds.min_snr_db(n, req)
    codes = [load_generator(p) for p in cfg.codes]
    rows = []
    for snr in cfg.snr_grid:
        if snr < snr_floor:
            for scheme in cfg.schemes:
                rows.append(_row(scheme, "achievability", n, snr, 1.0, flag="infeasible"))
            continue
        sigma2 = 1.0 / (2.0 * 10.0 ** (snr / 10.0))
        params = ChannelParams.from_db(snr, n)
        dens = info_density_samples(n, sigma2, cfg.trials, cfg.seed)
        pcw_ach, pcw_se = dt_error_estimate(dens, M)
        pcw_con = bounds.meta_converse_min_error(n, sigma2, M, cfg.trials, cfg.seed)
        root = np.sqrt(n / sigma2)

        if "genie" in cfg.schemes:
            pmd_genie = float(1.0 - q_func(q_inv(req.eps_fa) - root))
            lo, hi = bounds.pie_sandwich(pmd_genie, pcw_con, pcw_ach)
            rows.append(_row("genie", "converse", n, snr, lo, stderr=pcw_se))
            rows.append(_row("genie", "achievability", n, snr, hi, stderr=pcw_se))
        if "dad" in cfg.schemes:
            gamma = bounds.dad_gamma(n, sigma2, req.eps_fa, M)
            _, pmd_ub = bounds.dad_error_bounds(n, sigma2, gamma, M)
            if pmd_ub <= req.eps_md:
                _, hi = bounds.pie_sandwich(pmd_ub, 0.0, pcw_ach)
                rows.append(_row("dad", "achievability", n, snr, hi, stderr=pcw_se))
            else:
                rows.append(_row("dad", "achievability", n, snr, 1.0, flag="infeasible"))
        for scheme in ("hyped", "preamble"):
            if scheme in cfg.schemes:
                rows.extend(_split_bound_point(cfg, scheme, n, k, params, req, snr))
        for cb in codes:
            rows.extend(_simulated_points(cfg, cb, n, params, req, snr))
    rows.extend(r for ref in cfg.refs for r in ingest_reference(ref))
    if out_csv:
        write_rows(rows, out_csv)
    return rows


def _split_bound_point(cfg, scheme, n, k, params, req, snr):
    """HyPED / preamble-only inclusive-error bound rows at one SNR."""
    sigma2 = params.sigma2
    M = 1 << k
    best_up = None
    best_lo = None
    for n_p in _split_candidates(cfg, n, k, scheme):
        n_c = n - n_p
        if scheme == "preamble":
            # matched filter on the preamble: closed-form missed detection
            pmd = float(1.0 - q_func(q_inv(req.eps_fa) - np.sqrt(n_p / sigma2)))
        else:
            _, _, est = _hyped_pmd(n_p, n_c, params, cfg, scheme)
            pmd = est.p_hat
        if pmd > req.eps_md:
            continue
        dens = info_density_samples(n_c, sigma2, cfg.trials, cfg.seed)
        pcw_ach, _ = dt_error_estimate(dens, M)
        pcw_con = bounds.meta_converse_min_error(n_c, sigma2, M, cfg.trials, cfg.seed)
        lo, up = bounds.pie_sandwich(pmd, pcw_con, pcw_ach)
        if best_up is None or up < best_up[0]:
            best_up = (up, n_p)
        if best_lo is None or lo < best_lo[0]:
            best_lo = (lo, n_p)
    rows = []
    if best_up:
        rows.append(_row(scheme, "achievability", n, snr, best_up[0], flag=f"n_p={best_up[1]}"))
        rows.append(_row(scheme, "converse", n, snr, best_lo[0], flag=f"n_p={best_lo[1]}"))
    else:
        rows.append(_row(scheme, "achievability", n, snr, 1.0, flag="infeasible"))
    return rows


def _simulated_points(cfg, cb, n, params, req, snr):
    """Monte Carlo operating points for every configured scheme with this code."""
    n_p = n - cb.n_c
    if n_p < 0:
        return []
    plan = FramePlan(n_p=n_p, n_c=cb.n_c)
    rows = []
    for scheme in cfg.schemes:
        if scheme == "genie":
            continue
        if scheme == "dad":
            spec = DetectorSpec(kind="dad")
        elif scheme == "hyped":
            spec = DetectorSpec(kind="hyped-exact")
        elif scheme == "preamble":
            if n_p < 1:
                continue
            spec = DetectorSpec(kind="preamble")
        else:
            continue
        calib = calibrate_threshold(spec, plan, params, cfg.calibration_trials(),
                                    req.eps_fa, cfg.seed, cb=cb)
        if calib.infeasible:
            rows.append(_row(scheme, "simulated", n, snr, 1.0, flag="calibration-infeasible"))
            continue
        rates = estimate_rates(spec.with_gamma(calib.gamma), plan, params, cfg.trials,
                               cfg.seed, cb=cb)
        pie = rates["pie"]
        se = (pie.ci_high - pie.ci_low) / 4.0  # ~ 1 sigma from the 95% CI width
        rows.append(_row(scheme, "simulated", n, snr, pie.p_hat, stderr=se,
                         flag=f"n_p={n_p},trials={pie.trials}"))
    return rows


def optimize_preamble_split(scheme, n_total, k, params, req, cfg):
    """Grid search the preamble split minimizing the inclusive-error upper bound.

    Returns (FramePlan, table) where table lists (n_p, pmd, pcw_upper,
    pie_upper) for every candidate; the chosen plan attains the minimum.
    Raises ValueError when every split is infeasible.
    """
    sigma2 = params.sigma2
    M = 1 << k
    table = []
    best = None
    for n_p in _split_candidates(cfg, n_total, k, scheme):
        n_c = n_total - n_p
        if scheme == "preamble":
            pmd = float(1.0 - q_func(q_inv(req.eps_fa) - np.sqrt(max(n_p, 1) / sigma2)))
        else:
            _, _, est = _hyped_pmd(n_p, n_c, params, cfg, scheme)
            pmd = est.p_hat
        dens = info_density_samples(n_c, sigma2, cfg.trials, cfg.seed)
        pcw_up, _ = dt_error_estimate(dens, M)
        pie_up = min(1.0, pmd + pcw_up)
        feasible = pmd <= req.eps_md
        table.append((n_p, pmd, pcw_up, pie_up if feasible else float("nan")))
        if feasible and (best is None or pie_up < best[0]):
            best = (pie_up, n_p, n_c)
    if best is None:
        raise ValueError(f"no feasible preamble split for {scheme} at n={n_total}")
    return FramePlan(n_p=best[1], n_c=best[2]), table


def run_bounds_report(cfg):
    """Closed-form bound summary rows for the configured operating point."""
    req = cfg.requirements
    sigma2 = 1.0 / (2.0 * 10.0 ** (cfg.es_n0_db / 10.0))
    n = cfg.n
    M = 1 << cfg.k
    rows = [
        _row("theorem1", "converse", n, cfg.es_n0_db, bounds.min_blocklength(sigma2, req),
             flag="min-blocklength"),
        _row("theorem1", "converse", n, cfg.es_n0_db, bounds.min_snr_db(n, req),
             flag="min-snr-db"),
    ]
    gamma = bounds.dad_gamma(n, sigma2, req.eps_fa, M)
    pfa_ub, pmd_ub = bounds.dad_error_bounds(n, sigma2, gamma, M)
    rows.append(_row("dad", "achievability", n, cfg.es_n0_db, gamma, flag="gamma"))
    rows.append(_row("dad", "achievability", n, cfg.es_n0_db, pfa_ub, flag="pfa-ub"))
    rows.append(_row("dad", "achievability", n, cfg.es_n0_db, pmd_ub, flag="pmd-ub"))
    M_max = bounds.dad_max_code_size(n, sigma2, req, _dt_max_M(cfg))
    rows.append(_row("dad", "achievability", n, cfg.es_n0_db, M_max, flag="max-code-size"))
    return rows


def run_with_manifest(runner, cfg, out_dir, name):
    """Execute a sweep, writing results CSV plus the run manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    rows = runner(cfg)
    csv_path = out / f"{name}.csv"
    write_rows(rows, csv_path)
    manifest = {
        "command": name,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "calibration_trials": cfg.calibration_trials(),
        "eps_fa": cfg.eps_fa,
        "eps_md": cfg.eps_md,
        "eps_ie": cfg.eps_ie,
        "schemes": ",".join(cfg.schemes),
        "es_n0_db": cfg.es_n0_db,
        "n": cfg.n,
        "k": cfg.k,
        "n_grid": ",".join(map(str, cfg.n_grid)),
        "snr_grid": ",".join(map(str, cfg.snr_grid)),
        "codes": ",".join(cfg.codes),
        "refs": ",".join(cfg.refs),
        "wall_time_s": f"{time.time() - started:.3f}",
    }
    write_manifest(out / f"{name}.manifest.txt", manifest)
    return csv_path
