"""Where is slotted asynchronous transmission feasible at all?

Walks the closed-form bounds: the genie converse that no detector can beat,
and the decoder-aided-detection (DAD) achievability that a real receiver can
reach. Everything here is deterministic except the DT oracle used to cap the
code size, which reuses a fixed seed.
"""

import math

from jdd.bounds import (
    Requirements,
    dad_error_bounds,
    dad_gamma,
    dad_max_code_size,
    dt_bound_max_M,
    min_blocklength,
    min_snr_db,
)
from jdd.channel import snr_to_sigma2

req = Requirements(eps_fa=1e-4, eps_md=1e-4, eps_ie=1e-3)
sigma2 = snr_to_sigma2(-3.0)

# The converse: below this blocklength no detector, however clever, can hit
# both targets at -3 dB. The first feasible integer blocklength is its ceiling.
n_min = min_blocklength(sigma2, req)
print(f"targets: eps_fa={req.eps_fa:g}, eps_md={req.eps_md:g}, eps_ie={req.eps_ie:g}")
print(f"at -3 dB the blocklength converse is n >= {n_min:.2f} "
      f"(first feasible n = {math.ceil(n_min)})")

# Same trade-off solved the other way: fix n = 84 and ask for the lowest SNR.
print(f"at n = 84 the SNR converse is Es/N0 >= {min_snr_db(84, req):.2f} dB\n")

# The achievability side: DAD thresholds the best codeword's correlation.
# The union-bound threshold hits the false-alarm target exactly; the missed
# detection bound must then clear its own target.
M = 4096
gamma = dad_gamma(84, sigma2, req.eps_fa, M)
pfa_ub, pmd_ub = dad_error_bounds(84, sigma2, gamma, M)
print(f"DAD at n=84, M={M}: gamma = {gamma:.2f}, "
      f"pfa bound = {pfa_ub:.2e}, pmd bound = {pmd_ub:.2e}")
print("  -> the (84, 2^12) operating point first becomes certifiable at -3 dB\n")

# How large a code can DAD certify as n grows? Detection limits small n,
# decoding (here the DT random-coding bound) limits large n.
def dt_oracle(target_error, n, s2):
    return dt_bound_max_M(n, s2, target_error, 100_000, seed=0)

print("n    max certified M    rate bits/use")
for n in (56, 58, 64, 70, 84, 100):
    m_max = dad_max_code_size(n, sigma2, req, dt_oracle)
    rate = math.log2(m_max) / n if m_max else 0.0
    print(f"{n:<5d}{m_max:<19d}{rate:.3f}")
