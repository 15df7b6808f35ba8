"""Binary linear codes with exhaustively cached BPSK codebooks.

The cache is a (2^k, n_c) matrix of +/-1 rows, one per message in fixed
binary enumeration order (message index 1 is the all-zero message, the last
bit of the index-0-based binary expansion multiplies the last row of G).
Exhaustive ML decoding is a single matrix product against this cache, which
is exactly the correlation rule max_m x_m^T y on the BI-AWGN channel.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import modulate

__all__ = [
    "Codebook",
    "load_generator",
    "encode",
    "ml_decode",
    "min_distance",
    "repetition_code",
    "hamming_7_4",
    "reed_muller_1",
]

MAX_K = 24  # 2^24 cached codewords is the memory ceiling


@dataclass(frozen=True)
class Codebook:
    n_c: int
    k: int
    G: np.ndarray          # (k, n_c) over GF(2)
    codewords: np.ndarray  # (2^k, n_c), +/-1

    @property
    def M(self):
        return 1 << self.k


def _gf2_rank(G):
    A = G.copy() % 2
    rank = 0
    rows, cols = A.shape
    for col in range(cols):
        pivot = None
        for r in range(rank, rows):
            if A[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        A[[rank, pivot]] = A[[pivot, rank]]
        mask = A[:, col].astype(bool).copy()
        mask[rank] = False
        A[mask] ^= A[rank]
        rank += 1
    return rank


def _messages(k):
    """All 2^k messages as a (2^k, k) bit matrix in binary counting order."""
    idx = np.arange(1 << k, dtype=np.uint32)
    shifts = np.arange(k - 1, -1, -1, dtype=np.uint32)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def from_generator(G):
    """Build a Codebook from a (k, n_c) 0/1 generator matrix."""
    G = np.asarray(G, dtype=np.uint8) % 2
    if G.ndim != 2 or G.size == 0:
        raise ValueError("generator must be a non-empty 2-D bit matrix")
    k, n_c = G.shape
    if k > MAX_K:
        raise ValueError(f"k={k} exceeds the cache guard (k <= {MAX_K})")
    if _gf2_rank(G) != k:
        raise ValueError("generator matrix is rank-deficient over GF(2)")
    bits = (_messages(k) @ G) % 2
    return Codebook(n_c=n_c, k=k, G=G, codewords=modulate(bits))


def load_generator(source):
    """Parse a generator matrix from a file path or literal text.

    Format: optional header line "n_c k", then k rows of {0,1} characters;
    whitespace inside rows is ignored. Leftmost character is the first
    channel use.
    """
    text = source
    if isinstance(source, (str, Path)):
        p = Path(source)
        if isinstance(source, Path) or ("\n" not in str(source) and p.is_file()):
            text = p.read_text()
    lines = [ln.strip() for ln in str(text).splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty generator matrix text")
    header = lines[0].split()
    if (
        len(header) == 2
        and all(tok.isdigit() for tok in header)
        and len(lines) - 1 == int(header[1])
        and all(len(ln.replace(" ", "").replace("\t", "")) == int(header[0]) for ln in lines[1:])
    ):
        lines = lines[1:]
    rows = []
    for ln in lines:
        ln = ln.replace(" ", "").replace("\t", "")
        if set(ln) - {"0", "1"}:
            raise ValueError(f"invalid characters in generator row: {ln!r}")
        rows.append([int(ch) for ch in ln])
    if len({len(r) for r in rows}) != 1:
        raise ValueError("generator rows have unequal lengths")
    return from_generator(np.array(rows, dtype=np.uint8))


def encode(cb, m):
    """Codeword of message m (1-based) as a +/-1 vector."""
    if not 1 <= m <= cb.M:
        raise IndexError(f"message index {m} outside 1..{cb.M}")
    return cb.codewords[m - 1]


def ml_decode(cb, y):
    """Exhaustive ML decoding by correlation argmax.

    Accepts a single observation (n_c,) or a batch (..., n_c); returns
    (m_hat, stat) with 1-based indices, ties broken toward the smallest
    index (argmax picks the first maximum).
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != cb.n_c:
        raise ValueError(f"observation length {y.shape[-1]} != n_c={cb.n_c}")
    corr = y @ cb.codewords.T
    m_hat = np.argmax(corr, axis=-1)
    stat = np.take_along_axis(corr, np.expand_dims(m_hat, -1), axis=-1)[..., 0]
    if y.ndim == 1:
        return int(m_hat) + 1, float(stat)
    return m_hat + 1, stat


def min_distance(cb):
    """Minimum Hamming weight over the nonzero codewords (= min distance)."""
    if cb.k < 1:
        raise ValueError("min_distance needs k >= 1")
    # +/-1 row with weight w has sum n_c - 2w
    weights = (cb.n_c - cb.codewords[1:].sum(axis=1)) / 2
    return int(weights.min())


def repetition_code(n_c):
    return from_generator(np.ones((1, n_c), dtype=np.uint8))


def hamming_7_4():
    G = np.array(
        [
            [1, 0, 0, 0, 1, 1, 0],
            [0, 1, 0, 0, 1, 0, 1],
            [0, 0, 1, 0, 0, 1, 1],
            [0, 0, 0, 1, 1, 1, 1],
        ],
        dtype=np.uint8,
    )
    return from_generator(G)


def reed_muller_1(m):
    """First-order Reed-Muller code RM(1, m): (2^m, m + 1), d = 2^(m-1)."""
    n_c = 1 << m
    idx = np.arange(n_c, dtype=np.uint32)
    rows = [np.ones(n_c, dtype=np.uint8)]
    for j in range(m - 1, -1, -1):
        rows.append(((idx >> j) & 1).astype(np.uint8))
    return from_generator(np.array(rows))
