"""Counter-based multinomial sampling.

Replication r, conditional draw j always consumes the same underlying
Philox uniform, regardless of how the replication range is chunked or how
many workers evaluate the chunks.  Chunk boundaries are fixed constants and
each chunk owns an independent Philox key derived from (seed, stream,
chunk index), so results are bit-identical at any parallelism degree.

The conditional-binomial decomposition is exact: category j given the
remaining mass is Binomial(n_remaining, p_j / p_remaining), realized by
inverse-CDF from a single uniform per (replication, category).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import stats

CHUNK_ROWS = 1 << 15


def _chunk_key(seed: int, stream: int, chunk: int) -> list[int]:
    # Philox accepts a 128-bit key as two uint64 words.
    return [np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(((stream & 0xFFFFFFFF) << 32) | (chunk & 0xFFFFFFFF))]


def multinomial_sample(n: int, p: np.ndarray, stream: np.random.Generator) -> np.ndarray:
    """Draw one Multinomial(n, p) vector via sequential conditional binomials."""
    p = np.asarray(p, dtype=float)
    counts = np.zeros(p.size, dtype=np.int64)
    remaining = int(n)
    mass = 1.0
    for j in range(p.size - 1):
        if remaining == 0 or mass <= 0:
            break
        cond = min(1.0, max(0.0, p[j] / mass))
        c = int(stream.binomial(remaining, cond))
        counts[j] = c
        remaining -= c
        mass -= p[j]
    counts[p.size - 1] = remaining
    return counts


def _sample_chunk(n: int, p: np.ndarray, rows: int, seed: int, stream: int, chunk: int) -> np.ndarray:
    B = p.size
    gen = np.random.Generator(np.random.Philox(key=_chunk_key(seed, stream, chunk)))
    u = gen.random((rows, B - 1))
    counts = np.empty((rows, B), dtype=np.int64)
    remaining = np.full(rows, n, dtype=np.int64)
    mass = 1.0
    for j in range(B - 1):
        cond = min(1.0, max(0.0, p[j] / mass)) if mass > 0 else 0.0
        if cond <= 0.0:
            c = np.zeros(rows, dtype=np.int64)
        elif cond >= 1.0:
            c = remaining.copy()
        else:
            c = stats.binom.ppf(u[:, j], remaining, cond).astype(np.int64)
        counts[:, j] = c
        remaining = remaining - c
        mass -= p[j]
    counts[:, B - 1] = remaining
    return counts


def multinomial_matrix(
    n: int,
    p: np.ndarray,
    replications: int,
    seed: int,
    stream: int = 0,
    workers: int = 1,
) -> np.ndarray:
    """K x B matrix of independent Multinomial(n, p) draws.

    Deterministic in (seed, stream, replications); independent of workers.
    """
    p = np.asarray(p, dtype=float)
    K = int(replications)
    n_chunks = (K + CHUNK_ROWS - 1) // CHUNK_ROWS
    sizes = [min(CHUNK_ROWS, K - c * CHUNK_ROWS) for c in range(n_chunks)]
    out = np.empty((K, p.size), dtype=np.int64)

    def fill(c: int) -> None:
        lo = c * CHUNK_ROWS
        out[lo : lo + sizes[c]] = _sample_chunk(n, p, sizes[c], seed, stream, c)

    if workers <= 1 or n_chunks == 1:
        for c in range(n_chunks):
            fill(c)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, range(n_chunks)))
    return out
