"""Counter-based random streams and the Monte Carlo outage kernel.

Two interchangeable backends evaluate the same stream:

* a numba-compiled per-sample loop (fast path), and
* a chunked, vectorised numpy fallback.

Backend choice comes from the environment variable ``COOPJAM_BACKEND``
(``numba``, ``numpy`` or ``auto``; default ``auto`` picks numba when it
imports).  Every draw is a pure function of ``(seed, counter)``, so both
paths see identical uint64 words and the resulting outage counts agree
up to last-ulp differences in ``log1p``.

Draw layout for fading sample ``i`` of a network with ``n`` jammers and
``m`` eavesdroppers (``d = 1 + m + n + m*n`` draws per sample, counters
``i*d .. i*d + d - 1``):

====================  =========================
offset                draw
====================  =========================
0                     source->destination gain
1 .. m                source->eavesdropper gains
1+m .. 1+m+n          jammer->destination gains
1+m+n + j*n + k       jammer k -> eavesdropper j
====================  =========================
"""

import os

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB

_U64 = np.uint64
_INV_2_53 = 2.0 ** -53


def _mix_int(z: int) -> int:
    """Finalising bijection of splitmix64, on plain python ints."""
    z &= _MASK
    z ^= z >> 30
    z = (z * _MIX_A) & _MASK
    z ^= z >> 27
    z = (z * _MIX_B) & _MASK
    z ^= z >> 31
    return z


def seed_key(seed: int) -> int:
    """Scramble a user-facing seed into a stream key.

    Consecutive seeds land far apart so seed 0 and seed 1 share no
    obvious structure.
    """
    return _mix_int((int(seed) & _MASK) ^ 0x5851F42D4C957F2D)


def _word_int(key: int, counter: int) -> int:
    return _mix_int((key + ((counter + 1) * _GOLDEN)) & _MASK)


def uniform_at(seed: int, counter: int) -> float:
    """Uniform [0, 1) draw for one (seed, counter) pair."""
    return (_word_int(seed_key(seed), counter) >> 11) * _INV_2_53


def _words_np(key: int, counters: np.ndarray) -> np.ndarray:
    """Vectorised splitmix64 word for an array of counters (uint64)."""
    z = (counters + _U64(1)) * _U64(_GOLDEN) + _U64(key)
    z ^= z >> _U64(30)
    z *= _U64(_MIX_A)
    z ^= z >> _U64(27)
    z *= _U64(_MIX_B)
    z ^= z >> _U64(31)
    return z


def uniform_stream(seed: int, counters) -> np.ndarray:
    counters = np.asarray(counters, dtype=np.uint64)
    return (_words_np(seed_key(seed), counters) >> _U64(11)) * _INV_2_53


def exponential_stream(seed: int, counters) -> np.ndarray:
    """Unit-rate exponential draws via inverse CDF, -log1p(-u)."""
    return -np.log1p(-uniform_stream(seed, counters))


def draw_channel_arrays(seed: int, index: int, n: int, m: int):
    """All power gains for fading sample ``index``: (h_d, h_e, g_d, g_e)."""
    d = 1 + m + n + m * n
    base = index * d
    e = exponential_stream(seed, np.arange(base, base + d, dtype=np.uint64))
    h_d = e[0]
    h_e = e[1:1 + m].copy()
    g_d = e[1 + m:1 + m + n].copy()
    g_e = e[1 + m + n:].reshape(m, n).copy()
    return h_d, h_e, g_d, g_e


# ---------------------------------------------------------------------------
# outage kernels
# ---------------------------------------------------------------------------

def _mc_outage_numpy(ps, p, sig2d, sig2e, mu, nu, key, n_samples,
                     chunk=1 << 16):
    """Chunked vectorised count of secrecy outage events."""
    n = p.size
    m = sig2e.size
    d = 1 + m + n + m * n
    offs = np.arange(d, dtype=np.uint64)
    count = 0
    for start in range(0, n_samples, chunk):
        k = min(chunk, n_samples - start)
        base = (np.arange(start, start + k, dtype=np.uint64) * _U64(d))
        draws = -np.log1p(
            -((_words_np(key, base[:, None] + offs[None, :]) >> _U64(11))
              * _INV_2_53))
        h_d = draws[:, 0]
        h_e = draws[:, 1:1 + m]
        g_d = draws[:, 1 + m:1 + m + n]
        g_e = draws[:, 1 + m + n:].reshape(k, m, n)
        gamma_d = ps * h_d / (g_d @ p + sig2d)
        gamma_e = ps * h_e / (g_e @ p + sig2e[None, :])
        count += int(np.count_nonzero(
            gamma_e.max(axis=1) >= gamma_d / mu + nu))
    return count


_HAVE_NUMBA = False
_mc_outage_numba = None
try:  # pragma: no cover - exercised indirectly through backend tests
    import numba

    @numba.njit(cache=True)
    def _mc_outage_numba(ps, p, sig2d, sig2e, mu, nu, key, n_samples):
        n = p.size
        m = sig2e.size
        d = np.uint64(1 + m + n + m * n)
        golden = np.uint64(_GOLDEN)
        mix_a = np.uint64(_MIX_A)
        mix_b = np.uint64(_MIX_B)
        key64 = np.uint64(key)
        count = 0
        for i in range(n_samples):
            base = np.uint64(i) * d

            def draw(off):
                z = (base + np.uint64(off) + np.uint64(1)) * golden + key64
                z ^= z >> np.uint64(30)
                z *= mix_a
                z ^= z >> np.uint64(27)
                z *= mix_b
                z ^= z >> np.uint64(31)
                return -np.log1p(-((z >> np.uint64(11)) * _INV_2_53))

            acc = sig2d
            for kk in range(n):
                acc += p[kk] * draw(1 + m + kk)
            gamma_d = ps * draw(0) / acc
            worst = -1.0
            for j in range(m):
                acc = sig2e[j]
                for kk in range(n):
                    acc += p[kk] * draw(1 + m + n + j * n + kk)
                g = ps * draw(1 + j) / acc
                if g > worst:
                    worst = g
            if worst >= gamma_d / mu + nu:
                count += 1
        return count

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    pass


def _resolve_backend(name=None):
    name = name or os.environ.get("COOPJAM_BACKEND", "auto").lower()
    if name == "auto":
        return "numba" if _HAVE_NUMBA else "numpy"
    if name == "numba":
        if not _HAVE_NUMBA:
            raise RuntimeError(
                "COOPJAM_BACKEND=numba requested but numba is unavailable")
        return "numba"
    if name == "numpy":
        return "numpy"
    raise ValueError(f"unknown backend {name!r}")


def active_backend() -> str:
    """Name of the kernel backend that will actually run."""
    return _resolve_backend()


def mc_outage_count(ps, p, sig2d, sig2e, mu, nu, seed, n_samples,
                    backend=None) -> int:
    """Number of outage events among ``n_samples`` fading draws.

    ``mu = 2**rate`` and ``nu = 2**(-rate) - 1`` encode the target
    secrecy rate; an outage is ``max_j gamma_e_j >= gamma_d/mu + nu``.
    """
    p = np.ascontiguousarray(p, dtype=float)
    sig2e = np.ascontiguousarray(sig2e, dtype=float)
    key = seed_key(seed)
    if _resolve_backend(backend) == "numba":
        return int(_mc_outage_numba(float(ps), p, float(sig2d), sig2e,
                                    float(mu), float(nu), _U64(key),
                                    n_samples))
    return _mc_outage_numpy(float(ps), p, float(sig2d), sig2e,
                            float(mu), float(nu), key, n_samples)
