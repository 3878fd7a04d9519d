"""Brute-force oracles that share no code with the package."""
import numpy as np

DENSE_POINTS = 1_000_000
_X = np.linspace(np.log(1e-40), np.log(1e40), DENSE_POINTS)
_T = np.exp(_X)


def dense_quartic(a, b, c, d, p, q):
    """Sample ``a t^2 + b t^4 - c t^p - d t^q`` on 10^6 log-spaced points of [1e-40, 1e40]."""
    with np.errstate(over="ignore", invalid="ignore"):
        f = a * np.exp(2 * _X) + b * np.exp(4 * _X) - c * np.exp(p * _X) - d * np.exp(q * _X)
    return _T, f


def _flips(v, min_gap):
    """Indices where ``sign(v)`` changes, merging flips closer than ``min_gap``.

    Round-off near a flat extremum can make the sign flicker; such clusters
    are collapsed, keeping the change only if the sign really differs across
    the cluster.
    """
    sgn = np.sign(v)
    nz = np.nonzero(sgn)[0]
    sgn = sgn[nz]
    raw = nz[1:][sgn[1:] != sgn[:-1]]
    out = []
    i = 0
    while i < len(raw):
        j = i
        while j + 1 < len(raw) and raw[j + 1] - raw[j] < min_gap:
            j += 1
        if (j - i) % 2 == 0:  # odd number of flips in the cluster: a real change
            out.append(int(raw[(i + j) // 2]))
        i = j + 1
    return out


def dense_structure(a, b, c, d, p, q, min_gap=50):
    """Interior extrema and zeros of the sampled quartic.

    Returns a dict with ``extrema`` as ``(t, kind)`` pairs in increasing
    ``t`` (kind ``"min"`` or ``"max"``), ``zeros`` as a list of ``t`` and the
    index of the global maximum sample.
    """
    t, f = dense_quartic(a, b, c, d, p, q)
    ok = np.isfinite(f)
    t, f = t[ok], f[ok]
    df = np.diff(f)
    extrema = []
    for k in _flips(df, min_gap):
        kind = "max" if df[k - 1] > 0 else "min"
        extrema.append((float(t[k]), kind, float(f[k])))
    zeros = [float(t[k]) for k in _flips(f, min_gap)]
    return {"extrema": extrema, "zeros": zeros, "t": t, "f": f}
