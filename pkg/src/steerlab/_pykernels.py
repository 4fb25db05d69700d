"""Numpy implementations of the hot loops.

These mirror ``_ckernels.pyx`` one to one and are used whenever the compiled
extension is unavailable (or ``STEERLAB_PURE_PYTHON`` is set).
"""
import numpy as np


def criterion_values(dirs, a, T):
    """Evaluate ``(a.x)^2 + 2|T x|`` for every row ``x`` of ``dirs``."""
    dirs = np.ascontiguousarray(dirs, dtype=float)
    proj = dirs @ np.asarray(a, dtype=float)
    tx = dirs @ np.asarray(T, dtype=float).T
    return proj * proj + 2.0 * np.sqrt(np.einsum("ij,ij->i", tx, tx))


def cap_accumulate(lams, s, c):
    """Count hidden states inside the cap ``s.lam >= c`` and sum their Bloch vectors.

    Returns ``(count, sx, sy, sz)``.
    """
    lams = np.ascontiguousarray(lams, dtype=float)
    inside = lams @ np.asarray(s, dtype=float) - c >= 0.0
    sel = lams[inside]
    total = sel.sum(axis=0)
    return int(inside.sum()), float(total[0]), float(total[1]), float(total[2])
