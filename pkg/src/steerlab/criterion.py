"""Unsteerability test ``max_x [(a.x)^2 + 2|T x|] <= 1`` on canonical states.

The maximum over the unit sphere is computed exactly when the state has a
closed form (axial symmetry about z, or ``a = 0``); otherwise a Fibonacci
lattice is scanned, the best points are refined by projected gradient ascent,
and a Lipschitz bound turns the lattice maximum into a certified upper bound.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from steerlab import kernels
from steerlab.qubit import (
    TOL,
    EigPair,
    bloch_projector,
    partial_trace_alice,
    qubit_operator,
    require_state,
)

CERTIFIED = "CertifiedUnsteerable"
VIOLATED = "CriterionViolated"
INCONCLUSIVE = "Inconclusive"

AXIAL = "AxialClosedForm"
SPECTRAL = "SpectralClosedForm"
GRID = "GridRefine"

# Geodesic covering radius of the n-point Fibonacci lattice is at most
# COVERING_CONSTANT / sqrt(n) for n >= 100 (measured maximum 2.7300).
COVERING_CONSTANT = 2.75
DEFAULT_GRID_N = 20000
DEFAULT_REFINE_ITERS = 200
N_SEEDS = 16
_CHUNK = 8192


def unit(x):
    x = np.asarray(x, dtype=float).reshape(3)
    n = np.linalg.norm(x)
    if n == 0:
        raise ValueError("direction must be non-zero")
    return x / n


@dataclass(frozen=True)
class CriterionReport:
    max_value: float
    argmax: np.ndarray
    certified_upper_bound: float
    verdict: str
    method: str
    grid_n: int = 0
    tol: float = TOL

    def to_dict(self):
        return {
            "max_value": float(self.max_value),
            "argmax": [float(v) for v in self.argmax],
            "certified_upper_bound": float(self.certified_upper_bound),
            "verdict": self.verdict,
            "method": self.method,
            "grid_n": int(self.grid_n),
            "tol": self.tol,
        }


def fibonacci_sphere(n):
    """``n`` near-uniform unit vectors (golden-angle spiral, half-offset in z)."""
    i = np.arange(n, dtype=float) + 0.5
    z = 1.0 - 2.0 * i / n
    phi = math.pi * (1.0 + math.sqrt(5.0)) * i
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def covering_radius(n):
    """Upper bound on the geodesic distance from any unit vector to the lattice."""
    return min(math.pi, COVERING_CONSTANT / math.sqrt(n))


def lipschitz_constant(a, T):
    """Geodesic Lipschitz constant of ``(a.x)^2 + 2|T x|``: ``2|a|^2 + 2 sigma_max(T)``."""
    return 2.0 * float(np.dot(a, a)) + 2.0 * float(np.linalg.svd(np.atleast_2d(T), compute_uv=False)[0])


# -- assemblage primitives ---------------------------------------------------

def steered_state(state, x):
    """Bob's unnormalized state for outcome +1 along ``x``: ``[(1 + a.x) 1 + (T x).sigma] / 4``."""
    x = unit(x)
    return qubit_operator(1.0 + state.a @ x, state.T @ x) / 4.0


def steered_eigs(state, x):
    x = unit(x)
    ax = float(state.a @ x)
    n = float(np.linalg.norm(state.T @ x))
    return EigPair((1.0 + ax + n) / 4.0, (1.0 + ax - n) / 4.0)


def steered_axis(state, x):
    """Bloch direction of the larger eigenvector of the steered state; z when ``T x = 0``."""
    v = state.T @ unit(x)
    n = np.linalg.norm(v)
    return v / n if n > 0 else np.array([0.0, 0.0, 1.0])


def criterion_value_at(state, x):
    x = unit(x)
    ax = float(state.a @ x)
    return ax * ax + 2.0 * float(np.linalg.norm(state.T @ x))


def eig_form_value(pair):
    """``(alpha + beta)^2 - 2 beta``; non-positive exactly when the LHS model reproduces the pair."""
    return pair.total ** 2 - 2.0 * pair.beta


def assemblage(rho, directions, tol=TOL):
    """``sigma_{+-|x} = Tr_A[(1 +- x.sigma)/2 x 1 rho]`` for each direction."""
    rho = require_state(rho, tol)
    out = []
    for x in directions:
        x = unit(x)
        plus = partial_trace_alice(np.kron(bloch_projector(x), np.eye(2)) @ rho)
        minus = partial_trace_alice(np.kron(bloch_projector(-x), np.eye(2)) @ rho)
        out.append((plus, minus))
    return out


# -- maximization ------------------------------------------------------------

def _axial_applies(state, tol):
    return abs(abs(state.t[0]) - abs(state.t[1])) <= tol and math.hypot(state.a[0], state.a[1]) <= tol


def _axial_maximum(state):
    """Maximize ``F(u) = a_z^2 u + 2 sqrt(t_x^2 + u (t_z^2 - t_x^2))`` over ``u = cos^2 theta``.

    ``F`` is concave in ``u``, so the maximum sits at ``u in {0, 1}`` or at the
    interior stationary point ``u* = t_x^2/(t_x^2 - t_z^2) - (t_x^2 - t_z^2)/a_z^4``.
    """
    az2 = state.a[2] ** 2
    tx2 = state.t[0] ** 2
    tz2 = state.t[2] ** 2
    cands = [(az2 + 2.0 * abs(state.t[2]), 1.0), (2.0 * abs(state.t[0]), 0.0)]
    d = tx2 - tz2
    if az2 > 0 and d != 0:
        u = tx2 / d - d / (az2 * az2)
        if 0.0 < u < 1.0:
            val = az2 * u + 2.0 * math.sqrt(max(tx2 - u * d, 0.0))
            cands.append((val, u))
    val, u = max(cands, key=lambda c: (c[0], c[1]))
    x = np.array([math.sqrt(1.0 - u), 0.0, math.sqrt(u)])
    return val, x


def _spectral_maximum(state):
    """With ``a = 0`` the maximum is ``2 max|t_i|`` at the corresponding axis."""
    k = int(np.argmax(np.abs(state.t)))
    x = np.zeros(3)
    x[k] = 1.0
    return 2.0 * float(abs(state.t[k])), x


def grid_values(dirs, a, T, threads=None):
    """Criterion values on a direction grid, chunked over worker threads."""
    threads = threads or kernels.thread_count()
    if threads == 1 or len(dirs) <= _CHUNK:
        return kernels.criterion_values(dirs, a, T)
    chunks = [dirs[i:i + _CHUNK] for i in range(0, len(dirs), _CHUNK)]
    with ThreadPoolExecutor(threads) as pool:
        parts = list(pool.map(lambda c: kernels.criterion_values(c, a, T), chunks))
    return np.concatenate(parts)


def _objective_and_grad(x, a, T):
    ax = a @ x
    tx = T @ x
    n = np.linalg.norm(tx)
    f = ax * ax + 2.0 * n
    if n == 0:
        return f, None
    g = 2.0 * ax * a + 2.0 * (T.T @ tx) / n
    return f, g - (g @ x) * x


def local_ascent(x, a, T, iters=DEFAULT_REFINE_ITERS, step_tol=1e-12, rng=None):
    """Projected gradient ascent on the sphere with backtracking line search."""
    x = unit(x)
    f, g = _objective_and_grad(x, a, T)
    step = 1.0
    for _ in range(iters):
        if g is None:
            rng = rng or np.random.default_rng(0)
            x = unit(x + 1e-6 * rng.standard_normal(3))
            f, g = _objective_and_grad(x, a, T)
            continue
        gn = np.linalg.norm(g)
        if gn < step_tol:
            break
        moved = False
        while step * gn >= step_tol:
            y = unit(x + step * g)
            fy, gy = _objective_and_grad(y, a, T)
            if fy > f:
                x, f, g = y, fy, gy
                moved = True
                step *= 2.0
                break
            step *= 0.5
        if not moved:
            break
    return f, x


def _best_index(values, dirs):
    """Index of the maximum value; ties broken by the lexicographically smallest direction."""
    top = np.flatnonzero(values == values.max())
    if len(top) == 1:
        return int(top[0])
    order = np.lexsort(dirs[top].T[::-1])
    return int(top[order[0]])


def _verdict(max_value, upper, tol):
    if upper <= 1.0 + tol:
        return CERTIFIED
    if max_value > 1.0 + tol:
        return VIOLATED
    return INCONCLUSIVE


def _closed_form_report(state, x, upper, method, tol):
    val = criterion_value_at(state, x)
    upper = max(upper, val)
    return CriterionReport(val, x, upper, _verdict(val, upper, tol), method, 0, tol)


def evaluate_criterion(
    state,
    grid_n=DEFAULT_GRID_N,
    refine_iters=DEFAULT_REFINE_ITERS,
    tol=TOL,
    method="auto",
    threads=None,
):
    """Decide the unsteerability criterion for a canonical state.

    ``method`` is ``"auto"`` (closed form when available) or ``"grid"`` (force
    the lattice search). Verdicts compare against ``1 + tol``.
    """
    if grid_n < 100:
        raise ValueError("grid_n must be at least 100")
    if method not in ("auto", "grid"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        if _axial_applies(state, tol):
            val, x = _axial_maximum(state)
            # distance to the exactly axial state (a_perp -> 0, |t_y| -> |t_x|)
            a_perp = math.hypot(state.a[0], state.a[1])
            slack = 2.0 * float(np.linalg.norm(state.a)) * a_perp + 2.0 * abs(abs(state.t[0]) - abs(state.t[1]))
            return _closed_form_report(state, x, val + slack, AXIAL, tol)
        if np.linalg.norm(state.a) <= tol:
            val, x = _spectral_maximum(state)
            return _closed_form_report(state, x, val + float(state.a @ state.a), SPECTRAL, tol)

    a, T = state.a, state.T
    dirs = fibonacci_sphere(grid_n)
    vals = grid_values(dirs, a, T, threads)
    grid_max = float(vals.max())
    upper = grid_max + lipschitz_constant(a, T) * covering_radius(grid_n)

    best_i = _best_index(vals, dirs)
    best_f, best_x = grid_max, dirs[best_i]
    if refine_iters > 0:
        seeds = np.argsort(-vals, kind="stable")[:N_SEEDS]
        rng = np.random.default_rng(12345)
        for i in seeds:
            f, x = local_ascent(dirs[i], a, T, refine_iters, rng=rng)
            if f > best_f or (f == best_f and tuple(x) < tuple(best_x)):
                best_f, best_x = f, x
    upper = max(upper, best_f)
    return CriterionReport(best_f, best_x, upper, _verdict(best_f, upper, tol), GRID, grid_n, tol)
