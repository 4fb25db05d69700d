"""Certify unsteerability through ``rho = p sigma + (1 - p) rho_sep``.

If ``rho_sep`` is separable and ``sigma = (rho - (1 - p) rho_sep) / p`` is a
state passing the criterion, ``rho`` is unsteerable even when it fails the
criterion itself. :func:`strengthen` searches for such a pair.
"""
from dataclasses import dataclass
import math

import numpy as np

from steerlab.canonical import RANK_TOL, diagonalize_correlation, canonicalize
from steerlab.criterion import CERTIFIED, DEFAULT_GRID_N, evaluate_criterion
from steerlab.qubit import (
    TOL,
    StateError,
    bloch_projector,
    classically_correlated,
    is_ppt,
    is_valid_state,
    partial_trace_alice,
    partial_trace_bob,
    pauli_decompose,
    require_state,
)

SEARCH_GRID_N = 500
SEARCH_REFINE = 10
U_MAX = 20.0
N_PRODUCTS = 4
_INFEASIBLE = 10.0


def matrix_to_json(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def matrix_from_json(rows):
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise StateError("matrix entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass(frozen=True)
class Decomposition:
    p: float
    sigma: np.ndarray
    rho_sep: np.ndarray

    def reconstruct(self):
        return self.p * self.sigma + (1.0 - self.p) * self.rho_sep

    def to_dict(self):
        return {
            "p": float(self.p),
            "sigma": matrix_to_json(self.sigma),
            "rho_sep": matrix_to_json(self.rho_sep),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["p"]), matrix_from_json(d["sigma"]), matrix_from_json(d["rho_sep"]))


@dataclass(frozen=True)
class DecompositionCheck:
    reconstruction_error: float
    rho_sep_valid: bool
    rho_sep_ppt: bool
    sigma_valid: bool
    verdict: str
    criterion_max: float
    certified_upper_bound: float
    tol: float

    @property
    def ok(self):
        return (
            self.reconstruction_error <= self.tol
            and self.rho_sep_valid
            and self.rho_sep_ppt
            and self.sigma_valid
            and self.verdict == CERTIFIED
        )

    def to_dict(self):
        d = {k: (bool(v) if isinstance(v, (bool, np.bool_)) else v) for k, v in self.__dict__.items()}
        d["reconstruction_error"] = float(self.reconstruction_error)
        d["criterion_max"] = float(self.criterion_max)
        d["certified_upper_bound"] = float(self.certified_upper_bound)
        d["ok"] = bool(self.ok)
        return d


def extract_sigma(rho, p, rho_sep, tol=TOL):
    """``sigma = (rho - (1 - p) rho_sep) / p`` and its validity report.

    A non-positive ``sigma`` is returned as is; the report says so.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    rho = np.asarray(rho, dtype=complex)
    sigma = (rho - (1.0 - p) * np.asarray(rho_sep, dtype=complex)) / p
    return sigma, is_valid_state(sigma, tol)


def verify_decomposition(rho, dec, grid_n=DEFAULT_GRID_N, tol=TOL):
    """Re-check a decomposition from scratch: reconstruction, PPT, validity, criterion."""
    rho = np.asarray(rho, dtype=complex)
    err = float(np.max(np.abs(dec.reconstruct() - rho)))
    sep_valid = is_valid_state(dec.rho_sep, tol).valid
    sigma_valid = is_valid_state(dec.sigma, tol).valid
    verdict, crit, upper = "Invalid", math.nan, math.nan
    if sigma_valid:
        try:
            rep = evaluate_criterion(canonicalize(dec.sigma, tol).canonical, grid_n=grid_n, tol=tol)
            verdict, crit, upper = rep.verdict, rep.max_value, rep.certified_upper_bound
        except StateError as e:
            verdict = f"Invalid: {e}"
    return DecompositionCheck(
        reconstruction_error=err,
        rho_sep_valid=sep_valid,
        rho_sep_ppt=is_ppt(dec.rho_sep, tol),
        sigma_valid=sigma_valid,
        verdict=verdict,
        criterion_max=crit,
        certified_upper_bound=upper,
        tol=tol,
    )


# -- search -------------------------------------------------------------------

def _criterion_estimate(sigma, grid_n=SEARCH_GRID_N):
    """Criterion maximum of ``sigma`` without validity checks; ``None`` if Bob's marginal is singular."""
    rho_b = partial_trace_alice(sigma)
    vals, vecs = np.linalg.eigh(0.5 * (rho_b + rho_b.conj().T))
    if vals[0] < RANK_TOL:
        return None
    inv_sqrt = (vecs * vals ** -0.5) @ vecs.conj().T
    K = np.kron(np.eye(2), inv_sqrt)
    w = K @ sigma @ K
    w = 0.5 * (w + w.conj().T)
    w /= np.real(np.trace(w))
    rec = diagonalize_correlation(pauli_decompose(w, 1e-6), tol=1e-6)
    return evaluate_criterion(rec.canonical, grid_n=grid_n, refine_iters=SEARCH_REFINE).max_value


def _objective(rho, p, rho_sep):
    """``max(criterion estimate - 1, 10 * PSD defect)``; non-positive means a candidate."""
    sigma = (rho - (1.0 - p) * rho_sep) / p
    defect = max(0.0, -float(np.linalg.eigvalsh(0.5 * (sigma + sigma.conj().T))[0]))
    crit = _criterion_estimate(sigma)
    if crit is None:
        return _INFEASIBLE + defect
    return max(crit - 1.0, _INFEASIBLE * defect)


class _Budget:
    def __init__(self, n):
        self.left = n

    def spend(self):
        self.left -= 1
        return self.left >= 0


def _structured_candidates(rho):
    """Classically correlated states along the principal axes of ``T``, the product of marginals, ``1/4``."""
    T = pauli_decompose(rho).T
    U, _, Vt = np.linalg.svd(T)
    cands = [classically_correlated(U[:, k], Vt[k]) for k in range(3)]
    cands.append(np.kron(partial_trace_bob(rho), partial_trace_alice(rho)))
    cands.append(np.eye(4, dtype=complex) / 4)
    return cands


def _line_search(rho, rho_sep, budget, scan=32, iters=80):
    """Minimize the objective over ``u = 1/p`` in ``[1, U_MAX]``: coarse scan, then golden section."""
    grid = np.linspace(1.0, U_MAX, scan)
    vals = []
    for u in grid:
        if not budget.spend():
            return None
        vals.append(_objective(rho, 1.0 / u, rho_sep))
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, scan - 1)]
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = hi - g * (hi - lo), lo + g * (hi - lo)
    fc, fd = _objective(rho, 1.0 / c, rho_sep), _objective(rho, 1.0 / d, rho_sep)
    for _ in range(iters):
        if not budget.spend():
            break
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - g * (hi - lo)
            fc = _objective(rho, 1.0 / c, rho_sep)
        else:
            lo, c, fc = c, d, fd
            d = lo + g * (hi - lo)
            fd = _objective(rho, 1.0 / d, rho_sep)
    best = min((fc, c), (fd, d), (vals[i], grid[i]))
    return best[0], 1.0 / best[1]


def _sphere_point(theta, phi, radius):
    return radius * np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


class _SeparableFamily:
    """Mixture of ``N_PRODUCTS`` product states and fixed axis-correlated states.

    Parameters: ``[u - 1, weight logits..., (theta, phi, radius logit) x 2 per product]``
    with ``p = 1/u``.
    """

    def __init__(self, fixed):
        self.fixed = fixed
        self.n_weights = N_PRODUCTS + len(fixed)
        self.size = 1 + self.n_weights + 6 * N_PRODUCTS

    def random(self, rng):
        x = np.empty(self.size)
        x[0] = rng.uniform(0.0, U_MAX - 1.0)
        x[1:1 + self.n_weights] = rng.normal(0.0, 1.0, self.n_weights)
        angles = rng.uniform(0.0, 2 * math.pi, (N_PRODUCTS, 6))
        angles[:, 2] = rng.normal(1.0, 1.0, N_PRODUCTS)
        angles[:, 5] = rng.normal(1.0, 1.0, N_PRODUCTS)
        x[1 + self.n_weights:] = angles.ravel()
        return x

    def decode(self, x):
        p = 1.0 / (1.0 + abs(x[0]))
        logits = x[1:1 + self.n_weights]
        w = np.exp(logits - logits.max())
        w /= w.sum()
        states = []
        for row in x[1 + self.n_weights:].reshape(N_PRODUCTS, 6):
            ra = 1.0 / (1.0 + math.exp(-row[2]))
            rb = 1.0 / (1.0 + math.exp(-row[5]))
            states.append(np.kron(bloch_projector(_sphere_point(row[0], row[1], ra)),
                                  bloch_projector(_sphere_point(row[3], row[4], rb))))
        states.extend(self.fixed)
        rho_sep = sum(wi * s for wi, s in zip(w, states))
        return p, rho_sep


def _coordinate_descent(rho, family, budget, rng, tol):
    x = family.random(rng)
    p, rho_sep = family.decode(x)
    if not budget.spend():
        return None
    f = _objective(rho, p, rho_sep)
    steps = np.full(family.size, 0.5)
    while budget.left > 0:
        if f <= tol:
            return p, rho_sep
        if steps.max() < 1e-6:
            x = family.random(rng)
            p, rho_sep = family.decode(x)
            if not budget.spend():
                break
            f = _objective(rho, p, rho_sep)
            steps[:] = 0.5
            continue
        i = int(rng.integers(family.size))
        improved = False
        for sign in (1.0, -1.0):
            y = x.copy()
            y[i] += sign * steps[i]
            if not budget.spend():
                return None
            q, sep = family.decode(y)
            g = _objective(rho, q, sep)
            if g < f:
                x, f, p, rho_sep = y, g, q, sep
                steps[i] *= 1.5
                improved = True
                break
        if not improved:
            steps[i] *= 0.5
    return None


def strengthen(rho, budget=10_000, seed=0, grid_n=DEFAULT_GRID_N, tol=TOL):
    """Look for a certified decomposition of ``rho``; ``None`` means inconclusive.

    The search first tries each structured separable candidate with a line
    search over ``p``, then runs seeded coordinate descent with random restarts
    over a small separable family. Every candidate is re-verified by
    :func:`verify_decomposition` before it is returned.
    """
    rho = require_state(rho, tol)
    try:
        direct = evaluate_criterion(canonicalize(rho, tol).canonical, grid_n=grid_n, tol=tol)
    except StateError:
        direct = None
    if direct is not None and direct.verdict == CERTIFIED:
        return Decomposition(1.0, rho.copy(), np.eye(4, dtype=complex) / 4)

    left = _Budget(budget)

    def accept(p, rho_sep):
        sigma, rep = extract_sigma(rho, p, rho_sep, tol)
        if not rep.valid:
            return None
        dec = Decomposition(float(p), sigma, rho_sep)
        return dec if verify_decomposition(rho, dec, grid_n, tol).ok else None

    fixed = _structured_candidates(rho)
    for rho_sep in fixed:
        found = _line_search(rho, rho_sep, left)
        if found is None:
            return None
        val, p = found
        if val <= tol:
            dec = accept(p, rho_sep)
            if dec is not None:
                return dec

    rng = np.random.default_rng(seed)
    family = _SeparableFamily(fixed[:3])
    while left.left > 0:
        found = _coordinate_descent(rho, family, left, rng, tol)
        if found is None:
            break
        dec = accept(*found)
        if dec is not None:
            return dec
    return None
