"""Local hidden state model for canonical states.

Hidden states are pure qubit states with Bloch vectors ``lam`` drawn uniformly
from the sphere. For a measurement ``x`` Alice answers +1 when ``lam`` falls
in the spherical cap ``s.lam >= c`` around the steered state's eigenvector
``s``; mixing that cap with the constant answer -1 at weight ``w`` hits any
eigenvalue pair below the cap curve ``alpha = sqrt(2 beta) - beta``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import json
import math

import numpy as np

from steerlab import kernels
from steerlab.criterion import steered_axis, steered_eigs, steered_state, unit
from steerlab.qubit import EigPair, ID2, qubit_operator, trace_distance

FEASIBILITY_TOL = 1e-12
MIN_SAMPLES = 1000
SAMPLE_CHUNK = 1 << 16


class NotReproducible(ValueError):
    """The eigenvalue pair lies above the cap curve; no cap mixture reproduces it."""

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = None if direction is None else [float(v) for v in direction]


@dataclass(frozen=True)
class CapResponse:
    s_hat: np.ndarray
    c: float

    def __post_init__(self):
        object.__setattr__(self, "s_hat", unit(self.s_hat))
        if not -1.0 <= self.c <= 1.0:
            raise ValueError(f"cap threshold {self.c} outside [-1, 1]")

    @property
    def angle(self):
        return math.acos(self.c)


@dataclass(frozen=True)
class MixedResponse:
    """Use the cap with probability ``w``; otherwise answer -1."""

    cap: CapResponse
    w: float

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise ValueError(f"mixing weight {self.w} outside [0, 1]")


def cap_eigenvalues(c):
    """Eigenvalues of the cap integral: ``beta = (1 - c)^2 / 8``, ``alpha = sqrt(2 beta) - beta``."""
    if not -1.0 <= c <= 1.0:
        raise ValueError(f"cap threshold {c} outside [-1, 1]")
    beta = (1.0 - c) ** 2 / 8.0
    return EigPair((1.0 - c) / 2.0 - beta, beta)


def fit_response(target, s_hat, tol=FEASIBILITY_TOL):
    """Cap threshold and weight reproducing ``target`` along the ray through the origin.

    With ``r = alpha / beta`` the cap is ``c = (r - 3)/(r + 1)`` and the weight
    ``w = (alpha + beta)^2 / (2 beta)``; ``w <= 1`` is the feasibility condition.
    """
    alpha, beta = target.alpha, target.beta
    if alpha < beta - tol or beta < -tol:
        raise ValueError(f"expected alpha >= beta >= 0, got ({alpha}, {beta})")
    excess = (alpha + beta) ** 2 - 2.0 * beta
    if excess > tol:
        raise NotReproducible(f"(alpha + beta)^2 - 2 beta = {excess:.3g} > 0")
    if beta <= 0.0:
        # only (0, 0) survives the feasibility test here
        return MixedResponse(CapResponse(s_hat, 1.0), 0.0)
    r = alpha / beta
    c = min(1.0, max(-1.0, (r - 3.0) / (r + 1.0)))
    w = min(1.0, (alpha + beta) ** 2 / (2.0 * beta))
    return MixedResponse(CapResponse(s_hat, c), w)


def respond(resp, lam, coin):
    """Alice's outcome (+1 or -1) for hidden state ``lam`` and a uniform ``coin`` in [0, 1)."""
    if coin >= resp.w:
        return -1
    return 1 if float(resp.cap.s_hat @ np.asarray(lam, dtype=float)) - resp.cap.c >= 0.0 else -1


def response_assemblage(resp):
    """``sigma_+`` produced by a mixed response, integrated over the cap in closed form.

    The cap integral has trace ``(1 - c)/2`` and eigenvalue gap ``(1 - c^2)/4``
    along ``s``; off-diagonal terms vanish by azimuthal symmetry.
    """
    c = resp.cap.c
    total = (1.0 - c) / 2.0
    gap = (1.0 - c * c) / 4.0
    return resp.w * qubit_operator(total / 2.0, 0.5 * gap * resp.cap.s_hat)


def fit_direction(state, x):
    x = unit(x)
    try:
        return fit_response(steered_eigs(state, x), steered_axis(state, x))
    except NotReproducible as err:
        raise NotReproducible(f"direction {np.round(x, 12).tolist()}: {err}", x) from None


def analytic_lhs_steered(state, x):
    """``sigma_+|x`` as reproduced by the model (raises :class:`NotReproducible`)."""
    return response_assemblage(fit_direction(state, x))


def analytic_lhs_pair(state, x):
    plus = analytic_lhs_steered(state, x)
    return plus, 0.5 * ID2 - plus


# -- Monte Carlo -------------------------------------------------------------

def sample_sphere(rng, n):
    """Uniform unit vectors via ``z ~ U(-1, 1)``, ``phi ~ U(0, 2 pi)``."""
    z = rng.uniform(-1.0, 1.0, n)
    phi = rng.uniform(0.0, 2.0 * math.pi, n)
    r = np.sqrt(1.0 - z * z)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


@dataclass
class DirectionResult:
    direction: list
    analytic_dist: float
    empirical_dist: float
    p_plus_exact: float
    p_plus_empirical: float


@dataclass
class LhsVerificationReport:
    n: int
    seed: int
    directions: list = field(default_factory=list)
    bob_marginal_dist: float = 0.0
    backend: str = kernels.BACKEND

    @property
    def statistical_tolerance(self):
        return 4.0 / math.sqrt(self.n)

    def max_empirical(self):
        return max(d.empirical_dist for d in self.directions)

    def to_dict(self):
        return {
            "n": self.n,
            "seed": self.seed,
            "backend": self.backend,
            "bob_marginal_dist": float(self.bob_marginal_dist),
            "directions": [
                {
                    "direction": d.direction,
                    "analytic_dist": float(d.analytic_dist),
                    "empirical_dist": float(d.empirical_dist),
                    "p_plus_exact": float(d.p_plus_exact),
                    "p_plus_empirical": float(d.p_plus_empirical),
                }
                for d in self.directions
            ],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _chunk_sums(child, size, caps):
    rng = np.random.default_rng(child)
    lams = sample_sphere(rng, size)
    total = lams.sum(axis=0)
    per_dir = [kernels.cap_accumulate(lams, cap.s_hat, cap.c) for cap in caps]
    return total, per_dir


def simulate_assemblage(state, directions, n_samples, seed=0, threads=None):
    """Estimate ``sigma_+|x = E[p(+|x, lam) |lam><lam|]`` by sampling hidden states.

    Samples are split into fixed-size chunks, each drawn from its own spawned
    seed sequence, so the result does not depend on ``threads``. Chunk sums are
    combined with ``math.fsum``.
    """
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be at least {MIN_SAMPLES}, got {n_samples}")
    directions = [unit(x) for x in directions]
    responses = [fit_direction(state, x) for x in directions]
    caps = [r.cap for r in responses]

    sizes = [SAMPLE_CHUNK] * (n_samples // SAMPLE_CHUNK)
    if n_samples % SAMPLE_CHUNK:
        sizes.append(n_samples % SAMPLE_CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    threads = threads or kernels.thread_count()
    jobs = list(zip(children, sizes))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda j: _chunk_sums(j[0], j[1], caps), jobs))
    else:
        parts = [_chunk_sums(c, s, caps) for c, s in jobs]

    n = float(n_samples)
    lam_mean = np.array([math.fsum(p[0][k] for p in parts) for k in range(3)]) / n
    report = LhsVerificationReport(n=n_samples, seed=seed)
    report.bob_marginal_dist = trace_distance(qubit_operator(0.5, 0.5 * lam_mean), 0.5 * ID2)

    for j, (x, resp) in enumerate(zip(directions, responses)):
        count = sum(p[1][j][0] for p in parts)
        vec = np.array([math.fsum(p[1][j][k + 1] for p in parts) for k in range(3)])
        emp = resp.w * qubit_operator(count / (2.0 * n), vec / (2.0 * n))
        exact = steered_state(state, x)
        report.directions.append(
            DirectionResult(
                direction=x.tolist(),
                analytic_dist=trace_distance(response_assemblage(resp), exact),
                empirical_dist=trace_distance(emp, exact),
                p_plus_exact=float(np.real(np.trace(exact))),
                p_plus_empirical=resp.w * count / n,
            )
        )
    return report


def convergence_slope(state, directions, sample_sizes, seed=0, replicates=8):
    """Log-log slope of the mean empirical trace distance against ``N``.

    For each ``N`` the distance is averaged over directions and over
    ``replicates`` runs whose seeds derive from ``seed``. Returns
    ``(slope, mean_distances)``.
    """
    seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(replicates)]
    means = []
    for n in sample_sizes:
        runs = [simulate_assemblage(state, directions, n, s) for s in seeds]
        means.append(float(np.mean([[d.empirical_dist for d in r.directions] for r in runs])))
    slope = float(np.polyfit(np.log(sample_sizes), np.log(means), 1)[0])
    return slope, means
