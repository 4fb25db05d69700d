"""The partially entangled family ``rho(p, chi) = p |psi_chi><psi_chi| + (1 - p) rho_A x 1/2``.

``|psi_chi> = cos(chi)|00> + sin(chi)|11>`` and ``rho_A`` is its reduced state
on Alice. Closed forms here cover the Alice-to-Bob unsteerability boundary,
its canonical form, the Horodecki CHSH value and the POVM-based one-way
construction obtained by mixing in ``|0><0| x rho_B``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import csv
import io
import math

import numpy as np

from steerlab.canonical import CanonicalState, canonicalize
from steerlab.criterion import evaluate_criterion
from steerlab.qubit import (
    TOL,
    is_ppt,
    pauli_decompose,
    partial_trace_alice,
    projector,
)

BOUNDARY_TOL = 1e-12
BRACKET = (0.51, 0.999)
MAX_BISECTIONS = 60

SEPARABLE = "Separable"
BOTH_UNSTEERABLE = "BothUnsteerable"
ONE_WAY = "OneWay"
UNRESOLVED = "Unresolved"

CSV_FIELDS = [
    "p",
    "chi",
    "entangled",
    "unsteerable_AB",
    "steerable_BA",
    "region_label",
    "criterion_max",
    "chsh_M",
]


class BracketError(RuntimeError):
    """The bisection predicate does not change sign across the bracket."""


@dataclass(frozen=True)
class FamilyParams:
    p: float
    chi: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p = {self.p} outside [0, 1]")
        if not 0.0 < self.chi <= math.pi / 4 + 1e-15:
            raise ValueError(f"chi = {self.chi} outside (0, pi/4]")


def _params(p, chi=None):
    if isinstance(p, FamilyParams):
        return p
    return FamilyParams(float(p), float(chi))


def family_state(p, chi=None):
    fp = _params(p, chi)
    psi = np.zeros(4, dtype=complex)
    psi[0], psi[3] = math.cos(fp.chi), math.sin(fp.chi)
    rho_a = np.diag([math.cos(fp.chi) ** 2, math.sin(fp.chi) ** 2]).astype(complex)
    return fp.p * projector(psi) + (1 - fp.p) * np.kron(rho_a, np.eye(2) / 2)


def is_entangled(rho, tol=TOL):
    return not is_ppt(rho, tol)


def boundary_rhs(p):
    """``(2p - 1) / ((2 - p) p^3)``; non-positive for ``p <= 1/2``."""
    if p <= 0.5:
        return 0.0 if p == 0.5 else -math.inf
    return (2 * p - 1) / ((2 - p) * p ** 3)


def unsteerable_ab_condition(p, chi=None, tol=BOUNDARY_TOL):
    """Closed-form sufficient condition ``cos^2(2 chi) >= (2p - 1)/((2 - p) p^3)``."""
    fp = _params(p, chi)
    if fp.p <= 0.5:
        return True
    return math.cos(2 * fp.chi) ** 2 >= boundary_rhs(fp.p) - tol


def ansatz_chi(p):
    """The ``chi`` on the boundary curve for ``p`` in ``[1/2, 1)``."""
    if not 0.5 <= p < 1.0:
        raise ValueError(f"ansatz requires p in [1/2, 1), got {p}")
    rhs = boundary_rhs(p)
    if rhs > 1.0:
        raise ValueError(f"boundary value {rhs} > 1 for p = {p}")
    chi = 0.5 * math.acos(math.sqrt(rhs))
    if chi <= 0.0:
        raise ValueError(f"ansatz gives chi = 0 for p = {p}")
    return chi


def family_canonical(p, chi=None):
    """Canonical form in closed form; signs follow ``diag(p sin 2chi, -p sin 2chi, p)``.

    ``a_z = (1 - p^2) c / (1 - p^2 c^2)``, ``T_z = p (1 - c^2)/(1 - p^2 c^2)``,
    ``|T_x| = sqrt(p^2 (1 - c^2) / (1 - p^2 c^2))`` with ``c = cos 2chi``.
    """
    fp = _params(p, chi)
    c = math.cos(2 * fp.chi)
    den = 1.0 - fp.p ** 2 * c * c
    a_z = (1 - fp.p ** 2) * c / den
    t_z = fp.p * (1 - c * c) / den
    t_x = math.sqrt(fp.p ** 2 * (1 - c * c) / den)
    return CanonicalState([0.0, 0.0, a_z], [t_x, -t_x, t_z])


def ansatz_canonical(p):
    """Closed form on the boundary: ``a_z^2 = (2-p)(2p-1)/p``, ``T_z = (1-p)^2/p``, ``T_x = 1-p``."""
    a_z = math.sqrt((2 - p) * (2 * p - 1) / p)
    return CanonicalState([0.0, 0.0, a_z], [1 - p, -(1 - p), (1 - p) ** 2 / p])


def extremum_guard(p):
    """``(3 - p)(1 - p)^3 / ((p - 2)^2 (2p - 1))``; positive on ``(1/2, 1)``."""
    return (3 - p) * (1 - p) ** 3 / ((p - 2) ** 2 * (2 * p - 1))


def horodecki_chsh(rho, tol=TOL):
    """Sum of the two largest eigenvalues of ``T^T T``; CHSH is violated iff it exceeds 1."""
    T = pauli_decompose(rho, tol).T
    ev = np.sort(np.linalg.eigvalsh(T.T @ T))
    return float(ev[-1] + ev[-2])


def filter_chi(rho, chi):
    """Apply ``F = diag(1/cos chi, 1/sin chi)`` on Alice and renormalize."""
    F = np.kron(np.diag([1 / math.cos(chi), 1 / math.sin(chi)]), np.eye(2))
    out = F @ np.asarray(rho, dtype=complex) @ F
    return out / np.real(np.trace(out))


def povm_one_way_state(p, chi=None):
    """``rho(p, chi)/2 + |0><0| x rho_B / 2`` with ``rho_B`` Bob's marginal of ``rho(p, chi)``."""
    fp = _params(p, chi)
    rho = family_state(fp)
    rho_b = partial_trace_alice(rho)
    return 0.5 * rho + 0.5 * np.kron(np.diag([1.0, 0.0]), rho_b)


def filtered_povm_state(p, chi=None):
    fp = _params(p, chi)
    return filter_chi(povm_one_way_state(fp), fp.chi)


def povm_chsh_predicate(p):
    """Whether the filtered POVM state at ``chi = ansatz_chi(p)`` violates CHSH."""
    return horodecki_chsh(filtered_povm_state(p, ansatz_chi(p))) > 1.0


def povm_chsh_threshold(tol=1e-5, bracket=BRACKET, max_iter=MAX_BISECTIONS):
    """Smallest ``p`` on the boundary curve whose filtered POVM state violates CHSH."""
    if tol < 1e-6:
        raise ValueError("tol must be at least 1e-6")
    lo, hi = bracket
    if povm_chsh_predicate(lo) or not povm_chsh_predicate(hi):
        raise BracketError(f"CHSH predicate does not switch from False to True on {bracket}")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if povm_chsh_predicate(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# -- classification ------------------------------------------------------------

@dataclass(frozen=True)
class ClassificationRecord:
    p: float
    chi: float
    entangled: bool
    unsteerable_a_to_b: bool
    steerable_b_to_a: bool
    one_way: bool
    chsh_value: float
    region_label: str
    criterion_max: float = math.nan
    steerable_b_to_a_provenance: str = "analytic-citation"

    def csv_row(self):
        fmt = "{:.9g}".format
        return [
            fmt(self.p),
            fmt(self.chi),
            str(self.entangled).lower(),
            str(self.unsteerable_a_to_b).lower(),
            str(self.steerable_b_to_a).lower(),
            self.region_label,
            fmt(self.criterion_max),
            fmt(self.chsh_value),
        ]


def classify(p, chi=None, grid_n=2000):
    """Place ``rho(p, chi)`` in one of the regions of the (p, chi) plane.

    B-to-A steerability for ``p > 1/2`` is taken from the filter argument
    (filtered state is Werner with visibility p), not from a detector.
    """
    fp = _params(p, chi)
    rho = family_state(fp)
    entangled = is_entangled(rho)
    unsteerable_ab = unsteerable_ab_condition(fp)
    steerable_ba = fp.p > 0.5
    one_way = entangled and unsteerable_ab and steerable_ba
    if not entangled:
        label = SEPARABLE
    elif not steerable_ba and unsteerable_ab:
        label = BOTH_UNSTEERABLE
    elif one_way:
        label = ONE_WAY
    else:
        label = UNRESOLVED
    try:
        crit = evaluate_criterion(canonicalize(rho).canonical, grid_n=grid_n).max_value
    except ValueError:
        crit = math.nan
    return ClassificationRecord(
        fp.p, fp.chi, entangled, unsteerable_ab, steerable_ba, one_way,
        horodecki_chsh(rho), label, crit,
    )


def grid_axes(p_steps, chi_steps, p_range=(0.0, 1.0), chi_range=(0.0, math.pi / 4)):
    """Grid points; ``chi`` excludes its lower end (the family needs ``chi > 0``)."""
    ps = np.linspace(p_range[0], p_range[1], p_steps)
    lo, hi = chi_range
    chis = lo + (hi - lo) * np.arange(1, chi_steps + 1) / chi_steps
    return ps, chis


def scan_grid(p_steps, chi_steps, p_range=(0.0, 1.0), chi_range=(0.0, math.pi / 4), threads=1):
    """Classify every grid cell; rows come back sorted by ``(p, chi)``."""
    ps, chis = grid_axes(p_steps, chi_steps, p_range, chi_range)
    cells = [(float(p), float(c)) for p in ps for c in chis]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            records = list(pool.map(lambda pc: classify(*pc), cells))
    else:
        records = [classify(p, c) for p, c in cells]
    return sorted(records, key=lambda r: (r.p, r.chi))


def records_to_csv(records, stream=None):
    stream = stream if stream is not None else io.StringIO()
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in records:
        writer.writerow(r.csv_row())
    return stream
