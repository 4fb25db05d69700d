"""Two-qubit linear algebra and the Pauli (Bloch) data model.

Matrices are plain ``complex128`` numpy arrays in the computational basis
``|00>, |01>, |10>, |11>`` with Alice as the first tensor factor.
"""
from dataclasses import dataclass

import numpy as np

TOL = 1e-9

ID2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SX, SY, SZ])
_BASIS = np.stack([ID2, SX, SY, SZ])
# _PRODUCTS[mu, nu] = sigma_mu (x) sigma_nu
_PRODUCTS = np.einsum("aij,bkl->abikjl", _BASIS, _BASIS).reshape(4, 4, 4, 4)


class StateError(ValueError):
    """Input matrix is not an acceptable two-qubit operator."""


@dataclass(frozen=True)
class PauliForm:
    """Local Pauli-basis coordinates of a two-qubit operator.

    ``rho = (1 + a.sigma x 1 + 1 x b.sigma + sum_ij T_ij sigma_i x sigma_j) / 4``
    """

    a: np.ndarray
    b: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float).reshape(3))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(3))
        object.__setattr__(self, "T", np.asarray(self.T, dtype=float).reshape(3, 3))

    def within_bounds(self, tol=TOL):
        """Necessary conditions for a physical state: unit-ball marginals, |sv(T)| <= 1."""
        return bool(
            np.linalg.norm(self.a) <= 1 + tol
            and np.linalg.norm(self.b) <= 1 + tol
            and np.linalg.svd(self.T, compute_uv=False)[0] <= 1 + tol
        )


@dataclass(frozen=True)
class EigPair:
    """Ordered eigenvalues ``alpha >= beta`` of a sub-normalized qubit operator."""

    alpha: float
    beta: float

    @property
    def total(self):
        return self.alpha + self.beta


@dataclass(frozen=True)
class StateReport:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    tol: float

    @property
    def valid(self):
        return (
            self.hermiticity_defect <= self.tol
            and self.trace_defect <= self.tol
            and self.min_eigenvalue >= -self.tol
        )

    def problems(self):
        out = []
        if self.hermiticity_defect > self.tol:
            out.append(f"hermiticity defect {self.hermiticity_defect:.3g}")
        if self.trace_defect > self.tol:
            out.append(f"trace defect {self.trace_defect:.3g}")
        if self.min_eigenvalue < -self.tol:
            out.append(f"negative eigenvalue {self.min_eigenvalue:.3g}")
        return out


def _as_matrix(m, dim=None):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StateError(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise StateError(f"expected a {dim}x{dim} matrix, got {m.shape[0]}x{m.shape[1]}")
    return m


def hermiticity_defect(m):
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T)))


def _check_hermitian(m, tol):
    d = hermiticity_defect(m)
    if d > tol:
        raise StateError(f"matrix is not Hermitian (defect {d:.3g})")


def bloch_projector(v):
    """``(1 + v.sigma) / 2``; a pure-state projector when ``|v| = 1``."""
    return 0.5 * (ID2 + np.einsum("i,ijk->jk", np.asarray(v, dtype=float), PAULI))


def qubit_operator(scalar, vec):
    """``scalar * 1 + vec.sigma`` as a 2x2 matrix."""
    return scalar * ID2 + np.einsum("i,ijk->jk", np.asarray(vec, dtype=float), PAULI)


def bloch_vector(m):
    """Bloch components ``Tr(m sigma_i)`` of a 2x2 operator."""
    m = _as_matrix(m, 2)
    return np.real(np.einsum("ij,kji->k", m, PAULI))


def pauli_decompose(rho, tol=TOL):
    """Return the :class:`PauliForm` ``(a, b, T)`` of a Hermitian 4x4 matrix."""
    rho = _as_matrix(rho, 4)
    _check_hermitian(rho, tol)
    coef = np.real(np.einsum("ij,abji->ab", rho, _PRODUCTS))
    return PauliForm(coef[1:, 0], coef[0, 1:], coef[1:, 1:])


def pauli_compose(form):
    """Inverse of :func:`pauli_decompose` for unit-trace operators.

    Positivity is not checked; use :func:`is_valid_state` on the result.
    """
    coef = np.zeros((4, 4))
    coef[0, 0] = 1.0
    coef[1:, 0] = form.a
    coef[0, 1:] = form.b
    coef[1:, 1:] = form.T
    return np.einsum("ab,abij->ij", coef, _PRODUCTS) / 4.0


def partial_trace_bob(rho):
    """Alice's reduced operator ``Tr_B rho``."""
    rho = _as_matrix(rho, 4)
    return np.einsum("ijkj->ik", rho.reshape(2, 2, 2, 2))


def partial_trace_alice(rho):
    """Bob's reduced operator ``Tr_A rho``."""
    rho = _as_matrix(rho, 4)
    return np.einsum("ijil->jl", rho.reshape(2, 2, 2, 2))


def partial_transpose(rho):
    """Partial transpose on Bob's factor."""
    rho = _as_matrix(rho, 4)
    return rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def eig_hermitian(m, tol=TOL):
    """Eigenvalues in descending order and the matching unit eigenvectors (columns)."""
    m = _as_matrix(m)
    _check_hermitian(m, tol)
    h = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(h)
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def eigvals_hermitian(m, tol=TOL):
    return eig_hermitian(m, tol)[0]


def trace_distance(A, B):
    A = _as_matrix(A)
    B = _as_matrix(B)
    if A.shape != B.shape:
        raise StateError(f"dimension mismatch {A.shape} vs {B.shape}")
    d = A - B
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T)))))


def is_valid_state(rho, tol=TOL):
    """Report Hermiticity defect, trace defect and minimum eigenvalue."""
    rho = _as_matrix(rho)
    herm = hermiticity_defect(rho)
    h = 0.5 * (rho + rho.conj().T)
    return StateReport(
        hermiticity_defect=herm,
        trace_defect=abs(float(np.real(np.trace(rho))) - 1.0),
        min_eigenvalue=float(np.linalg.eigvalsh(h)[0]),
        tol=tol,
    )


def require_state(rho, tol=TOL):
    """Return ``rho`` as an array, raising :class:`StateError` unless it is a valid 4x4 state."""
    rho = _as_matrix(rho, 4)
    report = is_valid_state(rho, tol)
    if not report.valid:
        raise StateError("invalid state: " + ", ".join(report.problems()))
    return rho


def ppt_min_eigenvalue(rho):
    pt = partial_transpose(rho)
    return float(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))[0])


def is_ppt(rho, tol=TOL):
    """Positive partial transpose; equivalent to separability for two qubits."""
    return ppt_min_eigenvalue(rho) >= -tol


# -- named states -----------------------------------------------------------

def ket(*amps):
    v = np.asarray(amps, dtype=complex)
    return v / np.linalg.norm(v)


def projector(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def phi_plus():
    return projector(ket(1, 0, 0, 1))


def psi_minus():
    return projector(ket(0, 1, -1, 0))


def werner(p):
    """``p |psi-><psi-| + (1 - p) 1/4``."""
    return p * psi_minus() + (1 - p) * np.eye(4) / 4


def isotropic(p):
    """``p |phi+><phi+| + (1 - p) 1/4``."""
    return p * phi_plus() + (1 - p) * np.eye(4) / 4


def classically_correlated(u=(0, 0, 1), v=None):
    """``(P(u) x P(v) + P(-u) x P(-v)) / 2`` with ``P(n) = (1 + n.sigma)/2``.

    The default is ``(|00><00| + |11><11|) / 2``.
    """
    u = np.asarray(u, dtype=float)
    v = u if v is None else np.asarray(v, dtype=float)
    return 0.5 * (
        np.kron(bloch_projector(u), bloch_projector(v))
        + np.kron(bloch_projector(-u), bloch_projector(-v))
    )
