"""Reduction of a two-qubit state to the canonical form ``(a, diag(t))`` with ``b = 0``.

Two steps: a local filter on Bob that whitens his marginal,
``1 x rho_B^{-1/2} rho 1 x rho_B^{-1/2}`` (renormalized), which preserves
steerability from Alice to Bob; then local rotations on both sides that
diagonalize the correlation matrix.
"""
from dataclasses import dataclass

import numpy as np

from steerlab.qubit import (
    TOL,
    PauliForm,
    StateError,
    pauli_compose,
    pauli_decompose,
    partial_trace_alice,
    require_state,
)

RANK_TOL = 1e-8
DEGENERACY_TOL = 1e-9


class BobMarginalPure(StateError):
    """Bob's marginal is (numerically) pure, so the whitening map is not invertible."""


@dataclass(frozen=True)
class CanonicalState:
    """Canonical state: Alice Bloch vector ``a`` and diagonal correlations ``t``."""

    a: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float).reshape(3))
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float).reshape(3))

    @property
    def T(self):
        return np.diag(self.t)

    def pauli(self):
        return PauliForm(self.a, np.zeros(3), np.diag(self.t))

    def matrix(self):
        return pauli_compose(self.pauli())


@dataclass(frozen=True)
class CanonicalizationRecord:
    canonical: CanonicalState
    alice_rotation: np.ndarray
    bob_rotation: np.ndarray
    whitening_applied: bool

    def to_dict(self):
        return {
            "a": self.canonical.a.tolist(),
            "t": self.canonical.t.tolist(),
            "alice_rotation": self.alice_rotation.tolist(),
            "bob_rotation": self.bob_rotation.tolist(),
            "whitening_applied": self.whitening_applied,
        }


def bob_whitening(rho, rank_tol=RANK_TOL, tol=TOL):
    """Apply ``1 x rho_B^{-1/2}`` on both sides and renormalize.

    Raises :class:`BobMarginalPure` when the smaller eigenvalue of ``rho_B`` is
    below ``rank_tol``.
    """
    rho = require_state(rho, tol)
    rho_b = partial_trace_alice(rho)
    vals, vecs = np.linalg.eigh(0.5 * (rho_b + rho_b.conj().T))
    if vals[0] < rank_tol:
        raise BobMarginalPure(
            f"Bob's marginal has eigenvalue {vals[0]:.3g} < {rank_tol:g}; the whitening map is not invertible"
        )
    inv_sqrt = (vecs * vals ** -0.5) @ vecs.conj().T
    K = np.kron(np.eye(2), inv_sqrt)
    out = K @ rho @ K
    out = 0.5 * (out + out.conj().T)
    return out / np.real(np.trace(out))


def _clusters(mags, tol):
    """Group indices of (descending) ``mags`` whose values agree within ``tol``."""
    groups = [[0]]
    for i in range(1, len(mags)):
        if abs(mags[i] - mags[groups[-1][0]]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _rotation_to(v, target):
    """Rotation (det +1) taking unit ``v`` to unit ``target``."""
    v = v / np.linalg.norm(v)
    target = target / np.linalg.norm(target)
    c = float(v @ target)
    k = np.cross(v, target)
    s = np.linalg.norm(k)
    if s < 1e-15:
        if c > 0:
            return np.eye(3)
        # half turn about any axis orthogonal to v
        perp = np.cross(v, [1.0, 0.0, 0.0])
        if np.linalg.norm(perp) < 1e-8:
            perp = np.cross(v, [0.0, 1.0, 0.0])
        perp /= np.linalg.norm(perp)
        return 2.0 * np.outer(perp, perp) - np.eye(3)
    k /= s
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + s * K + (1 - c) * K @ K


def diagonalize_correlation(form, tol=TOL, degeneracy_tol=DEGENERACY_TOL):
    """Rotate both frames so the correlation matrix becomes diagonal.

    Conventions, applied in order:

    * signed SVD with ``det R_A = det R_B = +1``; signs are pushed into ``t``;
    * axes sorted by descending ``|t|``, except that when exactly two entries
      are degenerate they occupy x and y and the distinct one sits on z;
    * inside a degenerate block the signs are equalized by half turns on
      Alice's side, then the block is rotated jointly so that ``a`` points
      along z (three-fold block) or has no y component (x-y block).
    """
    if np.linalg.norm(form.b) > tol:
        raise StateError(f"Bob's Bloch vector must vanish, |b| = {np.linalg.norm(form.b):.3g}")
    U, S, Vt = np.linalg.svd(form.T)
    V = Vt.T
    t = S.copy()
    if np.linalg.det(U) < 0:
        U[:, 2] *= -1
        t[2] *= -1
    if np.linalg.det(V) < 0:
        V[:, 2] *= -1
        t[2] *= -1
    RA, RB = U.T, V.T

    groups = _clusters(np.abs(t), degeneracy_tol)
    if [len(g) for g in groups] in ([1, 2], [2, 1]):
        pair = next(g for g in groups if len(g) == 2)
        single = next(g for g in groups if len(g) == 1)
        order = pair + single
        P = np.eye(3)[order]
        if np.linalg.det(P) < 0:
            P[2] *= -1
        RA, RB, t = P @ RA, P @ RB, t[order]
        groups = [[0, 1], [2]]

    for g in groups:
        if len(g) < 2:
            continue
        # half turns about an axis flip the sign of the other two entries
        if len(g) == 2 and np.sign(t[0]) != np.sign(t[1]) and abs(t[0]) > 0:
            F = np.diag([1.0, -1.0, -1.0])
            RA, t = F @ RA, t * np.diag(F)
        elif len(g) == 3 and abs(t[0]) > 0:
            target = np.sign(np.prod(t)) or 1.0
            flips = [i for i in range(3) if np.sign(t[i]) != target]
            if len(flips) == 2:
                F = np.ones(3)
                F[flips] = -1.0
                RA, t = np.diag(F) @ RA, t * F

    a = RA @ form.a
    if len(groups) == 1 and np.linalg.norm(a) > 0:
        Q = _rotation_to(a, np.array([0.0, 0.0, 1.0]))
        RA, RB = Q @ RA, Q @ RB
    elif groups[0] == [0, 1] and np.hypot(a[0], a[1]) > 0:
        phi = np.arctan2(a[1], a[0])
        c, s = np.cos(phi), np.sin(phi)
        Q = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
        RA, RB = Q @ RA, Q @ RB
    a = RA @ form.a
    if len(groups) == 1:
        a[:2] = 0.0
    elif groups[0] == [0, 1]:
        a[1] = 0.0

    return CanonicalizationRecord(
        canonical=CanonicalState(a, t),
        alice_rotation=RA,
        bob_rotation=RB,
        whitening_applied=False,
    )


def canonicalize(rho, tol=TOL, rank_tol=RANK_TOL):
    """Whiten Bob's marginal, then diagonalize the correlation matrix."""
    whitened = bob_whitening(rho, rank_tol=rank_tol, tol=tol)
    rec = diagonalize_correlation(pauli_decompose(whitened, tol), tol=max(tol, 1e-9))
    return CanonicalizationRecord(rec.canonical, rec.alice_rotation, rec.bob_rotation, True)


def rotated_correlation_residual(form, rec):
    """Largest off-diagonal entry of ``R_A T R_B^T``; a convention-free diagonality check."""
    D = rec.alice_rotation @ form.T @ rec.bob_rotation.T
    return float(np.max(np.abs(D - np.diag(np.diag(D)))))
