"""Joint measurability of dichotomic qubit POVMs ``M+ = (k 1 + m.sigma)/2``.

A family is certified jointly measurable when every member satisfies
``k (k - 2) + 2 |m| <= 0``. The test is the unsteerability criterion applied
to the assemblage ``sigma_+- = M_+- / 2`` obtained from the maximally mixed
state, and the parent POVM is the cap post-processing of the LHS model.
"""
from dataclasses import dataclass
import json
import math

import numpy as np

from steerlab.criterion import fibonacci_sphere
from steerlab.lhs import MixedResponse, NotReproducible, fit_response, response_assemblage
from steerlab.qubit import ID2, EigPair, qubit_operator

TOL = 1e-12


class InvalidPOVM(ValueError):
    pass


@dataclass(frozen=True)
class DichotomicQubitPOVM:
    k: float
    m: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "m", np.asarray(self.m, dtype=float).reshape(3))
        n = self.m_norm
        if not (n <= self.k + 1e-12 and self.k <= 2.0 - n + 1e-12):
            raise InvalidPOVM(f"need |m| <= k <= 2 - |m|, got k = {self.k}, |m| = {n}")

    @property
    def m_norm(self):
        return float(np.linalg.norm(self.m))

    def effects(self):
        plus = 0.5 * qubit_operator(self.k, self.m)
        return plus, ID2 - plus

    def relabeled(self):
        """Swap the outcomes: ``(k, m) -> (2 - k, -m)``."""
        return DichotomicQubitPOVM(2.0 - self.k, -self.m)


def jm_value(povm):
    """``k (k - 2) + 2 |m|``; non-positive means the member passes."""
    return povm.k * (povm.k - 2.0) + 2.0 * povm.m_norm


def jm_sufficient(povm, tol=TOL):
    return jm_value(povm) <= tol


def jm_sufficient_symmetric(povm, tol=TOL):
    """The test on either outcome labeling (passes if one of them does)."""
    return jm_sufficient(povm, tol) or jm_sufficient(povm.relabeled(), tol)


def povm_to_assemblage(povm):
    """``(M_+ / 2, M_- / 2)``: the assemblage of the maximally mixed state."""
    plus, minus = povm.effects()
    return 0.5 * plus, 0.5 * minus


def assemblage_eigs(povm):
    """Eigenvalues ``((k + |m|)/4, (k - |m|)/4)`` of ``M_+ / 2``."""
    n = povm.m_norm
    return EigPair((povm.k + n) / 4.0, (povm.k - n) / 4.0)


def _axis(povm):
    n = povm.m_norm
    return povm.m / n if n > 0 else np.array([0.0, 0.0, 1.0])


def parent_postprocessing(povm):
    """Cap post-processing of the parent POVM ``G_lam = |lam><lam| / (2 pi)`` giving ``M_+``.

    Raises :class:`NotReproducible` when the member fails the test.
    """
    if not jm_sufficient(povm):
        raise NotReproducible(f"k(k-2) + 2|m| = {jm_value(povm):.3g} > 0")
    return fit_response(assemblage_eigs(povm), _axis(povm))


def reconstruct_effect(resp: MixedResponse):
    """``M_+ = integral of G_lam p(+|lam)``, twice the LHS assemblage of ``1/2``."""
    return 2.0 * response_assemblage(resp)


# -- families -----------------------------------------------------------------

class POVMFamily:
    """A (possibly continuous) family ``x -> (k_x, m_x)`` indexed by directions.

    ``bound`` optionally gives ``{"k_range": [lo, hi], "m_norm_max": n}``
    holding for every member; it turns sampled checks into a certificate.
    """

    name = "custom"

    def __init__(self, member, bound=None):
        self._member = member
        self.bound = bound

    def member(self, x):
        return self._member(x)

    def certificate(self):
        """Direction-independent verdict, or ``None`` if none is available."""
        if self.bound is None:
            return None
        lo, hi = self.bound["k_range"]
        n = self.bound["m_norm_max"]
        # k(k-2) is convex, so its maximum on [lo, hi] sits at an end point
        worst = max(lo * (lo - 2.0), hi * (hi - 2.0)) + 2.0 * n
        return True if worst <= TOL else None


class UnsharpFamily(POVMFamily):
    """``M_+- = (1 +- eta n.sigma)/2`` for every unit ``n``; the test reduces to ``2 eta - 1 <= 0``."""

    name = "unsharp"

    def __init__(self, eta):
        if not 0.0 <= eta <= 1.0:
            raise InvalidPOVM(f"eta = {eta} outside [0, 1]")
        self.eta = float(eta)
        super().__init__(lambda x: DichotomicQubitPOVM(1.0, self.eta * np.asarray(x, dtype=float)))

    def certificate(self):
        return 2.0 * self.eta - 1.0 <= TOL


class FiniteFamily(POVMFamily):
    """An explicit list of POVMs; checking every member is a certificate."""

    name = "list"

    def __init__(self, povms):
        self.povms = list(povms)
        super().__init__(None)

    def certificate(self):
        return all(jm_sufficient(p) for p in self.povms)


@dataclass
class JMReport:
    family: str
    verdict: str
    certified: bool
    n_checked: int
    n_failed: int
    n_failed_relabeled: int
    worst_value: float

    def to_dict(self):
        return dict(self.__dict__)


def jm_family_sampler(family, n_directions=2000):
    """Check the family on a direction grid and attach a certificate when one exists.

    Verdicts: ``certified``, ``not_certified`` (a certificate exists but fails,
    or some sampled member fails), ``sampled_only`` (all samples pass, no
    certificate available).
    """
    if isinstance(family, FiniteFamily):
        members = family.povms
    else:
        members = [family.member(x) for x in fibonacci_sphere(n_directions)]
    values = [jm_value(p) for p in members]
    failed = sum(v > TOL for v in values)
    failed_rel = sum(not jm_sufficient(p.relabeled()) for p in members)
    cert = family.certificate()
    if failed:
        verdict, certified = "not_certified", False
    elif cert:
        verdict, certified = "certified", True
    elif cert is False:
        verdict, certified = "not_certified", False
    else:
        verdict, certified = "sampled_only", False
    return JMReport(
        family=family.name,
        verdict=verdict,
        certified=certified,
        n_checked=len(members),
        n_failed=int(failed),
        n_failed_relabeled=int(failed_rel),
        worst_value=float(max(values)) if values else -math.inf,
    )


def family_from_json(obj):
    """Build a family from ``{"family": "unsharp", "eta": ...}`` or a list of ``{k, m}``."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if isinstance(obj, list):
        try:
            return FiniteFamily(DichotomicQubitPOVM(item["k"], item["m"]) for item in obj)
        except (KeyError, TypeError) as err:
            raise InvalidPOVM(f"list entries need 'k' and 'm': {err}") from None
    if isinstance(obj, dict) and obj.get("family") == "unsharp":
        if "eta" not in obj:
            raise InvalidPOVM("unsharp family needs 'eta'")
        return UnsharpFamily(float(obj["eta"]))
    raise InvalidPOVM("expected a list of {k, m} or {'family': 'unsharp', 'eta': ...}")
