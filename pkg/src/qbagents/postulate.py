"""Physical postulates and physically valid regions.

A physical postulate fixes how an agent's probabilities ``q`` for an arbitrary
action follow from their probabilities ``p`` for a hypothetical reference
action, through the action's conditional probability matrix ``R``:

    q = R (Phi p)

The classical postulate has ``Phi = I`` (law of total probability form) and
its valid states are the whole reference simplex.  A quantum postulate derives
``Phi`` from a reference action as the inverse of the reference's own
conditional probability matrix, ``[Phi^-1]_{ij} = tr(E_i rho_j)``.  Quantum
``Phi`` is column quasistochastic (columns sum to one, some entries strictly
negative), and the valid states shrink to the reference probabilities of
actual density operators; for the built-in qubit SIC reference this is the
ball inscribed in the 4-outcome simplex.

Parameter regions
-----------------
Agents represent beliefs as densities over a parameter region.  Regions know
their particle dimension, how to test membership, how to sample uniformly, and
how to embed parameter points into reference probability vectors:

* ``Interval(lo, hi)``: theta in [lo, hi], embedded as (theta, 1 - theta).
* ``QubitBall()``: Bloch points, embedded as tetrahedral SIC probabilities.
* ``FullSimplex(n)``: probability vectors, embedded as themselves.
* ``ZChord()``: the z-axis chord of the Bloch ball; the image of a
  two-outcome agent's beliefs inside the qubit picture.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .core_math import PROB_TOL, as_prob_vector
from .errors import DimensionMismatchError, RegionError, ValidationError
from .quantum import (
    OP_TOL,
    ReferenceAction,
    bloch_from_sic_probs,
    conditional_matrix,
    sic_d2,
    sic_probs_from_bloch,
)

BALL_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Interval:
    """Sub-interval of [0, 1]; parameter is the probability of outcome 0."""

    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise ValidationError(f"invalid interval [{self.lo}, {self.hi}]")

    dim = 1
    ref_dim = 2

    def contains(self, points) -> np.ndarray:
        t = np.asarray(points, dtype=float).reshape(-1)
        return (t >= self.lo - PROB_TOL) & (t <= self.hi + PROB_TOL)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, 1))

    def to_ref_probs(self, points) -> np.ndarray:
        t = np.asarray(points, dtype=float).reshape(-1, 1)
        return np.hstack([t, 1.0 - t])


@dataclass(frozen=True)
class QubitBall:
    """The unit Bloch ball, the valid states of the qubit SIC postulate."""

    dim = 3
    ref_dim = 4

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        return np.linalg.norm(pts, axis=1) <= 1.0 + BALL_TOL

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        direction = rng.normal(size=(n, 3))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = rng.uniform(size=(n, 1)) ** (1.0 / 3.0)
        return direction * radius

    def to_ref_probs(self, points) -> np.ndarray:
        return sic_probs_from_bloch(np.asarray(points, dtype=float).reshape(-1, 3))


@dataclass(frozen=True)
class FullSimplex:
    """The whole n-outcome probability simplex."""

    n_outcomes: int

    def __post_init__(self):
        if self.n_outcomes < 2:
            raise ValidationError("simplex needs at least 2 outcomes")

    @property
    def dim(self) -> int:
        return self.n_outcomes

    @property
    def ref_dim(self) -> int:
        return self.n_outcomes

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.n_outcomes)
        ok_entries = np.all(pts >= -PROB_TOL, axis=1)
        ok_sum = np.abs(pts.sum(axis=1) - 1.0) <= PROB_TOL * self.n_outcomes
        return ok_entries & ok_sum

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.dirichlet(np.ones(self.n_outcomes), size=n)

    def to_ref_probs(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float).reshape(-1, self.n_outcomes)


@dataclass(frozen=True)
class ZChord:
    """Bloch points on the z axis; where a two-outcome agent's broadcasts land."""

    dim = 3
    ref_dim = 4

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        on_axis = (np.abs(pts[:, 0]) <= BALL_TOL) & (np.abs(pts[:, 1]) <= BALL_TOL)
        return on_axis & (np.abs(pts[:, 2]) <= 1.0 + BALL_TOL)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        pts = np.zeros((n, 3))
        pts[:, 2] = rng.uniform(-1.0, 1.0, size=n)
        return pts

    def to_ref_probs(self, points) -> np.ndarray:
        return sic_probs_from_bloch(np.asarray(points, dtype=float).reshape(-1, 3))


@dataclass(frozen=True)
class PhysicalPostulate:
    """The rule q = R (Phi p), classical (Phi = I) or quantum (Phi from a
    reference action)."""

    kind: str
    n_outcomes: int
    phi: np.ndarray
    ref: ReferenceAction | None = None

    def __post_init__(self):
        if self.kind not in ("classical", "quantum"):
            raise ValidationError(f"unknown postulate kind {self.kind!r}")
        phi = np.asarray(self.phi, dtype=float)
        if phi.shape != (self.n_outcomes, self.n_outcomes):
            raise ValidationError(f"Phi shape {phi.shape} vs N = {self.n_outcomes}")
        col_sums = phi.sum(axis=0)
        if np.max(np.abs(col_sums - 1.0)) > 1e-9:
            raise ValidationError("Phi columns must sum to one")
        if self.kind == "classical":
            if np.max(np.abs(phi - np.eye(self.n_outcomes))) > 0:
                raise ValidationError("classical Phi must be exactly the identity")
        else:
            if self.ref is None:
                raise ValidationError("quantum postulate requires a reference action")
            if phi.min() >= 0:
                raise ValidationError("quantum Phi must contain a negative entry")
        object.__setattr__(self, "phi", _readonly(phi.copy()))

    @property
    def is_quantum(self) -> bool:
        return self.kind == "quantum"


def classical_postulate(n_outcomes: int) -> PhysicalPostulate:
    """Law-of-total-probability postulate on n outcomes."""
    return PhysicalPostulate("classical", n_outcomes, np.eye(n_outcomes))


def phi_matrix(ref: ReferenceAction) -> np.ndarray:
    """Inverse of the reference action's own conditional probability matrix.

    ``[Phi^-1]_{ij} = tr(E_i rho_j)``; for the qubit SIC reference this gives
    Phi = 3 I - J/2 with J the all-ones matrix.
    """
    inv_phi = conditional_matrix(ref.effects, ref)
    n = ref.n_outcomes
    if np.linalg.cond(inv_phi) > 1e12:
        raise ValidationError("reference conditional matrix is singular")
    phi = np.linalg.inv(inv_phi)
    if np.max(np.abs(phi.sum(axis=0) - np.ones(n))) > 1e-9:
        raise ValidationError("Phi columns do not sum to one")
    return _readonly(phi)


def quantum_postulate(ref: ReferenceAction | None = None) -> PhysicalPostulate:
    """Born-rule postulate for the given reference action (default: qubit SIC)."""
    if ref is None:
        ref = sic_d2()
    return PhysicalPostulate("quantum", ref.n_outcomes, phi_matrix(ref), ref)


def sqrt_phi(phi) -> np.ndarray:
    """Principal square root of Phi; requires a positive real spectrum."""
    m = np.asarray(phi, dtype=float)
    eigs = np.linalg.eigvals(m)
    if np.any(np.abs(eigs.imag) > 1e-9) or np.any(eigs.real <= 0):
        raise ValidationError("Phi does not have a positive spectrum")
    root = sla.sqrtm(m)
    root = np.asarray(root)
    if np.max(np.abs(root.imag)) > 1e-10:
        raise ValidationError("principal square root is not real")
    root = root.real
    if np.max(np.abs(root @ root - m)) > 1e-10:
        raise ValidationError("square root verification failed")
    return _readonly(root)


def is_valid_state(post: PhysicalPostulate, p) -> bool:
    """Whether a reference probability vector is compatible with the postulate.

    Classical: membership in the simplex.  Quantum: the vector must correspond
    to a positive semidefinite unit-trace operator; for the built-in qubit SIC
    this is equivalent to Bloch radius <= 1 within tolerance.
    """
    vec = np.asarray(p, dtype=float).ravel()
    if vec.size != post.n_outcomes:
        raise DimensionMismatchError(
            f"vector length {vec.size} vs N = {post.n_outcomes}")
    in_simplex = (vec.min() >= -PROB_TOL
                  and abs(vec.sum() - 1.0) <= PROB_TOL * vec.size)
    if not post.is_quantum or not in_simplex:
        return in_simplex
    if post.ref is sic_d2():
        return bool(np.linalg.norm(bloch_from_sic_probs(vec)) <= 1.0 + BALL_TOL)
    rho = _density_from_ref_probs(post, vec)
    return bool(np.linalg.eigvalsh(rho).min() >= -OP_TOL)


def _density_from_ref_probs(post: PhysicalPostulate, p: np.ndarray) -> np.ndarray:
    # rho = sum_i (Phi p)_i rho_i reproduces tr(rho E_k) = p(k).
    alpha = post.phi @ p
    return sum(a * s for a, s in zip(alpha, post.ref.post_states))


def apply_postulate(post: PhysicalPostulate, p, R, *,
                    check_state: bool = True) -> np.ndarray:
    """Outcome probabilities q = R (Phi p) for an action with conditional
    matrix R, given reference probabilities p.

    Raises ``RegionError`` when p is not a valid state for the postulate and
    ``ValidationError`` when the result has a negative entry beyond tolerance
    (the conditional matrix is then not physically valid for this postulate).
    """
    vec = as_prob_vector(p, name="reference probabilities")
    matrix = np.asarray(R, dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] != post.n_outcomes:
        raise DimensionMismatchError(
            f"conditional matrix shape {matrix.shape} vs N = {post.n_outcomes}")
    if check_state and not is_valid_state(post, vec):
        raise RegionError("reference probabilities outside the physically valid region")
    q = matrix @ (post.phi @ vec)
    if q.min() < -PROB_TOL:
        raise ValidationError(
            f"conditional matrix produced a negative probability ({q.min():.3e}); "
            "not physically valid for this postulate")
    return as_prob_vector(q, name="outcome probabilities")


def ref_probs_of_points(post: PhysicalPostulate, points) -> np.ndarray:
    """Embed parameter points into reference probability vectors.

    The embedding is read off the trailing dimension: N-vectors pass through,
    scalars with N = 2 become (theta, 1 - theta), Bloch points with N = 4 map
    through the tetrahedral SIC.  Quantum agents with a non-SIC reference must
    supply reference probabilities directly.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(1, -1)
    k = pts.shape[-1]
    n = post.n_outcomes
    if k == n:
        return pts
    if k == 1 and n == 2:
        return np.hstack([pts, 1.0 - pts])
    if k == 3 and n == 4:
        return sic_probs_from_bloch(pts)
    raise DimensionMismatchError(
        f"cannot embed {k}-dimensional points into {n} reference outcomes")


LIKELIHOOD_DUST = 1e-12


def likelihood_values(post: PhysicalPostulate, R, j: int, points) -> np.ndarray:
    """Vectorized p(j | theta) over parameter points.

    Values within ``LIKELIHOOD_DUST`` of zero are snapped to exactly zero:
    cancellation in the quasiprobability form leaves order 1e-16 residue where
    the true likelihood vanishes, and a nominally dead hypothesis must not be
    resurrected by renormalization.
    """
    matrix = np.asarray(R, dtype=float)
    probs = ref_probs_of_points(post, points)
    row = matrix[j] @ post.phi
    values = probs @ row
    values[np.abs(values) < LIKELIHOOD_DUST] = 0.0
    return np.clip(values, 0.0, None)


def likelihood_row(post: PhysicalPostulate, R, j: int, theta) -> float:
    """Probability of outcome j of the action R at one parameter point."""
    return float(likelihood_values(post, R, j, theta)[0])


def likelihood_matrix(post: PhysicalPostulate, R, points) -> np.ndarray:
    """All outcome likelihoods at once: (n_points, n_outcomes(R))."""
    matrix = np.asarray(R, dtype=float)
    probs = ref_probs_of_points(post, points)
    values = probs @ (matrix @ post.phi).T
    values[np.abs(values) < LIKELIHOOD_DUST] = 0.0
    return np.clip(values, 0.0, None)


def ensemble_compatible(post: PhysicalPostulate, region) -> bool:
    """Whether beliefs over the region are valid states for the postulate."""
    if post.is_quantum:
        return isinstance(region, (QubitBall, ZChord)) and post.n_outcomes == 4
    if isinstance(region, Interval):
        return post.n_outcomes == 2
    if isinstance(region, FullSimplex):
        return post.n_outcomes == region.n_outcomes
    if isinstance(region, (QubitBall, ZChord)):
        return post.n_outcomes == 4
    return False
