"""Exchangeable-prior Bayesian inference over parameter regions.

Beliefs are represented as weighted point sets.  Two flavors exist:

* grid ensembles (1-D regions only): a fixed uniform grid whose weights track
  the density exactly at the grid points; these are never resampled, since
  reweighting alone keeps the representation faithful;
* particle ensembles (the Bloch ball and other multi-dimensional regions):
  weighted samples refreshed by a resample-move step when the effective sample
  size degrades.

Updates multiply weights by the postulate likelihood of the observed outcome
and renormalize.  Every update records the observation in a compact tally of
(postulate, conditional matrix, outcome) counts, which is what the move step
needs to evaluate the current posterior density at proposed points: all
shipped scenarios start from uniform priors over their support, so the target
is proportional to the accumulated likelihood inside the region.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ImpossibleOutcomeError, ValidationError
from .postulate import PhysicalPostulate, likelihood_values

DEFAULT_BALL_PARTICLES = 10_000
RESAMPLE_SWEEPS = 10
PROPOSAL_SCALE = 0.5


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Observation:
    """One kind of recorded outcome and how many times it occurred."""

    postulate: PhysicalPostulate
    matrix: np.ndarray
    outcome: int
    count: int


@dataclass(frozen=True)
class ParticleEnsemble:
    """Weighted points over a parameter region representing a belief density.

    ``grid`` marks a fixed 1-D quadrature grid and ``atoms`` a delta mixture;
    both are exact representations whose weights alone carry the density, so
    the resample-move step leaves them untouched.
    """

    points: np.ndarray
    weights: np.ndarray
    region: object
    grid: bool = False
    atoms: bool = False
    observations: tuple[Observation, ...] = ()

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValidationError(f"points must be (n, dim) with n >= 1, got {pts.shape}")
        if pts.shape[1] != self.region.dim:
            raise ValidationError(
                f"point dimension {pts.shape[1]} vs region dimension {self.region.dim}")
        if not np.all(self.region.contains(pts)):
            raise ValidationError("some points lie outside the region")
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.shape != (pts.shape[0],):
            raise ValidationError("weights length does not match points")
        if w.min() < 0 or not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite and nonnegative")
        total = w.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"weights sum to {total!r}, expected 1")
        object.__setattr__(self, "points", _readonly(pts.copy()))
        object.__setattr__(self, "weights", _readonly(w / total))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def ess(self) -> float:
        """Effective sample size 1 / sum(w^2)."""
        return float(1.0 / np.sum(self.weights ** 2))


def _bless(ens: ParticleEnsemble, *, points=None, weights=None,
           observations=None) -> ParticleEnsemble:
    # Validation bypass for the update loop: inputs derive from an already
    # validated ensemble, so region membership and normalization hold.
    out = object.__new__(ParticleEnsemble)
    object.__setattr__(out, "points", ens.points if points is None else _readonly(points))
    object.__setattr__(out, "weights", ens.weights if weights is None else _readonly(weights))
    object.__setattr__(out, "region", ens.region)
    object.__setattr__(out, "grid", ens.grid)
    object.__setattr__(out, "atoms", ens.atoms)
    object.__setattr__(out, "observations",
                       ens.observations if observations is None else observations)
    return out


@dataclass(frozen=True)
class PosteriorSummary:
    """Weighted mean, covariance, and the standard deviation ellipsoid.

    Axis lengths are the eigenvalues of the covariance square root (sorted
    descending); axes holds the matching eigenvectors as columns.
    """

    mean: np.ndarray
    covariance: np.ndarray
    axis_lengths: np.ndarray
    axes: np.ndarray

    @property
    def semi_major(self) -> float:
        return float(self.axis_lengths[0])

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))


def sample_uniform(region, n: int, rng: np.random.Generator) -> ParticleEnsemble:
    """n i.i.d. uniform points on the region with equal weights."""
    if n < 1:
        raise ValidationError("need at least one particle")
    pts = region.sample(n, rng)
    return ParticleEnsemble(pts, np.full(n, 1.0 / n), region)


def grid_ensemble(region, n: int, pdf=None) -> ParticleEnsemble:
    """Deterministic uniform grid over a 1-D region, weighted by ``pdf`` if given."""
    if region.dim != 1:
        raise ValidationError("grid ensembles are only supported on 1-D regions")
    if n < 2:
        raise ValidationError("grid needs at least 2 points")
    grid = np.linspace(region.lo, region.hi, n).reshape(-1, 1)
    if pdf is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(pdf(grid[:, 0]), dtype=float)
        if w.min() < 0 or not np.all(np.isfinite(w)):
            raise ValidationError("pdf produced negative or non-finite weights")
        total = w.sum()
        if total <= 0:
            raise ValidationError("pdf is zero everywhere on the grid")
        w = w / total
    return ParticleEnsemble(grid, w, region, grid=True)


def delta_ensemble(points, weights, region) -> ParticleEnsemble:
    """Mixture of point masses (a single point gives an exogenous-style delta)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    w = np.asarray(weights, dtype=float).ravel()
    return ParticleEnsemble(pts, w / w.sum(), region, atoms=True)


def bayes_update(ens: ParticleEnsemble, post: PhysicalPostulate, R, j: int) -> ParticleEnsemble:
    """Reweight by the likelihood of outcome j; points never move here.

    Raises ``ImpossibleOutcomeError`` when the total posterior weight
    underflows, i.e. the outcome contradicts the entire support.
    """
    like = likelihood_values(post, R, j, ens.points)
    w = ens.weights * like
    total = w.sum()
    if not np.isfinite(total) or total < 1e-300:
        raise ImpossibleOutcomeError(
            f"outcome {j} has zero probability on the whole support")
    return _bless(ens, weights=w / total,
                  observations=_record(ens.observations, post, R, j))


def _record(observations, post, R, j) -> tuple[Observation, ...]:
    matrix = np.asarray(R, dtype=float)
    out = []
    found = False
    for obs in observations:
        if (obs.postulate is post and obs.outcome == j
                and obs.matrix.shape == matrix.shape
                and np.array_equal(obs.matrix, matrix)):
            out.append(replace(obs, count=obs.count + 1))
            found = True
        else:
            out.append(obs)
    if not found:
        out.append(Observation(post, _readonly(matrix.copy()), j, 1))
    return tuple(out)


def log_posterior_density(ens: ParticleEnsemble, points) -> np.ndarray:
    """Unnormalized log density of the accumulated posterior at given points.

    Uniform prior over the region is assumed (the shipped scenarios all start
    uniform on their support); points outside the region get -inf.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, ens.dim)
    logp = np.zeros(pts.shape[0])
    for obs in ens.observations:
        like = likelihood_values(obs.postulate, obs.matrix, obs.outcome, pts)
        with np.errstate(divide="ignore"):
            logp += obs.count * np.log(like)
    logp[~ens.region.contains(pts)] = -np.inf
    return logp


def posterior_summary(ens: ParticleEnsemble) -> PosteriorSummary:
    """Weighted mean and covariance with the ellipsoid decomposition."""
    w = ens.weights
    mean = w @ ens.points
    centered = ens.points - mean
    if ens.dim == 1:
        var = float(w @ centered[:, 0] ** 2)
        return PosteriorSummary(
            mean=_readonly(mean),
            covariance=_readonly(np.array([[var]])),
            axis_lengths=_readonly(np.array([np.sqrt(max(var, 0.0))])),
            axes=_readonly(np.ones((1, 1))),
        )
    cov = (centered * w[:, None]).T @ centered
    cov = 0.5 * (cov + cov.T)
    eigvals, eigvecs = np.linalg.eigh(cov)
    eigvals = np.clip(eigvals, 0.0, None)
    order = np.argsort(eigvals)[::-1]
    return PosteriorSummary(
        mean=_readonly(mean),
        covariance=_readonly(cov),
        axis_lengths=_readonly(np.sqrt(eigvals[order])),
        axes=_readonly(eigvecs[:, order].copy()),
    )


def maybe_resample(ens: ParticleEnsemble, rng: np.random.Generator, *,
                   sweeps: int = RESAMPLE_SWEEPS,
                   scale_factor: float = PROPOSAL_SCALE) -> ParticleEnsemble:
    """Resample-move step, triggered when ESS drops below n/2.

    Systematic resampling restores equal weights, then a Gaussian random-walk
    Metropolis pass (scale = ``scale_factor`` times the per-dimension posterior
    standard deviation, ``sweeps`` sweeps, proposals outside the region
    rejected) rejuvenates particle diversity while targeting the current
    posterior.  Exact representations (grids, delta mixtures) and healthy
    particle sets pass through unchanged.
    """
    if ens.grid or ens.atoms or ens.ess() >= ens.n / 2:
        return ens
    summary = posterior_summary(ens)
    idx = _systematic_indices(ens.weights, rng)
    pts = ens.points[idx].copy()
    equal = np.full(ens.n, 1.0 / ens.n)
    scale = scale_factor * summary.std
    if not np.any(scale > 0):
        return _bless(ens, points=pts, weights=equal)
    logp = log_posterior_density(ens, pts)
    for _ in range(sweeps):
        proposal = pts + rng.normal(size=pts.shape) * scale
        logp_prop = log_posterior_density(ens, proposal)
        with np.errstate(invalid="ignore"):
            accept = np.log(rng.uniform(size=ens.n)) < (logp_prop - logp)
        accept &= np.isfinite(logp_prop)
        pts[accept] = proposal[accept]
        logp[accept] = logp_prop[accept]
    return _bless(ens, points=pts, weights=equal)


def _systematic_indices(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = weights.size
    positions = (rng.uniform() + np.arange(n)) / n
    return np.searchsorted(np.cumsum(weights), positions)
