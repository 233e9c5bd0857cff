"""Sampled certificates for uniform mass-matrix bounds.

``alpha_1 I <= M(q, Theta(t)) <= alpha_2 I`` follows from uniform physical
consistency and upper-boundedness of the parameters together with a normal,
bounded Jacobian. Every infimum and supremum here is taken over the supplied
grid of coordinates (plus local restarts) and the supplied time samples;
nothing is a global proof. Each bound is checked back against ``M`` itself
at every sampled pair.
"""
# this_file: src/twat_robodyn/bounds.py

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from twat_robodyn.algebra import require_finite, sigma_max, symmetric_eigenvalues
from twat_robodyn.dynamics import q_block
from twat_robodyn.errors import InternalConsistencyError, InvalidInputError
from twat_robodyn.inertial import (
    BodyMargins,
    InertialParams,
    ParamTrajectory,
    block_spatial_inertia,
    pseudo_inertia,
    trajectory_margins,
)
from twat_robodyn.kinematics import Chain, JacobianSpectrum, jacobian, spectral_scan

logger = logging.getLogger(__name__)

STRICTNESS_GAP = 1e-6
SAMPLE_TOLERANCE = 1e-9
Q_NORM_LIMIT = math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class LowerBound:
    """``alpha_1 = (1 - epsilon) * consistency_inf * jac_inf`` or 0 when a hypothesis fails."""

    alpha1: float
    consistency_inf: float
    jac_inf: float
    epsilon: float
    normal: bool
    uniformly_consistent: bool
    sampled_min: float
    verified: bool

    @property
    def positive(self) -> bool:
        return self.alpha1 > 0.0


@dataclass(frozen=True, eq=False)
class UpperBound:
    """``alpha_2 = 2 * consistency_sup * jac_sup``; infinite when a hypothesis fails.

    ``sampled_alpha2`` keeps the finite product even then, for diagnostics.
    """

    alpha2: float
    sampled_alpha2: float
    consistency_sup: float
    jac_sup: float
    jac_upper_bounded: bool
    params_upper_bounded: bool
    sampled_max: float
    verified: bool

    @property
    def finite(self) -> bool:
        return math.isfinite(self.alpha2)


@dataclass(frozen=True, eq=False)
class RateBound:
    """Sampled ``sup sigma_max(M(q, Theta_dot))`` and its envelope ``chi * sup sigma_max(J)^2``."""

    sup_sigma: float
    chi: float
    jac_sup: float
    envelope: float
    argmax_q: NDArray[np.float64]
    argmax_time: float
    within_envelope: bool


@dataclass(frozen=True, eq=False)
class UnitBallWitness:
    """Unit-ball parameters make ``M = J^T J``; the mass-matrix extremes then equal ``beta_1``, ``beta_2``."""

    beta1: float
    beta2: float
    mass_inf: float
    mass_sup: float

    @property
    def matches(self) -> bool:
        return (
            abs(self.mass_inf - self.beta1) <= SAMPLE_TOLERANCE * max(1.0, abs(self.beta1))
            and abs(self.mass_sup - self.beta2) <= SAMPLE_TOLERANCE * max(1.0, abs(self.beta2))
        )


@dataclass(frozen=True, eq=False)
class BoundCertificate:
    """Everything needed to reproduce and judge a pair of mass-matrix bounds."""

    lower: LowerBound
    upper: UpperBound
    q_norm_sup: float
    rate: RateBound | None
    witness: UnitBallWitness
    spectrum: JacobianSpectrum
    margins: tuple[BodyMargins, ...]
    grid: NDArray[np.float64]
    sample_times: NDArray[np.float64]
    constant_params: bool

    @property
    def alpha1(self) -> float:
        return self.lower.alpha1

    @property
    def alpha2(self) -> float:
        return self.upper.alpha2

    @property
    def jac_inf(self) -> float:
        return self.spectrum.inf_lambda_min

    @property
    def jac_sup(self) -> float:
        return self.spectrum.sigma_max_sq

    @property
    def consistency_inf(self) -> float:
        return self.lower.consistency_inf

    @property
    def consistency_sup(self) -> float:
        return self.upper.consistency_sup

    @property
    def verdicts(self) -> dict[str, bool]:
        return {
            "normal": self.spectrum.normal,
            "upper_bounded_jac": self.spectrum.upper_bounded,
            "uniformly_consistent": self.lower.uniformly_consistent,
            "params_upper_bounded": self.upper.params_upper_bounded,
        }


@dataclass(frozen=True)
class CorollaryReport:
    """Which hypotheses hold on the samples and what follows from them."""

    normal: bool
    upper_bounded_jac: bool
    uniformly_consistent: bool
    params_upper_bounded: bool
    bounded: bool
    constant_params: bool
    beta1: float
    beta2: float
    jacobian_bounds_imply_mass_bounds: bool | None
    mass_bounds_imply_jacobian_bounds: bool | None

    @property
    def hypotheses_hold(self) -> bool:
        return self.normal and self.upper_bounded_jac and self.uniformly_consistent and self.params_upper_bounded


@dataclass(frozen=True, eq=False)
class EntryBound:
    """Largest inertia-rate entry against ``4 * sigma_max(f(Phi_dot))``."""

    mu: float
    max_entry: float

    @property
    def holds(self) -> bool:
        return self.max_entry <= 4.0 * self.mu + SAMPLE_TOLERANCE


# --- shared sampling ---------------------------------------------------------


def _grid(chain: Chain, grid: ArrayLike) -> NDArray[np.float64]:
    points = np.atleast_2d(require_finite("grid", grid))
    if points.size == 0:
        msg = "grid must not be empty"
        raise InvalidInputError(msg)
    if points.shape[1] != chain.n_dof:
        msg = f"grid points must have {chain.n_dof} coordinates, got {points.shape[1]}"
        raise InvalidInputError(msg)
    return points


def _check_trajectory(chain: Chain, trajectory: ParamTrajectory) -> None:
    if trajectory.n_samples == 0:
        msg = "parameter trajectory must not be empty"
        raise InvalidInputError(msg)
    if trajectory.n_bodies != chain.n_bodies:
        msg = f"trajectory has {trajectory.n_bodies} bodies, chain has {chain.n_bodies}"
        raise InvalidInputError(msg)


@dataclass(frozen=True, eq=False)
class _MassSpectra:
    lows: NDArray[np.float64]
    highs: NDArray[np.float64]


def _mass_spectra(
    jacobians: list[NDArray[np.float64]], samples: tuple[tuple[InertialParams, ...], ...]
) -> _MassSpectra:
    blocks = [block_spatial_inertia(theta) for theta in samples]
    lows = np.empty((len(jacobians), len(blocks)))
    highs = np.empty_like(lows)
    for i, jac in enumerate(jacobians):
        for k, z in enumerate(blocks):
            m = jac.T @ z @ jac
            eig = symmetric_eigenvalues(0.5 * (m + m.T))
            lows[i, k], highs[i, k] = eig[0], eig[-1]
    return _MassSpectra(lows, highs)


def _jacobians(chain: Chain, points: NDArray[np.float64]) -> list[NDArray[np.float64]]:
    return [np.asarray(jacobian(chain, q), dtype=float) for q in points]


def _lower(
    margins: tuple[BodyMargins, ...], spectrum: JacobianSpectrum, spectra: _MassSpectra, epsilon: float
) -> LowerBound:
    consistency_inf = min(m.inf_lambda_min for m in margins)
    uniform = all(m.uniformly_consistent for m in margins)
    if uniform and spectrum.normal:
        alpha1 = (1.0 - epsilon) * consistency_inf * spectrum.inf_lambda_min
    else:
        alpha1 = 0.0
    sampled_min = float(np.min(spectra.lows))
    verified = sampled_min >= alpha1 - SAMPLE_TOLERANCE
    if alpha1 > 0.0 and not verified:
        msg = f"sampled lambda_min(M)={sampled_min:.12g} below certified alpha_1={alpha1:.12g}"
        raise InternalConsistencyError(msg)
    return LowerBound(
        alpha1=alpha1,
        consistency_inf=consistency_inf,
        jac_inf=spectrum.inf_lambda_min,
        epsilon=epsilon,
        normal=spectrum.normal,
        uniformly_consistent=uniform,
        sampled_min=sampled_min,
        verified=verified,
    )


def _upper(margins: tuple[BodyMargins, ...], spectrum: JacobianSpectrum, spectra: _MassSpectra) -> UpperBound:
    consistency_sup = max(m.sup_lambda_max for m in margins)
    params_bounded = all(m.upper_bounded for m in margins)
    sampled_alpha2 = 2.0 * consistency_sup * spectrum.sigma_max_sq
    alpha2 = sampled_alpha2 if params_bounded and spectrum.upper_bounded else math.inf
    sampled_max = float(np.max(spectra.highs))
    verified = sampled_max <= sampled_alpha2 + SAMPLE_TOLERANCE
    # the factor two only holds for consistent parameters
    if not verified and all(m.consistent_at_all_samples for m in margins):
        msg = f"sampled lambda_max(M)={sampled_max:.12g} above alpha_2={sampled_alpha2:.12g}"
        raise InternalConsistencyError(msg)
    return UpperBound(
        alpha2=alpha2,
        sampled_alpha2=sampled_alpha2,
        consistency_sup=consistency_sup,
        jac_sup=spectrum.sigma_max_sq,
        jac_upper_bounded=spectrum.upper_bounded,
        params_upper_bounded=params_bounded,
        sampled_max=sampled_max,
        verified=verified,
    )


# --- public operations ---------------------------------------------------------


def lower_bound(
    chain: Chain,
    trajectory: ParamTrajectory,
    grid: ArrayLike,
    *,
    epsilon: float = STRICTNESS_GAP,
    restarts: int = 10,
    rng: np.random.Generator | None = None,
) -> LowerBound:
    """Certified ``alpha_1``, verified against ``lambda_min(M)`` at every (grid point, sample).

    A non-normal Jacobian or non-uniform consistency gives ``alpha1 == 0``
    with the failing verdict recorded; no exception is raised for that.
    """
    _check_trajectory(chain, trajectory)
    points = _grid(chain, grid)
    spectrum = spectral_scan(chain, points, restarts=restarts, rng=rng)
    spectra = _mass_spectra(_jacobians(chain, points), trajectory.params)
    return _lower(trajectory_margins(trajectory), spectrum, spectra, epsilon)


def upper_bound(
    chain: Chain,
    trajectory: ParamTrajectory,
    grid: ArrayLike,
    *,
    restarts: int = 10,
    rng: np.random.Generator | None = None,
) -> UpperBound:
    """Certified ``alpha_2``, verified against ``lambda_max(M)`` at every (grid point, sample)."""
    _check_trajectory(chain, trajectory)
    points = _grid(chain, grid)
    spectrum = spectral_scan(chain, points, restarts=restarts, rng=rng)
    spectra = _mass_spectra(_jacobians(chain, points), trajectory.params)
    return _upper(trajectory_margins(trajectory), spectrum, spectra)


def q_norm_check(chain: Chain, grid: ArrayLike) -> float:
    """Sampled ``sup sigma_max(Q(q))``; exceeding sqrt(2) means a bug.

    Raises:
      InternalConsistencyError: if any sample exceeds ``sqrt(2) + 1e-9``.
    """
    points = _grid(chain, grid)
    worst = 0.0
    for q in points:
        value = sigma_max(q_block(chain, q))
        if value > Q_NORM_LIMIT + SAMPLE_TOLERANCE:
            msg = f"sigma_max(Q)={value:.15g} exceeds sqrt(2) at q={q.tolist()}"
            raise InternalConsistencyError(msg)
        worst = max(worst, value)
    return worst


def rate_bound(chain: Chain, trajectory: ParamTrajectory, grid: ArrayLike) -> RateBound:
    """Sampled ``sup sigma_max(M(q, Theta_dot(t)))`` with its spatial-inertia envelope."""
    _check_trajectory(chain, trajectory)
    if trajectory.rates is None:
        msg = "rate bound needs a trajectory with parameter rates"
        raise InvalidInputError(msg)
    points = _grid(chain, grid)
    jacobians = _jacobians(chain, points)
    jac_norms = [sigma_max(j) ** 2 for j in jacobians]
    chis = [sigma_max(block_spatial_inertia(rate)) for rate in trajectory.rates]
    best, best_i, best_k, within = 0.0, 0, 0, True
    for k, rate in enumerate(trajectory.rates):
        z = block_spatial_inertia(rate)
        for i, jac in enumerate(jacobians):
            value = sigma_max(jac.T @ z @ jac)
            if value > chis[k] * jac_norms[i] + SAMPLE_TOLERANCE:
                logger.warning("rate envelope violated at q=%s t=%.6g", points[i].tolist(), trajectory.times[k])
                within = False
            if value > best:
                best, best_i, best_k = value, i, k
    chi, jac_sup = max(chis), max(jac_norms)
    return RateBound(
        sup_sigma=best,
        chi=chi,
        jac_sup=jac_sup,
        envelope=chi * jac_sup,
        argmax_q=points[best_i].copy(),
        argmax_time=float(trajectory.times[best_k]),
        within_envelope=within,
    )


def unit_ball_witness(chain: Chain, grid: ArrayLike) -> UnitBallWitness:
    """Evaluate ``M`` with unit-ball parameters on every body against the Jacobian spectrum."""
    points = _grid(chain, grid)
    spectrum = spectral_scan(chain, points, restarts=0)
    unit = ((InertialParams.unit_ball(),) * chain.n_bodies,)
    spectra = _mass_spectra(_jacobians(chain, points), unit)
    return UnitBallWitness(
        beta1=spectrum.inf_lambda_min,
        beta2=spectrum.sigma_max_sq,
        mass_inf=float(np.min(spectra.lows)),
        mass_sup=float(np.max(spectra.highs)),
    )


def _constant(trajectory: ParamTrajectory) -> bool:
    reference = trajectory.params[0]
    for sample in trajectory.params[1:]:
        if not all(a.allclose(b) for a, b in zip(sample, reference)):
            return False
    if trajectory.rates is not None:
        return all(not np.any(p.as_vector()) for sample in trajectory.rates for p in sample)
    return True


def certify(
    chain: Chain,
    trajectory: ParamTrajectory,
    grid: ArrayLike,
    *,
    epsilon: float = STRICTNESS_GAP,
    restarts: int = 10,
    rng: np.random.Generator | None = None,
) -> BoundCertificate:
    """Both bounds, the Q-norm check, the rate bound (if rates are known) and the unit-ball witness."""
    _check_trajectory(chain, trajectory)
    points = _grid(chain, grid)
    margins = trajectory_margins(trajectory)
    spectrum = spectral_scan(chain, points, restarts=restarts, rng=rng)
    spectra = _mass_spectra(_jacobians(chain, points), trajectory.params)
    lower = _lower(margins, spectrum, spectra, epsilon)
    upper = _upper(margins, spectrum, spectra)
    cert = BoundCertificate(
        lower=lower,
        upper=upper,
        q_norm_sup=q_norm_check(chain, points),
        rate=rate_bound(chain, trajectory, points) if trajectory.has_rates else None,
        witness=unit_ball_witness(chain, points),
        spectrum=spectrum,
        margins=margins,
        grid=points,
        sample_times=trajectory.times.copy(),
        constant_params=_constant(trajectory),
    )
    logger.info(
        "certificate: alpha1=%.6g alpha2=%.6g verdicts=%s over %d points x %d samples",
        cert.alpha1,
        cert.alpha2,
        cert.verdicts,
        len(points),
        trajectory.n_samples,
    )
    return cert


def corollary_report(cert: BoundCertificate) -> CorollaryReport:
    """Judge the two corollaries on the certificate's samples.

    For constant parameters, the forward direction (Jacobian bounds give mass
    bounds) is witnessed by the certificate itself; the reverse direction is
    witnessed by the unit-ball construction, whose mass-matrix extremes equal
    the Jacobian ones.
    """
    verdicts = cert.verdicts
    bounded = 0.0 < cert.alpha1 <= cert.alpha2 < math.inf
    jac_bounded = verdicts["normal"] and verdicts["upper_bounded_jac"]
    forward: bool | None = None
    reverse: bool | None = None
    if cert.constant_params:
        forward = (not jac_bounded) or bounded
        witness = cert.witness
        unit_bounded = witness.mass_inf > cert.spectrum.tolerance and verdicts["upper_bounded_jac"]
        reverse = (not unit_bounded) or (witness.matches and jac_bounded)
    return CorollaryReport(
        normal=verdicts["normal"],
        upper_bounded_jac=verdicts["upper_bounded_jac"],
        uniformly_consistent=verdicts["uniformly_consistent"],
        params_upper_bounded=verdicts["params_upper_bounded"],
        bounded=bounded,
        constant_params=cert.constant_params,
        beta1=cert.witness.beta1,
        beta2=cert.witness.beta2,
        jacobian_bounds_imply_mass_bounds=forward,
        mass_bounds_imply_jacobian_bounds=reverse,
    )


def inertia_rate_entry_bound(rate: InertialParams) -> EntryBound:
    """Compare the inertia-rate entries with ``4 * sigma_max(f(Phi_dot))``."""
    mu = sigma_max(pseudo_inertia(rate))
    return EntryBound(mu=mu, max_entry=float(np.max(np.abs(rate.inertia))))


__all__ = [
    "BoundCertificate",
    "CorollaryReport",
    "EntryBound",
    "LowerBound",
    "RateBound",
    "UnitBallWitness",
    "UpperBound",
    "certify",
    "corollary_report",
    "inertia_rate_entry_bound",
    "lower_bound",
    "q_norm_check",
    "rate_bound",
    "unit_ball_witness",
    "upper_bound",
]
