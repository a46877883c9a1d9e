"""Mean-square stability of a plant under i.i.d. closed/open-loop switching.

A plant switching between ``A_s`` (probability ``pi_s``) and ``A_u``
(probability ``pi_u``) independently at every step has second moment
``X(t+1) = pi_s A_s X A_s' + pi_u A_u X A_u'``. It is stochastically stable
iff the lifted operator ``pi_s A_s(x)A_s + pi_u A_u(x)A_u`` has spectral
radius below one, which is in turn equivalent to the existence of positive
definite ``P_s, P_u`` with

    A_k' Phat A_k - P_k < 0,   Phat = pi_s P_s + pi_u P_u,   k in {s, u}.

The radius decides feasibility; :func:`build_certificate` produces explicit
``P_s, P_u`` by solving a coupled Lyapunov equation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, NotPositiveDefiniteError, NumericalError, PlantError, NcsError
from .model import ModePair, ModeProbabilities, NcsModel, mode_matrices

RADIUS_MARGIN = 1e-9
NEG_DEF_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SecondMomentLift:
    lifted: np.ndarray
    radius: float


@dataclass(frozen=True, eq=False)
class StabilityCertificate:
    P_s: np.ndarray
    P_u: np.ndarray
    P_hat: np.ndarray
    residual_s: np.ndarray
    residual_u: np.ndarray
    second_moment_radius: float


@dataclass(frozen=True, eq=False)
class CertificateCheck:
    residual_s: np.ndarray
    residual_u: np.ndarray
    max_eig_s: float
    max_eig_u: float
    valid: bool


@dataclass(frozen=True, eq=False)
class StabilityVerdict:
    stable: bool
    radius: float
    marginal: bool
    certificate: StabilityCertificate | None


def _sym(P) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    return 0.5 * (P + P.T)


def _max_eig(S) -> float:
    try:
        return float(np.linalg.eigvalsh(_sym(S))[-1])
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigenvalue routine failed: {exc}", matrix=np.array(S)) from exc


def _radius(M) -> float:
    try:
        return float(np.max(np.abs(np.linalg.eigvals(M))))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue routine did not converge: {exc}", matrix=np.array(M)) from exc


def _check_dims(modes: ModePair):
    if modes.A_s.shape != modes.A_u.shape:
        raise NcsError(f"mode dimension mismatch: {modes.A_s.shape} vs {modes.A_u.shape}")


def second_moment_lift(modes: ModePair, probs: ModeProbabilities) -> SecondMomentLift:
    _check_dims(modes)
    L = probs.pi_s * np.kron(modes.A_s, modes.A_s) + probs.pi_u * np.kron(modes.A_u, modes.A_u)
    return SecondMomentLift(L, _radius(L))


def coupled_average(P_s, P_u, probs: ModeProbabilities) -> np.ndarray:
    return probs.pi_s * P_s + probs.pi_u * P_u


def build_certificate(modes: ModePair, probs: ModeProbabilities) -> StabilityCertificate:
    """Construct ``(P_s, P_u, Phat)`` with both residuals equal to ``-I``.

    Solves ``Phat = pi_s A_s' Phat A_s + pi_u A_u' Phat A_u + I`` through its
    vectorised form, then sets ``P_k = A_k' Phat A_k + I``.

    Raises
    ------
    InfeasibleError
        If the second-moment radius is not below one.
    """
    _check_dims(modes)
    lift = second_moment_lift(modes, probs)
    if lift.radius >= 1.0:
        raise InfeasibleError(
            f"second-moment radius {lift.radius:.6g} >= 1; no certificate exists", lift.radius)
    d = modes.dim
    As, Au = modes.A_s, modes.A_u
    # vec(A' X A) = (A' kron A') vec(X) with column-major vec
    op = np.eye(d * d) - probs.pi_s * np.kron(As.T, As.T) - probs.pi_u * np.kron(Au.T, Au.T)
    try:
        vec = np.linalg.solve(op, np.eye(d).reshape(-1, order="F"))
    except np.linalg.LinAlgError as exc:
        raise InfeasibleError(f"coupled Lyapunov system is singular: {exc}", lift.radius) from exc
    P_hat_solved = _sym(vec.reshape(d, d, order="F"))
    eye = np.eye(d)
    P_s = _sym(As.T @ P_hat_solved @ As + eye)
    P_u = _sym(Au.T @ P_hat_solved @ Au + eye)
    P_hat = coupled_average(P_s, P_u, probs)
    return StabilityCertificate(
        P_s=P_s,
        P_u=P_u,
        P_hat=P_hat,
        residual_s=As.T @ P_hat @ As - P_s,
        residual_u=Au.T @ P_hat @ Au - P_u,
        second_moment_radius=lift.radius,
    )


def verify_certificate(modes: ModePair, probs: ModeProbabilities, P_s, P_u) -> CertificateCheck:
    """Evaluate ``A_k' Phat A_k - P_k`` for both modes and test negative definiteness."""
    _check_dims(modes)
    P_s = _sym(P_s)
    P_u = _sym(P_u)
    for name, P in (("P_s", P_s), ("P_u", P_u)):
        if P.shape != modes.A_s.shape:
            raise NcsError(f"{name} has shape {P.shape}, expected {modes.A_s.shape}")
        lo = float(np.linalg.eigvalsh(P)[0])
        if lo <= 0.0:
            raise NotPositiveDefiniteError(name, lo)
    P_hat = coupled_average(P_s, P_u, probs)
    As, Au = modes.A_s, modes.A_u
    res_s = _sym(As.T @ P_hat @ As - P_s)
    res_u = _sym(Au.T @ P_hat @ Au - P_u)
    es, eu = _max_eig(res_s), _max_eig(res_u)
    return CertificateCheck(res_s, res_u, es, eu, es < -NEG_DEF_TOL and eu < -NEG_DEF_TOL)


def check_stochastic_stability(modes: ModePair, probs: ModeProbabilities) -> StabilityVerdict:
    """Decide mean-square stability; attach a verified certificate when stable."""
    lift = second_moment_lift(modes, probs)
    r = lift.radius
    marginal = abs(r - 1.0) <= RADIUS_MARGIN
    if r >= 1.0 - RADIUS_MARGIN:
        return StabilityVerdict(False, r, marginal, None)
    cert = build_certificate(modes, probs)
    check = verify_certificate(modes, probs, cert.P_s, cert.P_u)
    if not check.valid:
        raise NumericalError(
            f"constructed certificate failed verification (radius {r:.6g}, "
            f"max eigenvalues {check.max_eig_s:.3g}, {check.max_eig_u:.3g})", matrix=lift.lifted)
    return StabilityVerdict(True, r, False, cert)


@dataclass(frozen=True, eq=False)
class PlantVerdict:
    plant: int
    probs: ModeProbabilities
    verdict: StabilityVerdict

    @property
    def stable(self) -> bool:
        return self.verdict.stable

    @property
    def radius(self) -> float:
        return self.verdict.radius

    @property
    def certificate(self):
        return self.verdict.certificate


@dataclass(frozen=True)
class NcsAnalysis:
    plants: tuple[PlantVerdict, ...]

    @property
    def stable(self) -> bool:
        return all(p.stable for p in self.plants)

    def __getitem__(self, plant_index: int) -> PlantVerdict:
        return self.plants[plant_index - 1]


def analyze_ncs(model: NcsModel, executor=None) -> NcsAnalysis:
    """Run :func:`check_stochastic_stability` for every plant of ``model``.

    ``executor`` may be a ``concurrent.futures`` executor; results are always
    collected in plant order.
    """

    def one(plant):
        try:
            probs = model.mode_probabilities(plant.index)
            return PlantVerdict(plant.index, probs, check_stochastic_stability(mode_matrices(plant), probs))
        except NcsError as exc:
            raise PlantError(plant.index, exc) from exc

    if executor is None:
        results = [one(p) for p in model.plants]
    else:
        results = list(executor.map(one, model.plants))
    return NcsAnalysis(tuple(results))
