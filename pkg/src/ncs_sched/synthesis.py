"""State-feedback design so that a plant passes the stochastic-stability test.

Pipeline per plant, for each ``beta`` of a schedule:

1. fix ``P_s = beta I`` and solve the open-loop Stein equation for ``P_u``;
2. find ``Y`` with ``Z' Phat^-1 Z - P_s^-1 < 0`` where ``Z = A P_s^-1 + B Y``;
3. form ``K = Y P_s`` and accept it only if the closed/open-loop switching
   system is mean-square stable.

If every ``beta`` fails the gate, fallback gains are tried (zero gain for an
already-Schur ``A``, the least-squares gain ``-B^+ A``, then the discrete LQR
gain, then the LQR gain that accounts for dropped actuation), each behind
the same gate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import InfeasibleError, NcsError, PlantError, SynthesisError
from .model import ModeProbabilities, Plant, is_schur, mode_matrices, spectral_radius
from .stability import NEG_DEF_TOL, RADIUS_MARGIN, StabilityCertificate, check_stochastic_stability

log = logging.getLogger(__name__)

DEFAULT_BETAS = (1.0, 10.0, 100.0, 1000.0)
MAX_ASCENT_ITERS = 500

PAPER_PIPELINE = "paper_pipeline"
LEAST_SQUARES = "least_squares_fallback"
LQR = "lqr_fallback"
ZERO_GAIN = "zero_gain_fallback"
LOSSY_LQR = "loss_aware_lqr_fallback"


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    K: np.ndarray
    Y: np.ndarray | None
    P_s: np.ndarray
    P_u: np.ndarray
    method: str
    verified: bool
    radius: float
    beta: float | None = None
    certificate: StabilityCertificate | None = None


def _stein_solve(A, weight, Q) -> np.ndarray:
    """Solve ``X = weight A' X A + Q`` by vectorisation."""
    d = A.shape[0]
    op = np.eye(d * d) - weight * np.kron(A.T, A.T)
    X = np.linalg.solve(op, np.asarray(Q, dtype=float).reshape(-1, order="F")).reshape(d, d, order="F")
    return 0.5 * (X + X.T)


def solve_open_loop_inequality(A_u, probs: ModeProbabilities, beta: float = 1.0):
    """Return ``(P_s, P_u)`` with ``P_s = beta I`` satisfying the open-loop inequality.

    ``P_u`` solves ``P_u = pi_u A_u' P_u A_u + pi_s beta A_u' A_u + I`` so the
    residual ``A_u' Phat A_u - P_u`` is exactly ``-I``.
    """
    A_u = np.asarray(A_u, dtype=float)
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    growth = probs.pi_u * spectral_radius(A_u) ** 2
    if growth >= 1.0 - RADIUS_MARGIN:
        raise InfeasibleError(
            f"pi_u * rho(A_u)^2 = {growth:.6g} >= 1: open-loop inequality has no solution with "
            "P_s = beta*I; increase the scheduling probability p_j or reduce the loss probability q",
            growth)
    d = A_u.shape[0]
    P_s = beta * np.eye(d)
    P_u = _stein_solve(A_u, probs.pi_u, probs.pi_s * beta * A_u.T @ A_u + np.eye(d))
    return P_s, P_u


def gain_inequality_lhs(A, B, Y, P_s_inv, P_hat_inv) -> np.ndarray:
    Z = A @ P_s_inv + B @ Y
    S = Z.T @ P_hat_inv @ Z - P_s_inv
    return 0.5 * (S + S.T)


def _block_min_eig(A, B, Y, P_s_inv, P_hat):
    Z = A @ P_s_inv + B @ Y
    M = np.block([[P_s_inv, Z.T], [Z, P_hat]])
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return w[0], V[:, 0]


def solve_gain_inequality(A, B, P_s, P_u, probs: ModeProbabilities,
                          max_iter: int = MAX_ASCENT_ITERS) -> np.ndarray:
    """Find ``Y`` with ``(A P_s^-1 + B Y)' Phat^-1 (A P_s^-1 + B Y) - P_s^-1 < 0``.

    Starts from the least-squares point ``-B^+ A P_s^-1``. If that is not
    strictly feasible, ascends the smallest eigenvalue of the equivalent block
    matrix ``[[P_s^-1, Z'], [Z, Phat]]`` with a halving line search.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    P_s = 0.5 * (np.asarray(P_s, dtype=float) + np.asarray(P_s, dtype=float).T)
    P_u = 0.5 * (np.asarray(P_u, dtype=float) + np.asarray(P_u, dtype=float).T)
    P_hat = probs.pi_s * P_s + probs.pi_u * P_u
    P_s_inv = np.linalg.inv(P_s)
    P_hat_inv = np.linalg.inv(P_hat)

    Y = -np.linalg.pinv(B) @ A @ P_s_inv
    best = float(np.linalg.eigvalsh(gain_inequality_lhs(A, B, Y, P_s_inv, P_hat_inv))[-1])
    if best < -NEG_DEF_TOL:
        return Y

    lam, v = _block_min_eig(A, B, Y, P_s_inv, P_hat)
    d = A.shape[0]
    for _ in range(max_iter):
        grad = 2.0 * B.T @ np.outer(v[d:], v[:d])
        gnorm = np.linalg.norm(grad)
        if gnorm == 0.0:
            break
        direction = grad / gnorm
        step = 1.0
        improved = False
        for _ in range(60):
            cand = Y + step * direction
            lam_c, v_c = _block_min_eig(A, B, cand, P_s_inv, P_hat)
            if lam_c > lam:
                Y, lam, v = cand, lam_c, v_c
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        best = float(np.linalg.eigvalsh(gain_inequality_lhs(A, B, Y, P_s_inv, P_hat_inv))[-1])
        if best < -NEG_DEF_TOL:
            return Y
    raise InfeasibleError(
        f"no Y satisfies the gain inequality; best largest eigenvalue {best:.6g}", best)


def least_squares_gain(A, B) -> np.ndarray:
    return -np.linalg.pinv(B) @ A


def lqr_gain(A, B) -> np.ndarray:
    """Infinite-horizon discrete LQR gain with ``Q = I``, ``R = I`` (``u = K x``)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    Q = np.eye(A.shape[0])
    R = np.eye(B.shape[1])
    X = scipy.linalg.solve_discrete_are(A, B, Q, R)
    return -np.linalg.solve(R + B.T @ X @ B, B.T @ X @ A)


def loss_aware_lqr_gain(A, B, delivery_probability: float, max_iter: int = 100_000,
                        tol: float = 1e-12) -> np.ndarray:
    """LQR gain for actuation delivered i.i.d. with ``delivery_probability``.

    Iterates ``X = A'XA + Q - p A'XB (R + B'XB)^-1 B'XA`` from ``X = Q`` with
    ``Q = I``, ``R = I``. The iteration diverges when ``p`` is below the
    critical delivery rate of ``(A, B)``; that raises ``ValueError``.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    p = float(delivery_probability)
    Q = np.eye(A.shape[0])
    R = np.eye(B.shape[1])
    X = Q
    for _ in range(max_iter):
        G = np.linalg.solve(R + B.T @ X @ B, B.T @ X @ A)
        X_new = A.T @ X @ A + Q - p * A.T @ X @ B @ G
        X_new = 0.5 * (X_new + X_new.T)
        if not np.all(np.isfinite(X_new)) or np.max(np.abs(X_new)) > 1e14:
            raise ValueError("modified Riccati iteration diverged")
        done = np.max(np.abs(X_new - X)) <= tol * max(1.0, np.max(np.abs(X_new)))
        X = X_new
        if done:
            break
    else:
        raise ValueError("modified Riccati iteration did not converge")
    return -np.linalg.solve(R + B.T @ X @ B, B.T @ X @ A)


def _gate(plant: Plant, K, probs):
    return check_stochastic_stability(mode_matrices(plant.with_gain(K)), probs)


def synthesize(plant: Plant, probs: ModeProbabilities,
               beta_schedule: Sequence[float] = DEFAULT_BETAS,
               max_iter: int = MAX_ASCENT_ITERS) -> SynthesisResult:
    """Design a gain ``K`` for ``plant`` and verify it under ``probs``.

    Any gain already carried by ``plant`` is ignored. Raises
    :class:`SynthesisError` when no candidate passes the stability gate; the
    best unverified candidate is attached as ``exc.best``.
    """
    A, B = plant.A, plant.B
    best: SynthesisResult | None = None

    def keep_best(res):
        nonlocal best
        if best is None or res.radius < best.radius:
            best = res

    for beta in beta_schedule:
        try:
            P_s, P_u = solve_open_loop_inequality(A, probs, beta)
            Y = solve_gain_inequality(A, B, P_s, P_u, probs, max_iter=max_iter)
        except InfeasibleError as exc:
            log.debug("plant %d, beta=%g: %s", plant.index, beta, exc)
            continue
        except np.linalg.LinAlgError as exc:
            log.debug("plant %d, beta=%g: linear algebra failure %s", plant.index, beta, exc)
            continue
        K = Y @ P_s
        verdict = _gate(plant, K, probs)
        res = SynthesisResult(K, Y, P_s, P_u, PAPER_PIPELINE, verdict.stable, verdict.radius,
                              beta=float(beta), certificate=verdict.certificate)
        if verdict.stable:
            return res
        keep_best(res)

    candidates = []
    if is_schur(A):
        candidates.append((ZERO_GAIN, lambda: np.zeros((B.shape[1], A.shape[0]))))
    candidates.append((LEAST_SQUARES, lambda: least_squares_gain(A, B)))
    candidates.append((LQR, lambda: lqr_gain(A, B)))
    candidates.append((LOSSY_LQR, lambda: loss_aware_lqr_gain(A, B, probs.pi_s)))
    for method, make in candidates:
        try:
            K = make()
        except (np.linalg.LinAlgError, ValueError) as exc:
            log.debug("plant %d, %s: %s", plant.index, method, exc)
            continue
        verdict = _gate(plant, K, probs)
        cert = verdict.certificate
        d = A.shape[0]
        res = SynthesisResult(
            K, None,
            cert.P_s if cert is not None else np.full((d, d), np.nan),
            cert.P_u if cert is not None else np.full((d, d), np.nan),
            method, verdict.stable, verdict.radius, certificate=cert)
        if verdict.stable:
            return res
        keep_best(res)

    radius = best.radius if best is not None else float("nan")
    raise SynthesisError(
        f"plant {plant.index}: no candidate gain is stochastically stabilising "
        f"(best second-moment radius {radius:.6g})", radius, best)


def synthesize_model(model, beta_schedule: Sequence[float] = DEFAULT_BETAS, overwrite: bool = False):
    """Fill in missing gains of every plant; returns ``(new_model, {index: SynthesisResult})``."""
    plants = []
    results = {}
    for plant in model.plants:
        if plant.has_gain and not overwrite:
            plants.append(plant)
            continue
        try:
            res = synthesize(plant, model.mode_probabilities(plant.index), beta_schedule)
        except NcsError as exc:
            raise PlantError(plant.index, exc) from exc
        results[plant.index] = res
        plants.append(plant.with_gain(res.K))
    return model.replace_plants(plants), results
