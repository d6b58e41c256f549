"""Relative entropy, relative variance and related functionals of a state pair.

D and V are computed on the operator side (matrix logarithms); the third
absolute moment T3 only exists on the classical side and is taken from the
Nussbaum-Szkola law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SupportViolation
from .ns_classical import llr_distribution
from .states import StatePair

ZERO_EIG = 1e-14
COMMUTE_ATOL = 1e-10


def _log_terms(p: StatePair):
    """Operator pieces ``rho log rho``, ``rho log^2 rho`` and ``log sigma``."""
    s_rho = p.rho.spectrum
    lam = s_rho.eigenvalues.copy()
    lam[lam < ZERO_EIG] = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        loglam = np.where(lam > 0, np.log(np.where(lam > 0, lam, 1.0)), 0.0)
    u = s_rho.eigenvectors
    rho_log_rho = (u * (lam * loglam)) @ u.conj().T
    rho_log2_rho = (u * (lam * loglam ** 2)) @ u.conj().T
    s_sig = p.sigma.spectrum
    mu = np.maximum(s_sig.eigenvalues, p.sigma_min_eig)
    w = s_sig.eigenvectors
    log_sigma = (w * np.log(mu)) @ w.conj().T
    return rho_log_rho, rho_log2_rho, log_sigma


def _support_ok(p: StatePair, tol: float = 1e-10) -> bool:
    s = p.sigma.spectrum
    kernel = s.eigenvectors[:, s.eigenvalues <= p.sigma_min_eig]
    if kernel.shape[1] == 0:
        return True
    leak = np.real(np.trace(kernel.conj().T @ p.rho.matrix @ kernel))
    return leak <= tol


def quantum_relative_entropy(p: StatePair) -> float:
    """``Tr rho (log rho - log sigma)`` in nats; +inf when supp(rho) leaves supp(sigma)."""
    if not p.full_rank and not _support_ok(p):
        return math.inf
    rlr, _, log_sigma = _log_terms(p)
    rho = p.rho.matrix
    d = np.trace(rlr) - np.sum(rho * log_sigma.T)
    return float(np.real(d))


def _require_support(p: StatePair):
    if not p.full_rank and not _support_ok(p):
        raise SupportViolation("supp(rho) is not contained in supp(sigma)")


def quantum_relative_variance(p: StatePair) -> float:
    """``Tr rho (log rho - log sigma)^2 - D^2``."""
    _require_support(p)
    rlr, rl2r, log_sigma = _log_terms(p)
    rho = p.rho.matrix
    d = np.real(np.trace(rlr) - np.sum(rho * log_sigma.T))
    # Tr rho log^2 rho - 2 Re Tr (rho log rho)(log sigma) + Tr rho log^2 sigma
    second = (np.trace(rl2r)
              - 2.0 * np.real(np.sum(rlr * log_sigma.T))
              + np.sum(rho * (log_sigma @ log_sigma).T))
    v = float(np.real(second) - d * d)
    return max(v, 0.0)


def third_abs_moment(p: StatePair) -> float:
    """``E |log(lambda(X)/mu(Y)) - D|^3`` under the classical embedding."""
    _require_support(p)
    return llr_distribution(p).abs_central_moment(3)


@dataclass(frozen=True)
class Degeneracy:
    degenerate: bool
    k: float | None = None


def classify_degenerate(p: StatePair, atol: float = COMMUTE_ATOL) -> Degeneracy:
    """Detect the zero-variance case: commuting states with rho = k sigma on supp(rho)."""
    if p.commutator_norm() > atol:
        return Degeneracy(False)
    s = p.rho.spectrum
    supp = s.eigenvectors[:, s.eigenvalues > ZERO_EIG]
    proj = supp @ supp.conj().T
    sig_on_supp = proj @ p.sigma.matrix @ proj
    k = 1.0 / float(np.real(np.trace(sig_on_supp)))
    if np.linalg.norm(p.rho.matrix - k * sig_on_supp) > atol * max(1.0, k):
        return Degeneracy(False)
    return Degeneracy(True, k)


@dataclass(frozen=True)
class DivergenceReport:
    D: float
    V: float
    T3: float
    degenerate: bool
    k: float | None = None


def divergence_report(p: StatePair) -> DivergenceReport:
    deg = classify_degenerate(p)
    return DivergenceReport(
        D=quantum_relative_entropy(p),
        V=quantum_relative_variance(p),
        T3=third_abs_moment(p),
        degenerate=deg.degenerate,
        k=deg.k,
    )
