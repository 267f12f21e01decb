"""Data-aided channel estimation from pilot blocks.

Two estimators are provided:

* least squares (LS): ``H = X D^dagger (D D^dagger)^-1``, the unconstrained
  minimizer of ||X - H D||_F^2, with 2 n^2 real degrees of freedom;
* Kabsch: ``H = U V^dagger`` from the SVD of ``X D^dagger``, the minimizer
  of the same cost over the unitary group, with n^2 degrees of freedom.

Both are exposed as plain functions (vectorized over stacked pilot blocks)
and as small fit/predict estimator classes for pipeline-style use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, PilotMatrix, make_pilots
from .linalg import (
    SingularMatrixError,
    as_complex_matrix,
    dagger,
    fro_norm,
    haar_unitary,
    sample_cgauss,
)

__all__ = [
    "ESTIMATOR_KINDS",
    "EstimatorSpec",
    "ErrorStats",
    "estimate_ls",
    "estimate_kabsch",
    "error_matrix",
    "empirical_error_covariance",
    "error_stats_to_json",
    "LeastSquaresEstimator",
    "KabschEstimator",
    "make_estimator",
]

ESTIMATOR_KINDS = ("ls", "kabsch")


@dataclass(frozen=True)
class EstimatorSpec:
    """Estimator family tag with its real degrees of freedom."""

    kind: str

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")

    def dof(self, n: int) -> int:
        """Independent real values the estimator must find."""
        return 2 * n * n if self.kind == "ls" else n * n


def _pilot_arrays(pilots: PilotMatrix) -> tuple[np.ndarray, np.ndarray]:
    D = pilots.D
    gram = D @ dagger(D)
    n = D.shape[0]
    sv = np.linalg.svd(gram, compute_uv=False)
    if sv[-1] < 1e-13 * max(fro_norm(gram), np.finfo(float).tiny):
        raise SingularMatrixError("pilot Gram matrix D D^dagger is singular")
    return D, np.linalg.inv(gram)


def estimate_ls(X, pilots: PilotMatrix) -> np.ndarray:
    """Least-squares channel estimate from received pilots.

    ``X`` may be a single n x L block or a stack (..., n, L); the estimate
    has matching leading dimensions.
    """
    X = np.asarray(X, dtype=complex)
    D, gram_inv = _pilot_arrays(pilots)
    if X.shape[-1] != D.shape[1] or X.shape[-2] != D.shape[0]:
        raise ValueError(f"X trailing dims must be {D.shape}, got {X.shape}")
    return X @ dagger(D) @ gram_inv


def estimate_kabsch(X, pilots: PilotMatrix) -> np.ndarray:
    """Unitary (orthogonal Procrustes) channel estimate from received pilots.

    Returns U V^dagger from the SVD of X D^dagger. The output is unitary for
    every input; on a rank-deficient X D^dagger the decomposition's unitary
    factors still define a valid minimizer on the degenerate subspace.
    """
    X = np.asarray(X, dtype=complex)
    D = pilots.D
    if X.shape[-1] != D.shape[1] or X.shape[-2] != D.shape[0]:
        raise ValueError(f"X trailing dims must be {D.shape}, got {X.shape}")
    U, _, Vh = np.linalg.svd(X @ dagger(D))
    return U @ Vh


def error_matrix(H, H_hat) -> np.ndarray:
    """Estimation error E = H - H_hat."""
    H = np.asarray(H, dtype=complex)
    H_hat = np.asarray(H_hat, dtype=complex)
    if H.shape != H_hat.shape:
        raise ValueError(f"shape mismatch: {H.shape} vs {H_hat.shape}")
    return H - H_hat


@dataclass(frozen=True)
class ErrorStats:
    """Empirical error covariance R_E = E[E^dagger E] and derived scalars."""

    kind: str
    R_E: np.ndarray = field(repr=False)
    trials: int
    dof: int

    def __post_init__(self):
        R = as_complex_matrix(self.R_E, "R_E")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if fro_norm(R - dagger(R)) > 1e-10 * max(1.0, fro_norm(R)):
            raise ValueError("R_E is not Hermitian to tolerance")
        if np.min(np.linalg.eigvalsh(0.5 * (R + dagger(R)))) < -1e-10:
            raise ValueError("R_E is not positive semidefinite to tolerance")

    @property
    def n(self) -> int:
        return self.R_E.shape[0]

    @property
    def trace_re(self) -> float:
        return float(np.trace(self.R_E).real)

    @property
    def error_per_dof(self) -> float:
        """Per-DOF error trace(R_E) / (n * dof)."""
        return self.trace_re / (self.n * self.dof)


_TRIAL_CHUNK = 4096


def empirical_error_covariance(
    spec: EstimatorSpec,
    params: ChannelParams,
    L: int,
    trials: int,
    rng: np.random.Generator,
) -> ErrorStats:
    """Average E^dagger E over independent (channel, noise) draws.

    Each trial draws a fresh Haar channel and a fresh pilot-noise
    realization, estimates the channel and accumulates the error Gram
    matrix in deterministic trial order.
    """
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")
    n = params.n
    pilots = make_pilots(n, L, params.power)
    acc = np.zeros((n, n), dtype=complex)
    done = 0
    while done < trials:
        b = min(_TRIAL_CHUNK, trials - done)
        H = haar_unitary(n, rng, size=b)
        X = H @ pilots.D + sample_cgauss((b, n, L), params.sigma2, rng)
        H_hat = estimate_ls(X, pilots) if spec.kind == "ls" else estimate_kabsch(X, pilots)
        E = H - H_hat
        acc += np.einsum("bij,bik->jk", np.conj(E), E)
        done += b
    R = acc / trials
    R = 0.5 * (R + dagger(R))  # symmetrize away accumulation round-off
    return ErrorStats(kind=spec.kind, R_E=R, trials=trials, dof=spec.dof(n))


def error_stats_to_json(stats: ErrorStats, params: ChannelParams, L: int) -> str:
    """Serialize an ErrorStats record to the JSON wire format."""
    record = {
        "estimator": stats.kind,
        "n": stats.n,
        "L": L,
        "eta_db": 10.0 * np.log10(params.eta),
        "trials": stats.trials,
        "trace_RE": stats.trace_re,
        "E2": stats.error_per_dof,
    }
    return json.dumps(record)


class _BaseChannelEstimator:
    """Minimal fit/predict estimator API over the functional core."""

    kind = ""

    def get_params(self, deep: bool = True) -> dict:
        return {}

    def set_params(self, **params) -> "_BaseChannelEstimator":
        for key in params:
            raise ValueError(f"unknown parameter {key!r} for {type(self).__name__}")
        return self

    def fit(self, X, pilots: PilotMatrix) -> "_BaseChannelEstimator":
        """Estimate the channel from a received pilot block X (n x L)."""
        X = as_complex_matrix(X, "X")
        self.channel_ = self._estimate(X, pilots)
        return self

    def predict(self, S) -> np.ndarray:
        """Noiseless channel response H_hat @ S of the fitted estimate."""
        if not hasattr(self, "channel_"):
            raise RuntimeError("estimator is not fitted; call fit(X, pilots) first")
        S = np.asarray(S, dtype=complex)
        return self.channel_ @ S

    def _estimate(self, X, pilots):
        raise NotImplementedError


class LeastSquaresEstimator(_BaseChannelEstimator):
    """Unconstrained least-squares channel estimator."""

    kind = "ls"

    def _estimate(self, X, pilots):
        return estimate_ls(X, pilots)


class KabschEstimator(_BaseChannelEstimator):
    """Unitary-constrained (Procrustes/Kabsch) channel estimator."""

    kind = "kabsch"

    def _estimate(self, X, pilots):
        return estimate_kabsch(X, pilots)


def make_estimator(kind: str) -> _BaseChannelEstimator:
    if kind == "ls":
        return LeastSquaresEstimator()
    if kind == "kabsch":
        return KabschEstimator()
    raise ValueError(f"unknown estimator kind {kind!r}")
