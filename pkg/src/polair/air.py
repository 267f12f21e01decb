"""Information rates of the unitary MIMO-AWGN channel.

Closed forms for the perfect-CSI capacity and mutual information, the
mismatched-decoding achievable information rate (AIR) for a fixed channel
estimate, its specializations to unitary channels and unitary estimates,
and Monte Carlo estimators for discrete inputs and random channel
estimates.

All rates are in bits per (vector) symbol; logarithms are base 2 at the
interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .channel import ChannelParams, Constellation, make_pilots
from .estimators import EstimatorSpec, estimate_kabsch, estimate_ls
from .linalg import as_complex_matrix, dagger, fro_norm, haar_unitary, sample_cgauss

__all__ = [
    "AirEstimate",
    "capacity_perfect",
    "mi_gaussian_given_H",
    "air_theorem1",
    "air_corollary1",
    "air_corollary2_mc",
    "air_corollary4",
    "synthetic_estimates",
    "air_synthetic_mc",
    "mi_discrete_mc",
    "air_discrete_mc",
    "air_gaussian_paired_mc",
    "air_discrete_paired_mc",
]

LN2 = float(np.log(2.0))

_GAUSS_CHUNK = 8192
_DISCRETE_CHUNK = 2048


@dataclass(frozen=True)
class AirEstimate:
    """A rate value in bits/symbol with its Monte Carlo uncertainty."""

    value: float
    std_error: float = 0.0
    trials: int = 1
    kind: str = "closed_form"

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError("value must be finite")
        if self.std_error < 0:
            raise ValueError("std_error must be >= 0")
        if self.kind not in ("closed_form", "monte_carlo"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "monte_carlo" and self.trials < 100:
            raise ValueError("monte_carlo estimates require trials >= 100")

    def to_dict(self) -> dict:
        return {
            "value_bits": self.value,
            "std_error": self.std_error,
            "trials": self.trials,
            "kind": self.kind,
        }


def _mc_estimate(values: np.ndarray) -> AirEstimate:
    values = np.asarray(values, dtype=float)
    n = values.size
    std_error = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return AirEstimate(value=float(values.mean()), std_error=std_error, trials=n, kind="monte_carlo")


def _check_hermitian_psd(Q: np.ndarray, name: str) -> np.ndarray:
    Q = as_complex_matrix(Q, name)
    scale = max(1.0, fro_norm(Q))
    if fro_norm(Q - dagger(Q)) > 1e-10 * scale:
        raise ValueError(f"{name} is not Hermitian to tolerance")
    if np.min(np.linalg.eigvalsh(0.5 * (Q + dagger(Q)))) < -1e-10 * scale:
        raise ValueError(f"{name} is not positive semidefinite to tolerance")
    return Q


def _check_unitary(H: np.ndarray, name: str, tol: float = 1e-8) -> np.ndarray:
    H = as_complex_matrix(H, name)
    n = H.shape[0]
    if H.shape[0] != H.shape[1]:
        raise ValueError(f"{name} must be square, got {H.shape}")
    if fro_norm(H @ dagger(H) - np.eye(n)) > tol:
        raise ValueError(f"{name} is not unitary within {tol}")
    return H


def capacity_perfect(n: int, eta: float) -> AirEstimate:
    """Perfect-CSI capacity n * log2(1 + eta) of the unitary channel."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if eta <= 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    return AirEstimate(value=n * np.log2(1.0 + eta))


def mi_gaussian_given_H(H, Q, sigma2: float = 1.0) -> AirEstimate:
    """Mutual information log2|I + H^dagger H Q| for Gaussian inputs.

    ``Q`` is the input covariance normalized by the noise variance; sigma2
    is kept in the signature for symmetry with the mismatched forms but
    does not enter the expression.
    """
    H = as_complex_matrix(H, "H")
    Q = _check_hermitian_psd(Q, "Q")
    n = H.shape[1]
    _, logdet = np.linalg.slogdet(np.eye(n) + dagger(H) @ H @ Q)
    return AirEstimate(value=float(logdet) / LN2)


def air_theorem1(H, H_hat, Q, sigma2: float) -> AirEstimate:
    """Mismatched-decoding AIR for a fixed channel H and fixed estimate H_hat.

    With E = H - H_hat, input covariance sigma2 * Q and output covariances
    Lx = H (sigma2 Q) H^dagger + sigma2 I and Lx_hat likewise for H_hat:

        I_q = log2|I + H_hat Q H_hat^dagger|
              - tr(Q E^dagger E) / ln 2
              - tr(I - Lx Lx_hat^-1) / ln 2
    """
    H = as_complex_matrix(H, "H")
    H_hat = as_complex_matrix(H_hat, "H_hat")
    if H.shape != H_hat.shape:
        raise ValueError(f"shape mismatch: H {H.shape}, H_hat {H_hat.shape}")
    Q = _check_hermitian_psd(Q, "Q")
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    n = H.shape[0]
    eye = np.eye(n)
    lam_s = sigma2 * Q
    lam_x = H @ lam_s @ dagger(H) + sigma2 * eye
    lam_x_hat = H_hat @ lam_s @ dagger(H_hat) + sigma2 * eye
    E = H - H_hat
    _, logdet = np.linalg.slogdet(eye + H_hat @ Q @ dagger(H_hat))
    term1 = float(logdet) / LN2
    term2 = float(np.trace(Q @ dagger(E) @ E).real) / LN2
    term3 = (n - float(np.trace(lam_x @ np.linalg.inv(lam_x_hat)).real)) / LN2
    return AirEstimate(value=term1 - term2 - term3)


def _corollary1_values(H_u: np.ndarray, H_hat: np.ndarray, eta: float) -> np.ndarray:
    """Vectorized three-term unitary-channel AIR over stacked estimates.

    ``H_u`` and ``H_hat`` broadcast against each other over leading axes.
    """
    n = H_hat.shape[-1]
    eye = np.eye(n)
    A = eye + eta * (H_hat @ dagger(H_hat))
    _, logdet = np.linalg.slogdet(A)
    term1 = logdet / LN2
    E = H_u - H_hat
    term2 = eta * np.sum(np.abs(E) ** 2, axis=(-2, -1)) / LN2
    tr_inv = np.trace(np.linalg.inv(A), axis1=-2, axis2=-1).real
    term3 = (n - (1.0 + eta) * tr_inv) / LN2
    return term1 - term2 - term3


def air_corollary1(H_u, H_hat, eta: float) -> AirEstimate:
    """AIR of a unitary channel with uniform power loading, fixed estimate."""
    H_u = _check_unitary(H_u, "H_u")
    H_hat = as_complex_matrix(H_hat, "H_hat")
    if H_u.shape != H_hat.shape:
        raise ValueError(f"shape mismatch: H_u {H_u.shape}, H_hat {H_hat.shape}")
    if eta <= 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    return AirEstimate(value=float(_corollary1_values(H_u, H_hat, eta)))


def air_corollary4(n: int, eta: float, R_E) -> AirEstimate:
    """Average AIR with a unitary estimate: n log2(1+eta) - eta tr(R_E)/ln 2."""
    if eta <= 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    R_E = _check_hermitian_psd(R_E, "R_E")
    if R_E.shape != (n, n):
        raise ValueError(f"R_E must be {n}x{n}, got {R_E.shape}")
    value = n * np.log2(1.0 + eta) - eta * float(np.trace(R_E).real) / LN2
    return AirEstimate(value=value)


def _pilot_estimates(kind: str, H: np.ndarray, pilots, sigma2: float, rng) -> np.ndarray:
    """Estimate stacked channels from one fresh pilot block each."""
    X = H @ pilots.D + sample_cgauss(H.shape[:-2] + (H.shape[-2], pilots.L), sigma2, rng)
    if kind == "ls":
        return estimate_ls(X, pilots)
    if kind == "kabsch":
        return estimate_kabsch(X, pilots)
    raise ValueError(f"unknown estimator kind {kind!r}")


def air_corollary2_mc(
    H_u,
    estimator: EstimatorSpec | str,
    params: ChannelParams,
    L: int,
    trials: int,
    rng: np.random.Generator,
) -> AirEstimate:
    """Average AIR over random pilot-block estimates of a fixed unitary channel.

    ``estimator`` is an :class:`EstimatorSpec` or the string ``"perfect"``
    (the H_hat = H_u stub, useful as a sanity reference).
    """
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")
    H_u = _check_unitary(H_u, "H_u")
    kind = estimator if isinstance(estimator, str) else estimator.kind
    if kind == "perfect":
        return AirEstimate(
            value=capacity_perfect(params.n, params.eta).value,
            std_error=0.0,
            trials=trials,
            kind="monte_carlo",
        )
    pilots = make_pilots(params.n, L, params.power)
    values = np.empty(trials)
    done = 0
    while done < trials:
        b = min(_GAUSS_CHUNK, trials - done)
        H = np.broadcast_to(H_u, (b,) + H_u.shape)
        H_hat = _pilot_estimates(kind, H, pilots, params.sigma2, rng)
        values[done : done + b] = _corollary1_values(H_u, H_hat, params.eta)
        done += b
    return _mc_estimate(values)


def synthetic_estimates(
    H_u: np.ndarray,
    error_per_dof: float,
    model: str,
    size: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw channel estimates from the two synthetic error models.

    ``general``: H_hat = H_u - E with E i.i.d. circular Gaussian scaled so
    that tr E[E^dagger E] = n * (2 n^2) * error_per_dof.
    ``unitary``: same construction with the n^2-DOF scaling, followed by
    projection onto the nearest unitary matrix (SVD -> U V^dagger).
    """
    n = H_u.shape[-1]
    if model == "general":
        var = 2.0 * n * error_per_dof
    elif model == "unitary":
        var = n * error_per_dof
    else:
        raise ValueError(f"unknown synthetic error model {model!r}")
    if error_per_dof < 0:
        raise ValueError("error_per_dof must be >= 0")
    if error_per_dof == 0.0:
        return np.broadcast_to(H_u, (size, n, n)).copy()
    E = sample_cgauss((size, n, n), var, rng)
    H_hat = H_u - E
    if model == "unitary":
        U, _, Vh = np.linalg.svd(H_hat)
        H_hat = U @ Vh
    return H_hat


def air_synthetic_mc(
    H_u,
    error_per_dof: float,
    model: str,
    eta: float,
    trials: int,
    rng: np.random.Generator,
) -> AirEstimate:
    """Average AIR under a synthetic spherically symmetric estimation error."""
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")
    H_u = _check_unitary(H_u, "H_u")
    values = np.empty(trials)
    done = 0
    while done < trials:
        b = min(_GAUSS_CHUNK, trials - done)
        H_hat = synthetic_estimates(H_u, error_per_dof, model, b, rng)
        values[done : done + b] = _corollary1_values(H_u, H_hat, eta)
        done += b
    return _mc_estimate(values)


def _discrete_values(
    x: np.ndarray, H_dec: np.ndarray, idx: np.ndarray, points: np.ndarray, sigma2: float
) -> np.ndarray:
    """Per-sample mismatched information density for a discrete input.

    ``H_dec`` is the decoding-metric channel: (n, n) shared or (B, n, n)
    per sample. ``idx`` indexes the transmitted point for each sample.
    """
    M = points.shape[0]
    if H_dec.ndim == 2:
        ref = points @ H_dec.T  # (M, n)
        ref_energy = np.sum(np.abs(ref) ** 2, axis=-1)  # (M,)
        cross = x.conj() @ ref.T  # (B, M)
    else:
        ref = np.einsum("bij,mj->bmi", H_dec, points)  # (B, M, n)
        ref_energy = np.sum(np.abs(ref) ** 2, axis=-1)  # (B, M)
        cross = np.einsum("bi,bmi->bm", x.conj(), ref)
    x_energy = np.sum(np.abs(x) ** 2, axis=-1)  # (B,)
    dist = x_energy[:, None] + ref_energy - 2.0 * cross.real  # (B, M)
    metric = -dist / sigma2
    lse = logsumexp(metric, axis=1)
    num = metric[np.arange(metric.shape[0]), idx]
    return np.log2(M) + (num - lse) / LN2


def mi_discrete_mc(
    H,
    constellation: Constellation,
    sigma2: float,
    trials: int,
    rng: np.random.Generator,
) -> AirEstimate:
    """Monte Carlo mutual information for a uniform discrete input, given H."""
    if not constellation.is_discrete:
        raise ValueError("constellation must be discrete")
    if trials < 1000:
        raise ValueError(f"trials must be >= 1000, got {trials}")
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    H = as_complex_matrix(H, "H")
    points = constellation.points
    sent = points @ H.T  # (M, n) noiseless receptions
    values = np.empty(trials)
    done = 0
    while done < trials:
        b = min(_DISCRETE_CHUNK, trials - done)
        idx = rng.integers(0, points.shape[0], size=b)
        x = sent[idx] + sample_cgauss((b, H.shape[0]), sigma2, rng)
        values[done : done + b] = _discrete_values(x, H, idx, points, sigma2)
        done += b
    return _mc_estimate(values)


def air_discrete_paired_mc(
    constellation: Constellation,
    params: ChannelParams,
    L: int,
    trials: int,
    rng: np.random.Generator,
    kinds: tuple[str, ...] = ("ls", "kabsch"),
) -> dict[str, AirEstimate]:
    """Average discrete-input AIR for several estimators on shared draws.

    Each trial draws a Haar channel, one pilot block, one data symbol and
    its noise; every requested estimator (``"ls"``, ``"kabsch"`` or the
    perfect-CSI stub ``"perfect"``) decodes the same realization, which
    makes the returned per-kind estimates directly comparable. Paired
    differences are reported under keys ``"a-b"``.
    """
    if not constellation.is_discrete:
        raise ValueError("constellation must be discrete")
    if trials < 1000:
        raise ValueError(f"trials must be >= 1000, got {trials}")
    n = params.n
    pilots = make_pilots(n, L, params.power)
    points = constellation.points
    values = {k: np.empty(trials) for k in kinds}
    done = 0
    while done < trials:
        b = min(_DISCRETE_CHUNK, trials - done)
        H = haar_unitary(n, rng, size=b)
        X = H @ pilots.D + sample_cgauss((b, n, L), params.sigma2, rng)
        idx = rng.integers(0, points.shape[0], size=b)
        s = points[idx]
        x = np.einsum("bij,bj->bi", H, s) + sample_cgauss((b, n), params.sigma2, rng)
        for kind in kinds:
            if kind == "perfect":
                H_dec = H
            elif kind == "ls":
                H_dec = estimate_ls(X, pilots)
            elif kind == "kabsch":
                H_dec = estimate_kabsch(X, pilots)
            else:
                raise ValueError(f"unknown estimator kind {kind!r}")
            values[kind][done : done + b] = _discrete_values(x, H_dec, idx, points, params.sigma2)
        done += b
    out = {k: _mc_estimate(v) for k, v in values.items()}
    for i, a in enumerate(kinds):
        for bname in kinds[i + 1 :]:
            out[f"{a}-{bname}"] = _mc_estimate(values[a] - values[bname])
    return out


def air_discrete_mc(
    estimator: EstimatorSpec | str,
    constellation: Constellation,
    params: ChannelParams,
    L: int,
    trials: int,
    rng: np.random.Generator,
) -> AirEstimate:
    """Average discrete-input AIR for one estimator (fresh draws per trial)."""
    kind = estimator if isinstance(estimator, str) else estimator.kind
    return air_discrete_paired_mc(constellation, params, L, trials, rng, kinds=(kind,))[kind]


def air_gaussian_paired_mc(
    params: ChannelParams,
    L: int,
    trials: int,
    rng: np.random.Generator,
    kinds: tuple[str, ...] = ("ls", "kabsch"),
    H_u=None,
) -> dict[str, AirEstimate]:
    """Average Gaussian-input AIR for several estimators on shared draws.

    Per trial, one channel (a fresh Haar draw, or ``H_u`` if given) and one
    pilot-noise realization feed all requested estimators; the AIR of each
    resulting estimate is the closed three-term unitary-channel expression.
    Paired differences are reported under keys ``"a-b"``.
    """
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")
    n = params.n
    eta = params.eta
    pilots = make_pilots(n, L, params.power)
    if H_u is not None:
        H_u = _check_unitary(H_u, "H_u")
    values = {k: np.empty(trials) for k in kinds}
    cap = capacity_perfect(n, eta).value
    done = 0
    while done < trials:
        b = min(_GAUSS_CHUNK, trials - done)
        H = np.broadcast_to(H_u, (b, n, n)) if H_u is not None else haar_unitary(n, rng, size=b)
        X = H @ pilots.D + sample_cgauss((b, n, L), params.sigma2, rng)
        for kind in kinds:
            if kind == "perfect":
                values[kind][done : done + b] = cap
            elif kind == "ls":
                values[kind][done : done + b] = _corollary1_values(H, estimate_ls(X, pilots), eta)
            elif kind == "kabsch":
                values[kind][done : done + b] = _corollary1_values(
                    H, estimate_kabsch(X, pilots), eta
                )
            else:
                raise ValueError(f"unknown estimator kind {kind!r}")
        done += b
    out = {k: _mc_estimate(v) for k, v in values.items()}
    for i, a in enumerate(kinds):
        for bname in kinds[i + 1 :]:
            out[f"{a}-{bname}"] = _mc_estimate(values[a] - values[bname])
    return out
