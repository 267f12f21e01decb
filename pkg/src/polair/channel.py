"""Block-constant unitary MIMO-AWGN channel model.

The channel is an n x n Haar-random unitary matrix, constant within a
transmission block and independent across blocks. Each block starts with L
pilot symbols known to both ends; the remaining symbols carry data drawn
from a constellation (or a circular Gaussian codebook).

Power convention: the noise variance per complex dimension is sigma2, the
total symbol power is P, and the per-channel SNR is eta = P / (n * sigma2).
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field

import numpy as np

from .linalg import as_complex_matrix, dagger, fro_norm, haar_unitary, sample_cgauss

__all__ = [
    "ChannelParams",
    "Constellation",
    "PilotMatrix",
    "TransmissionBlock",
    "make_constellation",
    "make_pilots",
    "transmit",
    "sample_channel",
    "constellation_to_csv",
]

CONSTELLATION_KINDS = ("gaussian", "dp_qpsk", "dp_16qam")


@dataclass(frozen=True)
class ChannelParams:
    """Channel dimension and power bookkeeping.

    eta = power / (n * sigma2) is the per-channel SNR (linear).
    """

    n: int
    power: float
    sigma2: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.power <= 0:
            raise ValueError(f"power must be > 0, got {self.power}")
        if self.sigma2 <= 0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")

    @property
    def eta(self) -> float:
        return self.power / (self.n * self.sigma2)

    @classmethod
    def from_eta_db(cls, n: int, eta_db: float, sigma2: float = 1.0) -> "ChannelParams":
        """Build params from SNR in dB with sigma2 fixed (P = n * sigma2 * eta)."""
        eta = 10.0 ** (eta_db / 10.0)
        return cls(n=n, power=n * sigma2 * eta, sigma2=sigma2)


@dataclass(frozen=True)
class Constellation:
    """A finite set of n-dimensional symbols with uniform prior.

    ``points`` has shape (M, n); it is empty (shape (0, n)) for the
    ``gaussian`` kind, which tags a circular Gaussian codebook handled by
    closed-form rate expressions instead of symbol-wise sums.
    """

    kind: str
    n: int
    power: float
    points: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def is_discrete(self) -> bool:
        return self.points.shape[0] > 0


def _qam_levels(order_per_dim: int) -> np.ndarray:
    # Gray-ordered PAM levels: 2 -> [-1, 1], 4 -> [-3, -1, 1, 3].
    m = order_per_dim
    return np.arange(-(m - 1), m, 2, dtype=float)


def _square_qam(order: int) -> np.ndarray:
    """Unnormalized square QAM points for one polarization (complex scalars)."""
    side = int(round(np.sqrt(order)))
    if side * side != order:
        raise ValueError(f"order {order} is not a square")
    levels = _qam_levels(side)
    re, im = np.meshgrid(levels, levels, indexing="ij")
    return (re + 1j * im).ravel()


def make_constellation(kind: str, n: int, power: float) -> Constellation:
    """Build a constellation of total symbol power ``power``.

    dp_qpsk and dp_16qam are product constellations over n = 2
    polarizations with per-polarization power ``power / n``.
    """
    if kind not in CONSTELLATION_KINDS:
        raise ValueError(f"unsupported constellation kind {kind!r}")
    if power <= 0:
        raise ValueError(f"power must be > 0, got {power}")
    if kind == "gaussian":
        return Constellation(kind=kind, n=n, power=power, points=np.zeros((0, n), dtype=complex))
    if n != 2:
        raise ValueError(f"{kind} requires n = 2, got n = {n}")
    per_pol = _square_qam(4 if kind == "dp_qpsk" else 16)
    # Normalize each polarization to power / n on average.
    per_pol = per_pol * np.sqrt((power / n) / np.mean(np.abs(per_pol) ** 2))
    points = np.array(list(itertools.product(per_pol, repeat=n)), dtype=complex)
    return Constellation(kind=kind, n=n, power=power, points=points)


@dataclass(frozen=True)
class PilotMatrix:
    """n x L pilot matrix satisfying D D^dagger = (P L / n) I_n."""

    D: np.ndarray = field(repr=False)
    L: int
    power: float

    @property
    def n(self) -> int:
        return self.D.shape[0]


def make_pilots(n: int, L: int, power: float) -> PilotMatrix:
    """Deterministic pilot matrix with the orthogonality property.

    Block-repeats a scaled n x n Hadamard matrix with QPSK entries
    (+-1 +- 1j)/sqrt(2) * sqrt(P/n), which guarantees
    D D^dagger = (P L / n) I_n exactly. For n not a power of two a DFT
    matrix is used instead (unit-modulus but not QPSK entries).

    Requires L >= n and L a multiple of n.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if L < n:
        raise ValueError(f"L must be >= n, got L={L}, n={n}")
    if L % n != 0:
        raise ValueError(f"L must be a multiple of n, got L={L}, n={n}")
    if power <= 0:
        raise ValueError(f"power must be > 0, got {power}")
    if n & (n - 1) == 0:
        base = np.array([[1.0]])
        while base.shape[0] < n:
            base = np.block([[base, base], [base, -base]])
        base = base * (1.0 + 1j) / np.sqrt(2.0)
    else:
        j, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        base = np.exp(2j * np.pi * j * k / n)
    base = base * np.sqrt(power / n)
    D = np.tile(base, (1, L // n))
    return PilotMatrix(D=D, L=L, power=power)


@dataclass(frozen=True)
class TransmissionBlock:
    """One block's channel realization, pilots and received pilot samples."""

    H: np.ndarray = field(repr=False)
    pilots: PilotMatrix
    X: np.ndarray = field(repr=False)
    block_length: int = 0  # metadata only; rate loss is not modeled

    def __post_init__(self):
        H = as_complex_matrix(self.H, "H")
        n = H.shape[0]
        if self.X.shape != (n, self.pilots.L):
            raise ValueError(f"X must be {(n, self.pilots.L)}, got {self.X.shape}")
        if fro_norm(H @ dagger(H) - np.eye(n)) > 1e-10:
            raise ValueError("H is not unitary to tolerance")


def transmit(H, S, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Pass symbols through the channel: X = H S + Z.

    ``S`` is n x K (one column per symbol); the noise Z has i.i.d.
    circularly symmetric entries of variance ``sigma2``.
    """
    H = as_complex_matrix(H, "H")
    S = as_complex_matrix(S, "S")
    if H.shape[0] != H.shape[1]:
        raise ValueError(f"H must be square, got {H.shape}")
    if H.shape[1] != S.shape[0]:
        raise ValueError(f"dimension mismatch: H {H.shape}, S {S.shape}")
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    return H @ S + sample_cgauss(S.shape, sigma2, rng)


def sample_channel(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw the channel for a new block: a Haar-random unitary."""
    return haar_unitary(n, rng, size=size)


def constellation_to_csv(constellation: Constellation, path) -> None:
    """Export constellation points (index, per-dimension re/im) as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["index"]
        for d in range(constellation.n):
            header += [f"re{d}", f"im{d}"]
        writer.writerow(header)
        for i, point in enumerate(constellation.points):
            row = [i]
            for v in point:
                row += [repr(float(v.real)), repr(float(v.imag))]
            writer.writerow(row)
