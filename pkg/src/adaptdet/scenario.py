"""Detection scenarios.

Problem dimensions, the spatial (A) and waveform (C) subspace matrices, a
Toeplitz noise covariance, signal construction, and SNR-calibrated
amplitude scaling.  A scenario is immutable once built and can be shared
freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrixError
from .linalg import TOL, as_cmatrix, hpd_solve

__all__ = [
    "Scenario",
    "SignalCoordinates",
    "toeplitz_covariance",
    "random_subspaces",
    "random_directions",
    "sample_noise",
    "noise_factor",
    "complex_gaussian",
    "make_signal",
    "snr_of",
    "scale_to_snr",
    "make_scenario",
]

_SQRT_HALF = np.sqrt(0.5)
_SUBSPACE_STREAM = 1000
_DIRECTION_STREAM = 1001
_MAX_RANK_RETRIES = 100


def as_generator(seed) -> np.random.Generator:
    """Accept an int seed, a SeedSequence, or a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def as_cvector(x, name: str = "vector") -> np.ndarray:
    a = np.asarray(x, dtype=np.complex128).ravel()
    if a.size and not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class Scenario:
    """One detection problem: dimensions, subspaces, and noise covariance.

    N: channels, K: test-data columns (pulses), M: waveform-subspace
    dimension, J: spatial-subspace dimension, L: training-data count.
    """

    N: int
    K: int
    M: int
    J: int
    L: int
    A: np.ndarray
    C: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        n, k, m, j, l = self.N, self.K, self.M, self.J, self.L
        if min(n, k, m, j) < 1 or l < 0:
            raise ValueError(f"invalid dimensions N={n}, K={k}, M={m}, J={j}, L={l}")
        if j > n:
            raise ValueError(f"J={j} > N={n}: spatial subspace cannot exceed channels")
        if m > k:
            raise ValueError(f"M={m} > K={k}: waveform subspace cannot exceed pulses")
        if l + k < m + n:
            raise ValueError(f"L+K={l + k} < M+N={m + n}")
        a = as_cmatrix(self.A, "A")
        c = as_cmatrix(self.C, "C")
        r = as_cmatrix(self.R, "R")
        if a.shape != (n, j):
            raise ValueError(f"A must be {n}x{j}, got {a.shape}")
        if c.shape != (m, k):
            raise ValueError(f"C must be {m}x{k}, got {c.shape}")
        if r.shape != (n, n):
            raise ValueError(f"R must be {n}x{n}, got {r.shape}")
        if not _full_rank(a):
            raise ValueError("A must have full column rank")
        if not _full_rank(c):
            raise ValueError("C must have full row rank")
        dev = np.linalg.norm(r - r.conj().T)
        if dev > TOL.check_rtol * max(1.0, np.linalg.norm(r)):
            raise ValueError("R is not Hermitian")
        try:
            np.linalg.cholesky(r)
        except np.linalg.LinAlgError as exc:
            raise ValueError("R is not positive definite") from exc
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "R", r)


@dataclass(frozen=True, eq=False)
class SignalCoordinates:
    """Unknown signal coordinates: theta (length J), alpha (length M)."""

    theta: np.ndarray
    alpha: np.ndarray


def _full_rank(a: np.ndarray) -> bool:
    sv = np.linalg.svd(a, compute_uv=False)
    return bool(sv[-1] > TOL.rank_sv_rtol * sv[0])


def toeplitz_covariance(n: int, rho: float) -> np.ndarray:
    """N x N covariance with entries rho^|i-j| (real symmetric Toeplitz, PD)."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    idx = np.arange(n)
    return (rho ** np.abs(idx[:, None] - idx[None, :])).astype(np.complex128)


def complex_gaussian(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """IID standard circular complex Gaussian entries.

    Real and imaginary parts are each N(0, 1/2), so every entry has unit
    variance.  The real block is drawn before the imaginary block.
    """
    z = rng.standard_normal((2, rows, cols))
    return (z[0] + 1j * z[1]) * _SQRT_HALF


def random_subspaces(n: int, j: int, m: int, k: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Random full-rank subspace matrices A (N x J) and C (M x K).

    Entries are IID standard circular complex Gaussian; each matrix is
    redrawn (up to 100 times) until its smallest singular value exceeds
    1e-8 times its largest.  Deterministic for a fixed seed.
    """
    if j > n:
        raise ValueError(f"J={j} > N={n}: spatial subspace cannot exceed channels")
    if m > k:
        raise ValueError(f"M={m} > K={k}: waveform subspace cannot exceed pulses")
    rng = as_generator(seed)
    a = _draw_full_rank(rng, n, j, "A")
    c = _draw_full_rank(rng, m, k, "C")
    return a, c


def _draw_full_rank(rng, rows, cols, name):
    for _ in range(_MAX_RANK_RETRIES):
        cand = complex_gaussian(rng, rows, cols)
        if _full_rank(cand):
            return cand
    raise RuntimeError(f"could not draw a full-rank {name} in {_MAX_RANK_RETRIES} tries")


def random_directions(j: int, m: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Unit-norm direction vectors (theta_dir, alpha_dir) from the complex sphere."""
    if isinstance(seed, (int, np.integer)):
        seed = np.random.SeedSequence(int(seed), spawn_key=(_DIRECTION_STREAM,))
    rng = as_generator(seed)
    theta = as_cvector(complex_gaussian(rng, j, 1), "theta_dir")
    alpha = as_cvector(complex_gaussian(rng, m, 1), "alpha_dir")
    return theta / np.linalg.norm(theta), alpha / np.linalg.norm(alpha)


def noise_factor(r) -> np.ndarray:
    """Lower-triangular factor F with F F^H = R."""
    r = as_cmatrix(r, "R")
    try:
        return np.linalg.cholesky(r)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("singular covariance estimate: R") from exc


def sample_noise(r, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Matrix whose columns are IID CN(0, R), realized as F z."""
    if cols < 1:
        raise ValueError(f"cols must be >= 1, got {cols}")
    f = noise_factor(r)
    return f @ complex_gaussian(rng, f.shape[0], cols)


def make_signal(a, theta, alpha, c) -> np.ndarray:
    """Rank-one signal matrix A theta alpha^H C."""
    a = as_cmatrix(a, "A")
    c = as_cmatrix(c, "C")
    theta = as_cvector(theta, "theta")
    alpha = as_cvector(alpha, "alpha")
    if a.shape[1] != theta.size:
        raise ValueError(f"theta must have length {a.shape[1]}, got {theta.size}")
    if c.shape[0] != alpha.size:
        raise ValueError(f"alpha must have length {c.shape[0]}, got {alpha.size}")
    return a @ np.outer(theta, alpha.conj()) @ c


def snr_of(scenario: Scenario, theta, alpha) -> float:
    """Output SNR (linear): (alpha^H C C^H alpha) * (theta^H A^H R^-1 A theta)."""
    theta = as_cvector(theta, "theta")
    alpha = as_cvector(alpha, "alpha")
    c_alpha = scenario.C.conj().T @ alpha
    waveform = float(np.real(c_alpha.conj() @ c_alpha))
    v = (scenario.A @ theta)[:, None]
    spatial = float(np.real(v.conj().T @ hpd_solve(scenario.R, v, "R"))[0, 0])
    return waveform * spatial


def scale_to_snr(scenario: Scenario, theta_dir, alpha_dir, target_snr_db: float) -> SignalCoordinates:
    """Scale theta_dir so the pair hits the target SNR (dB) exactly.

    Only theta is scaled; the statistic depends on the signal matrix alone,
    so how the amplitude is split between theta and alpha is immaterial and
    one convention keeps runs reproducible.
    """
    theta_dir = as_cvector(theta_dir, "theta_dir")
    alpha_dir = as_cvector(alpha_dir, "alpha_dir")
    base = snr_of(scenario, theta_dir, alpha_dir)
    if base <= 0.0:
        raise ValueError("zero-SNR direction: theta_dir/alpha_dir give no signal power")
    gain = np.sqrt(10.0 ** (target_snr_db / 10.0) / base)
    return SignalCoordinates(gain * theta_dir, alpha_dir)


def make_scenario(n: int, k: int, m: int, j: int, l: int, *, rho: float = 0.95,
                  seed: int = 0) -> Scenario:
    """Build a scenario with random fixed subspaces and a Toeplitz covariance."""
    sub = np.random.SeedSequence(int(seed), spawn_key=(_SUBSPACE_STREAM,))
    a, c = random_subspaces(n, j, m, k, sub)
    return Scenario(N=n, K=k, M=m, J=j, L=l, A=a, C=c, R=toeplitz_covariance(n, rho))
