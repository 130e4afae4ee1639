"""Self-verification suite.

Draws random problem instances across the four dimension regimes and
checks, on each, the algebraic facts the detectors rest on:

* the identity report from :func:`adaptdet.detectors.appendix_identities`,
* the strictly increasing map t -> t/(1-t) carrying GLRGDD-RU to GLRGDD,
* the boundary agreements (no training data: Bose = GLRGDD-RU;
  square waveform subspace K = M: AMGDD = AMGDD-RU),
* invariance of every statistic under subspace reparameterization
  (A -> A T, C -> T C) and under common data scaling (X, X_L) -> (c X, c X_L),
* boundedness of the [0, 1) statistics.

These are theorems, so any persistent failure flags an implementation bug;
each failure records the instance index for replay.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detectors import DetectorKind, appendix_identities, compute
from .linalg import TOL
from .scenario import (Scenario, as_generator, complex_gaussian, make_signal,
                       random_subspaces, sample_noise, scale_to_snr,
                       toeplitz_covariance)

__all__ = ["Instance", "REGIMES", "random_instance", "instance_stream",
           "CheckSuite", "VerificationReport", "run_verification"]

REGIMES = ("abundant", "lowsample", "notraining", "square")

_RHO_CYCLE = (0.0, 0.5, 0.95)


@dataclass(frozen=True, eq=False)
class Instance:
    """One random problem instance: dimensions, subspaces, and data."""

    regime: str
    n: int
    k: int
    m: int
    j: int
    l: int
    a: np.ndarray
    c: np.ndarray
    r: np.ndarray
    x: np.ndarray
    x_l: np.ndarray

    def valid_kinds(self) -> tuple[DetectorKind, ...]:
        return tuple(kd for kd in DetectorKind
                     if kd.is_valid(self.n, self.k, self.m, self.l))


def random_instance(regime: str, rng, *, n_range: tuple[int, int] = (3, 8),
                    with_signal: bool | None = None) -> Instance:
    """Draw dimensions for the regime, then subspaces, covariance, and data.

    Regimes: 'abundant' (L >= N, K > M), 'lowsample' (1 <= L < N and
    L+K >= M+N with K < M+N, so only the augmented-SCM detectors apply),
    'notraining' (L = 0, K >= M+N), 'square' (K = M, L >= N), and 'full'
    (L >= N and K >= M+N, where every detector is valid).
    """
    rng = as_generator(rng)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    j = int(rng.integers(1, min(n, 3) + 1))
    m = int(rng.integers(1, 4))
    if regime == "abundant":
        k = m + int(rng.integers(1, 6))
        l = n + int(rng.integers(0, 5))
    elif regime == "full":
        k = m + n + int(rng.integers(0, 3))
        l = n + int(rng.integers(0, 5))
    elif regime == "lowsample":
        l = int(rng.integers(1, n))
        k_min = max(m, m + n - l)
        k = int(rng.integers(k_min, m + n))  # keeps K < M+N
    elif regime == "notraining":
        l = 0
        k = m + n + int(rng.integers(0, 4))
    elif regime == "square":
        k = m
        l = n + int(rng.integers(0, 5))
    else:
        raise ValueError(f"unknown regime {regime!r}")

    a, c = random_subspaces(n, j, m, k, rng)
    rho = _RHO_CYCLE[int(rng.integers(0, len(_RHO_CYCLE)))]
    r = toeplitz_covariance(n, rho)
    x = sample_noise(r, k, rng)
    if with_signal is None:
        with_signal = bool(rng.integers(0, 2))
    if with_signal:
        # moderate SNR keeps the bounded statistics away from 1, where the
        # monotone map would amplify rounding error past the check budgets
        scenario = Scenario(N=n, K=k, M=m, J=j, L=l, A=a, C=c, R=r)
        theta_dir = complex_gaussian(rng, j, 1).ravel()
        alpha_dir = complex_gaussian(rng, m, 1).ravel()
        snr_db = float(rng.uniform(-5.0, 15.0))
        coords = scale_to_snr(scenario, theta_dir, alpha_dir, snr_db)
        x = x + make_signal(a, coords.theta, coords.alpha, c)
    x_l = sample_noise(r, l, rng) if l > 0 else np.zeros((n, 0), dtype=np.complex128)
    return Instance(regime=regime, n=n, k=k, m=m, j=j, l=l,
                    a=a, c=c, r=r, x=x, x_l=x_l)


def instance_stream(seed: int, count: int, regimes=REGIMES):
    """Yield (index, Instance) pairs cycling through the regimes."""
    for idx in range(count):
        regime = regimes[idx % len(regimes)]
        rng = np.random.SeedSequence(int(seed), spawn_key=(idx,))
        yield idx, random_instance(regime, rng)


@dataclass
class CheckSuite:
    name: str
    instances: int = 0
    max_residual: float = 0.0
    failures: list[tuple[int, str]] = field(default_factory=list)

    def record(self, idx: int, residual: float, budget: float, detail: str) -> None:
        self.instances += 1
        self.max_residual = max(self.max_residual, residual)
        if not residual <= budget:
            self.failures.append((idx, f"{detail}: residual {residual:.3e} > {budget:.1e}"))

    @property
    def passed(self) -> bool:
        return not self.failures

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = (f"{status} {self.name}: {self.instances} instances, "
                f"max residual {self.max_residual:.3e}")
        if self.failures:
            shown = "; ".join(f"instance {idx} ({msg})" for idx, msg in self.failures[:5])
            text += f" [{shown}{'; ...' if len(self.failures) > 5 else ''}]"
        return text


@dataclass
class VerificationReport:
    seed: int
    instance_count: int
    suites: list[CheckSuite]

    @property
    def passed(self) -> bool:
        return all(suite.passed for suite in self.suites)

    @property
    def vacuous(self) -> bool:
        return self.instance_count == 0

    def lines(self) -> list[str]:
        out = [suite.line() for suite in self.suites]
        if self.vacuous:
            out.append("WARNING: 0 instances requested, vacuous pass")
        verdict = "PASS" if self.passed else "FAIL"
        out.append(f"{verdict}: verification over {self.instance_count} instances "
                   f"(seed {self.seed}; replay any instance i with spawn_key=(i,))")
        return out


def run_verification(seed: int = 20260810, instance_count: int = 500) -> VerificationReport:
    """Run every check suite over `instance_count` random instances."""
    suites = {
        "identities": CheckSuite("identities"),
        "monotone_map": CheckSuite("monotone map GLRGDD = t/(1-t) of GLRGDD-RU"),
        "no_training_agreement": CheckSuite("no-training agreement Bose = GLRGDD-RU"),
        "square_agreement": CheckSuite("square-subspace agreement AMGDD = AMGDD-RU"),
        "invariance": CheckSuite("reparameterization and scale invariance"),
        "boundedness": CheckSuite("bounded statistics stay below 1"),
    }
    for idx, inst in instance_stream(seed, instance_count):
        rng = as_generator(np.random.SeedSequence(int(seed), spawn_key=(idx, 1)))
        _check_instance(idx, inst, rng, suites)
    return VerificationReport(seed=seed, instance_count=instance_count,
                              suites=list(suites.values()))


def _check_instance(idx: int, inst: Instance, rng, suites: dict[str, CheckSuite]) -> None:
    kinds = inst.valid_kinds()
    values = {kind: compute(kind, inst.x, inst.x_l, inst.a, inst.c).value
              for kind in kinds}

    if DetectorKind.GLRGDD in kinds:
        residuals = appendix_identities(inst.x, inst.x_l, inst.a, inst.c)
        worst = max(residuals.values())
        suites["identities"].record(idx, worst, TOL.identity_rtol,
                                    f"{inst.regime}, worst of {len(residuals)} identities")
        t_ru = values[DetectorKind.GLRGDD_RU]
        t_full = values[DetectorKind.GLRGDD]
        mapped = t_ru / (1.0 - t_ru)
        res = abs(t_full - mapped) / (1.0 + t_full)
        suites["monotone_map"].record(idx, res, TOL.identity_rtol, inst.regime)

    if inst.l == 0:
        ru = values[DetectorKind.GLRGDD_RU]
        bose = values[DetectorKind.BOSE_GLRT]
        res = abs(bose - ru) / max(1.0, abs(ru))
        suites["no_training_agreement"].record(idx, res, TOL.degenerate_rtol, inst.regime)

    if inst.k == inst.m and DetectorKind.AMGDD in kinds:
        res = abs(values[DetectorKind.AMGDD] - values[DetectorKind.AMGDD_RU])
        res /= max(1.0, abs(values[DetectorKind.AMGDD_RU]))
        suites["square_agreement"].record(idx, res, TOL.degenerate_rtol, inst.regime)

    t_a = _random_invertible(rng, inst.j)
    t_c = _random_invertible(rng, inst.m)
    scale = complex(rng.uniform(0.3, 3.0), rng.uniform(-1.0, 1.0))
    for kind in kinds:
        base = values[kind]
        denom = 1.0 + abs(base)
        variants = (
            ("A -> A T", compute(kind, inst.x, inst.x_l, inst.a @ t_a, inst.c).value),
            ("C -> T C", compute(kind, inst.x, inst.x_l, inst.a, t_c @ inst.c).value),
            ("(X, X_L) -> (c X, c X_L)",
             compute(kind, scale * inst.x, scale * inst.x_l, inst.a, inst.c).value),
        )
        for label, value in variants:
            suites["invariance"].record(idx, abs(value - base) / denom,
                                        TOL.identity_rtol, f"{kind.name} {label}")
        if kind.bounded_below_one:
            overshoot = base - (1.0 - TOL.stat_unit_margin)
            suites["boundedness"].record(idx, max(overshoot, 0.0), 0.0, kind.name)


def _random_invertible(rng, dim: int) -> np.ndarray:
    for _ in range(100):
        t = complex_gaussian(rng, dim, dim)
        sv = np.linalg.svd(t, compute_uv=False)
        if sv[-1] > 1e-3 * sv[0]:
            return t
    raise RuntimeError("could not draw a well-conditioned transform")
