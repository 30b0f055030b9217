"""Diagonal square-integrable Levy noise on the sine eigenbasis.

The driving process is assembled coordinate-wise: L(t) = sum_k L_k(t) e_k with
e_k = sqrt(q_k) phi_k, scalar laws normalized so that E L_k(t)^2 = t.  The
covariance stays diagonal, so regularity conditions and Hilbert-Schmidt norms
reduce to weighted eigenvalue sums with closed-form tail bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .spectral import DirichletSpectrum


def stream(seed: int, *path: int) -> np.random.Generator:
    """Independent Philox stream addressed by (seed, *path) indices.

    Counter-based, so streams are reproducible regardless of creation order
    or thread scheduling.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class CovarianceSpec:
    """Diagonal covariance q_k, either c * lam_k^(-decay) or an explicit table."""

    amplitude: float = 1.0
    decay: float | None = None
    explicit: np.ndarray | None = None

    def __post_init__(self):
        if (self.decay is None) == (self.explicit is None):
            raise ValueError("specify exactly one of decay or explicit")
        if self.decay is not None and self.decay < 0:
            raise ValueError("decay exponent must be >= 0")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be > 0")
        if self.explicit is not None:
            q = np.asarray(self.explicit, float)
            if np.any(q <= 0) or np.any(np.diff(q) > 0):
                raise ValueError("explicit covariance must be positive and nonincreasing")
            object.__setattr__(self, "explicit", q)

    def values(self, spec: DirichletSpectrum) -> np.ndarray:
        if self.explicit is not None:
            if self.explicit.size < spec.mode_count:
                raise ValueError("explicit covariance shorter than requested truncation")
            return self.explicit[: spec.mode_count]
        return self.amplitude * spec.eigenvalues ** (-self.decay)


@dataclass(frozen=True)
class HsReport:
    """Truncated Hilbert-Schmidt sum sum_{k<=K} lam_k^(beta-1/rho) q_k with tail info."""

    partial_sum: float
    tail_bound: float | None
    converges: bool | None

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.partial_sum))


def hs_condition(spec: DirichletSpectrum, cov: CovarianceSpec, beta: float, rho: float = 1.0) -> HsReport:
    """Evaluate the regularity functional governing the convergence rates.

    For power-law covariance the summand is ~ k^(2(beta - 1/rho - decay)), so
    the series converges iff 2*(decay + 1/rho - beta) > 1; the tail bound is
    the integral comparison starting at K.
    """
    if not (rho == 1.0 or 1.0 < rho < 2.0):
        raise ValueError(f"rho must be 1 or in (1,2), got {rho}")
    lam = spec.eigenvalues
    q = cov.values(spec)
    partial = float(np.sum(lam ** (beta - 1.0 / rho) * q))
    if cov.decay is None:
        return HsReport(partial_sum=partial, tail_bound=None, converges=None)
    expo = 2.0 * (beta - 1.0 / rho - cov.decay)  # summand ~ k^expo
    converges = expo < -1.0
    if converges:
        scale = cov.amplitude * (np.pi / spec.domain_length) ** expo
        tail = scale * spec.mode_count ** (expo + 1.0) / (-(expo + 1.0))
    else:
        tail = np.inf
    return HsReport(partial_sum=partial, tail_bound=float(tail), converges=bool(converges))


def asymmetric_condition(
    spec: DirichletSpectrum,
    cov: CovarianceSpec,
    second_moments: float | np.ndarray,
    beta: float,
    m: int,
) -> float:
    """Jump-moment regularity functional sum_{k<=m} (int xi^2 nu_k) q_k lam_k^(beta-1).

    This is the asymmetric sufficient condition for the wave rates, built from
    the jump intensity measures instead of the covariance alone.  With
    unit-normalized laws every jump-measure second moment is 1 and the value
    coincides with the truncated squared Hilbert-Schmidt sum at rho = 1.
    """
    if not 1 <= m <= spec.mode_count:
        raise ValueError(f"truncation m={m} outside 1..{spec.mode_count}")
    lam = spec.eigenvalues[:m]
    q = cov.values(spec)[:m]
    mom = np.broadcast_to(np.asarray(second_moments, float), (m,)) if np.ndim(second_moments) else np.full(m, float(second_moments))
    return float(np.sum(mom * q * lam ** (beta - 1.0)))


@dataclass(frozen=True)
class LevyLaw:
    """Scalar mean-zero Levy increment law with E L(t)^2 = t.

    kinds:
      variance_gamma: per-mode independent gamma subordinators, variance rate nu
      gamma_subordinated_wiener: one gamma subordinator shared by all modes
        (coordinates uncorrelated but dependent), variance rate nu
      compound_poisson: intensity jumps per unit time, each of variance
        1/intensity; jumps either symmetric two-point or centered normal
    """

    kind: Literal["variance_gamma", "compound_poisson", "gamma_subordinated_wiener"]
    nu: float = 1.0
    intensity: float = 1.0
    jumps: Literal["two_point", "normal"] = "two_point"

    def __post_init__(self):
        if self.kind not in ("variance_gamma", "compound_poisson", "gamma_subordinated_wiener"):
            raise ValueError(f"unknown law kind {self.kind!r}")
        if self.kind in ("variance_gamma", "gamma_subordinated_wiener") and not self.nu > 0:
            raise ValueError("subordinator variance rate nu must be > 0")
        if self.kind == "compound_poisson":
            if not self.intensity > 0:
                raise ValueError("jump intensity must be > 0")
            if self.jumps not in ("two_point", "normal"):
                raise ValueError(f"unknown jump law {self.jumps!r}")

    def increment_variance(self, dt: float) -> float:
        """Analytic variance of an increment over a span dt (equals dt by normalization)."""
        return float(dt)

    def jump_second_moment(self) -> float:
        """int xi^2 nu(dxi) of the scalar jump intensity measure (1 by normalization)."""
        return 1.0

    def excess_kurtosis(self, dt: float) -> float:
        if self.kind in ("variance_gamma", "gamma_subordinated_wiener"):
            return 3.0 * self.nu / dt
        # compound Poisson: kappa_4 / var^2 = E J^4 / (intensity dt (E J^2)^2)
        j4 = 1.0 if self.jumps == "two_point" else 3.0  # E J^4 in units of (E J^2)^2
        return j4 / (self.intensity * dt)


def sample_increments(law: LevyLaw, dt: float, K: int, rng: np.random.Generator) -> np.ndarray:
    """K coordinate increments over a span dt: mean zero, variance dt each."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if law.kind == "variance_gamma":
        z = rng.gamma(shape=dt / law.nu, scale=law.nu, size=K)
        return rng.standard_normal(K) * np.sqrt(z)
    if law.kind == "gamma_subordinated_wiener":
        z = rng.gamma(shape=dt / law.nu, scale=law.nu)
        return rng.standard_normal(K) * np.sqrt(z)
    # compound Poisson
    counts = rng.poisson(law.intensity * dt, size=K)
    total = int(counts.sum())
    sizes = _jump_sizes(law, total, rng)
    out = np.zeros(K)
    if total:
        np.add.at(out, np.repeat(np.arange(K), counts), sizes)
    return out


def _jump_sizes(law: LevyLaw, n: int, rng: np.random.Generator) -> np.ndarray:
    scale = 1.0 / np.sqrt(law.intensity)
    if law.jumps == "two_point":
        return scale * (2.0 * rng.integers(0, 2, size=n) - 1.0)
    return scale * rng.standard_normal(n)


@dataclass(frozen=True)
class JumpPath:
    """Sorted jump times and sizes per mode over [0, T]; compound Poisson only."""

    horizon: float
    times: list[np.ndarray]
    sizes: list[np.ndarray]

    @property
    def mode_count(self) -> int:
        return len(self.times)

    def terminal(self) -> np.ndarray:
        """L_k(T) per mode, summed in time order."""
        return np.array([s.sum() if s.size else 0.0 for s in self.sizes])


def sample_jump_path(law: LevyLaw, T: float, K: int, rng: np.random.Generator) -> JumpPath:
    """Full jump-time resolution of K compound-Poisson coordinates on (0, T]."""
    if law.kind != "compound_poisson":
        raise ValueError(f"jump paths require a compound_poisson law, got {law.kind}")
    if T < 0:
        raise ValueError("horizon must be >= 0")
    if T == 0:
        empty = np.empty(0)
        return JumpPath(horizon=0.0, times=[empty] * K, sizes=[empty] * K)
    counts = rng.poisson(law.intensity * T, size=K)
    times: list[np.ndarray] = []
    sizes: list[np.ndarray] = []
    for n in counts:
        n = int(n)
        t = np.sort(T * rng.random(n)) if n else np.empty(0)
        times.append(t)
        sizes.append(_jump_sizes(law, n, rng))
    return JumpPath(horizon=float(T), times=times, sizes=sizes)


def increments_from_path(path: JumpPath, grid: np.ndarray) -> np.ndarray:
    """Per-mode, per-cell increments on right-closed cells (t_{n-1}, t_n].

    grid must be increasing, start at 0 and stay within the path horizon.
    Returns an array of shape (K, len(grid)-1).
    """
    grid = np.asarray(grid, float)
    if grid.ndim != 1 or grid.size < 2 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be increasing and start at 0")
    if grid[-1] > path.horizon:
        raise ValueError(f"grid end {grid[-1]} exceeds path horizon {path.horizon}")
    ncell = grid.size - 1
    out = np.zeros((path.mode_count, ncell))
    edges = grid[1:]
    for k, (t, s) in enumerate(zip(path.times, path.sizes)):
        if not t.size:
            continue
        cell = np.searchsorted(edges, t, side="left")
        keep = cell < ncell  # jumps beyond the grid end are outside every cell
        np.add.at(out[k], cell[keep], s[keep])
    return out
