"""Dirichlet-Laplacian spectral data on an interval and 1-D P1 finite elements.

Everything downstream works in one of two orthonormal bases: the exact sine
eigenbasis of the Laplacian on (0, length), or the mass-orthonormal generalized
eigenbasis of the (stiffness, mass) pencil of a uniform piecewise-linear FEM
space.  All inner products between the two bases have closed forms, so no
quadrature is involved in the setup.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

# Residual tolerance for the generalized eigensolve, relative to each eigenvalue.
EIG_RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class DirichletSpectrum:
    """Eigenvalues (k*pi/length)^2 of -d^2/dx^2 with zero boundary values.

    The eigenfunctions sqrt(2/length)*sin(k*pi*x/length) are never tabulated;
    only closed-form integrals against them are evaluated.
    """

    mode_count: int
    domain_length: float = 1.0
    eigenvalues: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.mode_count < 1:
            raise ValueError(f"mode_count must be >= 1, got {self.mode_count}")
        if not self.domain_length > 0:
            raise ValueError(f"domain_length must be > 0, got {self.domain_length}")
        k = np.arange(1, self.mode_count + 1, dtype=float)
        object.__setattr__(self, "eigenvalues", (k * np.pi / self.domain_length) ** 2)

    @property
    def K(self) -> int:
        return self.mode_count


def dirichlet_spectrum(K: int, length: float = 1.0) -> DirichletSpectrum:
    """Spectrum of the Dirichlet Laplacian on (0, length) truncated to K modes."""
    return DirichletSpectrum(mode_count=int(K), domain_length=float(length))


@dataclass(frozen=True)
class FemSpace:
    """Uniform P1 finite elements on (0,1) with M cells and M-1 interior nodes.

    mass/stiffness are dense symmetric tridiagonal matrices; eigenpairs solve
    stiffness @ v = lam * mass @ v with mass-orthonormal eigenvector columns.
    """

    cell_count: int
    mass: np.ndarray = field(repr=False)
    stiffness: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)  # columns, V.T @ mass @ V = I

    @property
    def h(self) -> float:
        return 1.0 / self.cell_count

    @property
    def interior_dim(self) -> int:
        return self.cell_count - 1

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(1, self.cell_count) * self.h


def assemble_fem(M: int) -> FemSpace:
    """Assemble the uniform P1 mass/stiffness pair and its generalized eigenpairs."""
    M = int(M)
    if M < 2:
        raise ValueError(f"need at least one interior node, got M={M}")
    n = M - 1
    h = 1.0 / M
    mass = np.zeros((n, n))
    stiff = np.zeros((n, n))
    idx = np.arange(n)
    mass[idx, idx] = 4.0 * h / 6.0
    stiff[idx, idx] = 2.0 / h
    if n > 1:
        mass[idx[:-1], idx[:-1] + 1] = h / 6.0
        mass[idx[:-1] + 1, idx[:-1]] = h / 6.0
        stiff[idx[:-1], idx[:-1] + 1] = -1.0 / h
        stiff[idx[:-1] + 1, idx[:-1]] = -1.0 / h
    lam, vec = scipy.linalg.eigh(stiff, mass)
    order = np.argsort(lam)
    lam = lam[order]
    vec = vec[:, order]
    resid = np.abs(stiff @ vec - mass @ vec * lam[None, :]).max(axis=0)
    if np.any(resid > EIG_RESIDUAL_RTOL * lam):
        raise RuntimeError(
            f"generalized eigensolve residual {resid.max():.3e} exceeds "
            f"{EIG_RESIDUAL_RTOL:.0e} * eigenvalue at M={M}"
        )
    return FemSpace(cell_count=M, mass=mass, stiffness=stiff, eigenvalues=lam, eigenvectors=vec)


def cross_gram(fem: FemSpace, spec: DirichletSpectrum) -> np.ndarray:
    """G[i, k] = integral of hat_i(x) * sqrt(2) sin((k+1) pi x) over (0,1).

    Closed form from the exact antiderivative of sin against a hat function:
        G[i, k] = sqrt(2) * 2 (1 - cos(a h)) sin(a x_i) / (a^2 h),  a = (k+1) pi.
    """
    if spec.domain_length != 1.0:
        raise ValueError("cross_gram requires the unit interval")
    a = np.sqrt(spec.eigenvalues)[None, :]  # (k pi), shape (1, K)
    x = fem.nodes[:, None]
    h = fem.h
    return np.sqrt(2.0) * 2.0 * (1.0 - np.cos(a * h)) * np.sin(a * x) / (a**2 * h)


def l2_project_mode(fem: FemSpace, spec: DirichletSpectrum, k: int) -> np.ndarray:
    """Coefficients of the L2 projection of sine mode k in the discrete eigenbasis.

    Solves mass @ c = G[:, k-1] for nodal values, then d = V.T @ mass @ c = V.T @ G[:, k-1].
    Mode index k is 1-based.
    """
    if not 1 <= k <= spec.mode_count:
        raise ValueError(f"mode index {k} outside 1..{spec.mode_count}")
    g = cross_gram(fem, spec)[:, k - 1]
    return fem.eigenvectors.T @ g


def spectral_coupling(fem: FemSpace, spec: DirichletSpectrum) -> np.ndarray:
    """C[j, k] = <psi_j, phi_k>_{L2} between discrete and exact eigenfunctions.

    Because the discrete eigenvectors are mass-orthonormal these are
    simultaneously the eigen-coordinates of the projected modes P_h phi_k.
    """
    return fem.eigenvectors.T @ cross_gram(fem, spec)


@dataclass(frozen=True)
class DotHVector:
    """Coefficients in the sine eigenbasis, carried with a regularity order tag."""

    coefficients: np.ndarray
    order: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coefficients", np.atleast_1d(np.asarray(self.coefficients, float)))


def dot_norm(v: DotHVector | np.ndarray, spec: DirichletSpectrum, alpha: float) -> float:
    """Fractional norm (sum_k lam_k^alpha v_k^2)^(1/2) over the stored truncation."""
    coeff = v.coefficients if isinstance(v, DotHVector) else np.atleast_1d(np.asarray(v, float))
    if coeff.size > spec.mode_count:
        raise ValueError(f"coefficient vector longer ({coeff.size}) than spectrum ({spec.mode_count})")
    lam = spec.eigenvalues[: coeff.size]
    if alpha == 0.0:
        return float(np.linalg.norm(coeff))
    return float(np.sqrt(np.sum(lam**alpha * coeff**2)))
