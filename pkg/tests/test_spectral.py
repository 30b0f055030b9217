import hypothesis
import numpy as np
import pytest
import scipy.integrate
from hypothesis import strategies as st

from levyspde.spectral import (
    DotHVector,
    assemble_fem,
    cross_gram,
    dirichlet_spectrum,
    dot_norm,
    l2_project_mode,
    spectral_coupling,
)


def hat(i, x, h):
    return np.clip(1.0 - np.abs(x - (i + 1) * h) / h, 0.0, None)


class TestDirichletSpectrum:
    def test_unit_interval_single_mode(self):
        assert dirichlet_spectrum(1, 1.0).eigenvalues == pytest.approx([np.pi**2], rel=1e-15)

    def test_three_modes(self):
        got = dirichlet_spectrum(3, 1.0).eigenvalues
        assert got == pytest.approx([np.pi**2, 4 * np.pi**2, 9 * np.pi**2], rel=1e-15)

    def test_rescaled_interval(self):
        got = dirichlet_spectrum(2, 2.0).eigenvalues
        assert got == pytest.approx([(np.pi / 2) ** 2, np.pi**2], rel=1e-15)

    @pytest.mark.parametrize("bad", [0, -3])
    def test_bad_mode_count(self, bad):
        with pytest.raises(ValueError):
            dirichlet_spectrum(bad)

    def test_bad_length(self):
        with pytest.raises(ValueError):
            dirichlet_spectrum(4, 0.0)

    def test_strictly_increasing(self):
        lam = dirichlet_spectrum(64).eigenvalues
        assert np.all(np.diff(lam) > 0)


class TestFem:
    def test_single_interior_node_by_hand(self):
        # h = 1/2: mass = integral of the hat squared = 1/3, stiffness = 2/h = 4
        fem = assemble_fem(2)
        assert fem.mass[0, 0] == pytest.approx(1.0 / 3.0, rel=1e-15)
        assert fem.stiffness[0, 0] == pytest.approx(4.0, rel=1e-15)
        assert fem.eigenvalues[0] == pytest.approx(12.0, rel=1e-14)

    def test_m4_discrete_eigenvalue_closed_form(self):
        # dense generalized eigensolve must reproduce the uniform-mesh formula
        fem = assemble_fem(4)
        h = 0.25
        expect = (6.0 / h**2) * (1.0 - np.cos(np.pi * h)) / (2.0 + np.cos(np.pi * h))
        assert fem.eigenvalues[0] == pytest.approx(expect, rel=1e-13)

    @pytest.mark.parametrize("M", [2, 5, 16, 64])
    def test_minmax_lower_bound(self, M):
        assert assemble_fem(M).eigenvalues[0] >= np.pi**2

    def test_no_interior_node(self):
        with pytest.raises(ValueError):
            assemble_fem(1)

    @pytest.mark.parametrize("M", [8, 32, 128, 512])
    def test_mass_orthonormality(self, M):
        fem = assemble_fem(M)
        gram = fem.eigenvectors.T @ fem.mass @ fem.eigenvectors
        assert np.abs(gram - np.eye(M - 1)).max() <= 1e-10

    @pytest.mark.parametrize("M", [8, 16, 32, 64, 128, 256, 512])
    def test_eigenvalue_envelope(self, M):
        # lam_k <= lam_{h,k} <= lam_k (1 + C (k h)^2) with C <= 1 on this ladder
        fem = assemble_fem(M)
        spec = dirichlet_spectrum(M - 1)
        lam = spec.eigenvalues
        k = np.arange(1, M)
        assert np.all(fem.eigenvalues >= lam - 1e-9 * lam)
        c_obs = (fem.eigenvalues / lam - 1.0) / (k / M) ** 2
        assert c_obs.max() <= 1.0

    def test_eigenvalue_convergence_fixed_mode(self):
        lam3 = dirichlet_spectrum(3).eigenvalues[2]
        gaps = [abs(assemble_fem(M).eigenvalues[2] - lam3) for M in (16, 64, 256)]
        assert gaps[2] < gaps[1] < gaps[0]
        assert gaps[2] < 1e-2 * lam3


class TestCrossGram:
    def test_matches_adaptive_quadrature(self):
        fem = assemble_fem(7)
        spec = dirichlet_spectrum(11)
        G = cross_gram(fem, spec)
        rng = np.random.default_rng(3)
        for i, k in zip(rng.integers(0, 6, size=6), rng.integers(0, 11, size=6)):
            f = lambda x: hat(i, x, fem.h) * np.sqrt(2.0) * np.sin((k + 1) * np.pi * x)
            # integrate each smooth side of the hat's kink separately
            left, _ = scipy.integrate.quad(f, i * fem.h, (i + 1) * fem.h, limit=200)
            right, _ = scipy.integrate.quad(f, (i + 1) * fem.h, (i + 2) * fem.h, limit=200)
            assert abs(G[i, k] - (left + right)) <= 1e-12

    def test_reflection_symmetry(self):
        # sin(k pi (1-x)) = (-1)^(k+1) sin(k pi x) mirrors the Gram rows
        fem = assemble_fem(8)
        spec = dirichlet_spectrum(6)
        G = cross_gram(fem, spec)
        for k in range(6):
            sign = (-1.0) ** k  # k zero-based: mode k+1
            np.testing.assert_allclose(G[::-1, k], sign * G[:, k], atol=1e-14)

    def test_mass_solve_reproduces_nodal_values(self):
        # P_h phi_k nodal values approach phi_k(x_i) at second order
        k = 3
        errs = []
        for M in (16, 32, 64):
            fem = assemble_fem(M)
            spec = dirichlet_spectrum(8)
            c = np.linalg.solve(fem.mass, cross_gram(fem, spec)[:, k - 1])
            exact = np.sqrt(2.0) * np.sin(k * np.pi * fem.nodes)
            errs.append(np.abs(c - exact).max())
        order = np.polyfit(np.log([16, 32, 64]), np.log(errs), 1)[0]
        assert order <= -1.8

    def test_requires_unit_interval(self):
        with pytest.raises(ValueError):
            cross_gram(assemble_fem(4), dirichlet_spectrum(3, length=2.0))


class TestProjection:
    def test_concentrates_on_matching_mode(self):
        fem = assemble_fem(512)
        spec = dirichlet_spectrum(8)
        for k in (1, 4, 8):
            d = l2_project_mode(fem, spec, k)
            assert abs(abs(d[k - 1]) - 1.0) <= 1e-6
            assert np.delete(np.abs(d), k - 1).max() <= 1e-6

    @hypothesis.given(st.integers(min_value=1, max_value=12), st.integers(min_value=3, max_value=40))
    def test_projection_contracts(self, k, M):
        spec = dirichlet_spectrum(12)
        d = l2_project_mode(assemble_fem(M), spec, k)
        assert np.sum(d**2) <= 1.0 + 1e-12

    def test_single_cell_closed_form(self):
        # one interior node: coefficient is <hat, phi_1> / sqrt(1/3)
        fem = assemble_fem(2)
        spec = dirichlet_spectrum(2)
        d = l2_project_mode(fem, spec, 1)
        inner = 4.0 * np.sqrt(2.0) / np.pi**2  # exact integral of hat * sqrt2 sin(pi x)
        assert abs(d[0]) == pytest.approx(inner / np.sqrt(1.0 / 3.0), rel=1e-12)

    def test_mode_out_of_range(self):
        with pytest.raises(ValueError):
            l2_project_mode(assemble_fem(4), dirichlet_spectrum(3), 4)

    def test_coupling_columns_are_projections(self):
        fem = assemble_fem(16)
        spec = dirichlet_spectrum(10)
        C = spectral_coupling(fem, spec)
        for k in (1, 5, 10):
            np.testing.assert_allclose(C[:, k - 1], l2_project_mode(fem, spec, k), atol=1e-14)


class TestDotNorm:
    def test_alpha_zero_unit_vector(self):
        spec = dirichlet_spectrum(4)
        assert dot_norm(DotHVector([1.0, 0.0, 0.0]), spec, 0.0) == 1.0

    def test_alpha_two_first_mode(self):
        spec = dirichlet_spectrum(4)
        assert dot_norm(DotHVector([1.0]), spec, 2.0) == pytest.approx(np.pi**2, rel=1e-15)

    def test_negative_order(self):
        spec = dirichlet_spectrum(4)
        expect = np.sqrt(np.pi**-2 + (2 * np.pi) ** -2)
        assert dot_norm(DotHVector([1.0, 1.0]), spec, -1.0) == pytest.approx(expect, rel=1e-14)

    def test_truncation_guard(self):
        with pytest.raises(ValueError):
            dot_norm(DotHVector(np.ones(5)), dirichlet_spectrum(4), 0.0)

    @hypothesis.given(
        st.lists(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), min_size=1, max_size=16)
    )
    def test_alpha_zero_is_euclidean(self, coeffs):
        spec = dirichlet_spectrum(16)
        v = np.asarray(coeffs)
        assert dot_norm(DotHVector(v), spec, 0.0) == float(np.linalg.norm(v))
