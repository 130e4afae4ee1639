import numpy as np
import pytest

from adaptdet.detectors import amgdd_ru, glrgdd_ru
from adaptdet.errors import SingularMatrixError
from adaptdet.scenario import make_scenario, sample_noise, as_generator
from adaptdet.transform import (SubspaceFactorization, factor_waveform_subspace,
                                transform_data)

from oracles import dagger, random_cmatrix, random_semi_unitary_rows, random_unitary


class TestFactorWaveformSubspace:
    def test_scaled_coordinate_row(self):
        f = factor_waveform_subspace([[2.0, 0.0, 0.0]])
        assert np.allclose(f.c_par, [[1.0, 0.0, 0.0]], atol=1e-14)
        assert np.allclose(f.d, [[2.0]], atol=1e-14)
        # complement projects onto span{e2, e3}
        proj = dagger(f.c_perp) @ f.c_perp
        assert np.allclose(proj, np.diag([0.0, 1.0, 1.0]), atol=1e-12)

    def test_idempotent_on_semi_unitary_input(self):
        rng = np.random.default_rng(0)
        c = random_semi_unitary_rows(rng, 2, 7)
        f = factor_waveform_subspace(c)
        assert np.allclose(f.c_par, c, atol=1e-12)
        assert np.allclose(f.d, np.eye(2), atol=1e-12)

    def test_all_invariants_on_random_input(self):
        rng = np.random.default_rng(1)
        c = random_cmatrix(rng, 3, 16)
        f = factor_waveform_subspace(c)
        m, k = c.shape
        assert np.linalg.norm(f.c_par @ dagger(f.c_par) - np.eye(m)) <= 1e-10
        assert np.linalg.norm(f.c_perp @ dagger(f.c_perp) - np.eye(k - m)) <= 1e-10
        assert np.linalg.norm(f.c_perp @ dagger(f.c_par)) <= 1e-10
        assert np.linalg.norm(f.d @ f.c_par - c) <= 1e-10 * np.linalg.norm(c)
        stacked = np.vstack([f.c_par, f.c_perp])
        assert np.linalg.norm(stacked @ dagger(stacked) - np.eye(k)) <= 1e-10

    def test_square_input_has_empty_complement(self):
        rng = np.random.default_rng(2)
        c = random_cmatrix(rng, 3, 3)
        f = factor_waveform_subspace(c)
        assert f.c_perp.shape == (0, 3)

    def test_rejects_rank_deficient_input(self):
        row = np.array([[1.0, 2.0, 3.0, 4.0]])
        with pytest.raises(ValueError, match="rank deficient"):
            factor_waveform_subspace(np.vstack([row, 2 * row]))


class TestTransformData:
    def _scenario_data(self, seed=3, n=5, k=9, m=3, j=2, l=7):
        sc = make_scenario(n, k, m, j, l, rho=0.5, seed=seed)
        rng = as_generator(seed + 100)
        x = sample_noise(sc.R, k, rng)
        x_l = sample_noise(sc.R, l, rng) if l else np.zeros((n, 0), complex)
        return sc, x, x_l

    def test_zero_test_data(self):
        sc, _, x_l = self._scenario_data()
        f = factor_waveform_subspace(sc.C)
        td = transform_data(np.zeros((sc.N, sc.K)), x_l, f)
        assert np.all(td.x_par == 0)
        assert np.all(td.x_perp == 0)
        assert np.allclose(td.s_plus, 0.5 * (x_l @ dagger(x_l) + (x_l @ dagger(x_l)).conj().T))

    def test_square_waveform_subspace_reduces_to_scm(self):
        sc, x, x_l = self._scenario_data(n=4, k=3, m=3, j=2, l=6)
        f = factor_waveform_subspace(sc.C)
        td = transform_data(x, x_l, f)
        assert td.x_perp.shape == (4, 0)
        scm = x_l @ dagger(x_l)
        assert np.allclose(td.s_plus, 0.5 * (scm + scm.conj().T), atol=1e-12)

    def test_no_training_data_regime(self):
        sc, x, _ = self._scenario_data(n=4, k=8, m=3, j=2, l=0)
        f = factor_waveform_subspace(sc.C)
        td = transform_data(x, np.zeros((4, 0), complex), f)
        np.linalg.cholesky(td.s_plus)  # nonsingular

    def test_rejects_singular_augmented_scm(self):
        rng = np.random.default_rng(4)
        c = random_cmatrix(rng, 3, 5)
        f = factor_waveform_subspace(c)
        x = random_cmatrix(rng, 6, 5)
        x_l = random_cmatrix(rng, 6, 1)  # L+K = 6 < M+N = 9
        with pytest.raises(SingularMatrixError, match="augmented SCM singular"):
            transform_data(x, x_l, f)

    def test_energy_split(self):
        sc, x, x_l = self._scenario_data(seed=5)
        f = factor_waveform_subspace(sc.C)
        td = transform_data(x, x_l, f)
        total = x @ dagger(x)
        split = td.x_par @ dagger(td.x_par) + td.x_perp @ dagger(td.x_perp)
        assert np.linalg.norm(split - total) <= 1e-10 * np.linalg.norm(total)

    def test_noise_free_signal_is_annihilated(self):
        rng = np.random.default_rng(6)
        sc, _, x_l = self._scenario_data(seed=6)
        theta = random_cmatrix(rng, sc.J, 1)
        alpha = random_cmatrix(rng, sc.M, 1)
        x = sc.A @ theta @ dagger(alpha) @ sc.C
        f = factor_waveform_subspace(sc.C)
        td = transform_data(x, x_l, f)
        assert np.linalg.norm(td.x_perp) <= 1e-10 * np.linalg.norm(x)


class TestBasisIndependence:
    def test_complement_choice_does_not_matter(self):
        sc = make_scenario(5, 9, 3, 2, 7, rho=0.95, seed=7)
        rng = as_generator(8)
        x = sample_noise(sc.R, sc.K, rng)
        x_l = sample_noise(sc.R, sc.L, rng)
        f = factor_waveform_subspace(sc.C)
        rot = random_unitary(np.random.default_rng(9), sc.K - sc.M)
        f_rot = SubspaceFactorization(c_par=f.c_par, c_perp=rot @ f.c_perp, d=f.d)
        td = transform_data(x, x_l, f)
        td_rot = transform_data(x, x_l, f_rot)
        assert np.linalg.norm(td_rot.s_plus - td.s_plus) <= 1e-10 * np.linalg.norm(td.s_plus)
        for stat in (glrgdd_ru, amgdd_ru):
            base = stat(td, sc.A).value
            rotated = stat(td_rot, sc.A).value
            assert abs(rotated - base) <= 1e-8 * (1.0 + abs(base))

    def test_row_space_scaling_of_c(self):
        sc = make_scenario(5, 9, 3, 2, 7, rho=0.95, seed=10)
        rng = as_generator(11)
        x = sample_noise(sc.R, sc.K, rng)
        x_l = sample_noise(sc.R, sc.L, rng)
        t = random_cmatrix(np.random.default_rng(12), sc.M, sc.M) + 2 * np.eye(sc.M)
        td = transform_data(x, x_l, factor_waveform_subspace(sc.C))
        td_t = transform_data(x, x_l, factor_waveform_subspace(t @ sc.C))
        assert np.linalg.norm(td_t.s_plus - td.s_plus) <= 1e-10 * np.linalg.norm(td.s_plus)
        for stat in (glrgdd_ru, amgdd_ru):
            base = stat(td, sc.A).value
            moved = stat(td_t, sc.A).value
            assert abs(moved - base) <= 1e-8 * (1.0 + abs(base))
