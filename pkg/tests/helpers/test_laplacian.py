#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import math
import time

import numpy as np
import pytest
import sympy

from app.helpers.complex import Filtration, Simplex, build_rips, complex_at
from app.helpers.exceptions import InvalidParameter
from app.helpers import laplacian as laplacian_module
from app.helpers.laplacian import (
    SingularGram,
    persistent_basis,
    persistent_sheaf_laplacian,
    sheaf_laplacian,
)
from app.helpers.points_parser import LabeledPointCloud
from app.helpers.sheaf import SheafSpec, coboundary_matrix
from app.helpers.spectra import spectrum
from tests.resources.resources import random_cloud

UNIT_TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
PATH_L0 = np.array([[1 / 3, -1 / 3], [-1 / 3, 1 / 3]])


def random_instances(seed, count, n_max=10):
    """Yields (cloud, filtration, t, p) for random labeled Rips filtrations."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        cloud = random_cloud(rng, int(rng.integers(3, n_max + 1)), int(rng.choice([2, 3])))
        f = build_rips(cloud, 0.8, 2)
        t = float(rng.uniform(0.0, 0.6))
        p = float(rng.choice([0.0, rng.uniform(0.0, 0.4)]))
        yield rng, cloud, f, t, p


class TestSheafLaplacian:
    def test_unit_triangle(self):
        q0, q1, q2 = 0.7, -1.3, 2.0
        cloud = LabeledPointCloud(UNIT_TRIANGLE, [q0, q1, q2])
        f = build_rips(cloud, 2.0)
        view = complex_at(f, f.max_birth)
        s = SheafSpec.from_cloud(cloud)
        big_q = q0 ** 2 + q1 ** 2 + q2 ** 2

        delta0 = sheaf_laplacian(view, s, 0).matrix
        expected = np.array(
            [
                [q1 ** 2 + q2 ** 2, -q0 * q1, -q0 * q2],
                [-q0 * q1, q0 ** 2 + q2 ** 2, -q1 * q2],
                [-q0 * q2, -q1 * q2, q0 ** 2 + q1 ** 2],
            ]
        )
        np.testing.assert_allclose(delta0, expected, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(spectrum(delta0), [0.0, big_q, big_q], atol=1e-12 * big_q)

        delta1 = sheaf_laplacian(view, s, 1).matrix
        np.testing.assert_allclose(delta1, big_q * np.eye(3), atol=1e-12 * big_q)

    def test_single_vertex(self):
        f = Filtration([(Simplex.of(0), 0.0)])
        delta = sheaf_laplacian(complex_at(f, 0.0), SheafSpec.constant(), 0)
        assert delta.size == 1
        np.testing.assert_array_equal(delta.matrix, np.zeros((1, 1)))


class TestPersistentBasis:
    def test_path_graph(self, path_filtration):
        view_tp = complex_at(path_filtration, 1.0)
        view_t = complex_at(path_filtration, 0.0)
        d_full = coboundary_matrix(view_tp, SheafSpec.constant(), 0)
        new = [s for s in d_full.col_index if s not in view_t]
        subspace = persistent_basis(d_full, new)
        assert subspace.dim == 1
        assert subspace.gram[0, 0] == pytest.approx(3.0)
        # span{13 + 34 + 42}: all entries of equal magnitude
        basis = subspace.basis[:, 0]
        assert np.allclose(np.abs(basis), np.abs(basis[0]))
        assert np.allclose(d_full.matrix[:, d_full.column_positions(new)].T @ basis, 0.0)

    def test_path_graph_exact(self, path_filtration):
        view_tp = complex_at(path_filtration, 1.0)
        view_t = complex_at(path_filtration, 0.0)
        d_full = coboundary_matrix(view_tp, SheafSpec.constant(), 0, exact=True)
        new = [s for s in d_full.col_index if s not in view_t]
        subspace = persistent_basis(d_full, new)
        assert subspace.gram == sympy.Matrix([[3]])

    def test_no_new_simplices(self, square_cloud):
        f = build_rips(square_cloud, 2.0)
        view = complex_at(f, 1.0)
        d_full = coboundary_matrix(view, SheafSpec.constant(), 0)
        subspace = persistent_basis(d_full, [])
        np.testing.assert_array_equal(subspace.basis, np.eye(4))
        np.testing.assert_array_equal(subspace.gram, np.eye(4))

    def test_empty_domain(self, square_cloud):
        f = build_rips(square_cloud, 2.0)
        view_t = complex_at(f, 0.0)
        view_tp = complex_at(f, 0.5)
        d_full = coboundary_matrix(view_tp, SheafSpec.constant(), 1)
        subspace = persistent_basis(d_full, [])
        assert subspace.dim == 0
        assert view_t.count(1) == 0


class TestPersistentSheafLaplacian:
    def test_scale(self, path_filtration):
        laplacian = persistent_sheaf_laplacian(path_filtration, SheafSpec.constant(), 0, 0.0, 1.0)
        assert laplacian.scale == 1.0
        cloud = LabeledPointCloud(UNIT_TRIANGLE, [2.0, 1.0, 1.0])
        f = build_rips(cloud, 2.0, 2)
        up = sheaf_laplacian(complex_at(f, 1.5), SheafSpec.from_cloud(cloud), 0)
        assert up.scale == pytest.approx(4.0)

    def test_singular_gram(self, path_filtration, monkeypatch):
        def fail(matrix):
            raise np.linalg.LinAlgError("not positive definite")

        monkeypatch.setattr(laplacian_module, "cho_factor", fail)
        with pytest.raises(SingularGram) as error:
            persistent_sheaf_laplacian(path_filtration, SheafSpec.constant(), 0, 0.0, 1.0)
        assert error.value.kwargs == {"q": 0, "basis_dim": 1}

    def test_path_graph(self, path_filtration):
        start = time.perf_counter()
        laplacian = persistent_sheaf_laplacian(path_filtration, SheafSpec.constant(), 0, 0.0, 1.0)
        elapsed = time.perf_counter() - start
        assert laplacian.index == (Simplex.of(1), Simplex.of(2))
        assert np.max(np.abs(laplacian.matrix - PATH_L0)) <= 1e-14
        np.testing.assert_allclose(spectrum(laplacian), [0.0, 2 / 3], atol=1e-12)
        # generous bound, the computation itself is far below a millisecond
        assert elapsed < 1.0

    def test_path_graph_exact(self, path_filtration):
        laplacian = persistent_sheaf_laplacian(
            path_filtration, SheafSpec.constant(), 0, 0.0, 1.0, exact=True
        )
        third = sympy.Rational(1, 3)
        assert laplacian.exact
        assert laplacian.matrix == sympy.Matrix([[third, -third], [-third, third]])
        np.testing.assert_allclose(laplacian.as_array(), PATH_L0, atol=1e-15)

    def test_two_vertices_merge(self):
        f = Filtration(
            [
                (Simplex.of(0), 0.0),
                (Simplex.of(1), 0.0),
                (Simplex.of(0, 1), 1.0),
            ]
        )
        laplacian = persistent_sheaf_laplacian(f, SheafSpec.constant(), 0, 0.0, 1.0)
        np.testing.assert_allclose(laplacian.matrix, [[1.0, -1.0], [-1.0, 1.0]], atol=1e-14)

    def test_p_zero_on_unit_triangle(self):
        cloud = LabeledPointCloud(UNIT_TRIANGLE, [0.5, 1.5, -1.0])
        f = build_rips(cloud, 2.0)
        s = SheafSpec.from_cloud(cloud)
        persistent = persistent_sheaf_laplacian(f, s, 0, f.max_birth, 0.0)
        plain = sheaf_laplacian(complex_at(f, f.max_birth), s, 0)
        np.testing.assert_allclose(persistent.matrix, plain.matrix, rtol=1e-10, atol=1e-12)

    def test_no_q_simplices(self, square_cloud):
        f = build_rips(square_cloud, 2.0)
        laplacian = persistent_sheaf_laplacian(f, SheafSpec.constant(), 1, 0.5, 1.0)
        assert laplacian.size == 0
        assert spectrum(laplacian).size == 0

    @pytest.mark.parametrize("q, p", [(0, -0.1), (-1, 0.0)])
    def test_invalid(self, path_filtration, q, p):
        with pytest.raises(InvalidParameter):
            persistent_sheaf_laplacian(path_filtration, SheafSpec.constant(), q, 0.0, p)

    def test_p_zero_equals_plain_laplacian(self):
        for _, cloud, f, t, _ in random_instances(21, 20):
            s = SheafSpec.from_cloud(cloud)
            view = complex_at(f, t)
            for q in (0, 1):
                persistent = persistent_sheaf_laplacian(f, s, q, t, 0.0).matrix
                plain = sheaf_laplacian(view, s, q).matrix
                scale = max(1.0, np.max(np.abs(plain), initial=0.0))
                assert np.max(np.abs(persistent - plain), initial=0.0) <= 1e-10 * scale

    def test_symmetric_positive_semidefinite(self):
        for _, cloud, f, t, p in random_instances(22, 30):
            s = SheafSpec.from_cloud(cloud)
            for q in (0, 1):
                matrix = persistent_sheaf_laplacian(f, s, q, t, p).matrix
                if matrix.size == 0:
                    continue
                np.testing.assert_array_equal(matrix, matrix.T)
                eigs = spectrum(matrix)
                assert eigs[0] >= -1e-8 * max(1.0, eigs[-1])

    def test_basis_independence(self):
        for rng, cloud, f, t, p in random_instances(23, 20):
            s = SheafSpec.from_cloud(cloud)
            view_t, view_tp = complex_at(f, t), complex_at(f, t + p)
            for q in (0, 1):
                d_full = coboundary_matrix(view_tp, s, q)
                new = [simplex for simplex in d_full.col_index if simplex not in view_t]
                subspace = persistent_basis(d_full, new)
                if subspace.dim == 0 or view_t.count(q) == 0:
                    continue
                old = d_full.column_positions(view_t.simplices_of(q))
                mixing = rng.normal(size=(subspace.dim, subspace.dim)) + 3 * np.eye(subspace.dim)
                basis = subspace.basis @ mixing
                d_star = d_full.matrix[:, old].T @ basis
                recombined = d_star @ np.linalg.solve(basis.T @ basis, d_star.T)
                if q > 0:
                    down = coboundary_matrix(view_t, s, q - 1).matrix
                    recombined = recombined + down @ down.T
                expected = persistent_sheaf_laplacian(f, s, q, t, p).matrix
                scale = max(1.0, np.max(np.abs(expected)))
                assert np.max(np.abs(recombined - expected)) <= 1e-10 * scale

    def test_scaling_law(self):
        for _, cloud, f, t, p in random_instances(24, 20):
            s = SheafSpec.from_cloud(cloud)
            for q in (0, 1):
                base = spectrum(persistent_sheaf_laplacian(f, s, q, t, p))
                scaled = spectrum(persistent_sheaf_laplacian(f, s.scaled(3), q, t, p))
                np.testing.assert_allclose(
                    scaled, 9 * base, rtol=1e-10, atol=1e-10 * max(1.0, 9 * np.max(np.abs(base), initial=0.0))
                )

    def test_orientation_invariance(self):
        for rng, cloud, f, t, p in random_instances(25, 20):
            s = SheafSpec.from_cloud(cloud)
            for _ in range(5):
                permutation = rng.permutation(len(cloud))
                moved = cloud.permuted(permutation)
                f_moved = build_rips(moved, 0.8, 2)
                s_moved = SheafSpec.from_cloud(moved)
                for q in (0, 1):
                    before = spectrum(persistent_sheaf_laplacian(f, s, q, t, p))
                    after = spectrum(persistent_sheaf_laplacian(f_moved, s_moved, q, t, p))
                    np.testing.assert_allclose(after, before, rtol=0, atol=1e-9)
