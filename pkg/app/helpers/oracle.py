#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Brute-force verifiers for the persistent sheaf Laplacian pipeline.

They work from coboundary/boundary matrices and singular values only, never
from a Laplacian or from the elimination used by the pipeline.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.linalg import null_space, svdvals

from app.helpers.complex import ComplexView, Filtration, complex_at, incidence_sign
from app.helpers.sheaf import SheafSpec, coboundary_matrix

RANK_TOL = 1e-10


@dataclass(frozen=True)
class RankReport:
    name: str
    rank: int
    singular_values: Tuple[float, ...]


def numerical_rank(matrix: np.ndarray, name: str = "", tol: float = RANK_TOL) -> RankReport:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        return RankReport(name, 0, ())
    values = svdvals(matrix)
    rank = int(np.count_nonzero(values > tol * values[0])) if values[0] > 0 else 0
    return RankReport(name, rank, tuple(float(v) for v in values))


def _rank(matrix: np.ndarray, tol: float) -> int:
    return numerical_rank(matrix, tol=tol).rank


def _views(f: Filtration, t: float, p: float) -> Tuple[ComplexView, ComplexView]:
    return complex_at(f, t), complex_at(f, t + p)


def persistent_betti_oracle(
    f: Filtration, s: SheafSpec, q: int, t: float, p: float, tol: float = RANK_TOL
) -> int:
    """dim pi(ker d_q^{t+p}) - dim im d_{q-1}^t, from ranks alone."""
    view_t, view_tp = _views(f, t, p)
    d_full = coboundary_matrix(view_tp, s, q)
    new_columns = [
        i for i, simplex in enumerate(d_full.col_index) if simplex not in view_t
    ]
    kernel = d_full.shape[1] - _rank(d_full.matrix, tol)
    kernel_on_new = len(new_columns) - _rank(d_full.matrix[:, new_columns], tol)
    image_below = 0
    if q > 0:
        image_below = _rank(coboundary_matrix(view_t, s, q - 1).matrix, tol)
    return kernel - kernel_on_new - image_below


def _boundary(view: ComplexView, q: int) -> np.ndarray:
    """Real boundary matrix of degree q: (q-1)-simplices x q-simplices."""
    rows = view.simplices_of(q - 1)
    cols = view.simplices_of(q)
    matrix = np.zeros((len(rows), len(cols)))
    for j, simplex in enumerate(cols):
        for i, face in enumerate(rows):
            matrix[i, j] = incidence_sign(face, simplex)
    return matrix


def homology_betti_oracle(
    f: Filtration, q: int, t: float, p: float, tol: float = RANK_TOL
) -> int:
    """Persistent Betti number rank(H_q(X_t) -> H_q(X_{t+p})) over the reals:
    rank [Z_q^t | B_q^{t+p}] - rank B_q^{t+p}."""
    view_t, view_tp = _views(f, t, p)
    n_t = view_t.count(q)
    if n_t == 0:
        return 0
    if q > 0:
        cycles = null_space(_boundary(view_t, q), rcond=tol)
    else:
        cycles = np.eye(n_t)
    if cycles.shape[1] == 0:
        return 0
    # embed the cycles of X_t into C_q(X_{t+p})
    positions = [view_tp.index_of(q)[simplex] for simplex in view_t.simplices_of(q)]
    embedded = np.zeros((view_tp.count(q), cycles.shape[1]))
    embedded[positions] = cycles
    boundaries = _boundary(view_tp, q + 1)
    if boundaries.shape[1] == 0:
        return _rank(embedded, tol)
    return _rank(np.hstack([embedded, boundaries]), tol) - _rank(boundaries, tol)


def cochain_map_check(f: Filtration, s: SheafSpec, q: int, t: float, p: float) -> float:
    """max |pi d_q^{t+p} - d_q^t pi| over the canonical bases, where pi drops
    the coordinates of simplices born after t."""
    view_t, view_tp = _views(f, t, p)
    d_tp = coboundary_matrix(view_tp, s, q).matrix
    d_t = coboundary_matrix(view_t, s, q).matrix

    def projection(degree: int) -> np.ndarray:
        matrix = np.zeros((view_t.count(degree), view_tp.count(degree)))
        for i, simplex in enumerate(view_t.simplices_of(degree)):
            matrix[i, view_tp.index_of(degree)[simplex]] = 1.0
        return matrix

    residual = projection(q + 1) @ d_tp - d_t @ projection(q)
    return float(np.max(np.abs(residual), initial=0.0))
