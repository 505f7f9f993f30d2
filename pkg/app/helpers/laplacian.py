#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from dataclasses import dataclass
from typing import Iterable, Tuple, Union

import numpy as np
import sympy
from scipy.linalg import LinAlgError, cho_factor, cho_solve, qr, solve_triangular

from app.helpers.complex import ComplexView, Filtration, Simplex, complex_at
from app.helpers.exceptions import InvalidParameter, PSLException
from app.helpers.sheaf import IndexedMatrix, SheafSpec, coboundary_matrix

RANK_TOL = 1e-10


class SingularGram(PSLException):
    """Exception raised when the Gram matrix of the persistent basis cannot be
    factorized."""


@dataclass(frozen=True)
class SymMatrix:
    """A symmetric matrix acting on the q-cochains of a complex."""

    matrix: Union[np.ndarray, sympy.Matrix]
    index: Tuple[Simplex, ...]
    # largest squared coboundary entry the matrix is built from
    scale: float = 0.0

    @property
    def size(self) -> int:
        return len(self.index)

    @property
    def exact(self) -> bool:
        return isinstance(self.matrix, sympy.MatrixBase)

    def as_array(self) -> np.ndarray:
        if self.exact:
            return np.array(self.matrix.evalf(), dtype=float).reshape(self.size, self.size)
        return self.matrix


@dataclass(frozen=True)
class SubspaceBasis:
    """Basis (columns of B) of the (q+1)-cochains of X_{t+p} whose adjoint
    coboundary lands in C^q(X_t), with its Gram matrix P = B^T B."""

    basis: Union[np.ndarray, sympy.Matrix]
    gram: Union[np.ndarray, sympy.Matrix]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.T) / 2


def _entry_scale(*matrices) -> float:
    largest = 0.0
    for matrix in matrices:
        if isinstance(matrix, sympy.MatrixBase):
            entry = max((abs(float(v)) for v in matrix), default=0.0)
        else:
            entry = float(np.max(np.abs(matrix), initial=0.0))
        largest = max(largest, entry)
    return largest**2


def sheaf_laplacian(view: ComplexView, s: SheafSpec, q: int) -> SymMatrix:
    """Delta^q = D_q^T D_q + D_{q-1} D_{q-1}^T on C^q of the view."""
    up = coboundary_matrix(view, s, q).matrix
    matrix = up.T @ up
    down = np.zeros((0, 0))
    if q > 0:
        down = coboundary_matrix(view, s, q - 1).matrix
        matrix = matrix + down @ down.T
    return SymMatrix(_symmetrize(matrix), view.simplices_of(q), _entry_scale(up, down))


def _null_space_of_transpose(n: np.ndarray, tol: float) -> np.ndarray:
    """Basis of {e : N^T e = 0} from a column-pivoted QR of N^T.

    With N^T Pi = Q [R11 R12], the free coordinates get the identity and the
    pivot coordinates -R11^{-1} R12, as a Gauss elimination would give.
    """
    a = n.T
    k, m = a.shape
    _, r, perm = qr(a, mode="economic", pivoting=True)
    threshold = tol * max(np.max(np.abs(n), initial=0.0), np.finfo(float).tiny)
    diagonal = np.abs(np.diag(r))
    rank = int(np.count_nonzero(diagonal > threshold))
    free = m - rank
    permuted = np.zeros((m, free))
    if rank:
        permuted[:rank] = -solve_triangular(r[:rank, :rank], r[:rank, rank:])
    permuted[rank:] = np.eye(free)
    basis = np.empty_like(permuted)
    basis[perm] = permuted
    return basis


def persistent_basis(
    d_full: IndexedMatrix, new_q_simplices: Iterable[Simplex], tol: float = RANK_TOL
) -> SubspaceBasis:
    """Basis of C^{t,p}_{q+1}: the null space of N^T, N being the columns of
    d_full belonging to q-simplices absent from X_t.

    Arguments:
        d_full -- Degree-q coboundary of X_{t+p}.
        new_q_simplices -- q-simplices of X_{t+p} that are not in X_t.
        tol -- Relative pivot threshold of the rank-revealing factorization.
    """
    new_columns = d_full.column_positions(new_q_simplices)
    m = d_full.shape[0]
    if d_full.exact:
        if not new_columns:
            basis = sympy.eye(m)
        else:
            n = d_full.matrix.extract(list(range(m)), new_columns)
            vectors = n.T.nullspace()
            basis = sympy.Matrix.hstack(*vectors) if vectors else sympy.zeros(m, 0)
        return SubspaceBasis(basis, basis.T * basis)
    if not new_columns:
        basis = np.eye(m)
    elif m == 0:
        basis = np.zeros((0, 0))
    else:
        basis = _null_space_of_transpose(d_full.matrix[:, new_columns], tol)
    return SubspaceBasis(basis, basis.T @ basis)


def persistent_sheaf_laplacian(
    f: Filtration,
    s: SheafSpec,
    q: int,
    t: float,
    p: float,
    tol: float = RANK_TOL,
    exact: bool = False,
) -> SymMatrix:
    """Matrix of the persistent sheaf Laplacian Delta_q^{t,p} on C^q(X_t):

        L = D_{q-1}^t (D_{q-1}^t)^T + D* P^{-1} (D*)^T

    where D* is the adjoint coboundary of X_{t+p} restricted to the basis of
    C^{t,p}_{q+1} and to the q-simplices of X_t.

    Raises:
        InvalidParameter -- If p < 0 or q < 0.
    """
    if p < 0:
        raise InvalidParameter(f"p must be non-negative, got {p}", p=p)
    if q < 0:
        raise InvalidParameter(f"q must be non-negative, got {q}", q=q)
    view_t = complex_at(f, t)
    view_tp = complex_at(f, t + p) if p > 0 else view_t
    return persistent_laplacian_of_views(view_t, view_tp, s, q, tol, exact)


def persistent_laplacian_of_views(
    view_t: ComplexView,
    view_tp: ComplexView,
    s: SheafSpec,
    q: int,
    tol: float = RANK_TOL,
    exact: bool = False,
) -> SymMatrix:
    """Persistent sheaf Laplacian from the views X_t and X_{t+p}.

    Raises:
        SingularGram -- If P cannot be Cholesky factorized.
    """
    index = view_t.simplices_of(q)
    n = len(index)
    d_full = coboundary_matrix(view_tp, s, q, exact=exact)
    new = [simplex for simplex in d_full.col_index if simplex not in view_t]
    subspace = persistent_basis(d_full, new, tol)
    old_columns = d_full.column_positions(index)
    down = None
    scale = _entry_scale(d_full.matrix)
    if q > 0:
        down = coboundary_matrix(view_t, s, q - 1, exact=exact).matrix
        scale = max(scale, _entry_scale(down))

    if exact:
        rows = list(range(d_full.shape[0]))
        d_star = d_full.matrix.extract(rows, old_columns).T * subspace.basis
        matrix = sympy.zeros(n, n)
        if subspace.dim and n:
            matrix += d_star * subspace.gram.LUsolve(d_star.T)
        if down is not None:
            matrix += down * down.T
        return SymMatrix(matrix, index, scale)

    d_star = d_full.matrix[:, old_columns].T @ subspace.basis
    matrix = np.zeros((n, n))
    if subspace.dim and n:
        try:
            factor = cho_factor(subspace.gram)
        except LinAlgError as error:
            raise SingularGram(
                f"Gram matrix of the persistent basis is not positive definite: {error}",
                q=q,
                basis_dim=subspace.dim,
            )
        matrix = matrix + d_star @ cho_solve(factor, d_star.T)
    if down is not None:
        matrix = matrix + down @ down.T
    return SymMatrix(_symmetrize(matrix), index, scale)
