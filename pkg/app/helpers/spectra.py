#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from joblib.parallel import cpu_count
from scipy.linalg import eigh
from viaa.observability import logging

from app.helpers.complex import Filtration, complex_at
from app.helpers.exceptions import InvalidParameter, PSLException
from app.helpers.laplacian import RANK_TOL, SymMatrix, persistent_laplacian_of_views
from app.helpers.sheaf import SheafSpec

log = logging.get_logger(__name__)

TOL_ZERO = 1e-8
SYMMETRY_TOL = 1e-12


class NonSymmetric(PSLException):
    """Exception raised when a matrix handed to the eigensolver is not
    symmetric."""

    exit_code = 8


@dataclass(frozen=True)
class PSLRecord:
    """One sample (q, t, p) of a sweep."""

    q: int
    t: float
    p: float
    n: int
    betti: int
    lambda_min: Optional[float] = None
    spectrum: Optional[Tuple[float, ...]] = None

    def sort_key(self) -> Tuple[int, float, float]:
        return self.q, self.t, self.p


@dataclass(frozen=True)
class SignFlipResult:
    vertex: int
    label: float
    max_deviation: float


def spectrum(matrix) -> np.ndarray:
    """All eigenvalues of a symmetric matrix, ascending.

    Raises:
        NonSymmetric -- If the matrix is not symmetric to 1e-12 relative.
    """
    if isinstance(matrix, SymMatrix):
        matrix = matrix.as_array()
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        return np.zeros(0)
    scale = max(1.0, float(np.max(np.abs(matrix))))
    asymmetry = float(np.max(np.abs(matrix - matrix.T)))
    if asymmetry > SYMMETRY_TOL * scale:
        raise NonSymmetric(
            f"Matrix is not symmetric (max deviation {asymmetry:.3e})",
            asymmetry=asymmetry,
        )
    return eigh(matrix, eigvals_only=True)


def summarize(
    eigs: Sequence[float], tol_zero: float = TOL_ZERO, scale: Optional[float] = None
) -> Tuple[int, Optional[float]]:
    """Returns (betti, lambda_min): the number of eigenvalues within
    tol_zero * scale of zero and the smallest eigenvalue above that cut, None
    when there is none.

    scale defaults to max|lambda|. Both scale with the square of the labels,
    so rescaling the charges leaves betti unchanged.
    """
    eigs = np.asarray(eigs, dtype=float)
    if eigs.size == 0:
        return 0, None
    if not scale:
        scale = float(np.max(np.abs(eigs)))
    cut = tol_zero * scale
    betti = int(np.count_nonzero(np.abs(eigs) <= cut))
    above = eigs[eigs > cut]
    return betti, (float(above.min()) if above.size else None)


def _cell(f, s, q, t, p, tol_zero, rank_tol, keep_spectrum, views) -> PSLRecord:
    # t + p is clamped to the last birth
    top = f.max_birth
    t_p = t + p if t + p <= top else max(t, top)
    view_t = views[t]
    view_tp = view_t if t_p == t else complex_at(f, t_p)
    laplacian = persistent_laplacian_of_views(view_t, view_tp, s, q, rank_tol)
    eigs = spectrum(laplacian)
    betti, lambda_min = summarize(eigs, tol_zero, laplacian.scale)
    log.debug(
        "Computed persistent sheaf Laplacian", q=q, t=t, p=p, n=laplacian.size, betti=betti
    )
    return PSLRecord(
        q=q,
        t=float(t),
        p=float(p),
        n=laplacian.size,
        betti=betti,
        lambda_min=lambda_min,
        spectrum=tuple(float(v) for v in eigs) if keep_spectrum else None,
    )


def sweep(
    f: Filtration,
    s: SheafSpec,
    qs: Sequence[int],
    t_grid: Sequence[float],
    p_list: Sequence[float],
    tol: float = TOL_ZERO,
    rank_tol: float = RANK_TOL,
    keep_spectrum: bool = False,
    n_jobs: int = 1,
) -> List[PSLRecord]:
    """Computes one PSL record per (q, t, p), sorted by (q, t, p).

    Cells are independent; with n_jobs > 1 they are spread over threads.

    Raises:
        InvalidParameter -- Unsorted t grid, negative p or negative q.
    """
    t_grid = [float(t) for t in t_grid]
    if any(a > b for a, b in zip(t_grid, t_grid[1:])):
        raise InvalidParameter("The t grid must be sorted", t_grid=t_grid)
    if any(p < 0 for p in p_list):
        raise InvalidParameter("p values must be non-negative", p_list=list(p_list))
    if any(q < 0 for q in qs):
        raise InvalidParameter("q values must be non-negative", qs=list(qs))
    views = {t: complex_at(f, t) for t in t_grid}
    cells = [(q, t, float(p)) for q in qs for t in t_grid for p in p_list]

    def compute(cell):
        q, t, p = cell
        return _cell(f, s, q, t, p, tol, rank_tol, keep_spectrum, views)

    if n_jobs == 1 or len(cells) < 2:
        records = [compute(cell) for cell in cells]
    else:
        n_jobs = min(cpu_count(), n_jobs) if n_jobs > 0 else n_jobs
        records = Parallel(n_jobs=n_jobs, backend="threading")(
            delayed(compute)(cell) for cell in cells
        )
    log.info("Sweep finished", cells=len(cells), sheaf=s.kind.value)
    return sorted(records, key=PSLRecord.sort_key)


def sign_flip_report(
    f: Filtration,
    s: SheafSpec,
    qs: Sequence[int],
    t_grid: Sequence[float],
    p_list: Sequence[float],
    tol: float = TOL_ZERO,
    rank_tol: float = RANK_TOL,
    n_jobs: int = 1,
) -> List[SignFlipResult]:
    """Flips the sign of one label at a time and reports the largest absolute
    eigenvalue change over all sweep cells. Exploratory only."""
    if s.is_constant:
        raise InvalidParameter("The sign-flip report needs a labeled sheaf")
    baseline = sweep(f, s, qs, t_grid, p_list, tol, rank_tol, True, n_jobs)
    vertices = sorted({simplex.vertices[0] for simplex, _ in f if simplex.dim == 0})
    results = []
    for vertex in vertices:
        labels = np.array(s.labels)
        labels[vertex] = -labels[vertex]
        flipped = sweep(
            f, s.with_labels(labels), qs, t_grid, p_list, tol, rank_tol, True, n_jobs
        )
        deviation = 0.0
        for before, after in zip(baseline, flipped):
            if before.spectrum:
                deviation = max(
                    deviation,
                    float(np.max(np.abs(np.subtract(before.spectrum, after.spectrum)))),
                )
        results.append(SignFlipResult(vertex, float(s.labels[vertex]), deviation))
        log.debug("Sign flip", vertex=vertex, max_deviation=deviation)
    return results
