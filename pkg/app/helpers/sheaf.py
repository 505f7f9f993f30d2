#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from scipy.linalg import null_space

from app.helpers.complex import ComplexView, Simplex
from app.helpers.exceptions import InvalidParameter, PSLException
from app.helpers.points_parser import LabeledPointCloud


class ZeroWeight(PSLException):
    """Exception raised when the weight function vanishes on a simplex."""

    exit_code = 7


class UnsupportedDim(PSLException):
    """Exception raised when a weight function is not defined on a
    simplex of the requested dimension."""

    exit_code = 7


class NotAFace(PSLException):
    """Exception raised when a restriction is asked for a non face relation."""

    exit_code = 7


class MissingCoordinates(PSLException):
    """Exception raised when a weight function needs point coordinates that
    are not available (e.g. for an imported filtration)."""

    exit_code = 7


class InvalidSheaf(PSLException):
    """Exception raised when the labels of a sheaf are unusable."""

    exit_code = 7


class SheafKind(Enum):
    CONSTANT = "constant"
    LABELED = "labeled"


def _edge_lengths(simplex: Simplex, coordinates: np.ndarray) -> list:
    vertices = simplex.vertices
    lengths = [
        float(np.linalg.norm(coordinates[a] - coordinates[b]))
        for i, a in enumerate(vertices)
        for b in vertices[i + 1 :]
    ]
    if any(length == 0 for length in lengths):
        raise ZeroWeight(
            f"Simplex {simplex} has an edge of length 0", simplex=str(simplex)
        )
    return lengths


def _weight_default(simplex: Simplex, coordinates: Optional[np.ndarray]) -> float:
    if simplex.dim == 0:
        return 1.0
    if simplex.dim > 2:
        raise UnsupportedDim(
            f"The default weight is not defined on {simplex.dim}-simplices",
            simplex=str(simplex),
        )
    if coordinates is None:
        raise MissingCoordinates(
            "The default weight needs point coordinates", simplex=str(simplex)
        )
    return math.prod(_edge_lengths(simplex, coordinates))


def _weight_sum(simplex: Simplex, coordinates: Optional[np.ndarray]) -> float:
    if simplex.dim < 2:
        return _weight_default(simplex, coordinates)
    if simplex.dim > 2:
        raise UnsupportedDim(
            f"The sum weight is not defined on {simplex.dim}-simplices",
            simplex=str(simplex),
        )
    if coordinates is None:
        raise MissingCoordinates(
            "The sum weight needs point coordinates", simplex=str(simplex)
        )
    return math.fsum(_edge_lengths(simplex, coordinates))


def _weight_one(simplex: Simplex, coordinates: Optional[np.ndarray]) -> float:
    return 1.0


WEIGHTS: Dict[str, Callable[[Simplex, Optional[np.ndarray]], float]] = {
    "default": _weight_default,
    "sum": _weight_sum,
    "one": _weight_one,
}


def stalk_weight(
    f_choice: str, simplex: Simplex, points: Optional[np.ndarray]
) -> float:
    """Evaluates the weight function F on a simplex.

    "default" maps a vertex to 1, an edge to its length and a triangle to the
    product of its edge lengths; "sum" uses the sum of the edge lengths on
    triangles instead; "one" maps everything to 1.
    """
    try:
        weight = WEIGHTS[f_choice]
    except KeyError:
        raise InvalidSheaf(
            f"Unknown weight function '{f_choice}'", weight=f_choice
        )
    if isinstance(points, LabeledPointCloud):
        points = points.coordinates
    return weight(simplex, points)


@dataclass(frozen=True, eq=False)
class SheafSpec:
    """A cellular sheaf with stalks R on every simplex.

    The constant sheaf has identity restrictions. The labeled sheaf restricts
    face <= coface by F(face) * prod(q_j, j in coface - face) / F(coface).
    """

    kind: SheafKind = SheafKind.CONSTANT
    labels: Optional[np.ndarray] = None
    weight: str = "default"
    coordinates: Optional[np.ndarray] = None
    _weights: Dict[Simplex, float] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind is SheafKind.CONSTANT:
            return
        if self.labels is None:
            raise InvalidSheaf("A labeled sheaf needs labels")
        labels = np.array(self.labels, dtype=float).reshape(-1)
        if np.any(labels == 0) or not np.all(np.isfinite(labels)):
            raise InvalidSheaf("Labels must be finite and nonzero")
        if self.weight not in WEIGHTS:
            raise InvalidSheaf(
                f"Unknown weight function '{self.weight}'", weight=self.weight
            )
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        if self.coordinates is not None:
            coordinates = np.array(self.coordinates, dtype=float)
            coordinates.setflags(write=False)
            object.__setattr__(self, "coordinates", coordinates)

    @classmethod
    def constant(cls) -> "SheafSpec":
        return cls(kind=SheafKind.CONSTANT)

    @classmethod
    def labeled(
        cls,
        labels: Sequence[float],
        coordinates: Optional[np.ndarray] = None,
        weight: str = "default",
    ) -> "SheafSpec":
        return cls(
            kind=SheafKind.LABELED,
            labels=np.asarray(labels, dtype=float),
            weight=weight,
            coordinates=coordinates,
        )

    @classmethod
    def from_cloud(cls, cloud: LabeledPointCloud, weight: str = "default") -> "SheafSpec":
        return cls.labeled(cloud.labels, cloud.coordinates, weight)

    @property
    def is_constant(self) -> bool:
        return self.kind is SheafKind.CONSTANT

    def with_labels(self, labels: Sequence[float]) -> "SheafSpec":
        return replace(self, labels=np.asarray(labels, dtype=float), _weights={})

    def scaled(self, c: float) -> "SheafSpec":
        if self.is_constant:
            raise InvalidSheaf("The constant sheaf has no labels to scale")
        return self.with_labels(self.labels * c)

    def label(self, vertex: int) -> float:
        try:
            return float(self.labels[vertex])
        except IndexError:
            raise InvalidSheaf(f"No label for vertex {vertex}", vertex=vertex)

    def weight_of(self, simplex: Simplex) -> float:
        """F(simplex), memoized on the sheaf."""
        value = self._weights.get(simplex)
        if value is None:
            value = stalk_weight(self.weight, simplex, self.coordinates)
            if value == 0:
                raise ZeroWeight(
                    f"Weight vanishes on {simplex}", simplex=str(simplex)
                )
            self._weights[simplex] = value
        return value


@dataclass(frozen=True)
class IndexedMatrix:
    """A matrix whose rows and columns are labeled by simplices.

    The matrix is a numpy array, or a sympy Matrix in exact mode."""

    matrix: Union[np.ndarray, sympy.Matrix]
    row_index: Tuple[Simplex, ...]
    col_index: Tuple[Simplex, ...]

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.row_index), len(self.col_index)

    @property
    def exact(self) -> bool:
        return isinstance(self.matrix, sympy.MatrixBase)

    def column_positions(self, simplices) -> list:
        positions = {simplex: i for i, simplex in enumerate(self.col_index)}
        return [positions[simplex] for simplex in simplices]


def restriction_scalar(s: SheafSpec, face: Simplex, coface: Simplex) -> float:
    """The scalar restriction map of face <= coface (any codimension)."""
    if not face.is_face_of(coface):
        raise NotAFace(
            f"{face} is not a face of {coface}", face=str(face), coface=str(coface)
        )
    if s.is_constant:
        return 1.0
    extra = set(coface.vertices) - set(face.vertices)
    numerator = s.weight_of(face) * math.prod(s.label(v) for v in sorted(extra))
    return numerator / s.weight_of(coface)


def coboundary_matrix(
    view: ComplexView, s: SheafSpec, q: int, exact: bool = False
) -> IndexedMatrix:
    """Matrix of d_q: rows are the (q+1)-simplices and columns the q-simplices
    of the view; entry (tau, sigma) = [sigma:tau] * S(sigma <= tau).

    In exact mode (constant sheaf only) the entries are sympy integers.
    """
    if q < 0:
        raise InvalidParameter(f"q must be non-negative, got {q}", q=q)
    if exact and not s.is_constant:
        raise InvalidSheaf("Exact mode is only available for the constant sheaf")
    rows = view.simplices_of(q + 1)
    cols = view.simplices_of(q)
    columns = view.index_of(q)
    matrix = np.zeros((len(rows), len(cols)))
    for r, coface in enumerate(rows):
        for i, face in coface.faces():
            sign = -1.0 if i % 2 else 1.0
            matrix[r, columns[face]] = sign * restriction_scalar(s, face, coface)
    if exact:
        matrix = sympy.Matrix(len(rows), len(cols), [int(v) for v in matrix.flat])
    return IndexedMatrix(matrix, rows, cols)


def canonical_global_section(view: ComplexView, s: SheafSpec) -> np.ndarray:
    """Vertex part of the global section w_i = q_i / F(v_i); all ones for the
    constant sheaf."""
    vertices = view.simplices_of(0)
    if s.is_constant:
        return np.ones(len(vertices))
    return np.array([s.label(v.vertices[0]) / s.weight_of(v) for v in vertices])


def global_section_basis(view: ComplexView, s: SheafSpec) -> np.ndarray:
    """Orthonormal basis (columns) of ker d_0, i.e. of H^0."""
    d0 = coboundary_matrix(view, s, 0).matrix
    if d0.shape[1] == 0:
        return np.zeros((0, 0))
    if d0.shape[0] == 0:
        return np.eye(d0.shape[1])
    return null_space(d0)
