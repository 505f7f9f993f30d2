#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import bisect
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform
from viaa.observability import logging

from app.helpers.exceptions import InvalidParameter, PSLException
from app.helpers.points_parser import LabeledPointCloud

log = logging.get_logger(__name__)


class DuplicatePoints(PSLException):
    """Exception raised when two points of a cloud coincide."""

    exit_code = 5


class ClosureViolation(PSLException):
    """Exception raised when a simplex is born before one of its faces."""

    exit_code = 5


class DuplicateSimplex(PSLException):
    """Exception raised when a simplex occurs twice in a filtration."""

    exit_code = 5


@dataclass(frozen=True, order=True)
class Simplex:
    """An oriented simplex. The orientation is the ascending vertex order."""

    vertices: Tuple[int, ...]

    def __post_init__(self):
        vertices = tuple(int(v) for v in self.vertices)
        if not vertices:
            raise InvalidParameter("A simplex needs at least one vertex")
        if vertices[0] < 0:
            raise InvalidParameter(
                f"Negative vertex index in {vertices}", vertices=vertices
            )
        if any(a >= b for a, b in zip(vertices, vertices[1:])):
            raise InvalidParameter(
                f"Vertices of a simplex must be strictly increasing: {vertices}",
                vertices=vertices,
            )
        object.__setattr__(self, "vertices", vertices)

    @classmethod
    def of(cls, *vertices: int) -> "Simplex":
        """Builds a simplex from vertices given in any order."""
        return cls(tuple(sorted(vertices)))

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    def faces(self) -> Iterator[Tuple[int, "Simplex"]]:
        """Yields (i, face) for every codimension-1 face, the face obtained
        by deleting the i-th vertex."""
        if self.dim == 0:
            return
        for i in range(len(self.vertices)):
            yield i, Simplex(self.vertices[:i] + self.vertices[i + 1 :])

    def is_face_of(self, other: "Simplex") -> bool:
        return set(self.vertices) <= set(other.vertices)

    def __str__(self):
        return "[" + ",".join(str(v) for v in self.vertices) + "]"


class Filtration:
    """A finite filtration: simplices with their birth values.

    Entries are kept sorted by (birth, dim, vertices). Every proper face of a
    simplex is born no later than the simplex itself.
    """

    def __init__(
        self,
        entries: Iterable[Tuple[Simplex, float]],
        points: Optional[LabeledPointCloud] = None,
    ):
        ordered = sorted(
            ((simplex, float(birth)) for simplex, birth in entries),
            key=lambda entry: (entry[1], entry[0].dim, entry[0].vertices),
        )
        births: Dict[Simplex, float] = {}
        for simplex, birth in ordered:
            if simplex in births:
                raise DuplicateSimplex(
                    f"Simplex {simplex} occurs more than once",
                    simplex=str(simplex),
                )
            births[simplex] = birth
        for simplex, birth in ordered:
            for _, face in simplex.faces():
                face_birth = births.get(face)
                if face_birth is None or face_birth > birth:
                    raise ClosureViolation(
                        f"Face {face} of {simplex} is missing or born later",
                        simplex=str(simplex),
                        face=str(face),
                    )
        self._entries: Tuple[Tuple[Simplex, float], ...] = tuple(ordered)
        self._births = births
        self._birth_values = [birth for _, birth in ordered]
        self.points = points

    @property
    def entries(self) -> Tuple[Tuple[Simplex, float], ...]:
        return self._entries

    @property
    def max_birth(self) -> float:
        return self._birth_values[-1] if self._birth_values else 0.0

    @property
    def dim(self) -> int:
        return max((simplex.dim for simplex, _ in self._entries), default=-1)

    def birth(self, simplex: Simplex) -> float:
        return self._births[simplex]

    def up_to(self, t: float) -> Tuple[Tuple[Simplex, float], ...]:
        """Entries with birth <= t."""
        return self._entries[: bisect.bisect_right(self._birth_values, t)]

    def __contains__(self, simplex: Simplex) -> bool:
        return simplex in self._births

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __eq__(self, other):
        if not isinstance(other, Filtration):
            return NotImplemented
        return self._entries == other._entries


@dataclass(frozen=True)
class ComplexView:
    """The complex X_t of a filtration, with deterministic per-dimension
    simplex orderings (lexicographic) and their index maps."""

    filtration: Filtration
    t: float
    simplices: Dict[int, Tuple[Simplex, ...]] = field(repr=False)
    index: Dict[int, Dict[Simplex, int]] = field(repr=False)

    def simplices_of(self, q: int) -> Tuple[Simplex, ...]:
        return self.simplices.get(q, ())

    def index_of(self, q: int) -> Dict[Simplex, int]:
        return self.index.get(q, {})

    def count(self, q: int) -> int:
        return len(self.simplices_of(q))

    @property
    def dim(self) -> int:
        return max(self.simplices, default=-1)

    def __contains__(self, simplex: Simplex) -> bool:
        return simplex in self.index_of(simplex.dim)


def complex_at(f: Filtration, t: float) -> ComplexView:
    """Returns the subcomplex of all simplices born at or before t."""
    by_dim: Dict[int, List[Simplex]] = {}
    for simplex, _ in f.up_to(t):
        by_dim.setdefault(simplex.dim, []).append(simplex)
    simplices = {q: tuple(sorted(group)) for q, group in by_dim.items()}
    index = {
        q: {simplex: i for i, simplex in enumerate(group)}
        for q, group in simplices.items()
    }
    return ComplexView(filtration=f, t=t, simplices=simplices, index=index)


def incidence_sign(face: Simplex, coface: Simplex) -> int:
    """Signed incidence [face:coface]: (-1)^i when face is coface with its
    i-th vertex deleted, 0 when face is not a codimension-1 face."""
    if coface.dim - face.dim != 1:
        return 0
    for i, candidate in coface.faces():
        if candidate == face:
            return -1 if i % 2 else 1
    return 0


def distance_matrix(points: LabeledPointCloud) -> np.ndarray:
    return squareform(pdist(points.coordinates))


def build_rips(points: LabeledPointCloud, r_max: float, dim_max: int = 2) -> Filtration:
    """Builds the Vietoris-Rips filtration of a point cloud.

    A simplex is born at the largest pairwise distance among its vertices;
    only simplices born at or before r_max and of dimension at most dim_max
    are kept.

    Raises:
        DuplicatePoints -- If two points coincide.
        InvalidParameter -- If r_max <= 0 or dim_max < 0.
    """
    if not r_max > 0 or math.isnan(r_max):
        raise InvalidParameter(f"r_max must be positive, got {r_max}", r_max=r_max)
    if dim_max < 0:
        raise InvalidParameter(
            f"dim_max must be non-negative, got {dim_max}", dim_max=dim_max
        )
    n = len(points)
    distances = distance_matrix(points)
    if n > 1:
        i, j = np.triu_indices(n, k=1)
        coinciding = np.flatnonzero(distances[i, j] == 0)
        if coinciding.size:
            a, b = int(i[coinciding[0]]), int(j[coinciding[0]])
            raise DuplicatePoints(
                f"Points {a} and {b} coincide", first=a, second=b
            )

    # lower[v] holds the neighbours u < v within r_max
    lower: List[List[int]] = [
        [u for u in range(v) if distances[u, v] <= r_max] for v in range(n)
    ]
    lower_sets = [set(neighbours) for neighbours in lower]
    entries: List[Tuple[Simplex, float]] = []

    # Incremental expansion: grow every simplex by a common lower neighbour,
    # which is smaller than all its vertices so the tuple stays sorted.
    stack: List[Tuple[Tuple[int, ...], float, List[int]]] = [
        ((v,), 0.0, lower[v]) for v in range(n)
    ]
    while stack:
        vertices, birth, candidates = stack.pop()
        entries.append((Simplex(vertices), birth))
        if len(vertices) - 1 >= dim_max:
            continue
        for v in candidates:
            grown = (v,) + vertices
            grown_birth = max(birth, max(distances[v, w] for w in vertices))
            common = [u for u in candidates if u in lower_sets[v]]
            stack.append((grown, float(grown_birth), common))

    log.debug(
        "Built Rips filtration",
        points=n,
        r_max=r_max,
        dim_max=dim_max,
        simplices=len(entries),
    )
    return Filtration(entries, points=points)
