#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import csv
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial.distance import pdist
from viaa.observability import logging

from app.helpers.exceptions import PSLException

log = logging.get_logger(__name__)

PQR_RECORDS = ("ATOM", "HETATM")


class ParseError(PSLException):
    """Exception raised when an input text cannot be parsed."""

    exit_code = 4


class ZeroLabel(PSLException):
    """Exception raised when a point carries the forbidden label 0."""

    exit_code = 4


class MixedDimensions(PSLException):
    """Exception raised when the points of a cloud differ in dimension."""

    exit_code = 4


class DegenerateScale(PSLException):
    """Exception raised when the charge scaling factor would be zero or
    undefined."""

    exit_code = 9


@dataclass(frozen=True, eq=False)
class LabeledPointCloud:
    """Points in 2D or 3D, each with one nonzero scalar label (a charge)."""

    coordinates: np.ndarray
    labels: np.ndarray
    names: Tuple[Optional[str], ...] = ()

    def __post_init__(self):
        coordinates = np.array(self.coordinates, dtype=float, ndmin=2)
        labels = np.array(self.labels, dtype=float).reshape(-1)
        if coordinates.shape[0] == 0:
            raise ParseError("A point cloud needs at least one point")
        if coordinates.shape[1] not in (2, 3):
            raise MixedDimensions(
                f"Points must be 2D or 3D, got dimension {coordinates.shape[1]}",
                dimension=coordinates.shape[1],
            )
        if labels.shape[0] != coordinates.shape[0]:
            raise ParseError(
                f"{coordinates.shape[0]} points but {labels.shape[0]} labels"
            )
        zero = np.flatnonzero(labels == 0)
        if zero.size:
            raise ZeroLabel(
                f"Point {int(zero[0])} has label 0", point=int(zero[0])
            )
        names = tuple(self.names) or (None,) * coordinates.shape[0]
        coordinates.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "coordinates", coordinates)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "names", names)

    @property
    def dimension(self) -> int:
        return self.coordinates.shape[1]

    def with_labels(self, labels) -> "LabeledPointCloud":
        return replace(self, labels=np.asarray(labels, dtype=float))

    def permuted(self, permutation) -> "LabeledPointCloud":
        """Returns the cloud with point i moved to position permutation[i]."""
        order = np.argsort(np.asarray(permutation))
        return LabeledPointCloud(
            self.coordinates[order],
            self.labels[order],
            tuple(self.names[i] for i in order),
        )

    def __len__(self):
        return self.coordinates.shape[0]


def parse_real(token: str, line_number: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(
            f"Line {line_number}: {what} '{token}' is not a number",
            line=line_number,
            token=token,
        )
    if not math.isfinite(value):
        raise ParseError(
            f"Line {line_number}: {what} '{token}' is not finite",
            line=line_number,
            token=token,
        )
    return value


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def parse_points_csv(text: str) -> LabeledPointCloud:
    """Parses "x,y[,z],q" rows into a labeled point cloud.

    The first non-empty line is treated as a header when its first token is
    not numeric. Blank lines and lines starting with '#' are skipped.

    Raises:
        ParseError -- Malformed row, with its line number.
        ZeroLabel -- A row with q = 0.
        MixedDimensions -- Rows with different column counts.
    """
    coordinates: List[List[float]] = []
    labels: List[float] = []
    columns = None
    seen_content = False
    for line_number, row in enumerate(csv.reader(text.splitlines()), start=1):
        row = [cell.strip() for cell in row]
        if not any(row) or row[0].startswith("#"):
            continue
        if not seen_content:
            seen_content = True
            if not _is_number(row[0]):
                continue
        if len(row) not in (3, 4):
            raise ParseError(
                f"Line {line_number}: expected 'x,y[,z],q', got {len(row)} columns",
                line=line_number,
            )
        if columns is None:
            columns = len(row)
        elif len(row) != columns:
            raise MixedDimensions(
                f"Line {line_number}: {len(row) - 1}D point in a {columns - 1}D cloud",
                line=line_number,
            )
        values = [parse_real(cell, line_number, "value") for cell in row]
        if values[-1] == 0:
            raise ZeroLabel(f"Line {line_number}: label is 0", line=line_number)
        coordinates.append(values[:-1])
        labels.append(values[-1])
    if not coordinates:
        raise ParseError("No points found in the input")
    return LabeledPointCloud(np.array(coordinates), np.array(labels))


def parse_pqr(text: str, drop_zero_charge: bool = False) -> LabeledPointCloud:
    """Parses the ATOM/HETATM records of a PQR file.

    Fields are whitespace separated; the last field is the radius, the one
    before it the charge and the three before that the coordinates.

    Arguments:
        text -- PQR file contents.
        drop_zero_charge -- Skip atoms whose charge is exactly 0 instead of
            failing on them.

    Raises:
        ParseError -- Malformed atom record, with its line number.
        ZeroLabel -- Zero-charge atom while drop_zero_charge is off.
    """
    coordinates: List[List[float]] = []
    labels: List[float] = []
    names: List[str] = []
    dropped = 0
    for line_number, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if not fields or fields[0] not in PQR_RECORDS:
            continue
        if len(fields) < 7:
            raise ParseError(
                f"Line {line_number}: too few fields in {fields[0]} record",
                line=line_number,
            )
        x, y, z, charge, _ = (
            parse_real(token, line_number, "field") for token in fields[-5:]
        )
        if charge == 0:
            if drop_zero_charge:
                dropped += 1
                continue
            raise ZeroLabel(
                f"Line {line_number}: atom has charge 0", line=line_number
            )
        coordinates.append([x, y, z])
        labels.append(charge)
        names.append(fields[2])
    if not coordinates:
        raise ParseError("No ATOM/HETATM records with nonzero charge found")
    if dropped:
        log.info("Dropped zero-charge atoms", dropped=dropped, kept=len(labels))
    return LabeledPointCloud(np.array(coordinates), np.array(labels), tuple(names))


def scale_charges(cloud: LabeledPointCloud) -> Tuple[LabeledPointCloud, float]:
    """Multiplies every label by mean(labels) / (max pairwise distance).

    Returns:
        The rescaled cloud and the factor used.

    Raises:
        DegenerateScale -- Fewer than two points, or a zero mean charge.
    """
    if len(cloud) < 2:
        raise DegenerateScale(
            "Charge scaling needs at least two points", points=len(cloud)
        )
    mean = float(np.mean(cloud.labels))
    if mean == 0:
        raise DegenerateScale("The mean charge is 0, scaling would zero all labels")
    diameter = float(np.max(pdist(cloud.coordinates)))
    if diameter == 0:
        raise DegenerateScale("All points coincide, the maximal distance is 0")
    factor = mean / diameter
    log.debug("Scaling charges", mean_charge=mean, factor=factor)
    return cloud.with_labels(cloud.labels * factor), factor
