#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from typing import List, Tuple

from app.helpers.complex import Filtration, Simplex
from app.helpers.points_parser import ParseError, parse_real


def parse_filtration_file(text: str) -> Filtration:
    """Parses "birth v0 v1 ... vk" lines into a validated filtration.

    Lines may come in any order; '#' starts a comment. Birth units are
    whatever the producing tool emitted (e.g. squared radii for alpha
    complexes).

    Raises:
        ParseError -- Malformed line, with its line number.
        ClosureViolation -- A simplex whose face is missing or born later.
        DuplicateSimplex -- A simplex listed twice.
    """
    entries: List[Tuple[Simplex, float]] = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        tokens = line.split("#", 1)[0].split()
        if not tokens:
            continue
        if len(tokens) < 2:
            raise ParseError(
                f"Line {line_number}: expected 'birth v0 ... vk'", line=line_number
            )
        birth = parse_real(tokens[0], line_number, "birth")
        try:
            vertices = [int(token) for token in tokens[1:]]
        except ValueError:
            raise ParseError(
                f"Line {line_number}: vertices must be integers", line=line_number
            )
        if len(set(vertices)) != len(vertices) or min(vertices) < 0:
            raise ParseError(
                f"Line {line_number}: vertices must be distinct and non-negative",
                line=line_number,
            )
        entries.append((Simplex.of(*vertices), birth))
    return Filtration(entries)


def write_filtration_file(f: Filtration) -> str:
    return "".join(
        f"{birth!r} {' '.join(str(v) for v in simplex.vertices)}\n"
        for simplex, birth in f
    )
