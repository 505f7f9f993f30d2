#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import os

import numpy as np

from app.helpers.points_parser import LabeledPointCloud


def construct_filename(name):
    __location__ = os.path.realpath(
        os.path.join(os.getcwd(), os.path.dirname(__file__))
    )

    return os.path.join(__location__, f"{name}")


def load_resource(name):
    with open(construct_filename(name), encoding="utf-8") as resource:
        return resource.read()


def random_cloud(rng, n, dim, min_separation=0.1):
    """Random labeled cloud in the unit cube, points at least min_separation
    apart, labels uniform in +-[0.1, 2]."""
    points = []
    while len(points) < n:
        candidate = rng.uniform(0.0, 1.0, dim)
        if all(np.linalg.norm(candidate - p) >= min_separation for p in points):
            points.append(candidate)
    labels = rng.uniform(0.1, 2.0, n) * rng.choice([-1.0, 1.0], n)
    return LabeledPointCloud(np.array(points), labels)
