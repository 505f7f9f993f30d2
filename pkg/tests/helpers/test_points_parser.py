#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from app.helpers.points_parser import (
    DegenerateScale,
    LabeledPointCloud,
    MixedDimensions,
    ParseError,
    ZeroLabel,
    parse_points_csv,
    parse_pqr,
    scale_charges,
)
from tests.resources.resources import load_resource


class TestParsePointsCsv:
    def test_square(self):
        cloud = parse_points_csv("0,0,1\n1,0,1\n1,1,1\n0,1,1")
        assert len(cloud) == 4
        assert cloud.dimension == 2
        assert list(cloud.labels) == [1.0, 1.0, 1.0, 1.0]
        np.testing.assert_array_equal(cloud.coordinates[2], [1.0, 1.0])

    def test_resource_with_header(self):
        cloud = parse_points_csv(load_resource("square_flipped.csv"))
        assert list(cloud.labels) == [1.0, 1.0, 1.0, -1.0]

    def test_header_and_one_row(self):
        cloud = parse_points_csv("x,y,z,charge\n0.5,1.5,2.5,-0.25\n")
        assert len(cloud) == 1
        assert cloud.dimension == 3
        assert cloud.labels[0] == -0.25

    def test_comments_and_blank_lines(self):
        cloud = parse_points_csv("# water\n\n0,0,0,1\n\n1,0,0,2\n")
        assert len(cloud) == 2

    def test_zero_label(self):
        with pytest.raises(ZeroLabel) as error:
            parse_points_csv("0,0,0,0")
        assert error.value.kwargs["line"] == 1

    def test_mixed_dimensions(self):
        with pytest.raises(MixedDimensions) as error:
            parse_points_csv("0,0,1\n1,0,0,1\n")
        assert error.value.kwargs["line"] == 2

    def test_bad_number(self):
        with pytest.raises(ParseError) as error:
            parse_points_csv("x,y,q\n0,0,1\n1,abc,1\n")
        assert error.value.kwargs["line"] == 3
        assert "Line 3" in error.value.message

    def test_wrong_column_count(self):
        with pytest.raises(ParseError):
            parse_points_csv("1,2\n")

    def test_not_finite(self):
        with pytest.raises(ParseError):
            parse_points_csv("0,nan,1\n")

    def test_empty(self):
        with pytest.raises(ParseError):
            parse_points_csv("x,y,q\n")


class TestParsePqr:
    def test_single_atom(self):
        cloud = parse_pqr("ATOM 1 N ALA 1 0.0 0.0 0.0 -0.3 1.5")
        np.testing.assert_array_equal(cloud.coordinates, [[0.0, 0.0, 0.0]])
        assert list(cloud.labels) == [-0.3]
        assert cloud.names == ("N",)

    def test_zero_charge_rejected(self):
        with pytest.raises(ZeroLabel) as error:
            parse_pqr(load_resource("small.pqr"))
        assert error.value.kwargs["line"] == 5

    def test_zero_charge_dropped(self):
        cloud = parse_pqr(load_resource("small.pqr"), drop_zero_charge=True)
        assert len(cloud) == 3
        assert cloud.names == ("N", "CA", "C")
        np.testing.assert_allclose(pdist(cloud.coordinates), [3.0, 4.0, 5.0])

    def test_hetatm_and_other_records(self):
        text = "REMARK x\nHETATM 1 O HOH 1 1.0 2.0 3.0 -0.8 1.4\nTER\nEND\n"
        cloud = parse_pqr(text)
        np.testing.assert_array_equal(cloud.coordinates, [[1.0, 2.0, 3.0]])

    def test_too_few_fields(self):
        with pytest.raises(ParseError) as error:
            parse_pqr("ATOM 1 N 0.0 0.0\n")
        assert error.value.kwargs["line"] == 1

    def test_bad_coordinate(self):
        with pytest.raises(ParseError):
            parse_pqr("ATOM 1 N ALA 1 x 0.0 0.0 -0.3 1.5")

    def test_no_atoms(self):
        with pytest.raises(ParseError):
            parse_pqr("REMARK nothing here\n")


class TestLabeledPointCloud:
    def test_zero_label(self):
        with pytest.raises(ZeroLabel):
            LabeledPointCloud(np.array([[0.0, 0.0], [1.0, 1.0]]), [1.0, 0.0])

    def test_dimension(self):
        with pytest.raises(MixedDimensions):
            LabeledPointCloud(np.zeros((2, 4)), [1.0, 1.0])

    def test_label_count(self):
        with pytest.raises(ParseError):
            LabeledPointCloud(np.zeros((2, 2)), [1.0])

    def test_permuted(self):
        cloud = LabeledPointCloud(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]), [1.0, 2.0, 3.0])
        moved = cloud.permuted([2, 0, 1])
        # point 0 moves to position 2
        np.testing.assert_array_equal(moved.coordinates[2], [0.0, 0.0])
        assert list(moved.labels) == [2.0, 3.0, 1.0]


class TestScaleCharges:
    def test_factor(self):
        cloud = LabeledPointCloud(
            np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 0.5], [1.0, -0.5]]), [1.0, 1.0, 1.0, 1.0]
        )
        scaled, factor = scale_charges(cloud)
        assert factor == pytest.approx(0.5)
        np.testing.assert_allclose(scaled.labels, [0.5] * 4)
        np.testing.assert_array_equal(scaled.coordinates, cloud.coordinates)

    def test_small_pqr(self):
        cloud = parse_pqr(load_resource("small.pqr"), drop_zero_charge=True)
        scaled, factor = scale_charges(cloud)
        assert factor == pytest.approx(0.1 / 5.0)
        np.testing.assert_allclose(scaled.labels, [-0.006, 0.004, 0.008])

    def test_zero_mean(self):
        cloud = LabeledPointCloud(np.array([[0.0, 0.0], [1.0, 0.0]]), [1.0, -1.0])
        with pytest.raises(DegenerateScale):
            scale_charges(cloud)

    def test_single_point(self):
        cloud = LabeledPointCloud(np.array([[0.0, 0.0]]), [1.0])
        with pytest.raises(DegenerateScale):
            scale_charges(cloud)
