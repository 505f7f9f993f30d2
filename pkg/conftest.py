import os

import pytest

from app.helpers.filtration_parser import parse_filtration_file
from app.helpers.points_parser import parse_points_csv
from tests.resources.resources import load_resource


@pytest.fixture(autouse=True)
def env_setup(monkeypatch):
    # config.yml is looked up in the working directory
    monkeypatch.chdir(os.path.dirname(os.path.abspath(__file__)))


@pytest.fixture
def square_cloud():
    return parse_points_csv(load_resource("square.csv"))


@pytest.fixture
def path_filtration():
    return parse_filtration_file(load_resource("path.filtration"))
