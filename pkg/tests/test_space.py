"""Tests for space validation and the JSON space document."""

import json

import numpy as np
import pytest

from mmbench.errors import (
    AsymmetricDistance,
    InvalidDistance,
    MassNotOne,
    MMError,
    NonpositiveWeight,
    ShapeMismatch,
    SpaceFileError,
    TriangleViolation,
)
from mmbench.space import SpaceIO, SpaceParams, diameter, validate_space


def test_valid_two_point(two_point):
    """Test that a symmetric two-point space validates."""
    assert two_point.n == 2
    assert diameter(two_point) == 1.0
    assert two_point.weight.sum() == 1.0
    assert not two_point.dist.flags.writeable


def test_asymmetric_matrix_is_rejected():
    """Test that an asymmetric matrix names the offending pair."""
    with pytest.raises(AsymmetricDistance) as excinfo:
        validate_space([[0, 1], [2, 0]], [0.5, 0.5])
    assert excinfo.value.kind == "AsymmetricDistance"
    assert {excinfo.value.details["i"], excinfo.value.details["j"]} == {0, 1}


def test_triangle_violation_names_triple():
    """Test that d(0,2) > d(0,1) + d(1,2) is reported."""
    d = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
    with pytest.raises(TriangleViolation) as excinfo:
        validate_space(d, [1 / 3] * 3)
    details = excinfo.value.details
    assert details["j"] == 1
    assert details["excess"] == pytest.approx(3.0)


def test_triangle_check_can_be_skipped():
    """Test that trusted geodesic matrices skip the triangle scan."""
    d = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
    space = validate_space(d, [1 / 3] * 3, check_triangle=False)
    assert diameter(space) == 5.0


def test_weight_errors():
    """Test nonpositive weights and masses far from one."""
    with pytest.raises(NonpositiveWeight):
        validate_space([[0, 1], [1, 0]], [1.0, 0.0])
    with pytest.raises(MassNotOne):
        validate_space([[0, 1], [1, 0]], [0.5, 0.6])


def test_renormalizes_tiny_mass_error():
    """Test that weights within 1e-9 of one are renormalized."""
    space = validate_space([[0, 1], [1, 0]], [0.5, 0.5 + 5e-10])
    assert space.weight.sum() == pytest.approx(1.0, abs=1e-15)


def test_distance_errors():
    """Test the diagonal, off-diagonal zero and shape checks."""
    with pytest.raises(InvalidDistance):
        validate_space([[1, 1], [1, 0]], [0.5, 0.5])
    with pytest.raises(InvalidDistance):
        validate_space([[0, 0], [0, 0]], [0.5, 0.5])
    with pytest.raises(InvalidDistance):
        validate_space([[0, np.inf], [np.inf, 0]], [0.5, 0.5])
    with pytest.raises(ShapeMismatch):
        validate_space([[0, 1, 1], [1, 0, 1]], [0.5, 0.5])
    with pytest.raises(ShapeMismatch):
        validate_space([[0, 1], [1, 0]], [1.0])


def test_errors_are_machine_readable():
    """Test the error document used by the CLI."""
    error = MassNotOne("weights sum to 2", {"total": 2.0})
    assert isinstance(error, ValueError)
    assert error.to_dict() == {"error": "MassNotOne", "message": "weights sum to 2",
                               "details": {"total": 2.0}}


def test_distances_and_permutation(cycle6):
    """Test distinct distances and relabelling."""
    assert cycle6.distances().tolist() == [1.0, 2.0, 3.0]
    moved = cycle6.permuted([3, 4, 5, 0, 1, 2])
    assert moved.dist[0, 3] == 3.0
    assert np.array_equal(np.sort(moved.weight), np.sort(cycle6.weight))


def test_document_round_trip_is_exact(generator):
    """Test that a dumped document reads back bit for bit."""
    space = generator.random_metric(7, seed=3)
    again = SpaceIO.loads(SpaceIO.dumps(space))
    assert np.array_equal(again.dist, space.dist)
    assert np.array_equal(again.weight, space.weight)


def test_document_errors(tmp_path):
    """Test missing files, bad JSON and inconsistent n."""
    with pytest.raises(FileNotFoundError, match="File not found"):
        SpaceIO.load(tmp_path / "missing.json")
    with pytest.raises(SpaceFileError):
        SpaceIO.loads("{not json")
    with pytest.raises(SpaceFileError):
        SpaceIO.loads(json.dumps({"dist": [[0]]}))
    with pytest.raises(ShapeMismatch):
        SpaceIO.loads(json.dumps({"n": 3, "dist": [[0, 1], [1, 0]], "weight": [0.5, 0.5]}))


@pytest.mark.parametrize("document", [
    {"dist": [[0, 1], [1]], "weight": [0.5, 0.5]},
    {"dist": [[0, "far"], ["far", 0]], "weight": [0.5, 0.5]},
    {"dist": [[0, 1], [1, 0]], "weight": {"a": 1}},
    {"dist": [[0, 1], [1, 0]], "weight": [0.5, 0.5], "labels": 7},
])
def test_malformed_documents_raise_domain_errors(document):
    """Test that ragged or non-numeric documents raise ShapeMismatch, not a bare ValueError."""
    with pytest.raises(ShapeMismatch) as excinfo:
        SpaceIO.loads(json.dumps(document))
    assert excinfo.value.to_dict()["error"] == "ShapeMismatch"


@pytest.mark.parametrize("n", [2.5, "2", True])
def test_declared_size_must_be_an_integer(n):
    """Test that a non-integer n field is a SpaceFileError."""
    document = {"n": n, "dist": [[0, 1], [1, 0]], "weight": [0.5, 0.5]}
    with pytest.raises(SpaceFileError, match="must be an integer"):
        SpaceIO.loads(json.dumps(document))


def test_labels_survive_dump(tmp_path):
    """Test that labels are written and read back."""
    space = validate_space([[0, 1], [1, 0]], [0.25, 0.75], labels=["a", "b"])
    path = tmp_path / "space.json"
    SpaceIO.dump(space, path)
    assert SpaceIO.load(path).labels == ("a", "b")


def test_space_params():
    """Test the interpolation index and range checks."""
    params = SpaceParams(rho=0.5, r=1.75)
    assert params.k == 3
    params.validate()
    with pytest.raises(ValueError):
        SpaceParams(epsilon=1.0).validate()
    with pytest.raises(ValueError):
        SpaceParams(rho=0.0).validate()
