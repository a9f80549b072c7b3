import math

import numpy as np
import pytest

import cpinn


def test_problem_registry():
    assert cpinn.problems() == ["cd1d", "rd1d", "cd-coupled", "rd-coupled", "cd2d-ex2", "cd2d-ex3"]


def test_safe_exp_clamps():
    assert cpinn.safe_exp(0.0) == 1.0
    assert cpinn.safe_exp(-1e6) == math.exp(-20.0)


def test_analytic_values():
    u = cpinn.analytic_solution("cd-coupled", [0.5])
    assert u[0] == pytest.approx(2.0 - math.sqrt(2.0), rel=1e-12)
    assert cpinn.manufactured_source("rd1d", [0.5])[0] == pytest.approx(-8.0, abs=1e-8)
    with pytest.raises(ValueError):
        cpinn.analytic_solution("nope", [0.5])


def test_sampling_shapes():
    assert np.allclose(cpinn.uniform_collocation_1d(3)[:, 0], [0.25, 0.5, 0.75])
    pts = cpinn.lhs_2d(10, 1)
    assert pts.shape == (10, 2)
    for axis in range(2):
        assert sorted(np.floor(pts[:, axis] * 10).astype(int)) == list(range(10))
    assert cpinn.boundary_points(2, 5).shape == (20, 2)


def test_train_and_reload():
    out = cpinn.train("cd1d", epochs=20, log_every=10, points=40, hidden_layers=2, outer_width=8, inner_width=8)
    assert [r["epoch"] for r in out["records"]] == [0, 10, 20]
    assert out["records"][-1]["total"] < out["records"][0]["total"]
    model = cpinn.Model.from_bytes(out["checkpoint"])
    assert model.input_dim == 1 and model.n_components == 1 and model.n_inner == 1
    value, grad, hess = model.jet([0.3])
    assert value == pytest.approx(model([0.3])[0], rel=1e-14)
    assert len(grad) == 1 and len(hess) == 1
    assert model.to_bytes() == out["checkpoint"]


def test_bad_config_raises():
    with pytest.raises(ValueError):
        cpinn.train("cd1d", epochs=0)
