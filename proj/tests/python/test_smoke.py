import numpy as np
import pytest

import havs


def scene(seed=0):
    return havs.generate_scene(seed=seed, n_background=3000, n_instances=8)


def test_havs_defaults():
    pts = scene()["points"]
    out = havs.sample(pts, 500)
    assert out["method"] == "havs"
    assert out["points"].shape == (500, 3)
    assert len(np.unique(out["indices"])) == 500
    assert np.array_equal(out["points"], pts[out["indices"]])
    assert [l["target"] for l in out["avs_log"]] == [100, 400]
    assert set(out["layer_of"]) == {1, 2}


def test_every_method_runs():
    pts = scene(1)["points"]
    for method in ["fps", "rps", "ids", "havs"]:
        assert havs.sample(pts, 200, method=method)["points"].shape == (200, 3)
    assert havs.sample(pts, 200, method="rvs", voxel=[1.0])["points"].shape == (200, 3)
    fake = havs.sample(pts, 200, representative="average")
    assert fake["indices"].size == 0


def test_deterministic_and_permutation_invariant():
    pts = scene(2)["points"]
    a = havs.sample(pts, 300)["points"]
    b = havs.sample(pts[::-1].copy(), 300, threads=2)["points"]
    assert sorted(map(tuple, a)) == sorted(map(tuple, b))


def test_avs_contract():
    pts = scene(3)["points"]
    r = havs.avs(pts, 400)
    assert r["converged"]
    assert 400 <= r["count"] <= 420
    assert r["iterations"] <= 20


def test_metrics():
    pts = np.array([[0, 0, 0], [1, 0, 0], [3, 0, 0]], dtype=float)
    s = havs.spacing(pts)
    assert s["min"] == 1.0
    assert s["max"] == 2.0
    pr, ir = havs.recall(pts, [-1, 0, 1], [0, 1])
    assert pr == 0.5
    assert ir == 0.5


def test_io_round_trip(tmp_path):
    pts = np.array([[1.5, -2.25, 3.0], [0.0, 0.0, 0.0]])
    havs.write_cloud(tmp_path / "a.bin", pts)
    back = havs.read_cloud(tmp_path / "a.bin")
    assert np.array_equal(back["points"], pts)
    bad = tmp_path / "bad.xyz"
    bad.write_text("0 0 0\n1 nan 2\n")
    with pytest.raises(havs.HavsError) as e:
        havs.read_cloud(bad)
    assert e.value.line == 2


def test_errors():
    pts = scene()["points"]
    with pytest.raises(havs.HavsError):
        havs.sample(pts, len(pts) + 1)
    with pytest.raises(ValueError):
        havs.sample(pts[:, :2], 10)
