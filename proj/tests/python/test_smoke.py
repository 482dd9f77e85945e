import math
import os
import tempfile

import numpy as np
import pytest

import stovex


def test_weights_and_blocks():
    w = stovex.weights_from_baxter(stovex.BaxterPoint(0.5, 0.3, 1))
    assert abs(w.b1 + w.c1 - 1.0) < 1e-14
    assert abs(w.delta - math.cosh(0.3)) < 1e-12
    p = stovex.markov_block(6, 3, w)
    assert p["matrix"].shape == (20, 20)
    assert np.allclose(p["matrix"].sum(axis=0), 1.0, atol=1e-12)
    cs = stovex.column_sums(5, 2, w)
    assert cs["matched"] == "holes"
    assert abs(cs["constant"] - (1 + w.b1**3 * w.b2**2)) < 1e-12


def test_commutator_and_asep():
    assert stovex.commutator_norm(4, 0.3, 0.8, 0.5, 1) < 1e-10
    literal, corrected = stovex.asep_relation(3, 0.7)
    assert corrected < 1e-9
    assert literal > 1.0


def test_sampler_and_ensemble():
    w = stovex.weights_from_probabilities(0.6, 0.25)
    occ = [1, 1, 1, 0, 0, 0, 0, 0]
    rows = stovex.evolve(occ, 10, w, seed=3)
    assert len(rows) == 11
    assert all(sum(r) == 3 for r in rows)
    d = stovex.ensemble_density(occ, 5, 200, w, seed=3)
    assert d.shape == (6, 8)
    assert np.allclose(d.sum(axis=1), 3.0)


def test_solver():
    fp = stovex.FluxParams(0.4)
    assert stovex.rh_speed(1.0, -1.0, fp) == -1.0
    assert abs(stovex.speed_inverse(stovex.speed(0.3, fp), fp) - 0.3) < 1e-12
    bp, vals = stovex.domain_wall(1.0, 0.6)
    xs = list(np.linspace(0.005, 0.995, 50))
    prof, drift = stovex.front_track_profile(1.0, bp, vals, 0.4, 0.2, xs)
    for x, r in zip(xs, prof):
        assert r == pytest.approx(stovex.example3(1.0, 0.6, x, 0.2, fp))
    assert drift < 1e-10
    g = stovex.godunov(1.0, bp, vals, 0.4, 0.5, 128)
    assert abs(sum(g) / 128 - 0.2) < 1e-12


def test_run_config():
    with tempfile.TemporaryDirectory() as out:
        code, log = stovex.run_config("verify.max_M = 4\n", "verify", out)
        assert code == 0, log
        assert os.path.exists(os.path.join(out, "report.json"))
        code, _ = stovex.run_config("verify.max_M = 4\nverify.corrupt_c1 = 0.1\n", "verify", out)
        assert code == 1
    with pytest.raises(stovex._stovex.ConfigError):
        stovex.run_config("nope = 1\n", "verify", "unused")
