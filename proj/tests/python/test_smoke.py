import json

import numpy as np
import pytest

import ooc


def null_left_vector(L):
    w, V = np.linalg.eig(L.T)
    v = np.real(V[:, np.argmin(np.abs(w))])
    return v / v.sum()


def test_presets_round_trip():
    assert ooc.preset_names() == ["example1", "example2"]
    doc = ooc.preset("example1")
    sc = ooc.scenario_from_dict(doc)
    assert sc.name == "example1"
    assert sc.agents == 5


def test_spectral_matches_numpy():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = 6
        A = np.zeros((n, n))
        for i in range(n):
            A[i, (i - 1) % n] = rng.uniform(0.5, 2.0)  # ring keeps it strongly connected
        A += (rng.random((n, n)) < 0.3) * rng.uniform(0.1, 1.0, (n, n))
        np.fill_diagonal(A, 0.0)
        s = ooc.spectral(A)
        L = np.diag(A.sum(axis=1)) - A
        np.testing.assert_allclose(s["laplacian"], L, atol=1e-14)
        np.testing.assert_allclose(s["rho"], null_left_vector(L), atol=1e-10)
        R = np.diag(s["rho"])
        sym = (R @ L + L.T @ R) / 2
        ev = np.sort(np.linalg.eigvalsh(sym))
        assert abs(ev[0]) < 1e-10
        assert s["lambda2"] == pytest.approx(ev[1], rel=1e-8)


def test_not_strongly_connected_reported():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert ooc.spectral(A)["strongly_connected"] is False


def test_global_optimum_is_stationary():
    sc = ooc.load_scenario("example2")
    s = ooc.global_optimum(sc)
    h = 1e-6
    assert abs(ooc.aggregate_gradient(sc, s)) < 1e-9
    assert ooc.aggregate_gradient(sc, s - h) < 0 < ooc.aggregate_gradient(sc, s + h)


def test_sylvester_against_kron_solve():
    M, N = ooc.companion_pair(4, [10.0, 18.0, 15.0, 6.0])
    Phi, Gamma = ooc.phi_gamma([1.0, 3.0])
    T = ooc.solve_sylvester(M, N, Phi, Gamma)
    s = M.shape[0]
    K = np.kron(Phi.T, np.eye(s)) - np.kron(np.eye(s), M)
    vec = np.linalg.solve(K, np.outer(N, Gamma).reshape(-1, order="F"))
    np.testing.assert_allclose(T, vec.reshape((s, s), order="F"), atol=1e-10)
    psi = ooc.psi_true(T, Gamma)
    np.testing.assert_allclose(psi @ T, Gamma, atol=1e-10)


def test_non_hurwitz_model_rejected():
    with pytest.raises(ooc.NotHurwitz):
        ooc.companion_pair(2, [-1.0, 1.0])


def test_short_run_shapes_and_determinism(tmp_path):
    sc = ooc.load_scenario("example1")
    sc.horizon = 2.0
    a = ooc.run(sc)
    b = ooc.run(sc)
    assert len(a) == 21
    assert a.table().shape == (21, len(a.header))
    assert a.outputs.shape == (21, 5)
    np.testing.assert_array_equal(a.table(), b.table())
    path = tmp_path / "traj.csv"
    a.write_csv(str(path))
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data, a.table())


def test_coordinator_reaches_optimum():
    sc = ooc.load_scenario("example1")
    sc.horizon = 20.0
    out = ooc.coordinator_run(sc, y0=np.array([-5.0, -2.0, 0.0, 2.0, 5.0]))
    assert out["y_r"].shape[1] == 5
    assert np.max(np.abs(out["y_r"][-1] - 3.0)) < 1e-6
    rho = ooc.spectral(sc.adjacency)["rho"]
    np.testing.assert_allclose(out["xi_diag"][-1], rho, atol=1e-6)


def test_verify_returns_report():
    sc = ooc.load_scenario("example1")
    sc.horizon = 1.0
    report = ooc.verify(sc, ooc.run(sc))
    names = {c["name"] for c in report["checks"]}
    assert {"final_output_error", "xi_error", "z_conservation_drift"} <= names
    assert report["z_conservation_drift"] < 1e-8
    json.dumps(report)


def test_schema_error_names_field():
    doc = ooc.preset("example1")
    doc["sim"]["bogus"] = 1
    with pytest.raises(ooc.SchemaError, match="bogus"):
        ooc.scenario_from_dict(doc)


def test_set_field():
    sc = ooc.load_scenario("example1")
    sc.set("beta1", 50.0)
    assert sc.gains["beta1"] == 50.0
