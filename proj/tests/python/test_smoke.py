import numpy as np
import pytest

import icnet


@pytest.fixture(scope="module")
def burgers_dataset():
    cfg = icnet.SolverConfig()
    cfg.nx = cfg.ny = 32
    cfg.t_end = 0.3
    cfg.ic_b1 = 2.0
    cfg.ic_d1 = 0.5
    return icnet.solve_burgers2d(cfg)


def test_solver_output_shape(burgers_dataset):
    ds = burgers_dataset
    assert ds.var_names == ["u", "v"]
    u = ds.array("u")
    assert u.shape == (ds.nt, 32, 32)
    assert np.isfinite(u).all()
    ds.validate()


def test_galilean_library_counts():
    vars2 = icnet.make_velocity_vars(2)
    cands = icnet.enumerate_candidates(vars2, 2, 3, 2)
    lib = icnet.galilean_filter(cands, vars2)
    assert len(lib.terms) == 11
    assert sorted(lib.pinned_names()) == ["u*u_x", "u*v_x", "u_y*v", "v*v_y"]


def test_invariance_certificate():
    vars2 = icnet.make_velocity_vars(2)
    lib = icnet.galilean_filter(icnet.enumerate_candidates(vars2, 2, 3, 2), vars2)
    spec = icnet.BoostSpec()
    spec.mode = icnet.LibraryMode.Galilean
    spec.velocity = [0.3, -0.7]
    rep = icnet.certify_invariance(lib, spec, 20, 1)
    assert rep.max_error < 1e-10


def test_noise_and_sampling(burgers_dataset):
    noise = icnet.NoiseSpec()
    noise.level = 0.05
    noise.seed = 7
    noisy = icnet.add_noise(burgers_dataset, noise)
    u0, u1 = burgers_dataset.array("u"), noisy.array("u")
    assert abs(np.std(u1 - u0) / np.std(u0) - 0.05) < 0.01

    spec = icnet.SampleSpec()
    spec.n_snapshots = 5
    spec.n_spatial_points = 50
    spec.seed = 3
    ts = icnet.sample_points(noisy, spec)
    assert ts.n_points() == 250


def test_stridge_recovers_planted_support():
    rng = np.random.default_rng(0)
    theta = rng.normal(size=(400, 12))
    w = np.zeros(12)
    w[[1, 4, 9]] = [1.5, -2.0, 0.7]
    y = theta @ w + 1e-6 * rng.normal(size=400)
    sol = icnet.train_stridge(theta, y)
    assert sol.support == [1, 4, 9]
    assert np.allclose(sol.coefficients[[1, 4, 9]], [1.5, -2.0, 0.7], atol=1e-3)


def test_baseline_discovery_roundtrip(burgers_dataset):
    vars2 = icnet.make_velocity_vars(2)
    lib = icnet.galilean_filter(icnet.enumerate_candidates(vars2, 2, 3, 2), vars2)
    cfg = icnet.BaselineConfig()
    cfg.n_snapshots = 8
    run = icnet.discover_baseline(lib, burgers_dataset, cfg)
    rhs = run.pde.rhs("u")
    assert rhs["u*u_x"] == pytest.approx(-1.0, rel=0.05)
    assert rhs["u_xx"] == pytest.approx(0.1, rel=0.05)

    back = icnet.DiscoveredPde.from_json(run.pde.to_json())
    assert back.rhs("u") == rhs
    assert "u_t" in run.pde.text()


def test_dataset_io_roundtrip(tmp_path, burgers_dataset):
    icnet.save_dataset(burgers_dataset, str(tmp_path / "ds"))
    back = icnet.load_dataset(str(tmp_path / "ds"))
    assert back.nt == burgers_dataset.nt
    assert np.array_equal(back.array("v"), burgers_dataset.array("v"))


def test_surrogate_fit_smoke(burgers_dataset):
    spec = icnet.SampleSpec()
    spec.n_snapshots = 4
    spec.n_spatial_points = 64
    ts = icnet.sample_points(burgers_dataset, spec)
    ms = icnet.MlpSpec()
    ms.n_inputs = 3
    ms.n_outputs = 2
    ms.hidden = [8, 8]
    net = icnet.Surrogate(ms)
    net.calibrate(ts)
    vals = net.values(np.array([[0.0, 0.0, 0.0], [0.1, 0.5, -0.5]]))
    assert vals.shape == (2, 2)
    assert np.isfinite(vals).all()
