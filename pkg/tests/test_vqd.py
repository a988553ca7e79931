import numpy as np
import pytest

from wgvqd import decomp, eigoracle, fdm, qsim, vqd
from wgvqd.fdm import Family, WaveguideSpec
from wgvqd.vqd import Classification, VqdConfig


def random_states(rng, n, count, layers=None):
    layers = layers or n
    return qsim.run_ansatz(n, rng.uniform(-np.pi, np.pi, (count, layers, n)), dtype=float)


def test_cost_matches_dense_with_penalty():
    rng = np.random.default_rng(0)
    for fam in Family:
        spec = fdm.unit_spec(1, 1, fam)
        d = decomp.decompose(spec)
        m = fdm.assemble_2d(spec)
        defl = random_states(rng, 2, 2)
        for _ in range(5):
            theta = rng.uniform(-np.pi, np.pi, 4)
            psi = qsim.run_ansatz(2, theta.reshape(2, 2), dtype=float)
            want = psi @ m @ psi + 7.0 * np.sum((defl @ psi) ** 2)
            assert vqd.cost(theta, 2, defl, d, 7.0) == pytest.approx(want, abs=1e-10)
            # k limits how many deflation states count
            assert vqd.cost(theta, 0, defl, d, 7.0) == pytest.approx(psi @ m @ psi, abs=1e-10)


def test_cost_batched():
    rng = np.random.default_rng(1)
    d = decomp.decompose(fdm.unit_spec(2, 1, "TM"))
    thetas = rng.uniform(-np.pi, np.pi, (4, 3, 3))
    states = qsim.run_ansatz(3, thetas, dtype=float)
    batch = vqd.cost(thetas[0].ravel(), 0, None, d, 1.0, layers=3, state=states)
    for b in range(4):
        assert batch[b] == pytest.approx(vqd.cost(thetas[b].ravel(), 0, None, d, 1.0))


@pytest.mark.parametrize("k", [0, 1, 2])
def test_gradient_vs_finite_difference(k):
    rng = np.random.default_rng(10 + k)
    spec = fdm.unit_spec(2, 2, "TM")
    d = decomp.decompose(spec)
    defl = random_states(rng, 4, 2)
    beta = vqd.default_beta(spec)
    for _ in range(5):
        theta = rng.uniform(-np.pi, np.pi, 16)
        ga = vqd.gradient(theta, k, defl, d, beta)
        gf = vqd.gradient_finite_difference(theta, k, defl, d, beta)
        assert np.max(np.abs(ga - gf)) < 1e-6 * np.max(np.abs(gf))


def test_gradient_extended_register_matches():
    rng = np.random.default_rng(2)
    spec = WaveguideSpec(0.015, 0.010, 2, 1, "TE")
    d = decomp.decompose(spec)
    beta = vqd.default_beta(spec)
    defl_thetas = rng.uniform(-np.pi, np.pi, (2, 3, 3))
    defl = qsim.run_ansatz(3, defl_thetas, dtype=float)
    theta = rng.uniform(-np.pi, np.pi, 9)
    np.testing.assert_allclose(vqd.gradient_extended_register(theta, defl_thetas, d, beta),
                               vqd.gradient(theta, 2, defl, d, beta),
                               rtol=1e-10, atol=1e-10 * beta)


def test_spectral_bound_and_beta():
    spec = WaveguideSpec(0.015, 0.010, 3, 2, "TE")
    top = eigoracle.eigensolve_symmetric(fdm.assemble_2d(spec)).values[-1]
    assert top <= vqd.spectral_bound(spec)
    assert vqd.default_beta(spec) > vqd.spectral_bound(spec)
    with pytest.raises(ValueError):
        VqdConfig(spec, beta=vqd.spectral_bound(spec))


@pytest.mark.parametrize("kwargs", [dict(layers=0), dict(trials=0), dict(modes=0),
                                    dict(modes=17), dict(gradient_mode="adjoint")])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        VqdConfig(fdm.unit_spec(2, 2), **kwargs)


def test_config_defaults():
    cfg = VqdConfig(fdm.unit_spec(2, 3))
    assert cfg.layers == 5 and cfg.num_parameters == 25
    assert cfg.beta == pytest.approx(1.25 * 8)


def test_trial_seeds_are_distinct_and_reproducible():
    a = vqd.initial_theta(0, 1, 2, 8)
    np.testing.assert_array_equal(a, vqd.initial_theta(0, 1, 2, 8))
    assert not np.allclose(a, vqd.initial_theta(0, 1, 3, 8))
    assert not np.allclose(a, vqd.initial_theta(0, 2, 2, 8))
    assert np.all(np.abs(a) <= np.pi)


def test_mode_labels():
    spec = WaveguideSpec(0.015, 0.010, 4, 3, "TE")
    assert vqd.mode_label(spec, fdm.discrete_eigenvalue(spec, 1, 0)) == ((1, 0),)
    assert vqd.mode_label(spec, 0.0) == ((0, 0),)
    square = WaveguideSpec(0.01, 0.01, 2, 2, "TE")
    label = vqd.mode_label(square, fdm.discrete_eigenvalue(square, 0, 1))
    assert label == ((0, 1), (1, 0))
    assert vqd.format_label(square, label) == "TE01+TE10"


@pytest.fixture(scope="module")
def tm_small():
    spec = WaveguideSpec(0.015, 0.010, 2, 2, "TM")
    return vqd.solve(VqdConfig(spec, layers=4, modes=3, trials=3, seed=1))


def test_small_solve_finds_tm_modes(tm_small):
    ref = tm_small.reference
    for mode in tm_small:
        assert mode.classification is Classification.CORRECT
        assert mode.energy == pytest.approx(ref.values[mode.k], rel=1e-8)
    spec = tm_small.config.spec
    assert [m.label for m in tm_small] == [vqd.mode_label(spec, v) for v in ref.values[:3]]
    # on a coarse grid TM31 drops below TM12
    assert [m.label for m in tm_small] == [((1, 1),), ((2, 1),), ((3, 1),)]


def test_small_solve_orthogonal_and_ascending(tm_small):
    states = np.array([m.state for m in tm_small])
    gram = np.abs(states @ states.T) ** 2
    assert np.all(gram[~np.eye(3, dtype=bool)] < 1e-3)
    energies = [m.energy for m in tm_small]
    assert energies == sorted(energies)


def test_best_trial_has_lowest_cost(tm_small):
    for mode in tm_small:
        assert len(mode.trials) == 3
        assert mode.best.cost == min(t.cost for t in mode.trials)
        assert all(isinstance(t.classification, Classification) for t in mode.trials)
        assert 0.0 <= mode.success_rate() <= 1.0


def test_solve_is_deterministic(tm_small):
    again = vqd.solve(tm_small.config)
    for a, b in zip(tm_small, again):
        np.testing.assert_array_equal(a.theta, b.theta)


def test_process_pool_matches_serial(tm_small):
    cfg = VqdConfig(tm_small.config.spec, layers=4, modes=1, trials=3, seed=1, workers=2)
    pooled = vqd.solve(cfg)
    np.testing.assert_array_equal(pooled[0].theta, tm_small[0].theta)


def test_te_zero_mode_is_found_and_skipped():
    spec = WaveguideSpec(0.015, 0.010, 2, 1, "TE")
    res = vqd.solve(VqdConfig(spec, layers=3, modes=2, trials=3))
    assert res[0].label == ((0, 0),)
    assert res[0].energy == pytest.approx(0.0, abs=1e-8 * vqd.spectral_bound(spec))
    assert [m.k for m in res.physical_modes()] == [1]
    assert res[1].label == ((1, 0),)


def test_finite_difference_mode_runs():
    spec = WaveguideSpec(0.015, 0.010, 1, 1, "TM")
    res = vqd.solve(VqdConfig(spec, layers=2, modes=2, trials=2, gradient_mode="fd"))
    np.testing.assert_allclose([m.energy for m in res], res.reference.values[:2], rtol=1e-6)


def test_classify_categories():
    eig = eigoracle.eigensolve_symmetric(np.diag([1.0, 2.0, 3.0]))
    assert vqd.classify(np.array([1.0, 0, 0]), 0, eig)[1] is Classification.CORRECT
    assert vqd.classify(np.array([0, 0, 1.0]), 0, eig)[1] is Classification.HIGHER_MODE
    mixed = np.array([0.6, 0.8, 0.0])
    assert vqd.classify(mixed, 1, eig)[1] is Classification.INCORRECT
    # landing on a lower level is not a "higher mode"
    assert vqd.classify(np.array([1.0, 0, 0]), 1, eig)[1] is Classification.INCORRECT
    assert vqd.classify(mixed, 0, None) == (pytest.approx(float("nan"), nan_ok=True), None)


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv("WGVQD_THREADS", "3")
    assert vqd.default_workers() == 3
    monkeypatch.setenv("WGVQD_THREADS", "0")
    assert vqd.default_workers() == 1
