import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgvqd.optim import OptimizerConfig, Status, minimize, strong_wolfe, LineSearchError

# tight Wolfe constants make the line search nearly exact
EXACT = OptimizerConfig(wolfe_c1=1e-8, wolfe_c2=1e-6)


def rosen(x):
    return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2


def rosen_grad(x):
    return np.array([-2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] ** 2),
                     200 * (x[1] - x[0] ** 2)])


def test_one_dimensional_quadratic():
    x, fx, trace = minimize(lambda x: (x[0] - 3) ** 2, lambda x: 2 * (x - 3), [0.0])
    assert x[0] == pytest.approx(3.0)
    assert trace.status is Status.GRAD_CONVERGED
    assert trace.iterations == 1


def test_one_minus_sin():
    x, fx, trace = minimize(lambda t: 1 - np.sin(t[0]), lambda t: np.array([-np.cos(t[0])]),
                            [0.1])
    assert x[0] == pytest.approx(np.pi / 2, abs=1e-7)
    assert fx == pytest.approx(0.0, abs=1e-14)


def test_rosenbrock():
    x, fx, trace = minimize(rosen, rosen_grad, [-1.2, 1.0])
    np.testing.assert_allclose(x, [1.0, 1.0], atol=1e-6)
    assert trace.status is Status.GRAD_CONVERGED
    assert np.all(np.diff(trace.costs) <= 0)


@settings(max_examples=20, deadline=None)
@given(d=st.integers(1, 6), seed=st.integers(0, 2 ** 31))
def test_quadratic_terminates_in_d_steps_with_exact_line_search(d, seed):
    rng = np.random.default_rng(seed)
    q = rng.normal(size=(d, d))
    a = q @ q.T + d * np.eye(d)
    b = rng.normal(size=d)
    x, _, trace = minimize(lambda x: 0.5 * x @ a @ x - b @ x, lambda x: a @ x - b,
                           np.zeros(d), EXACT)
    np.testing.assert_allclose(x, np.linalg.solve(a, b), atol=1e-7)
    assert trace.iterations <= d


def test_max_iters_status():
    _, _, trace = minimize(rosen, rosen_grad, [-1.2, 1.0], OptimizerConfig(max_iters=3))
    assert trace.status is Status.MAX_ITERS
    assert trace.iterations == 3


def test_line_search_failure_status():
    # gradient with the wrong sign: every "descent" step goes uphill
    _, _, trace = minimize(lambda x: float(x @ x), lambda x: -2 * x, [1.0, 2.0])
    assert trace.status is Status.LINE_SEARCH_FAILED


def test_callback_sees_every_record():
    seen = []
    _, _, trace = minimize(rosen, rosen_grad, [0.0, 0.0], callback=seen.append)
    assert seen == trace.records
    assert [r.iteration for r in seen] == list(range(len(seen)))


def test_strong_wolfe_point():
    cfg = OptimizerConfig()
    f = lambda a: ((a - 2.0) ** 2, 2 * (a - 2.0), None)  # noqa: E731
    alpha, value, _ = strong_wolfe(f, 4.0, -4.0, cfg, 1.0)
    assert value <= 4.0 + cfg.wolfe_c1 * alpha * -4.0
    assert abs(2 * (alpha - 2.0)) <= cfg.wolfe_c2 * 4.0


def test_strong_wolfe_rejects_ascent():
    with pytest.raises(LineSearchError):
        strong_wolfe(lambda a: (a, 1.0, None), 0.0, 1.0, OptimizerConfig())


def test_nonfinite_start():
    with pytest.raises(ValueError):
        minimize(lambda x: np.nan, lambda x: x, [1.0])


@pytest.mark.parametrize("kwargs", [
    dict(wolfe_c1=0.5, wolfe_c2=0.4), dict(wolfe_c2=1.0), dict(grad_tol=0.0),
    dict(max_iters=0),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        OptimizerConfig(**kwargs)
