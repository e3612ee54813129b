import numpy as np
import pytest

from pslearn.core import BoxBounds, RngStream, sample_preference
from pslearn.model import make_model
from pslearn.problems import Problem, get_problem
from pslearn.scalarize import UtopiaState, clip_preference, tchebycheff
from pslearn.train import (
    EsConfig,
    TrainConfig,
    TrainingDivergedError,
    default_sigma,
    es_gradient,
    estimate_grad_x,
    train,
)

SYN = get_problem("syn")


def quad_problem(a=(0.2, 0.3), b=(0.8, 0.6)):
    """Smooth bi-objective test problem with known gradients."""
    a = np.asarray(a)
    b = np.asarray(b)

    def ev(xs):
        f1 = ((xs - a) ** 2).sum(axis=1)
        f2 = ((xs - b) ** 2).sum(axis=1)
        return np.stack([f1, f2], axis=1)

    return Problem(
        name="quad", n=2, m=2,
        bounds=BoxBounds(np.zeros(2), np.ones(2)),
        ideal_hint=None, nadir_hint=None,
        _eval_batch=ev,
    ), a, b


def test_es_gradient_linear_exact_in_expectation():
    c = np.array([1.5, -2.0, 0.5])
    rng = RngStream(0)
    ests = np.array([
        es_gradient(lambda P: P @ c, np.zeros(3), sigma=0.1, k=5, rng=rng)
        for _ in range(4000)
    ])
    se = ests.std(axis=0) / np.sqrt(len(ests))
    assert np.all(np.abs(ests.mean(axis=0) - c) < 3 * se + 1e-12)


def test_es_gradient_antithetic_odd_symmetry():
    # f(x) = x^2 at 0: mirrored pairs cancel exactly for even K
    rng = RngStream(1)
    g = es_gradient(lambda P: (P ** 2).sum(axis=1), np.zeros(1),
                    sigma=0.5, k=4, rng=rng, antithetic=True)
    assert g == pytest.approx(0.0, abs=1e-15)


def test_es_gradient_quadratic_mean():
    # f(x) = x^2 at x = 1, sigma = 0.01, K = 1e5: mean within 3 s.e. of 2
    rng = RngStream(2)
    x = np.ones(1)
    sigma, k = 0.01, 100_000
    u = rng.gen.standard_normal((k, 1))
    vals = ((x + sigma * u) ** 2).sum(axis=1)
    terms = (vals - 1.0)[:, None] * u / sigma
    est = terms.mean(axis=0)
    se = terms.std(axis=0) / np.sqrt(k)
    assert abs(est[0] - 2.0) < 3 * se[0]


def test_estimate_grad_x_accounting_and_utopia():
    u0 = UtopiaState(np.full(2, np.inf), 0.1)
    x = SYN.bounds.midpoint()
    lam = np.array([0.5, 0.5])
    es = EsConfig(k=7, sigma=0.05)
    grad, evals, u1, loss = estimate_grad_x(SYN, x, lam, u0, es, RngStream(3))
    assert evals == 8
    assert np.all(np.isfinite(grad))
    assert np.all(u1.z_star < np.inf)
    assert loss > 0.0


def test_estimate_grad_x_clamps_perturbations():
    # center on the boundary: perturbed points must still evaluate
    u0 = UtopiaState(np.full(2, np.inf), 0.1)
    x = SYN.bounds.lower.copy()
    es = EsConfig(k=16, sigma=0.5)
    grad, evals, _, _ = estimate_grad_x(SYN, x, np.array([0.5, 0.5]), u0, es, RngStream(4))
    assert evals == 17
    assert np.all(np.isfinite(grad))


def test_estimate_grad_params_zero_stub(monkeypatch):
    import sys
    tr = sys.modules["pslearn.train"]
    model = make_model("plain", SYN, RngStream(5), h=8)
    u0 = UtopiaState(np.zeros(2), 0.1)

    def stub(problem, x, lam, utopia, es, rng):
        return np.zeros(problem.n), es.k + 1, utopia, 1.0

    monkeypatch.setattr(tr, "estimate_grad_x", stub)
    grad, evals, _, _ = tr.estimate_grad_params(
        model, SYN, np.array([0.5, 0.5]), u0, EsConfig(), RngStream(6))
    assert np.array_equal(grad, np.zeros(model.n_params))
    assert evals == 6


def test_analytic_composition_matches_loss_finite_differences():
    # replace ES by the analytic subproblem gradient (fixed argmax branch) and
    # check the composed parameter gradient against finite differences of the
    # full loss over every parameter
    problem, a, b = quad_problem()
    model = make_model("plain", problem, RngStream(7), h=4)
    lam = np.array([0.3, 0.7])
    u = UtopiaState(np.zeros(2), 0.1)
    lamc = clip_preference(lam)

    def branch_and_loss():
        x = model.forward(lam)
        f = problem.evaluate(x)
        return tchebycheff(f, lam, u)

    _, j = branch_and_loss()
    x = model.forward(lam)
    grad_f = 2.0 * (x - a) if j == 0 else 2.0 * (x - b)
    grad_x = lamc[j] * grad_f / u.scale[j]
    got = model.backward(lam, grad_x)

    flat = model.get_flat().copy()
    fd = np.zeros_like(flat)
    step = 1e-5
    for i in range(flat.size):
        for sgn in (1, -1):
            v = flat.copy()
            v[i] += sgn * step
            model.set_flat(v)
            fd[i] += sgn * branch_and_loss()[0]
        fd[i] /= 2 * step
    model.set_flat(flat)
    rel = np.abs(got - fd) / np.maximum(np.abs(fd), 1e-6)
    assert rel.max() < 1e-4


def test_train_zero_iterations():
    model = make_model("plain", SYN, RngStream(8), h=8)
    before = model.get_flat().copy()
    state = train(SYN, model, TrainConfig(iters=0, seed=1))
    assert state.eval_count == 0
    assert state.iteration == 0
    assert np.array_equal(model.get_flat(), before)


def test_train_budget_arithmetic():
    model = make_model("plain", SYN, RngStream(9), h=8)
    cfg = TrainConfig(n_pref=2, iters=3, es=EsConfig(k=4, sigma=0.05), seed=1)
    state = train(SYN, model, cfg)
    assert state.eval_count == 2 * (4 + 1) * 3
    assert len(state.loss_history) == 3
    assert [r["eval_count"] for r in state.log] == [10, 20, 30]


def test_train_determinism():
    def run():
        model = make_model("plain", SYN, RngStream(10), h=16)
        cfg = TrainConfig(n_pref=3, iters=20, es=EsConfig(k=3, sigma=0.05), seed=42)
        state = train(SYN, model, cfg)
        return state.loss_history, model.get_flat()

    (h1, f1), (h2, f2) = run(), run()
    assert h1 == h2
    assert np.array_equal(f1, f2)


def test_train_utopia_monotone():
    model = make_model("plain", SYN, RngStream(11), h=8)
    cfg = TrainConfig(n_pref=2, iters=50, es=EsConfig(k=3, sigma=0.05), seed=3,
                      z_init_from_hints=False)
    state = train(SYN, model, cfg)
    zs = np.array([r["z_star"] for r in state.log])
    assert np.all(np.diff(zs, axis=0) <= 0.0)


def test_train_diverged_carries_state(monkeypatch):
    import sys
    tr = sys.modules["pslearn.train"]

    def nan_grad(model, problem, lam, utopia, es, rng):
        return np.full(model.n_params, np.nan), es.k + 1, utopia, 1.0

    monkeypatch.setattr(tr, "estimate_grad_params", nan_grad)
    model = make_model("plain", SYN, RngStream(12), h=8)
    cfg = TrainConfig(n_pref=1, iters=5, es=EsConfig(k=2, sigma=0.05), seed=0)
    with pytest.raises(TrainingDivergedError) as err:
        tr.train(SYN, model, cfg)
    state = err.value.state
    assert state.iteration == 1
    assert state.eval_count == 3


def test_analytic_descent_windows():
    # ES replaced by the analytic gradient on a smooth problem: loss
    # non-increasing over 50-iteration windows for a small step size
    problem, a, b = quad_problem()
    model = make_model("plain", problem, RngStream(13), h=8, feature_scale=1.0)
    rng = RngStream(14)
    u = UtopiaState(np.zeros(2), 0.1)
    losses = []
    for _ in range(200):
        lam = sample_preference(2, rng)
        lamc = clip_preference(lam)
        x = model.forward(lam)
        f = problem.evaluate(x)
        val, j = tchebycheff(f, lam, u)
        grad_f = 2.0 * (x - a) if j == 0 else 2.0 * (x - b)
        g = model.backward(lam, lamc[j] * grad_f / u.scale[j])
        model.set_flat(model.get_flat() - 0.02 * g)
        losses.append(val)
    w = np.array(losses).reshape(4, 50).mean(axis=1)
    assert np.all(np.diff(w) <= 1e-3)


def test_default_sigma():
    s = np.asarray(default_sigma(SYN))
    assert s == pytest.approx([0.05, 0.1, 0.1])


def test_write_training_log(tmp_path):
    import json

    from pslearn.train import write_training_log

    model = make_model("plain", SYN, RngStream(20), h=8)
    state = train(SYN, model, TrainConfig(n_pref=2, iters=4, es=EsConfig(k=2, sigma=0.05), seed=2))
    path = tmp_path / "log.jsonl"
    write_training_log(state, path)
    records = [json.loads(line) for line in path.read_text().splitlines()]
    assert [r["iteration"] for r in records] == [1, 2, 3, 4]
    assert records[-1]["eval_count"] == state.eval_count


def test_config_validation_and_round_trip():
    with pytest.raises(ValueError):
        EsConfig(k=0)
    with pytest.raises(ValueError):
        EsConfig(sigma=-1.0)
    with pytest.raises(ValueError):
        TrainConfig(eta=0.0)
    with pytest.raises(ValueError):
        TrainConfig(average_tail=1.5)
    cfg = TrainConfig(es=EsConfig(k=7, sigma=(0.1, 0.2, 0.3)), adam=True)
    assert TrainConfig.from_dict(cfg.to_dict()) == cfg
