import numpy as np
import pytest

from pslearn.core import OutOfBoundsError, RngStream
from pslearn.problems import PROBLEM_NAMES, get_problem


def random_inbox(problem, count, seed=0):
    rng = RngStream(seed)
    return problem.bounds.lower + rng.gen.uniform(size=(count, problem.n)) * problem.bounds.width


def test_synthetic_on_curve():
    p = get_problem("syn")
    s = np.sin(-2.5)
    f = p.evaluate(np.array([0.25, s, s]))
    assert f == pytest.approx([0.25, 0.5], abs=1e-12)


def test_synthetic_right_corner():
    p = get_problem("syn")
    s = np.sin(5.0)
    f = p.evaluate(np.array([1.0, s, s]))
    assert f == pytest.approx([1.0, 0.0], abs=1e-12)


def test_synthetic_off_curve():
    # sin(-5) is positive, so the off-curve probe offsets downward to stay in-box
    p = get_problem("syn")
    s = np.sin(-5.0)
    f = p.evaluate(np.array([0.0, s - 0.1, s]))
    # g = 0.1^2 / 2 = 0.005, f2 = (1 + g) * (1 - 0)
    assert f == pytest.approx([0.0, 1.005], abs=1e-12)


def test_out_of_box_is_an_error():
    p = get_problem("syn")
    with pytest.raises(OutOfBoundsError):
        p.evaluate(np.array([1.5, 0.0, 0.0]))
    bad = np.array([[0.5, 0.0, 0.0], [0.5, 2.0, 0.0]])
    with pytest.raises(OutOfBoundsError, match="point 1"):
        p.evaluate_batch(bad)


def test_batch_empty_and_singleton():
    p = get_problem("syn")
    assert p.evaluate_batch(np.empty((0, 3))).shape == (0, 2)
    x = np.array([0.3, 0.1, -0.2])
    assert np.array_equal(p.evaluate_batch(x[None, :])[0], p.evaluate(x))


@pytest.mark.parametrize("name", PROBLEM_NAMES)
def test_batch_matches_single_calls(name):
    p = get_problem(name)
    xs = random_inbox(p, 100, seed=42)
    batch = p.evaluate_batch(xs)
    single = np.stack([p.evaluate(x) for x in xs])
    assert np.array_equal(batch, single)


@pytest.mark.parametrize("name", PROBLEM_NAMES)
def test_random_points_finite(name):
    p = get_problem(name)
    fs = p.evaluate_batch(random_inbox(p, 1000, seed=1))
    assert np.all(np.isfinite(fs))


def test_referential_transparency():
    p = get_problem("re33")
    x = random_inbox(p, 1, seed=9)[0]
    assert np.array_equal(p.evaluate(x), p.evaluate(x))


def test_synthetic_ground_truth():
    p = get_problem("syn")
    gt = p.ground_truth()
    assert gt.ps_relation(0.5) == pytest.approx(0.0, abs=1e-15)
    pf = gt.pf_samples
    i = np.argmin(np.abs(pf[:, 0] - 0.25))
    assert pf[i, 1] == pytest.approx(1.0 - np.sqrt(pf[i, 0]), abs=1e-12)
    # any point on the analytic relation has g = 0 exactly
    for x1 in [0.0, 0.31, 0.77, 1.0]:
        s = gt.ps_relation(x1)
        f = p.evaluate(np.array([x1, s, s]))
        assert f[1] == pytest.approx(1.0 - np.sqrt(x1), abs=1e-12)


def _pairwise_dominated(fs):
    n = fs.shape[0]
    out = np.zeros(n, dtype=bool)
    for i in range(n):
        le = (fs <= fs[i]).all(axis=1)
        lt = (fs < fs[i]).any(axis=1)
        out[i] = bool((le & lt).any())
    return out


@pytest.mark.parametrize("name", ["re21", "re33", "re37"])
def test_reference_front_nondominated(name):
    gt = get_problem(name).ground_truth()
    assert gt.pf_samples is not None
    assert not _pairwise_dominated(gt.pf_samples).any()


@pytest.mark.parametrize("name", ["re21", "re23", "re24", "re25", "re33", "re37"])
def test_re_hints_sane(name):
    p = get_problem(name)
    assert p.ideal_hint is not None and p.nadir_hint is not None
    assert np.all(p.ideal_hint < p.nadir_hint)
    gt = p.ground_truth()
    if gt.pf_samples is not None:
        # front stays in the broad vicinity of the published hint box
        span = p.nadir_hint - p.ideal_hint
        assert np.all(gt.pf_samples.min(axis=0) >= p.ideal_hint - 0.1 * span)
        assert np.all(gt.pf_samples.max(axis=0) <= p.nadir_hint + 0.1 * span)


def test_re23_discretization():
    # the first two variables snap to multiples of 0.0625 via rounding
    p = get_problem("re23")
    a = p.evaluate(np.array([1.4, 2.4, 50.0, 60.0]))
    b = p.evaluate(np.array([1.0, 2.0, 50.0, 60.0]))
    assert np.array_equal(a, b)


def test_re25_wire_diameter_snap():
    p = get_problem("re25")
    a = p.evaluate(np.array([10.2, 1.0, 0.3055]))
    b = p.evaluate(np.array([10.0, 1.0, 0.307]))
    assert np.array_equal(a, b)


def test_registry():
    with pytest.raises(KeyError):
        get_problem("nope")
    with pytest.raises(ValueError):
        get_problem("re21", n=7)
    assert get_problem("syn", n=5).n == 5
