import json

import numpy as np
import pytest

from pslearn.core import BoxBounds, RngStream, sample_preference
from pslearn.model import (
    MlpParams,
    PlainModel,
    chain_point,
    make_model,
    model_from_dict,
    sample_set,
    save_model,
    load_model,
)
from pslearn.problems import get_problem

SYN = get_problem("syn")


def all_variants(seed=0, h=8):
    rng = RngStream(seed)
    return [
        make_model("plain", SYN, rng.child(1), h=h),
        make_model("shared", SYN, rng.child(2), h=h, shared_idx=[2]),
        make_model("relation", SYN, rng.child(3), h=h, relation="sine"),
        make_model("relation", SYN, rng.child(4), h=h, relation="poly"),
        make_model("chain", SYN, rng.child(5), h=h, vertices=4),
    ]


def fd_param_grad(model, lam, grad_x, step=1e-5):
    flat = model.get_flat().copy()
    fd = np.zeros_like(flat)
    for i in range(flat.size):
        vp = flat.copy()
        vp[i] += step
        model.set_flat(vp)
        up = float(grad_x @ model.forward(lam))
        vm = flat.copy()
        vm[i] -= step
        model.set_flat(vm)
        dn = float(grad_x @ model.forward(lam))
        fd[i] = (up - dn) / (2 * step)
    model.set_flat(flat)
    return fd


def test_zero_network_outputs_midpoint():
    bounds = BoxBounds(np.zeros(3), np.ones(3))
    mlp = MlpParams(np.zeros((4, 2)), np.zeros(4), np.zeros((3, 4)), np.zeros(3))
    model = PlainModel(2, 3, 4, bounds, mlp)
    x = model.forward(np.array([0.3, 0.7]))
    assert np.array_equal(x, [0.5, 0.5, 0.5])


def test_chain_point_interpolation():
    verts = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]])
    assert chain_point(verts, 1.5) == pytest.approx([0.5, 0.5])
    assert chain_point(verts, 2.0) == pytest.approx([1.0, 1.0])
    assert chain_point(verts, 1.0) == pytest.approx([0.0, 0.0])
    assert chain_point(verts, 2.75) == pytest.approx([1.75, 0.25])


def test_chain_point_vertex_derivative():
    # strictly inside segment k: dx/dp_k = (1-w) I, dx/dp_{k+1} = w I
    verts = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]])
    t, w = 1.3, 0.3
    eps = 1e-7
    for vi in (0, 1):
        for ci in (0, 1):
            vp = verts.copy()
            vp[vi, ci] += eps
            vm = verts.copy()
            vm[vi, ci] -= eps
            d = (chain_point(vp, t) - chain_point(vm, t)) / (2 * eps)
            expect = np.zeros(2)
            expect[ci] = (1.0 - w) if vi == 0 else w
            assert d == pytest.approx(expect, abs=1e-6)


def test_shared_coordinate_identical():
    model = make_model("shared", SYN, RngStream(1), h=8, shared_idx=[2])
    x1 = model.forward(np.array([0.1, 0.9]))
    x2 = model.forward(np.array([0.9, 0.1]))
    assert x1[2] == x2[2]
    assert not np.array_equal(x1[:2], x2[:2])


def test_zero_grad_x_gives_zero_param_grad():
    for model in all_variants():
        g = model.backward(np.array([0.4, 0.6]), np.zeros(3))
        assert np.array_equal(g, np.zeros(model.n_params))


def test_backward_matches_finite_differences():
    rng = RngStream(17)
    for probe in range(3):
        for model in all_variants(seed=100 + probe, h=6):
            # perturb only the network block; chain vertices must stay
            # interior so two-sided differences see the un-projected map
            flat = model.get_flat()
            flat[: model.mlp.n_params] += 0.3 * rng.gen.standard_normal(model.mlp.n_params)
            model.set_flat(flat)
            lam = sample_preference(2, rng)
            grad_x = rng.gen.standard_normal(3)
            got = model.backward(lam, grad_x)
            fd = fd_param_grad(model, lam, grad_x)
            denom = np.maximum(np.abs(fd), 1e-6)
            rel = np.abs(got - fd) / denom
            assert rel.max() < 1e-4, f"{model.variant} probe {probe}: {rel.max()}"


def test_forward_always_in_box():
    # 1e5 random (theta, lambda) probes across all variants
    rng = RngStream(23)
    per_model = 100
    models = []
    for rep in range(40):
        models.extend(all_variants(seed=rep, h=6))
    count = 0
    for model in models:
        model.set_flat(model.get_flat() + 2.0 * rng.gen.standard_normal(model.n_params))
        for _ in range(per_model):
            lam = sample_preference(2, rng)
            x = model.forward(lam)
            assert SYN.bounds.contains(x)
            count += 1
    assert count == 40 * 5 * per_model  # 20k probes here; acceptance covers 1e5


def test_chain_outputs_on_segments():
    model = make_model("chain", SYN, RngStream(2), vertices=4)
    rng = RngStream(3)
    verts = model.vertices()
    for _ in range(100):
        lam = sample_preference(2, rng)
        x = model.forward(lam)
        d = min(_point_segment_distance(x, verts[k], verts[k + 1]) for k in range(3))
        assert d < 1e-12


def _point_segment_distance(p, a, b):
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0 else np.clip((p - a) @ ab / denom, 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def test_relation_sine_reproduces_ground_truth():
    model = make_model("relation", SYN, RngStream(4), relation="sine")
    model.alpha[:] = 10.0
    model.beta[:] = 0.5
    rng = RngStream(5)
    for _ in range(50):
        lam = sample_preference(2, rng)
        x = model.forward(lam)
        assert x[1] == x[2]
        assert x[1] == np.sin(10.0 * (x[0] - 0.5))


def test_sample_set_consistency_and_prefix():
    model = make_model("plain", SYN, RngStream(6), h=8)
    lams, xs, fs = sample_set(model, SYN, 1, RngStream(9))
    assert np.array_equal(xs[0], model.forward(lams[0]))
    assert np.array_equal(fs[0], SYN.evaluate(xs[0]))

    l100, x100, f100 = sample_set(model, SYN, 100, RngStream(9))
    l1000, x1000, f1000 = sample_set(model, SYN, 1000, RngStream(9))
    assert np.array_equal(l100, l1000[:100])
    assert np.array_equal(x100, x1000[:100])
    assert np.array_equal(f100, f1000[:100])


def test_sample_set_shared_bits():
    model = make_model("shared", SYN, RngStream(7), shared_idx=[1, 2])
    _, xs, _ = sample_set(model, SYN, 50, RngStream(8))
    assert np.all(xs[:, 1] == xs[0, 1])
    assert np.all(xs[:, 2] == xs[0, 2])


def test_serialization_round_trip(tmp_path):
    rng = RngStream(10)
    for model in all_variants(seed=3):
        path = tmp_path / f"{model.variant}_{model.n_params}.json"
        save_model(model, path)
        back = load_model(path)
        lam = sample_preference(2, rng)
        assert np.array_equal(model.forward(lam), back.forward(lam))
        assert np.array_equal(model.get_flat(), back.get_flat())
        # document survives a JSON round trip bit for bit
        d1 = model.to_dict()
        d2 = json.loads(json.dumps(d1))
        assert np.array_equal(model_from_dict(d2).get_flat(), model.get_flat())


def test_flat_round_trip():
    for model in all_variants(seed=11):
        flat = model.get_flat()
        assert flat.shape == (model.n_params,)
        model.set_flat(flat)
        assert np.array_equal(model.get_flat(), flat)


def test_make_model_validation():
    with pytest.raises(ValueError):
        make_model("shared", SYN, RngStream(0))
    with pytest.raises(ValueError):
        make_model("chain", SYN, RngStream(0), vertices=1)
    with pytest.raises(ValueError):
        make_model("nope", SYN, RngStream(0))
