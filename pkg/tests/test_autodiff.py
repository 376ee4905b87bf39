"""Gradient correctness of the tape against central finite differences,
plus optimizer and bookkeeping contracts."""

import numpy as np
import pytest

from graphdis import autodiff as ad
from graphdis.autodiff import ParamStore, Tensor, adam_step
from graphdis.errors import NonFiniteError, ShapeError

RNG = np.random.default_rng(42)


def fd_grad(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central finite differences of a scalar function of one array."""
    g = np.zeros_like(x)
    flat = x.ravel()
    gf = g.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = f(x)
        flat[i] = orig - h
        down = f(x)
        flat[i] = orig
        gf[i] = (up - down) / (2 * h)
    return g


def check_primitive(build, x: np.ndarray, rtol: float = 1e-4) -> None:
    """Compare tape gradient of scalar build(Tensor) against FD on build(array)."""
    t = Tensor(x.copy(), requires_grad=True)
    out = build(t)
    out.backward()
    got = t.grad

    def f(arr):
        return float(build(Tensor(arr.copy())).data)

    want = fd_grad(f, x.copy())
    scale = np.maximum(np.abs(want), 1.0)
    assert got is not None
    assert np.max(np.abs(got - want) / scale) < rtol


class TestPrimitiveGradients:
    def test_add_broadcast(self):
        b = RNG.standard_normal((1, 4))
        check_primitive(lambda t: (t + Tensor(b)).sum(), RNG.standard_normal((3, 4)))

    def test_sub(self):
        b = RNG.standard_normal((3, 4))
        check_primitive(lambda t: (Tensor(b) - t).sum(), RNG.standard_normal((3, 4)))

    def test_mul_broadcast(self):
        b = RNG.standard_normal(4)
        check_primitive(lambda t: (t * Tensor(b)).sum(), RNG.standard_normal((3, 4)))

    def test_matmul(self):
        b = RNG.standard_normal((4, 2))
        check_primitive(lambda t: ad.matmul(t, Tensor(b)).sum(),
                        RNG.standard_normal((3, 4)))

    def test_matmul_right_operand(self):
        a = RNG.standard_normal((3, 4))
        check_primitive(lambda t: ad.matmul(Tensor(a), t).sum(),
                        RNG.standard_normal((4, 2)))

    def test_matmul_batched(self):
        # (B, n, n) @ (B, n, f) with the gradient flowing into both operands
        a = RNG.standard_normal((2, 3, 3))
        check_primitive(lambda t: ad.matmul(Tensor(a), t).sum(),
                        RNG.standard_normal((2, 3, 4)))
        x = RNG.standard_normal((2, 3, 4))
        check_primitive(lambda t: ad.matmul(t, Tensor(x)).sum(),
                        RNG.standard_normal((2, 3, 3)))

    def test_matmul_shared_weight_unbroadcast(self):
        # (B, n, f) @ (f, k): weight grad must sum over the batch dimension
        x = RNG.standard_normal((5, 3, 4))
        check_primitive(lambda t: ad.matmul(Tensor(x), t).sum(),
                        RNG.standard_normal((4, 2)))

    def test_sigmoid(self):
        check_primitive(lambda t: ad.sigmoid(t).sum(), RNG.standard_normal((3, 4)))

    def test_exp(self):
        check_primitive(lambda t: ad.exp(t).sum(), RNG.standard_normal((3, 4)))

    def test_log(self):
        check_primitive(lambda t: ad.log(t).sum(),
                        RNG.uniform(0.2, 3.0, size=(3, 4)))

    def test_clip_interior(self):
        check_primitive(lambda t: ad.clip(t, -0.5, 0.5).sum(),
                        RNG.uniform(-0.4, 0.4, size=(3, 4)))

    def test_clip_blocks_clamped_entries(self):
        t = Tensor(np.array([-2.0, 0.0, 2.0]), requires_grad=True)
        ad.clip(t, -1.0, 1.0).sum().backward()
        assert np.array_equal(t.grad, [0.0, 1.0, 0.0])

    def test_sum_axis(self):
        check_primitive(lambda t: (t.sum(axis=1) * Tensor(np.array([1.0, -2.0, 3.0]))).sum(),
                        RNG.standard_normal((3, 4)))

    def test_mean_axis(self):
        w = Tensor(RNG.standard_normal(4))
        check_primitive(lambda t: (t.mean(axis=0) * w).sum(),
                        RNG.standard_normal((3, 4)))

    def test_mean_all(self):
        check_primitive(lambda t: t.mean(), RNG.standard_normal((3, 4)))

    def test_concat(self):
        b = RNG.standard_normal((3, 2))
        check_primitive(lambda t: ad.concat([t, Tensor(b)], axis=1).sum(),
                        RNG.standard_normal((3, 4)))

    def test_slice(self):
        check_primitive(lambda t: t[:, 1:3].sum(), RNG.standard_normal((3, 4)))

    def test_reshape(self):
        w = RNG.standard_normal(12)
        check_primitive(lambda t: (t.reshape((12,)) * Tensor(w)).sum(),
                        RNG.standard_normal((3, 4)))

    def test_tanh_composition(self):
        x = RNG.standard_normal((3, 4))
        assert np.allclose(ad.tanh(Tensor(x)).data, np.tanh(x), atol=1e-12)
        check_primitive(lambda t: ad.tanh(t).sum(), x)

    def test_square(self):
        check_primitive(lambda t: ad.square(t).sum(), RNG.standard_normal((3, 4)))


class TestTapeMechanics:
    def test_reused_node_accumulates(self):
        t = Tensor(np.array([2.0, 3.0]), requires_grad=True)
        out = (t * t).sum() + t.sum()  # d/dt = 2t + 1
        out.backward()
        assert np.allclose(t.grad, [5.0, 7.0])

    def test_no_grad_for_constants(self):
        c = Tensor(np.ones(3))
        t = Tensor(np.ones(3), requires_grad=True)
        (c * t).sum().backward()
        assert c.grad is None
        assert t.grad is not None

    def test_backward_requires_scalar(self):
        t = Tensor(np.ones((2, 2)), requires_grad=True)
        with pytest.raises(ShapeError):
            (t * 2.0).backward()

    def test_matmul_shape_mismatch(self):
        with pytest.raises(ShapeError):
            ad.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))

    def test_nonfinite_detected(self):
        with pytest.raises(NonFiniteError):
            ad.log(Tensor(np.array([0.0])))

    def test_finite_checks_toggle(self):
        prev = ad.set_finite_checks(False)
        try:
            out = ad.log(Tensor(np.array([0.0])))
            assert np.isneginf(out.data[0])
        finally:
            ad.set_finite_checks(prev)

    def test_sigmoid_extreme_inputs_stable(self):
        out = ad.sigmoid(Tensor(np.array([-800.0, 800.0])))
        assert np.all(np.isfinite(out.data))
        assert out.data[0] == pytest.approx(0.0, abs=1e-300)
        assert out.data[1] == pytest.approx(1.0)


class TestParamStoreAndAdam:
    def test_duplicate_name_rejected(self):
        store = ParamStore()
        store.add("w", np.zeros(2))
        with pytest.raises(ValueError):
            store.add("w", np.zeros(2))

    def test_adam_first_step_matches_hand_formula(self):
        # With bias correction the first step is lr * g / (|g| + eps) elementwise.
        store = ParamStore()
        p = store.add("w", np.array([1.0, -2.0, 3.0]))
        g = np.array([0.5, -0.25, 1.5])
        p.grad = g.copy()
        adam_step(store, lr=1e-2)
        expected = np.array([1.0, -2.0, 3.0]) - 1e-2 * g / (np.abs(g) + 1e-8)
        assert np.allclose(p.data, expected, atol=1e-9)
        assert store.step_count == 1
        assert p.grad is None

    def test_adam_two_steps_against_reference(self):
        store = ParamStore()
        p = store.add("w", np.array([0.0]))
        b1, b2, lr, eps = 0.9, 0.999, 1e-3, 1e-8
        m = v = 0.0
        x = 0.0
        for t, g in enumerate([0.3, -0.7], start=1):
            p.grad = np.array([g])
            adam_step(store, lr=lr)
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            x -= lr * (m / (1 - b1 ** t)) / (np.sqrt(v / (1 - b2 ** t)) + eps)
        assert p.data[0] == pytest.approx(x, rel=1e-12)

    def test_zero_grad_is_noop_update(self):
        store = ParamStore()
        p = store.add("w", np.array([1.0, 2.0]))
        p.grad = np.zeros(2)
        adam_step(store)
        assert np.array_equal(p.data, [1.0, 2.0])

    def test_missing_grad_treated_as_zero(self):
        store = ParamStore()
        p = store.add("w", np.array([4.0]))
        adam_step(store)
        assert np.array_equal(p.data, [4.0])

    def test_copy_is_independent(self):
        store = ParamStore()
        store.add("w", np.array([1.0]))
        clone = store.copy()
        store["w"].data += 5.0
        assert clone["w"].data[0] == 1.0
        assert clone.names() == ["w"]
