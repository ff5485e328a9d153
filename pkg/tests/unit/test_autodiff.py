import numpy as np
import pytest

from cnqe_lab.core.errors import NumericError
from cnqe_lab.nn.autodiff import (
    Tensor,
    concat,
    conv1d,
    conv2d,
    conv_transpose2d,
    cross_entropy,
    linear,
    maxpool,
    mse,
    softmax,
    upsample,
)
from cnqe_lab.nn.gradcheck import grad_check


def conv2d_oracle(x, kernel, bias, padding):
    b, c, h, w = x.shape
    c_out, _, kh, kw = kernel.shape
    padded = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    h_out, w_out = h + 2 * padding - kh + 1, w + 2 * padding - kw + 1
    out = np.zeros((b, c_out, h_out, w_out))
    for n in range(b):
        for o in range(c_out):
            for i in range(h_out):
                for j in range(w_out):
                    out[n, o, i, j] = np.sum(padded[n, :, i:i + kh, j:j + kw] * kernel[o]) + bias[o]
    return out


def maxpool_oracle(x, size):
    b, c, h, w = x.shape
    out = np.zeros((b, c, h // size, w // size))
    for i in range(h // size):
        for j in range(w // size):
            out[:, :, i, j] = x[:, :, i * size:(i + 1) * size, j * size:(j + 1) * size].max(axis=(2, 3))
    return out


def scalar_fn(build, shapes, rng):
    """(loss, grad) of sum(build(*params) * r) over one flat vector."""
    sizes = [int(np.prod(s)) for s in shapes]
    sample = build(*[Tensor(np.zeros(s)) for s in shapes])
    r = rng.standard_normal(sample.shape)

    def fn(flat):
        w = Tensor(flat, requires_grad=True)
        parts, offset = [], 0
        for shape, size in zip(shapes, sizes):
            parts.append(w.segment(offset, shape))
            offset += size
        out = (build(*parts) * r).sum()
        out.backward()
        return float(out.data), w.grad

    return fn, sum(sizes)


def test_conv2d_matches_oracle(rng):
    x = rng.standard_normal((2, 3, 6, 5))
    k = rng.standard_normal((4, 3, 3, 3))
    b = rng.standard_normal(4)
    for padding in (0, 1, 2):
        out = conv2d(Tensor(x), Tensor(k), Tensor(b), padding=padding).data
        np.testing.assert_allclose(out, conv2d_oracle(x, k, b, padding), atol=1e-10)


def test_conv2d_unbatched_input(rng):
    x = rng.standard_normal((3, 4, 4))
    k = rng.standard_normal((2, 3, 3, 3))
    out = conv2d(Tensor(x), Tensor(k), Tensor(np.zeros(2)))
    assert out.shape == (2, 4, 4)
    np.testing.assert_allclose(out.data, conv2d_oracle(x[None], k, np.zeros(2), 1)[0], atol=1e-10)


def test_maxpool_matches_oracle(rng):
    x = rng.standard_normal((2, 3, 8, 8))
    np.testing.assert_allclose(maxpool(Tensor(x), 4).data, maxpool_oracle(x, 4))
    with pytest.raises(NumericError):
        maxpool(Tensor(np.zeros((1, 1, 6, 8))), 4)


def test_maxpool_routes_gradient_to_argmax():
    x = Tensor(np.arange(16.0).reshape(1, 1, 4, 4), requires_grad=True)
    maxpool(x, 4).sum().backward()
    expected = np.zeros((1, 1, 4, 4))
    expected[0, 0, 3, 3] = 1.0
    np.testing.assert_allclose(x.grad, expected)


def test_maxpool_ties_go_to_first_element():
    x = Tensor(np.ones((1, 1, 4, 4)), requires_grad=True)
    maxpool(x, 4).sum().backward()
    assert x.grad[0, 0, 0, 0] == 1.0 and x.grad.sum() == 1.0


def test_conv_gradients(rng):
    x = rng.standard_normal((2, 2, 5, 5))
    fn, n = scalar_fn(lambda k, b: conv2d(Tensor(x), k, b), [(3, 2, 3, 3), (3,)], rng)
    assert grad_check(fn, rng.standard_normal(n)) < 1e-3

    kernel = rng.standard_normal((3, 2, 3, 3))
    fn, n = scalar_fn(lambda xi: conv2d(xi, Tensor(kernel), Tensor(np.zeros(3))), [(1, 2, 5, 5)], rng)
    assert grad_check(fn, rng.standard_normal(n)) < 1e-3


def test_conv_transpose_gradients(rng):
    x = rng.standard_normal((1, 3, 4, 4))
    fn, n = scalar_fn(lambda k, b: conv_transpose2d(Tensor(x), k, b), [(3, 2, 3, 3), (2,)], rng)
    assert grad_check(fn, rng.standard_normal(n)) < 1e-3


def test_conv_transpose_is_adjoint_of_conv(rng):
    x = rng.standard_normal((1, 2, 5, 5))
    y = rng.standard_normal((1, 3, 5, 5))
    k = rng.standard_normal((3, 2, 3, 3))
    forward = conv2d(Tensor(x), Tensor(k), Tensor(np.zeros(3))).data
    # the (C_out, C_in) conv kernel doubles as the (C_in, C_out) transpose kernel
    backward = conv_transpose2d(Tensor(y), Tensor(k), Tensor(np.zeros(2))).data
    assert np.sum(forward * y) == pytest.approx(np.sum(x * backward))


@pytest.mark.parametrize("stride", [1, 2, 3])
def test_conv1d_gradients(stride, rng):
    x = rng.standard_normal((2, 1, 12))
    fn, n = scalar_fn(lambda xi, k, b: conv1d(xi, k, b, stride=stride), [(2, 1, 12), (1, 1, 3), (1,)], rng)
    assert grad_check(fn, rng.standard_normal(n)) < 1e-3
    out = conv1d(Tensor(x), Tensor(np.ones((1, 1, 3))), Tensor(np.zeros(1)), stride=stride)
    assert out.shape == (2, 1, (12 - 3) // stride + 1)


def test_linear_relu_and_losses(rng):
    x = rng.standard_normal((4, 5))
    fn, n = scalar_fn(lambda w, b: linear(Tensor(x), w, b).relu(), [(3, 5), (3,)], rng)
    assert grad_check(fn, rng.standard_normal(n)) < 1e-3

    labels = [0, 1, 1, 0]

    def ce(flat):
        logits = Tensor(flat.reshape(4, 2), requires_grad=True)
        loss = cross_entropy(logits, labels)
        loss.backward()
        return float(loss.data), logits.grad.reshape(-1)

    assert grad_check(ce, rng.standard_normal(8)) < 1e-3
    uniform = cross_entropy(Tensor(np.zeros((4, 2))), labels)
    assert float(uniform.data) == pytest.approx(np.log(2.0))
    assert float(mse(Tensor([1.0, 3.0]), [0.0, 0.0]).data) == pytest.approx(5.0)
    np.testing.assert_allclose(softmax(np.array([[0.0, 0.0]])), [[0.5, 0.5]])


def test_shared_subgraph_accumulates():
    x = Tensor(np.array([2.0, -1.0]), requires_grad=True)
    y = x * x
    (y + y).sum().backward()
    np.testing.assert_allclose(x.grad, [8.0, -4.0])


def test_concat_upsample_and_indexing(rng):
    a = Tensor(rng.standard_normal((2, 3)), requires_grad=True)
    b = Tensor(rng.standard_normal((2, 1)), requires_grad=True)
    (concat([a, b], axis=1)[:, 1:] * 2.0).sum().backward()
    np.testing.assert_allclose(a.grad, [[0, 2, 2], [0, 2, 2]])
    np.testing.assert_allclose(b.grad, [[2], [2]])

    z = Tensor(np.arange(4.0).reshape(1, 1, 2, 2), requires_grad=True)
    up = upsample(z, 2)
    assert up.shape == (1, 1, 4, 4)
    up.sum().backward()
    np.testing.assert_allclose(z.grad, np.full((1, 1, 2, 2), 4.0))


def test_backward_needs_scalar_or_seed():
    t = Tensor(np.ones(3), requires_grad=True)
    with pytest.raises(NumericError):
        (t * 2.0).backward()
