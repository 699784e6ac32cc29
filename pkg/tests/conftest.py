import numpy as np
import pytest

from embedkey.embedding import Embedding


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_embedding(rng, dim=256, lo=0.01, hi=0.99) -> Embedding:
    return Embedding(rng.uniform(lo, hi, dim))


def finite_difference_gradients(model, batch, hp, objective, h=1e-5):
    """Central finite differences of ``objective`` over every weight and bias."""
    grads = []
    for layer in model.layers:
        layer_grads = []
        for arr in (layer.weights, layer.bias):
            fd = np.empty_like(arr)
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                ix = it.multi_index
                orig = arr[ix]
                arr[ix] = orig + h
                fp = objective(model, batch, hp)
                arr[ix] = orig - h
                fm = objective(model, batch, hp)
                arr[ix] = orig
                fd[ix] = (fp - fm) / (2.0 * h)
            layer_grads.append(fd)
        grads.append(tuple(layer_grads))
    return grads


def max_relative_error(analytic, numeric, floor=1e-8):
    worst = 0.0
    for (aw, ab), (nw, nb) in zip(analytic, numeric):
        for a, n in ((aw, nw), (ab, nb)):
            denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
            err = np.abs(a - n) / denom
            err[np.maximum(np.abs(a), np.abs(n)) < floor] = 0.0
            worst = max(worst, float(err.max()))
    return worst
