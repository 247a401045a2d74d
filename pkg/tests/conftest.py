import numpy as np
import pytest

from cpgsnn.tensor import Tensor


def numeric_grad(fn, arrays, index, step=1e-4):
    """Central finite differences of scalar fn w.r.t. arrays[index].

    `fn` receives fresh Tensors built from `arrays` and returns a float.
    Independent of the reverse-mode path it is used to check.
    """
    base = [np.array(a, dtype=np.float64) for a in arrays]
    grad = np.zeros_like(base[index])
    it = np.nditer(base[index], flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        plus = [a.copy() for a in base]
        minus = [a.copy() for a in base]
        plus[index][idx] += step
        minus[index][idx] -= step
        grad[idx] = (fn(*plus) - fn(*minus)) / (2 * step)
    return grad


def rel_err(a, b, floor=1e-8):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
