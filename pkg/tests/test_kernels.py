import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sysshock import kernels
from sysshock.shock_model import ModelParams

pytestmark = pytest.mark.skipif("numba" not in kernels.available_backends(), reason="numba disabled")


def brute_inversions(a):
    a = np.asarray(a)
    return int(sum(np.sum(a[i] > a[i + 1:]) for i in range(a.size)))


@given(arrays(np.float64, st.integers(0, 200), elements=st.integers(-5, 5).map(float)))
def test_inversions_match_brute_force(a):
    want = brute_inversions(a)
    assert kernels.count_inversions(a, "numba") == want
    assert kernels.count_inversions(a, "numpy") == want


@pytest.mark.parametrize("fam,beta", [(0, 0.7), (0, 4.0), (1, 1.3), (1, 8.0), (2, 1.0)])
def test_cond_inverse_backends_agree(fam, beta):
    rng = np.random.default_rng(3)
    u, w = rng.random(20_000) + 2**-54, rng.random(20_000) + 2**-54
    a = kernels.cond_inverse(fam, beta, u, w, "numba")
    b = kernels.cond_inverse(fam, beta, u, w, "numpy")
    np.testing.assert_allclose(np.exp(a), np.exp(b), rtol=1e-8, atol=1e-300)


@pytest.mark.parametrize("family", ["clayton", "gumbel"])
def test_sample_latent_backends_agree(family):
    p = ModelParams.from_family(family, [0.5, 0.3, 0.7], [0.2, 0.3, 0.4, 0.1], [2.0, 3.0, 1.5])
    unif = np.random.default_rng(5).random((20_000, 7)) + 2**-54
    Y1, X1 = kernels.sample_latent(unif, *p.kernel_arrays(), backend="numba")
    Y2, X2 = kernels.sample_latent(unif, *p.kernel_arrays(), backend="numpy")
    np.testing.assert_allclose(Y1, Y2, rtol=1e-14)
    np.testing.assert_allclose(X1, X2, rtol=1e-8)


def test_sample_latent_shape_check():
    with pytest.raises(ValueError):
        kernels.sample_latent(np.ones((3, 4)), [0], [1.0], [0.5, 0.5], [1.0])


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.count_inversions([2, 1], "cuda")


def test_env_flag_selects_numpy():
    env = dict(os.environ, SYSSHOCK_DISABLE_NUMBA="1")
    code = "from sysshock import kernels; print(kernels.BACKEND, kernels.available_backends())"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split()[0] == "numpy"
