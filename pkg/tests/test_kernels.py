from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wenolab._kernels import BACKEND, reconstruct_faces, reconstruct_faces_ext
from wenolab.reconstruction import CWENO3, WENO3, EpsilonPolicy, ReconstructionConfig

needs_ext = pytest.mark.skipif(reconstruct_faces_ext is None, reason="compiled kernels not built")

configs = st.builds(
    ReconstructionConfig,
    kind=st.sampled_from([WENO3, CWENO3]),
    epsilon=st.sampled_from([EpsilonPolicy.parse(e) for e in ("1e-30", "1e-6", "h", "h2")]),
    tau=st.integers(1, 3),
    linear=st.booleans(),
)


@needs_ext
@given(config=configs, n=st.integers(1, 40), m=st.integers(1, 3), seed=st.integers(0, 10_000))
def test_backends_agree(config, n, m, seed):
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(m, n + 2)) * 10.0 ** rng.integers(-3, 3)
    h = rng.uniform(0.1, 2.0, size=n + 2) * 10.0 ** rng.integers(-4, 0)
    py = reconstruct_faces(u, h, config, backend="python")
    cy = reconstruct_faces(u, h, config, backend="cython")
    scale = 1e-12 * max(1.0, float(np.max(np.abs(u))))
    for a, b in zip(py, cy):
        assert a.shape == (m, n)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=scale)


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        reconstruct_faces(np.zeros((1, 5)), np.ones(4), ReconstructionConfig())


def test_backend_name():
    assert BACKEND in ("python", "cython")


def test_fallback_selected_by_environment():
    env = dict(os.environ, WENOLAB_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import wenolab; print(wenolab.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
