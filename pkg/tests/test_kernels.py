import importlib
import subprocess
import sys

import numpy as np
import pytest

from blockadesim import _kernels


def _positions(n_configs=64, n_atoms=6, seed=0):
    return np.random.default_rng(seed).uniform(0, 10, (n_configs, n_atoms, 3))


def test_min_pair_paths_agree():
    pos = _positions()
    a = _kernels.min_pair_kappa(pos, 123.4)
    b = _kernels.min_pair_kappa_numpy(pos, 123.4)
    np.testing.assert_allclose(a, b, rtol=1e-14)


def test_all_pair_paths_agree():
    pos = _positions(n_configs=16)
    a = _kernels.all_pair_kappa(pos, 9.0)
    b = _kernels.all_pair_kappa_numpy(pos, 9.0)
    assert a.shape == (16 * 15,)
    np.testing.assert_allclose(a, b, rtol=1e-14)


def test_min_pair_matches_direct():
    pos = _positions(n_configs=8, n_atoms=5, seed=3)
    got = _kernels.min_pair_kappa(pos, 2.0)
    for k in range(8):
        best = np.inf
        for i in range(5):
            for j in range(i + 1, 5):
                r = np.linalg.norm(pos[k, i] - pos[k, j])
                best = min(best, 2.0 / r**3)
        assert got[k] == pytest.approx(best, rel=1e-14)


def test_strang_paths_agree():
    rng = np.random.default_rng(5)
    dim = 12
    h = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = h + h.conj().T
    w, u = np.linalg.eigh(h)
    phases = np.exp(-1j * w * 0.01)
    decay = np.exp(-0.5 * rng.uniform(0, 0.1, dim) * 0.01)
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    a = _kernels.strang_apply(u, phases, decay, psi, 40)
    b = _kernels.strang_apply_numpy(u, phases, decay, psi, 40)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_env_flag_forces_numpy_path():
    code = (
        "import os; os.environ['BLOCKADESIM_PURE_NUMPY'] = '1';"
        "from blockadesim import _kernels;"
        "assert not _kernels.HAS_NUMBA;"
        "assert _kernels.min_pair_kappa is _kernels.min_pair_kappa_numpy;"
        "print('ok')"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True
    )
    assert out.returncode == 0 and out.stdout.strip() == "ok"


def test_default_import_state_consistent():
    importlib.reload(_kernels)
    if _kernels.HAS_NUMBA:
        assert _kernels.min_pair_kappa is not _kernels.min_pair_kappa_numpy
    else:
        assert _kernels.min_pair_kappa is _kernels.min_pair_kappa_numpy
