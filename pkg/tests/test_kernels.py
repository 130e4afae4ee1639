import subprocess
import sys

import numpy as np
import pytest

from adaptdet import kernels
from adaptdet.detectors import DetectorKind, compute
from adaptdet.montecarlo import _Workspace
from adaptdet.scenario import make_scenario, sample_noise, as_generator


def _batch(scenario, trials, seed):
    rng = as_generator(seed)
    xb = np.empty((trials, scenario.N, scenario.K), dtype=np.complex128)
    xlb = np.empty((trials, scenario.N, scenario.L), dtype=np.complex128)
    for t in range(trials):
        xb[t] = sample_noise(scenario.R, scenario.K, rng)
        xlb[t] = sample_noise(scenario.R, scenario.L, rng)
    return xb, xlb


@pytest.fixture(scope="module")
def workspace_and_batch():
    scenario = make_scenario(6, 10, 2, 2, 8, rho=0.95, seed=21)
    ws = _Workspace(scenario)
    xb, xlb = _batch(scenario, 32, 5)
    return scenario, ws, xb, xlb


def test_active_backend_is_known():
    assert kernels.active_backend() in ("numba", "numpy")


def test_backends_agree_bit_for_bit_or_close(workspace_and_batch):
    if kernels.active_backend() != "numba":
        pytest.skip("numba unavailable; single backend only")
    _, ws, xb, xlb = workspace_and_batch
    ru_np, cl_np = kernels.backend_functions("numpy")
    ru_nb, cl_nb = kernels.backend_functions("numba")
    args_ru = (xb, xlb, ws.a, ws.a_h, ws.cpar_h, ws.cperp_h)
    args_cl = (xb, xlb, ws.a, ws.a_h, ws.cpar, ws.cpar_h)
    assert np.allclose(ru_np(*args_ru), ru_nb(*args_ru), rtol=1e-12, atol=1e-14)
    assert np.allclose(cl_np(*args_cl), cl_nb(*args_cl), rtol=1e-12, atol=1e-14)


def test_kernels_match_public_reference_path(workspace_and_batch):
    scenario, ws, xb, xlb = workspace_and_batch
    ru = kernels.ru_pair_batch(xb, xlb, ws.a, ws.a_h, ws.cpar_h, ws.cperp_h)
    cl = kernels.classic_pair_batch(xb, xlb, ws.a, ws.a_h, ws.cpar, ws.cpar_h)
    empty = np.ascontiguousarray(xlb[:, :, :0])
    bose = kernels.ru_pair_batch(xb, empty, ws.a, ws.a_h, ws.cpar_h, ws.cperp_h)[:, 0]
    column = {
        DetectorKind.GLRGDD_RU: ru[:, 0],
        DetectorKind.AMGDD_RU: ru[:, 1],
        DetectorKind.GLRGDD: cl[:, 0],
        DetectorKind.AMGDD: cl[:, 1],
        DetectorKind.BOSE_GLRT: bose,
    }
    for t in range(xb.shape[0]):
        for kind, col in column.items():
            x_l = xlb[t] if kind is not DetectorKind.BOSE_GLRT else np.zeros(
                (scenario.N, 0), complex)
            ref = compute(kind, xb[t], x_l, scenario.A, scenario.C).value
            assert col[t] == pytest.approx(ref, rel=1e-10, abs=1e-12), kind


def test_zero_column_training_batch(workspace_and_batch):
    _, ws, xb, xlb = workspace_and_batch
    empty = np.ascontiguousarray(xlb[:, :, :0])
    out = kernels.ru_pair_batch(xb, empty, ws.a, ws.a_h, ws.cpar_h, ws.cperp_h)
    assert out.shape == (xb.shape[0], 2)
    assert np.all((out[:, 0] >= 0) & (out[:, 0] < 1))


def test_numpy_backend_forced_by_env():
    code = ("import os; os.environ['ADAPTDET_BACKEND'] = 'numpy'; "
            "import adaptdet.kernels as k; "
            "assert k.active_backend() == 'numpy'; "
            "import sys; sys.exit(0)")
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True)
    assert proc.returncode == 0, proc.stderr.decode()


def test_invalid_backend_env_rejected():
    code = ("import os; os.environ['ADAPTDET_BACKEND'] = 'cuda'; "
            "import adaptdet.kernels")
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True)
    assert proc.returncode != 0
    assert b"ADAPTDET_BACKEND" in proc.stderr


def test_requesting_numba_when_disabled_errors():
    code = ("import os; os.environ['ADAPTDET_BACKEND'] = 'numpy'; "
            "import adaptdet.kernels as k; k.backend_functions('numba')")
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True)
    assert proc.returncode != 0
    assert b"numba backend" in proc.stderr
