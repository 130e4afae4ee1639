"""Batched statistic kernels for the Monte Carlo hot path.

Each kernel evaluates detector statistics for a whole batch of trials in
one call.  The function bodies are written in the numpy subset that numba
supports in nopython mode, so there is a single source of truth with two
interchangeable backends:

* ``numba``: the kernels compiled with ``numba.njit(cache=True, nogil=True)``
  (default whenever numba imports cleanly),
* ``numpy``: the same functions run as plain Python + numpy.

Set ``ADAPTDET_BACKEND=numpy`` or ``=numba`` to force a backend; the
``adaptdet benchmark`` subcommand times both on identical data.

Kernels assume validated C-contiguous complex128 inputs and skip the
defensive checks of the public per-instance API in
:mod:`adaptdet.detectors`; agreement between the two paths (and between
the two backends) is enforced by tests.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["ENV_BACKEND", "active_backend", "backend_functions",
           "ru_pair_batch", "classic_pair_batch"]

ENV_BACKEND = "ADAPTDET_BACKEND"


def _requested_backend() -> str:
    value = os.environ.get(ENV_BACKEND, "auto").strip().lower()
    if value in ("", "auto"):
        return "auto"
    if value in ("numba", "numpy"):
        return value
    raise ValueError(f"{ENV_BACKEND} must be 'numba' or 'numpy', got {value!r}")


_REQUESTED = _requested_backend()
if _REQUESTED == "numpy":
    _nb = None
else:
    try:
        import numba as _nb
    except ImportError:
        if _REQUESTED == "numba":
            raise
        _nb = None


def active_backend() -> str:
    """Backend the module-level kernels dispatch to: 'numba' or 'numpy'."""
    return "numpy" if _nb is None else "numba"


def _ru_pair_source(xb, xlb, a, a_h, cpar_h, cperp_h):
    # Right-unitary family on shared draws.  Per trial t:
    #   out[t, 0] = GLRGDD-RU, out[t, 1] = AMGDD-RU.
    # xlb may have zero columns (no training data), which turns
    # out[:, 0] into Bose's GLRT.
    trials = xb.shape[0]
    m = cpar_h.shape[1]
    have_training = xlb.shape[2] > 0
    eye_m = np.eye(m).astype(np.complex128)
    out = np.empty((trials, 2), dtype=np.float64)
    for t in range(trials):
        x = xb[t]
        x_par = x @ cpar_h
        x_perp = x @ cperp_h
        s_plus = x_perp @ np.ascontiguousarray(np.conj(x_perp).T)
        if have_training:
            xl = xlb[t]
            s_plus = s_plus + xl @ np.ascontiguousarray(np.conj(xl).T)
        s_plus = 0.5 * (s_plus + np.ascontiguousarray(np.conj(s_plus).T))
        si_a = np.linalg.solve(s_plus, a)
        si_x = np.linalg.solve(s_plus, x_par)
        phi_a = a_h @ si_a
        phi_a = 0.5 * (phi_a + np.ascontiguousarray(np.conj(phi_a).T))
        phi_ax = a_h @ si_x
        phi_x = np.ascontiguousarray(np.conj(x_par).T) @ si_x
        phi_x = 0.5 * (phi_x + np.ascontiguousarray(np.conj(phi_x).T))
        num = np.ascontiguousarray(np.conj(phi_ax).T) @ np.linalg.solve(phi_a, phi_ax)
        num = 0.5 * (num + np.ascontiguousarray(np.conj(num).T))
        lam_am = np.linalg.eigvalsh(num)[m - 1]
        if lam_am < 0.0:
            lam_am = 0.0
        w, v = np.linalg.eigh(eye_m + phi_x)
        scale = (1.0 / np.sqrt(w)).astype(np.complex128)
        half = (v * scale) @ np.ascontiguousarray(np.conj(v).T)
        sym = half @ num @ half
        sym = 0.5 * (sym + np.ascontiguousarray(np.conj(sym).T))
        lam_glr = np.linalg.eigvalsh(sym)[m - 1]
        if lam_glr < 0.0:
            lam_glr = 0.0
        out[t, 0] = lam_glr
        out[t, 1] = lam_am
    return out


def _classic_pair_source(xb, xlb, a, a_h, cpar, cpar_h):
    # Training-only-SCM family (requires L >= N).  Per trial t:
    #   out[t, 0] = GLRGDD (factored product form), out[t, 1] = AMGDD.
    trials = xb.shape[0]
    k = xb.shape[2]
    m = cpar.shape[0]
    eye_k = np.eye(k).astype(np.complex128)
    out = np.empty((trials, 2), dtype=np.float64)
    for t in range(trials):
        x = xb[t]
        xl = xlb[t]
        x_h = np.ascontiguousarray(np.conj(x).T)
        s = xl @ np.ascontiguousarray(np.conj(xl).T)
        s = 0.5 * (s + np.ascontiguousarray(np.conj(s).T))

        x_par = x @ cpar_h
        si_a = np.linalg.solve(s, a)
        si_xp = np.linalg.solve(s, x_par)
        phi_a = a_h @ si_a
        phi_a = 0.5 * (phi_a + np.ascontiguousarray(np.conj(phi_a).T))
        phi_ax = a_h @ si_xp
        num = np.ascontiguousarray(np.conj(phi_ax).T) @ np.linalg.solve(phi_a, phi_ax)
        num = 0.5 * (num + np.ascontiguousarray(np.conj(num).T))
        lam_am = np.linalg.eigvalsh(num)[m - 1]
        if lam_am < 0.0:
            lam_am = 0.0

        si_x = np.linalg.solve(s, x)
        q = eye_k + x_h @ si_x
        q = 0.5 * (q + np.ascontiguousarray(np.conj(q).T))
        t1 = np.linalg.solve(q, cpar_h)
        xi_ac = (a_h @ si_x) @ t1
        total = s + x @ x_h
        total = 0.5 * (total + np.ascontiguousarray(np.conj(total).T))
        m_a = a_h @ np.linalg.solve(total, a)
        m_a = 0.5 * (m_a + np.ascontiguousarray(np.conj(m_a).T))
        core = np.ascontiguousarray(np.conj(xi_ac).T) @ np.linalg.solve(m_a, xi_ac)
        core = 0.5 * (core + np.ascontiguousarray(np.conj(core).T))
        w2 = cpar @ t1
        w2 = 0.5 * (w2 + np.ascontiguousarray(np.conj(w2).T))
        w, v = np.linalg.eigh(w2)
        scale = (1.0 / np.sqrt(w)).astype(np.complex128)
        half = (v * scale) @ np.ascontiguousarray(np.conj(v).T)
        sym = half @ core @ half
        sym = 0.5 * (sym + np.ascontiguousarray(np.conj(sym).T))
        lam_glr = np.linalg.eigvalsh(sym)[m - 1]
        if lam_glr < 0.0:
            lam_glr = 0.0
        out[t, 0] = lam_glr
        out[t, 1] = lam_am
    return out


_JITTED: dict[str, object] = {}


def backend_functions(backend: str | None = None):
    """Return (ru_pair, classic_pair) callables for the given backend.

    ``backend`` is 'numba', 'numpy', or None for the active default.
    """
    if backend is None:
        backend = active_backend()
    if backend == "numpy":
        return _ru_pair_source, _classic_pair_source
    if backend != "numba":
        raise ValueError(f"unknown backend {backend!r}")
    if _nb is None:
        raise RuntimeError("numba backend requested but numba is not available")
    if not _JITTED:
        jit = _nb.njit(cache=True, nogil=True)
        _JITTED["ru"] = jit(_ru_pair_source)
        _JITTED["classic"] = jit(_classic_pair_source)
    return _JITTED["ru"], _JITTED["classic"]


def ru_pair_batch(xb, xlb, a, a_h, cpar_h, cperp_h) -> np.ndarray:
    """(trials, 2) array of [GLRGDD-RU, AMGDD-RU] on the active backend."""
    return backend_functions()[0](xb, xlb, a, a_h, cpar_h, cperp_h)


def classic_pair_batch(xb, xlb, a, a_h, cpar, cpar_h) -> np.ndarray:
    """(trials, 2) array of [GLRGDD, AMGDD] on the active backend."""
    return backend_functions()[1](xb, xlb, a, a_h, cpar, cpar_h)
