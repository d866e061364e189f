"""Compiled RK4 / discrete loops for the built-in node fields.

These mirror ``NetworkField`` exactly in structure; they exist only because
100k-step runs of small networks are dominated by numpy call overhead.
"""

from __future__ import annotations

import numpy as np
from numba import njit

FIELD_IDS = {"fitzhugh_nagumo": 0, "lti": 1, "integrator_chain": 1, "harmonic": 2,
             "zero": 3, "simple_integrator": 3}
CONTROLLER_IDS = {None: 0, "pitchfork": 1}


@njit(cache=True)
def _field(fid, p, A, cid, cp, N, n, X, out):
    if fid == 0:
        a, b, c, I = p[0], p[1], p[2], p[3]
        for i in range(N):
            v = X[i * 2]
            w = X[i * 2 + 1]
            out[i * 2] = c * (v + w - v * v * v / 3.0 + I)
            out[i * 2 + 1] = (a - v - b * w) / c
    elif fid == 1:
        for i in range(N):
            for r in range(n):
                s = 0.0
                for q in range(n):
                    s += A[r, q] * X[i * n + q]
                out[i * n + r] = s
    elif fid == 2:
        om = p[0]
        for i in range(N):
            out[i * 2] = -om * X[i * 2 + 1]
            out[i * 2 + 1] = om * X[i * 2]
    else:
        for m in range(N * n):
            out[m] = 0.0
    if cid == 1:
        for m in range(N * n):
            x = X[m]
            out[m] += cp[0] * x - cp[1] * x * x * x


@njit(cache=True)
def _rhs(fid, p, A, cid, cp, M, G, use_gain, k, N, n, X, out, tmp):
    _field(fid, p, A, cid, cp, N, n, X, out)
    nn = N * n
    for r in range(nn):
        s = 0.0
        for q in range(nn):
            s += M[r, q] * X[q]
        tmp[r] = s
    if use_gain:
        for i in range(N):
            for r in range(n):
                s = 0.0
                for q in range(n):
                    s += G[r, q] * tmp[i * n + q]
                out[i * n + r] += k * s
    else:
        for r in range(nn):
            out[r] += k * tmp[r]


@njit(cache=True)
def rk4_loop(fid, p, A, cid, cp, M, G, use_gain, k, N, n, x0, h, n_full, last, record_every, t_end, limit):
    """Returns (times, states, status, fail_time, fail_index); status 0 ok, 1 non-finite, 2 diverged."""
    nn = N * n
    total = n_full + (1 if last > 0.0 else 0)
    n_rec = 1 + total // record_every
    if total % record_every != 0:
        n_rec += 1
    times = np.empty(n_rec)
    states = np.empty((n_rec, nn))
    X = x0.copy()
    k1 = np.empty(nn)
    k2 = np.empty(nn)
    k3 = np.empty(nn)
    k4 = np.empty(nn)
    Y = np.empty(nn)
    tmp = np.empty(nn)
    times[0] = 0.0
    states[0] = X
    rec = 1
    t = 0.0
    for s in range(1, total + 1):
        hs = h if s <= n_full else last
        half = 0.5 * hs
        _rhs(fid, p, A, cid, cp, M, G, use_gain, k, N, n, X, k1, tmp)
        for m in range(nn):
            Y[m] = X[m] + half * k1[m]
        _rhs(fid, p, A, cid, cp, M, G, use_gain, k, N, n, Y, k2, tmp)
        for m in range(nn):
            Y[m] = X[m] + half * k2[m]
        _rhs(fid, p, A, cid, cp, M, G, use_gain, k, N, n, Y, k3, tmp)
        for m in range(nn):
            Y[m] = X[m] + hs * k3[m]
        _rhs(fid, p, A, cid, cp, M, G, use_gain, k, N, n, Y, k4, tmp)
        c = hs / 6.0
        for m in range(nn):
            X[m] = X[m] + c * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m])
        t = s * h if s <= n_full else t_end
        for m in range(nn):
            if not np.isfinite(X[m]):
                return times[:rec], states[:rec], 1, t, m
        if s % record_every == 0 or s == total:
            for m in range(nn):
                if abs(X[m]) > limit:
                    return times[:rec], states[:rec], 2, t, m
            times[rec] = t
            states[rec] = X
            rec += 1
    return times[:rec], states[:rec], 0, t, -1


def kernel_args(field) -> tuple | None:
    """Pack a ``NetworkField`` for the compiled loop, or None if unsupported."""
    d = field.dynamics
    fid = FIELD_IDS.get(d.name)
    cname = d.controller.name if d.controller is not None else None
    if fid is None or cname not in CONTROLLER_IDS:
        return None
    n = d.state_dim
    p = np.zeros(4)
    A = np.zeros((n, n))
    if fid == 0:
        p[:] = [d.params["a"], d.params["b"], d.params["c"], d.params["I"]]
    elif fid == 1:
        A = np.ascontiguousarray(d.system_matrix(), dtype=float)
    elif fid == 2:
        p[0] = d.params["omega"]
    cp = np.zeros(2)
    if cname == "pitchfork":
        cp[:] = [d.controller.params["alpha"], d.controller.params["beta"]]
    G = np.ascontiguousarray(d.coupling_gain, dtype=float)
    use_gain = field._gain is not None
    return (fid, p, A, CONTROLLER_IDS[cname], cp, np.ascontiguousarray(field.coupling), G,
            use_gain, float(field.k), field.N, n)
