"""Adaptive Dormand-Prince 5(4) integration kernels.

These are the hot loops of the package: Schrodinger (state vector),
operator, and Lindblad (density matrix) propagation of a packed
:class:`~ion_gate_sim.gatemodel.HamiltonianSchedule`. Each function is
written in numba-compatible numpy and compiled when the numba backend is
active (see :mod:`ion_gate_sim.backend`); on the numpy backend the same
source runs interpreted with BLAS doing the heavy lifting.

Schedule packing (see ``HamiltonianSchedule.pack``): term k contributes

    env(t; env_kind[k], env_par[k]) * (c_k(t) A_k + conj(c_k(t)) A_k^dag),
    c_k(t) = exp(i (w0[k] t + phase[k])) * trig[k](w1[k] t)

with trig codes 0 -> 1, 1 -> cos, 2 -> sin.

Status codes returned by the drivers: 0 success, 1 step-size underflow,
2 step budget exhausted.
"""

import numpy as np

from .backend import jit

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAX_STEPS = 2

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# b - b_hat (error estimator weights, k7 = FSAL stage)
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@jit
def _term_coefs(t, env_kind, env_par, w0, phase, trig, w1):
    """Complex coefficient env_k(t) * c_k(t) for every term."""
    n = w0.shape[0]
    c = np.empty(n, np.complex128)
    for k in range(n):
        e = 1.0
        if env_kind[k] == 1:
            t_r = env_par[k, 0]
            t_tot = env_par[k, 1]
            if t < 0.0 or t > t_tot:
                e = 0.0
            elif t < t_r:
                s = np.sin(np.pi * t / (2.0 * t_r))
                e = s * s
            elif t > t_tot - t_r:
                s = np.sin(np.pi * (t_tot - t) / (2.0 * t_r))
                e = s * s
        z = e * np.exp(1j * (w0[k] * t + phase[k]))
        if trig[k] == 1:
            z *= np.cos(w1[k] * t)
        elif trig[k] == 2:
            z *= np.sin(w1[k] * t)
        c[k] = z
    return c


@jit
def _rhs_psi(t, psi, ops_flat, ops_dag_flat, env_kind, env_par, w0, phase, trig, w1):
    """-i H(t) psi via two stacked mat-vec products."""
    n = w0.shape[0]
    d = psi.shape[0]
    c = _term_coefs(t, env_kind, env_par, w0, phase, trig, w1)
    y1 = np.dot(ops_flat, psi).reshape(n, d)
    y2 = np.dot(ops_dag_flat, psi).reshape(n, d)
    return -1j * (np.dot(c, y1) + np.dot(np.conj(c), y2))


@jit
def _build_h(t, ops, ops_dag, env_kind, env_par, w0, phase, trig, w1):
    n = ops.shape[0]
    d = ops.shape[1]
    c = _term_coefs(t, env_kind, env_par, w0, phase, trig, w1)
    H = np.zeros((d, d), np.complex128)
    for k in range(n):
        if c[k] != 0.0:
            H += c[k] * ops[k] + np.conj(c[k]) * ops_dag[k]
    return H


@jit
def _rhs_matrix(
    t, M, ops, ops_dag, env_kind, env_par, w0, phase, trig, w1,
    jump_ops, jump_ops_dag, jump_norms, density,
):
    """d M/dt: Lindblad RHS when ``density`` else -i H M (operator evolution)."""
    H = _build_h(t, ops, ops_dag, env_kind, env_par, w0, phase, trig, w1)
    if density == 0:
        return -1j * np.dot(H, M)
    out = -1j * (np.dot(H, M) - np.dot(M, H))
    for j in range(jump_ops.shape[0]):
        L = jump_ops[j]
        Ld = jump_ops_dag[j]
        LdL = jump_norms[j]
        out += np.dot(np.dot(L, M), Ld) - 0.5 * (np.dot(LdL, M) + np.dot(M, LdL))
    return out


@jit
def _error_norm(err, y_old, y_new, rtol, atol):
    d = err.shape[0]
    acc = 0.0
    for i in range(d):
        scale = atol + rtol * max(abs(y_old[i]), abs(y_new[i]))
        q = abs(err[i]) / scale
        acc += q * q
    return np.sqrt(acc / d)


@jit
def _error_norm_2d(err, y_old, y_new, rtol, atol):
    d = err.shape[0]
    acc = 0.0
    for i in range(d):
        for j in range(d):
            scale = atol + rtol * max(abs(y_old[i, j]), abs(y_new[i, j]))
            q = abs(err[i, j]) / scale
            acc += q * q
    return np.sqrt(acc / (d * d))


@jit
def rk45_schrodinger(
    psi0, t0, t1,
    ops_flat, ops_dag_flat, env_kind, env_par, w0, phase, trig, w1,
    dt_max, dt_init, rtol, atol, top2_idx, max_steps,
):
    """Propagate a state vector from t0 to t1.

    Returns (psi, dt_next, n_accepted, max_err, max_norm_dev, max_top2,
    status). ``max_top2`` is the largest population seen in the Fock levels
    listed in ``top2_idx`` over all accepted steps (truncation health);
    ``max_norm_dev`` the largest |norm - 1|.
    """
    psi = psi0.copy()
    t = t0
    h = min(dt_init, dt_max) if dt_init > 0.0 else dt_max
    k1 = _rhs_psi(t, psi, ops_flat, ops_dag_flat, env_kind, env_par, w0, phase, trig, w1)
    n_acc = 0
    n_steps = 0
    max_err = 0.0
    max_norm_dev = 0.0
    max_top2 = 0.0
    status = STATUS_OK
    span = t1 - t0
    while t < t1 - 1e-16 * max(abs(t1), 1.0):
        n_steps += 1
        if n_steps > max_steps:
            status = STATUS_MAX_STEPS
            break
        h = min(h, dt_max, t1 - t)
        if h < 1e-16 * span:
            status = STATUS_UNDERFLOW
            break
        k2 = _rhs_psi(t + _C2 * h, psi + h * (_A21 * k1),
                      ops_flat, ops_dag_flat, env_kind, env_par, w0, phase, trig, w1)
        k3 = _rhs_psi(t + _C3 * h, psi + h * (_A31 * k1 + _A32 * k2),
                      ops_flat, ops_dag_flat, env_kind, env_par, w0, phase, trig, w1)
        k4 = _rhs_psi(t + _C4 * h, psi + h * (_A41 * k1 + _A42 * k2 + _A43 * k3),
                      ops_flat, ops_dag_flat, env_kind, env_par, w0, phase, trig, w1)
        k5 = _rhs_psi(t + _C5 * h, psi + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4),
                      ops_flat, ops_dag_flat, env_kind, env_par, w0, phase, trig, w1)
        k6 = _rhs_psi(t + h, psi + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5),
                      ops_flat, ops_dag_flat, env_kind, env_par, w0, phase, trig, w1)
        y_new = psi + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = _rhs_psi(t + h, y_new,
                      ops_flat, ops_dag_flat, env_kind, env_par, w0, phase, trig, w1)
        err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        enorm = _error_norm(err, psi, y_new, rtol, atol)
        if enorm <= 1.0:
            t += h
            psi = y_new
            k1 = k7  # FSAL
            n_acc += 1
            if enorm > max_err:
                max_err = enorm
            nrm = np.real(np.vdot(psi, psi))
            dev = abs(nrm - 1.0)
            if dev > max_norm_dev:
                max_norm_dev = dev
            p = 0.0
            for i in top2_idx:
                p += abs(psi[i]) ** 2
            if p > max_top2:
                max_top2 = p
        if enorm == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * enorm ** -0.2))
        h = h * factor
    return psi, h, n_acc, max_err, max_norm_dev, max_top2, status


@jit
def rk45_matrix(
    M0, t0, t1,
    ops, ops_dag, env_kind, env_par, w0, phase, trig, w1,
    jump_ops, jump_ops_dag, jump_norms, density,
    dt_max, dt_init, rtol, atol, top2_idx, max_steps,
):
    """Propagate a density matrix (``density=1``) or an operator (``0``).

    Same return layout as :func:`rk45_schrodinger`; for density evolution
    ``max_norm_dev`` tracks |Tr rho - 1| and ``max_top2`` the diagonal
    population on ``top2_idx``; both are 0 for operator evolution.
    """
    M = M0.copy()
    t = t0
    h = min(dt_init, dt_max) if dt_init > 0.0 else dt_max
    k1 = _rhs_matrix(t, M, ops, ops_dag, env_kind, env_par, w0, phase, trig, w1,
                     jump_ops, jump_ops_dag, jump_norms, density)
    n_acc = 0
    n_steps = 0
    max_err = 0.0
    max_norm_dev = 0.0
    max_top2 = 0.0
    status = STATUS_OK
    span = t1 - t0
    while t < t1 - 1e-16 * max(abs(t1), 1.0):
        n_steps += 1
        if n_steps > max_steps:
            status = STATUS_MAX_STEPS
            break
        h = min(h, dt_max, t1 - t)
        if h < 1e-16 * span:
            status = STATUS_UNDERFLOW
            break
        k2 = _rhs_matrix(t + _C2 * h, M + h * (_A21 * k1),
                         ops, ops_dag, env_kind, env_par, w0, phase, trig, w1,
                         jump_ops, jump_ops_dag, jump_norms, density)
        k3 = _rhs_matrix(t + _C3 * h, M + h * (_A31 * k1 + _A32 * k2),
                         ops, ops_dag, env_kind, env_par, w0, phase, trig, w1,
                         jump_ops, jump_ops_dag, jump_norms, density)
        k4 = _rhs_matrix(t + _C4 * h, M + h * (_A41 * k1 + _A42 * k2 + _A43 * k3),
                         ops, ops_dag, env_kind, env_par, w0, phase, trig, w1,
                         jump_ops, jump_ops_dag, jump_norms, density)
        k5 = _rhs_matrix(t + _C5 * h, M + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4),
                         ops, ops_dag, env_kind, env_par, w0, phase, trig, w1,
                         jump_ops, jump_ops_dag, jump_norms, density)
        k6 = _rhs_matrix(t + h, M + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5),
                         ops, ops_dag, env_kind, env_par, w0, phase, trig, w1,
                         jump_ops, jump_ops_dag, jump_norms, density)
        y_new = M + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = _rhs_matrix(t + h, y_new,
                         ops, ops_dag, env_kind, env_par, w0, phase, trig, w1,
                         jump_ops, jump_ops_dag, jump_norms, density)
        err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        enorm = _error_norm_2d(err, M, y_new, rtol, atol)
        if enorm <= 1.0:
            t += h
            M = y_new
            k1 = k7
            n_acc += 1
            if enorm > max_err:
                max_err = enorm
            if density == 1:
                tr = 0.0
                for i in range(M.shape[0]):
                    tr += np.real(M[i, i])
                dev = abs(tr - 1.0)
                if dev > max_norm_dev:
                    max_norm_dev = dev
                p = 0.0
                for i in top2_idx:
                    p += np.real(M[i, i])
                if p > max_top2:
                    max_top2 = p
        if enorm == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * enorm ** -0.2))
        h = h * factor
    return M, h, n_acc, max_err, max_norm_dev, max_top2, status
