"""Reverse-mode gradient of the data-fidelity term through the forward solve.

The forward field is a composition of K accelerated-gradient iterations, so
the gradient of D(f) = 0.5 ||y - z(f)||^2 with respect to f is obtained by
backpropagating the sensor residual through the recorded iterates.  Two
multiplier fields are carried backwards per iteration:

  q^k -- the vector multiplying the (never-materialized) Jacobian of u^k,
  r^k -- the accumulated f-dependence already peeled off.

Per iteration the updates use S^k = I - gamma_k A^H A (self-adjoint) and
T^k v = conj(G^H(A s^k - u_in)) * v + conj(s^k) * G^H(A v); the momentum
couples q^{k-1} to both S^k q^k and the previous S^{k+1} q^{k+1}.  The
gradient is Re(r^0).  The f-dependence of the adaptive step sizes gamma_k is
deliberately ignored (they become stationary; a fixed step makes the gradient
exact).

Memory: the trace holds all K extrapolated fields, O(K N) complex values.
"""

import numpy as np

from .errors import DimensionError
from .forward import forward_solve
from .greens import apply_A, apply_AH


def data_fidelity(z, y):
    """D = 0.5 ||y - z||_2^2 between predicted and measured sensor fields."""
    z = np.asarray(z)
    y = np.asarray(y)
    if z.shape != y.shape:
        raise DimensionError(f"sensor counts differ: {z.shape} vs {y.shape}")
    resid = y - z
    return 0.5 * float(np.vdot(resid, resid).real)


def apply_Sk(f, gamma_k, v, G):
    """S^k v = v - gamma_k A^H (A v)."""
    return v - gamma_k * apply_AH(f, apply_A(f, v, G), G)


def apply_Tk(f, s_k, v, u_in, G):
    """T^k v = conj(G^H (A s^k - u_in)) * v + conj(s^k) * G^H (A v)."""
    grid = G.grid
    v = grid.check_field(v, "multiplier")
    resid = apply_A(f, s_k, G) - grid.check_field(u_in, "u_in")
    return (np.conj(G.apply_adjoint(resid)) * v
            + np.conj(s_k) * G.apply_adjoint(apply_A(f, v, G)))


def gradient_from_trace(f, y, u_in, G, H, trace):
    """Backward recursion over an existing forward trace; returns Re(r^0)."""
    grid = G.grid
    f = grid.check_field(f, "potential")
    y = np.asarray(y)
    if trace.z.shape != y.shape:
        raise DimensionError(f"sensor counts differ: {trace.z.shape} vs {y.shape}")
    resid = trace.z - y
    back = H.apply_adjoint(resid)
    q = f * back                      # diag(f)^H H^H (z - y), f real
    r = np.conj(trace.u_hat) * back   # diag(u_hat)^H H^H (z - y)

    Sq_next = np.zeros(grid.shape, dtype=complex)  # S^{k+1} q^{k+1}, zero at k = K
    mu_next = 0.0
    for k in range(trace.K_effective, 0, -1):
        s_k = trace.s_history[k - 1]
        gamma_k = trace.gamma_history[k - 1]
        mu_k = trace.mu_history[k - 1]
        Sq = apply_Sk(f, gamma_k, q, G)
        r = r + gamma_k * apply_Tk(f, s_k, q, u_in, G)
        # q^0 multiplies the f-independent u^0, so its exact closure at k = 1
        # is irrelevant to the returned gradient
        q = (1.0 - mu_k) * Sq + mu_next * Sq_next
        Sq_next = Sq
        mu_next = mu_k
    return np.real(r)


def gradient_data_fidelity(f, y, u_in, G, H, cfg):
    """Gradient of 0.5||y - z(f)||^2; runs the forward solve internally."""
    trace = forward_solve(f, u_in, G, H, cfg)
    return gradient_from_trace(f, y, u_in, G, H, trace)
