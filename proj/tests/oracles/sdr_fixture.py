#!/usr/bin/env python3
"""Reference objective values for the PSD-constrained quadratic solver.

Solves two fixed 2x2 Hermitian instances of

    min_V  mu * ||V - Vbar||_F^2 + sum_i w_i * (z_i - Tr(H_i V))^2
    s.t.   V >= 0

with an interior-point conic solver (CLARABEL via cvxpy) at tight
tolerances. The optimal objective values are frozen into test_sdr.cpp;
the projected-gradient implementation must reproduce them to 1e-5
relative. Instance B is chosen so the PSD constraint is active at the
optimum.
"""

import cvxpy as cp
import numpy as np


def solve(mu, vbar, terms):
    V = cp.Variable((2, 2), hermitian=True)
    obj = mu * cp.sum_squares(V - vbar)
    for H, z, w in terms:
        obj = obj + w * cp.square(z - cp.real(cp.trace(H @ V)))
    prob = cp.Problem(cp.Minimize(obj), [V >> 0])
    prob.solve(solver=cp.CLARABEL, max_iter=200)
    lam = np.linalg.eigvalsh(V.value)
    return prob.value, lam


def main() -> None:
    j = 1j

    # Instance A: interior optimum (prior well inside the cone).
    vbar_a = np.array([[1.0, 0.1 + 0.2 * j], [0.1 - 0.2 * j, 0.8]])
    terms_a = [
        (np.array([[1.0, 0.3 - 0.1 * j], [0.3 + 0.1 * j, -0.5]]), 0.8, 1.0),
        (np.array([[0.0, 0.2 + 0.4 * j], [0.2 - 0.4 * j, 1.2]]), -0.3, 1.0),
        (np.array([[2.0, -0.7 * j], [0.7 * j, 0.5]]), 1.1, 1.0),
    ]
    val_a, lam_a = solve(1.0, vbar_a, terms_a)

    # Instance B: data pulls one eigenvalue negative; constraint binds.
    vbar_b = np.array([[0.5, 0.0], [0.0, 0.5]])
    terms_b = [
        (np.array([[1.0, 0.0], [0.0, 0.0]]), 1.0, 1.0),
        (np.array([[0.0, 0.0], [0.0, 1.0]]), -2.0, 4.0),
        (np.array([[0.0, 1.0], [1.0, 0.0]]), 0.5, 1.0),
    ]
    val_b, lam_b = solve(1.0, vbar_b, terms_b)

    print(f"instance A: objective = {val_a:.12g}  eigenvalues = {lam_a}")
    print(f"instance B: objective = {val_b:.12g}  eigenvalues = {lam_b}")


if __name__ == "__main__":
    main()
