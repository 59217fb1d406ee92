"""Re-derive the Hardy fixture by direct numerical optimization.

Real two-qubit states in the setting-1 basis; the setting-2 basis is
rotated by ``theta`` (same on both sides). For fixed ``theta`` the three
forbidden outcomes 1R.1R, 1G.2G, 2G.1G are three linear conditions on psi,
so psi is the (generically unique) null vector of a 3x4 matrix. A bounded
scalar search over ``theta`` then maximizes P(2G.2G).

Run as a script to print the optimum.
"""

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize_scalar

EXPECTED_MAX = (5 * np.sqrt(5) - 11) / 2  # ≈ 0.0901699


def bases(theta):
    return {1: np.eye(2), 2: np.array([[np.cos(theta), np.sin(theta)], [np.sin(theta), -np.cos(theta)]])}


def outcome_vector(theta, label):
    b = bases(theta)
    (sl, ol), (sr, orr) = label.split(".")
    col = {"R": 0, "G": 1}
    return np.kron(b[int(sl)][:, col[ol]], b[int(sr)][:, col[orr]])


def hardy_state(theta):
    rows = np.array([outcome_vector(theta, lbl) for lbl in ("1R.1R", "1G.2G", "2G.1G")])
    ns = null_space(rows)
    return ns[:, 0]


def p_2g2g(theta):
    return float(np.dot(outcome_vector(theta, "2G.2G"), hardy_state(theta)) ** 2)


def optimize():
    # theta near 0 or pi/2 makes the settings coincide; stay inside
    res = minimize_scalar(lambda t: -p_2g2g(t), bounds=(0.05, np.pi / 2 - 0.05), method="bounded",
                          options={"xatol": 1e-12})
    return -res.fun, res.x, hardy_state(res.x)


if __name__ == "__main__":
    value, theta, psi = optimize()
    print(f"max P(2G.2G) = {value:.12f} (closed form {EXPECTED_MAX:.12f})")
    print("theta", theta, "state", psi * np.sign(psi[1]))
