"""Independent oracles used by the test suite.

Everything here deliberately avoids the library's own code paths: the
eigenvalue counter is a hand-rolled cyclic Jacobi iteration (not LAPACK's
QR used by numpy.linalg.eigh), the matrix exponential is scaling-and-
squaring on a Taylor series, and the Hamiltonian evaluator is a direct
transcription with python loops instead of compiled monomial tables.
"""

from __future__ import annotations

import numpy as np


def jacobi_eigenvalues(M: np.ndarray, tol: float = 1e-13, max_sweeps: int = 64):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations."""
    A = np.array(M, dtype=float)
    m = A.shape[0]
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(A**2) - np.sum(np.diag(A) ** 2))
        if off <= tol * max(1.0, np.abs(np.diag(A)).max()):
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                if abs(A[p, q]) < 1e-300:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                if tau == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot_p = c * A[:, p] - s * A[:, q]
                rot_q = s * A[:, p] + c * A[:, q]
                A[:, p], A[:, q] = rot_p, rot_q
                rot_p = c * A[p, :] - s * A[q, :]
                rot_q = s * A[p, :] + c * A[q, :]
                A[p, :], A[q, :] = rot_p, rot_q
    return np.sort(np.diag(A))


def inertia_via_jacobi(M: np.ndarray, tol: float):
    vals = jacobi_eigenvalues(M)
    index = int(np.sum(vals < -tol))
    coindex = int(np.sum(vals > tol))
    return index, len(vals) - index - coindex, coindex


def expm(A: np.ndarray, order: int = 18) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring on the Taylor series."""
    A = np.asarray(A, dtype=float)
    norm = np.linalg.norm(A, ord=np.inf)
    squarings = max(0, int(np.ceil(np.log2(max(norm, 1e-16)))) + 1)
    B = A / (2.0**squarings)
    E = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for k in range(1, order + 1):
        term = term @ B / k
        E = E + term
    for _ in range(squarings):
        E = E @ E
    return E


def naive_lift_value(spec, z_complex: np.ndarray) -> float:
    """Direct loop transcription of |z|^2 h(z/|z|) for one complex point."""
    z = np.asarray(z_complex, dtype=complex)
    rho = float(np.sum((z * z.conj()).real))
    val = sum(c * float((zj * zj.conjugate()).real) for c, zj in zip(spec.quadratic, z))
    for term in spec.terms:
        mono = 1.0 + 0.0j
        for j in range(spec.n):
            mono *= z[j] ** term.z_powers[j]
            mono *= z[j].conjugate() ** term.zbar_powers[j]
        val += term.amplitude * rho ** (0.5 * (2 - term.degree)) * mono.real
    return val


def fd_gradient(f, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central finite differences of a scalar function of a flat vector."""
    g = np.zeros_like(x, dtype=float)
    for k in range(x.shape[0]):
        e = np.zeros_like(x, dtype=float)
        e[k] = eps
        g[k] = (f(x + e) - f(x - e)) / (2.0 * eps)
    return g


def random_orthogonal(m: int, rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(m, m)))
    return Q * np.sign(np.diag(R))
