"""Linear algebra on R^{2n} viewed as C^n.

Coordinates are laid out as (x_1..x_n, y_1..y_n) so that the complex
coordinates are z_j = x_j + i*y_j and multiplication by i is the blockwise
map (x, y) -> (-y, x).  The standard contact 1-form on the unit sphere,
the midpoint identification of a graph with a cotangent-bundle section,
and the inertia bookkeeping for symmetric matrices all live here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def as_coords(v, n: int | None = None) -> np.ndarray:
    """Coerce v (array-like or ComplexVector2n) to a float array of shape (..., 2n)."""
    if isinstance(v, ComplexVector2n):
        arr = v.coords
    else:
        arr = np.asarray(v, dtype=float)
    if arr.shape[-1] % 2 != 0:
        raise ValueError(f"coordinate vector must have even length, got {arr.shape[-1]}")
    if n is not None and arr.shape[-1] != 2 * n:
        raise ValueError(f"expected {2 * n} coordinates, got {arr.shape[-1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coordinates must be finite")
    return arr


def to_complex(x: np.ndarray) -> np.ndarray:
    """(..., 2n) real -> (..., n) complex under the (x, y) block layout."""
    n = x.shape[-1] // 2
    return x[..., :n] + 1j * x[..., n:]


def to_real(z: np.ndarray) -> np.ndarray:
    """(..., n) complex -> (..., 2n) real."""
    return np.concatenate([z.real, z.imag], axis=-1)


def mul_i(x: np.ndarray) -> np.ndarray:
    """Multiplication by i: (x, y) -> (-y, x), blockwise per complex coordinate."""
    n = x.shape[-1] // 2
    return np.concatenate([-x[..., n:], x[..., :n]], axis=-1)


def complex_structure_matrix(n: int) -> np.ndarray:
    """The 2n x 2n matrix of multiplication by i in the block layout."""
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return J


def symplectic_form_matrix(n: int) -> np.ndarray:
    """Matrix Omega of omega(u, v) = <iu, v> = u^T Omega^T v ... stored so that
    omega(u, v) = u @ Omega @ v."""
    # <iu, v> = (J u)^T v = u^T J^T v, so Omega = J^T = -J.
    return -complex_structure_matrix(n)


def realify(P: np.ndarray, Q: np.ndarray | None = None) -> np.ndarray:
    """Real 2n x 2n matrix of the real-linear map v -> P v + Q conj(v) on C^n.

    P, Q may be batched (..., n, n); the result is (..., 2n, 2n).
    """
    if Q is None:
        Q = np.zeros_like(P)
    A = P + Q
    B = P - Q
    top = np.concatenate([A.real, -B.imag], axis=-1)
    bot = np.concatenate([A.imag, B.real], axis=-1)
    return np.concatenate([top, bot], axis=-2)


def rotation_matrix(phase: float | np.ndarray, n: int) -> np.ndarray:
    """Realified multiplication by e^{i*phase} (batched over phase if an array)."""
    c = np.cos(phase)
    s = np.sin(phase)
    eye = np.eye(n)
    c = np.asarray(c)[..., None, None] * eye
    s = np.asarray(s)[..., None, None] * eye
    top = np.concatenate([c, -s], axis=-1)
    bot = np.concatenate([s, c], axis=-1)
    return np.concatenate([top, bot], axis=-2)


@dataclass(frozen=True)
class ComplexVector2n:
    """A point of R^{2n} = C^n in the (x_1..x_n, y_1..y_n) layout."""

    coords: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        arr = np.asarray(self.coords, dtype=float)
        if arr.ndim != 1 or arr.shape[0] % 2 != 0 or arr.shape[0] == 0:
            raise ValueError("coords must be a flat array of even positive length")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coords must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)
        object.__setattr__(self, "n", arr.shape[0] // 2)

    @classmethod
    def from_complex(cls, z) -> "ComplexVector2n":
        return cls(to_real(np.asarray(z, dtype=complex)))

    def complex(self) -> np.ndarray:
        return to_complex(self.coords)

    def times_i(self) -> "ComplexVector2n":
        return ComplexVector2n(mul_i(self.coords))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))


@dataclass(frozen=True)
class CotangentPoint:
    """A point (base, covector) of T*R^{2n}."""

    base: np.ndarray
    covector: np.ndarray

    def __post_init__(self):
        base = as_coords(self.base)
        cov = as_coords(self.covector)
        if base.shape != cov.shape:
            raise ValueError("base and covector must have matching dimension")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "covector", cov)


def contact_form_eval(q, v) -> float:
    """Value of alpha = x dy - y dx at q on the vector v.

    Works on the whole of R^{2n}; on the unit sphere this is the standard
    contact form, and alpha_q(i q) = |q|^2.
    """
    qa = as_coords(q)
    va = as_coords(v)
    if qa.shape != va.shape:
        raise ValueError("q and v must have the same dimension")
    n = qa.shape[-1] // 2
    x, y = qa[..., :n], qa[..., n:]
    vx, vy = va[..., :n], va[..., n:]
    val = np.sum(x * vy - y * vx, axis=-1)
    return float(val) if qa.ndim == 1 else val


def tau_embed(z, Z) -> CotangentPoint:
    """Identify a graph point (z, Z) with a point of T*R^{2n}.

    (x, y, X, Y) -> ((x+X)/2, (y+Y)/2, Y-y, x-X); the diagonal z == Z goes
    to the zero section.  In complex notation the covector is -i(Z - z).
    """
    za = as_coords(z)
    Za = as_coords(Z)
    if za.shape != Za.shape:
        raise ValueError("z and Z must have the same dimension")
    base = 0.5 * (za + Za)
    covector = -mul_i(Za - za)
    return CotangentPoint(base, covector)


def tau_covector(z: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Batched covector part of tau_embed: -i(Z - z) as a real array."""
    return -mul_i(Z - z)


@dataclass(frozen=True)
class QuadraticForm:
    """A real quadratic form u -> u^T M u stored as a symmetric matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("matrix must be square")
        if not np.all(np.isfinite(M)):
            raise ValueError("matrix entries must be finite")
        M = 0.5 * (M + M.T)
        M.flags.writeable = False
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, u) -> float | np.ndarray:
        ua = np.asarray(u, dtype=float)
        return np.einsum("...i,ij,...j->...", ua, self.matrix, ua)

    def gradient(self, u) -> np.ndarray:
        return 2.0 * np.asarray(u, dtype=float) @ self.matrix

    def direct_sum(self, other: "QuadraticForm") -> "QuadraticForm":
        m, k = self.dim, other.dim
        M = np.zeros((m + k, m + k))
        M[:m, :m] = self.matrix
        M[m:, m:] = other.matrix
        return QuadraticForm(M)


@dataclass(frozen=True)
class Inertia:
    """Eigenvalue sign counts of a symmetric matrix: index + nullity + coindex = m."""

    index: int
    nullity: int
    coindex: int

    @property
    def dim(self) -> int:
        return self.index + self.nullity + self.coindex


def inertia(Q: QuadraticForm | np.ndarray, tol: float | None = None) -> Inertia:
    """Count eigenvalues below -tol, inside (-tol, tol), and above tol.

    tol defaults to 1e-9 relative to the largest |eigenvalue|; it is never a
    hidden constant when passed explicitly.
    """
    M = Q.matrix if isinstance(Q, QuadraticForm) else np.asarray(Q, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    eigvals = np.linalg.eigvalsh(0.5 * (M + M.T))
    if tol is None:
        scale = float(np.max(np.abs(eigvals))) if eigvals.size else 0.0
        tol = 1e-9 * scale if scale > 0 else 1e-15
    if tol <= 0:
        raise ValueError("tol must be positive")
    index = int(np.sum(eigvals < -tol))
    coindex = int(np.sum(eigvals > tol))
    nullity = eigvals.size - index - coindex
    return Inertia(index=index, nullity=nullity, coindex=coindex)


def fr_index_quadratic(Q: QuadraticForm | np.ndarray, tol: float | None = None) -> int:
    """index + nullity of the form: the cohomological index of its sublevel set."""
    ine = inertia(Q, tol)
    return ine.index + ine.nullity
