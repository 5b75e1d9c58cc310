"""Homogeneous generating functions as composition DAGs.

Three node kinds: a Leaf solves the midpoint equation of a C^1-small flow
piece by Newton, a Quadratic is an explicit symmetric matrix on the base, and
Compose glues two nodes with the sharp-product

    (F # G)(u; v, w, mu, eta) = F(u+w; mu) + G(v+w; eta) + 2<u-v, iw>,

which generates (map of G) o (map of F) and adds 4n fiber variables.  Every
node evaluates values, gradients and Hessians in batch; evaluation is
reentrant and nodes are immutable after construction.

All constructed functions are homogeneous of degree 2, F(lambda x) =
lambda^2 F(x); leaf values come from the Euler identity F(b) = <grad F, b>/2,
which enforces the F(0) = 0 normalization without quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .flow import FlowMap, IntegratorSettings
from .linsymp import QuadraticForm, complex_structure_matrix, mul_i
from .sampling import sphere_points


class LeafNewtonError(RuntimeError):
    """The midpoint solve of a leaf did not converge: the piece is not
    C^1-small enough and the caller must re-subdivide."""


def _as_batch(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        return arr[None, :], True
    return arr, False


class GenFun:
    """Base node: base_dim = 2n, fiber_dim per node kind."""

    base_dim: int
    fiber_dim: int

    @property
    def total_dim(self) -> int:
        return self.base_dim + self.fiber_dim

    @property
    def is_quadratic(self) -> bool:
        raise NotImplementedError

    def evaluate(self, x: np.ndarray, order: int = 1, leaf_cache: dict | None = None):
        """Batched evaluation at x of shape (B, total_dim).

        Returns (val, grad, hess, ok): val (B,), grad (B, D) for order >= 1,
        hess (B, D, D) for order >= 2 (else None), ok (B,) bool marking rows
        whose leaf solves converged.  leaf_cache holds pre-solved midpoint
        data keyed by leaf identity (see evaluate_stacked).
        """
        raise NotImplementedError

    def map_points(self, z: np.ndarray, with_jacobian: bool = False):
        """Apply the underlying symplectomorphism to points z of shape (B, 2n)."""
        raise NotImplementedError

    def chain_seed(self, z: np.ndarray):
        """Fiber variables of the canonical fiber-critical point over the
        chain starting at z: returns (fiber (B, fiber_dim), z_out (B, 2n))."""
        raise NotImplementedError


class QuadraticGF(GenFun):
    """Generating quadratic form Q(b) = b^T M b on the base, no fiber."""

    def __init__(self, matrix: np.ndarray):
        M = np.asarray(matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2 != 0:
            raise ValueError("matrix must be square of even size")
        self.matrix = 0.5 * (M + M.T)
        self.base_dim = M.shape[0]
        self.fiber_dim = 0
        n = self.base_dim // 2
        J = complex_structure_matrix(n)
        # Graph of dQ under the midpoint identification: Z = (M+J)^{-1}(J-M) z.
        self._map = np.linalg.solve(self.matrix + J, J - self.matrix)

    @property
    def is_quadratic(self) -> bool:
        return True

    def evaluate(self, x, order=1, leaf_cache=None):
        x = np.asarray(x, dtype=float)
        B = x.shape[0]
        val = np.einsum("bi,ij,bj->b", x, self.matrix, x)
        grad = 2.0 * x @ self.matrix if order >= 1 else None
        hess = None
        if order >= 2:
            hess = np.broadcast_to(2.0 * self.matrix, (B,) + self.matrix.shape).copy()
        return val, grad, hess, np.ones(B, dtype=bool)

    def map_points(self, z, with_jacobian=False):
        z = np.asarray(z, dtype=float)
        out = z @ self._map.T
        if with_jacobian:
            jac = np.broadcast_to(self._map, (z.shape[0],) + self._map.shape).copy()
            return out, jac
        return out

    def chain_seed(self, z):
        z = np.asarray(z, dtype=float)
        return np.zeros((z.shape[0], 0)), self.map_points(z)


class LeafGF(GenFun):
    """Generating function of one C^1-small flow piece.

    Evaluation solves (z + Phi(z))/2 = b for z by Newton with the integrated
    Jacobian, then reads the gradient off the graph identification,
    grad F(b) = i(z - Phi(z)), and the value off the Euler identity.
    """

    def __init__(self, piece: FlowMap, newton_tol: float = 1e-11, max_iter: int = 30):
        self.piece = piece
        self.newton_tol = newton_tol
        self.max_iter = max_iter
        self.base_dim = 2 * piece.spec.n
        self.fiber_dim = 0
        self._J = complex_structure_matrix(piece.spec.n)

    @property
    def is_quadratic(self) -> bool:
        return False

    def _solve_midpoint(self, b: np.ndarray):
        return solve_midpoint(
            self.piece.spec,
            self.piece.t0,
            self.piece.t1,
            self.piece.settings,
            b,
            self.newton_tol,
            self.max_iter,
        )

    def evaluate(self, x, order=1, leaf_cache=None):
        b = np.asarray(x, dtype=float)
        if leaf_cache is not None and id(self) in leaf_cache:
            z, Zv, jac, ok = leaf_cache[id(self)]
        else:
            z, Zv, jac, ok = self._solve_midpoint(b)
        grad = mul_i(z - Zv)
        val = 0.5 * np.sum(grad * b, axis=1)
        hess = None
        if order >= 2:
            m = b.shape[1]
            eye = np.eye(m)
            # Hessian = 2 J (I - DPhi)(I + DPhi)^{-1}; the Cayley transform of
            # a symplectic matrix, hence symmetric up to integrator error.
            C = np.linalg.solve(
                np.swapaxes(eye + jac, -1, -2), np.swapaxes(eye - jac, -1, -2)
            )
            C = np.swapaxes(C, -1, -2)
            H = 2.0 * self._J @ C
            hess = 0.5 * (H + np.swapaxes(H, -1, -2))
        return val, grad, hess, ok

    def map_points(self, z, with_jacobian=False):
        z = np.asarray(z, dtype=float)
        if self.piece.is_identity():
            if with_jacobian:
                m = z.shape[1]
                return z.copy(), np.broadcast_to(np.eye(m), (z.shape[0], m, m)).copy()
            return z.copy()
        out, jac = self.piece(z, with_jacobian=with_jacobian)
        return (out, jac) if with_jacobian else out

    def chain_seed(self, z):
        z = np.asarray(z, dtype=float)
        return np.zeros((z.shape[0], 0)), self.map_points(z)


def _unit_row(m: int) -> np.ndarray:
    e = np.zeros(m)
    e[0] = 1.0
    return e


def solve_midpoint(spec, t0, t1, settings, b, newton_tol=1e-11, max_iter=30):
    """Solve (z + Phi(z))/2 = b by Newton for the piece flow over [t0, t1].

    Returns (z, Phi(z), DPhi(z), ok).  Rows whose Newton fails, or whose base
    norm underflows (the cone tip is rejected), come back with ok = False.
    """
    from .flow import integrate_flow

    b = np.asarray(b, dtype=float)
    B, m = b.shape
    eye = np.eye(m)
    if t1 == t0:
        jac = np.broadcast_to(eye, (B, m, m)).copy()
        return b.copy(), b.copy(), jac, np.ones(B, dtype=bool)
    scale = np.linalg.norm(b, axis=1)
    alive = scale > 1e-150
    safe_b = np.where(alive[:, None], b, _unit_row(m))
    z = safe_b.copy()
    ok = np.zeros(B, dtype=bool)
    Zv = z.copy()
    jac = np.broadcast_to(eye, (B, m, m)).copy()
    for _ in range(max_iter):
        dead = np.linalg.norm(z, axis=1) < 1e-120
        if np.any(dead):
            alive = alive & ~dead
            z = np.where(alive[:, None], z, _unit_row(m))
        Zv, jac = integrate_flow(spec, z, t0, t1, settings, with_jacobian=True)
        resid = 0.5 * (z + Zv) - safe_b
        rnorm = np.linalg.norm(resid, axis=1)
        ok = alive & (rnorm <= newton_tol * np.maximum(scale, 1e-12))
        if np.all(ok | ~alive):
            break
        try:
            step = np.linalg.solve(0.5 * (jac + eye), resid[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            # a piece on the edge of C^1-smallness: let the residual test
            # decide, never crash the whole batch
            step = (np.linalg.pinv(0.5 * (jac + eye)) @ resid[:, :, None])[:, :, 0]
        upd = ~ok & alive
        z = z - np.where(upd[:, None], step, 0.0)
    else:
        Zv, jac = integrate_flow(spec, z, t0, t1, settings, with_jacobian=True)
        resid = 0.5 * (z + Zv) - safe_b
        rnorm = np.linalg.norm(resid, axis=1)
        ok = alive & (rnorm <= newton_tol * np.maximum(scale, 1e-12))
    return z, Zv, jac, ok


class ComposeGF(GenFun):
    """Sharp-product node; left child is the map applied first."""

    def __init__(self, first: GenFun, second: GenFun):
        if first.base_dim != second.base_dim:
            raise ValueError("base dimensions must match")
        self.first = first
        self.second = second
        self.base_dim = first.base_dim
        self.fiber_dim = 2 * self.base_dim + first.fiber_dim + second.fiber_dim

    @property
    def is_quadratic(self) -> bool:
        return self.first.is_quadratic and self.second.is_quadratic

    def _slices(self):
        m = self.base_dim
        fF = self.first.fiber_dim
        fG = self.second.fiber_dim
        su = slice(0, m)
        sv = slice(m, 2 * m)
        sw = slice(2 * m, 3 * m)
        smu = slice(3 * m, 3 * m + fF)
        seta = slice(3 * m + fF, 3 * m + fF + fG)
        return su, sv, sw, smu, seta

    def evaluate(self, x, order=1, leaf_cache=None):
        x = np.asarray(x, dtype=float)
        B = x.shape[0]
        m = self.base_dim
        su, sv, sw, smu, seta = self._slices()
        u, v, w = x[:, su], x[:, sv], x[:, sw]
        xF = np.concatenate([u + w, x[:, smu]], axis=1)
        xG = np.concatenate([v + w, x[:, seta]], axis=1)
        vF, gF, HF, okF = self.first.evaluate(xF, order, leaf_cache)
        vG, gG, HG, okG = self.second.evaluate(xG, order, leaf_cache)
        iw = mul_i(w)
        val = vF + vG + 2.0 * np.sum((u - v) * iw, axis=1)
        ok = okF & okG
        grad = None
        hess = None
        if order >= 1:
            grad = np.zeros((B, self.total_dim))
            grad[:, su] = gF[:, :m] + 2.0 * iw
            grad[:, sv] = gG[:, :m] - 2.0 * iw
            grad[:, sw] = gF[:, :m] + gG[:, :m] - 2.0 * mul_i(u - v)
            grad[:, smu] = gF[:, m:]
            grad[:, seta] = gG[:, m:]
        if order >= 2:
            hess = np.zeros((B, self.total_dim, self.total_dim))
            bbF, bfF, ffF = HF[:, :m, :m], HF[:, :m, m:], HF[:, m:, m:]
            bbG, bfG, ffG = HG[:, :m, :m], HG[:, :m, m:], HG[:, m:, m:]
            for s1 in (su, sw):
                for s2 in (su, sw):
                    hess[:, s1, s2] += bbF
            for s1 in (sv, sw):
                for s2 in (sv, sw):
                    hess[:, s1, s2] += bbG
            bfFT = np.swapaxes(bfF, -1, -2)
            bfGT = np.swapaxes(bfG, -1, -2)
            hess[:, su, smu] += bfF
            hess[:, sw, smu] += bfF
            hess[:, smu, su] += bfFT
            hess[:, smu, sw] += bfFT
            hess[:, smu, smu] += ffF
            hess[:, sv, seta] += bfG
            hess[:, sw, seta] += bfG
            hess[:, seta, sv] += bfGT
            hess[:, seta, sw] += bfGT
            hess[:, seta, seta] += ffG
            J2 = 2.0 * complex_structure_matrix(m // 2)
            hess[:, su, sw] += J2
            hess[:, sw, su] += -J2
            hess[:, sv, sw] += -J2
            hess[:, sw, sv] += J2
        return val, grad, hess, ok

    def map_points(self, z, with_jacobian=False):
        if not with_jacobian:
            return self.second.map_points(self.first.map_points(z))
        mid, jac1 = self.first.map_points(z, with_jacobian=True)
        out, jac2 = self.second.map_points(mid, with_jacobian=True)
        return out, jac2 @ jac1

    def chain_seed(self, z):
        fibF, z_mid = self.first.chain_seed(z)
        fibG, z_out = self.second.chain_seed(z_mid)
        v = z_out
        w = 0.5 * (z_mid - z_out)
        return np.concatenate([v, w, fibF, fibG], axis=1), z_out


def gf_compose(first: GenFun, second: GenFun) -> GenFun:
    """Sharp-composition: result generates (map of second) o (map of first)."""
    return ComposeGF(first, second)


def _collect_leaf_bases(gf: GenFun, x: np.ndarray, out: list) -> None:
    if isinstance(gf, LeafGF):
        out.append((gf, x))
    elif isinstance(gf, ComposeGF):
        su, sv, sw, smu, seta = gf._slices()
        u, v, w = x[:, su], x[:, sv], x[:, sw]
        _collect_leaf_bases(gf.first, np.concatenate([u + w, x[:, smu]], axis=1), out)
        _collect_leaf_bases(gf.second, np.concatenate([v + w, x[:, seta]], axis=1), out)


def evaluate_stacked(gf: GenFun, x: np.ndarray, order: int = 1):
    """Evaluate like GenFun.evaluate but solve all leaf midpoints in one
    stacked Newton per compatible group.

    Leaves of an autonomous spec depend only on their span, so their batches
    concatenate into a single integration; this amortizes the per-step cost
    across the whole DAG.  Results are bitwise the plain recursive ones.
    """
    x = np.asarray(x, dtype=float)
    requests: list[tuple[LeafGF, np.ndarray]] = []
    _collect_leaf_bases(gf, x, requests)
    cache: dict[int, tuple] = {}
    groups: dict[tuple, list[tuple[LeafGF, np.ndarray]]] = {}
    for leaf, base in requests:
        piece = leaf.piece
        if piece.spec.is_autonomous():
            key = (piece.spec, round(piece.span, 15), piece.settings,
                   leaf.newton_tol, leaf.max_iter)
        else:
            key = (piece.spec, piece.t0, piece.t1, piece.settings,
                   leaf.newton_tol, leaf.max_iter)
        groups.setdefault(key, []).append((leaf, base))
    for entries in groups.values():
        leaf0 = entries[0][0]
        piece0 = leaf0.piece
        bases = np.concatenate([b for _, b in entries], axis=0)
        if piece0.spec.is_autonomous():
            t0, t1 = 0.0, piece0.span
        else:
            t0, t1 = piece0.t0, piece0.t1
        z, Zv, jac, ok = solve_midpoint(
            piece0.spec, t0, t1, piece0.settings, bases, leaf0.newton_tol, leaf0.max_iter
        )
        offset = 0
        for leaf, b in entries:
            B = b.shape[0]
            sl = slice(offset, offset + B)
            cache[id(leaf)] = (z[sl], Zv[sl], jac[sl], ok[sl])
            offset += B
    return gf.evaluate(x, order, leaf_cache=cache)


def gf_eval(gf: GenFun, x) -> float:
    xb, single = _as_batch(x)
    val, _, _, ok = evaluate_stacked(gf, xb, order=0)
    if not np.all(ok):
        raise LeafNewtonError("leaf midpoint solve failed at the requested point")
    return float(val[0]) if single else val


def gf_grad(gf: GenFun, x) -> np.ndarray:
    xb, single = _as_batch(x)
    _, grad, _, ok = evaluate_stacked(gf, xb, order=1)
    if not np.all(ok):
        raise LeafNewtonError("leaf midpoint solve failed at the requested point")
    return grad[0] if single else grad


def gf_leaf_eval(piece: FlowMap, b) -> tuple[float, np.ndarray]:
    """Value and gradient of the generating function of one C^1-small piece."""
    leaf = LeafGF(piece)
    bb, single = _as_batch(b)
    val, grad, _, ok = leaf.evaluate(bb, order=1)
    if not np.all(ok):
        raise LeafNewtonError("midpoint Newton did not converge; re-subdivide the piece")
    if single:
        return float(val[0]), grad[0]
    return val, grad


def quadratic_form_for_rotation(t: float, n: int) -> QuadraticForm:
    """Q_t(u) = -tan(pi t) |u|^2 on R^{2n}, generating the rotation e^{-2 pi i t}."""
    if abs(t) >= 0.5:
        raise ValueError("|t| must be < 1/2; compose pieces for larger rotations")
    return QuadraticForm(-math.tan(math.pi * t) * np.eye(2 * n))


def rotation_leaf(t: float, n: int) -> QuadraticGF:
    return QuadraticGF(quadratic_form_for_rotation(t, n).matrix)


def flatten_quadratic(gf: GenFun) -> np.ndarray:
    """Assemble the symmetric matrix of an all-quadratic DAG."""
    if not gf.is_quadratic:
        raise TypeError("only all-quadratic DAGs flatten to a single matrix")
    D = gf.total_dim
    _, _, hess, _ = gf.evaluate(np.zeros((1, D)), order=2)
    return 0.5 * hess[0]


def _compose_quadratic_matrices(MF, dMF, MG, dMG, n: int):
    """Batched sharp-composition of quadratic form matrices.

    MF: (B, dF, dF) on (base 2n, fiber fF); MG: (B, 2n, 2n) fiberless.
    Returns the composed (B, dF+4n, dF+4n) matrix and its parameter
    derivative (assembly is linear in the constituents; the pairing block is
    constant so it drops from the derivative).
    """
    m = 2 * n
    B, dF = MF.shape[0], MF.shape[1]
    fF = dF - m
    D = 3 * m + fF
    su, sv, sw = slice(0, m), slice(m, 2 * m), slice(2 * m, 3 * m)
    smu = slice(3 * m, D)

    def assemble(AF, AG, with_pairing: bool):
        N = np.zeros((B, D, D))
        bb, bf, ff = AF[:, :m, :m], AF[:, :m, m:], AF[:, m:, m:]
        bfT = np.swapaxes(bf, -1, -2)
        for s1 in (su, sw):
            for s2 in (su, sw):
                N[:, s1, s2] += bb
        for s1 in (sv, sw):
            for s2 in (sv, sw):
                N[:, s1, s2] += AG
        N[:, su, smu] += bf
        N[:, sw, smu] += bf
        N[:, smu, su] += bfT
        N[:, smu, sw] += bfT
        N[:, smu, smu] += ff
        if with_pairing:
            J = complex_structure_matrix(n)
            N[:, su, sw] += J
            N[:, sw, su] += -J
            N[:, sv, sw] += -J
            N[:, sw, sv] += J
        return N

    return assemble(MF, MG, True), assemble(dMF, dMG, False)


def rotation_family_matrices(t, n: int, k: int):
    """Batched matrices (M_A(t), dM_A/dt) of the k-piece family for a_t.

    t may be a scalar or shape (B,).  Each piece is the quadratic form
    -tan(pi t / k) |u|^2 (a rotation by -2 pi t / k); left-associated
    composition of k pieces gives a form on R^{2n + 4n(k-1)}.
    """
    if k < 3:
        raise ValueError("k must be >= 3 so each piece rotates by less than half a turn")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.abs(t_arr) / k >= 0.5):
        raise ValueError("|t|/k must stay below 1/2")
    B = t_arr.shape[0]
    m = 2 * n
    coeff = -np.tan(np.pi * t_arr / k)
    dcoeff = -(np.pi / k) / np.cos(np.pi * t_arr / k) ** 2
    eye = np.eye(m)
    piece = coeff[:, None, None] * eye
    dpiece = dcoeff[:, None, None] * eye
    M, dM = piece, dpiece
    for _ in range(k - 1):
        M, dM = _compose_quadratic_matrices(M, dM, piece, dpiece, n)
    if np.ndim(t) == 0:
        return M[0], dM[0]
    return M, dM


@dataclass(frozen=True)
class RotationFamily:
    """The k-piece generating family A_t of the negative Reeb flow a_t."""

    t: float
    n: int
    k: int
    genfun: GenFun
    matrix: np.ndarray

    @property
    def form(self) -> QuadraticForm:
        return QuadraticForm(self.matrix)


def build_rotation_family(t: float, n: int, k: int) -> RotationFamily:
    """Compose k copies of the rotation quadratic for a_{t/k} and flatten."""
    if k < 3:
        raise ValueError("k must be >= 3")
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    gf: GenFun = rotation_leaf(t / k, n)
    for _ in range(k - 1):
        gf = gf_compose(gf, rotation_leaf(t / k, n))
    matrix, _ = rotation_family_matrices(t, n, k)
    return RotationFamily(t=t, n=n, k=k, genfun=gf, matrix=matrix)


def fiber_critical_solve(
    gf: GenFun,
    base: np.ndarray,
    fiber0: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 40,
):
    """Newton on the fiber block: find fiber with d_fiber F(base; fiber) = 0.

    Returns (fiber, ok).  The base stays fixed; the Jacobian is the
    fiber-fiber block of the Hessian.
    """
    base = np.asarray(base, dtype=float)
    fiber = np.asarray(fiber0, dtype=float).copy()
    B = base.shape[0]
    m = gf.base_dim
    ok = np.zeros(B, dtype=bool)
    scale = np.maximum(np.linalg.norm(base, axis=1), 1e-12)
    for _ in range(max_iter):
        x = np.concatenate([base, fiber], axis=1)
        _, grad, hess, ok_eval = evaluate_stacked(gf, x, order=2)
        gfib = grad[:, m:]
        ok = ok_eval & (np.linalg.norm(gfib, axis=1) <= tol * scale)
        if np.all(ok | ~ok_eval):
            break
        Hff = hess[:, m:, m:]
        try:
            step = np.linalg.solve(Hff, gfib[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            step = (np.linalg.pinv(Hff) @ gfib[:, :, None])[:, :, 0]
        upd = ~ok & ok_eval
        fiber = fiber - np.where(upd[:, None], step, 0.0)
    return fiber, ok


def reduced_covector(gf: GenFun, base: np.ndarray, fiber: np.ndarray):
    """Base gradient at a fiber-critical point: the covector of i_F."""
    x = np.concatenate([base, fiber], axis=1)
    _, grad, _, ok = evaluate_stacked(gf, x, order=1)
    return grad[:, : gf.base_dim], ok


# ---------------------------------------------------------------------------
# Shared-schedule families and monotonicity
# ---------------------------------------------------------------------------


def shared_schedule_family(spec, schedule, settings: IntegratorSettings):
    """t -> GenFun for the isotopy time-t map, on one fixed total space.

    Every piece of the fixed subdivision schedule is present for every t,
    clamped to [min(a, t), min(b, t)]; pieces ahead of t degenerate to the
    identity leaf.  The total space therefore never changes with t, which is
    what makes d F_t / d t meaningful pointwise.
    """

    def family_at(t: float) -> GenFun:
        gf: GenFun | None = None
        for a, b in schedule:
            leaf = LeafGF(FlowMap(spec, min(a, t), min(b, t), settings))
            gf = leaf if gf is None else gf_compose(gf, leaf)
        return gf

    return family_at


def monotonicity_probe_values(
    spec,
    settings: IntegratorSettings | None = None,
    delta: float = 1.0,
    sample_count: int = 64,
    t_count: int = 16,
    fd_step: float = 1e-4,
):
    """Finite-difference values of dF_t/dt on fixed total-space samples.

    Requires a sign-definite Hamiltonian (checked by sampling the sphere);
    raises otherwise.  Returns an array of shape (t_count, sample_count).
    """
    from .flow import subdivide_c1_small
    from .hamiltonian import sphere_value
    from .linsymp import to_complex

    if settings is None:
        settings = IntegratorSettings()
    schedule = subdivide_c1_small(spec, 0.0, 1.0, delta, settings)
    family_at = shared_schedule_family(spec, schedule, settings)
    dim = family_at(0.5).total_dim
    samples = sphere_points(sample_count, dim, seed=0.3)

    knots = np.array([a for a, _ in schedule] + [1.0])
    t_grid = (np.arange(t_count) + 0.5) / t_count
    for i, t in enumerate(t_grid):
        # keep the centered stencil inside one piece
        while np.min(np.abs(knots - t_grid[i])) < 2 * fd_step:
            t_grid[i] += 4 * fd_step

    sphere_q = to_complex(sphere_points(64 * spec.n, 2 * spec.n))
    h_vals = np.concatenate([np.atleast_1d(sphere_value(spec, sphere_q, t)) for t in t_grid])
    if np.any(h_vals > 0) and np.any(h_vals < 0) or np.any(h_vals == 0):
        raise ValueError("Hamiltonian is not sign-definite on the sphere sample set")

    probes = np.zeros((t_count, sample_count))
    for i, t in enumerate(t_grid):
        hi, _, _, ok_hi = evaluate_stacked(family_at(t + fd_step), samples, order=0)
        lo, _, _, ok_lo = evaluate_stacked(family_at(t - fd_step), samples, order=0)
        if not np.all(ok_hi & ok_lo):
            raise LeafNewtonError("leaf solve failed during the monotonicity probe")
        probes[i] = (hi - lo) / (2.0 * fd_step)
    return probes


def monotonicity_probe(
    spec,
    settings: IntegratorSettings | None = None,
    delta: float = 1.0,
    sample_count: int = 64,
    t_count: int = 16,
    fd_step: float = 1e-4,
) -> float:
    """Minimum finite-difference time-derivative of the shared-schedule
    family over the sample set; strictly positive for positive isotopies."""
    return float(
        np.min(
            monotonicity_probe_values(
                spec, settings, delta, sample_count, t_count, fd_step
            )
        )
    )
