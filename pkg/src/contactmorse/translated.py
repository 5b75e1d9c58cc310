"""Detection, matching, classification and Morse counting of translated points.

Two independent routes find the translated points of the time-1 map of a
contact isotopy of S^{2n-1}:

* the direct route solves e^{-2 pi i t} Phi(q) = q, |q| = 1 over (q, t) by
  multistart Newton on the lifted flow (the ground truth);
* the genfun route finds critical rays of the shifted generating family
  F_t = F_phi # A_t on the unit sphere of its total space, reduces each
  critical point to its base ray, and re-verifies it against the direct
  residual.

The two record sets must agree; disagreement is a hard failure, not
something to average away.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import genfun as gfm
from .flow import IntegratorSettings, integrate_flow
from .genfun import GenFun, build_rotation_family, evaluate_stacked, rotation_family_matrices
from .hamiltonian import ContactHamiltonianSpec
from .linsymp import (
    complex_structure_matrix,
    inertia,
    mul_i,
    rotation_matrix,
    to_complex,
    to_real,
)
from .sampling import sphere_points


class ConfigurationError(RuntimeError):
    """A structural contract failed (unexpected nullity, bad rotation family)."""


class RouteDisagreementError(RuntimeError):
    """The genfun and direct routes disagree; carries a diagnostic dump."""

    def __init__(self, message: str, dump: dict):
        super().__init__(message)
        self.dump = dump


@dataclass(frozen=True)
class TranslatedPointRecord:
    """One detected translated point q with Reeb shift t (Hopf fraction)."""

    q: tuple[float, ...]
    t: float
    residual_fixed: float
    residual_g: float
    nondegenerate: bool | None  # None: tolerance-ambiguous spectrum
    route: str  # direct | genfun | both
    gf_value: float | None = None  # critical value residual, genfun route only

    def q_array(self) -> np.ndarray:
        return np.asarray(self.q)


@dataclass
class DetectionResult:
    records: list[TranslatedPointRecord]
    continuum_suspected: bool
    converged_raw: int
    inconsistent: list[TranslatedPointRecord] = field(default_factory=list)


@dataclass
class SweepReport:
    records: list[TranslatedPointRecord]
    event_ts: list[float]
    sphere_count: int | None
    projective_count: int | None
    index_data: dict
    continuum_suspected: bool
    bound_asserted: bool
    bound_threshold: int
    bound_met: bool | None
    route_stats: dict


def phase_shift(z: np.ndarray, t) -> np.ndarray:
    """e^{-2 pi i t} z for real-coordinate points z, t scalar or per-row."""
    zc = to_complex(np.asarray(z, dtype=float))
    phase = np.exp(-2j * np.pi * np.asarray(t, dtype=float))
    if zc.ndim > 1:
        phase = np.asarray(phase)[..., None]
    return to_real(phase * zc)


def _angular_distance(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    dot = np.clip(np.sum(q1 * q2, axis=-1), -1.0, 1.0)
    return np.arccos(dot)


def _t_distance(t1, t2) -> np.ndarray:
    d = np.abs(np.asarray(t1) - np.asarray(t2)) % 1.0
    return np.minimum(d, 1.0 - d)


# ---------------------------------------------------------------------------
# Direct fixed-point route
# ---------------------------------------------------------------------------


def _prefilter_seeds(
    spec: ContactHamiltonianSpec,
    settings: IntegratorSettings,
    sphere_count: int,
    t_count: int,
    keep_per_seed: int,
):
    """Product grid filtered by the cheap residual |e^{-2 pi i t} Phi(q) - q|.

    One state-only integration gives Phi on the sphere grid; the t factor is
    explicit, so the residual over the whole product grid costs nothing and
    Newton only starts from the most promising (q, t) pairs per sphere seed.
    """
    n2 = 2 * spec.n
    qs = sphere_points(sphere_count, n2)
    phi_q, _ = integrate_flow(spec, qs, 0.0, 1.0, settings, with_jacobian=False)
    t_grid = np.arange(t_count) / t_count
    phic = to_complex(phi_q)[:, None, :]
    qc = to_complex(qs)[:, None, :]
    phases = np.exp(-2j * np.pi * t_grid)[None, :, None]
    resid = np.linalg.norm(phases * phic - qc, axis=-1)
    keep = min(keep_per_seed, t_count)
    order = np.argsort(resid, axis=1)[:, :keep]
    q_seeds = np.repeat(qs, keep, axis=0)
    t_seeds = t_grid[order].reshape(-1)
    return q_seeds, t_seeds


def direct_translated_points(
    spec: ContactHamiltonianSpec,
    settings: IntegratorSettings | None = None,
    sphere_count: int = 256,
    t_count: int = 64,
    keep_per_seed: int = 4,
    newton_tol: float = 1e-10,
    max_iter: int = 40,
    dedup_angular: float = 1e-4,
    dedup_t: float = 1e-5,
    nondeg_tol: float = 1e-7,
    continuum_factor: float = 10.0,
) -> DetectionResult:
    """Ground-truth route: multistart Newton on e^{-2 pi i t} Phi(q) - q = 0.

    g(q) = 0 is automatic at solutions because |Phi(q)| = |q| there; the
    conformal residual is still recorded.  Non-convergent starts are dropped
    (coverage is the seed grid's job).
    """
    if settings is None:
        settings = IntegratorSettings()
    if sphere_count < 8:
        raise ValueError("resolution too small: need at least 8 sphere seeds")
    q, t = _prefilter_seeds(spec, settings, sphere_count, t_count, keep_per_seed)
    q, t, ok = _direct_newton(spec, settings, q, t, newton_tol, max_iter)
    q, t = q[ok], t[ok] % 1.0
    records = _build_records(spec, settings, q, t, route="direct", nondeg_tol=nondeg_tol)
    records, continuum = _dedup_and_flag(
        records, spec.n, dedup_angular, dedup_t, continuum_factor
    )
    return DetectionResult(records=records, continuum_suspected=continuum,
                           converged_raw=int(np.sum(ok)))


def _direct_newton(spec, settings, q0, t0, tol, max_iter, polish=2):
    """Masked batched Newton on the augmented fixed-point system.

    A row finishes only after satisfying `tol` on `polish` iterations: the
    extra full steps matter in flat valleys (weakly split continua), where a
    residual below tol can still sit noticeably off the true point and the
    final quadratic-convergence steps pin it down.  Rows that only ever
    reached 100*tol (the integrator noise floor can exceed an aggressive
    tol, e.g. on continua where steps bounce) are accepted at their best
    iterate.
    """
    q = np.asarray(q0, dtype=float).copy()
    t = np.asarray(t0, dtype=float).copy()
    B, n2 = q.shape
    alive = np.ones(B, dtype=bool)
    done = np.zeros(B, dtype=bool)
    times_conv = np.zeros(B, dtype=int)
    best_r = np.full(B, np.inf)
    best_q = q.copy()
    best_t = t.copy()
    eye = np.eye(n2)
    for _ in range(max_iter):
        work = alive & ~done
        if not np.any(work):
            break
        qi, ti = q[work], t[work]
        phi, dphi = integrate_flow(spec, qi, 0.0, 1.0, settings, with_jacobian=True)
        rot = rotation_matrix(-2.0 * np.pi * ti, spec.n)
        psi = phase_shift(phi, ti)
        res_map = psi - qi
        res_norm = 0.5 * (np.sum(qi * qi, axis=1) - 1.0)
        rnorm = np.sqrt(np.sum(res_map**2, axis=1) + res_norm**2)
        idx = np.where(work)[0]
        better = rnorm < best_r[idx]
        bidx = idx[better]
        best_r[bidx] = rnorm[better]
        best_q[bidx] = qi[better]
        best_t[bidx] = ti[better]
        conv = rnorm <= tol
        times_conv[idx[conv]] += 1
        finish = conv & (times_conv[idx] >= polish)
        M = np.zeros((qi.shape[0], n2 + 1, n2 + 1))
        M[:, :n2, :n2] = rot @ dphi - eye
        M[:, :n2, n2] = -2.0 * np.pi * mul_i(psi)
        M[:, n2, :n2] = qi
        rhs = np.concatenate([res_map, res_norm[:, None]], axis=1)
        try:
            step = np.linalg.solve(M, rhs[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            step = (np.linalg.pinv(M) @ rhs[:, :, None])[:, :, 0]
        norms = np.linalg.norm(step, axis=1)
        damp = np.minimum(1.0, 0.5 / np.maximum(norms, 1e-30))
        step = step * damp[:, None]
        qn = qi - step[:, :n2]
        tn = ti - step[:, n2]
        qnorm = np.linalg.norm(qn, axis=1)
        bad = (qnorm < 0.3) | (qnorm > 3.0) | ~np.isfinite(qnorm) | (np.abs(tn) > 4.0)
        move = ~finish & ~bad
        q[idx[move]] = qn[move]
        t[idx[move]] = tn[move]
        done[idx[finish]] = True
        alive[idx[bad & ~finish]] = False
    rescued = ~done & (best_r <= 100.0 * tol)
    done = done | rescued
    q[rescued] = best_q[rescued]
    t[rescued] = best_t[rescued]
    return q, t, done


def _build_records(spec, settings, q, t, route, nondeg_tol, gf_values=None):
    if q.shape[0] == 0:
        return []
    phi, dphi = integrate_flow(spec, q, 0.0, 1.0, settings, with_jacobian=True)
    psi = phase_shift(phi, t)
    residual_fixed = np.linalg.norm(psi - q, axis=1)
    residual_g = np.abs(-2.0 * np.log(np.linalg.norm(phi, axis=1)))
    rot = rotation_matrix(-2.0 * np.pi * t, spec.n)
    dpsi = rot @ dphi
    records = []
    for i in range(q.shape[0]):
        nondeg = _classify_kernel(dpsi[i], q[i], nondeg_tol)
        records.append(
            TranslatedPointRecord(
                q=tuple(float(v) for v in q[i]),
                t=float(t[i] % 1.0),
                residual_fixed=float(residual_fixed[i]),
                residual_g=float(residual_g[i]),
                nondegenerate=nondeg,
                route=route,
                gf_value=None if gf_values is None else float(gf_values[i]),
            )
        )
    return records


def _classify_kernel(dpsi: np.ndarray, q: np.ndarray, tol: float):
    """True iff ker(DPsi - I) is exactly the radial line span(q).

    Returns None when a singular value sits within a factor 10 of tol: the
    spectrum is tolerance-ambiguous and the verdict is never guessed.
    """
    n2 = q.shape[0]
    A = dpsi - np.eye(n2)
    U, svals, Vt = np.linalg.svd(A)
    if np.any((svals > tol / 10.0) & (svals < tol * 10.0)):
        return None
    small = svals < tol
    count = int(np.sum(small))
    if count == 0:
        raise ValueError("no kernel direction: the point fails the residual contract")
    if count >= 2:
        return False
    v = Vt[-1]
    qhat = q / np.linalg.norm(q)
    return bool(abs(float(np.dot(v, qhat))) > 1.0 - 1e-6)


def nondegeneracy_check(
    spec: ContactHamiltonianSpec,
    q,
    t: float,
    tol: float = 1e-7,
    settings: IntegratorSettings | None = None,
):
    """Classify a (q, t) record: non-degenerate iff the horizontal kernel is
    exactly the radial line.  Returns True/False or None (indeterminate)."""
    from .linsymp import as_coords

    if settings is None:
        settings = IntegratorSettings()
    qa = as_coords(q, spec.n)
    _, dphi = integrate_flow(spec, qa, 0.0, 1.0, settings, with_jacobian=True)
    rot = rotation_matrix(-2.0 * np.pi * float(t), spec.n)
    return _classify_kernel(rot @ dphi, qa, tol)


def _dedup_and_flag(records, n, dedup_angular, dedup_t, continuum_factor):
    """Greedy clustering by (angular, t) distance; representative = smallest
    fixed-point residual.  A t-slice accumulating more mutually-distinct
    degenerate records than continuum_factor * max(2, 2n) is declared a
    suspected continuum."""
    if not records:
        return [], False
    order = sorted(range(len(records)), key=lambda i: records[i].residual_fixed)
    qs = np.array([records[i].q for i in order])
    ts = np.array([records[i].t for i in order])
    chosen: list[int] = []
    for i in range(len(order)):
        if chosen:
            qsel = qs[chosen]
            tsel = ts[chosen]
            close = (_angular_distance(qsel, qs[i]) < dedup_angular) & (
                _t_distance(tsel, ts[i]) < dedup_t
            )
            if np.any(close):
                continue
        chosen.append(i)
    kept = [records[order[i]] for i in chosen]
    kept.sort(key=lambda r: (r.t, r.q))

    threshold = continuum_factor * max(2, 2 * n)
    continuum = False
    kept_ts = np.array([r.t for r in kept])
    used = np.zeros(len(kept), dtype=bool)
    for i in range(len(kept)):
        if used[i]:
            continue
        slice_mask = _t_distance(kept_ts, kept_ts[i]) < max(dedup_t * 10, 1e-4)
        used |= slice_mask
        degenerate = sum(
            1 for j in np.where(slice_mask)[0] if kept[j].nondegenerate is not True
        )
        if degenerate > threshold:
            continuum = True
    return kept, continuum


# ---------------------------------------------------------------------------
# Generating-function route
# ---------------------------------------------------------------------------


class ShiftedGenFunFamily:
    """The family F_t = F_phi # A_t generating the lift of a_t o phi.

    F_phi is the composed generating function of the subdivided isotopy of
    phi; A_t is the k-piece quadratic family of the negative Reeb flow.  Only
    the A_t block depends on t, so the t-derivative of the gradient is
    available in closed form for the joint (x, t) Newton.
    """

    def __init__(self, f_phi: GenFun, n: int, k: int):
        if k < 3:
            raise ValueError("rotation family needs k >= 3")
        self.f_phi = f_phi
        self.n = n
        self.k = k
        m = 2 * n
        self.m = m
        self.fib_phi = f_phi.fiber_dim
        self.dim_a = m + 4 * n * (k - 1)
        self.dim = 3 * m + self.fib_phi + (self.dim_a - m)
        # layout: u | v | w | mu (fib_phi) | eta (dim_a - m)
        self.s_u = slice(0, m)
        self.s_v = slice(m, 2 * m)
        self.s_w = slice(2 * m, 3 * m)
        self.s_mu = slice(3 * m, 3 * m + self.fib_phi)
        self.s_eta = slice(3 * m + self.fib_phi, self.dim)

    def genfun_at(self, t: float) -> GenFun:
        """Plain GenFun DAG for a fixed t (public composition route)."""
        return gfm.gf_compose(self.f_phi, build_rotation_family(t, self.n, self.k).genfun)

    def seed(self, q: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Chain seeds on the fiber-critical set over starting points q."""
        q = np.asarray(q, dtype=float)
        t = np.asarray(t, dtype=float)
        fib_phi, z_mid = self.f_phi.chain_seed(q)
        # rotation chain through the k pieces of a_t
        pts = [z_mid]
        for j in range(self.k):
            pts.append(phase_shift(pts[-1], t / self.k))
        fib_a = []
        for j in range(self.k, 1, -1):
            fib_a.append(pts[j])
            fib_a.append(0.5 * (pts[j - 1] - pts[j]))
        fib_a = (
            np.concatenate(fib_a, axis=1) if fib_a else np.zeros((q.shape[0], 0))
        )
        z_out = pts[-1]
        u = 0.5 * (q + z_out)
        v = z_out
        w = 0.5 * (z_mid - z_out)
        x = np.concatenate([u, v, w, fib_phi, fib_a], axis=1)
        return x / np.linalg.norm(x, axis=1, keepdims=True)

    def evaluate(self, x: np.ndarray, t: np.ndarray, order: int = 2,
                 with_dt: bool = False):
        """(val, grad, hess, dgrad_dt, ok) of F_t at x, t per row."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        B = x.shape[0]
        m = self.m
        u, v, w = x[:, self.s_u], x[:, self.s_v], x[:, self.s_w]
        xF = np.concatenate([u + w, x[:, self.s_mu]], axis=1)
        vF, gF, HF, okF = evaluate_stacked(self.f_phi, xF, order)
        y = np.concatenate([v + w, x[:, self.s_eta]], axis=1)
        MA, dMA = rotation_family_matrices(t, self.n, self.k)
        My = np.einsum("bij,bj->bi", MA, y)
        vA = np.einsum("bi,bi->b", y, My)
        iw = mul_i(w)
        val = vF + vA + 2.0 * np.sum((u - v) * iw, axis=1)
        gA = 2.0 * My
        grad = np.zeros((B, self.dim))
        grad[:, self.s_u] = gF[:, :m] + 2.0 * iw
        grad[:, self.s_v] = gA[:, :m] - 2.0 * iw
        grad[:, self.s_w] = gF[:, :m] + gA[:, :m] - 2.0 * mul_i(u - v)
        grad[:, self.s_mu] = gF[:, m:]
        grad[:, self.s_eta] = gA[:, m:]
        hess = None
        if order >= 2:
            hess = np.zeros((B, self.dim, self.dim))
            bbF, bfF, ffF = HF[:, :m, :m], HF[:, :m, m:], HF[:, m:, m:]
            for s1 in (self.s_u, self.s_w):
                for s2 in (self.s_u, self.s_w):
                    hess[:, s1, s2] += bbF
            bfFT = np.swapaxes(bfF, -1, -2)
            hess[:, self.s_u, self.s_mu] += bfF
            hess[:, self.s_w, self.s_mu] += bfF
            hess[:, self.s_mu, self.s_u] += bfFT
            hess[:, self.s_mu, self.s_w] += bfFT
            hess[:, self.s_mu, self.s_mu] += ffF
            HA = 2.0 * MA
            bbA, bfA, ffA = HA[:, :m, :m], HA[:, :m, m:], HA[:, m:, m:]
            for s1 in (self.s_v, self.s_w):
                for s2 in (self.s_v, self.s_w):
                    hess[:, s1, s2] += bbA
            bfAT = np.swapaxes(bfA, -1, -2)
            hess[:, self.s_v, self.s_eta] += bfA
            hess[:, self.s_w, self.s_eta] += bfA
            hess[:, self.s_eta, self.s_v] += bfAT
            hess[:, self.s_eta, self.s_w] += bfAT
            hess[:, self.s_eta, self.s_eta] += ffA
            J2 = 2.0 * complex_structure_matrix(self.n)
            hess[:, self.s_u, self.s_w] += J2
            hess[:, self.s_w, self.s_u] += -J2
            hess[:, self.s_v, self.s_w] += -J2
            hess[:, self.s_w, self.s_v] += J2
        dgrad = None
        if with_dt:
            dgy = 2.0 * np.einsum("bij,bj->bi", dMA, y)
            dgrad = np.zeros((B, self.dim))
            dgrad[:, self.s_v] = dgy[:, :m]
            dgrad[:, self.s_w] = dgy[:, :m]
            dgrad[:, self.s_eta] = dgy[:, m:]
        return val, grad, hess, dgrad, okF


def find_critical_rays(
    family: ShiftedGenFunFamily,
    spec: ContactHamiltonianSpec,
    settings: IntegratorSettings | None = None,
    sphere_count: int = 256,
    t_count: int = 64,
    keep_per_seed: int = 4,
    grad_tol: float = 1e-9,
    max_iter: int = 40,
    verify_tol: float = 1e-6,
    dedup_angular: float = 1e-4,
    dedup_t: float = 1e-5,
    nondeg_tol: float = 1e-7,
    continuum_factor: float = 10.0,
    u_floor: float = 0.02,
    chunk: int = 512,
) -> DetectionResult:
    """Critical rays of F_t on the unit sphere of the total space.

    Seeds chain each (q, t) start onto the fiber-critical set; projected
    Newton then solves grad F_t(x) = 0, |x| = 1 jointly in (x, t).  Every
    converged ray is reduced to its base point and re-verified against the
    direct fixed-point residual; failures are reported as inconsistent, never
    silently kept.
    """
    if settings is None:
        settings = IntegratorSettings()
    q_seeds, t_seeds = _prefilter_seeds(spec, settings, sphere_count, t_count, keep_per_seed)
    xs, ts, vals, oks = [], [], [], []
    for lo in range(0, q_seeds.shape[0], chunk):
        q_c = q_seeds[lo : lo + chunk]
        t_c = t_seeds[lo : lo + chunk]
        x0 = family.seed(q_c, t_c)
        xx, tt, vv, ok_c = _genfun_newton(family, x0, t_c, grad_tol, max_iter)
        xs.append(xx)
        ts.append(tt)
        vals.append(vv)
        oks.append(ok_c)
    x = np.concatenate(xs, axis=0)
    t = np.concatenate(ts, axis=0)
    gf_vals = np.concatenate(vals, axis=0)
    ok = np.concatenate(oks, axis=0)

    u = x[:, family.s_u]
    unorm = np.linalg.norm(u, axis=1)
    ok = ok & (unorm > u_floor)
    q_red = u[ok] / unorm[ok][:, None]
    t_red = t[ok] % 1.0
    v_red = gf_vals[ok]

    records = _build_records(
        spec, settings, q_red, t_red, route="genfun", nondeg_tol=nondeg_tol,
        gf_values=v_red,
    )
    verified = [r for r in records if r.residual_fixed <= verify_tol]
    inconsistent = [r for r in records if r.residual_fixed > verify_tol]
    verified, continuum = _dedup_and_flag(
        verified, spec.n, dedup_angular, dedup_t, continuum_factor
    )
    return DetectionResult(
        records=verified,
        continuum_suspected=continuum,
        converged_raw=int(np.sum(ok)),
        inconsistent=inconsistent,
    )


def _genfun_newton(family, x0, t0, tol, max_iter, polish=2):
    x = np.asarray(x0, dtype=float).copy()
    t = np.asarray(t0, dtype=float).copy()
    B, D = x.shape
    alive = np.ones(B, dtype=bool)
    done = np.zeros(B, dtype=bool)
    times_conv = np.zeros(B, dtype=int)
    vals = np.zeros(B)
    best_g = np.full(B, np.inf)
    best_x = x.copy()
    best_t = t.copy()
    best_v = np.zeros(B)
    for _ in range(max_iter):
        work = alive & ~done
        if not np.any(work):
            break
        xi, ti = x[work], t[work]
        val, grad, hess, dgrad, ok_eval = family.evaluate(xi, ti, order=2, with_dt=True)
        gnorm = np.linalg.norm(grad, axis=1)
        idx = np.where(work)[0]
        better = ok_eval & (gnorm < best_g[idx])
        bidx = idx[better]
        best_g[bidx] = gnorm[better]
        best_x[bidx] = xi[better]
        best_t[bidx] = ti[better]
        best_v[bidx] = val[better]
        conv = ok_eval & (gnorm <= tol)
        times_conv[idx[conv]] += 1
        finish = conv & (times_conv[idx] >= polish)
        M = np.zeros((xi.shape[0], D + 1, D + 1))
        M[:, :D, :D] = hess
        M[:, :D, D] = dgrad
        M[:, D, :D] = xi
        rhs = np.concatenate([grad, 0.5 * (np.sum(xi * xi, axis=1) - 1.0)[:, None]], axis=1)
        try:
            step = np.linalg.solve(M, rhs[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            step = (np.linalg.pinv(M) @ rhs[:, :, None])[:, :, 0]
        norms = np.linalg.norm(step, axis=1)
        damp = np.minimum(1.0, 0.5 / np.maximum(norms, 1e-30))
        step = step * damp[:, None]
        xn = xi - step[:, :D]
        xnorm = np.linalg.norm(xn, axis=1)
        bad = ~ok_eval | (xnorm < 1e-8) | ~np.isfinite(xnorm) | (np.abs(ti - step[:, D]) > 4.0)
        xn = xn / np.maximum(xnorm, 1e-30)[:, None]
        tn = ti - step[:, D]
        move = ~finish & ~bad
        x[idx[move]] = xn[move]
        t[idx[move]] = tn[move]
        vals[idx[finish]] = val[finish]
        done[idx[finish]] = True
        alive[idx[bad & ~finish]] = False
    rescued = ~done & (best_g <= 100.0 * tol)
    done = done | rescued
    x[rescued] = best_x[rescued]
    t[rescued] = best_t[rescued]
    vals[rescued] = best_v[rescued]
    return x, t, vals, done


# ---------------------------------------------------------------------------
# Index jump and the sweep driver
# ---------------------------------------------------------------------------


def index_jump(n: int, k: int, nullity_tol: float | None = None) -> int:
    """i(A_1) - i(A_0) for the k-piece rotation family; equals 2n.

    Both endpoint forms generate the identity, whose critical set is the full
    2n-dimensional diagonal family, so the raw matrices carry a structural
    kernel of dimension exactly 2n; any other nullity is a configuration
    error.  The index difference is insensitive to that kernel.
    """
    data = index_data(n, k, nullity_tol)
    return data["jump"]


def index_data(n: int, k: int, nullity_tol: float | None = None) -> dict:
    if k < 3:
        raise ValueError("k must be >= 3")
    in0 = inertia(build_rotation_family(0.0, n, k).matrix, nullity_tol)
    in1 = inertia(build_rotation_family(1.0, n, k).matrix, nullity_tol)
    for label, ine in (("A_0", in0), ("A_1", in1)):
        if ine.nullity != 2 * n:
            raise ConfigurationError(
                f"{label} has nullity {ine.nullity}, expected the structural {2 * n}"
            )
    return {
        "index_a0": in0.index,
        "nullity_a0": in0.nullity,
        "coindex_a0": in0.coindex,
        "index_a1": in1.index,
        "nullity_a1": in1.nullity,
        "coindex_a1": in1.coindex,
        "jump": in1.index - in0.index,
    }


@dataclass(frozen=True)
class SweepParams:
    mode: str = "sphere"  # sphere | projective
    routes: str = "both"  # direct | genfun | both
    rotation_pieces: int = 4
    subdivision_delta: float = 1.0
    sphere_count: int = 256
    t_count: int = 64
    keep_per_seed: int = 4
    newton_tol: float = 1e-10
    grad_tol: float = 1e-9
    verify_tol: float = 1e-6
    match_angular: float = 1e-6
    match_t: float = 1e-6
    dedup_angular: float = 1e-4
    dedup_t: float = 1e-5
    nondeg_tol: float = 1e-7
    continuum_factor: float = 10.0
    nullity_tol: float | None = None
    chunk: int = 512


def build_phi_genfun(
    spec: ContactHamiltonianSpec,
    settings: IntegratorSettings,
    delta: float,
) -> tuple[GenFun, list[tuple[float, float]]]:
    """Composed generating function of the subdivided isotopy of phi."""
    from .flow import FlowMap, subdivide_c1_small

    schedule = subdivide_c1_small(spec, 0.0, 1.0, delta, settings)
    gf: GenFun | None = None
    for a, b in schedule:
        leaf = gfm.LeafGF(FlowMap(spec, a, b, settings))
        gf = leaf if gf is None else gfm.gf_compose(gf, leaf)
    return gf, schedule


def _match_routes(direct, genf, params):
    matched = []
    used = np.zeros(len(genf), dtype=bool)
    unmatched_direct = []
    for rd in direct:
        found = None
        for j, rg in enumerate(genf):
            if used[j]:
                continue
            if (
                _angular_distance(rd.q_array(), rg.q_array()) < params.match_angular
                and _t_distance(rd.t, rg.t) < params.match_t
            ):
                found = j
                break
        if found is None:
            unmatched_direct.append(rd)
        else:
            used[found] = True
            matched.append(replace(rd, route="both", gf_value=genf[found].gf_value))
    unmatched_genfun = [rg for j, rg in enumerate(genf) if not used[j]]
    return matched, unmatched_direct, unmatched_genfun


def sweep_and_count(
    spec: ContactHamiltonianSpec,
    params: SweepParams | None = None,
    settings: IntegratorSettings | None = None,
) -> SweepReport:
    """Run the configured routes, merge records, count, attach index data.

    The Morse-type lower bounds (2 on the sphere, 2n antipodal classes on
    the projective space) are asserted only when every record is certified
    non-degenerate and no continuum is suspected; otherwise the report says
    so explicitly instead of passing silently.
    """
    if params is None:
        params = SweepParams()
    if settings is None:
        settings = IntegratorSettings()
    n = spec.n

    if params.mode == "projective":
        from .projective import ProjectiveSpec

        ProjectiveSpec(spec)  # validates the Z2 symmetry

    route_stats: dict = {}
    direct_res = genfun_res = None
    if params.routes in ("direct", "both"):
        direct_res = direct_translated_points(
            spec, settings,
            sphere_count=params.sphere_count, t_count=params.t_count,
            keep_per_seed=params.keep_per_seed, newton_tol=params.newton_tol,
            dedup_angular=params.dedup_angular, dedup_t=params.dedup_t,
            nondeg_tol=params.nondeg_tol, continuum_factor=params.continuum_factor,
        )
        route_stats["direct_records"] = len(direct_res.records)
        route_stats["direct_converged"] = direct_res.converged_raw
    if params.routes in ("genfun", "both"):
        f_phi, schedule = build_phi_genfun(spec, settings, params.subdivision_delta)
        family = ShiftedGenFunFamily(f_phi, n, params.rotation_pieces)
        genfun_res = find_critical_rays(
            family, spec, settings,
            sphere_count=params.sphere_count, t_count=params.t_count,
            keep_per_seed=params.keep_per_seed, grad_tol=params.grad_tol,
            verify_tol=params.verify_tol, dedup_angular=params.dedup_angular,
            dedup_t=params.dedup_t, nondeg_tol=params.nondeg_tol,
            continuum_factor=params.continuum_factor, chunk=params.chunk,
        )
        route_stats["genfun_records"] = len(genfun_res.records)
        route_stats["genfun_converged"] = genfun_res.converged_raw
        route_stats["genfun_inconsistent"] = len(genfun_res.inconsistent)
        route_stats["subdivision_pieces"] = len(schedule)
        route_stats["total_space_dim"] = family.dim

    continuum = bool(
        (direct_res is not None and direct_res.continuum_suspected)
        or (genfun_res is not None and genfun_res.continuum_suspected)
    )

    if params.routes == "both" and not continuum:
        if genfun_res.inconsistent:
            raise RouteDisagreementError(
                "genfun records failed the direct residual verification",
                dump={"inconsistent": genfun_res.inconsistent},
            )
        matched, only_d, only_g = _match_routes(
            direct_res.records, genfun_res.records, params
        )
        if only_d or only_g:
            raise RouteDisagreementError(
                f"route mismatch: {len(only_d)} direct-only, {len(only_g)} genfun-only",
                dump={"direct_only": only_d, "genfun_only": only_g,
                      "matched": matched},
            )
        records = matched
        route_stats["matched"] = len(matched)
    elif params.routes == "both":
        # Continua are sampled differently by each route; report the ground
        # truth set without asserting a bijection.
        records = direct_res.records
    elif params.routes == "direct":
        records = direct_res.records
    else:
        records = genfun_res.records

    events = sorted({round(r.t, 10) for r in records})

    idx = index_data(n, params.rotation_pieces, params.nullity_tol)

    sphere_count = projective_count = None
    bound_met = None
    if params.mode == "projective":
        threshold = 2 * n
    else:
        threshold = 2
    all_nondeg = bool(records) and all(r.nondegenerate is True for r in records)
    bound_asserted = all_nondeg and not continuum
    if not continuum:
        sphere_count = len(records)
        if params.mode == "projective":
            from .projective import antipodal_classes

            classes = antipodal_classes(records, ang_tol=params.dedup_angular,
                                        t_tol=params.dedup_t)
            projective_count = len(classes)
    if bound_asserted:
        count = projective_count if params.mode == "projective" else sphere_count
        bound_met = bool(count >= threshold)

    return SweepReport(
        records=records,
        event_ts=events,
        sphere_count=sphere_count,
        projective_count=projective_count,
        index_data=idx,
        continuum_suspected=continuum,
        bound_asserted=bound_asserted,
        bound_threshold=threshold,
        bound_met=bound_met,
        route_stats=route_stats,
    )
