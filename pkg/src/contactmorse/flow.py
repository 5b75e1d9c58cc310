"""Lifted Hamiltonian flows on R^{2n} minus the origin.

The time variable is a fraction of a Hopf circle: the vector field is the
Hamiltonian field of the degree-2 lift scaled by a single calibration
constant (pi, with our sign conventions) chosen so that h == 1 integrates to
z -> e^{2 pi i t} z.  A dedicated test pins this calibration down.

Integration is classic fixed-step RK4 with the variational equation for the
Jacobian integrated alongside the state.  Step counts come from an explicit
setting, optionally chosen by a halving sweep until successive refinements
agree; nothing here is adaptive, so reruns are bit-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hamiltonian as ham
from .linsymp import realify, to_complex, to_real
from .sampling import sphere_points, subdivision_probe_points

# Calibration constant: with omega = sum dx ^ dy and iota_X omega = dH the
# Hamiltonian field of H = |z|^2 is -2iz; scaling by -pi turns h == 1 into
# the Hopf rotation e^{2 pi i t} the time convention is built on.
FIELD_SCALE = math.pi


@dataclass(frozen=True)
class IntegratorSettings:
    steps_per_unit: int = 512
    min_steps: int = 4
    max_steps: int = 1 << 22

    def steps_for(self, span: float) -> int:
        steps = max(self.min_steps, math.ceil(abs(span) * self.steps_per_unit))
        if steps > self.max_steps:
            raise RuntimeError("step count exceeds cap; span too long or settings too fine")
        return steps


def vector_field(spec: ham.ContactHamiltonianSpec, z: np.ndarray, t: float) -> np.ndarray:
    """dz/dt at complex points z, shape (..., n)."""
    return FIELD_SCALE * 1j * ham.lift_grad(spec, z, t)


def field_jacobian(spec: ham.ContactHamiltonianSpec, z: np.ndarray, t: float) -> np.ndarray:
    """Real 2n x 2n Jacobian of the vector field at complex points z."""
    P, Q = ham.lift_hess(spec, z, t)
    return FIELD_SCALE * realify(1j * P, 1j * Q)


def field_with_jacobian(spec: ham.ContactHamiltonianSpec, z: np.ndarray, t: float):
    """(dz/dt, real Jacobian) sharing one table evaluation."""
    _, G, P, Q = ham.eval_lift(spec, z, t)
    return FIELD_SCALE * 1j * G, FIELD_SCALE * realify(1j * P, 1j * Q)


def integrate_flow(
    spec: ham.ContactHamiltonianSpec,
    z0: np.ndarray,
    t0: float,
    t1: float,
    settings: IntegratorSettings | None = None,
    with_jacobian: bool = True,
):
    """Integrate the lifted flow from t0 to t1.

    z0: real coordinates, shape (2n,) or (B, 2n).  Returns (z1, jac) with jac
    None when with_jacobian is False.  The Jacobian solves the variational
    equation dJ/dt = DX(z(t)) J, J(t0) = I.
    """
    if settings is None:
        settings = IntegratorSettings()
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    z0 = np.asarray(z0, dtype=float)
    single = z0.ndim == 1
    zr = z0[None, :] if single else z0
    B, two_n = zr.shape
    n = two_n // 2
    z = to_complex(zr)
    norms0 = np.linalg.norm(zr, axis=1)
    if np.any(norms0 == 0.0):
        raise ValueError("flow is undefined at z = 0")

    jac = np.broadcast_to(np.eye(two_n), (B, two_n, two_n)).copy() if with_jacobian else None
    span = t1 - t0
    if span == 0.0:
        z_out = zr.copy()
        return (z_out[0], jac[0] if with_jacobian else None) if single else (z_out, jac)

    steps = settings.steps_for(span)
    h = span / steps
    t = t0
    for _ in range(steps):
        z, jac = _rk4_step(spec, z, jac, t, h)
        t += h

    if np.any(np.linalg.norm(to_real(z), axis=1) < 1e-9 * norms0):
        raise RuntimeError("trajectory norm collapsed toward the cone tip")
    z_out = to_real(z)
    if single:
        return z_out[0], (jac[0] if with_jacobian else None)
    return z_out, jac


def _rk4_step(spec, z, jac, t, h):
    if jac is None:
        k1 = vector_field(spec, z, t)
        k2 = vector_field(spec, z + 0.5 * h * k1, t + 0.5 * h)
        k3 = vector_field(spec, z + 0.5 * h * k2, t + 0.5 * h)
        k4 = vector_field(spec, z + h * k3, t + h)
        return z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4), None
    k1, D1 = field_with_jacobian(spec, z, t)
    a1 = D1 @ jac
    k2, D2 = field_with_jacobian(spec, z + 0.5 * h * k1, t + 0.5 * h)
    a2 = D2 @ (jac + 0.5 * h * a1)
    k3, D3 = field_with_jacobian(spec, z + 0.5 * h * k2, t + 0.5 * h)
    a3 = D3 @ (jac + 0.5 * h * a2)
    k4, D4 = field_with_jacobian(spec, z + h * k3, t + h)
    a4 = D4 @ (jac + h * a3)
    z_new = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    jac_new = jac + (h / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4)
    return z_new, jac_new


@dataclass(frozen=True)
class FlowMap:
    """The lifted flow over a fixed time interval, evaluated on demand."""

    spec: ham.ContactHamiltonianSpec
    t0: float
    t1: float
    settings: IntegratorSettings

    def __call__(self, z, with_jacobian: bool = False):
        return integrate_flow(
            self.spec, z, self.t0, self.t1, self.settings, with_jacobian=with_jacobian
        )

    @property
    def span(self) -> float:
        return self.t1 - self.t0

    def is_identity(self) -> bool:
        return self.t1 == self.t0


def calibrate_steps_per_unit(
    spec: ham.ContactHamiltonianSpec,
    horizon: float = 1.0,
    tol: float = 1e-10,
    start: int = 128,
    cap: int = 1 << 15,
) -> int:
    """Halving sweep: double the step density until successive results agree.

    Returns the finer density of the first agreeing pair.  Agreement is the
    max state difference over a fixed probe set of unit points.
    """
    probes = sphere_points(8, 2 * spec.n)
    density = start
    prev, _ = integrate_flow(
        spec, probes, 0.0, horizon, IntegratorSettings(steps_per_unit=density), with_jacobian=False
    )
    while density < cap:
        density *= 2
        cur, _ = integrate_flow(
            spec, probes, 0.0, horizon, IntegratorSettings(steps_per_unit=density),
            with_jacobian=False,
        )
        if float(np.max(np.abs(cur - prev))) <= tol:
            return density
        prev = cur
    return density


def conformal_factor(
    spec: ham.ContactHamiltonianSpec,
    q,
    t1: float,
    settings: IntegratorSettings | None = None,
) -> float:
    """g(q) = -2 log |Phi_{t1}(q)| at a unit-sphere point q.

    The lift satisfies |Phi(q)| = e^{-g(q)/2} on the sphere, so the conformal
    factor is read off the norm defect of the integrated point.
    """
    from .linsymp import as_coords

    qa = as_coords(q, spec.n)
    if abs(np.linalg.norm(qa) - 1.0) > 1e-9:
        raise ValueError("conformal_factor expects a unit vector")
    z1, _ = integrate_flow(spec, qa, 0.0, t1, settings, with_jacobian=False)
    return -2.0 * float(np.log(np.linalg.norm(z1)))


def _c1_metric(samples: np.ndarray, z1: np.ndarray, jac: np.ndarray) -> float:
    move = np.linalg.norm(z1 - samples, axis=1)
    dev = jac - np.eye(samples.shape[1])
    opnorm = np.linalg.svd(dev, compute_uv=False)[..., 0]
    return float(np.max(move + opnorm))


def c1_distance(
    spec: ham.ContactHamiltonianSpec,
    t0: float,
    t1: float,
    settings: IntegratorSettings,
    samples: np.ndarray,
) -> float:
    """max over samples of |Phi(q) - q| + ||DPhi(q) - I||_2 for the piece flow.

    Evaluated at the piece midpoint as well as the endpoint: a loop closed up
    inside the piece would otherwise alias to the identity and pass.
    """
    if t1 == t0:
        return 0.0
    mid = 0.5 * (t0 + t1)
    z_m, jac_m = integrate_flow(spec, samples, t0, mid, settings, with_jacobian=True)
    crit = _c1_metric(samples, z_m, jac_m)
    z_e, jac_2 = integrate_flow(spec, z_m, mid, t1, settings, with_jacobian=True)
    crit = max(crit, _c1_metric(samples, z_e, jac_2 @ jac_m))
    return crit


def subdivide_c1_small(
    spec: ham.ContactHamiltonianSpec,
    t0: float,
    t1: float,
    delta: float,
    settings: IntegratorSettings | None = None,
    samples: np.ndarray | None = None,
    max_pieces: int = 4096,
) -> list[tuple[float, float]]:
    """Bisection-refined partition of [t0, t1] into C^1-small flow pieces.

    Each returned piece satisfies the sampled criterion
    max_q (|Phi(q) - q| + ||DPhi(q) - I||) < delta over a fixed deterministic
    set of unit points.  Raises if the cap is exceeded (delta too small or
    the flow too fast).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    if settings is None:
        settings = IntegratorSettings()
    # The criterion is compared against delta ~ O(1); a coarse step density
    # is plenty and keeps the bisection cheap.
    probe_settings = IntegratorSettings(
        steps_per_unit=min(settings.steps_per_unit, 64), min_steps=4
    )
    if samples is None:
        samples = subdivision_probe_points(spec.n)
    if t1 == t0:
        return [(t0, t1)]

    pieces: list[tuple[float, float]] = []
    stack = [(t0, t1)]
    while stack:
        a, b = stack.pop()
        if c1_distance(spec, a, b, probe_settings, samples) < delta:
            pieces.append((a, b))
        else:
            # Splitting below this width would allow more than max_pieces pieces.
            if (b - a) * max_pieces < (t1 - t0):
                raise RuntimeError(
                    "C1-small subdivision exceeded the piece cap; "
                    "increase delta or the cap"
                )
            mid = 0.5 * (a + b)
            stack.append((mid, b))
            stack.append((a, mid))
    pieces.sort()
    return pieces
