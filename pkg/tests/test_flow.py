import numpy as np
import pytest

from contactmorse import flow
from contactmorse import hamiltonian as ham
from contactmorse.linsymp import mul_i, symplectic_form_matrix, to_complex, to_real
from contactmorse.sampling import sphere_points

from oracles import expm


def _perturbed_spec():
    return ham.ContactHamiltonianSpec(
        n=2,
        quadratic=(0.3, 0.7),
        terms=(
            ham.PerturbationTerm(0.05, (2, 0), (1, 0)),
            ham.PerturbationTerm(0.05, (0, 2), (0, 1)),
        ),
    )


def test_reeb_quarter_turn(settings):
    """h == 1 over t = 0.25 is multiplication by i (Hopf calibration)."""
    spec = ham.ContactHamiltonianSpec(n=2, quadratic=(1.0, 1.0))
    z0 = sphere_points(6, 4)
    z1, _ = flow.integrate_flow(spec, z0, 0.0, 0.25, settings, with_jacobian=False)
    assert np.max(np.abs(z1 - mul_i(z0))) < 1e-8


def test_diagonal_closed_form(settings, rng):
    spec = ham.ContactHamiltonianSpec(n=2, quadratic=(0.3, 0.7))
    z0 = rng.normal(size=(4, 4))
    for t in (0.25, 1.0):
        z1, _ = flow.integrate_flow(spec, z0, 0.0, t, settings, with_jacobian=False)
        expect = to_real(to_complex(z0) * np.exp(2j * np.pi * np.array([0.3, 0.7]) * t))
        assert np.max(np.abs(z1 - expect)) < 1e-8


def test_linear_quadratic_flow_matches_matrix_exponential(settings):
    # H = 0.3|z1|^2 + 0.7|z2|^2 + 0.05 Re(z1^2) is a (non-Hermitian) real
    # quadratic form; its flow must be exp(t * pi * J * HessH).
    spec = ham.ContactHamiltonianSpec(
        n=2, quadratic=(0.3, 0.7), terms=(ham.PerturbationTerm(0.05, (2, 0), (0, 0)),)
    )
    z = sphere_points(5, 4)
    hess = ham.lift_hess_real(spec, to_complex(np.zeros((1, 4)) + [[1.0, 1.0, 1.0, 1.0]]))[0]
    from contactmorse.linsymp import complex_structure_matrix

    gen = np.pi * complex_structure_matrix(2) @ hess
    for t in (0.5, 1.0):
        z1, jac = flow.integrate_flow(spec, z, 0.0, t, settings)
        L = expm(t * gen)
        assert np.max(np.abs(z1 - z @ L.T)) < 1e-8
        assert np.max(np.abs(jac - L)) < 1e-8


def test_radial_equivariance(settings, rng):
    spec = _perturbed_spec()
    z0 = rng.normal(size=(3, 4))
    base, _ = flow.integrate_flow(spec, z0, 0.0, 0.7, settings, with_jacobian=False)
    for lam in (0.25, 0.5, 2.0, 4.0):
        scaled, _ = flow.integrate_flow(
            spec, lam * z0, 0.0, 0.7, settings, with_jacobian=False
        )
        assert np.max(np.abs(scaled - lam * base)) < 1e-8 * lam


def test_jacobian_is_symplectic(settings, rng):
    spec = _perturbed_spec()
    z0 = sphere_points(8, 4)
    _, jac = flow.integrate_flow(spec, z0, 0.0, 1.0, settings)
    Om = symplectic_form_matrix(2)
    defect = np.swapaxes(jac, -1, -2) @ Om @ jac - Om
    assert np.max(np.abs(defect)) < 1e-7


def test_jacobian_matches_finite_differences(settings):
    spec = _perturbed_spec()
    z0 = np.array([0.6, 0.0, 0.0, 0.8])
    _, jac = flow.integrate_flow(spec, z0, 0.0, 0.5, settings)
    eps = 1e-6
    for k in range(4):
        e = np.zeros(4)
        e[k] = eps
        zp, _ = flow.integrate_flow(spec, z0 + e, 0.0, 0.5, settings, with_jacobian=False)
        zm, _ = flow.integrate_flow(spec, z0 - e, 0.0, 0.5, settings, with_jacobian=False)
        assert np.allclose(jac[:, k], (zp - zm) / (2 * eps), atol=1e-7)


def test_flow_composition(settings):
    spec = _perturbed_spec()
    z0 = sphere_points(4, 4)
    mid, _ = flow.integrate_flow(spec, z0, 0.0, 0.4, settings, with_jacobian=False)
    end_split, _ = flow.integrate_flow(spec, mid, 0.4, 1.0, settings, with_jacobian=False)
    end_direct, _ = flow.integrate_flow(spec, z0, 0.0, 1.0, settings, with_jacobian=False)
    assert np.max(np.abs(end_split - end_direct)) < 1e-9


def test_flow_rejects_origin(settings):
    spec = _perturbed_spec()
    with pytest.raises(ValueError):
        flow.integrate_flow(spec, np.zeros(4), 0.0, 1.0, settings)


def test_conformal_factor_vanishes_for_unitary_flows(settings):
    q = np.array([0.6, 0.0, 0.0, 0.8])
    unitary = ham.ContactHamiltonianSpec(n=2, quadratic=(0.3, 0.7))
    assert abs(flow.conformal_factor(unitary, q, 1.0, settings)) < 1e-9
    reeb = ham.ContactHamiltonianSpec(n=2, quadratic=(1.0, 1.0))
    for t in (0.25, 1.0):
        assert abs(flow.conformal_factor(reeb, q, t, settings)) < 1e-9


def test_conformal_factor_matches_pullback_oracle(settings):
    """g(q) = log alpha_{phi(q)}(Dphi(q) i q) with phi the renormalized flow."""
    spec = _perturbed_spec()
    from contactmorse.linsymp import contact_form_eval

    for q in sphere_points(6, 4):
        g_norm = flow.conformal_factor(spec, q, 1.0, settings)
        z1, jac = flow.integrate_flow(spec, q, 0.0, 1.0, settings)
        r = np.linalg.norm(z1)
        # Dphi restricted to the sphere: normalize the image along the flow
        dz = jac @ mul_i(q)
        dphi = dz / r - z1 * np.dot(z1, dz) / r**3
        g_oracle = np.log(contact_form_eval(z1 / r, dphi))
        assert g_norm == pytest.approx(g_oracle, abs=1e-6)


def test_subdivision_examples(settings):
    zero = ham.ContactHamiltonianSpec(n=2, quadratic=(0.0, 0.0))
    assert flow.subdivide_c1_small(zero, 0.0, 1.0, 0.5, settings) == [(0.0, 1.0)]

    reeb = ham.ContactHamiltonianSpec(n=2, quadratic=(1.0, 1.0))
    pieces = flow.subdivide_c1_small(reeb, 0.0, 1.0, 0.5, settings)
    assert len(pieces) >= 8
    assert pieces[0][0] == 0.0 and pieces[-1][1] == 1.0
    for (a, b), (c, _) in zip(pieces, pieces[1:]):
        assert b == c

    tiny = flow.subdivide_c1_small(reeb, 0.0, 1e-4, 0.5, settings)
    assert tiny == [(0.0, 1e-4)]


def test_subdivision_pieces_meet_criterion(settings):
    spec = _perturbed_spec()
    from contactmorse.sampling import subdivision_probe_points

    samples = subdivision_probe_points(2)
    pieces = flow.subdivide_c1_small(spec, 0.0, 1.0, 1.0, settings, samples=samples)
    probe = flow.IntegratorSettings(steps_per_unit=64)
    for a, b in pieces:
        assert flow.c1_distance(spec, a, b, probe, samples) < 1.0


def test_subdivision_cap():
    reeb = ham.ContactHamiltonianSpec(n=1, quadratic=(1.0,))
    with pytest.raises(RuntimeError):
        flow.subdivide_c1_small(reeb, 0.0, 1.0, 1e-4, max_pieces=64)


def test_calibration_sweep_agrees(fast_settings):
    spec = _perturbed_spec()
    density = flow.calibrate_steps_per_unit(spec, tol=1e-9, start=128)
    probes = sphere_points(4, 4)
    a, _ = flow.integrate_flow(
        spec, probes, 0.0, 1.0, flow.IntegratorSettings(steps_per_unit=density),
        with_jacobian=False,
    )
    b, _ = flow.integrate_flow(
        spec, probes, 0.0, 1.0, flow.IntegratorSettings(steps_per_unit=2 * density),
        with_jacobian=False,
    )
    assert np.max(np.abs(a - b)) < 1e-9
