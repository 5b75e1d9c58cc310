import numpy as np
import pytest

from contactmorse import genfun as gfm
from contactmorse import hamiltonian as ham
from contactmorse.flow import FlowMap, IntegratorSettings, integrate_flow, subdivide_c1_small
from contactmorse.linsymp import tau_covector, to_complex, to_real
from contactmorse.sampling import sphere_points

from oracles import fd_gradient


def _perturbed_spec():
    return ham.ContactHamiltonianSpec(
        n=2,
        quadratic=(0.3, 0.7),
        terms=(
            ham.PerturbationTerm(0.05, (2, 0), (1, 0)),
            ham.PerturbationTerm(0.05, (0, 2), (0, 1)),
        ),
    )


def _tau_graph_check(gf, spec_or_map, z, settings, tol):
    """The fiber-critical reduction of gf must hit tau(graph Phi) over z."""
    if isinstance(spec_or_map, ham.ContactHamiltonianSpec):
        Z, _ = integrate_flow(spec_or_map, z, 0.0, 1.0, settings, with_jacobian=False)
    else:
        Z = spec_or_map(z)
    base = 0.5 * (z + Z)
    fib, z_out = gf.chain_seed(z)
    assert np.max(np.abs(z_out - Z)) < 1e-7
    fib, ok = gfm.fiber_critical_solve(gf, base, fib)
    assert ok.all()
    cov, ok2 = gfm.reduced_covector(gf, base, fib)
    assert ok2.all()
    assert np.max(np.abs(cov - tau_covector(z, Z))) < tol


# --- leaves ---------------------------------------------------------------


def test_identity_leaf(settings, rng):
    spec = ham.ContactHamiltonianSpec(n=2, quadratic=(0.0, 0.0))
    piece = FlowMap(spec, 0.0, 1.0, settings)
    b = rng.normal(size=(5, 4))
    val, grad = gfm.gf_leaf_eval(piece, b)
    assert np.allclose(val, 0.0, atol=1e-10)
    assert np.allclose(grad, 0.0, atol=1e-10)


def test_leaf_rotation_closed_form(settings, rng):
    # a_{1/8} (h == -1 over [0, 1/8]) has Q(b) = -tan(pi/8) |b|^2
    spec = ham.ContactHamiltonianSpec(n=1, quadratic=(-1.0,))
    piece = FlowMap(spec, 0.0, 0.125, settings)
    b = rng.normal(size=(8, 2))
    val, grad = gfm.gf_leaf_eval(piece, b)
    coeff = -np.tan(np.pi * 0.125)
    assert np.allclose(val, coeff * np.sum(b * b, axis=1), atol=1e-9)
    assert np.allclose(grad, 2.0 * coeff * b, atol=1e-9)


def test_leaf_gradient_matches_fd(settings, rng):
    spec = _perturbed_spec()
    piece = FlowMap(spec, 0.0, 0.08, settings)
    leaf = gfm.LeafGF(piece)
    for _ in range(3):
        b = rng.normal(size=4)
        _, grad = gfm.gf_leaf_eval(piece, b)
        fd = fd_gradient(lambda v: gfm.gf_eval(leaf, v), b)
        assert np.allclose(grad, fd, atol=1e-6)


def test_leaf_newton_failure_raises(settings):
    # h == 1 over half a period maps z to -z; the midpoint equation is
    # singular and the piece is maximally far from C^1-small.
    spec = ham.ContactHamiltonianSpec(n=1, quadratic=(1.0,))
    piece = FlowMap(spec, 0.0, 0.5, settings)
    with pytest.raises(gfm.LeafNewtonError):
        gfm.gf_leaf_eval(piece, np.array([1.0, 0.0]))


# --- rotation quadratics ---------------------------------------------------


def test_rotation_quadratic_values():
    assert np.allclose(gfm.quadratic_form_for_rotation(0.0, 2).matrix, 0.0)
    assert np.allclose(gfm.quadratic_form_for_rotation(0.25, 1).matrix, -np.eye(2))
    c1 = abs(gfm.quadratic_form_for_rotation(0.49, 1).matrix[0, 0])
    c2 = abs(gfm.quadratic_form_for_rotation(0.499, 1).matrix[0, 0])
    assert c2 > c1
    with pytest.raises(ValueError):
        gfm.quadratic_form_for_rotation(0.5, 1)


def test_rotation_quadratic_generates_rotation(rng):
    for t in (0.1, -0.3, 0.25):
        leaf = gfm.rotation_leaf(t, 2)
        z = rng.normal(size=(6, 4))
        Z = leaf.map_points(z)
        expect = to_real(np.exp(-2j * np.pi * t) * to_complex(z))
        assert np.max(np.abs(Z - expect)) < 1e-12
        # graph of dQ under tau
        base = 0.5 * (z + Z)
        _, grad, _, _ = leaf.evaluate(base, order=1)
        assert np.max(np.abs(grad - tau_covector(z, Z))) < 1e-12


# --- composition ------------------------------------------------------------


def test_compose_identity_reduces_to_zero_section(settings, rng):
    spec = ham.ContactHamiltonianSpec(n=2, quadratic=(0.0, 0.0))
    leaf1 = gfm.LeafGF(FlowMap(spec, 0.0, 0.5, settings))
    leaf2 = gfm.LeafGF(FlowMap(spec, 0.5, 1.0, settings))
    comp = gfm.gf_compose(leaf1, leaf2)
    z = rng.normal(size=(6, 4))
    _tau_graph_check(comp, lambda w: w, z, settings, 1e-9)


def test_compose_two_rotations(rng):
    comp = gfm.gf_compose(gfm.rotation_leaf(0.125, 1), gfm.rotation_leaf(0.125, 1))
    assert comp.fiber_dim == 4
    z = rng.normal(size=(8, 2))
    rot = lambda w: to_real(np.exp(-2j * np.pi * 0.25) * to_complex(w))
    _tau_graph_check(comp, rot, z, None, 1e-8)


def test_compose_homogeneity(settings, rng):
    spec = _perturbed_spec()
    leaf = gfm.LeafGF(FlowMap(spec, 0.0, 0.08, settings))
    comp = gfm.gf_compose(gfm.rotation_leaf(0.1, 2), leaf)
    x = rng.normal(size=(5, comp.total_dim))
    v1 = gfm.gf_eval(comp, x)
    for lam in (0.5, 2.0):
        v2 = gfm.gf_eval(comp, lam * x)
        assert np.max(np.abs(v2 - lam**2 * v1) / np.abs(v1)) < 1e-9


def test_compose_dimension_mismatch():
    with pytest.raises(ValueError):
        gfm.gf_compose(gfm.rotation_leaf(0.1, 1), gfm.rotation_leaf(0.1, 2))


def test_quadratic_dag_matches_assembled_matrix(rng):
    dag = gfm.gf_compose(
        gfm.gf_compose(gfm.rotation_leaf(0.1, 1), gfm.rotation_leaf(0.05, 1)),
        gfm.rotation_leaf(-0.2, 1),
    )
    M = gfm.flatten_quadratic(dag)
    x = rng.normal(size=(10, dag.total_dim))
    direct = np.einsum("bi,ij,bj->b", x, M, x)
    vals, grads, _, _ = dag.evaluate(x, order=1)
    assert np.max(np.abs(vals - direct)) < 1e-10
    assert np.max(np.abs(grads - 2.0 * x @ M)) < 1e-10


def test_gf_grad_matches_fd(settings, rng):
    spec = _perturbed_spec()
    leaf = gfm.LeafGF(FlowMap(spec, 0.0, 0.08, settings))
    comp = gfm.gf_compose(leaf, gfm.rotation_leaf(0.15, 2))
    x = rng.normal(size=comp.total_dim)
    grad = gfm.gf_grad(comp, x)
    fd = fd_gradient(lambda v: gfm.gf_eval(comp, v), x)
    assert np.allclose(grad, fd, atol=1e-6)


def test_stacked_evaluation_is_bitwise_plain(settings, rng):
    spec = _perturbed_spec()
    schedule = subdivide_c1_small(spec, 0.0, 0.5, 1.0, settings)
    gf = None
    for a, b in schedule:
        leaf = gfm.LeafGF(FlowMap(spec, a, b, settings))
        gf = leaf if gf is None else gfm.gf_compose(gf, leaf)
    x = rng.normal(size=(4, gf.total_dim))
    v1, g1, H1, ok1 = gf.evaluate(x, order=2)
    v2, g2, H2, ok2 = gfm.evaluate_stacked(gf, x, order=2)
    assert np.array_equal(v1, v2) and np.array_equal(g1, g2) and np.array_equal(H1, H2)


# --- rotation family --------------------------------------------------------


def test_build_rotation_family_validation():
    with pytest.raises(ValueError):
        gfm.build_rotation_family(0.5, 1, 2)
    with pytest.raises(ValueError):
        gfm.build_rotation_family(1.2, 1, 4)


def test_rotation_family_reduces_to_rotation_graph(rng):
    for t in (0.0, 0.3, 0.7, 1.0):
        fam = gfm.build_rotation_family(t, 2, 4)
        z = rng.normal(size=(6, 4))
        rot = lambda w: to_real(np.exp(-2j * np.pi * t) * to_complex(w))
        _tau_graph_check(fam.genfun, rot, z, None, 1e-8)


def test_rotation_family_matrix_matches_dag(rng):
    for t in (0.2, 0.9):
        fam = gfm.build_rotation_family(t, 1, 4)
        M = gfm.flatten_quadratic(fam.genfun)
        assert np.max(np.abs(M - fam.matrix)) < 1e-12


def test_rotation_family_matrices_continuous_in_t():
    t = np.linspace(0.0, 1.0, 9)
    M, dM = gfm.rotation_family_matrices(t, 1, 4)
    diffs = np.abs(np.diff(M, axis=0)).max(axis=(1, 2))
    assert np.all(diffs < 0.5)
    # derivative matches finite differences of the assembly
    eps = 1e-6
    Mp, _ = gfm.rotation_family_matrices(t + eps, 1, 4)
    Mm, _ = gfm.rotation_family_matrices(t - eps, 1, 4)
    assert np.max(np.abs(dM - (Mp - Mm) / (2 * eps))) < 1e-6


def test_generating_property_full_isotopy(settings):
    """Reduction of the composed F_phi coincides with tau(graph Phi)."""
    spec = _perturbed_spec()
    schedule = subdivide_c1_small(spec, 0.0, 1.0, 1.0, settings)
    gf = None
    for a, b in schedule:
        leaf = gfm.LeafGF(FlowMap(spec, a, b, settings))
        gf = leaf if gf is None else gfm.gf_compose(gf, leaf)
    z = sphere_points(32, 4)
    _tau_graph_check(gf, spec, z, settings, 1e-7)


def test_chain_seed_lies_on_fiber_critical_set(settings):
    spec = _perturbed_spec()
    schedule = subdivide_c1_small(spec, 0.0, 1.0, 1.0, settings)
    gf = None
    for a, b in schedule:
        leaf = gfm.LeafGF(FlowMap(spec, a, b, settings))
        gf = leaf if gf is None else gfm.gf_compose(gf, leaf)
    z = sphere_points(8, 4)
    Z, _ = integrate_flow(spec, z, 0.0, 1.0, settings, with_jacobian=False)
    fib, z_out = gf.chain_seed(z)
    x = np.concatenate([0.5 * (z + Z), fib], axis=1)
    _, grad, _, ok = gfm.evaluate_stacked(gf, x, order=1)
    assert ok.all()
    # fiber block of the gradient vanishes on the chain seed
    assert np.max(np.abs(grad[:, gf.base_dim:])) < 1e-7


# --- monotonicity -----------------------------------------------------------


def test_monotonicity_reeb_positive(fast_settings):
    spec = ham.ContactHamiltonianSpec(n=1, quadratic=(1.0,))
    assert gfm.monotonicity_probe(spec, fast_settings, sample_count=16, t_count=8) > 0


def test_monotonicity_mirror_negative(fast_settings):
    spec = ham.ContactHamiltonianSpec(n=1, quadratic=(-1.0,))
    vals = gfm.monotonicity_probe_values(
        spec, fast_settings, sample_count=16, t_count=8
    )
    assert np.max(vals) < 0


def test_monotonicity_positive_perturbed(fast_settings):
    spec = ham.ContactHamiltonianSpec(
        n=2, quadratic=(1.0, 1.0), terms=(ham.PerturbationTerm(0.3, (1, 0), (0, 1)),)
    )
    assert gfm.monotonicity_probe(spec, fast_settings, sample_count=16, t_count=8) > 0


def test_monotonicity_rejects_sign_indefinite(fast_settings):
    spec = ham.ContactHamiltonianSpec(n=2, quadratic=(0.5, -0.5))
    with pytest.raises(ValueError):
        gfm.monotonicity_probe(spec, fast_settings, sample_count=8, t_count=4)
