import numpy as np
import pytest

from app.exceptions import CertificationError, MultiStepError, PreconditionError
from app.services.domains import project_pi, symmetric_preimages, tetrablock_margin
from app.services.geodesic_factory import TrivialSpec, geodesic_disc, random_nontriangular_spec
from app.services.lifting import detect_orders, lift_avoiding_T, lift_through_T_origin, symmetrize_boundary
from app.services.scalar_kernel import DiscMap, halton_disc_samples, is_symmetric, op_norm

LAM = halton_disc_samples(32, radius=1.0)


def test_constant_disc_lifts_to_a_symmetric_preimage():
    point = [0.3, 0.2, 0.5]
    result = lift_avoiding_T(DiscMap.constant(point))
    plus, minus = symmetric_preimages(point)
    assert np.allclose(result.G(0.4), plus, atol=1e-12)
    assert np.allclose(lift_avoiding_T(DiscMap.constant(point), branch=-1).G(0.4), minus, atol=1e-12)
    assert result.projection_residual <= 1e-12
    assert result.max_norm < 1


def test_nontriangular_discs_lift_into_the_closed_ball():
    rng = np.random.default_rng(61)
    for _ in range(3):
        f = geodesic_disc(random_nontriangular_spec(rng, feasible=True))
        result = lift_avoiding_T(f)
        assert result.projection_residual <= 1e-9
        assert result.max_norm <= 1 + 1e-9
        values = result.G(LAM)
        assert np.all(is_symmetric(values))
        assert np.allclose(project_pi(values), f(LAM), atol=1e-9)


def test_disc_through_T_at_origin_needs_factoring():
    f = DiscMap(([0, 1], [0, 1], [0]), certify=False)
    with pytest.raises(PreconditionError, match="lift_through_T_origin"):
        lift_avoiding_T(f)


def test_detect_orders():
    assert detect_orders(geodesic_disc(TrivialSpec(0.0))) == (0, 1)
    assert detect_orders(DiscMap(([0, 1], [0, 1], [0, 0, 1]), certify=False)) == (1, 1)
    assert detect_orders(DiscMap(([0, 1], [0, 1], [0]), certify=False)) == (1, 1)


def test_trivial_disc_lifts_through_the_origin():
    """(0, 0, lam) lifts to [[0, i], [i lam, 0]]"""
    result = lift_through_T_origin(geodesic_disc(TrivialSpec(0.0)))
    assert result.orders == (0, 1)
    lam = np.array([0.5, -0.3j, 0.9])
    expected = np.zeros((3, 2, 2), dtype=complex)
    expected[:, 0, 1] = 1j
    expected[:, 1, 0] = 1j * lam
    assert np.allclose(result.G(lam), expected, atol=1e-12)
    assert result.projection_residual <= 1e-12


def test_factored_disc_lifts_through_the_origin():
    """(lam/2, lam/2, 0) factors to g = (1/2, 1/2, 0) and lifts to lam / 2 times the ones matrix"""
    f = DiscMap(([0, 0.5], [0, 0.5], [0]), certify=False)
    result = lift_through_T_origin(f)
    assert result.orders == (1, 1)
    lam = np.array([0.5, 0.2j, np.exp(0.3j)])
    assert np.allclose(result.G(lam), 0.5 * lam[:, None, None] * np.ones((2, 2)), atol=1e-12)
    assert result.projection_residual <= 1e-12
    assert result.max_norm <= 1 + 1e-9


def test_lift_leaving_the_matrix_ball_is_rejected():
    """(lam, lam, 0) is not a disc of the closed tetrablock; its lift lam times ones has norm 2"""
    f = DiscMap(([0, 1], [0, 1], [0]), certify=False)
    with pytest.raises(CertificationError):
        lift_through_T_origin(f, 1, 1)


def test_second_factoring_step_is_refused():
    f = DiscMap(([0, 1], [0, 1], [0, 0, 1]), certify=False)
    with pytest.raises(MultiStepError):
        lift_through_T_origin(f)


def test_certificate_fields():
    certificate = lift_through_T_origin(geodesic_disc(TrivialSpec(0.5))).certificate()
    assert certificate["kind"] == "through_T_origin"
    assert certificate["orders"] == [0, 1]
    assert certificate["n_samples"] > 256


def test_symmetrize_boundary():
    """Replacing the off-diagonal pair by sqrt(v12 v21) keeps pi and never raises the norm"""
    rng = np.random.default_rng(62)
    v = rng.standard_normal((200, 2, 2)) + 1j * rng.standard_normal((200, 2, 2))
    v /= op_norm(v)[:, None, None]
    sym = symmetrize_boundary(v)
    assert np.all(is_symmetric(sym))
    assert np.allclose(project_pi(sym), project_pi(v), atol=1e-12)
    assert np.all(op_norm(sym) <= 1 + 1e-12)
    assert np.allclose(symmetrize_boundary([[0, 1], [0, 0]]), np.zeros((2, 2)))


def test_unbalanced_boundary_matrices_project_inside():
    """A norm-one matrix with |v12| != |v21| lands strictly inside the tetrablock"""
    rng = np.random.default_rng(63)
    v = rng.standard_normal((300, 2, 2)) + 1j * rng.standard_normal((300, 2, 2))
    v /= op_norm(v)[:, None, None]
    unbalanced = np.abs(np.abs(v[:, 0, 1]) - np.abs(v[:, 1, 0])) > 0.1
    assert unbalanced.sum() > 100
    assert np.all(np.asarray(tetrablock_margin(project_pi(v[unbalanced]))) > 0)
