import numpy as np
import pytest

from app.exceptions import DomainError, ParameterError
from app.services.domains import tetrablock_margin
from app.services.geodesic_factory import nu_of_disc
from app.services.sampling import planted_nu_disc, sample_tetrablock
from app.services.scalar_kernel import halton_disc_samples, op_norm
from app.services.transforms import (
    F_a,
    TetraAutParams,
    aut_disc,
    aut_tetrablock,
    aut_tetrablock_closed_form,
    aut_tetrablock_inverse,
    embed_G2,
    nu_factor,
    phi_a,
    phi_c_lower,
    psi_z,
)


def _random_contractions(rng, n, scale=0.9):
    m = rng.standard_normal((n, 2, 2)) + 1j * rng.standard_normal((n, 2, 2))
    return scale * rng.random((n, 1, 1)) * m / op_norm(m)[:, None, None]


def test_phi_a_moves_a_to_origin():
    a = np.array([[0.3, 0.1j], [-0.2, 0.4]])
    assert np.allclose(phi_a(a, a), 0, atol=1e-14)
    assert np.allclose(phi_a(a, np.zeros((2, 2))), -a, atol=1e-14)


def test_phi_a_preserves_the_ball():
    rng = np.random.default_rng(2)
    a = _random_contractions(rng, 1, 0.8)[0]
    x = _random_contractions(rng, 300)
    assert np.all(op_norm(phi_a(a, x)) < 1)


def test_phi_c_lower_matches_general_formula():
    rng = np.random.default_rng(4)
    c = 0.6 * np.exp(0.9j)
    x = _random_contractions(rng, 100)
    a = np.array([[0, 0], [c, 0]])
    assert np.allclose(phi_c_lower(c, x), phi_a(a, x), atol=1e-12)


def test_phi_a_rejects_points_outside_the_ball():
    with pytest.raises(ParameterError):
        phi_a(np.zeros((2, 2)), 2 * np.eye(2))
    with pytest.raises(ParameterError):
        phi_c_lower(1.0, np.zeros((2, 2)))


def test_aut_branches_match_closed_form():
    """Lift-apply-project agrees with the closed form, swap included"""
    rng = np.random.default_rng(8)
    z = sample_tetrablock(rng, 200)
    for _ in range(5):
        p = TetraAutParams.random(rng)
        assert np.allclose(aut_tetrablock(p, z), aut_tetrablock_closed_form(p, z), atol=1e-10)


def test_aut_maps_tetrablock_into_itself_and_inverts():
    rng = np.random.default_rng(9)
    z = sample_tetrablock(rng, 200)
    p = TetraAutParams(0.5 - 0.3j, -0.6j, 0.4, 1.3, True)
    image = aut_tetrablock(p, z)
    assert np.all(np.asarray(tetrablock_margin(image)) > 0)
    assert np.allclose(aut_tetrablock_inverse(p, image), z, atol=1e-9)


def test_identity_automorphism():
    z = np.array([0.2, -0.1j, 0.05])
    assert np.allclose(aut_tetrablock(TetraAutParams.identity(), z), z, atol=1e-15)


def test_aut_rejects_outside_points():
    with pytest.raises(DomainError):
        aut_tetrablock(TetraAutParams.identity(), [0.9, 0.9, 0])


def test_aut_params_validation():
    with pytest.raises(ParameterError):
        TetraAutParams(a1=1.0)


def test_nu_factor_identity():
    """psi1 psi2 - psi3 = k (x1 x2 - x3)"""
    rng = np.random.default_rng(12)
    x = sample_tetrablock(rng, 200)
    p = TetraAutParams.random(rng)
    psi = aut_tetrablock_closed_form(p, x)
    lhs = psi[:, 0] * psi[:, 1] - psi[:, 2]
    rhs = nu_factor(p, x) * (x[:, 0] * x[:, 1] - x[:, 2])
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_aut_disc_matches_pointwise_automorphism():
    rng = np.random.default_rng(13)
    f, _ = planted_nu_disc(rng)
    p = TetraAutParams.random(rng)
    moved = aut_disc(p, f)
    lam = halton_disc_samples(32, radius=1.0)
    assert np.allclose(moved(lam), aut_tetrablock_closed_form(p, f(lam)), atol=1e-12)


def test_psi_z_maps_into_disc():
    rng = np.random.default_rng(14)
    x = sample_tetrablock(rng, 300)
    for zeta in (1.0, np.exp(2.1j), 0.5j, 0.0):
        assert np.all(np.abs(psi_z(zeta, x)) < 1)
    with pytest.raises(ParameterError):
        psi_z(1.5, x)


def test_embed_G2_and_F_a():
    lam = np.array([[0.5, -0.3j], [0.9, 0.8j], [0.1, 0.1]])
    s, p = lam.sum(axis=1), lam.prod(axis=1)
    image = embed_G2(s, p)
    assert np.all(np.asarray(tetrablock_margin(image)) > 0)
    assert np.allclose(image[:, 0], s / 2)
    assert np.all(np.abs(F_a(np.exp(0.3j), s, p)) < 1)
    with pytest.raises(DomainError):
        embed_G2(2.0, 1.0)


@pytest.mark.slow
def test_automorphisms_preserve_orders_of_contact_at_scale():
    """200 planted discs: every order of contact with T survives a random automorphism"""
    rng = np.random.default_rng(2000)
    for _ in range(200):
        f, expected = planted_nu_disc(rng)
        moved = aut_disc(TetraAutParams.random(rng), f)
        for zero, order in expected.items():
            assert nu_of_disc(moved, zero) == order
