import numpy as np
import pytest

from app.exceptions import (
    CertificationError,
    ContradictionError,
    FeasibilityError,
    ParameterError,
    PreconditionError,
)
from app.services import left_inverse as left_inverse_module
from app.services.geodesic_factory import (
    InsideTSpec,
    NonTriangularSpec,
    TrivialSpec,
    TriangularSpec,
    evaluate_geodesic,
    random_nontriangular_spec,
    random_triangular_spec,
)
from app.services.left_inverse import (
    CompositeSpec,
    DirectSpec,
    LeftInverse,
    PsiFamilySpec,
    build_left_inverse,
    composite_jet,
    corrected_disc,
    h_prime_closed_form,
    left_inverse_nontriangular,
    left_inverse_triangular,
    rouche_fixed_point,
    select_tau_gamma,
    verify_left_inverse,
)
from app.services.scalar_kernel import DiscMap


def _residual(spec, n_samples=64):
    L = LeftInverse(build_left_inverse(spec))
    return verify_left_inverse(lambda lam: evaluate_geodesic(spec, lam), L, n_samples=n_samples)


def _infeasible_spec(c=0.3, beta=0.5, mu=0.4j):
    d = np.sqrt(1 - c ** 2)
    return NonTriangularSpec(d, -c, c, d, mu, beta)


def test_rouche_fixed_point_on_a_contraction():
    """lam = 0.5 lam z1 + 0.1 has the single root 0.125 when z1 = 0.4"""
    result = rouche_fixed_point(lambda y: 0.5 * y[..., 0] + 0.1, (1, 0, 1), [0.4, 0, 0])
    assert result.winding_certificate == 1
    assert abs(result.lambda_star - 0.125) < 1e-11
    assert result.residual <= 1e-11


def test_rouche_rejects_maps_leaving_the_disc():
    with pytest.raises(ContradictionError):
        rouche_fixed_point(lambda y: 2.0 + 0 * y[..., 0], (1, 0, 1), [0.4, 0, 0])


BALANCED_WEIGHTS = ((1, 1, 2), (1, 0, 1), (2, 1, 3))


def _balanced_problem(seed):
    """F(y) = c0 + c . y with |F| <= 0.5 on the closed disc after balanced scaling"""
    rng = np.random.default_rng(seed)
    m = BALANCED_WEIGHTS[seed % len(BALANCED_WEIGHTS)]
    z = 0.6 * np.sqrt(rng.random(3)) * np.exp(2j * np.pi * rng.random(3))
    c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    c *= 0.5 / (abs(c[0]) + np.sum(np.abs(c[1:] * z)))
    return (lambda y: c[0] + np.asarray(y) @ c[1:]), m, z, c


def _grid_newton_root(m, z, c):
    """Best point of a 200 x 200 grid on the disc, polished by Newton with the exact derivative"""
    coeff = c[1:] * z
    w = np.array(m)

    def g(lam):
        lam = np.asarray(lam, dtype=complex)
        return lam - c[0] - np.sum(coeff * lam[..., None] ** w, axis=-1)

    def dg(lam):
        return 1 - np.sum(coeff * w * complex(lam) ** np.maximum(w - 1, 0))

    x = np.linspace(-1, 1, 200)
    grid = (x[:, None] + 1j * x[None, :]).ravel()
    grid = grid[np.abs(grid) < 1]
    lam = complex(grid[np.argmin(np.abs(g(grid)))])
    for _ in range(50):
        step = complex(g(lam)) / dg(lam)
        lam -= step
        if abs(step) < 1e-16:
            break
    return lam


@pytest.mark.parametrize("seed", range(20))
def test_rouche_matches_grid_and_newton(seed):
    F, m, z, c = _balanced_problem(seed)
    result = rouche_fixed_point(F, m, z)
    assert result.winding_certificate == 1
    assert abs(result.lambda_star - _grid_newton_root(m, z, c)) <= 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_rouche_winding_is_stable_under_contour_radius(seed):
    """Contours between 1 - 2 eps and 1 - eps / 2 enclose the same single root"""
    F, m, z, c = _balanced_problem(seed)
    expected = _grid_newton_root(m, z, c)
    eps = left_inverse_module.CONTOUR_EPS
    for contour_eps in (2 * eps, 1.5 * eps, eps, 0.75 * eps, eps / 2):
        result = rouche_fixed_point(F, m, z, eps=contour_eps)
        assert result.winding_certificate == 1
        assert abs(result.lambda_star - expected) <= 1e-10


def test_direct_left_inverses():
    assert build_left_inverse(TrivialSpec(0.3)) == DirectSpec(2, np.exp(0.3j))
    inside = InsideTSpec(DiscMap.scalar([0, 1j]), DiscMap.scalar([0.2, 0.3]))
    li = build_left_inverse(inside)
    assert li.coordinate == 0
    assert _residual(TrivialSpec(0.3)) < 1e-14
    assert _residual(inside) < 1e-14


def test_psi_left_inverse_of_the_diagonal_disc():
    """(lam, lam, lam^2) is inverted by a rotated Psi_a"""
    spec = TriangularSpec(np.eye(2), np.eye(2), 0.0)
    li = left_inverse_triangular(spec)
    assert isinstance(li, PsiFamilySpec)
    assert abs(li.rotation + 1) < 1e-12
    assert _residual(spec) < 1e-12


@pytest.mark.parametrize("family", ["identity", "contracted"])
def test_triangular_left_inverses(family):
    rng = np.random.default_rng(51 if family == "identity" else 52)
    for _ in range(5):
        spec = random_triangular_spec(rng, family)
        assert _residual(spec) <= 1e-10


def test_perturbed_psi_parameter_is_not_a_left_inverse():
    """Rotating a away from the solved value leaves a visible residual"""
    spec = TriangularSpec(np.eye(2), np.array([[0.8, 0.6], [-0.6, 0.8]]), 0.6, mu=0.5, z_is_identity=False)
    li = left_inverse_triangular(spec)
    assert _residual(spec) <= 1e-10
    bad = PsiFamilySpec(li.a * np.exp(0.1j), li.rotation, li.swap)
    residual = verify_left_inverse(lambda lam: evaluate_geodesic(spec, lam), LeftInverse(bad))
    assert residual > 1e-4


def test_select_tau_gamma():
    spec = random_nontriangular_spec(np.random.default_rng(53), feasible=True)
    tau, gamma = select_tau_gamma(spec)
    assert abs(abs(tau) - 1) < 1e-12
    assert abs(gamma) < 1
    assert abs(spec.d - spec.b * tau * spec.beta * gamma) < 1e-12
    with pytest.raises(FeasibilityError):
        select_tau_gamma(_infeasible_spec())


def test_composite_jet_matches_closed_form():
    """h'(0) computed from the corrected disc agrees with the closed form and is Schwarz-Pick extremal"""
    rng = np.random.default_rng(54)
    for _ in range(5):
        spec = random_nontriangular_spec(rng, feasible=True)
        tau, gamma = select_tau_gamma(spec)
        h0, h1 = composite_jet(corrected_disc(spec, tau, gamma))
        assert abs(h1 - h_prime_closed_form(spec, tau, gamma)) < 1e-9
        assert abs(abs(h1) - (1 - abs(h0) ** 2)) < 1e-9


def test_composite_rejects_jet_disagreeing_with_closed_form(monkeypatch):
    """A corrupted closed form must stop the composite construction"""
    spec = random_nontriangular_spec(np.random.default_rng(55), feasible=True)
    left_inverse_nontriangular(spec)
    original = left_inverse_module.h_prime_closed_form
    monkeypatch.setattr(left_inverse_module, "h_prime_closed_form", lambda s, t, g: original(s, t, g) + 1e-6)
    with pytest.raises(CertificationError):
        left_inverse_nontriangular(spec)


def test_composite_left_inverse_with_unimodular_c():
    """d = 0 makes the composite map a rotation"""
    c = np.exp(0.4j)
    spec = NonTriangularSpec(0, -np.conj(c), c, 0, 0.3, 0.5)
    li = left_inverse_nontriangular(spec)
    assert abs(li.gamma) < 1e-15
    assert abs(li.h_prime0 - c ** 2) < 1e-12
    assert _residual(spec, n_samples=16) <= 1e-8


def test_composite_left_inverses():
    rng = np.random.default_rng(55)
    for _ in range(2):
        spec = random_nontriangular_spec(rng, feasible=True)
        assert isinstance(build_left_inverse(spec), CompositeSpec)
        assert _residual(spec, n_samples=12) <= 1e-8


def test_infeasible_spec_has_no_composite():
    with pytest.raises(FeasibilityError):
        left_inverse_nontriangular(_infeasible_spec())


def test_left_inverse_spec_validation():
    with pytest.raises(ParameterError):
        PsiFamilySpec(a=0.5)
    with pytest.raises(ParameterError):
        DirectSpec(coordinate=3, phase=1)
    with pytest.raises(ParameterError):
        CompositeSpec(tau=1, gamma=1.0, h0=0, h_prime0=1)


def test_disc_meeting_T_has_no_composite():
    spec = _infeasible_spec(c=np.sqrt(0.5), beta=0.5)
    with pytest.raises(PreconditionError):
        left_inverse_nontriangular(spec)


@pytest.mark.slow
def test_triangular_left_inverses_at_scale():
    """500 seeded identity-Z specs, 64 Halton samples each"""
    rng = np.random.default_rng(500)
    worst = max(_residual(random_triangular_spec(rng, "identity")) for _ in range(500))
    assert worst <= 1e-10


@pytest.mark.slow
def test_composite_left_inverses_at_scale():
    """200 seeded feasible specs: extremal jet and full composite residual"""
    rng = np.random.default_rng(200)
    for _ in range(200):
        spec = random_nontriangular_spec(rng, feasible=True)
        li = left_inverse_nontriangular(spec)
        assert abs(abs(li.h_prime0) - (1 - abs(li.h0) ** 2)) <= 1e-9
        assert _residual(spec) <= 1e-8


@pytest.mark.slow
def test_rouche_at_scale():
    """500 balanced problems against the grid and Newton root"""
    for seed in range(500):
        F, m, z, c = _balanced_problem(seed)
        result = rouche_fixed_point(F, m, z)
        assert result.winding_certificate == 1
        assert abs(result.lambda_star - _grid_newton_root(m, z, c)) <= 1e-10
