"""Left inverses of the extremal discs and the Rouche fixed-point solver
behind the composite construction."""
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Optional, Sequence, Tuple, Union
import logging

import numpy as np
from numpy.polynomial import polynomial as P

from app.config import TOLERANCES
from app.exceptions import (
    CertificationError,
    ConstructionError,
    ContourError,
    ContradictionError,
    FeasibilityError,
    ParameterError,
    PreconditionError,
)
from app.services.domains import as_point3, scale_balanced
from app.services.geodesic_factory import (
    GeodesicSpec,
    InsideTSpec,
    NonTriangularSpec,
    TrivialSpec,
    TriangularSpec,
    avoids_T,
    evaluate_geodesic,
    geodesic_disc,
)
from app.services.scalar_kernel import (
    DiscAutomorphism,
    DiscMap,
    count_roots_in_disc,
    halton_disc_samples,
    mobius,
    mobius_inverse,
)
from app.services.transforms import psi_z

logger = logging.getLogger(__name__)

PHASE_GRID = 4096
FIT_RADII = (0.35, 0.7)
SEARCH_RESIDUAL_LIMIT = 1e-6
SCHWARZ_PICK_TOL = 1e-9
JET_AGREEMENT_TOL = 1e-9
NEWTON_STEP = 1e-6
NEWTON_MAX_ITER = 50
CONTOUR_EPS = 1e-6


@dataclass(frozen=True)
class PsiFamilySpec:
    """x -> conj(rotation) Psi_a(x), with x1 and x2 exchanged first when swap is set"""

    a: complex
    rotation: complex = 1.0
    swap: bool = False
    kind: ClassVar[str] = "psi_family"

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "rotation", complex(self.rotation))
        if abs(abs(self.a) - 1) > 1e-9 or abs(abs(self.rotation) - 1) > 1e-9:
            raise ParameterError("a and rotation must be unimodular")


@dataclass(frozen=True)
class CompositeSpec:
    """Left inverse m^{-1}(lam*(x)) where lam* solves m(h^{-1}(F(lam x1, x2, lam x3))) = lam"""

    tau: complex
    gamma: complex
    h0: complex
    h_prime0: complex
    weights: Tuple[int, int, int] = (1, 0, 1)
    kind: ClassVar[str] = "composite"

    def __post_init__(self):
        for name in ("tau", "gamma", "h0", "h_prime0"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        if abs(abs(self.tau) - 1) > 1e-9:
            raise ParameterError("tau must be unimodular")
        if abs(self.gamma) >= 1 or abs(self.h0) >= 1:
            raise ParameterError("gamma and h(0) must lie in the open disc")


@dataclass(frozen=True)
class DirectSpec:
    """x -> conj(phase) x[coordinate]"""

    coordinate: int
    phase: complex
    kind: ClassVar[str] = "direct"

    def __post_init__(self):
        object.__setattr__(self, "phase", complex(self.phase))
        if self.coordinate not in (0, 1, 2):
            raise ParameterError("coordinate must be 0, 1 or 2")
        if abs(abs(self.phase) - 1) > 1e-9:
            raise ParameterError("phase must be unimodular")


LeftInverseSpec = Union[PsiFamilySpec, CompositeSpec, DirectSpec]


@dataclass(frozen=True)
class RoucheResult:
    lambda_star: complex
    residual: float
    winding_certificate: int


def composite_base_map(z: np.ndarray) -> np.ndarray:
    """F(z) = (z3 - z2) / (z1 - 1)"""
    z = np.asarray(z, dtype=complex)
    return (z[..., 2] - z[..., 1]) / (z[..., 0] - 1)


def _sector_winding(g: Callable, r0: float, r1: float, t0: float, t1: float, n: int = 64) -> Optional[int]:
    """Winding of g along the boundary of an annular sector, None if unresolved"""
    while n <= 4096:
        s = np.linspace(0.0, 1.0, n, endpoint=False)
        outer = r1 * np.exp(1j * (t0 + (t1 - t0) * s))
        down = (r1 + (r0 - r1) * s) * np.exp(1j * t1)
        inner = r0 * np.exp(1j * (t1 + (t0 - t1) * s))
        up = (r0 + (r1 - r0) * s) * np.exp(1j * t0)
        path = np.concatenate([outer, down, inner, up])
        values = g(path)
        if not np.all(np.isfinite(values)) or np.min(np.abs(values)) == 0:
            return None
        closed = np.append(values, values[0])
        steps = np.angle(closed[1:] / closed[:-1])
        if np.max(np.abs(steps)) < np.pi / 2:
            return int(np.round(steps.sum() / (2 * np.pi)))
        n *= 2
    return None


def _subdivide(g: Callable, radius: float, min_size: float = 1e-3) -> complex:
    """Shrink an annular sector containing exactly one root of g"""
    r0, r1, t0, t1 = 0.0, radius, 0.0, 2 * np.pi
    for _ in range(200):
        if (r1 - r0) < min_size and (t1 - t0) * r1 < min_size:
            break
        rm = 0.5 * (r0 + r1) * (1 + 1e-3)
        tm = 0.5 * (t0 + t1) + 1e-3
        children = [(r0, rm, t0, tm), (r0, rm, tm, t1), (rm, r1, t0, tm), (rm, r1, tm, t1)]
        for child in children:
            if _sector_winding(g, *child) == 1:
                r0, r1, t0, t1 = child
                break
        else:
            raise ContradictionError("Winding subdivision lost the root")
    rc = 0.5 * (r0 + r1)
    return complex(rc * np.exp(0.5j * (t0 + t1)))


def _newton(g: Callable, start: complex, tol_fix: float, limit: float) -> Tuple[complex, float]:
    lam = complex(start)
    value = complex(g(lam))
    polish = 0
    for _ in range(NEWTON_MAX_ITER):
        if abs(value) <= tol_fix:
            polish += 1
            if polish > 2:
                break
        deriv = (complex(g(lam + NEWTON_STEP)) - complex(g(lam - NEWTON_STEP))) / (2 * NEWTON_STEP)
        if deriv == 0 or not np.isfinite(deriv):
            break
        candidate = lam - value / deriv
        if abs(candidate) >= limit:
            break
        candidate_value = complex(g(candidate))
        if polish and abs(candidate_value) >= abs(value):
            break
        lam, value = candidate, candidate_value
    return lam, abs(value)


def rouche_fixed_point(
    F: Callable,
    m: Sequence[int],
    z,
    tol_fix: Optional[float] = None,
    eps: float = CONTOUR_EPS,
) -> RoucheResult:
    """Unique lam in the disc with F(scale_balanced(z, lam, m)) = lam"""
    tol_fix = TOLERANCES["tol_fix"] if tol_fix is None else tol_fix
    z = np.asarray(z, dtype=complex)

    def g(lam):
        lam = np.asarray(lam, dtype=complex)
        return lam - np.asarray(F(scale_balanced(z, lam, m)), dtype=complex)

    radius = 1 - eps
    try:
        winding = count_roots_in_disc(g, radius)
    except ContourError as e:
        raise ContradictionError(f"Fixed-point map touches the contour: {e}") from e
    if winding != 1:
        raise ContradictionError(f"Winding number {winding} instead of 1; the map is not a self-map of the disc")

    radii = radius * (np.arange(16) + 0.5) / 16
    angles = 2 * np.pi * np.arange(32) / 32
    grid = np.concatenate([[0], (radii[:, None] * np.exp(1j * angles[None, :])).ravel()])
    start = grid[np.argmin(np.abs(g(grid)))]
    lam, residual = _newton(g, start, tol_fix, radius)
    if residual > tol_fix:
        logger.warning(f"Newton stalled at residual {residual:.2e}; subdividing by winding")
        lam, residual = _newton(g, _subdivide(g, radius), tol_fix, radius)
    if residual > tol_fix:
        raise ContradictionError(f"Fixed point not resolved (residual {residual:.2e})")
    return RoucheResult(lambda_star=complex(lam), residual=float(residual), winding_certificate=winding)


def _fit_points() -> np.ndarray:
    k = np.arange(8)
    radii = np.array([FIT_RADII[j % 2] for j in k])
    return radii * np.exp(2j * np.pi * (k + 0.5) / 8)


def _psi_values(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    return (a * x[..., 2] - x[..., 0]) / (1 - a * x[..., 1])


def _polish_phase(theta: float, x: np.ndarray, anchors: np.ndarray, iterations: int = 30) -> float:
    """Gauss-Newton on the phase of a so that Psi_a(f(lam)) / lam is constant over the anchors"""
    for _ in range(iterations):
        a = np.exp(1j * theta)
        den = 1 - a * x[:, 1]
        ratio = (a * x[:, 2] - x[:, 0]) / den / anchors
        dratio = 1j * a * (x[:, 2] - x[:, 0] * x[:, 1]) / den ** 2 / anchors
        residual = ratio[1:] - ratio[0]
        jacobian = dratio[1:] - dratio[0]
        norm = float(np.sum(np.abs(jacobian) ** 2))
        if norm < 1e-24:
            break
        step = -float(np.real(np.sum(np.conj(jacobian) * residual))) / norm
        theta += step
        if abs(step) < 1e-15:
            break
    return theta


def left_inverse_triangular(s: TriangularSpec) -> PsiFamilySpec:
    """Find a on the circle with Psi_a o f a rotation; scan, then polish the phase"""
    if np.max(np.abs(evaluate_geodesic(s, 0.0))) > 1e-12:
        raise PreconditionError("Triangular disc must pass through the origin")
    anchors = _fit_points()
    values = evaluate_geodesic(s, anchors)
    grid = np.exp(2j * np.pi * np.arange(PHASE_GRID) / PHASE_GRID)
    best = None
    for swap in (False, True):
        x = values[:, [1, 0, 2]] if swap else values
        psi = _psi_values(grid[:, None], x[None, :, :])
        score = np.max(np.abs(np.abs(psi) - np.abs(anchors)[None, :]), axis=1)
        j = int(np.argmin(score))
        if best is None or score[j] < best[0]:
            best = (float(score[j]), 2 * np.pi * j / PHASE_GRID, swap)
    _, theta, swap = best
    x = values[:, [1, 0, 2]] if swap else values
    theta = _polish_phase(theta, x, anchors)
    a = np.exp(1j * theta)
    psi = _psi_values(a, x)
    rotation = psi[0] / anchors[0]
    rotation /= abs(rotation)
    residual = float(np.max(np.abs(np.conj(rotation) * psi - anchors)))
    if residual > SEARCH_RESIDUAL_LIMIT:
        raise ConstructionError(f"No Psi_a left inverse found (best residual {residual:.2e})")
    logger.debug(f"Psi_a left inverse: a={a:.6f}, swap={swap}, residual={residual:.2e}")
    return PsiFamilySpec(a=complex(a), rotation=complex(rotation), swap=swap)


def select_tau_gamma(s: NonTriangularSpec) -> Tuple[complex, complex]:
    """tau, gamma with d = b tau beta gamma and the two terms of h'(0) phase-aligned"""
    beta = s.beta
    if abs(s.c) ** 2 <= 1 / (1 + beta ** 2) + 1e-12:
        raise FeasibilityError(f"|c|^2 = {abs(s.c) ** 2:.6f} does not exceed 1/(1+beta^2) = {1 / (1 + beta ** 2):.6f}")
    kappa = s.d / s.b
    lead = (s.c - kappa * s.a) ** 2
    tau = lead / abs(lead)
    gamma = kappa / (tau * beta)
    if abs(gamma) >= 1:
        raise FeasibilityError(f"|gamma| = {abs(gamma)} is not below 1")
    return complex(tau), complex(gamma)


def h_prime_closed_form(s: NonTriangularSpec, tau: complex, gamma: complex) -> complex:
    beta = s.beta
    t = tau * beta * gamma
    return complex(
        (1 - beta ** 2) * ((s.c - t * s.a) ** 2 + s.mu * (s.d - t * s.b) ** 2)
        + tau * beta ** 2 * (1 - abs(gamma) ** 2)
    )


def corrected_disc(s: NonTriangularSpec, tau: complex, gamma: complex) -> DiscMap:
    """g = (m f1, f2, m f3) with m(lam) = tau (lam - gamma) / (1 - conj(gamma) lam)"""
    f = geodesic_disc(s)
    n1, n2, n3 = f.numerators
    m_num = tau * np.array([-gamma, 1], dtype=complex)
    m_den = np.array([1, -np.conj(gamma)], dtype=complex)
    return DiscMap(
        (P.polymul(m_num, n1), P.polymul(m_den, n2), P.polymul(m_num, n3)),
        P.polymul(m_den, f.denominator),
    )


def composite_jet(g: DiscMap) -> Tuple[complex, complex]:
    """h(0) and h'(0) for h = F o g"""
    g0 = g(0.0)
    dg0 = g.derivative_at(0.0)
    h0 = complex(composite_base_map(g0))
    den = g0[0] - 1
    h1 = (dg0[2] - dg0[1]) / den - (g0[2] - g0[1]) * dg0[0] / den ** 2
    return h0, complex(h1)


def left_inverse_nontriangular(s: NonTriangularSpec) -> CompositeSpec:
    if not avoids_T(s):
        raise PreconditionError("Disc meets the triangular set; the composite construction needs avoidance")
    tau, gamma = select_tau_gamma(s)
    h0, h1 = composite_jet(corrected_disc(s, tau, gamma))
    expected = h_prime_closed_form(s, tau, gamma)
    if abs(h1 - expected) > JET_AGREEMENT_TOL * max(1.0, abs(expected)):
        raise CertificationError(f"Certified jet h'(0) = {h1} disagrees with the closed form {expected}")
    defect = abs(abs(h1) - (1 - abs(h0) ** 2))
    if defect > SCHWARZ_PICK_TOL:
        raise CertificationError(f"F o g is not a disc automorphism (Schwarz-Pick defect {defect:.3e})")
    return CompositeSpec(tau=tau, gamma=gamma, h0=h0, h_prime0=h1)


def composite_scalar_map(spec: CompositeSpec) -> Callable:
    """m o h^{-1} o F, the self-map fed to the Rouche solver"""
    aut = DiscAutomorphism.from_jet(spec.h0, spec.h_prime0)

    def mapped(z):
        return mobius(spec.gamma, spec.tau, aut.inverse(composite_base_map(z)))

    return mapped


def evaluate_left_inverse(spec: LeftInverseSpec, x, tol_fix: Optional[float] = None):
    x = as_point3(x)
    if isinstance(spec, DirectSpec):
        return (np.conj(spec.phase) * x[..., spec.coordinate])[()]
    if isinstance(spec, PsiFamilySpec):
        xs = x[..., [1, 0, 2]] if spec.swap else x
        return (np.conj(spec.rotation) * np.asarray(psi_z(spec.a, xs)))[()]
    if isinstance(spec, CompositeSpec):
        mapped = composite_scalar_map(spec)
        flat = x.reshape(-1, 3)
        roots = np.array(
            [rouche_fixed_point(mapped, spec.weights, point, tol_fix).lambda_star for point in flat],
            dtype=complex,
        )
        return mobius_inverse(spec.gamma, spec.tau, roots.reshape(x.shape[:-1]))
    raise ParameterError(f"Unknown left inverse spec {type(spec).__name__}")


@dataclass(frozen=True, eq=False)
class LeftInverse:
    spec: LeftInverseSpec
    tol_fix: Optional[float] = field(default=None, repr=False)

    def __call__(self, x):
        return evaluate_left_inverse(self.spec, x, self.tol_fix)


def _unimodular_linear(f: DiscMap) -> Optional[complex]:
    """Phase p when the scalar disc is p lam with |p| = 1"""
    num = P.polytrim(f.numerators[0], 1e-15)
    den = P.polytrim(f.denominator, 1e-15)
    if den.size != 1 or num.size != 2 or abs(num[0]) > 1e-15:
        return None
    p = num[1] / den[0]
    return complex(p) if abs(abs(p) - 1) <= 1e-12 else None


def build_left_inverse(spec: GeodesicSpec) -> LeftInverseSpec:
    if isinstance(spec, TrivialSpec):
        return DirectSpec(coordinate=2, phase=np.exp(1j * spec.theta))
    if isinstance(spec, InsideTSpec):
        for coordinate, f in ((0, spec.f1), (1, spec.f2)):
            phase = _unimodular_linear(f)
            if phase is not None:
                return DirectSpec(coordinate=coordinate, phase=phase)
        raise ConstructionError("InsideT disc has no coordinate of the form e^{it} lam")
    if isinstance(spec, TriangularSpec):
        return left_inverse_triangular(spec)
    if isinstance(spec, NonTriangularSpec):
        return left_inverse_nontriangular(spec)
    raise ParameterError(f"Unknown geodesic spec type {type(spec).__name__}")


def verify_left_inverse(f: Callable, L: Callable, n_samples: int = 64, radius: float = 0.95) -> float:
    """max |L(f(lam)) - lam| over low-discrepancy interior samples"""
    lam = halton_disc_samples(n_samples, radius)
    values = np.asarray(L(np.asarray(f(lam))), dtype=complex)
    return float(np.max(np.abs(values - lam)))
