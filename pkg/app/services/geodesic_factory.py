"""Extremal discs of the tetrablock: parameter records, evaluators, exact
rational representatives and the tests that decide whether a non-triangular
disc avoids the triangular set."""
from dataclasses import dataclass
from typing import ClassVar, Tuple, Union
import logging

import numpy as np
from numpy.polynomial import polynomial as P

from app.config import TOLERANCES
from app.exceptions import ContradictionError, DegenerateInputError, DomainError, ParameterError, SingularityError
from app.services.domains import project_pi
from app.services.sampling import random_disc_points, random_unitary
from app.services.scalar_kernel import ArrayLike, DiscMap, as_mat2, is_unitary, vanishing_order
from app.services.transforms import phi_a, phi_c_lower

logger = logging.getLogger(__name__)

ROW_TOL = 1e-12
INSIDE_T = "inside_T"


@dataclass(frozen=True)
class TrivialSpec:
    """f(lam) = (0, 0, e^{i theta} lam)"""

    theta: float = 0.0
    kind: ClassVar[str] = "trivial"


@dataclass(frozen=True, eq=False)
class InsideTSpec:
    """f = (f1, f2, f1 f2)"""

    f1: DiscMap
    f2: DiscMap
    kind: ClassVar[str] = "inside_t"

    def __post_init__(self):
        if self.f1.dimension != 1 or self.f2.dimension != 1:
            raise ParameterError("InsideT discs need scalar f1 and f2")


@dataclass(frozen=True, eq=False)
class TriangularSpec:
    """f = pi(phi_c(U diag(lam, Z(lam)) V)) with Z(lam) = lam or mu lam"""

    U: np.ndarray
    V: np.ndarray
    c: complex
    mu: complex = 1.0
    z_is_identity: bool = True
    kind: ClassVar[str] = "triangular"

    def __post_init__(self):
        u, v = as_mat2(self.U), as_mat2(self.V)
        if u.shape != (2, 2) or v.shape != (2, 2):
            raise ParameterError("U and V must be single 2x2 matrices")
        if not (is_unitary(u) and is_unitary(v)):
            raise ParameterError("U and V must be unitary")
        object.__setattr__(self, "U", u)
        object.__setattr__(self, "V", v)
        object.__setattr__(self, "c", complex(self.c))
        if abs(self.c) >= 1:
            raise ParameterError(f"|c| must be < 1, got {abs(self.c)}")
        if self.z_is_identity:
            object.__setattr__(self, "mu", 1 + 0j)
        else:
            object.__setattr__(self, "mu", complex(self.mu))
            if abs(self.mu) >= 1:
                raise ParameterError(f"|mu| must be < 1 when Z is not the identity, got {abs(self.mu)}")

    @property
    def K(self) -> np.ndarray:
        """x(lam) = lam K"""
        return self.U @ np.diag([1, self.mu]).astype(complex) @ self.V


@dataclass(frozen=True)
class NonTriangularSpec:
    """Rows (a, b), (c, d) of a unitary, Z(lam) = mu lam, beta in (0, 1)"""

    a: complex
    b: complex
    c: complex
    d: complex
    mu: complex
    beta: float
    kind: ClassVar[str] = "nontriangular"

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "mu"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        object.__setattr__(self, "beta", float(self.beta))
        if not 0 < self.beta < 1:
            raise ParameterError(f"beta must lie in (0, 1), got {self.beta}")
        if abs(self.mu) > 1:
            raise ParameterError(f"|mu| must be <= 1, got {abs(self.mu)}")
        a, b, c, d = self.a, self.b, self.c, self.d
        defects = (
            abs(abs(a) ** 2 + abs(b) ** 2 - 1),
            abs(abs(c) ** 2 + abs(d) ** 2 - 1),
            abs(a * np.conj(c) + b * np.conj(d)),
        )
        if max(defects) > ROW_TOL:
            raise ParameterError(f"(a, b), (c, d) are not orthonormal rows (defect {max(defects):.3e})")

    @property
    def unitary(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)


GeodesicSpec = Union[TrivialSpec, InsideTSpec, TriangularSpec, NonTriangularSpec]


@dataclass(frozen=True)
class ABCDelta:
    """Coefficient vectors of A, B, C and Delta for a non-triangular spec"""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Delta: np.ndarray

    def __call__(self, lam: ArrayLike) -> Tuple[np.ndarray, ...]:
        lam = np.asarray(lam, dtype=complex)
        return tuple(P.polyval(lam, c) for c in (self.A, self.B, self.C, self.Delta))


def abc_delta(s: NonTriangularSpec) -> ABCDelta:
    a, b, c, d, mu, beta = s.a, s.b, s.c, s.d, s.mu, s.beta
    A = np.array([0, a * a + b * b * mu], dtype=complex)
    B = np.array([0, a * c + b * d * mu], dtype=complex)
    C = np.array([0, c * c + d * d * mu], dtype=complex)
    Delta = P.polysub(P.polypow(P.polyadd([1.0], beta * B), 2), beta ** 2 * P.polymul(A, C))
    return ABCDelta(A, B, C, Delta)


def _check_open_disc(lam: np.ndarray) -> None:
    if np.any(np.abs(lam) >= 1):
        raise DomainError("Geodesics are evaluated on the open unit disc")


def cartan_geodesic(
    U: ArrayLike, V: ArrayLike, lam: ArrayLike, z_is_identity: bool = True, mu: complex = 1.0
) -> np.ndarray:
    """U diag(lam, Z(lam)) V"""
    u, v = as_mat2(U), as_mat2(V)
    if not (is_unitary(u) and is_unitary(v)):
        raise ParameterError("U and V must be unitary")
    lam = np.asarray(lam, dtype=complex)
    z = lam if z_is_identity else complex(mu) * lam
    diag = np.zeros(lam.shape + (2, 2), dtype=complex)
    diag[..., 0, 0] = lam
    diag[..., 1, 1] = z
    return u @ diag @ v


def tetra_extremal_triangular(s: TriangularSpec, lam: ArrayLike) -> np.ndarray:
    lam = np.asarray(lam, dtype=complex)
    _check_open_disc(lam)
    x = cartan_geodesic(s.U, s.V, lam, s.z_is_identity, s.mu)
    return project_pi(phi_c_lower(s.c, x))


def tetra_extremal_nontriangular(s: NonTriangularSpec, lam: ArrayLike) -> np.ndarray:
    lam = np.asarray(lam, dtype=complex)
    _check_open_disc(lam)
    A, B, C, Delta = abc_delta(s)(lam)
    if np.any(np.abs(Delta) < TOLERANCES["tol_singular"]):
        raise SingularityError("Delta vanishes")
    beta2 = s.beta ** 2
    return np.stack(
        [A * (1 - beta2) / Delta, C * (1 - beta2) / Delta, (A * C - (B + s.beta) ** 2) / Delta],
        axis=-1,
    )


def nontriangular_lift(s: NonTriangularSpec, lam: ArrayLike) -> np.ndarray:
    """Symmetric matrix disc Phi_{-b}(U diag(lam, mu lam) U^t) over the non-triangular extremal"""
    lam = np.asarray(lam, dtype=complex)
    _check_open_disc(lam)
    u = s.unitary
    diag = np.zeros(lam.shape + (2, 2), dtype=complex)
    diag[..., 0, 0] = lam
    diag[..., 1, 1] = s.mu * lam
    x = u @ diag @ u.T
    b = np.array([[0, s.beta], [s.beta, 0]], dtype=complex)
    return phi_a(-b, x)


def evaluate_geodesic(spec: GeodesicSpec, lam: ArrayLike) -> np.ndarray:
    lam = np.asarray(lam, dtype=complex)
    if isinstance(spec, TrivialSpec):
        _check_open_disc(lam)
        zero = np.zeros(lam.shape, dtype=complex)
        return np.stack([zero, zero, np.exp(1j * spec.theta) * lam], axis=-1)
    if isinstance(spec, InsideTSpec):
        _check_open_disc(lam)
        f1, f2 = spec.f1(lam), spec.f2(lam)
        return np.stack(np.broadcast_arrays(f1, f2, f1 * f2), axis=-1)
    if isinstance(spec, TriangularSpec):
        return tetra_extremal_triangular(spec, lam)
    if isinstance(spec, NonTriangularSpec):
        return tetra_extremal_nontriangular(spec, lam)
    raise ParameterError(f"Unknown geodesic spec type {type(spec).__name__}")


def geodesic_disc(spec: GeodesicSpec) -> DiscMap:
    """Exact rational representative of the disc"""
    if isinstance(spec, TrivialSpec):
        return DiscMap(([0], [0], [0, np.exp(1j * spec.theta)]), certify=False)
    if isinstance(spec, InsideTSpec):
        (n1,), d1 = spec.f1.numerators, spec.f1.denominator
        (n2,), d2 = spec.f2.numerators, spec.f2.denominator
        return DiscMap((P.polymul(n1, d2), P.polymul(n2, d1), P.polymul(n1, n2)), P.polymul(d1, d2))
    if isinstance(spec, TriangularSpec):
        k = spec.K
        s = np.sqrt(1 - abs(spec.c) ** 2)
        det_k = k[0, 0] * k[1, 1] - k[0, 1] * k[1, 0]
        numerators = ([0, s * k[0, 0]], [0, s * k[1, 1]], [0, spec.c * k[0, 1], det_k])
        return DiscMap(numerators, [1, -np.conj(spec.c) * k[1, 0]])
    if isinstance(spec, NonTriangularSpec):
        abc = abc_delta(spec)
        beta2 = spec.beta ** 2
        f3 = P.polysub(P.polymul(abc.A, abc.C), P.polypow(P.polyadd(abc.B, [spec.beta]), 2))
        return DiscMap(((1 - beta2) * abc.A, (1 - beta2) * abc.C, f3), abc.Delta)
    raise ParameterError(f"Unknown geodesic spec type {type(spec).__name__}")


def t_defect(f: DiscMap) -> DiscMap:
    """The scalar disc f1 f2 - f3"""
    if f.dimension != 3:
        raise ParameterError("Need a disc with three coordinates")
    n1, n2, n3 = f.numerators
    den = f.denominator
    return DiscMap((P.polysub(P.polymul(n1, n2), P.polymul(n3, den)),), P.polymul(den, den), certify=False)


def t_crossing_quadratic(s: NonTriangularSpec) -> Tuple[complex, complex, complex]:
    """(a0, a1, a2) of beta mu D^2 lam^2 - (1 + beta^2)(ac + mu bd) lam - beta, D = ad - bc"""
    D = s.a * s.d - s.b * s.c
    a0 = s.beta * s.mu * D ** 2
    a1 = -(1 + s.beta ** 2) * (s.a * s.c + s.mu * s.b * s.d)
    a2 = -s.beta + 0j
    return complex(a0), complex(a1), complex(a2)


def cohn_both_roots_outside(a0: complex, a1: complex, a2: complex, slack: float = 1e-10) -> bool:
    """Both roots of a0 lam^2 + a1 lam + a2 lie in |lam| >= 1.

    A vanishing a0 drops the degree and the lost root counts as outside.
    When |a0| and |a2| agree the coefficient test cannot separate the roots
    (they pair as r, 1/conj(r)), so the root moduli decide.
    """
    coeffs = np.array([a0, a1, a2], dtype=complex)
    scale = float(np.max(np.abs(coeffs)))
    if scale == 0:
        raise DegenerateInputError("All quadratic coefficients vanish")
    a0, a1, a2 = coeffs / scale
    if a0 == 0:
        if a1 == 0:
            return True
        return bool(abs(a2) >= abs(a1))
    gap = abs(a0) ** 2 - abs(a2) ** 2
    if abs(gap) <= slack:
        roots = np.roots([a0, a1, a2])
        return bool(np.all(np.abs(roots) >= 1 - slack))
    if abs(a2) < abs(a0):
        return False
    return bool(abs(np.conj(a0) * a1 - a2 * np.conj(a1)) <= abs(gap) + slack)


@dataclass(frozen=True)
class AvoidanceVerdict:
    cohn: bool
    closed_form: bool
    closed_form_excess: float
    quadratic: Tuple[complex, complex, complex]


def avoidance_verdicts(s: NonTriangularSpec) -> AvoidanceVerdict:
    quadratic = t_crossing_quadratic(s)
    excess = abs(s.c) * abs(s.d) * (1 + s.beta ** 2) - s.beta
    return AvoidanceVerdict(
        cohn=cohn_both_roots_outside(*quadratic),
        closed_form=excess <= 1e-10,
        closed_form_excess=float(excess),
        quadratic=quadratic,
    )


def avoids_T(s: NonTriangularSpec) -> bool:
    verdict = avoidance_verdicts(s)
    # the coefficient test degenerates by the factor 1 - |mu|^2
    separation = (1 - abs(s.mu) ** 2) * abs(verdict.closed_form_excess)
    if verdict.cohn != verdict.closed_form and separation > 1e-8:
        raise ContradictionError(
            f"Cohn verdict {verdict.cohn} disagrees with |c||d|(1+beta^2) <= beta "
            f"(excess {verdict.closed_form_excess:.3e})"
        )
    return verdict.cohn


def nu_of_disc(f: DiscMap, lam0: complex = 0.0) -> Union[int, str]:
    """Vanishing order of f1 f2 - f3 at lam0, or INSIDE_T when the disc lies in T"""
    defect = t_defect(f)
    n1, n2, n3 = f.numerators
    scale = max(1.0, float(np.max(np.abs(P.polymul(n1, n2)))), float(np.max(np.abs(P.polymul(n3, f.denominator)))))
    if np.max(np.abs(defect.numerators[0])) <= TOLERANCES["tol_degenerate"] * scale:
        return INSIDE_T
    return vanishing_order(defect, lam0)


def _rotation_matrix(c_abs: float) -> np.ndarray:
    s = np.sqrt(1 - c_abs ** 2)
    return np.array([[s, c_abs], [-c_abs, s]], dtype=complex)


def _phases(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(n))


def random_trivial_spec(rng: np.random.Generator) -> TrivialSpec:
    return TrivialSpec(theta=float(2 * np.pi * rng.random()))


def random_inside_t_spec(rng: np.random.Generator) -> InsideTSpec:
    """f1 = e^{i t} lam, f2 a polynomial with coefficient moduli summing below 0.9"""
    f1 = DiscMap.scalar([0, _phases(rng, 1)[0]])
    raw = (rng.standard_normal(3) + 1j * rng.standard_normal(3))
    f2 = DiscMap.scalar(0.9 * rng.random() * raw / np.sum(np.abs(raw)))
    return InsideTSpec(f1, f2)


def random_triangular_spec(rng: np.random.Generator, family: str = "identity", c_max: float = 0.9) -> TriangularSpec:
    """Extremal triangular discs.

    identity: Z = id and UV = D1 R D2 with R = [[s, |c|], [-|c|, s]], s = sqrt(1 - |c|^2).
    contracted: U = D1, V = R D2 and Z = mu lam with |mu| < 1.
    D1, D2 are random diagonal unitaries.
    """
    c = c_max * np.sqrt(rng.random()) * _phases(rng, 1)[0]
    r = _rotation_matrix(abs(c))
    d1 = np.diag(_phases(rng, 2))
    d2 = np.diag(_phases(rng, 2))
    if family == "identity":
        u = random_unitary(rng)
        w = d1 @ r @ d2
        return TriangularSpec(u, u.conj().T @ w, c, 1.0, True)
    if family == "contracted":
        mu = complex(random_disc_points(rng, 1, 0.9)[0])
        return TriangularSpec(d1, r @ d2, c, mu, False)
    raise ParameterError(f"Unknown triangular family {family!r}")


def random_nontriangular_spec(rng: np.random.Generator, feasible: bool = True) -> NonTriangularSpec:
    """Non-triangular spec; feasible ones satisfy |c|^2 > 1/(1+beta^2), which forces avoidance of T"""
    beta = float(rng.uniform(0.2, 0.8))
    mu = complex(random_disc_points(rng, 1, 0.9)[0])
    if feasible:
        lo = 1 / (1 + beta ** 2)
        c2 = lo + (1 - lo) * rng.uniform(0.1, 0.9)
        chi, psi, phi = 2 * np.pi * rng.random(3)
        c = np.sqrt(c2) * np.exp(1j * chi)
        d = np.sqrt(1 - c2) * np.exp(1j * psi)
        a = np.exp(1j * phi) * np.conj(d)
        b = -np.exp(1j * phi) * np.conj(c)
    else:
        u = random_unitary(rng)
        a, b, c, d = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    return NonTriangularSpec(a, b, c, d, mu, beta)
