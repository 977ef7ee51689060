"""Automorphisms of the 2x2 Cartan domains and of the tetrablock, plus the
scalar families Psi_z and F_a."""
from dataclasses import dataclass
from typing import Optional, Union
import logging

import numpy as np
from numpy.polynomial import polynomial as P

from app.config import TOLERANCES
from app.exceptions import ContradictionError, DomainError, ParameterError, SingularityError
from app.services.domains import as_point3, g2_margin, project_pi, symmetric_preimages, tetrablock_margin
from app.services.scalar_kernel import ArrayLike, DiscMap, adjoint, as_mat2, op_norm, transpose

logger = logging.getLogger(__name__)

BRANCH_AGREEMENT = 1e-10
BOUNDARY_SLACK = 1e-9


def _hermitian_power(h: np.ndarray, power: float) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * w[..., None, :] ** power) @ adjoint(v)


def _check_norm(x: np.ndarray, name: str, strict: bool) -> None:
    norms = np.asarray(op_norm(x))
    limit_ok = norms < 1 if strict else norms <= 1 + BOUNDARY_SLACK
    if not np.all(limit_ok):
        raise ParameterError(f"{name} must have operator norm {'<' if strict else '<='} 1, got {norms.max():.15g}")


def phi_a(a: ArrayLike, x: ArrayLike, strict: bool = True) -> np.ndarray:
    """(1 - a a*)^(-1/2) (x - a) (1 - a* x)^(-1) (1 - a* a)^(1/2)"""
    a = as_mat2(a)
    x = as_mat2(x)
    _check_norm(a, "a", strict=True)
    _check_norm(x, "x", strict=strict)
    eye = np.eye(2, dtype=complex)
    left = _hermitian_power(eye - a @ adjoint(a), -0.5)
    right = _hermitian_power(eye - adjoint(a) @ a, 0.5)
    inner = np.linalg.inv(eye - adjoint(a) @ x)
    return left @ (x - a) @ inner @ right


def phi_c_lower(c: complex, x: ArrayLike, strict: bool = True) -> np.ndarray:
    """phi_a for a = [[0, 0], [c, 0]] written entrywise"""
    c = complex(c)
    if abs(c) >= 1:
        raise ParameterError(f"|c| must be < 1, got {abs(c)}")
    x = as_mat2(x)
    _check_norm(x, "x", strict=strict)
    x11, x12, x21, x22 = x[..., 0, 0], x[..., 0, 1], x[..., 1, 0], x[..., 1, 1]
    delta = 1 - np.conj(c) * x21
    if np.any(np.abs(delta) < TOLERANCES["tol_singular"]):
        raise SingularityError("1 - conj(c) x21 vanishes")
    s = np.sqrt(1 - abs(c) ** 2)
    det = x11 * x22 - x12 * x21
    out = np.empty(x.shape, dtype=complex)
    out[..., 0, 0] = s * x11 / delta
    out[..., 0, 1] = (x12 + np.conj(c) * det) / delta
    out[..., 1, 0] = (x21 - c) / delta
    out[..., 1, 1] = s * x22 / delta
    return out


@dataclass(frozen=True)
class TetraAutParams:
    """Parameters of the automorphism pi(x) -> pi(U phi_a(x) U^t) with a = diag(a1, a2)
    and U = diag(e^{i theta}, e^{i eta}), or the anti-diagonal U when swap is set."""

    a1: complex = 0j
    a2: complex = 0j
    theta: float = 0.0
    eta: float = 0.0
    swap: bool = False

    def __post_init__(self):
        object.__setattr__(self, "a1", complex(self.a1))
        object.__setattr__(self, "a2", complex(self.a2))
        if abs(self.a1) >= 1 or abs(self.a2) >= 1:
            raise ParameterError(f"Need |a1|, |a2| < 1, got {abs(self.a1)}, {abs(self.a2)}")

    @classmethod
    def identity(cls) -> "TetraAutParams":
        return cls()

    @classmethod
    def random(cls, rng: np.random.Generator, max_modulus: float = 0.8) -> "TetraAutParams":
        r = max_modulus * np.sqrt(rng.random(2))
        phases = np.exp(2j * np.pi * rng.random(2))
        theta, eta = 2 * np.pi * rng.random(2)
        return cls(r[0] * phases[0], r[1] * phases[1], float(theta), float(eta), bool(rng.random() < 0.5))

    @property
    def a_matrix(self) -> np.ndarray:
        return np.diag([self.a1, self.a2]).astype(complex)

    @property
    def unitary(self) -> np.ndarray:
        e1, e2 = np.exp(1j * self.theta), np.exp(1j * self.eta)
        if self.swap:
            return np.array([[0, e1], [e2, 0]], dtype=complex)
        return np.diag([e1, e2]).astype(complex)

    def delta(self, x: np.ndarray) -> np.ndarray:
        """1 - conj(a1) x1 - conj(a2) x2 + conj(a1 a2) x3"""
        b1, b2 = np.conj(self.a1), np.conj(self.a2)
        return 1 - b1 * x[..., 0] - b2 * x[..., 1] + b1 * b2 * x[..., 2]


def aut_cartan(p: TetraAutParams, x: ArrayLike, strict: bool = True) -> np.ndarray:
    """U phi_a(x) U^t on the whole matrix ball"""
    u = p.unitary
    return u @ phi_a(p.a_matrix, x, strict=strict) @ transpose(u)


def _check_tetrablock(z: np.ndarray, strict: bool) -> None:
    margins = np.asarray(tetrablock_margin(z))
    if strict and np.any(margins <= 0):
        raise DomainError(f"Point outside the tetrablock (margin {margins.min():.3e})")
    if not strict and np.any(margins < -TOLERANCES["tol_boundary"]):
        raise DomainError(f"Point outside the closed tetrablock (margin {margins.min():.3e})")


def aut_tetrablock(p: TetraAutParams, z: ArrayLike, strict: bool = True) -> np.ndarray:
    """Lift through a symmetric preimage, apply U phi_a U^t, project back"""
    z = as_point3(z)
    _check_tetrablock(z, strict)
    plus, minus = symmetric_preimages(z)
    image = project_pi(aut_cartan(p, plus, strict=False))
    other = project_pi(aut_cartan(p, minus, strict=False))
    disagreement = float(np.max(np.abs(image - other))) if image.size else 0.0
    if disagreement > BRANCH_AGREEMENT:
        raise ContradictionError(f"Preimage branches disagree by {disagreement:.3e}")
    return image


def aut_tetrablock_inverse(p: TetraAutParams, z: ArrayLike, strict: bool = True) -> np.ndarray:
    """Inverse automorphism y -> pi(phi_{-a}(U* y conj(U)))"""
    z = as_point3(z)
    _check_tetrablock(z, strict)
    plus, _ = symmetric_preimages(z)
    u = p.unitary
    pulled = adjoint(u) @ plus @ np.conj(u)
    return project_pi(phi_a(-p.a_matrix, pulled, strict=False))


def aut_tetrablock_closed_form(p: TetraAutParams, z: ArrayLike) -> np.ndarray:
    z = as_point3(z)
    a1, a2 = p.a1, p.a2
    delta = p.delta(z)
    if np.any(np.abs(delta) < TOLERANCES["tol_singular"]):
        raise SingularityError("Automorphism denominator vanishes")
    z1, z2, z3 = z[..., 0], z[..., 1], z[..., 2]
    y11 = (z1 - a1 + a1 * np.conj(a2) * z2 - np.conj(a2) * z3) / delta
    y22 = (z2 - a2 + np.conj(a1) * a2 * z1 - np.conj(a1) * z3) / delta
    det = (z3 - a2 * z1 - a1 * z2 + a1 * a2) / delta
    if p.swap:
        y11, y22 = y22, y11
    return np.stack(
        [np.exp(2j * p.theta) * y11, np.exp(2j * p.eta) * y22, np.exp(2j * (p.theta + p.eta)) * det],
        axis=-1,
    )


def aut_disc(p: TetraAutParams, f: DiscMap) -> DiscMap:
    """The rational disc psi o f for a polynomial-over-polynomial disc f"""
    if f.dimension != 3:
        raise ParameterError("aut_disc needs a disc with three coordinates")
    n1, n2, n3 = f.numerators
    den = f.denominator
    a1, a2 = p.a1, p.a2
    b1, b2 = np.conj(a1), np.conj(a2)

    def combo(*terms):
        out = np.zeros(1, dtype=complex)
        for coef, poly in terms:
            out = P.polyadd(out, coef * poly)
        return out

    y11 = combo((1, n1), (-a1, den), (a1 * b2, n2), (-b2, n3))
    y22 = combo((1, n2), (-a2, den), (b1 * a2, n1), (-b1, n3))
    det = combo((1, n3), (-a2, n1), (-a1, n2), (a1 * a2, den))
    if p.swap:
        y11, y22 = y22, y11
    new_den = combo((1, den), (-b1, n1), (-b2, n2), (b1 * b2, n3))
    numerators = (
        np.exp(2j * p.theta) * y11,
        np.exp(2j * p.eta) * y22,
        np.exp(2j * (p.theta + p.eta)) * det,
    )
    return DiscMap(numerators, new_den)


def nu_factor(p: TetraAutParams, x: ArrayLike):
    """Factor k with psi1 psi2 - psi3 = k (x1 x2 - x3)"""
    x = as_point3(x)
    _check_tetrablock(x, strict=True)
    delta = p.delta(x)
    if np.any(np.abs(delta) < TOLERANCES["tol_singular"]):
        raise ContradictionError("1 - conj(a1) x1 - conj(a2) x2 + conj(a1 a2) x3 vanished inside the tetrablock")
    factor = (
        np.exp(2j * (p.eta + p.theta)) * (1 - abs(p.a1) ** 2) * (1 - abs(p.a2) ** 2) / delta ** 2
    )
    return factor[()]


def psi_z(zparam: ArrayLike, x: ArrayLike):
    """(z x3 - x1) / (1 - z x2)"""
    zparam = np.asarray(zparam, dtype=complex)
    if np.any(np.abs(zparam) > 1 + 1e-12):
        raise ParameterError("Psi_z needs |z| <= 1")
    x = as_point3(x)
    den = 1 - zparam * x[..., 1]
    if np.any(np.abs(den) < TOLERANCES["tol_singular"]):
        if np.all(np.asarray(tetrablock_margin(x)) > 0):
            raise ContradictionError("Psi_z denominator vanished on the tetrablock")
        raise SingularityError("Psi_z denominator vanishes")
    return ((zparam * x[..., 2] - x[..., 0]) / den)[()]


def F_a(a: complex, s: ArrayLike, p: ArrayLike):
    """(2 a p - s) / (2 - a s)"""
    a = complex(a)
    if abs(a) > 1 + 1e-12:
        raise ParameterError("F_a needs |a| <= 1")
    s = np.asarray(s, dtype=complex)
    p = np.asarray(p, dtype=complex)
    den = 2 - a * s
    if np.any(np.abs(den) < TOLERANCES["tol_singular"]):
        raise SingularityError("F_a denominator vanishes")
    return ((2 * a * p - s) / den)[()]


def embed_G2(s: ArrayLike, p: ArrayLike) -> np.ndarray:
    """(s, p) -> (s/2, s/2, p)"""
    s, p = np.broadcast_arrays(np.asarray(s, dtype=complex), np.asarray(p, dtype=complex))
    if np.any(np.asarray(g2_margin(s, p)) <= 0):
        raise DomainError("Point is not in the symmetrized bidisc")
    image = np.stack([s / 2, s / 2, p], axis=-1)
    if np.any(np.asarray(tetrablock_margin(image)) <= 0):
        raise ContradictionError("Embedded point left the tetrablock")
    return image
