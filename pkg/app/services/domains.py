"""Membership predicates for the tetrablock, the symmetrized bidisc and the
2x2 Cartan domains, together with the projection pi and the gauge rho."""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union
import logging

import numpy as np

from app.config import TOLERANCES
from app.exceptions import DomainError, ParameterError
from app.services.scalar_kernel import ArrayLike, as_mat2, op_norm

logger = logging.getLogger(__name__)

BALANCED_WEIGHTS = {(1, 0, 1), (0, 1, 1), (1, 1, 2)}


@dataclass(frozen=True)
class MembershipReport:
    inside: bool
    margin: float

    @property
    def boundary(self) -> bool:
        return abs(self.margin) <= TOLERANCES["tol_boundary"]

    @classmethod
    def from_margin(cls, margin: float) -> "MembershipReport":
        margin = float(margin)
        return cls(inside=margin > 0, margin=margin)


def as_point3(z: ArrayLike) -> np.ndarray:
    arr = np.asarray(z, dtype=complex)
    if arr.shape[-1:] != (3,):
        raise ParameterError(f"Expected a (..., 3) array of points, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("Point coordinates must be finite")
    return arr


def _scalar(value):
    return float(value) if np.ndim(value) == 0 else value


def tetrablock_margin(z: ArrayLike):
    """1 - (|z2 - conj(z1) z3| + |z1 z2 - z3| + |z1|^2)"""
    z = as_point3(z)
    z1, z2, z3 = z[..., 0], z[..., 1], z[..., 2]
    value = np.abs(z2 - np.conj(z1) * z3) + np.abs(z1 * z2 - z3) + np.abs(z1) ** 2
    return _scalar(1 - value)


def tetrablock_alt_margin(z: ArrayLike):
    """1 - (|z1 - conj(z2) z3| + |z2 - conj(z1) z3| + |z3|^2)"""
    z = as_point3(z)
    z1, z2, z3 = z[..., 0], z[..., 1], z[..., 2]
    value = np.abs(z1 - np.conj(z2) * z3) + np.abs(z2 - np.conj(z1) * z3) + np.abs(z3) ** 2
    return _scalar(1 - value)


def g2_margin(s: ArrayLike, p: ArrayLike):
    s = np.asarray(s, dtype=complex)
    p = np.asarray(p, dtype=complex)
    return _scalar(1 - (np.abs(s - np.conj(s) * p) + np.abs(p) ** 2))


def in_tetrablock(z: ArrayLike) -> MembershipReport:
    return MembershipReport.from_margin(tetrablock_margin(np.asarray(z, dtype=complex).reshape(3)))


def in_tetrablock_alt(z: ArrayLike) -> MembershipReport:
    return MembershipReport.from_margin(tetrablock_alt_margin(np.asarray(z, dtype=complex).reshape(3)))


def in_symmetrized_bidisc(s: complex, p: complex) -> MembershipReport:
    return MembershipReport.from_margin(g2_margin(complex(s), complex(p)))


def cartan_margin(x: ArrayLike, kind: str = "I", tol_sym: Optional[float] = None):
    """1 - ||x|| for kind I; kind II also needs symmetry and reports -|x12 - x21| otherwise"""
    tol_sym = TOLERANCES["tol_sym"] if tol_sym is None else tol_sym
    m = as_mat2(x)
    margin = 1 - np.asarray(op_norm(m))
    if kind == "II":
        skew = np.abs(m[..., 0, 1] - m[..., 1, 0])
        margin = np.where(skew <= tol_sym, margin, -skew)
    elif kind != "I":
        raise ParameterError(f"Cartan kind must be 'I' or 'II', got {kind!r}")
    return _scalar(margin)


def in_cartan(x: ArrayLike, kind: str = "I") -> MembershipReport:
    return MembershipReport.from_margin(cartan_margin(np.asarray(x, dtype=complex).reshape(2, 2), kind))


def project_pi(x: ArrayLike) -> np.ndarray:
    """(x11, x22, det x)"""
    m = as_mat2(x)
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return np.stack([m[..., 0, 0], m[..., 1, 1], det], axis=-1)


def symmetric_preimages(z: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """The two symmetric matrices (z1, w; w, z2) with w**2 = z1 z2 - z3"""
    z = as_point3(z)
    w = np.sqrt(z[..., 0] * z[..., 1] - z[..., 2])
    plus = np.empty(z.shape[:-1] + (2, 2), dtype=complex)
    plus[..., 0, 0] = z[..., 0]
    plus[..., 1, 1] = z[..., 1]
    plus[..., 0, 1] = w
    plus[..., 1, 0] = w
    minus = plus.copy()
    minus[..., 0, 1] = -w
    minus[..., 1, 0] = -w
    return plus, minus


def rho(z: ArrayLike):
    """Largest operator norm among the symmetric preimages of z"""
    plus, minus = symmetric_preimages(z)
    return _scalar(np.maximum(op_norm(plus), op_norm(minus)))


def in_triangular_set(z: ArrayLike, tol: float = 1e-10):
    z = as_point3(z)
    result = np.abs(z[..., 0] * z[..., 1] - z[..., 2]) <= tol
    return bool(result) if np.ndim(result) == 0 else result


def _check_weights(m: Sequence[int], n: int) -> Tuple[int, ...]:
    weights = tuple(int(w) for w in m)
    if len(weights) != n:
        raise ParameterError(f"Need {n} weights, got {len(weights)}")
    if any(w < 0 or w != wf for w, wf in zip(weights, m)):
        raise ParameterError("Weights must be non-negative integers")
    if all(w == 0 for w in weights):
        raise ParameterError("Weights must not all be zero")
    return weights


def scale_balanced(z: ArrayLike, lam: ArrayLike, m: Sequence[int]) -> np.ndarray:
    """Coordinatewise lam**m_j * z_j; broadcasts lam against the leading axes of z"""
    z = np.asarray(z, dtype=complex)
    weights = np.array(_check_weights(m, z.shape[-1]))
    lam = np.asarray(lam, dtype=complex)
    return lam[..., None] ** weights * z


def phi_lambda(z: ArrayLike, lam: ArrayLike) -> np.ndarray:
    return scale_balanced(z, lam, (1, 1, 2))


def midpoint_gauge_excess(w: ArrayLike, z: ArrayLike):
    """rho((w + z) / 2) - max(rho(w), rho(z)); positive means the midpoint gauge grows"""
    w = as_point3(w)
    z = as_point3(z)
    return _scalar(np.asarray(rho((w + z) / 2)) - np.maximum(rho(w), rho(z)))


GAUGE_TEST_PAIRS = (
    ((1, 1, 1), (-1, 1, -1)),
    ((1, 1, 1), (1, -1, -1)),
    ((1, 1, 1), (-1, -1, 1)),
)


@dataclass(frozen=True)
class BoundaryDiscReport:
    samples: int
    touches_T: bool
    contained_in_T: bool

    @property
    def consistent(self) -> bool:
        return (not self.touches_T) or self.contained_in_T


def boundary_disc_hits_T(values: ArrayLike, tol: float = 1e-9) -> BoundaryDiscReport:
    """Given samples of a disc lying in the boundary of the tetrablock, report
    whether it meets the triangular set and whether it then stays inside it."""
    values = as_point3(values).reshape(-1, 3)
    margins = np.asarray(tetrablock_margin(values))
    if np.any(np.abs(margins) > max(tol, TOLERANCES["tol_boundary"])):
        raise DomainError(f"Samples are not on the boundary (max |margin| {np.abs(margins).max():.3e})")
    hits = np.asarray(in_triangular_set(values, tol))
    report = BoundaryDiscReport(samples=len(values), touches_T=bool(hits.any()), contained_in_T=bool(hits.all()))
    if not report.consistent:
        logger.error(f"Boundary disc touches T at {int(hits.sum())} of {len(values)} samples without staying in T")
    return report


MEMBERSHIP_DOMAINS = ("tetrablock", "tetrablock_alt", "g2", "cartan_I", "cartan_II")


def check_membership(domain: str, values: ArrayLike) -> MembershipReport:
    """Dispatch on a domain name: 3 coordinates, (s, p) for g2, or 4 row-major entries for Cartan domains"""
    values = np.asarray(values, dtype=complex).ravel()
    expected = {"tetrablock": 3, "tetrablock_alt": 3, "g2": 2, "cartan_I": 4, "cartan_II": 4}
    if domain not in expected:
        raise ParameterError(f"Unknown domain {domain!r}; choose from {', '.join(MEMBERSHIP_DOMAINS)}")
    if values.size != expected[domain]:
        raise ParameterError(f"Domain {domain} needs {expected[domain]} complex values, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise ParameterError("Point coordinates must be finite")
    if domain == "tetrablock":
        return in_tetrablock(values)
    if domain == "tetrablock_alt":
        return in_tetrablock_alt(values)
    if domain == "g2":
        return in_symmetrized_bidisc(values[0], values[1])
    return in_cartan(values.reshape(2, 2), kind=domain.split("_")[1])
