"""Lifting analytic discs of the tetrablock through pi to symmetric matrix discs."""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple
import logging

import numpy as np

from app.exceptions import (
    CertificationError,
    DegenerateInputError,
    MultiStepError,
    ParameterError,
    PreconditionError,
)
from app.services.domains import in_triangular_set, project_pi
from app.services.geodesic_factory import t_defect
from app.services.scalar_kernel import (
    AnalyticSqrt,
    ArrayLike,
    DiscMap,
    analytic_sqrt,
    as_mat2,
    halton_disc_samples,
    op_norm,
    vanishing_order,
)

logger = logging.getLogger(__name__)

RESIDUAL_LIMIT = 1e-8
NORM_SLACK = 1e-9
CIRCLE_SAMPLES = 64
INTERIOR_RADIUS = 0.999


@dataclass(frozen=True, eq=False)
class SymmetricLift:
    """lam -> [[f1, g], [g, f2]] with g**2 = f1 f2 - f3"""

    f: DiscMap
    root: AnalyticSqrt

    def __call__(self, lam: ArrayLike) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        values = self.f(lam)
        g = np.asarray(self.root(lam))
        out = np.empty(lam.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = values[..., 0]
        out[..., 1, 1] = values[..., 1]
        out[..., 0, 1] = g
        out[..., 1, 0] = g
        return out


@dataclass(frozen=True, eq=False)
class MonomialLift:
    """Row j of the inner lift multiplied by lam**n (first row) or lam**m (second row)"""

    inner: SymmetricLift
    n: int
    m: int

    def __call__(self, lam: ArrayLike) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        g = self.inner(lam)
        g[..., 0, :] *= (lam ** self.n)[..., None]
        g[..., 1, :] *= (lam ** self.m)[..., None]
        return g


@dataclass(frozen=True, eq=False)
class LiftResult:
    G: Any
    kind: str
    branch: int
    projection_residual: float
    max_norm: float
    interior_max_norm: float
    n_samples: int
    orders: Optional[Tuple[int, int]] = field(default=None)

    def certificate(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "branch": self.branch,
            "projection_residual": self.projection_residual,
            "max_norm": self.max_norm,
            "interior_max_norm": self.interior_max_norm,
            "n_samples": self.n_samples,
            "orders": list(self.orders) if self.orders is not None else None,
        }


def _closed_disc_samples(n_samples: int) -> np.ndarray:
    circle = np.exp(2j * np.pi * np.arange(CIRCLE_SAMPLES) / CIRCLE_SAMPLES)
    return np.concatenate([halton_disc_samples(n_samples, radius=1.0), circle])


def _certify(G, f: DiscMap, n_samples: int, check_norm: bool) -> Tuple[float, float, float, int]:
    lam = _closed_disc_samples(n_samples)
    values = G(lam)
    residual = float(np.max(np.abs(project_pi(values) - f(lam))))
    max_norm = float(np.max(op_norm(values)))
    interior = INTERIOR_RADIUS * np.exp(2j * np.pi * np.arange(CIRCLE_SAMPLES) / CIRCLE_SAMPLES)
    interior_norm = float(np.max(op_norm(G(interior))))
    if residual > RESIDUAL_LIMIT:
        raise CertificationError(f"pi o G differs from f by {residual:.3e}")
    if check_norm and max_norm > 1 + NORM_SLACK:
        raise CertificationError(f"Lift leaves the closed matrix ball (norm {max_norm:.12f})")
    return residual, max_norm, interior_norm, len(lam)


def lift_avoiding_T(
    f: DiscMap, branch: int = 1, n_samples: int = 256, check_norm: bool = True
) -> LiftResult:
    """Symmetric lift of a disc whose image misses the triangular set on the closed disc"""
    if f.dimension != 3:
        raise ParameterError("Lifting needs a disc with three coordinates")
    try:
        root = analytic_sqrt(t_defect(f), branch_sign=branch)
    except PreconditionError as e:
        logger.info(f"Square root lift unavailable: {e}")
        raise PreconditionError(f"{e}; use lift_through_T_origin when f meets T at the origin") from e
    G = SymmetricLift(f, root)
    residual, max_norm, interior_norm, count = _certify(G, f, n_samples, check_norm)
    logger.debug(f"Lift certified: residual={residual:.2e}, max_norm={max_norm:.12f}")
    return LiftResult(G, "avoiding_T", branch, residual, max_norm, interior_norm, count)


def detect_orders(f: DiscMap) -> Tuple[int, int]:
    """(n, m) with ord f1 >= n, ord f2 >= m and ord f3 >= n + m at the origin"""
    orders = []
    for j in range(3):
        component = f.component(j)
        orders.append(None if component.is_zero() else vanishing_order(component, 0.0))
    o1, o2, o3 = orders
    if o1 is None and o2 is None and o3 is None:
        raise DegenerateInputError("Disc is identically zero")
    n = o1 if o1 is not None else 0
    if o3 is not None:
        n = min(n, o3)
    if o2 is not None:
        m = o2
    else:
        m = o3 - n if o3 is not None else 0
    if o3 is not None:
        m = min(m, o3 - n)
    return n, m


def lift_through_T_origin(
    f: DiscMap, n: Optional[int] = None, m: Optional[int] = None, n_samples: int = 256
) -> LiftResult:
    """Factor f = (lam^n g1, lam^m g2, lam^(n+m) g3), lift g and push the monomials into the rows"""
    if f.dimension != 3:
        raise ParameterError("Lifting needs a disc with three coordinates")
    if n is None or m is None:
        detected = detect_orders(f)
        n = detected[0] if n is None else n
        m = detected[1] if m is None else m
    if n < 0 or m < 0:
        raise ParameterError("Orders must be non-negative")
    g = f.divide_by_monomial((n, m, n + m))
    g0 = g(0.0)
    if in_triangular_set(g0):
        raise MultiStepError(f"Factored disc still meets T at the origin (g(0) = {g0}); recursion is not supported")
    # g need not lie in the closed tetrablock; only F is a disc in it
    inner = lift_avoiding_T(g, n_samples=n_samples, check_norm=False)
    F = MonomialLift(inner.G, n, m)
    residual, max_norm, interior_norm, count = _certify(F, f, n_samples, check_norm=True)
    return LiftResult(F, "through_T_origin", 1, residual, max_norm, interior_norm, count, orders=(n, m))


def symmetrize_boundary(v: ArrayLike) -> np.ndarray:
    """[[v11, w], [w, v22]] with w the principal square root of v12 v21"""
    v = as_mat2(v)
    w = np.sqrt(v[..., 0, 1] * v[..., 1, 0])
    out = v.copy()
    out[..., 0, 1] = w
    out[..., 1, 0] = w
    return out
