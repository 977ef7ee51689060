"""Complex scalar and 2x2 matrix primitives shared by every other service.

Matrices are numpy arrays of shape (..., 2, 2); analytic discs are rational
maps stored as ascending coefficient vectors (numpy.polynomial convention).
"""
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union
import logging

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import simpson
from scipy.stats import qmc

from app.config import TOLERANCES
from app.exceptions import (
    ContourError,
    DegenerateInputError,
    DomainError,
    ParameterError,
    PreconditionError,
    SingularityError,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[complex, np.ndarray, Sequence[complex]]

CONTOUR_POINTS = 2048
MAX_CONTOUR_POINTS = 2 ** 16
ORDER_RADIUS = 0.05
ROOT_CLUSTER = 1e-4


def mat2(e11: complex, e12: complex, e21: complex, e22: complex) -> np.ndarray:
    m = np.array([[e11, e12], [e21, e22]], dtype=complex)
    if not np.all(np.isfinite(m)):
        raise ParameterError("Matrix entries must be finite")
    return m


def as_mat2(x: ArrayLike) -> np.ndarray:
    m = np.asarray(x, dtype=complex)
    if m.shape[-2:] != (2, 2):
        raise ParameterError(f"Expected a (..., 2, 2) array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ParameterError("Matrix entries must be finite")
    return m


def adjoint(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def transpose(x: np.ndarray) -> np.ndarray:
    return np.swapaxes(x, -1, -2)


def is_symmetric(x: ArrayLike, tol: Optional[float] = None) -> Union[bool, np.ndarray]:
    tol = TOLERANCES["tol_sym"] if tol is None else tol
    m = as_mat2(x)
    result = np.abs(m[..., 0, 1] - m[..., 1, 0]) <= tol
    return bool(result) if np.ndim(result) == 0 else result


def is_unitary(x: ArrayLike, tol: Optional[float] = None) -> bool:
    tol = TOLERANCES["tol_unit"] if tol is None else tol
    m = as_mat2(x)
    defect = m @ adjoint(m) - np.eye(2)
    return bool(np.all(np.max(np.abs(defect), axis=(-2, -1)) <= tol))


def op_norm(x: ArrayLike) -> Union[float, np.ndarray]:
    """Largest singular value of a 2x2 matrix (vectorized over leading axes).

    Uses the eigenvalues of M*M = [[p, q], [conj(q), r]]; the discriminant is
    written as a sum of squares so equal singular values lose no precision.
    """
    m = as_mat2(x)
    a, b = m[..., 0, 0], m[..., 0, 1]
    c, d = m[..., 1, 0], m[..., 1, 1]
    p = np.abs(a) ** 2 + np.abs(c) ** 2
    r = np.abs(b) ** 2 + np.abs(d) ** 2
    q = np.conj(a) * b + np.conj(c) * d
    top = 0.5 * (p + r) + np.hypot(0.5 * (p - r), np.abs(q))
    norm = np.sqrt(top)
    return float(norm) if np.ndim(norm) == 0 else norm


def poincare(lam1: ArrayLike, lam2: ArrayLike) -> Union[float, np.ndarray]:
    """Poincare distance artanh |(l1 - l2) / (1 - conj(l2) l1)|"""
    l1 = np.asarray(lam1, dtype=complex)
    l2 = np.asarray(lam2, dtype=complex)
    if np.any(np.abs(l1) >= 1) or np.any(np.abs(l2) >= 1):
        raise DomainError("Poincare distance needs points of the open unit disc")
    m = np.abs((l1 - l2) / (1 - np.conj(l2) * l1))
    dist = np.arctanh(np.minimum(m, 1.0))
    return float(dist) if np.ndim(dist) == 0 else dist


def _check_unimodular(tau: complex, name: str = "tau") -> complex:
    tau = complex(tau)
    if abs(abs(tau) - 1) > 1e-9:
        raise ParameterError(f"{name} must be unimodular, got |{name}| = {abs(tau)}")
    return tau


def mobius(gamma: complex, tau: complex, lam: ArrayLike) -> Union[complex, np.ndarray]:
    """Disc automorphism tau (lam - gamma) / (1 - conj(gamma) lam)"""
    gamma = complex(gamma)
    if abs(gamma) >= 1:
        raise ParameterError(f"Mobius center must lie in the open disc, got |gamma| = {abs(gamma)}")
    tau = _check_unimodular(tau)
    lam = np.asarray(lam, dtype=complex)
    out = tau * (lam - gamma) / (1 - np.conj(gamma) * lam)
    return out[()]


def mobius_inverse(gamma: complex, tau: complex, w: ArrayLike) -> Union[complex, np.ndarray]:
    gamma = complex(gamma)
    tau = _check_unimodular(tau)
    w = np.asarray(w, dtype=complex)
    out = (np.conj(tau) * w + gamma) / (1 + np.conj(gamma) * np.conj(tau) * w)
    return out[()]


@dataclass(frozen=True)
class DiscAutomorphism:
    """Automorphism of the disc fixed by its value and derivative phase at 0"""

    center_value: complex
    phase: complex

    @classmethod
    def from_jet(cls, h0: complex, h1: complex) -> "DiscAutomorphism":
        h0, h1 = complex(h0), complex(h1)
        if abs(h0) >= 1:
            raise ParameterError(f"h(0) must lie in the open disc, got {h0}")
        if abs(h1) == 0:
            raise DegenerateInputError("h'(0) vanishes; not an automorphism")
        return cls(h0, h1 / abs(h1))

    def __call__(self, lam: ArrayLike):
        q = -np.conj(self.phase) * self.center_value
        lam = np.asarray(lam, dtype=complex)
        return (self.phase * (lam - q) / (1 - np.conj(q) * lam))[()]

    def inverse(self, w: ArrayLike):
        return mobius(self.center_value, np.conj(self.phase), w)


def _evaluate(f: Callable, lam: np.ndarray) -> np.ndarray:
    try:
        values = np.asarray(f(lam), dtype=complex)
        if values.shape == lam.shape:
            return values
    except (TypeError, ValueError):
        pass
    return np.array([complex(f(x)) for x in lam.ravel()], dtype=complex).reshape(lam.shape)


def count_roots_in_disc(
    f: Callable,
    r: float = 1.0,
    center: complex = 0.0,
    n_points: int = CONTOUR_POINTS,
    tol_contour: Optional[float] = None,
) -> int:
    """Winding number of f along |lam - center| = r.

    Points double until the winding snaps to an integer and no phase step
    exceeds pi/2.
    """
    tol_contour = TOLERANCES["tol_contour"] if tol_contour is None else tol_contour
    if r <= 0:
        raise ParameterError(f"Contour radius must be positive, got {r}")
    n = n_points
    while True:
        theta = 2 * np.pi * np.arange(n) / n
        values = _evaluate(f, center + r * np.exp(1j * theta))
        if not np.all(np.isfinite(values)):
            raise ContourError(f"Non-finite values on the contour of radius {r}")
        modulus = np.abs(values)
        if modulus.min() < tol_contour:
            raise ContourError(
                f"Function nearly vanishes on the contour (min modulus {modulus.min():.3e} at r={r})"
            )
        closed = np.append(values, values[0])
        steps = np.angle(closed[1:] / closed[:-1])
        winding = steps.sum() / (2 * np.pi)
        count = int(np.round(winding))
        if abs(winding - count) < 0.25 and np.max(np.abs(steps)) < np.pi / 2:
            return count
        if n >= MAX_CONTOUR_POINTS:
            raise ContourError(f"Winding did not resolve with {n} contour points (r={r})")
        n *= 2


def _as_coeffs(c: ArrayLike) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(c, dtype=complex)).ravel()
    if arr.size == 0:
        arr = np.zeros(1, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ParameterError("Polynomial coefficients must be finite")
    return arr


def _polynomial_root_count(coeffs: np.ndarray, r: float, tol_contour: Optional[float] = None) -> int:
    scale = np.max(np.abs(coeffs))
    normalized = coeffs / scale
    if np.all(np.abs(normalized[1:]) == 0):
        return 0
    return count_roots_in_disc(lambda lam: P.polyval(lam, normalized), r, tol_contour=tol_contour)


@dataclass(frozen=True, eq=False)
class DiscMap:
    """Rational analytic disc: coordinate j is numerators[j] / denominator.

    The shared denominator is certified root-free on |lam| <= 1 + eps_den.
    Evaluation stacks coordinates on the last axis; scalar maps return the
    bare values.
    """

    numerators: Tuple[np.ndarray, ...]
    denominator: np.ndarray = field(default_factory=lambda: np.ones(1, dtype=complex))
    certify: bool = field(default=True, repr=False)
    eps_den: Optional[float] = field(default=None, repr=False)

    def __post_init__(self):
        if isinstance(self.numerators, np.ndarray) and self.numerators.ndim == 1:
            nums = (_as_coeffs(self.numerators),)
        else:
            nums = tuple(_as_coeffs(c) for c in self.numerators)
        if not nums:
            raise ParameterError("A disc needs at least one coordinate")
        den = _as_coeffs(self.denominator)
        object.__setattr__(self, "numerators", nums)
        object.__setattr__(self, "denominator", den)
        if np.max(np.abs(den)) == 0:
            raise SingularityError("Denominator is identically zero")
        if self.certify:
            self._certify_denominator()

    def _certify_denominator(self) -> None:
        eps_den = TOLERANCES["eps_den"] if self.eps_den is None else self.eps_den
        try:
            count = _polynomial_root_count(self.denominator, 1 + eps_den)
        except ContourError as e:
            raise SingularityError(f"Denominator nearly vanishes near the unit circle: {e}") from e
        if count != 0:
            raise SingularityError(f"Denominator has {count} root(s) in the closed unit disc")

    @classmethod
    def scalar(cls, numerator: ArrayLike, denominator: ArrayLike = (1.0,), **kwargs) -> "DiscMap":
        return cls((_as_coeffs(numerator),), _as_coeffs(denominator), **kwargs)

    @classmethod
    def constant(cls, values: Sequence[complex]) -> "DiscMap":
        return cls(tuple(np.array([v], dtype=complex) for v in values), certify=False)

    @classmethod
    def identity(cls) -> "DiscMap":
        return cls.scalar([0.0, 1.0], certify=False)

    @classmethod
    def stack(cls, *coords: "DiscMap") -> "DiscMap":
        """Join scalar discs into one vector disc over a common denominator"""
        if any(c.dimension != 1 for c in coords):
            raise ParameterError("stack expects scalar discs")
        dens = [c.denominator for c in coords]
        if all(np.array_equal(d, dens[0]) for d in dens):
            return cls(tuple(c.numerators[0] for c in coords), dens[0], certify=False)
        numerators = []
        for j, c in enumerate(coords):
            num = c.numerators[0]
            for k, d in enumerate(dens):
                if k != j:
                    num = P.polymul(num, d)
            numerators.append(num)
        common = dens[0]
        for d in dens[1:]:
            common = P.polymul(common, d)
        return cls(tuple(numerators), common, certify=False)

    @property
    def dimension(self) -> int:
        return len(self.numerators)

    def __call__(self, lam: ArrayLike):
        lam = np.asarray(lam, dtype=complex)
        den = P.polyval(lam, self.denominator)
        values = np.stack([P.polyval(lam, n) for n in self.numerators], axis=-1) / den[..., None]
        if self.dimension == 1:
            return values[..., 0][()]
        return values

    def component(self, j: int) -> "DiscMap":
        return DiscMap((self.numerators[j],), self.denominator, certify=False)

    def _coerce(self, other) -> "DiscMap":
        if isinstance(other, DiscMap):
            return other
        if np.isscalar(other):
            return DiscMap.constant([complex(other)] * self.dimension)
        return NotImplemented

    def __mul__(self, other) -> "DiscMap":
        if not isinstance(other, DiscMap):
            if not np.isscalar(other):
                return NotImplemented
            return DiscMap(tuple(n * complex(other) for n in self.numerators), self.denominator, certify=False)
        if self.dimension != 1 and other.dimension != 1:
            raise ParameterError("Products need at least one scalar factor")
        if self.dimension == 1:
            scalar, vector = self, other
        else:
            scalar, vector = other, self
        s = scalar.numerators[0]
        return DiscMap(
            tuple(P.polymul(s, n) for n in vector.numerators),
            P.polymul(scalar.denominator, vector.denominator),
            certify=False,
        )

    __rmul__ = __mul__

    def _linear(self, other, sign: float) -> "DiscMap":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.dimension != self.dimension:
            raise ParameterError("Sums need discs of equal dimension")
        if np.array_equal(self.denominator, other.denominator):
            nums = tuple(P.polyadd(n, sign * m) for n, m in zip(self.numerators, other.numerators))
            return DiscMap(nums, self.denominator, certify=False)
        nums = tuple(
            P.polyadd(P.polymul(n, other.denominator), sign * P.polymul(m, self.denominator))
            for n, m in zip(self.numerators, other.numerators)
        )
        return DiscMap(nums, P.polymul(self.denominator, other.denominator), certify=False)

    def __add__(self, other) -> "DiscMap":
        return self._linear(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other) -> "DiscMap":
        return self._linear(other, -1.0)

    def __rsub__(self, other) -> "DiscMap":
        return (-self)._linear(other, 1.0)

    def __neg__(self) -> "DiscMap":
        return DiscMap(tuple(-n for n in self.numerators), self.denominator, certify=False)

    def is_zero(self, tol: Optional[float] = None) -> bool:
        tol = TOLERANCES["tol_degenerate"] if tol is None else tol
        return all(np.max(np.abs(n)) <= tol for n in self.numerators)

    def divide_by_monomial(self, powers: Union[int, Sequence[int]], tol: Optional[float] = None) -> "DiscMap":
        """Divide coordinate j by lam**powers[j]; the low coefficients must vanish"""
        tol = TOLERANCES["tol_degenerate"] if tol is None else tol
        if np.isscalar(powers):
            powers = [int(powers)] * self.dimension
        if len(powers) != self.dimension:
            raise ParameterError("One power per coordinate is required")
        numerators = []
        for j, (num, k) in enumerate(zip(self.numerators, powers)):
            if k < 0:
                raise ParameterError("Monomial powers must be non-negative")
            scale = max(1.0, float(np.max(np.abs(num))))
            if np.any(np.abs(num[:k]) > tol * scale):
                raise PreconditionError(f"Coordinate {j + 1} does not vanish to order {k} at 0")
            numerators.append(num[k:] if num.size > k else np.zeros(1, dtype=complex))
        return DiscMap(tuple(numerators), self.denominator, certify=False)

    def derivative_at(self, lam: ArrayLike):
        lam = np.asarray(lam, dtype=complex)
        den = P.polyval(lam, self.denominator)
        dden = P.polyval(lam, P.polyder(self.denominator))
        values = np.stack(
            [
                (P.polyval(lam, P.polyder(n)) * den - P.polyval(lam, n) * dden) / den ** 2
                for n in self.numerators
            ],
            axis=-1,
        )
        if self.dimension == 1:
            return values[..., 0][()]
        return values

    def log_derivative(self) -> Callable[[np.ndarray], np.ndarray]:
        if self.dimension != 1:
            raise ParameterError("log_derivative needs a scalar disc")
        num, den = self.numerators[0], self.denominator
        dnum, dden = P.polyder(num), P.polyder(den)

        def logder(lam):
            lam = np.asarray(lam, dtype=complex)
            return P.polyval(lam, dnum) / P.polyval(lam, num) - P.polyval(lam, dden) / P.polyval(lam, den)

        return logder


def vanishing_order(
    f: Union[DiscMap, Callable],
    lam0: complex = 0.0,
    tol_contour: Optional[float] = None,
    radius: Optional[float] = None,
) -> int:
    """Order of the zero of a scalar disc at lam0 by a winding count on a small circle"""
    lam0 = complex(lam0)
    tol_degenerate = TOLERANCES["tol_degenerate"]
    if isinstance(f, DiscMap):
        if f.dimension != 1:
            raise ParameterError("vanishing_order needs a scalar disc")
        num = f.numerators[0]
        scale = float(np.max(np.abs(num)))
        if scale <= tol_degenerate:
            raise DegenerateInputError("Disc is identically zero")
        trimmed = P.polytrim(num / scale, 1e-14)
        if trimmed.size == 1:
            return 0
        roots = P.polyroots(trimmed)
        dist = np.abs(roots - lam0)
        others = dist[dist > ROOT_CLUSTER]
        r = ORDER_RADIUS if radius is None else radius
        if others.size:
            r = min(r, 0.5 * float(others.min()))
        evaluator = lambda lam: P.polyval(lam, trimmed)
        return _normalized_count(evaluator, lam0, r, tol_contour)

    r = ORDER_RADIUS if radius is None else radius
    while r >= 1e-4:
        ring = _evaluate(f, lam0 + r * np.exp(2j * np.pi * np.arange(64) / 64))
        if np.max(np.abs(ring)) <= tol_degenerate:
            raise DegenerateInputError("Function is numerically zero near lam0")
        try:
            outer = _normalized_count(f, lam0, r, tol_contour)
            inner = _normalized_count(f, lam0, r / 2, tol_contour)
        except ContourError:
            outer, inner = -1, -2
        if outer == inner:
            return outer
        r /= 2
    raise ContourError(f"Could not isolate the zero at {lam0}")


def _normalized_count(f: Callable, center: complex, r: float, tol_contour: Optional[float]) -> int:
    ring = _evaluate(f, center + r * np.exp(2j * np.pi * np.arange(256) / 256))
    scale = float(np.max(np.abs(ring)))
    if scale == 0:
        raise ContourError("Function vanishes on the contour")
    return count_roots_in_disc(lambda lam: _evaluate(f, lam) / scale, r, center=center, tol_contour=tol_contour)


@dataclass(frozen=True, eq=False)
class AnalyticSqrt:
    """g with g**2 = f on the closed disc, continued radially from g(0)"""

    f: DiscMap
    base_value: complex
    panels: int = 256
    max_panels: int = 2 ** 16
    tol_quad: float = 1e-13
    chunk: int = 256

    def __call__(self, lam: ArrayLike):
        lam = np.asarray(lam, dtype=complex)
        flat = lam.ravel()
        integral = np.concatenate(
            [self._radial_log_integral(flat[i:i + self.chunk]) for i in range(0, flat.size, self.chunk)]
        ) if flat.size else np.zeros(0, dtype=complex)
        out = self.base_value * np.exp(0.5 * integral)
        return out.reshape(lam.shape)[()]

    def _radial_log_integral(self, lam: np.ndarray) -> np.ndarray:
        logder = self.f.log_derivative()
        n = self.panels
        while True:
            t = np.linspace(0.0, 1.0, n + 1)
            values = logder(lam[:, None] * t[None, :]) * lam[:, None]
            fine = simpson(values, dx=1.0 / n, axis=-1)
            coarse = simpson(values[:, ::2], dx=2.0 / n, axis=-1)
            error = np.abs(fine - coarse) / 15
            if np.all(error <= self.tol_quad * np.maximum(1.0, np.abs(fine))):
                return fine + (fine - coarse) / 15
            if n >= self.max_panels:
                logger.warning(f"Radial quadrature stopped at {n} panels, error {error.max():.2e}")
                return fine
            n *= 2


def analytic_sqrt(
    f: DiscMap,
    branch_sign: int = 1,
    eps_den: Optional[float] = None,
    tol_contour: Optional[float] = None,
) -> AnalyticSqrt:
    """Square root of a scalar disc that has no zero on the closed unit disc"""
    if f.dimension != 1:
        raise ParameterError("analytic_sqrt needs a scalar disc")
    if branch_sign not in (1, -1):
        raise ParameterError(f"branch_sign must be +1 or -1, got {branch_sign}")
    eps_den = TOLERANCES["eps_den"] if eps_den is None else eps_den
    num = f.numerators[0]
    if np.max(np.abs(num)) <= TOLERANCES["tol_degenerate"]:
        raise PreconditionError("Cannot take the square root of the zero disc")
    try:
        count = _polynomial_root_count(num, 1 + eps_den, tol_contour)
    except ContourError as e:
        raise PreconditionError(f"Disc has a zero on or near the unit circle: {e}") from e
    if count != 0:
        raise PreconditionError(f"Disc has {count} zero(s) in the closed unit disc")
    base = branch_sign * np.sqrt(complex(f(0.0)))
    return AnalyticSqrt(f, complex(base))


def halton_disc_samples(n: int, radius: float = 0.95, seed: Optional[int] = None) -> np.ndarray:
    """Low-discrepancy points of the disc |lam| <= radius (area-uniform)"""
    sampler = qmc.Halton(d=2, scramble=seed is not None, seed=seed)
    u = sampler.random(n)
    return radius * np.sqrt(u[:, 0]) * np.exp(2j * np.pi * u[:, 1])
