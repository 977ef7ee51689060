"""Single-pair checks: Lempert and Caratheodory bounds, equality on geodesics,
invariance under automorphisms, plurisubharmonicity of rho and the
non-convexity witness search.
"""
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy.optimize import minimize

from app.config import TOLERANCES, resolve_tolerances
from app.exceptions import DomainError, TetraError
from app.services.domains import (
    as_point3,
    phi_lambda,
    rho,
    symmetric_preimages,
    tetrablock_alt_margin,
    tetrablock_margin,
)
from app.services.geodesic_factory import GeodesicSpec, evaluate_geodesic, nu_of_disc
from app.services.left_inverse import LeftInverse, build_left_inverse
from app.services.sampling import generator, rotate_coordinates, sample_tetrablock
from app.services.scalar_kernel import DiscMap, halton_disc_samples, op_norm, poincare
from app.services.transforms import (
    TetraAutParams,
    aut_disc,
    aut_tetrablock,
    aut_tetrablock_closed_form,
    aut_tetrablock_inverse,
    nu_factor,
    phi_a,
)

logger = logging.getLogger(__name__)

GRID_RADII = 64
GRID_ANGLES = 64
ORDER_SLACK = 1e-10
INSIDE_MARGIN = 1e-6
OUTSIDE_MARGIN = -1e-9
WITNESS_BATCH = 4096
MODULUS_CAP = 1 - 1e-16
GAP_INVARIANCE_TOL = 1e-8
NU_FACTOR_TOL = 1e-10


@dataclass
class EqualityReport:
    """One geodesic pair: Lempert upper bound against the best Caratheodory lower bound"""

    spec_id: str
    lambda1: complex
    lambda2: complex
    upper: float
    lower: float
    gap: float
    passed: bool
    status: str
    left_inverse_kind: Optional[str] = None
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class WitnessReport:
    """Pair of tetrablock points whose midpoint leaves the domain"""

    found: bool
    seed: int
    trials: int
    domain: str = "tetrablock"
    w: Optional[List[complex]] = None
    z: Optional[List[complex]] = None
    midpoint_margin: Optional[float] = None
    alt_midpoint_margin: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class PairSandwich:
    """Caratheodory lower bound and a lifted Kobayashi upper bound for an arbitrary pair"""

    lower: float
    upper: float
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _cap_modulus(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    modulus = np.abs(a)
    scale = np.divide(MODULUS_CAP, modulus, out=np.ones_like(modulus), where=modulus > MODULUS_CAP)
    return a * scale


def _pseudo_distance(a, b):
    a = _cap_modulus(a)
    b = _cap_modulus(b)
    return np.abs((a - b) / (1 - np.conj(b) * a))


def lempert_upper(spec: GeodesicSpec, lambda1: complex, lambda2: complex) -> float:
    """p(lambda1, lambda2); the disc through f(lambda1), f(lambda2) witnesses it"""
    return float(poincare(lambda1, lambda2))


def _psi_family_values(zeta: np.ndarray, x: np.ndarray, swap: bool) -> np.ndarray:
    x1, x2 = (x[1], x[0]) if swap else (x[0], x[1])
    return (zeta * x[2] - x1) / (1 - zeta * x2)


def caratheodory_lower(w, z, candidates: Sequence[Callable] = ()) -> float:
    """Best p(F(w), F(z)) over the Psi_zeta families (grid plus polish) and the given maps"""
    w = as_point3(w).reshape(3)
    z = as_point3(z).reshape(3)
    if np.allclose(w, z, rtol=0, atol=0):
        return 0.0
    radii = np.linspace(0.0, 1.0, GRID_RADII)
    angles = 2 * np.pi * np.arange(GRID_ANGLES) / GRID_ANGLES
    zeta = (radii[:, None] * np.exp(1j * angles[None, :])).ravel()

    best = 0.0
    for swap in (False, True):
        scores = _pseudo_distance(_psi_family_values(zeta, w, swap), _psi_family_values(zeta, z, swap))
        j = int(np.argmax(scores))

        def objective(params, swap=swap):
            r, t = params
            point = r * np.exp(1j * t)
            return -float(_pseudo_distance(_psi_family_values(point, w, swap), _psi_family_values(point, z, swap)))

        start = np.array([abs(zeta[j]), np.angle(zeta[j])])
        result = minimize(objective, start, method="L-BFGS-B", bounds=[(0.0, 1.0), (None, None)])
        best = max(best, float(scores[j]), -float(result.fun))

    for L in candidates:
        try:
            values = np.asarray(L(np.stack([w, z])), dtype=complex)
        except TetraError as e:
            logger.warning(f"Candidate left inverse failed on the pair: {e}")
            continue
        best = max(best, float(_pseudo_distance(values[0], values[1])))
    return float(np.arctanh(min(best, MODULUS_CAP)))


def check_equality_on_geodesic(
    spec: GeodesicSpec,
    lambda1: complex,
    lambda2: complex,
    tolerances: Optional[Dict[str, float]] = None,
    spec_id: str = "",
    left_inverse: Optional[LeftInverse] = None,
) -> EqualityReport:
    """Upper and lower bound on one pair of the geodesic; a prebuilt left inverse skips construction"""
    tol = resolve_tolerances(tolerances)
    lambda1, lambda2 = complex(lambda1), complex(lambda2)
    upper = lempert_upper(spec, lambda1, lambda2)
    w, z = evaluate_geodesic(spec, np.array([lambda1, lambda2]))

    candidates = []
    kind = None
    note = ""
    try:
        if left_inverse is None:
            left_inverse = LeftInverse(build_left_inverse(spec), tol["tol_fix"])
        kind = left_inverse.spec.kind
        candidates.append(left_inverse)
    except TetraError as e:
        note = f"{type(e).__name__}: {e}"
        logger.warning(f"No left inverse for {spec_id or spec.kind}: {note}")

    lower = caratheodory_lower(w, z, candidates)
    gap = upper - lower
    if lower > upper + ORDER_SLACK:
        logger.error(f"{spec_id}: Caratheodory bound {lower!r} exceeds Lempert bound {upper!r}")
        return EqualityReport(spec_id, lambda1, lambda2, upper, lower, gap, False, "fail", kind,
                              "lower bound exceeds upper bound")
    if kind is None:
        return EqualityReport(spec_id, lambda1, lambda2, upper, lower, gap, False, "inconclusive", None, note)
    passed = gap <= tol["tol_eq"]
    return EqualityReport(spec_id, lambda1, lambda2, upper, lower, gap, passed,
                          "pass" if passed else "fail", kind, note)


def check_equality_on_pairs(
    spec: GeodesicSpec,
    pairs: Sequence[Tuple[complex, complex]],
    tolerances: Optional[Dict[str, float]] = None,
    spec_id: str = "",
) -> Dict[str, Any]:
    """Equality on several pairs of one geodesic; the record passes only if every pair does"""
    tol = resolve_tolerances(tolerances)
    left_inverse = None
    try:
        left_inverse = LeftInverse(build_left_inverse(spec), tol["tol_fix"])
    except TetraError as e:
        logger.warning(f"No left inverse for {spec_id or spec.kind}: {type(e).__name__}: {e}")
    reports = [
        check_equality_on_geodesic(spec, l1, l2, tol, f"{spec_id}/{k}", left_inverse)
        for k, (l1, l2) in enumerate(pairs)
    ]
    statuses = {r.status for r in reports}
    if "fail" in statuses:
        status = "fail"
    elif "inconclusive" in statuses:
        status = "inconclusive"
    else:
        status = "pass"
    notes = sorted({r.note for r in reports if r.note})
    return {
        "spec_id": spec_id,
        "status": status,
        "gap": max(r.gap for r in reports),
        "left_inverse_kind": reports[0].left_inverse_kind,
        "note": "; ".join(notes),
        "pairs": [r.to_dict() for r in reports],
    }


def pair_sandwich(w, z) -> PairSandwich:
    """[c(w, z), min artanh ||Phi_X(Y)||] over the symmetric preimages X of w and Y of z"""
    w = as_point3(w).reshape(3)
    z = as_point3(z).reshape(3)
    margins = tetrablock_margin(np.stack([w, z]))
    if np.any(margins <= 0):
        raise DomainError(f"Both points must lie in the open tetrablock (margins {margins[0]:.3e}, {margins[1]:.3e})")
    lower = caratheodory_lower(w, z)
    upper = np.inf
    for x in symmetric_preimages(w):
        for y in symmetric_preimages(z):
            upper = min(upper, float(np.arctanh(min(op_norm(phi_a(x, y)), MODULUS_CAP))))
    notes = [] if lower <= upper + ORDER_SLACK else ["lower bound exceeds lifted upper bound"]
    return PairSandwich(lower=lower, upper=upper, notes=notes)


def check_invariance(
    p: TetraAutParams,
    f: DiscMap,
    expected: Dict[complex, int],
    spec: GeodesicSpec,
    lambda1: complex,
    lambda2: complex,
    spec_id: str = "",
) -> Dict[str, Any]:
    """Orders of contact with T survive the automorphism p, psi_1 psi_2 - psi_3
    factors through nu, and the Caratheodory gap of a geodesic pair is unchanged
    after transport."""
    moved = aut_disc(p, f)
    nu_before = {str(k): nu_of_disc(f, k) for k in expected}
    nu_after = {str(k): nu_of_disc(moved, k) for k in expected}
    nu_ok = all(nu_before[str(k)] == v and nu_after[str(k)] == v for k, v in expected.items())

    x = f(halton_disc_samples(8, radius=1.0))
    psi = aut_tetrablock_closed_form(p, x)
    lhs = psi[:, 0] * psi[:, 1] - psi[:, 2]
    rhs = nu_factor(p, x) * (x[:, 0] * x[:, 1] - x[:, 2])
    factor_residual = float(np.max(np.abs(lhs - rhs)))

    record: Dict[str, Any] = {
        "spec_id": spec_id,
        "nu_expected": {str(k): v for k, v in expected.items()},
        "nu_before": nu_before,
        "nu_after": nu_after,
        "nu_factor_residual": factor_residual,
    }
    try:
        L = LeftInverse(build_left_inverse(spec))
    except TetraError as e:
        record.update(status="inconclusive", note=f"{type(e).__name__}: {e}")
        return record
    upper = float(poincare(lambda1, lambda2))
    pair = evaluate_geodesic(spec, np.array([lambda1, lambda2]))
    moved_pair = aut_tetrablock(p, pair)
    gap_before = upper - caratheodory_lower(pair[0], pair[1], [L])
    gap_after = upper - caratheodory_lower(
        moved_pair[0], moved_pair[1], [lambda y: L(aut_tetrablock_inverse(p, y))]
    )
    record.update(gap_before=gap_before, gap_after=gap_after, gap_delta=abs(gap_after - gap_before))
    passed = nu_ok and factor_residual <= NU_FACTOR_TOL and record["gap_delta"] <= GAP_INVARIANCE_TOL
    if not passed:
        logger.warning(f"Invariance check {spec_id} failed: nu {nu_ok}, factor {factor_residual:.3e}, "
                       f"gap delta {record['gap_delta']:.3e}")
    record["status"] = "pass" if passed else "fail"
    return record


def psh_spot_check(z0, v, r: float, n_nodes: int = 512, slack: float = 1e-3) -> bool:
    """Sub-mean-value inequality for rho on the circle z0 + r e^{i t} v"""
    z0 = as_point3(z0).reshape(3)
    v = as_point3(v).reshape(3)
    t = 2 * np.pi * np.arange(n_nodes) / n_nodes
    circle = z0[None, :] + r * np.exp(1j * t)[:, None] * v[None, :]
    mean = float(np.mean(rho(circle)))
    centre = float(rho(z0))
    if centre > mean + slack:
        logger.warning(f"rho({z0}) = {centre:.6f} exceeds circle mean {mean:.6f}")
        return False
    return True


def rho_radial_monotone(z, n_steps: int = 32) -> bool:
    """rho(phi_t(z)) is nondecreasing for t in [0, 1]"""
    t = np.linspace(0.0, 1.0, n_steps)
    values = np.asarray(rho(phi_lambda(as_point3(z).reshape(3), t)))
    return bool(np.all(np.diff(values) >= -1e-12))


def _polydisc_margin(z: np.ndarray) -> np.ndarray:
    return 1 - np.max(np.abs(z), axis=-1)


def _embedded_g2_points(rng: np.random.Generator, n: int) -> np.ndarray:
    """(s/2, s/2, p) with s = l1 + l2, p = l1 l2 for l1, l2 close to the unit circle"""
    lam = rng.uniform(0.95, 0.9999, size=(n, 2)) * np.exp(2j * np.pi * rng.random((n, 2)))
    s = lam.sum(axis=1)
    return np.stack([s / 2, s / 2, lam.prod(axis=1)], axis=-1)


def _candidate_pairs(rng: np.random.Generator, n: int, domain: str):
    """Independent pairs, rotated copies and, for the tetrablock, rotated embedded G2 points"""
    if domain == "polydisc":
        w = 0.999 * np.sqrt(rng.random((n, 3))) * np.exp(2j * np.pi * rng.random((n, 3)))
        other = 0.999 * np.sqrt(rng.random((n, 3))) * np.exp(2j * np.pi * rng.random((n, 3)))
    else:
        w = sample_tetrablock(rng, n, min_margin=INSIDE_MARGIN, boundary_fraction=0.9)
        other = sample_tetrablock(rng, n, min_margin=INSIDE_MARGIN, boundary_fraction=0.9)
        embedded = rng.random(n) < 1 / 3
        w = np.where(embedded[:, None], _embedded_g2_points(rng, n), w)
    alpha = 2 * np.pi * rng.random(n)
    beta = np.where(rng.random(n) < 0.5, alpha, 2 * np.pi * rng.random(n))
    rotated = rotate_coordinates(w, alpha, beta)
    use_rotation = rng.random(n) < 2 / 3
    z = np.where(use_rotation[:, None], rotated, other)
    return w, z


def find_nonconvexity_witness(seed: int, budget: int, domain: str = "tetrablock") -> WitnessReport:
    """Seeded search for w, z strictly inside the domain whose midpoint lies outside"""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if domain not in ("tetrablock", "polydisc"):
        raise ValueError(f"Unknown domain {domain!r}")
    margin = _polydisc_margin if domain == "polydisc" else tetrablock_margin
    rng = generator(seed)
    trials = 0
    while trials < budget:
        n = min(WITNESS_BATCH, budget - trials)
        w, z = _candidate_pairs(rng, n, domain)
        inside = (np.asarray(margin(w)) > INSIDE_MARGIN) & (np.asarray(margin(z)) > INSIDE_MARGIN)
        mid = np.asarray(margin((w + z) / 2))
        hits = np.flatnonzero(inside & (mid < OUTSIDE_MARGIN))
        if hits.size:
            k = int(hits[0])
            midpoint = (w[k] + z[k]) / 2
            alt = float(tetrablock_alt_margin(midpoint)) if domain == "tetrablock" else None
            logger.info(f"Witness found after {trials + k + 1} trials (midpoint margin {mid[k]:.3e})")
            return WitnessReport(True, seed, trials + k + 1, domain, list(w[k]), list(z[k]), float(mid[k]), alt)
        trials += n
    logger.info(f"No witness in {trials} trials for {domain}")
    return WitnessReport(False, seed, trials, domain)
