"""Seeded samplers for unitaries, disc points and points of the tetrablock."""
from typing import Dict, List, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from app.services.domains import project_pi, tetrablock_margin
from app.services.scalar_kernel import DiscMap, transpose


def spawn_seeds(seed: int, n: int) -> List[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(n)


def generator(seed_or_sequence) -> np.random.Generator:
    return np.random.default_rng(seed_or_sequence)


def random_unitary(rng: np.random.Generator, size: Tuple[int, ...] = ()) -> np.ndarray:
    """Haar unitary from the QR factorisation of a complex Gaussian matrix"""
    z = (rng.standard_normal(size + (2, 2)) + 1j * rng.standard_normal(size + (2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def random_disc_points(rng: np.random.Generator, n: int, radius: float = 0.95) -> np.ndarray:
    return radius * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))


def sample_box(rng: np.random.Generator, n: int, half_width: float = 1.5) -> np.ndarray:
    real = rng.uniform(-half_width, half_width, size=(n, 3, 2))
    return real[..., 0] + 1j * real[..., 1]


def random_symmetric_contractions(
    rng: np.random.Generator, n: int, sigma_low: float = 0.0, sigma_high: float = 1.0
) -> np.ndarray:
    """U diag(sigma) U^t with Haar U and singular values drawn from [sigma_low, sigma_high)"""
    u = random_unitary(rng, (n,))
    sigma = rng.uniform(sigma_low, sigma_high, size=(n, 2))
    return (u * sigma[:, None, :]) @ transpose(u)


def sample_tetrablock(
    rng: np.random.Generator, n: int, min_margin: float = 1e-6, boundary_fraction: float = 0.5
) -> np.ndarray:
    """Points with tetrablock margin > min_margin; a share comes from near the boundary"""
    out = np.empty((0, 3), dtype=complex)
    while len(out) < n:
        batch = max(2 * (n - len(out)), 64)
        n_boundary = int(batch * boundary_fraction)
        near = project_pi(random_symmetric_contractions(rng, n_boundary, 0.85, 1.0))
        box = sample_box(rng, batch - n_boundary, 1.0)
        candidates = np.concatenate([near, box])
        candidates = candidates[rng.permutation(len(candidates))]
        keep = np.asarray(tetrablock_margin(candidates)) > min_margin
        out = np.concatenate([out, candidates[keep]])
    return out[:n]


def rotate_coordinates(z: np.ndarray, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """(e^{i alpha} z1, e^{i beta} z2, e^{i (alpha + beta)} z3), an automorphism of the tetrablock"""
    factors = np.stack([np.exp(1j * alpha), np.exp(1j * beta), np.exp(1j * (alpha + beta))], axis=-1)
    return z * factors


def _bounded_polynomial(coeffs: np.ndarray, bound: float) -> np.ndarray:
    """Rescale so the coefficient moduli sum to bound, which bounds the sup norm on the closed disc"""
    return bound * coeffs / np.sum(np.abs(coeffs))


def planted_nu_disc(
    rng: np.random.Generator,
    bound: float = 0.3,
    max_multiplicity: int = 2,
    min_separation: float = 0.25,
) -> Tuple[DiscMap, Dict[complex, int]]:
    """Polynomial disc pi([[g1, u], [v, g2]]) in the tetrablock with f1 f2 - f3 = u v.

    u and v each vanish at one planted point; the returned map gives the
    order of f1 f2 - f3 there.
    """
    while True:
        zeros = random_disc_points(rng, 2, 0.6)
        if abs(zeros[0] - zeros[1]) >= min_separation:
            break
    multiplicity = rng.integers(1, max_multiplicity + 1, size=2)
    u = _bounded_polynomial(P.polyfromroots([zeros[0]] * int(multiplicity[0])), bound)
    v = _bounded_polynomial(P.polyfromroots([zeros[1]] * int(multiplicity[1])), bound)
    g1, g2 = (
        _bounded_polynomial(rng.standard_normal(3) + 1j * rng.standard_normal(3), bound * rng.uniform(0.2, 1.0))
        for _ in range(2)
    )
    f3 = P.polysub(P.polymul(g1, g2), P.polymul(u, v))
    expected = {complex(zeros[0]): int(multiplicity[0]), complex(zeros[1]): int(multiplicity[1])}
    return DiscMap((g1, g2, f3)), expected
