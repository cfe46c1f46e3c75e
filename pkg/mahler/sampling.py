"""
Seeded random streams and uniform samplers.

Every stream is a Philox counter-based generator keyed by ``(seed, index)``,
so shard ``i`` of a Monte Carlo run draws the same numbers whichever thread
runs it and however many threads there are.
"""

from __future__ import annotations

import hashlib

import numpy as np
from scipy.linalg import solve_triangular

from mahler.bodies.families import Ellipsoid

_SEED_MASK = (1 << 64) - 1


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for stream ``index`` under ``seed``."""
    ss = np.random.SeedSequence(int(seed) & _SEED_MASK, spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, label: str) -> int:
    """64-bit seed for a labelled sub-computation (BLAKE2b of seed and label)."""
    digest = hashlib.blake2b(f"{int(seed)}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def uniform_ball(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """``count`` points uniform in the Euclidean unit ball of R^n."""
    z = rng.standard_normal((count, n))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    radii = rng.random(count) ** (1.0 / n)
    return z * radii[:, None]


def uniform_ellipsoid(rng: np.random.Generator, count: int, E: Ellipsoid) -> np.ndarray:
    """
    ``count`` points uniform in E = {x : xᵀMx ≤ 1}.

    With M = L Lᵀ, x = L⁻ᵀu maps the unit ball onto E.
    """
    U = uniform_ball(rng, count, E.dim)
    return solve_triangular(E.cholesky.T, U.T, lower=False).T
