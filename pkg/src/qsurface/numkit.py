"""Seeded sampling, 2x2 linear algebra and chi-square helpers."""
from __future__ import annotations

import hashlib
import math

import numpy as np
from scipy import special


class InvalidParameterError(ValueError):
    """A distribution or numerical routine received an out-of-range parameter."""


class DecompositionError(ValueError):
    """A matrix is not symmetric positive definite."""


class Rng:
    """Explicitly seeded random stream (PCG64 bit generator, ziggurat normals).

    Every sampler in the package takes one of these; there is no global state.
    """

    def __init__(self, seed: int):
        if seed < 0 or seed >= 2**64:
            raise InvalidParameterError(f"seed must fit in 64 bits, got {seed}")
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def derive(self, tag: str) -> "Rng":
        """Independent child stream from (seed, tag); does not touch this stream."""
        digest = hashlib.sha256(f"{self.seed}:{tag}".encode()).digest()
        return Rng(int.from_bytes(digest[:8], "little"))

    def normal(self, size=None) -> np.ndarray | float:
        return self._gen.standard_normal(size)

    def exponential(self, scale: float, size=None) -> np.ndarray | float:
        if not scale > 0:
            raise InvalidParameterError(f"exponential scale must be positive, got {scale}")
        return self._gen.exponential(scale, size)

    def uniform(self, low=0.0, high=1.0, size=None) -> np.ndarray | float:
        return self._gen.uniform(low, high, size)


def sample_standard_normal(rng: Rng) -> float:
    return float(rng.normal())


def sample_exponential(rng: Rng, scale: float) -> float:
    return float(rng.exponential(scale))


def chi2_cdf(x, dof: int):
    """Regularized lower incomplete gamma P(dof/2, x/2)."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise InvalidParameterError("chi2_cdf is defined for x >= 0")
    _check_dof(dof)
    if dof == 2:
        out = -np.expm1(-xa / 2.0)
    else:
        out = special.gammainc(dof / 2.0, xa / 2.0)
    return float(out) if np.ndim(out) == 0 else out


def chi2_inverse_cdf(tau, dof: int):
    """Inverse of :func:`chi2_cdf`; closed form for two degrees of freedom."""
    ta = np.asarray(tau, dtype=float)
    if np.any((ta <= 0) | (ta >= 1)):
        raise InvalidParameterError("chi2_inverse_cdf needs 0 < tau < 1")
    _check_dof(dof)
    if dof == 2:
        out = -2.0 * np.log1p(-ta)
    else:
        out = 2.0 * special.gammaincinv(dof / 2.0, ta)
    return float(out) if np.ndim(out) == 0 else out


def _check_dof(dof):
    if int(dof) != dof or dof < 1:
        raise InvalidParameterError(f"degrees of freedom must be a positive integer, got {dof}")


def cholesky2(cov) -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive definite 2x2 matrix."""
    c = np.asarray(cov, dtype=float)
    if c.shape != (2, 2):
        raise InvalidParameterError(f"expected a 2x2 matrix, got shape {c.shape}")
    a, b, d = c[0, 0], c[1, 0], c[1, 1]
    if not math.isclose(c[0, 1], b, rel_tol=1e-12, abs_tol=1e-15):
        raise DecompositionError("matrix is not symmetric")
    if a <= 0:
        raise DecompositionError("matrix is not positive definite")
    l11 = math.sqrt(a)
    l21 = b / l11
    rem = d - l21 * l21
    if rem <= 0:
        raise DecompositionError("matrix is not positive definite")
    return np.array([[l11, 0.0], [l21, math.sqrt(rem)]])


def inv2(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det == 0 or not np.isfinite(det):
        raise DecompositionError("singular 2x2 matrix")
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det


def is_spd2(m) -> bool:
    m = np.asarray(m, dtype=float)
    return bool(m[0, 1] == m[1, 0] and m[0, 0] > 0 and m[0, 0] * m[1, 1] - m[0, 1] ** 2 > 0)
