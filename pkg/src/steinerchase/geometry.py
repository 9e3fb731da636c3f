"""Euclidean primitives: half-spaces, projections, reflections, sphere sampling.

All vectors are 1-d float64 numpy arrays. A half-space is stored in normalized
form {x : <normal, x> >= offset} with a unit normal, so distances and
projections are plain inner products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ZERO_NORMAL_TOL = 1e-14
UNIT_NORM_TOL = 1e-12


class ZeroNormalError(ValueError):
    """Raised for a normal vector too short to define a half-space.

    A (near-)zero normal encodes either the whole space (offset <= 0) or the
    empty set (offset > 0); neither is a usable request.
    """


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Validate and return ``x`` as a finite float64 1-d array (copied)."""
    v = np.array(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("expected a 1-d vector, got shape %s" % (v.shape,))
    if v.size == 0:
        raise ValueError("expected a nonempty vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    if dim is not None and v.shape[0] != dim:
        raise ValueError("expected dimension %d, got %d" % (dim, v.shape[0]))
    return v


def membership_tol(x: np.ndarray) -> float:
    """Default membership tolerance at ``x``: 1e-9 * max(1, ||x||)."""
    return 1e-9 * max(1.0, float(np.linalg.norm(x)))


@dataclass(frozen=True)
class HalfSpace:
    """Normalized half-space {x : <normal, x> >= offset}, ||normal|| = 1."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = as_vector(self.normal)
        if abs(float(np.linalg.norm(n)) - 1.0) > UNIT_NORM_TOL:
            raise ValueError("HalfSpace normal must be unit length; "
                             "use normalize_halfspace for raw data")
        if not np.isfinite(self.offset):
            raise ValueError("HalfSpace offset must be finite")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dimension(self) -> int:
        return self.normal.shape[0]

    def signed_gap(self, x: np.ndarray) -> float:
        """<normal, x> - offset; negative means x is outside."""
        return float(self.normal @ x) - self.offset

    def contains(self, x: np.ndarray, tol: float | None = None) -> bool:
        if tol is None:
            tol = membership_tol(x)
        return self.signed_gap(x) >= -tol


def normalize_halfspace(a, b: float) -> HalfSpace:
    """Build a HalfSpace from raw data {x : <a, x> >= b}, rescaling by ||a||."""
    v = as_vector(a)
    nrm = float(np.linalg.norm(v))
    if nrm <= ZERO_NORMAL_TOL:
        raise ZeroNormalError(
            "normal has norm %.3e <= %.1e; a zero normal encodes the whole "
            "space or the empty set, not a usable half-space" % (nrm, ZERO_NORMAL_TOL)
        )
    if not np.isfinite(b):
        raise ValueError("offset must be finite")
    return HalfSpace(v / nrm, float(b) / nrm)


def project_halfspace(x: np.ndarray, hs: HalfSpace) -> np.ndarray:
    """Euclidean projection of x onto hs; returns x unchanged when feasible."""
    x = as_vector(x, hs.dimension)
    gap = hs.signed_gap(x)
    if gap >= 0.0:
        return x
    return x - gap * hs.normal


def reflect(x: np.ndarray, hs: HalfSpace) -> np.ndarray:
    """Mirror image of x across the boundary hyperplane of hs."""
    x = as_vector(x, hs.dimension)
    return x - 2.0 * hs.signed_gap(x) * hs.normal


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball, radius >= 0."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_vector(self.center)
        if not np.isfinite(self.radius) or self.radius < 0.0:
            raise ValueError("Ball radius must be finite and >= 0")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dimension(self) -> int:
        return self.center.shape[0]


def sample_unit_sphere_batch(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n uniform points on S^(d-1), shape (n, d): iid Gaussians, normalized.

    Draws are consumed from ``rng`` sequentially, so a fixed seed gives a fixed
    sample regardless of how callers chunk their requests.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    g = rng.standard_normal((n, d))
    nrm = np.sqrt(np.einsum("ij,ij->i", g, g))
    # Resample the (measure-zero) degenerate rows rather than dividing by ~0.
    bad = nrm < 1e-12
    while np.any(bad):
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        nrm[bad] = np.sqrt(np.einsum("ij,ij->i", g[bad], g[bad]))
        bad = nrm < 1e-12
    return g / nrm[:, None]


def sample_unit_sphere(d: int, rng: np.random.Generator) -> np.ndarray:
    """One uniform point on S^(d-1). In d=1 this is a fair +-1 coin."""
    return sample_unit_sphere_batch(d, 1, rng)[0]


def worker_stream(master_seed: int, worker_index: int) -> np.random.Generator:
    """Independent per-worker stream derived from (master seed, worker index)."""
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([int(master_seed), int(worker_index)])
    ))
