"""Grassmann manifold primitives.

A point on Gr(n, r) is an r-dimensional linear subspace of R^n, stored as an
orthonormal basis matrix. This module provides orthonormalization with
numerical rank detection, principal angles between subspaces, five
principal-angle distance metrics, projector algebra, and geodesic
interpolation between subspaces of equal rank.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllColumnsZeroError,
    AmbientDimMismatchError,
    MartinDivergentError,
    NonUniqueGeodesicError,
    RankMismatchError,
)

__all__ = [
    "DEFAULT_RANK_TOL",
    "GrassmannMetric",
    "Subspace",
    "Projector",
    "PrincipalAngles",
    "orthonormalize",
    "to_projector",
    "principal_angles",
    "distance",
    "distance_from_angles",
    "geodesic_interpolate",
]

DEFAULT_RANK_TOL = 1e-10

_ORTHO_TOL = 1e-10
# Any principal angle this close to pi/2 makes the Martin metric blow up and
# the geodesic between the subspaces non-unique.
_RIGHT_ANGLE_GUARD = 1e-9


class GrassmannMetric(enum.Enum):
    """The five supported subspace distances, all functions of principal angles."""

    GEODESIC = "geodesic"
    CHORDAL = "chordal"
    FUBINI_STUDY = "fubini-study"
    MARTIN = "martin"
    PROCRUSTES = "procrustes"

    @classmethod
    def parse(cls, name: str) -> "GrassmannMetric":
        key = name.strip().lower().replace("_", "").replace("-", "")
        for metric in cls:
            if metric.value.replace("-", "") == key:
                return metric
        raise ValueError(
            f"unknown metric {name!r}; expected one of "
            + ", ".join(m.value for m in cls)
        )


@dataclass(frozen=True)
class Subspace:
    """An r-dimensional subspace of R^n held as an n x r orthonormal basis."""

    basis: np.ndarray

    def __post_init__(self) -> None:
        basis = np.asarray(self.basis, dtype=float)
        if basis.ndim != 2:
            raise ValueError(f"basis must be 2-d, got shape {basis.shape}")
        n, r = basis.shape
        if not 1 <= r <= n:
            raise ValueError(f"need 1 <= rank <= ambient dim, got {r} and {n}")
        gram = basis.T @ basis
        err = np.linalg.norm(gram - np.eye(r))
        if err > _ORTHO_TOL:
            raise ValueError(f"basis columns are not orthonormal (defect {err:.3e})")
        basis = basis.copy()
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class Projector:
    """Orthogonal projection matrix onto a subspace: symmetric and idempotent."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.matrix, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"projector must be square, got shape {p.shape}")
        if np.linalg.norm(p - p.T) > 1e-10:
            raise ValueError("projector is not symmetric")
        if np.linalg.norm(p @ p - p) > 1e-8:
            raise ValueError("projector is not idempotent")
        trace = float(np.trace(p))
        if abs(trace - round(trace)) > 1e-8:
            raise ValueError(f"projector trace {trace} is not near an integer")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "matrix", p)

    @property
    def ambient_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rank(self) -> int:
        return int(round(float(np.trace(self.matrix))))


@dataclass(frozen=True)
class PrincipalAngles:
    """Principal angles between two subspaces, ascending, in [0, pi/2]."""

    angles: np.ndarray

    def __post_init__(self) -> None:
        angles = np.asarray(self.angles, dtype=float)
        if angles.ndim != 1 or angles.size < 1:
            raise ValueError("angles must be a nonempty 1-d array")
        if np.any(angles < -1e-12) or np.any(angles > math.pi / 2 + 1e-12):
            raise ValueError("principal angles must lie in [0, pi/2]")
        if np.any(np.diff(angles) < -1e-12):
            raise ValueError("principal angles must be sorted ascending")
        angles = np.clip(angles, 0.0, math.pi / 2)
        angles.setflags(write=False)
        object.__setattr__(self, "angles", angles)

    def __len__(self) -> int:
        return self.angles.size

    @property
    def count(self) -> int:
        return self.angles.size


def orthonormalize(columns: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> Subspace:
    """Return the span of the given columns as a Subspace.

    The numerical rank is the number of singular values above tol times the
    largest one, so near-dependent columns are dropped rather than kept as
    noise directions.
    """
    a = np.asarray(columns, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a nonempty 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("input contains non-finite values")
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] <= np.finfo(float).tiny:
        raise AllColumnsZeroError(
            f"all {a.shape[1]} columns are numerically zero; no span to represent"
        )
    rank = int(np.count_nonzero(s > tol * s[0]))
    return Subspace(u[:, :rank])


def to_projector(subspace: Subspace) -> Projector:
    return Projector(subspace.basis @ subspace.basis.T)


def principal_angles(x: Subspace, y: Subspace) -> PrincipalAngles:
    """Principal angles between x and y, ascending; min(rank_x, rank_y) values.

    Angles are the arccosines of the singular values of Qx^T Qy. Because
    arccos cannot resolve angles below ~1e-8, angles whose cosine exceeds
    sqrt(1/2) are recomputed from the singular values of Qy - Qx (Qx^T Qy),
    which equal the sines and stay accurate down to machine precision.
    """
    if x.ambient_dim != y.ambient_dim:
        raise AmbientDimMismatchError(
            f"ambient dims differ: {x.ambient_dim} vs {y.ambient_dim}"
        )
    qx, qy = x.basis, y.basis
    # The wider basis goes first; equal widths are ordered by raw bytes so
    # the result is bit-identical under argument swap.
    if qx.shape[1] < qy.shape[1] or (
        qx.shape[1] == qy.shape[1] and qx.tobytes() > qy.tobytes()
    ):
        qx, qy = qy, qx
    m = qx.T @ qy
    cosines = np.clip(np.linalg.svd(m, compute_uv=False), 0.0, 1.0)
    theta = np.arccos(cosines)
    small = cosines**2 >= 0.5
    if np.any(small):
        sines = np.linalg.svd(qy - qx @ m, compute_uv=False)[::-1]
        theta[small] = np.arcsin(np.clip(sines[small], 0.0, 1.0))
    return PrincipalAngles(np.sort(theta))


def distance_from_angles(
    angles: PrincipalAngles | np.ndarray, metric: GrassmannMetric
) -> float:
    """Evaluate one of the five metrics on a vector of principal angles."""
    if isinstance(angles, PrincipalAngles):
        theta = angles.angles
    else:
        theta = PrincipalAngles(np.asarray(angles, dtype=float)).angles
    if metric is GrassmannMetric.GEODESIC:
        return float(np.sqrt(np.sum(theta**2)))
    if metric is GrassmannMetric.CHORDAL:
        return float(np.sqrt(np.sum(np.sin(theta) ** 2)))
    if metric is GrassmannMetric.FUBINI_STUDY:
        product = float(np.clip(np.prod(np.cos(theta)), 0.0, 1.0))
        return float(np.arccos(product))
    if metric is GrassmannMetric.MARTIN:
        if np.any(theta >= math.pi / 2 - _RIGHT_ANGLE_GUARD):
            raise MartinDivergentError(
                "a principal angle is within 1e-9 of pi/2; the Martin metric diverges"
            )
        return float(np.sqrt(-2.0 * np.sum(np.log(np.cos(theta)))))
    if metric is GrassmannMetric.PROCRUSTES:
        return float(2.0 * np.sqrt(np.sum(np.sin(theta / 2.0) ** 2)))
    raise ValueError(f"unhandled metric {metric!r}")


def distance(x: Subspace, y: Subspace, metric: GrassmannMetric) -> float:
    """Distance between two subspaces under the chosen metric."""
    return distance_from_angles(principal_angles(x, y), metric)


def geodesic_interpolate(x: Subspace, y: Subspace, t: float) -> Subspace:
    """Point at parameter t on the geodesic from x (t=0) to y (t=1).

    Requires equal ranks and every principal angle strictly below pi/2;
    otherwise the geodesic is not unique.
    """
    if x.ambient_dim != y.ambient_dim:
        raise AmbientDimMismatchError(
            f"ambient dims differ: {x.ambient_dim} vs {y.ambient_dim}"
        )
    if x.rank != y.rank:
        raise RankMismatchError(f"ranks differ: {x.rank} vs {y.rank}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    u, s, vt = np.linalg.svd(x.basis.T @ y.basis)
    cosines = np.clip(s, 0.0, 1.0)
    theta = np.arccos(cosines)
    if np.any(theta >= math.pi / 2 - _RIGHT_ANGLE_GUARD):
        raise NonUniqueGeodesicError(
            "a principal angle is within 1e-9 of pi/2; no unique geodesic exists"
        )
    px = x.basis @ u
    py = y.basis @ vt.T
    # Unit directions orthogonal to px along which each principal vector
    # rotates; where theta is ~0 the direction is irrelevant and left zero.
    w = py - px * cosines
    norms = np.linalg.norm(w, axis=0)
    nonzero = norms > np.finfo(float).tiny
    w[:, nonzero] = w[:, nonzero] / norms[nonzero]
    w[:, ~nonzero] = 0.0
    cols = px * np.cos(t * theta) + w * np.sin(t * theta)
    return orthonormalize(cols)
