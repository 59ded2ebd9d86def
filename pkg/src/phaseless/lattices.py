"""Shifted lattices v + A Z^2, finite windows of them, and density predicates."""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil, pi

import numpy as np
from scipy.spatial.distance import pdist

MEMBERSHIP_TOL = 1e-9
# relative slack so that points on the boundary circle survive rounding
_RADIUS_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class ShiftedLattice:
    shift: np.ndarray
    generator: np.ndarray

    def __post_init__(self):
        v = np.array(self.shift, dtype=float).reshape(2)
        A = np.array(self.generator, dtype=float).reshape(2, 2)
        if A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0] == 0:
            raise ValueError("lattice generator must be invertible")
        v.setflags(write=False)
        A.setflags(write=False)
        object.__setattr__(self, "shift", v)
        object.__setattr__(self, "generator", A)

    @classmethod
    def from_dict(cls, d: dict) -> "ShiftedLattice":
        return cls(d.get("shift", (0.0, 0.0)), d["generator"])

    def to_dict(self) -> dict:
        return {"shift": self.shift.tolist(), "generator": self.generator.tolist()}

    @property
    def det(self) -> float:
        # explicit ad - bc: exact for the diagonal and triangular generators used here
        (a, b), (c, d) = self.generator
        return float(a * d - b * c)

    def coordinates(self, points) -> np.ndarray:
        """Solve v + A k = x for k (not rounded)."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.linalg.solve(self.generator, (pts - self.shift).T).T

    def contains(self, points) -> np.ndarray:
        k = self.coordinates(points)
        return np.all(np.abs(k - np.round(k)) <= MEMBERSHIP_TOL, axis=1)

    def point(self, k) -> np.ndarray:
        return self.shift + self.generator @ np.asarray(k, dtype=float)


@dataclass(frozen=True, eq=False)
class PointSet:
    points: np.ndarray
    region_radius: float

    def __post_init__(self):
        p = np.array(self.points, dtype=float).reshape(-1, 2)
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    def __len__(self):
        return self.points.shape[0]

    def as_complex(self) -> np.ndarray:
        """Points as x + i y (no time-frequency conjugation)."""
        return self.points[:, 0] + 1j * self.points[:, 1]

    def union(self, other: "PointSet", decimals: int = 9) -> "PointSet":
        """Set union; points equal after rounding to ``decimals`` are merged."""
        both = np.vstack([self.points, other.points])
        _, idx = np.unique(np.round(both, decimals), axis=0, return_index=True)
        return PointSet(both[np.sort(idx)], max(self.region_radius, other.region_radius))


def enumerate_points(lattice: ShiftedLattice, radius: float) -> PointSet:
    """All lattice points of Euclidean norm <= radius, lexicographic in k."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    A_inv = np.linalg.inv(lattice.generator)
    # |k - k_0| <= ||A^{-1}|| radius around the preimage k_0 of the origin
    k0 = -A_inv @ lattice.shift
    reach = np.linalg.norm(A_inv, 2) * radius
    lo = np.floor(k0 - reach).astype(int) - 1
    hi = np.ceil(k0 + reach).astype(int) + 1
    k1, k2 = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1), indexing="ij")
    ks = np.column_stack([k1.ravel(), k2.ravel()])
    pts = lattice.shift + ks @ lattice.generator.T
    keep = np.linalg.norm(pts, axis=1) <= radius * (1 + _RADIUS_SLACK)
    return PointSet(pts[keep], radius)


def density(lattice: ShiftedLattice) -> float:
    return 1.0 / abs(lattice.det)


def conjugate(obj):
    """Reflect across the real axis: (x, y) -> (x, -y)."""
    flip = np.diag([1.0, -1.0])
    if isinstance(obj, ShiftedLattice):
        return ShiftedLattice(flip @ obj.shift, flip @ obj.generator)
    if isinstance(obj, PointSet):
        return PointSet(obj.points @ flip, obj.region_radius)
    raise TypeError(f"cannot conjugate {type(obj).__name__}")


def gamma_decompositions(alpha: float, beta: float
                         ) -> tuple[ShiftedLattice, ShiftedLattice, ShiftedLattice]:
    """Lambda = (0, beta/2) + alpha Z x beta Z and its two half-density sub-lattices.

    Both Gamma_1 and Gamma_2 satisfy Gamma u conj(Gamma) = Lambda.
    """
    if alpha == 0 or beta == 0:
        raise ValueError("alpha and beta must be nonzero")
    v = (0.0, beta / 2)
    lam = ShiftedLattice(v, [[alpha, 0.0], [0.0, beta]])
    g1 = ShiftedLattice(v, [[alpha, 0.0], [0.0, 2 * beta]])
    g2 = ShiftedLattice(v, [[alpha, 0.0], [beta, 2 * beta]])
    return lam, g1, g2


def real_sampling_lattice(alpha: float, beta: float) -> ShiftedLattice:
    """(0, beta/4) + alpha Z x beta Z, whose union with its mirror image has twice its density."""
    return ShiftedLattice((0.0, beta / 4), [[alpha, 0.0], [0.0, beta]])


def decomposition_parameters(lattice: ShiftedLattice):
    """(alpha, beta) if the lattice equals (0, beta/2) + alpha Z x beta Z, else None."""
    A = lattice.generator
    if A[0, 1] != 0 or A[1, 0] != 0:
        return None
    alpha, beta = float(A[0, 0]), float(A[1, 1])
    k = lattice.coordinates([(0.0, beta / 2)])[0]
    if np.all(np.abs(k - np.round(k)) <= MEMBERSHIP_TOL):
        return alpha, beta
    return None


def _integer_keys(lattice: ShiftedLattice, points: PointSet) -> set:
    k = np.round(lattice.coordinates(points.points)).astype(int)
    return {tuple(row) for row in k}


def verify_decomposition(lam: ShiftedLattice, gamma: ShiftedLattice, radius: float) -> dict:
    """Compare Gamma u conj(Gamma) with Lambda as finite sets on a disc.

    Points are compared through their integer coordinates in Lambda, after
    checking that every point of Gamma and of its mirror image lies in Lambda.
    """
    window = enumerate_points(lam, radius)
    g = enumerate_points(gamma, radius)
    g_bar = conjugate(g)
    inside = bool(lam.contains(g.points).all() and lam.contains(g_bar.points).all())
    union = _integer_keys(lam, g) | _integer_keys(lam, g_bar)
    return {
        "radius": radius,
        "lambda_points": len(window),
        "gamma_points": len(g),
        "union_points": len(union),
        "gamma_in_lambda": inside,
        "equal": inside and union == _integer_keys(lam, window),
    }


def perelomov_uniqueness(lattice: ShiftedLattice, alpha_fock: float, rtol: float = 1e-12) -> bool:
    """Whether the (shifted) lattice is a set of uniqueness for F^2_alpha.

    The threshold density >= alpha/pi is inclusive; ``rtol`` absorbs rounding
    in |det A| so that exact boundary cases such as (1/2)Z^2 with alpha = 4 pi
    come out as uniqueness sets.
    """
    if alpha_fock <= 0:
        raise ValueError("alpha must be positive")
    return density(lattice) >= (alpha_fock / pi) * (1 - rtol)


def separation_and_density_window(points: PointSet) -> tuple[float, float]:
    """Minimum pairwise distance and the window estimate #points / (pi R^2).

    The second number is an estimate for the given disc only, not the lower
    Beurling density.
    """
    if len(points) < 2:
        raise ValueError("need at least two points")
    gap = float(pdist(points.points).min())
    return gap, len(points) / (pi * points.region_radius ** 2)


def min_radius_for_count(lattice: ShiftedLattice, count: int) -> float:
    """A radius on a 0.05 grid, near the smallest, whose window holds more than ``count`` points."""
    r = max(0.05, 0.05 * ceil(0.8 * np.sqrt(count / (pi * density(lattice))) / 0.05))
    while len(enumerate_points(lattice, r)) <= count:
        r += 0.05
    return round(r, 10)
