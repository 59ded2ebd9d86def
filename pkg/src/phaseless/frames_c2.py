"""Phase retrieval in C^2: decision, canonical form, trilateration, local solver.

Inner products are <v, w> = v_1 conj(w_1) + v_2 conj(w_2).  A frame is
brought to canonical form with the anchor phi_0 = (p, q):

    A = [[conj(p), conj(q)], [-q, p]],   A phi_0 = (|p|^2 + |q|^2, 0),
    A phi_k = (lam_k, mu_k) = (<phi_k, phi_0>, <phi_k, J conj(phi_0)>),

and the frame does phase retrieval exactly when every mu_k is nonzero and
the ratios beta_k = lam_k / mu_k are not collinear.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .errors import (AmbiguousCollinear, FrameError, Inconsistent, Infeasible, NotCollinear,
                     ZeroAnchor)

DEFAULT_TOL = 1e-10

#: The four-window frame exposed as the "fig1-frame" preset.
FIG1_FRAME = ((1, 0), (1, 1), (-1, 1), (1j, 1))


@dataclass(frozen=True, eq=False)
class FrameC2:
    vectors: np.ndarray

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex).reshape(-1, 2)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    def __len__(self):
        return self.vectors.shape[0]

    def magnitudes(self, z) -> np.ndarray:
        """|<z, phi_k>| for every frame vector."""
        return np.abs(self.vectors.conj() @ np.asarray(z, dtype=complex))

    def transformed(self, A) -> "FrameC2":
        return FrameC2(self.vectors @ np.asarray(A, dtype=complex).T)


def as_frame(frame) -> FrameC2:
    if isinstance(frame, FrameC2):
        return frame
    rows = [getattr(p, "vector", p) for p in frame]
    return FrameC2(rows)


def cor15_frame(l1: complex, l2: complex, l3: complex) -> FrameC2:
    """Frame {(1,0), (l1,1), (l2,1), (l3,1)}."""
    return FrameC2([(1, 0), (l1, 1), (l2, 1), (l3, 1)])


@dataclass(frozen=True, eq=False)
class CanonicalFrame:
    lambdas: np.ndarray
    mus: np.ndarray
    betas: np.ndarray  # nan where mu_k is (numerically) zero
    lambda0_scale: float
    transform: np.ndarray
    tol: float

    @property
    def beta_present(self) -> np.ndarray:
        return ~np.isnan(self.betas)


def canonicalize(frame, tol: float = DEFAULT_TOL) -> CanonicalFrame:
    frame = as_frame(frame)
    phi = frame.vectors
    p, q = phi[0]
    s = abs(p) ** 2 + abs(q) ** 2
    if s == 0:
        raise ZeroAnchor("anchor vector phi_0 is zero; the frame cannot do phase retrieval")
    A = np.array([[np.conj(p), np.conj(q)], [-q, p]])
    lam_mu = phi[1:] @ A.T
    lambdas, mus = lam_mu[:, 0], lam_mu[:, 1]
    # |mu_k| <= |phi_0| |phi_k|, so compare against that bound
    bound = np.sqrt(s) * np.linalg.norm(phi[1:], axis=1)
    present = np.abs(mus) > tol * bound
    betas = np.full(mus.shape, np.nan + 0j)
    betas[present] = lambdas[present] / mus[present]
    return CanonicalFrame(lambdas, mus, betas, float(s), A, tol)


def triangle_area_ratio(a, b, c) -> float:
    """|Im((b - a) conj(c - a))| divided by the squared diameter; 0 for coincident points."""
    scale = max(abs(b - a), abs(c - a), abs(c - b))
    if scale == 0:
        return 0.0
    return abs(((b - a) * np.conj(c - a)).imag) / scale ** 2


def _best_triple(points) -> tuple[tuple[int, int, int], float]:
    best, best_ratio = None, -1.0
    for idx in combinations(range(len(points)), 3):
        r = triangle_area_ratio(*(points[i] for i in idx))
        if r > best_ratio:
            best, best_ratio = idx, r
    return best, best_ratio


class Decision(NamedTuple):
    yes: bool
    reason: str
    betas: np.ndarray
    area_ratio: float

    def __bool__(self):
        return self.yes


def does_phase_retrieval(frame, tol: float = DEFAULT_TOL) -> Decision:
    """Decide whether a frame of C^2 vectors does phase retrieval.

    For four vectors this is the characterisation ``mu_k != 0`` and
    non-collinear ratios.  Longer frames are decided the same way: vectors
    with mu_k = 0 are parallel to the anchor and only repeat its
    information, so the frame does phase retrieval iff some three of the
    remaining ratios are not collinear.
    """
    frame = as_frame(frame)
    if len(frame) < 4:
        return Decision(False, "fewer than four vectors", np.array([]), 0.0)
    canon = canonicalize(frame, tol)
    betas = canon.betas
    present = canon.beta_present
    if not present.all() and len(frame) == 4:
        k = int(np.flatnonzero(~present)[0]) + 1
        return Decision(False, f"mu_{k} vanishes", betas, 0.0)
    pts = betas[present]
    if pts.size < 3:
        return Decision(False, "fewer than three ratios with nonzero mu", betas, 0.0)
    _, ratio = _best_triple(pts)
    if ratio <= tol:
        return Decision(False, "ratios lam_k/mu_k are collinear", betas, ratio)
    return Decision(True, "ok", betas, ratio)


class Trilateration(NamedTuple):
    point: complex
    residual: float


def trilaterate(anchors, distances, tol: float = 1e-9) -> Trilateration:
    """The unique point at the given distances from three non-collinear anchors.

    Differencing the squared-distance equations against the first anchor
    leaves a 2x2 real linear system.
    """
    a = np.asarray(anchors, dtype=complex).reshape(3)
    d = np.asarray(distances, dtype=float).reshape(3)
    if np.any(d < 0):
        raise ValueError("distances must be nonnegative")
    if len({complex(x) for x in a}) < 3:
        raise ValueError("anchors must be pairwise distinct")
    if triangle_area_ratio(*a) <= DEFAULT_TOL:
        raise AmbiguousCollinear("anchors are collinear; the mirror image fits equally well")
    da = a[1:] - a[0]
    M = 2 * np.column_stack([da.real, da.imag])
    # d_0^2 - d_j^2 as a product keeps precision when the radii are large
    rhs = (np.abs(a[1:]) ** 2 - abs(a[0]) ** 2) + (d[0] - d[1:]) * (d[0] + d[1:])
    x, y = np.linalg.solve(M, rhs)
    w = complex(x, y)
    residual = float(np.max(np.abs(np.abs(w - a) - d)))
    scale = max(np.max(np.abs(a[:, None] - a[None, :])), np.max(d))
    if residual > tol * scale:
        raise Inconsistent(f"circles do not intersect in a common point (residual {residual:.3e})")
    return Trilateration(w, residual)


def canonical_phase(v) -> np.ndarray:
    """Rotate v so that its largest-modulus entry is real and nonnegative (lowest index on ties)."""
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    if not mags.any():
        return v.copy()
    k = int(np.argmax(mags >= mags.max() * (1 - 1e-12)))
    return v * (np.conj(v[k]) / mags[k])


class LocalSolution(NamedTuple):
    vector: np.ndarray
    status: str  # "zero", "anchor-null" or "trilaterated"
    residual: float


def local_solve(frame, magnitudes, tol: float = 1e-9) -> LocalSolution:
    """Recover z in C^2, up to a global phase, from |<z, phi_k>| = m_k.

    Works in the canonical coordinates y = A^{-*} z, where
    |<z, phi_0>| = s |y_1| and |<z, phi_k>| = |mu_k| |y_2 + conj(beta_k) y_1|.
    With y_1 = |y_1| > 0 the ratio y_2 / y_1 is trilaterated against the
    anchors -conj(beta_k); when y_1 vanishes |y_2| is read off directly.
    """
    frame = as_frame(frame)
    m = np.asarray(magnitudes, dtype=float).reshape(-1)
    if m.size != len(frame):
        raise ValueError("need one magnitude per frame vector")
    if np.any(m < 0):
        raise ValueError("magnitudes must be nonnegative")
    decision = does_phase_retrieval(frame)
    if not decision:
        raise FrameError(f"frame does not do phase retrieval: {decision.reason}")
    if not m.any():
        return LocalSolution(np.zeros(2, dtype=complex), "zero", 0.0)
    canon = canonicalize(frame)
    norms = np.linalg.norm(frame.vectors, axis=1)
    scale = np.max(m / norms)
    s = canon.lambda0_scale
    idx = np.flatnonzero(canon.beta_present)
    if m[0] / norms[0] <= tol * scale:
        k = idx[np.argmax(np.abs(canon.mus[idx]))]
        y = np.array([0.0, m[k + 1] / abs(canon.mus[k])], dtype=complex)
        status = "anchor-null"
    else:
        r = m[0] / s
        (i, j, l), _ = _best_triple(canon.betas[idx])
        sel = idx[[i, j, l]]
        anchors = -np.conj(canon.betas[sel])
        radii = m[sel + 1] / (np.abs(canon.mus[sel]) * r)
        try:
            w = trilaterate(anchors, radii, tol).point
        except Inconsistent as exc:
            raise Infeasible(str(exc)) from exc
        y = np.array([r, r * w])
        status = "trilaterated"
    z = canon.transform.conj().T @ y
    residual = float(np.max(np.abs(frame.magnitudes(z) - m)) / np.max(m))
    if residual > tol:
        raise Infeasible(f"magnitudes not realisable (relative residual {residual:.3e})",
                         residual=residual)
    return LocalSolution(canonical_phase(z), status, residual)


def ambiguity_pair(frame, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Two non-equivalent vectors with identical frame magnitudes.

    In canonical coordinates the vectors (-1, conj(p)) and (-1, conj(q)),
    with q the reflection of p across the line carrying the ratios beta_k,
    have the same magnitudes; they are mapped back through A^*.
    """
    frame = as_frame(frame)
    try:
        pr = bool(does_phase_retrieval(frame, tol))
    except ZeroAnchor:
        pr = False
    if pr:
        raise NotCollinear("frame does phase retrieval; no ambiguity pair exists")
    phi = frame.vectors
    nonzero = np.flatnonzero(np.linalg.norm(phi, axis=1) > 0)
    if nonzero.size == 0:
        return np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    # a zero anchor carries no information; re-anchor on the first nonzero vector
    order = np.concatenate([[nonzero[0]], np.delete(np.arange(len(phi)), nonzero[0])])
    canon = canonicalize(FrameC2(phi[order]), tol)
    pts = canon.betas[canon.beta_present]
    if pts.size == 0:
        base, direction = 0j, 1 + 0j
    else:
        base = pts[0]
        far = pts[np.argmax(np.abs(pts - base))]
        direction = (far - base) / abs(far - base) if far != base else 1 + 0j
        if pts.size >= 3 and triangle_area_ratio(*pts[list(_best_triple(pts)[0])]) > tol:
            raise NotCollinear("ratios are not collinear")  # pragma: no cover
    offset = 1j * direction
    p, q = base + offset, base - offset
    y_z = np.array([-1, np.conj(p)])
    y_w = np.array([-1, np.conj(q)])
    A_star = canon.transform.conj().T
    return A_star @ y_z, A_star @ y_w
