"""Signal recovery from multi-window spectrogram samples.

The pipeline has two steps.  At every sample point the window family is a
frame of C^2 that does phase retrieval, so the pair (V_{h0} f, V_{h1} f) is
recovered up to a point-dependent phase.  That pair fixes the
phase-invariant quantities u = |F|^2 and w = conj(F) F' of the Bargmann
transform F at z = x - i omega.  Any admissible polynomial P then obeys the
linear equations u_j P'(z_j) - w_j P(z_j) = 0, whose solution space is the
line through F once enough points are available.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import pi, sqrt
from typing import Optional

import numpy as np

from .errors import Ambiguous, FrameError, Infeasible, RealityViolated, SizingError
from .frames_c2 import FrameC2, as_frame, canonical_phase, does_phase_retrieval, local_solve
from .hermite_bargmann import (BargmannPoly, HermiteSignal, bargmann, bargmann_scale,
                               stft_values, tf_to_complex)
from .lattices import PointSet

GAP_THRESHOLD = 1e3
USABLE_U = 1e-12
REALITY_FACTOR = 10.0


@dataclass(frozen=True, eq=False)
class SampleSet:
    frame: FrameC2
    points: PointSet
    magnitudes: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.array(self.magnitudes, dtype=float).reshape(len(self.points), len(self.frame))
        if np.any(m < 0):
            raise ValueError("magnitudes must be nonnegative")
        m.setflags(write=False)
        object.__setattr__(self, "magnitudes", m)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True, eq=False)
class PhaseInvariantData:
    z: np.ndarray
    u: np.ndarray
    w: np.ndarray
    dF_sq: np.ndarray

    def mirrored(self) -> "PhaseInvariantData":
        """Data at conj(z) for a real signal: u(conj z) = u(z), w(conj z) = conj(w(z))."""
        z = np.concatenate([self.z, np.conj(self.z)])
        u = np.concatenate([self.u, self.u])
        w = np.concatenate([self.w, np.conj(self.w)])
        d = np.concatenate([self.dF_sq, self.dF_sq])
        _, keep = np.unique(np.round(np.column_stack([z.real, z.imag]), 9), axis=0,
                            return_index=True)
        keep = np.sort(keep)
        return PhaseInvariantData(z[keep], u[keep], w[keep], d[keep])


@dataclass
class ReconstructionReport:
    recovered: Optional[HermiteSignal]
    status: str  # unique | zero_signal | ambiguous | infeasible
    nullspace_gap: float
    residual: float
    phase_free: bool = True
    message: str = ""

    def to_dict(self) -> dict:
        coeffs = None
        if self.recovered is not None:
            coeffs = [[float(c.real), float(c.imag)] for c in self.recovered.coeffs]
        return {
            "status": self.status,
            "recovered": coeffs,
            "nullspace_gap": _finite_or_str(self.nullspace_gap),
            "residual": _finite_or_str(self.residual),
            "phase_free": self.phase_free,
            "message": self.message,
        }


def _finite_or_str(x: float):
    x = float(x)
    return x if np.isfinite(x) else str(x)


def sample(signal: HermiteSignal, frame, points: PointSet, meta: Optional[dict] = None
           ) -> SampleSet:
    frame = as_frame(frame)
    mags = np.abs(stft_values(signal, frame.vectors, points.points))
    return SampleSet(frame, points, mags, dict(meta or {}))


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("PHASELESS_THREADS", "1")))
    except ValueError:
        return 1


def local_recovery(samples: SampleSet, tol: float = 1e-9) -> PhaseInvariantData:
    """Per-point recovery of u = |F(z)|^2, w = conj(F(z)) F'(z) and |F'(z)|^2."""
    decision = does_phase_retrieval(samples.frame)
    if not decision:
        raise FrameError(f"window family does not do phase retrieval: {decision.reason}")
    n = len(samples)

    def solve_at(j):
        try:
            return local_solve(samples.frame, samples.magnitudes[j], tol).vector
        except Infeasible as exc:
            x, om = samples.points.points[j]
            raise Infeasible(f"{exc} at (x, omega) = ({x:g}, {om:g})",
                             point=(float(x), float(om)), residual=exc.residual) from exc

    threads = _thread_count()
    if threads > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pairs = np.array(list(pool.map(solve_at, range(n))))
    else:
        pairs = np.array([solve_at(j) for j in range(n)]).reshape(n, 2)
    z = tf_to_complex(samples.points.points)
    a, b = pairs[:, 0], pairs[:, 1]
    weight = np.exp(pi * np.abs(z) ** 2)
    u = weight * np.abs(a) ** 2
    w = weight * (np.conj(a) * b + pi * np.conj(z) * np.abs(a) ** 2)
    dF_sq = weight * np.abs(b + pi * np.conj(z) * a) ** 2
    return PhaseInvariantData(z, u, w, dF_sq)


def _system(data: PhaseInvariantData, degree_bound: int, rows: np.ndarray) -> np.ndarray:
    """Row-normalised equations u_j P'(z_j) - w_j P(z_j) = 0 in Hermite coefficients."""
    n = np.arange(degree_bound + 1)
    z = data.z[rows][:, None]
    scale = bargmann_scale(n)[None, :]
    powers = z ** n
    deriv = np.zeros_like(powers)
    deriv[:, 1:] = n[1:] * z ** (n[1:] - 1)
    M = (data.u[rows][:, None] * deriv - data.w[rows][:, None] * powers) * scale
    norms = np.linalg.norm(M, axis=1, keepdims=True)
    return M / np.where(norms > 0, norms, 1.0)


def _null_analysis(M: np.ndarray, n_unknowns: int) -> tuple[np.ndarray, float, float]:
    """Smallest right singular vector, gap s[-2]/s[-1] and relative residual s[-1]/s[0]."""
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    s = np.concatenate([s, np.zeros(max(0, n_unknowns - s.size))])
    v = np.conj(vh[-1])
    smallest, second = s[n_unknowns - 1], s[n_unknowns - 2] if n_unknowns > 1 else np.inf
    if smallest == 0:
        gap = np.inf if second > 0 else 1.0
    else:
        gap = second / smallest
    resid = smallest / s[0] if s[0] > 0 else 0.0
    return v, float(gap), float(resid)


def _fix_modulus(v: np.ndarray, data: PhaseInvariantData, rows: np.ndarray) -> np.ndarray:
    j = rows[np.argmax(data.u[rows])]
    F = BargmannPoly(v * bargmann_scale(np.arange(v.size)))
    value = abs(F(data.z[j]))
    if value == 0:
        raise Infeasible("null vector vanishes at the largest-u point")
    return v * (sqrt(data.u[j]) / value)


def _data_residual(c: np.ndarray, data: PhaseInvariantData) -> float:
    F = bargmann(HermiteSignal(c))
    Fz, dFz = F(data.z), F.derivative()(data.z)
    ru = np.max(np.abs(np.abs(Fz) ** 2 - data.u)) / np.max(data.u)
    # max u keeps the scale meaningful when F' vanishes (F constant)
    w_scale = max(np.max(np.sqrt(data.u * data.dF_sq)), np.max(data.u))
    rw = np.max(np.abs(np.conj(Fz) * dFz - data.w)) / w_scale
    return float(max(ru, rw))


def _check_budget(n_points: int, n_usable: int, degree_bound: int):
    if n_usable < degree_bound + 2 or n_points <= 4 * degree_bound:
        raise SizingError(
            f"{n_points} points ({n_usable} usable) are too few for degree {degree_bound}: "
            f"need more than {4 * degree_bound} points and at least {degree_bound + 2} usable")


def solve_bargmann(data: PhaseInvariantData, degree_bound: int, tol: float = 1e-8,
                   real: bool = False, check_budget: bool = True
                   ) -> tuple[BargmannPoly, dict]:
    """Recover F (up to a unimodular factor) from phase-invariant data.

    Returns the polynomial together with a report fragment holding
    ``status``, ``nullspace_gap``, ``residual`` (data mismatch) and
    ``system_residual`` (smallest over largest singular value).  With
    ``real`` the Hermite coefficients are constrained to be real.
    """
    N = int(degree_bound)
    if N < 0:
        raise ValueError("degree bound must be nonnegative")
    u_max = float(np.max(data.u)) if data.u.size else 0.0
    if u_max <= tol ** 2:
        return BargmannPoly(np.zeros(N + 1)), {
            "status": "zero_signal", "nullspace_gap": float("inf"), "residual": 0.0,
            "system_residual": 0.0}
    rows = np.flatnonzero(data.u > USABLE_U * u_max)
    if check_budget:
        _check_budget(data.z.size, rows.size, N)
    M = _system(data, N, rows)
    if real:
        M = np.vstack([M.real, M.imag])
    v, gap, sys_resid = _null_analysis(M, N + 1)
    if gap < GAP_THRESHOLD:
        raise Ambiguous(f"numerical nullspace has dimension > 1 (gap {gap:.3g})", gap)
    c = _fix_modulus(v, data, rows)
    if real:
        c = c.real.astype(complex)
        k = int(np.argmax(np.abs(c)))
        c = c * np.sign(c[k].real)
    else:
        c = canonical_phase(c)
    resid = _data_residual(c, data)
    fragment = {"status": "unique", "nullspace_gap": gap, "residual": resid,
                "system_residual": sys_resid}
    if resid > tol:
        raise Infeasible(f"recovered polynomial misfits the data (residual {resid:.3e})",
                         residual=resid)
    return BargmannPoly(c * bargmann_scale(np.arange(N + 1))), fragment


def magnitude_residual(signal: HermiteSignal, samples: SampleSet) -> float:
    """Largest re-sampling mismatch relative to the largest input magnitude."""
    again = sample(signal, samples.frame, samples.points).magnitudes
    top = np.max(samples.magnitudes)
    if top == 0:
        return float(np.max(again))
    return float(np.max(np.abs(again - samples.magnitudes)) / top)


def _require_frame(samples: SampleSet):
    decision = does_phase_retrieval(samples.frame)
    if not decision:
        raise FrameError(f"window family does not do phase retrieval: {decision.reason}")


def _run(samples, data_fn, degree_bound, tol, real):
    try:
        data = data_fn()
        poly, frag = solve_bargmann(data, degree_bound, tol, real=real)
    except Infeasible as exc:
        return ReconstructionReport(None, "infeasible", float("nan"),
                                    float("nan") if exc.residual is None else exc.residual,
                                    message=str(exc))
    except Ambiguous as exc:
        return ReconstructionReport(None, "ambiguous", exc.nullspace_gap, float("nan"),
                                    message=str(exc))
    coeffs = poly.coeffs / bargmann_scale(np.arange(poly.coeffs.size))
    recovered = HermiteSignal(coeffs)
    if frag["status"] == "zero_signal":
        return ReconstructionReport(recovered, "zero_signal", frag["nullspace_gap"], 0.0)
    resid = magnitude_residual(recovered, samples)
    status = "unique" if resid <= tol else "infeasible"
    return ReconstructionReport(recovered, status, frag["nullspace_gap"], resid)


def reconstruct(samples: SampleSet, degree_bound: int, tol: float = 1e-8) -> ReconstructionReport:
    """Recover a complex Hermite signal of degree <= degree_bound, up to global phase."""
    _require_frame(samples)
    return _run(samples, lambda: local_recovery(samples, min(tol, 1e-9)), degree_bound, tol,
                real=False)


def reality_residuals(data: PhaseInvariantData, degree_bound: int) -> tuple[float, float]:
    """(complex fit on the given points, real fit on the mirrored set), as s_min / s_max."""
    u_max = float(np.max(data.u))
    rows = np.flatnonzero(data.u > USABLE_U * u_max)
    _, _, unconstrained = _null_analysis(_system(data, degree_bound, rows), degree_bound + 1)
    doubled = data.mirrored()
    rows2 = np.flatnonzero(doubled.u > USABLE_U * u_max)
    M = _system(doubled, degree_bound, rows2)
    _, _, constrained = _null_analysis(np.vstack([M.real, M.imag]), degree_bound + 1)
    return unconstrained, constrained


def reconstruct_real(samples: SampleSet, degree_bound: int, tol: float = 1e-8
                     ) -> ReconstructionReport:
    """Recover a real Hermite signal, up to sign, from samples on a set Gamma.

    Data at conj(Gamma) are synthesised from the conjugate symmetry of the
    Bargmann transform of a real signal, and the coefficients are solved for
    over the reals on Gamma u conj(Gamma).
    """
    _require_frame(samples)
    try:
        data = local_recovery(samples, min(tol, 1e-9))
    except Infeasible as exc:
        return ReconstructionReport(None, "infeasible", float("nan"), float("nan"),
                                    message=str(exc))
    if float(np.max(data.u)) > tol ** 2:
        unconstrained, constrained = reality_residuals(data, degree_bound)
        if constrained > REALITY_FACTOR * max(unconstrained, tol):
            raise RealityViolated(
                f"real-constrained residual {constrained:.3e} exceeds {REALITY_FACTOR:g}x "
                f"the unconstrained {unconstrained:.3e}; samples are not from a real signal")
    return _run(samples, data.mirrored, degree_bound, tol, real=True)


def up_to_phase_error(reference: HermiteSignal, recovered: HermiteSignal) -> float:
    """min over |tau| = 1 of ||ref - tau rec|| / ||ref|| (absolute for the zero signal)."""
    n = max(reference.coeffs.size, recovered.coeffs.size)
    a, b = reference.padded(n), recovered.padded(n)
    inner = np.vdot(b, a)
    tau = inner / abs(inner) if inner != 0 else 1.0
    d = float(np.linalg.norm(a - tau * b))
    ref = np.linalg.norm(a)
    return d / ref if ref > 0 else d
