"""Slow, independent ground truth for tests and validation reports.

Nothing in here is used by the reconstruction pipeline.  The STFT is computed
by direct quadrature of its defining integral, Fock norms by tensor
Gauss-Hermite quadrature over the plane, and ambiguities in C^2 by lifting
|<z, phi>|^2 to a linear functional of z z^* plus a randomised local search.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import GridTooCoarse
from .hermite_bargmann import (BargmannPoly, HermiteSignal, bargmann, hermite_functions,
                               inverse_bargmann, tf_to_complex)

RICHARDSON_TOL = 1e-6


@dataclass(frozen=True)
class QuadratureGrid:
    half_width: float = 6.0
    nodes: int = 256
    rule: str = "gauss-legendre"

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.nodes < 64:
            raise ValueError("at least 64 quadrature nodes are required")
        if self.rule not in ("gauss-legendre", "trapezoid"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")

    def nodes_weights(self, n: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
        n = self.nodes if n is None else n
        T = self.half_width
        if self.rule == "gauss-legendre":
            t, w = np.polynomial.legendre.leggauss(n)
            return T * t, T * w
        t = np.linspace(-T, T, n)
        w = np.full(n, t[1] - t[0])
        w[[0, -1]] *= 0.5
        return t, w


def _stft_integral(signal, window, x, omega, t, w):
    n_max = max(signal.coeffs.size, window.coeffs.size) - 1
    f = signal.padded(n_max + 1) @ hermite_functions(n_max, t)
    g = window.padded(n_max + 1) @ hermite_functions(n_max, t - x)
    return np.sum(w * f * np.conj(g) * np.exp(-2j * pi * t * omega))


def stft_quadrature(signal: HermiteSignal, window_signal: HermiteSignal, point,
                    grid: QuadratureGrid = QuadratureGrid(), check: bool = True) -> complex:
    """Integral of f(t) conj(g(t - x)) exp(-2 pi i t omega) over the real line.

    With ``check`` the value is recomputed on twice as many nodes and
    :class:`GridTooCoarse` is raised when the two disagree by more than 1e-6.
    """
    x, omega = (float(v) for v in point)
    t, w = grid.nodes_weights()
    value = _stft_integral(signal, window_signal, x, omega, t, w)
    if check:
        t2, w2 = grid.nodes_weights(2 * grid.nodes)
        fine = _stft_integral(signal, window_signal, x, omega, t2, w2)
        if abs(fine - value) > RICHARDSON_TOL:
            raise GridTooCoarse(
                f"node doubling changed the STFT by {abs(fine - value):.3e} at {point}")
        value = fine
    return complex(value)


def bargmann_quadrature(signal: HermiteSignal, z, grid: QuadratureGrid = QuadratureGrid()):
    """Bargmann transform 2^{1/4} int f(t) exp(2 pi t z - pi t^2 - pi z^2 / 2) dt."""
    t, w = grid.nodes_weights(2 * grid.nodes)
    f = signal(t)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    kernel = np.exp(2 * pi * np.outer(z, t) - pi * t ** 2 - 0.5 * pi * z[:, None] ** 2)
    return 2 ** 0.25 * kernel @ (w * f)


def weighted_norm_quadrature(func: Callable, alpha: float, order: int = 80) -> float:
    """(alpha/pi * int |func(z)|^2 exp(-alpha |z|^2) dA(z))^{1/2} by tensor Gauss-Hermite.

    Exact for integrands that are polynomials in x and y of degree < 2*order
    in each variable.
    """
    s, w = np.polynomial.hermite.hermgauss(order)
    x = s / sqrt(alpha)
    Z = x[:, None] + 1j * x[None, :]
    W = np.outer(w, w)
    return float(sqrt(np.sum(W * np.abs(func(Z)) ** 2) / pi))


def certificate_polynomial(f: HermiteSignal, h: HermiteSignal) -> BargmannPoly:
    """G = F H (F H' - F' H) for F = Bf, H = Bh, as an element of F^2_{4 pi}."""
    F, H = bargmann(f), bargmann(h)
    wronskian = F * H.derivative() - F.derivative() * H
    G = F * H * wronskian
    return BargmannPoly(G.coeffs, 4 * pi)


def vanishing_partner(signal: HermiteSignal, points, rng: np.random.Generator,
                      extra_degree: int = 0, amplitude: float = 0.5) -> HermiteSignal:
    """A signal h with the same spectrogram samples as ``signal`` on ``points``.

    With S(z) = prod_j (z - z_j) over the mapped points z_j = x_j - i omega_j,
    H = F + c S^2 Q agrees with F to first order at every z_j, so (F(z_j),
    F'(z_j)) and hence every STFT value with an h0/h1-window coincide.  Q is
    random of degree ``extra_degree`` and c is chosen so that the added part
    has norm ``amplitude * ||f||``.
    """
    z = tf_to_complex(np.asarray(getattr(points, "points", points)))
    S = P.polyfromroots(z)
    q = rng.standard_normal(extra_degree + 1) + 1j * rng.standard_normal(extra_degree + 1)
    bump_signal = inverse_bargmann(BargmannPoly(P.polymul(P.polymul(S, S), q)))
    c = amplitude * max(signal.norm, 1.0) / bump_signal.norm
    n = bump_signal.coeffs.size
    return HermiteSignal(signal.padded(max(n, signal.coeffs.size))
                         + c * np.pad(bump_signal.coeffs, (0, max(0, signal.coeffs.size - n))))


def phase_distance(z, w) -> float:
    """min over unimodular tau of ||z - tau w||."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    inner = np.vdot(w, z)
    tau = inner / abs(inner) if inner != 0 else 1.0
    return float(np.linalg.norm(z - tau * w))


def lifted_measurements(vectors) -> np.ndarray:
    """Real (m, 4) matrix with |<z, phi_k>|^2 = row_k . (Z11, Z22, Re Z12, Im Z12), Z = z z^*."""
    phi = np.asarray(vectors, dtype=complex).reshape(-1, 2)
    c = np.conj(phi[:, 0]) * phi[:, 1]
    return np.column_stack([np.abs(phi[:, 0]) ** 2, np.abs(phi[:, 1]) ** 2,
                            2 * c.real, -2 * c.imag])


def _magnitudes(vectors, z):
    return np.abs(np.asarray(vectors, dtype=complex).reshape(-1, 2).conj() @ z)


def _is_violation(vectors, z, w) -> bool:
    mz, mw = _magnitudes(vectors, z), _magnitudes(vectors, w)
    return bool(np.max(np.abs(mz - mw)) <= 1e-10 and phase_distance(z, w) > 1e-6)


def _lifted_pair(vectors) -> Optional[tuple[np.ndarray, np.ndarray]]:
    phi = np.asarray(vectors, dtype=complex).reshape(-1, 2)
    if not np.any(phi):
        return np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    M = lifted_measurements(phi)
    M = M / np.linalg.norm(M, axis=1, keepdims=True).clip(min=1e-300)
    _, s, vt = np.linalg.svd(M)
    s = np.concatenate([s, np.zeros(4 - s.size)])
    if s[-1] > 1e-10 * s[0]:
        return None
    z11, z22, re12, im12 = vt[-1]
    H = np.array([[z11, re12 + 1j * im12], [re12 - 1j * im12, z22]])
    lam, vec = np.linalg.eigh(H)
    if lam[0] < -1e-12 and lam[1] > 1e-12:
        return sqrt(lam[1]) * vec[:, 1], sqrt(-lam[0]) * vec[:, 0]
    # rank one: every frame vector is orthogonal to v, so v and 2v are not equivalent
    v = vec[:, int(np.argmax(np.abs(lam)))]
    return v, 2 * v


def _random_search(vectors, trials, rng, batch=8192, iterations=60):
    phi = np.asarray(vectors, dtype=complex).reshape(-1, 2)
    conj_phi = np.conj(phi)
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        z = rng.standard_normal((b, 2)) + 1j * rng.standard_normal((b, 2))
        target = np.abs(z @ conj_phi.T) ** 2
        w = rng.standard_normal((b, 2)) + 1j * rng.standard_normal((b, 2))
        damping = np.full(b, 1e-3)
        for _ in range(iterations):
            s = w @ conj_phi.T
            r = np.abs(s) ** 2 - target
            # d|s_k|^2 / d(Re w_j, Im w_j) for j = 1, 2
            g = np.conj(s)[:, :, None] * conj_phi[None, :, :]
            J = np.concatenate([2 * g.real, -2 * g.imag], axis=2)[:, :, [0, 2, 1, 3]]
            JtJ = np.einsum("bki,bkj->bij", J, J)
            Jtr = np.einsum("bki,bk->bi", J, r)
            A = JtJ + damping[:, None, None] * np.eye(4)
            step = np.linalg.solve(A, -Jtr[..., None])[..., 0]
            w = w + step[:, [0, 2]] + 1j * step[:, [1, 3]]
        mz = np.sqrt(target)
        mw = np.abs(w @ conj_phi.T)
        close = np.max(np.abs(mz - mw), axis=1) <= 1e-10
        for i in np.flatnonzero(close):
            if phase_distance(z[i], w[i]) > 1e-6:
                return z[i], w[i]
        done += b
    return None


def ambiguity_search_c2(frame, trials: int = 10_000, rng_seed: int = 0
                        ) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Look for z, w with equal frame magnitudes that are not equal up to phase.

    The deterministic lifted construction runs first: if the rank-one
    projectors phi_k phi_k^* fail to span the Hermitian 2x2 matrices, a
    null matrix H = z z^* - w w^* yields the pair exactly.  Otherwise a
    seeded damped Gauss-Newton search is started from random pairs; the
    first hit in trial order is returned.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    vectors = np.asarray(getattr(frame, "vectors", frame), dtype=complex).reshape(-1, 2)
    if vectors.shape[0] == 0:
        raise ValueError("frame must contain at least one vector")
    pair = _lifted_pair(vectors)
    if pair is not None and _is_violation(vectors, *pair):
        return pair
    return _random_search(vectors, trials, np.random.default_rng(rng_seed))
