"""Hermite signal model, Bargmann polynomials and closed-form STFT values.

Signals are finite combinations of the L^2-normalised Hermite functions

    h_n(t) = 2^{1/4} (2^n n!)^{-1/2} H_n(sqrt(2 pi) t) exp(-pi t^2),

whose Bargmann transforms are the monomials (pi^n / n!)^{1/2} z^n.  The
window family g_p = lam*h0 + mu*h1 uses h1(t) = 2^{5/4} pi t exp(-pi t^2),
i.e. sqrt(pi) times the normalised first Hermite function; with that choice

    V_{h0} f(x, -y) eta(z) = Bf(z)
    V_{h1} f(x, -y) eta(z) = (Bf)'(z) - pi conj(z) Bf(z)

hold exactly for z = x + iy.  A time-frequency point (x, omega) therefore
corresponds to z = x - i omega.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import log, pi, sqrt
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import gammaln

#: Scale between the window h1 and the orthonormal first Hermite function.
WINDOW_H1_SCALE = sqrt(pi)


def _as_complex_vector(values) -> np.ndarray:
    arr = np.array(values, dtype=complex).reshape(-1)
    if arr.size == 0:
        arr = np.zeros(1, dtype=complex)
    arr.setflags(write=False)
    return arr


def bargmann_scale(n: int | np.ndarray) -> np.ndarray:
    """Diagonal factor (pi^n / n!)^{1/2} mapping Hermite to monomial coefficients."""
    n = np.asarray(n, dtype=float)
    return np.exp(0.5 * (n * log(pi) - gammaln(n + 1.0)))


@dataclass(frozen=True, eq=False)
class HermiteSignal:
    """Finite Hermite expansion f = sum_n coeffs[n] h_n."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_complex_vector(self.coeffs))

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else -1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.coeffs.imag == 0))

    def scaled(self, factor: complex) -> "HermiteSignal":
        return HermiteSignal(factor * self.coeffs)

    def padded(self, n_coeffs: int) -> np.ndarray:
        out = np.zeros(max(n_coeffs, self.coeffs.size), dtype=complex)
        out[: self.coeffs.size] = self.coeffs
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        basis = hermite_functions(self.coeffs.size - 1, t)
        return np.tensordot(self.coeffs, basis, axes=(0, 0))

    @classmethod
    def random(cls, degree: int, rng: np.random.Generator, real: bool = False,
               normalize: bool = True) -> "HermiteSignal":
        c = rng.standard_normal(degree + 1)
        if not real:
            c = c + 1j * rng.standard_normal(degree + 1)
        if normalize:
            c = c / np.linalg.norm(c)
        return cls(c)


@dataclass(frozen=True)
class WindowSpec:
    """Defining vector p = (lam, mu) of the window lam*h0 + mu*h1."""

    lam: complex
    mu: complex

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "mu", complex(self.mu))
        if self.lam == 0 and self.mu == 0:
            raise ValueError("window defining vector must be nonzero")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.lam, self.mu])

    def as_signal(self) -> HermiteSignal:
        """The window as an element of the orthonormal Hermite model."""
        return HermiteSignal([self.lam, WINDOW_H1_SCALE * self.mu])


@dataclass(frozen=True, eq=False)
class BargmannPoly:
    """Polynomial F(z) = sum_n coeffs[n] z^n regarded as an element of F^2_alpha."""

    coeffs: np.ndarray
    alpha: float = field(default=pi)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_complex_vector(self.coeffs))

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else -1

    def is_zero(self) -> bool:
        return self.degree < 0

    def __call__(self, z):
        return P.polyval(np.asarray(z, dtype=complex), self.coeffs)

    def derivative(self) -> "BargmannPoly":
        return BargmannPoly(P.polyder(self.coeffs), self.alpha)

    def __mul__(self, other: "BargmannPoly") -> "BargmannPoly":
        if isinstance(other, BargmannPoly):
            return BargmannPoly(P.polymul(self.coeffs, other.coeffs),
                                self.alpha + other.alpha)
        return BargmannPoly(self.coeffs * other, self.alpha)

    __rmul__ = __mul__

    def __add__(self, other: "BargmannPoly") -> "BargmannPoly":
        return BargmannPoly(P.polyadd(self.coeffs, other.coeffs), self.alpha)

    def __sub__(self, other: "BargmannPoly") -> "BargmannPoly":
        return BargmannPoly(P.polysub(self.coeffs, other.coeffs), self.alpha)

    def zeros(self) -> np.ndarray:
        c = np.trim_zeros(self.coeffs, "b")
        return P.polyroots(c) if c.size > 1 else np.array([], dtype=complex)


def hermite_functions(n_max: int, t) -> np.ndarray:
    """Values h_0(t) .. h_{n_max}(t), stacked along the first axis.

    Uses the three-term recurrence
    h_{n+1} = sqrt(2/(n+1)) sqrt(2 pi) t h_n - sqrt(n/(n+1)) h_{n-1}.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty((n_max + 1,) + t.shape)
    out[0] = 2 ** 0.25 * np.exp(-pi * t * t)
    if n_max >= 1:
        out[1] = 2 * sqrt(pi) * t * out[0]
    s = sqrt(2 * pi) * t
    for n in range(1, n_max):
        out[n + 1] = sqrt(2 / (n + 1)) * s * out[n] - sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_eval(n: int, t):
    """The n-th L^2-normalised Hermite function at t."""
    if n < 0:
        raise ValueError("Hermite index must be nonnegative")
    return hermite_functions(n, t)[n]


def bargmann(signal: HermiteSignal) -> BargmannPoly:
    n = np.arange(signal.coeffs.size)
    return BargmannPoly(signal.coeffs * bargmann_scale(n), pi)


def inverse_bargmann(poly: BargmannPoly) -> HermiteSignal:
    n = np.arange(poly.coeffs.size)
    return HermiteSignal(poly.coeffs / bargmann_scale(n))


def eta(z):
    """Weight exp(-pi i x y + pi/2 |z|^2) for z = x + iy."""
    z = np.asarray(z, dtype=complex)
    return np.exp(-1j * pi * z.real * z.imag + 0.5 * pi * np.abs(z) ** 2)


def tf_to_complex(points) -> np.ndarray:
    """Map time-frequency points (x, omega) to z = x - i omega."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return pts[:, 0] - 1j * pts[:, 1]


def hermite_window_stft(signal: HermiteSignal, points) -> tuple[np.ndarray, np.ndarray]:
    """Pairs (V_{h0} f, V_{h1} f) at each time-frequency point."""
    z = tf_to_complex(points)
    F = bargmann(signal)
    Fz = F(z)
    dFz = F.derivative()(z)
    e = eta(z)
    return Fz / e, (dFz - pi * np.conj(z) * Fz) / e


def stft_values(signal: HermiteSignal, frame, points) -> np.ndarray:
    """STFT values V_{g_p} f for every point (rows) and window (columns).

    ``frame`` is an (m, 2) array-like of defining vectors (lam, mu).
    """
    vecs = np.asarray(frame, dtype=complex).reshape(-1, 2)
    a, b = hermite_window_stft(signal, points)
    return np.outer(a, np.conj(vecs[:, 0])) + np.outer(b, np.conj(vecs[:, 1]))


def stft_value(signal: HermiteSignal, window: WindowSpec, point) -> complex:
    return complex(stft_values(signal, [window.vector], [point])[0, 0])


def fock_shift(F: Callable, a: complex, alpha: float = pi) -> Callable:
    """Weighted translate z -> exp(alpha z conj(a) - alpha |a|^2 / 2) F(z - a)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    a = complex(a)

    def shifted(z):
        z = np.asarray(z, dtype=complex)
        return np.exp(alpha * z * np.conj(a) - 0.5 * alpha * abs(a) ** 2) * F(z - a)

    return shifted


def fock_norm(F: BargmannPoly, alpha: float | None = None) -> float:
    """Exact F^2_alpha norm using ||z^n||_alpha^2 = n! / alpha^n."""
    alpha = F.alpha if alpha is None else alpha
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    n = np.arange(F.coeffs.size)
    log_w = gammaln(n + 1.0) - n * log(alpha)
    return float(sqrt(np.sum(np.abs(F.coeffs) ** 2 * np.exp(log_w))))

