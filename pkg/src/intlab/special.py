"""Elliptic and hyperbolic special-function kernels.

The elliptic layer works with the fixed real half-period omega = pi/2 and a
purely imaginary omega'.  In that convention the modified sigma function ws
shares zeros, signs, parity and antiperiodicity with the sine function on the
real axis, and both ws and the Weierstrass p-function degenerate to
trigonometric expressions as |omega'| grows.  Other lattices are reachable
through the homogeneity relation ws(t z; t w, t w') = t ws(z; w, w') and are
deliberately not part of the API.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, PoleError

OMEGA = math.pi / 2

# Stop extending the ws product once a factor is this close to 1.
_FACTOR_TOL = 1e-17
_MAX_TERMS = 20000


@dataclass(frozen=True)
class EllipticParams:
    """Half-period pair (pi/2, omega') with omega' on the positive imaginary axis."""

    omega_prime: complex
    omega: float = OMEGA
    q_nome: float = field(init=False)

    def __post_init__(self):
        if self.omega != OMEGA:
            raise DomainError("real half-period is fixed at pi/2")
        w = complex(self.omega_prime)
        if not (w.real == 0.0 and w.imag > 0.0):
            raise DomainError("omega_prime must lie on the positive imaginary axis")
        q = math.exp(-math.pi * w.imag / self.omega)
        if q > 0.99:
            raise ConvergenceError(
                "imaginary half-period too small (nome %.4f > 0.99)" % q
            )
        object.__setattr__(self, "q_nome", q)

    @property
    def im_omega_prime(self):
        return complex(self.omega_prime).imag


def _check_finite(z):
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError("non-finite argument")
    return z


def _lattice_distance(z, params):
    """Distance from z to the period lattice m*pi + 2*m'*omega'."""
    w = params.im_omega_prime
    re = math.remainder(z.real, math.pi)
    im = math.remainder(z.imag, 2.0 * w)
    return math.hypot(re, im)


def ws_sigma(z, params):
    """Modified Weierstrass sigma: sin(z) times its convergent lattice product.

    The product is truncated once a correction factor differs from 1 by less
    than 1e-17, so the relative truncation error is far below 1e-14.
    """
    z = _check_finite(z)
    s = cmath.sin(z)
    s2 = s * s
    total = s
    w = params.im_omega_prime
    for m in range(1, _MAX_TERMS + 1):
        sh = math.sinh(2.0 * m * w)
        c = s2 / (sh * sh)
        total *= 1.0 + c
        if abs(c) < _FACTOR_TOL:
            return total
    raise ConvergenceError("ws product did not settle in %d terms" % _MAX_TERMS)


def weierstrass_p(z, params):
    """Weierstrass p-function via the classical nome series.

    With omega = pi/2 and nome q = exp(-2 |omega'|),

        p(z) = 1/sin(z)^2 - 1/3 - 8 sum_{n>=1} n q^{2n} (cos(2nz) - 1)/(1 - q^{2n}).

    The grouping with (cos - 1) keeps the constant term exact, so p(z) - 1/z^2
    vanishes at the origin without cancellation.
    """
    z = _check_finite(z)
    if _lattice_distance(z, params) < 1e-12:
        raise PoleError("argument on the period lattice")
    q2 = params.q_nome ** 2
    # |cos(2nz) - 1| <= 1 + exp(2n |Im z|); the series converges iff the
    # combined rate q^2 exp(2 |Im z|) stays below 1.
    rate = 2.0 * abs(z.imag) + math.log(q2)
    if rate >= 0.0:
        raise ConvergenceError("argument too far from the real axis for this nome")
    s = cmath.sin(z)
    value = 1.0 / (s * s) - 1.0 / 3.0
    q2n = 1.0
    for n in range(1, _MAX_TERMS + 1):
        q2n *= q2
        coeff = -8.0 * n * q2n / (1.0 - q2n)
        value += coeff * (cmath.cos(2.0 * n * z) - 1.0)
        envelope = 8.0 * n / (1.0 - q2n) * (math.exp(n * rate) + q2n)
        if envelope < 1e-17 * max(1.0, abs(value)):
            return value
    raise ConvergenceError("p-function series did not settle")


def phi_lame(x, eta):
    """Hyperbolic Lame-type kernel e^{x coth(eta)} (coth(x) - coth(eta)).

    Degenerates to 1/sinh(x) as real eta -> infinity; used as the spectral
    weight of the parameter-dependent Lax matrices.
    """
    x = _check_finite(x)
    eta = _check_finite(eta)
    shx = cmath.sinh(x)
    sheta = cmath.sinh(eta)
    if abs(shx) < 1e-14 or abs(sheta) < 1e-14:
        raise PoleError("coth pole at x or eta in i*pi*Z")
    coth_x = cmath.cosh(x) / shx
    coth_eta = cmath.cosh(eta) / sheta
    return cmath.exp(x * coth_eta) * (coth_x - coth_eta)


def ws_sigma_grid(zs, params):
    """Vector convenience wrapper around ws_sigma."""
    return np.array([ws_sigma(z, params) for z in np.ravel(zs)]).reshape(np.shape(zs))
