"""Rational Calogero-Moser system: Lax pair and spectral coordinates.

The model is n particles on the line with pair potential g^2/r^2 on the
ordered configuration domain q_1 > ... > q_n.  Everything downstream
(flows, scattering, canonical spectral coordinates) is driven by the
Hermitian Lax matrix L and the diagonal position matrix Q.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import HamiltonianSystem, PhasePoint
from .errors import DegeneracyError, DomainError
from .linalg import adjugate, hermitian_eigen

_EIG_GAP = 1e-9


@dataclass(frozen=True)
class RatCMPoint:
    """Phase-space point (q, p) with coupling g; q strictly decreasing."""

    q: np.ndarray
    p: np.ndarray
    g: float

    def __post_init__(self):
        object.__setattr__(self, "q", np.atleast_1d(np.asarray(self.q, float)))
        object.__setattr__(self, "p", np.atleast_1d(np.asarray(self.p, float)))
        if self.q.shape != self.p.shape:
            raise DomainError("q and p must have equal length")
        if len(self.q) > 1 and np.min(-np.diff(self.q)) <= 0:
            raise DomainError("configuration must satisfy q_1 > ... > q_n")

    @property
    def n(self):
        return len(self.q)

    def as_phase(self):
        return PhasePoint(self.q, self.p)


@dataclass(frozen=True)
class SpectralCoords:
    """Eigenvalues of L with their canonically conjugate partners.

    theta = mu + f componentwise: mu is the real (angle-variable) part,
    f the purely imaginary correction depending on the eigenvalues only.
    """

    lam: np.ndarray
    theta: np.ndarray
    mu: np.ndarray
    f: np.ndarray


def lax_LQ(x):
    """Lax matrix L, position matrix Q = diag(q), and the vector of ones."""
    n = x.n
    L = np.diag(x.p.astype(complex))
    for j in range(n):
        for k in range(n):
            if j != k:
                L[j, k] = 1j * x.g / (x.q[j] - x.q[k])
    return L, np.diag(x.q.astype(complex)), np.ones(n)


def moser_B(x):
    """Second Lax-pair matrix; dL/dt = [L, B] along the flow."""
    n = x.n
    B = np.zeros((n, n), dtype=complex)
    for k in range(n):
        B[k, k] = 1j * x.g * sum(
            1.0 / (x.q[k] - x.q[l]) ** 2 for l in range(n) if l != k
        )
    for j in range(n):
        for k in range(n):
            if j != k:
                B[j, k] = -1j * x.g / (x.q[j] - x.q[k]) ** 2
    return B


def acd_functions(x, z):
    """The spectral trio A(z) = det(zI - L), C(z), D(z).

    C and D trace the adjugate of (zI - L) against Q, with and without
    the rank-one projector onto the all-ones vector.
    """
    L, Q, v = lax_LQ(x)
    n = x.n
    M = z * np.eye(n) - L
    adj = adjugate(M)
    A = complex(np.linalg.det(M)) if n > 1 else complex(M[0, 0])
    QA = Q @ adj
    D = complex(np.trace(QA))
    C = complex(v @ QA @ v)  # tr(Q adj vv*) collapses to a quadratic form
    return A, C, D


def a_poly_derivatives(lam, z):
    """A, A', A'' at z from the factored form A(z) = prod (z - lam_k)."""
    lam = np.asarray(lam)
    diffs = z - lam
    A = np.prod(diffs)
    n = len(lam)
    Ap = sum(np.prod(np.delete(diffs, j)) for j in range(n))
    App = 2.0 * sum(
        np.prod(np.delete(diffs, [j, k]))
        for j in range(n)
        for k in range(j + 1, n)
    )
    return complex(A), complex(Ap), complex(App)


def sklyanin_coords(x):
    """Canonical spectral coordinates from the C/A' and D/A' quotients."""
    L, _, _ = lax_LQ(x)
    spec = hermitian_eigen(L)
    lam = spec.eigenvalues
    if spec.near_degenerate:
        raise DegeneracyError(
            f"Lax eigenvalues closer than {_EIG_GAP:.0e}; quotients unreliable"
        )
    n = x.n
    theta = np.empty(n, dtype=complex)
    mu = np.empty(n)
    f = np.empty(n, dtype=complex)
    for k in range(n):
        _, C, D = acd_functions(x, lam[k])
        _, Ap, _ = a_poly_derivatives(lam, lam[k])
        theta[k] = C / Ap
        mu[k] = (D / Ap).real
        f[k] = 1j * x.g * sum(
            1.0 / (lam[k] - lam[l]) for l in range(n) if l != k
        )
    return SpectralCoords(lam=lam, theta=theta, mu=mu, f=f)


def hamiltonian(x):
    """H = p^2/2 + sum of pair potentials g^2 / (q_j - q_k)^2."""
    gaps = x.q[:, None] - x.q[None, :]
    iu = np.triu_indices(x.n, 1)
    return float(0.5 * np.dot(x.p, x.p) + np.sum(x.g ** 2 / gaps[iu] ** 2))


def make_system(n, g):
    """HamiltonianSystem wrapper for the dynamics module."""

    def H(point):
        return hamiltonian(RatCMPoint(point.q, point.p, g))

    def grad(point):
        q = point.q
        dq = np.zeros(n)
        for j in range(n):
            for k in range(n):
                if k != j:
                    dq[j] += -2.0 * g ** 2 / (q[j] - q[k]) ** 3
        return dq, point.p.copy()

    def inside(point):
        return n == 1 or bool(np.min(-np.diff(point.q)) > 0)

    def margin(point):
        return 1.0 if n == 1 else float(np.min(-np.diff(point.q)))

    return HamiltonianSystem(
        dim=n,
        hamiltonian=H,
        grad=grad,
        domain_check=inside,
        boundary_margin=margin,
        name=f"ratcm(n={n}, g={g})",
    )
