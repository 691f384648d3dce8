"""High-precision reference values for the special-function kernels.

Run this script to regenerate the frozen constants used in
tests/test_special.py.  The p-function reference is built from the second
logarithmic derivative of the sigma product (a different series than the
nome expansion the library uses), so the two routes are independent.
"""

import mpmath as mp

mp.mp.dps = 50


def ws_ref(z, w):
    """sin(z) * prod_m (1 + sin(z)^2 / sinh(2 m w)^2) at high precision."""
    z = mp.mpmathify(z)
    s = mp.sin(z)
    total = s
    m = 1
    while True:
        c = s ** 2 / mp.sinh(2 * m * w) ** 2
        total *= 1 + c
        if abs(c) < mp.mpf(10) ** (-mp.mp.dps - 5):
            return total
        m += 1


def wp_ref(z, w):
    """p(z) from -(log ws)'' - eta/omega with the constant fixed at z -> 0.

    (log ws)''(z) = -1/sin(z)^2 + sum_m [2cos(2z)(s_m^2+sin^2 z) - sin^2(2z)]
                                        / (s_m^2+sin^2 z)^2,  s_m = sinh(2mw),
    and eta/omega = 1/3 - sum_m 2/s_m^2 makes p(z) - 1/z^2 vanish at 0.
    """
    z = mp.mpmathify(z)
    s2 = mp.sin(z) ** 2
    c2z = mp.cos(2 * z)
    s2z2 = mp.sin(2 * z) ** 2
    value = 1 / s2 - mp.mpf(1) / 3
    m = 1
    while True:
        sm2 = mp.sinh(2 * m * w) ** 2
        den = sm2 + s2
        term = 2 / sm2 - (2 * c2z * den - s2z2) / den ** 2
        value += term
        if abs(term) < mp.mpf(10) ** (-mp.mp.dps - 5):
            return value
        m += 1


def phi_ref(x, eta):
    x = mp.mpmathify(x)
    eta = mp.mpmathify(eta)
    return mp.exp(x * mp.coth(eta)) * (mp.coth(x) - mp.coth(eta))


if __name__ == "__main__":
    cases = [
        ("ws(0.3; w'=1i)", ws_ref(mp.mpf("0.3"), 1)),
        ("ws(1.1; w'=1i)", ws_ref(mp.mpf("1.1"), 1)),
        ("ws(0.25+0.15i; w'=1i)", ws_ref(mp.mpc("0.25", "0.15"), 1)),
        ("wp(0.3; w'=1i)", wp_ref(mp.mpf("0.3"), 1)),
        ("wp(0.52; w'=1.3i)", wp_ref(mp.mpf("0.52"), mp.mpf("1.3"))),
        ("wp(1.0+0.2i; w'=1i)", wp_ref(mp.mpc("1.0", "0.2"), 1)),
        ("phi(0.5, 1+0.3i)", phi_ref(mp.mpf("0.5"), mp.mpc(1, "0.3"))),
    ]
    for name, val in cases:
        print(name, mp.nstr(val, 25))
