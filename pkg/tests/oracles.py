"""Independent reference values computed with mpmath at high precision."""

import mpmath as mp

mp.mp.dps = 40


def _mpc(z):
    return mp.mpc(complex(z).real, complex(z).imag)


def i0(z):
    return complex(mp.besseli(0, _mpc(z)))


def i1(z):
    return complex(mp.besseli(1, _mpc(z)))


def _k0_mp(z):
    """K0 with the cut along the negative imaginary axis.

    mpmath cuts along the negative real axis; in the third quadrant the
    continuation across it is ``K0(z) = K0(-z) - i pi I0(-z)``.
    """
    if z.real < 0 and z.imag < 0:
        w = -z
        return mp.besselk(0, w) - 1j * mp.pi * mp.besseli(0, w)
    return mp.besselk(0, z)


def k0(z):
    return complex(_k0_mp(_mpc(z)))


def k1(z):
    z = _mpc(z)
    if z.real < 0 and z.imag <= 0:
        w = -z
        # K1(w e^{i pi}) = -K1(w) - i pi I1(w)
        return complex(-mp.besselk(1, w) - 1j * mp.pi * mp.besseli(1, w))
    return complex(mp.besselk(1, z))


def w0(z):
    # K0 and i pi I0 cancel to about exp(-2|Re z|) relative in the left half plane
    with mp.workdps(40 + int(max(0.0, -complex(z).real))):
        z = _mpc(z)
        return complex(_k0_mp(z) + 1j * mp.pi * mp.besseli(0, z))


def k0_integral(u, theta):
    """``1/2 int over C_theta of exp(-(x + u^2/(4x))) dx/x`` by mpmath quadrature.

    Both legs stop where the integrand is below ``exp(-200)``: mpmath is very
    slow on infinite limits of a double exponential.
    """
    u2 = _mpc(u) ** 2
    f = lambda w: 0.5 * mp.exp(-(mp.exp(w) + u2 * mp.exp(-w) / 4))
    th = mp.mpf(theta)
    rate = mp.re(u2 * mp.exp(-1j * th)) / 4
    if rate <= 0:
        raise ValueError("left leg diverges")
    s_left = -mp.log(200 / rate) - 1
    s_right = mp.log(200) + 1
    left = mp.quad(lambda s: f(s + 1j * th), mp.linspace(s_left, 0, 8))
    arc = 1j * mp.quad(lambda sg: f(1j * sg), [th, 0])
    right = mp.quad(f, mp.linspace(0, s_right, 8))
    return complex(left + arc + right)
