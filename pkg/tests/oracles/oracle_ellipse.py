"""Ellipse perimeter reference values (complete elliptic integral + quadrature)."""

import numpy as np
import mpmath as mp
from scipy.special import ellipe

mp.mp.dps = 30


def perimeter_quad(a: float, b: float):
    f = lambda t: mp.sqrt(a**2 * mp.sin(t) ** 2 + b**2 * mp.cos(t) ** 2)
    return mp.quad(f, [0, 2 * mp.pi])


def main():
    a, b = 1.3, 0.7
    m = 1.0 - (b / a) ** 2
    p_scipy = 4 * a * ellipe(m)
    p_mp = perimeter_quad(a, b)
    print(f"perimeter ellipse({a},{b}) scipy  = {p_scipy!r}")
    print(f"perimeter ellipse({a},{b}) mpmath = {mp.nstr(p_mp, 20)}")
    print(f"difference = {float(abs(p_mp - p_scipy)):.3e}")
    print(f"area = {np.pi * a * b!r}")
    # residue targets for the d=2 counting zeta of ellipse vs point:
    print(f"Res_1 target perimeter/(2pi)^2 = {p_scipy / (2 * np.pi) ** 2!r}")
    print(f"Res_2 target 1/(2pi)           = {1 / (2 * np.pi)!r}")


if __name__ == "__main__":
    main()
