"""Epstein zeta oracles for the square lattice.

Prints frozen reference values:
  * full sum  S(3) = sum_{xi != 0} |2 pi xi|^{-3}  in d=2, via the classical
    closed form 4 zeta(3/2) beta(3/2) (mpmath, 30 digits) and via a brute
    radius-1e4 partial sum plus integral tail correction (agreement check);
  * truncated sum over 0 < |2 pi xi| <= 200 (compared against the library's
    head evaluation in the tests);
  * Hurwitz cross-check for the d=2 ball Poincare head: lengths 2 pi k - 2R
    on the axis sublattice.
"""

import numpy as np
import mpmath as mp

mp.mp.dps = 30


def closed_form(s_half: float):
    # sum'_{(m,n)} (m^2+n^2)^{-s} = 4 zeta(s) beta(s)
    s = mp.mpf(s_half)
    beta = mp.mpf(4) ** (-s) * (mp.zeta(s, mp.mpf(1) / 4) - mp.zeta(s, mp.mpf(3) / 4))
    return 4 * mp.zeta(s) * beta


def brute(s: float, radius: int) -> float:
    total = 0.0
    n = np.arange(-radius, radius + 1)
    for m in range(-radius, radius + 1):
        sq = float(m) ** 2 + n.astype(float) ** 2
        sq = sq[sq > 0]
        total += float(np.sum(sq ** (-s / 2.0)))
    return total


def truncated_head(s: float, length_cap: float) -> float:
    r = int(np.ceil(length_cap / (2 * np.pi))) + 1
    m, n = np.meshgrid(np.arange(-r, r + 1), np.arange(-r, r + 1), indexing="ij")
    norms = 2 * np.pi * np.sqrt(m.astype(float) ** 2 + n.astype(float) ** 2)
    mask = (norms > 0) & (norms <= length_cap)
    return float(np.sum(norms[mask] ** (-s)))


def main():
    s = 3.0
    exact = closed_form(s / 2) / (2 * mp.pi) ** 3
    print(f"closed form (2pi)^-3 * 4 zeta(3/2) beta(3/2) = {mp.nstr(exact, 20)}")

    radius = 10_000
    head = brute(s, radius)
    # tail: integral of 2 pi r * r^{-3} from radius to infinity = 2 pi / radius
    tail = 2 * np.pi / radius
    approx = (head + tail) / (2 * np.pi) ** 3
    print(f"brute radius {radius} + tail      = {approx!r}")
    print(f"difference                        = {float(abs(approx - exact)):.3e}")

    cap = 200.0
    print(f"truncated head, lengths <= {cap}: {truncated_head(s, cap)!r}")

    # d=2 identical balls radius R: axis sublattice lengths 2 pi k - 2R, so
    # sum_k (2 pi k - 2R)^{-s} = (2 pi)^{-s} zeta(s, 1 - q), q = 2R/(2pi)
    R = 0.35
    q = 2 * R / (2 * np.pi)
    hz = (2 * mp.pi) ** (-mp.mpf(s)) * mp.zeta(mp.mpf(s), 1 - mp.mpf(q))
    print(f"Hurwitz axis check (R={R}): sum_k (2pi k - 2R)^-3 = {mp.nstr(hz, 20)}")


if __name__ == "__main__":
    main()
