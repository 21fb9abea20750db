"""Quadrature and oscillatory integrals on round spheres.

Grids are tensor products of Gauss-Jacobi rules in the polar cosines and a
uniform (trapezoid) rule in the azimuth, so they integrate all polynomials
of total degree <= 2*order - 1 exactly.  All reductions use numpy's pairwise
summation over a fixed node ordering, which makes every value reproducible
bit-for-bit for a given (dim, order).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gamma as _gamma
from scipy.special import jv as _besselj
from scipy.special import roots_jacobi, roots_legendre

__all__ = [
    "SphericalGrid",
    "OscResult",
    "UnderResolved",
    "sphere_area",
    "grid",
    "integrate",
    "bessel_surface",
    "pole_cutoffs",
    "osc_integral",
    "stationary_phase",
    "cap_decay_check",
]


class UnderResolved(Exception):
    """Doubling the grid order moved the value past the agreement tolerance."""


@dataclass(frozen=True)
class SphericalGrid:
    """Quadrature nodes and weights on the unit sphere S^(dim-1)."""

    dim: int
    order: int
    nodes: np.ndarray   # (n_nodes, dim), unit vectors
    weights: np.ndarray  # (n_nodes,), positive, sums to the sphere area

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]


def sphere_area(dim: int) -> float:
    """Surface measure of S^(dim-1): 2 pi^(d/2) / Gamma(d/2)."""
    return 2.0 * math.pi ** (dim / 2.0) / _gamma(dim / 2.0)


def _circle_grid(order: int) -> tuple[np.ndarray, np.ndarray]:
    # 2*order uniform azimuth nodes: exact for trig degree <= 2*order - 1.
    m = 2 * order
    phi = 2.0 * math.pi * np.arange(m) / m
    nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    weights = np.full(m, 2.0 * math.pi / m)
    return nodes, weights


@lru_cache(maxsize=64)
def grid(dim: int, order: int) -> SphericalGrid:
    """Product quadrature grid on S^(dim-1), exact to polynomial degree 2*order-1."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if order < 1:
        raise ValueError("order must be >= 1")
    nodes, weights = _circle_grid(order)
    for j in range(3, dim + 1):
        # S^(j-1) from S^(j-2): dsigma = (1-u^2)^((j-3)/2) du dsigma'.
        alpha = (j - 3) / 2.0
        if alpha == 0.0:
            u, w = roots_legendre(order)
        else:
            u, w = roots_jacobi(order, alpha, alpha)
        sin_part = np.sqrt(np.clip(1.0 - u * u, 0.0, None))
        # new first coordinate u, remaining coordinates scaled previous node
        nodes = np.concatenate(
            [
                np.repeat(u, nodes.shape[0])[:, None],
                np.kron(sin_part[:, None], nodes),
            ],
            axis=1,
        )
        weights = np.kron(w, weights)
    nodes = np.ascontiguousarray(nodes)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return SphericalGrid(dim=dim, order=order, nodes=nodes, weights=weights)


def integrate(g: SphericalGrid, f) -> complex | float:
    """Integrate f over the sphere; f is a callable on (n, d) arrays or an array of node values."""
    vals = f(g.nodes) if callable(f) else np.asarray(f)
    return np.sum(g.weights * vals)


def bessel_surface(dim: int, rho) -> np.ndarray | float:
    """Radial Fourier transform of the sphere: integral of e^{i rho theta.e} dsigma.

    Equals (2 pi)^(d/2) rho^(1-d/2) J_{d/2-1}(rho); tends to the sphere area
    as rho -> 0.
    """
    rho = np.asarray(rho, dtype=float)
    nu = dim / 2.0 - 1.0
    small = np.abs(rho) < 1e-12
    safe = np.where(small, 1.0, rho)
    out = (2.0 * math.pi) ** (dim / 2.0) * safe ** (1.0 - dim / 2.0) * _besselj(nu, safe)
    out = np.where(small, sphere_area(dim), out)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# smooth pole/equator cutoffs


def _smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity ramp: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > 0.0) & (x < 1.0)
    xi = x[inside]
    a = np.exp(-1.0 / xi)
    b = np.exp(-1.0 / (1.0 - xi))
    out[inside] = a / (a + b)
    out[x >= 1.0] = 1.0
    return out


def pole_cutoffs(s: np.ndarray, width: float = 0.2) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Partition of unity (chi_minus, chi_0, chi_plus) in the polar cosine s.

    chi_plus is supported on [1-width, 1] and equals 1 on [1-width/2, 1];
    chi_minus mirrors it; chi_0 = 1 - chi_plus - chi_minus covers the equator.
    Default width 0.2 gives the support/plateau pair ([0.8,1], [0.9,1]).
    """
    if not 0.0 < width < 1.0:
        raise ValueError("width must lie in (0, 1)")
    s = np.asarray(s, dtype=float)
    a = 1.0 - width
    b = 1.0 - width / 2.0
    chi_plus = _smooth_step((s - a) / (b - a))
    chi_minus = _smooth_step((-s - a) / (b - a))
    chi_0 = 1.0 - chi_plus - chi_minus
    return chi_minus, chi_0, chi_plus


def _cutoff_support_bound(width: float) -> float:
    # chi_0 vanishes where |s| >= 1 - width/2; its support max is 1 - width/2.
    return 1.0 - width / 2.0


# ---------------------------------------------------------------------------
# oscillatory integrals


@dataclass(frozen=True)
class OscResult:
    """Value of a sphere oscillatory integral plus resolution diagnostics."""

    value: complex
    error_estimate: float
    order_used: int
    pieces: Optional[dict] = None  # 'cap_plus', 'cap_minus', 'equator' when split


def _constant_fn(c):
    def f(theta: np.ndarray) -> np.ndarray:
        return np.full(theta.shape[0], c, dtype=complex)

    return f


def _estimate_c1(xtilde: Callable, dim: int) -> float:
    """Crude sup of |xtilde| + |d xtilde| from a coarse grid and finite differences."""
    g = grid(dim, 24)
    vals = np.asarray(xtilde(g.nodes), dtype=float)
    sup = float(np.max(np.linalg.norm(vals, axis=1)))
    h = 1e-4
    deriv = 0.0
    for a in range(dim):
        e = np.zeros(dim)
        e[a] = h
        up = np.asarray(xtilde(_normalize(g.nodes + e)))
        dn = np.asarray(xtilde(_normalize(g.nodes - e)))
        deriv = max(deriv, float(np.max(np.linalg.norm(up - dn, axis=1))) / (2 * h))
    return sup + deriv


def _normalize(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _phase_values(g: SphericalGrid, xi, beta0, t, xtilde) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    beta0 = np.asarray(beta0, dtype=float)
    phase = t * (g.nodes @ (xi - beta0))
    if xtilde is not None:
        xt = np.asarray(xtilde(g.nodes))
        phase = phase + xt @ xi
    return phase


def _osc_on_grid(g: SphericalGrid, F, xi, beta0, t, xtilde, mask=None) -> complex:
    phase = _phase_values(g, xi, beta0, t, xtilde)
    fv = np.asarray(F(g.nodes), dtype=complex)
    w = g.weights if mask is None else g.weights * mask
    return complex(np.sum(w * fv * np.exp(1j * phase)))


def osc_order(dim: int, xi, beta0, t: float, xtilde_scale: float = 0.0) -> int:
    """Grid order heuristic: 1.5x the peak phase frequency plus a margin."""
    xi = np.asarray(xi, dtype=float)
    beta0 = np.asarray(beta0, dtype=float)
    freq = abs(t) * float(np.linalg.norm(xi - beta0)) + float(np.linalg.norm(xi)) * xtilde_scale
    return int(math.ceil(1.5 * freq + 20))


def osc_integral(
    dim: int,
    F=None,
    xi=None,
    beta0=None,
    t: float = 0.0,
    xtilde: Optional[Callable] = None,
    xtilde_scale: Optional[float] = None,
    split: bool = False,
    width: float = 0.2,
    order: Optional[int] = None,
) -> OscResult:
    """Integral of e^{i (xi-beta0).(t theta + xtilde)} e^{i beta0.xtilde} F(theta) over the sphere.

    The phase simplifies to (xi - beta0).(t theta) + xi.xtilde(theta).  The
    value is computed at a frequency-scaled order and again at double that
    order; disagreement beyond 1e-9 relative (plus 1e-12 absolute) raises
    UnderResolved.  With split=True the result also carries the three pieces
    obtained from the polar partition of unity around +-(xi-beta0)/|xi-beta0|.
    """
    xi = np.zeros(dim) if xi is None else np.asarray(xi, dtype=float)
    beta0 = np.zeros(dim) if beta0 is None else np.asarray(beta0, dtype=float)
    if F is None:
        F = _constant_fn(1.0)
    elif not callable(F):
        F = _constant_fn(complex(F))
    if xtilde is not None and xtilde_scale is None:
        xtilde_scale = _estimate_c1(xtilde, dim)
    n = order if order is not None else osc_order(dim, xi, beta0, t, xtilde_scale or 0.0)
    v1 = _osc_on_grid(grid(dim, n), F, xi, beta0, t, xtilde)
    g2 = grid(dim, 2 * n)
    v2 = _osc_on_grid(g2, F, xi, beta0, t, xtilde)
    err = abs(v2 - v1)
    if err > 1e-9 * abs(v2) + 1e-12:
        raise UnderResolved(
            f"order doubling {n}->{2 * n} moved the value by {err:.3e} "
            f"(value {abs(v2):.3e})"
        )
    pieces = None
    if split:
        lam = np.linalg.norm(xi - beta0)
        if lam < 1e-14:
            raise ValueError("splitting needs xi != beta0 to define the poles")
        omega = (xi - beta0) / lam
        s = g2.nodes @ omega
        chi_m, chi_0, chi_p = pole_cutoffs(s, width)
        pieces = {
            "cap_plus": _osc_on_grid(g2, F, xi, beta0, t, xtilde, mask=chi_p),
            "equator": _osc_on_grid(g2, F, xi, beta0, t, xtilde, mask=chi_0),
            "cap_minus": _osc_on_grid(g2, F, xi, beta0, t, xtilde, mask=chi_m),
        }
    return OscResult(value=v2, error_estimate=err, order_used=2 * n, pieces=pieces)


def stationary_phase(
    dim: int,
    F=None,
    xi=None,
    beta0=None,
    t: float = 1.0,
    xtilde: Optional[Callable] = None,
) -> tuple[complex, float]:
    """Leading two-pole stationary phase value for the integral of osc_integral.

    Returns (value, remainder_order); the remainder of the full integral is
    O(t^remainder_order) with remainder_order = -(1 + (dim-1)/2).
    """
    xi = np.asarray(xi, dtype=float)
    beta0 = np.zeros(dim) if beta0 is None else np.asarray(beta0, dtype=float)
    if F is None:
        F = _constant_fn(1.0)
    elif not callable(F):
        F = _constant_fn(complex(F))
    lam = float(np.linalg.norm(xi - beta0))
    if lam <= 0.0 or t <= 0.0:
        raise ValueError("stationary phase needs t > 0 and xi != beta0")
    omega = (xi - beta0) / lam
    total = 0.0 + 0.0j
    for sgn in (+1.0, -1.0):
        node = (sgn * omega)[None, :]
        amp = complex(np.asarray(F(node), dtype=complex)[0])
        if xtilde is not None:
            amp *= np.exp(1j * float(np.asarray(xtilde(node))[0] @ xi))
        total += (
            np.exp(1j * sgn * t * lam)
            * np.exp(-1j * sgn * math.pi * (dim - 1) / 4.0)
            * (2.0 * math.pi / (t * lam)) ** ((dim - 1) / 2.0)
            * amp
        )
    return complex(total), -(1.0 + (dim - 1) / 2.0)


@dataclass(frozen=True)
class CapDecayReport:
    ts: np.ndarray
    values: np.ndarray       # equator piece at each t
    exponent: float          # fitted log-log slope of |value| against t


def cap_decay_check(
    dim: int,
    F=None,
    xi=None,
    ts: Sequence[float] = (),
    beta0=None,
    xtilde: Optional[Callable] = None,
    width: float = 0.2,
) -> CapDecayReport:
    """Decay of the equator (non-stationary) piece of the split oscillatory integral.

    Refuses to run when t is too small for the phase to be non-stationary on
    the equator support: requires t |xi - beta0| sqrt(1 - smax^2) to dominate
    the xtilde gradient, smax being the largest |polar cosine| on the support
    of the equator cutoff.
    """
    xi = np.asarray(xi, dtype=float)
    beta0 = np.zeros(dim) if beta0 is None else np.asarray(beta0, dtype=float)
    ts = np.asarray(sorted(ts), dtype=float)
    if ts.size < 2:
        raise ValueError("need at least two t samples to fit a decay exponent")
    lam = float(np.linalg.norm(xi - beta0))
    smax = _cutoff_support_bound(width)
    margin = math.sqrt(max(1.0 - smax * smax, 1e-12))
    c1 = _estimate_c1(xtilde, dim) if xtilde is not None else 0.0
    threshold = 2.0 * float(np.linalg.norm(xi)) * c1 / (lam * margin) if lam > 0 else math.inf
    if float(ts[0]) <= threshold:
        raise ValueError(
            f"t={ts[0]:g} is below the non-stationarity threshold {threshold:g} "
            "for this equator cutoff"
        )
    vals = []
    for t in ts:
        res = osc_integral(dim, F, xi, beta0, float(t), xtilde=xtilde, split=True, width=width)
        vals.append(res.pieces["equator"])
    vals = np.asarray(vals)
    mags = np.abs(vals)
    mags = np.where(mags < 1e-300, 1e-300, mags)
    slope = float(np.polyfit(np.log(ts), np.log(mags), 1)[0])
    return CapDecayReport(ts=ts, values=vals, exponent=slope)
