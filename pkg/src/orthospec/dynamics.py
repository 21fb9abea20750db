"""Geodesic-flow correlations, anisotropic norms, and equidistribution.

Band-limited observables on the unit sphere bundle decompose into finitely
many torus modes xi with spherical amplitudes; the flow acts per mode as a
dilated oscillatory integral, so correlation asymptotics reduce to the
two-pole stationary phase of the sphere.  Dilated convex boundaries
equidistribute at the same rate, with the boundary current expressed by the
area element of the support parametrization.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np

from . import convex, spherequad

__all__ = [
    "TorusObservable",
    "AnisoParams",
    "EquidistResult",
    "correlation",
    "correlation_expansion",
    "aniso_norm",
    "equidistribute",
    "series_to_csv",
    "norm_report_json",
]

_REALITY_TOL = 1e-10
_MODE_MATCH_TOL = 1e-12


def _as_mode_fn(value) -> Callable:
    if callable(value):
        return value
    c = complex(value)

    def const(theta: np.ndarray):
        return np.full(np.atleast_2d(theta).shape[0], c)

    return const


@dataclass(frozen=True, eq=False)
class TorusObservable:
    """Finitely many torus modes xi with amplitudes on the sphere.

    Amplitudes are complex scalars (x-only observables) or callables taking
    (n, d) direction arrays.  With real=True the Hermitian pairing
    amp(-xi) = conj(amp(xi)) is validated on a probe grid.
    """

    dim: int
    modes: tuple  # sorted ((xi tuple), scalar or callable) pairs
    real: bool = False

    def __init__(self, dim: int, modes: Mapping, real: bool = False):
        d = int(dim)
        clean = {}
        for k, v in modes.items():
            key = tuple(int(c) for c in k)
            if len(key) != d:
                raise ValueError(f"mode frequency {key} has wrong dimension")
            clean[key] = v if callable(v) else complex(v)
        if real:
            probe = spherequad.grid(d, 8).nodes
            for key, v in clean.items():
                neg = tuple(-c for c in key)
                if neg not in clean:
                    raise ValueError(f"real observable misses the mode {neg}")
                a = np.asarray(_as_mode_fn(v)(probe))
                b = np.asarray(_as_mode_fn(clean[neg])(probe))
                if np.max(np.abs(np.conj(a) - b)) > _REALITY_TOL:
                    raise ValueError(f"reality pairing fails at frequency {key}")
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "modes", tuple(sorted(clean.items())))
        object.__setattr__(self, "real", bool(real))

    @property
    def frequencies(self) -> list:
        return [k for k, _ in self.modes]

    @property
    def x_only(self) -> bool:
        return all(not callable(v) for _, v in self.modes)

    def amplitude(self, xi) -> Callable:
        key = tuple(int(c) for c in xi)
        for k, v in self.modes:
            if k == key:
                return _as_mode_fn(v)
        return _as_mode_fn(0.0)

    def x_values(self, x: np.ndarray) -> np.ndarray:
        """Evaluate an x-only observable at points x, shape (n, d)."""
        if not self.x_only:
            raise ValueError("observable depends on the direction variable")
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape[0], dtype=complex)
        for k, v in self.modes:
            out += complex(v) * np.exp(1j * (x @ np.asarray(k, dtype=float)))
        return out


@dataclass(frozen=True)
class AnisoParams:
    """Parameters of the anisotropic mode-weighted Sobolev norm."""

    s0: int
    s1: int
    N0: float
    N1: float
    gamma: tuple
    width: float = 0.2

    def __post_init__(self):
        if self.s0 < 0 or self.s1 < 0:
            raise ValueError("Sobolev orders must be nonnegative integers")
        if not 0.0 < self.width < 1.0:
            raise ValueError("cutoff width must lie in (0, 1)")


@dataclass(frozen=True)
class EquidistResult:
    average: complex
    error: complex
    method: str


# ---------------------------------------------------------------------------
# correlations


def _pair_product(phi: TorusObservable, psi: TorusObservable, xi) -> Callable:
    f = phi.amplitude(xi)
    g = psi.amplitude(tuple(-c for c in xi))

    def product(theta: np.ndarray):
        return np.asarray(f(theta), dtype=complex) * np.asarray(g(theta), dtype=complex)

    return product


def correlation(
    phi: TorusObservable,
    psi: TorusObservable,
    beta0,
    t: float,
    workers: int = 1,
) -> complex:
    """sum_xi integral of phihat_xi psihat_{-xi} e^{i t (xi - beta0).theta}.

    The pairing of the flowed observable against psi reduces per mode to an
    oscillatory sphere integral; each mode is resolved independently and the
    reduction is ordered, so worker count cannot change the value.
    """
    if phi.dim != psi.dim:
        raise ValueError("observable dimensions differ")
    d = phi.dim
    beta0 = np.asarray(beta0, dtype=float)
    keys = sorted(
        set(phi.frequencies)
        | set(tuple(-c for c in k) for k in psi.frequencies)
    )

    def term(key) -> complex:
        F = _pair_product(phi, psi, key)
        return spherequad.osc_integral(
            d, F=F, xi=np.asarray(key, dtype=float), beta0=beta0, t=t
        ).value

    if workers > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            vals = list(ex.map(term, keys))
    else:
        vals = [term(k) for k in keys]
    return complex(sum(vals))


def correlation_expansion(
    phi: TorusObservable,
    psi: TorusObservable,
    beta0,
    t: float,
) -> complex:
    """Leading two-pole asymptotics of the twisted correlation.

    E_beta0 + (2 pi)^{(d-1)/2} sum_{xi,+-} e^{+-i(t lam - pi(d-1)/4)}
    (t lam)^{-(d-1)/2} phihat_xi(+-omega) psihat_{-xi}(+-omega) with
    lam = |xi - beta0|; a mode sitting exactly at beta0 contributes its
    constant sphere pairing instead.
    """
    if t <= 0:
        raise ValueError("the expansion needs t > 0")
    d = phi.dim
    beta0 = np.asarray(beta0, dtype=float)
    g = spherequad.grid(d, 48)
    keys = sorted(
        set(phi.frequencies)
        | set(tuple(-c for c in k) for k in psi.frequencies)
    )
    total = 0.0 + 0.0j
    for key in keys:
        F = _pair_product(phi, psi, key)
        lam = float(np.linalg.norm(np.asarray(key, dtype=float) - beta0))
        if lam < _MODE_MATCH_TOL:
            total += complex(np.sum(g.weights * F(g.nodes)))
            continue
        omega = (np.asarray(key, dtype=float) - beta0) / lam
        for sgn in (+1.0, -1.0):
            amp = complex(np.asarray(F((sgn * omega)[None, :]), dtype=complex)[0])
            total += (
                (2.0 * math.pi) ** ((d - 1) / 2.0)
                * np.exp(1j * sgn * (t * lam - math.pi * (d - 1) / 4.0))
                * (t * lam) ** (-(d - 1) / 2.0)
                * amp
            )
    return complex(total)


# ---------------------------------------------------------------------------
# anisotropic norms


def _ambient_gradient(fn: Callable, theta: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Gradient of the 0-homogeneous extension, tangential by construction."""
    d = theta.shape[1]
    out = np.empty((theta.shape[0], d), dtype=complex)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        hi = np.asarray(fn((theta + e) / np.linalg.norm(theta + e, axis=1, keepdims=True)))
        lo = np.asarray(fn((theta - e) / np.linalg.norm(theta - e, axis=1, keepdims=True)))
        out[:, i] = (hi - lo) / (2.0 * h)
    return out


def _ambient_hessian_sq(fn: Callable, theta: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Squared Frobenius norm of the ambient Hessian of the 0-hom extension."""
    d = theta.shape[1]
    c = np.asarray(fn(theta), dtype=complex)

    def ev(off):
        pts = theta + off
        return np.asarray(fn(pts / np.linalg.norm(pts, axis=1, keepdims=True)),
                          dtype=complex)

    out = np.zeros(theta.shape[0])
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h
        dii = (ev(ei) - 2.0 * c + ev(-ei)) / h**2
        out += np.abs(dii) ** 2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h
            dij = (ev(ei + ej) - ev(ei - ej) - ev(-ei + ej) + ev(-ei - ej)) / (
                4.0 * h**2
            )
            out += 2.0 * np.abs(dij) ** 2
    return out


def _circle_derivative_sq(fn: Callable, order: int, n: int = 512) -> tuple:
    """(nodes, weights, |d^m f / d angle^m|^2 for m = 0..order) on the circle."""
    alpha = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    nodes = np.stack([np.cos(alpha), np.sin(alpha)], axis=-1)
    w = np.full(n, 2.0 * math.pi / n)
    vals = np.asarray(fn(nodes), dtype=complex)
    freqs = np.fft.fftfreq(n, d=1.0 / n)
    spec = np.fft.fft(vals)
    # differentiation scales mode k by k^m, so sampling roundoff at the top
    # modes would swamp high orders; clip the numerically empty coefficients
    spec[np.abs(spec) < 1e-12 * np.max(np.abs(spec))] = 0.0
    outs = []
    for m in range(order + 1):
        dm = np.fft.ifft(spec * (1j * freqs) ** m)
        outs.append(np.abs(dm) ** 2)
    return nodes, w, outs


def _masked_sobolev_sq(dim: int, fn: Callable, s: int, mask_of) -> float:
    """integral mask^2 sum_{m<=s} |D^m f|^2; mask_of maps nodes to the cutoff."""
    if dim == 2:
        nodes, w, derivs = _circle_derivative_sq(fn, s)
        mask = mask_of(nodes)
        total = sum(float(np.sum(w * mask**2 * dm)) for dm in derivs)
        return total
    if s > 2:
        raise ValueError("orders above 2 are supported on the circle only")
    g = spherequad.grid(dim, 48)
    mask = mask_of(g.nodes)
    vals = np.asarray(fn(g.nodes), dtype=complex)
    total = float(np.sum(g.weights * mask**2 * np.abs(vals) ** 2))
    if s >= 1:
        grad = _ambient_gradient(fn, g.nodes)
        total += float(
            np.sum(g.weights * mask**2 * np.sum(np.abs(grad) ** 2, axis=1))
        )
    if s >= 2:
        total += float(
            np.sum(g.weights * mask**2 * _ambient_hessian_sq(fn, g.nodes))
        )
    return total


def aniso_norm(phi: TorusObservable, p: AnisoParams) -> float:
    """Mode-weighted Sobolev norm with polar caps along each xi - gamma.

    sqrt of sum_xi <xi>^{2 N0} |phihat_xi|^2_{H^{s0}, equator mask} +
    sum_{xi,+-} <xi>^{2 N1} |phihat_xi|^2_{H^{s1}, cap masks}; masks are the
    squared partition cutoffs, and a mode with xi = gamma puts all weight in
    the equator term.
    """
    d = phi.dim
    gamma = np.asarray(p.gamma, dtype=float)
    if gamma.size != d:
        raise ValueError("gamma dimension mismatch")
    total = 0.0
    for key, value in phi.modes:
        fn = _as_mode_fn(value)
        xi = np.asarray(key, dtype=float)
        v = xi - gamma
        lam = float(np.linalg.norm(v))
        bracket = 1.0 + float(xi @ xi)
        if lam < _MODE_MATCH_TOL:
            def mask_eq(nodes):
                return np.ones(np.atleast_2d(nodes).shape[0])

            total += bracket ** p.N0 * _masked_sobolev_sq(d, fn, p.s0, mask_eq)
            continue
        omega = v / lam

        def mask_chi(nodes, which):
            s = np.atleast_2d(nodes) @ omega
            chi_m, chi_0, chi_p = spherequad.pole_cutoffs(s, p.width)
            return {"-": chi_m, "0": chi_0, "+": chi_p}[which]

        total += bracket ** p.N0 * _masked_sobolev_sq(
            d, fn, p.s0, lambda nodes: mask_chi(nodes, "0")
        )
        for which in ("+", "-"):
            total += bracket ** p.N1 * _masked_sobolev_sq(
                d, fn, p.s1, lambda nodes, w=which: mask_chi(nodes, w)
            )
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# equidistribution


def equidistribute(
    K: convex.SupportBody,
    f: TorusObservable,
    t: float,
    method: str = "direct",
    workers: int = 1,
) -> EquidistResult:
    """Boundary average of f over the dilated body against its area measure.

    average = int f(x_K(theta) + t theta) P_K(t, theta) dsigma / int P_K;
    error = average - mean of f.  The mode path writes the numerator as
    oscillatory sphere integrals with x-shift x_K and must agree with the
    direct quadrature.
    """
    if t <= 0:
        raise ValueError("equidistribution needs t > 0")
    if not f.x_only:
        raise ValueError("the boundary average takes an x-only observable")
    d = K.dim
    if f.dim != d:
        raise ValueError("observable dimension mismatch")
    mean = 0.0 + 0.0j
    for k, v in f.modes:
        if all(c == 0 for c in k):
            mean = complex(v)
    g = spherequad.grid(d, 48)
    area = convex.area_element(K, t, g.nodes)
    mass = float(np.sum(g.weights * area))
    if method == "direct":
        xi_max = max(
            (float(np.linalg.norm(np.asarray(k, dtype=float))) for k, _ in f.modes),
            default=0.0,
        )
        lead = np.zeros(d)
        lead[0] = xi_max
        n = spherequad.osc_order(d, lead, np.zeros(d), t, K.r_max)
        gq = spherequad.grid(d, max(n, 48))
        pts = K.grad(gq.nodes) + t * gq.nodes
        dens = convex.area_element(K, t, gq.nodes)
        avg = complex(np.sum(gq.weights * dens * f.x_values(pts)) /
                      np.sum(gq.weights * dens))
        return EquidistResult(average=avg, error=avg - mean, method="direct")
    if method != "modes":
        raise ValueError("method must be 'direct' or 'modes'")

    def term(item) -> complex:
        key, value = item
        if all(c == 0 for c in key):
            return 0.0 + 0.0j
        osc = spherequad.osc_integral(
            d,
            F=lambda nodes: convex.area_element(K, t, nodes),
            xi=np.asarray(key, dtype=float),
            beta0=np.zeros(d),
            t=t,
            xtilde=lambda nodes: K.grad(nodes),
            xtilde_scale=K.r_max,
        ).value
        return complex(value) * osc

    items = list(f.modes)
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            vals = list(ex.map(term, items))
    else:
        vals = [term(it) for it in items]
    err = complex(sum(vals)) / mass
    return EquidistResult(average=mean + err, error=err, method="modes")


# ---------------------------------------------------------------------------
# tables


def series_to_csv(path, ts, values, expansions) -> None:
    """(t, value_re, value_im, expansion_re, expansion_im, residual) rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(
            ["t", "value_re", "value_im", "expansion_re", "expansion_im", "residual"]
        )
        for t, v, e in zip(ts, values, expansions):
            v, e = complex(v), complex(e)
            wr.writerow(
                [
                    repr(float(t)),
                    repr(v.real),
                    repr(v.imag),
                    repr(e.real),
                    repr(e.imag),
                    repr(abs(v - e)),
                ]
            )


def norm_report_json(path, phi: TorusObservable, params: AnisoParams,
                     value: float) -> None:
    report = {
        "dim": phi.dim,
        "modes": [list(k) for k in phi.frequencies],
        "s0": params.s0,
        "s1": params.s1,
        "N0": params.N0,
        "N1": params.N1,
        "gamma": list(params.gamma),
        "width": params.width,
        "norm": value,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
