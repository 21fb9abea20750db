"""Orthogeodesic enumeration between projected convex bodies.

Between the torus projections of two strictly convex bodies, orthogeodesics
of the flat metric correspond to lattice vectors: for the difference body
L = K1 + (-K2), the arc hitting both boundaries orthogonally with homotopy
data xi has length t(xi) = max over unit theta of (theta . 2 pi xi -
h_L(theta)).  The maximum is found by Riemannian Newton on the sphere; the
resulting records carry direction, lifted feet, and the holonomy phase of a
twist one-form beta = beta0 . dx + df.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from . import convex, spherequad

__all__ = [
    "TwistForm",
    "Orthogeodesic",
    "LengthSpectrum",
    "NewtonDiverged",
    "NonUniqueMaximizer",
    "difference_body",
    "enumerate",
    "counting",
    "counting_weighted",
    "steiner_density",
    "density_coeffs",
    "to_csv",
]

_GROUP_TOL = 1e-9
_NEWTON_TOL = 1e-12
_NEWTON_MAX = 50
_TRANSVERSALITY_TOL = 1e-6
_CHUNK = 200_000

_ORIENTATIONS = ("+-", "-+")


class NewtonDiverged(Exception):
    """A candidate that could fall in the requested window failed to converge."""


class NonUniqueMaximizer(Exception):
    """Near-degenerate curvature at a maximizer (transversality proxy failed)."""


@dataclass(frozen=True)
class TwistForm:
    """Closed one-form beta0 . dx + df with f a real trigonometric polynomial.

    Modes map integer frequency tuples to complex coefficients and must be
    Hermitian (c_{-xi} = conj(c_xi)) so that f is real-valued.
    """

    beta0: np.ndarray
    modes: tuple = ()  # sorted ((xi tuple), coeff) pairs

    def __init__(self, beta0, modes: Optional[Mapping] = None):
        beta0 = np.asarray(beta0, dtype=float)
        items = []
        if modes:
            m = {tuple(int(c) for c in k): complex(v) for k, v in modes.items()}
            for k, v in m.items():
                neg = tuple(-c for c in k)
                if neg not in m or abs(m[neg] - np.conj(v)) > 1e-12:
                    raise ValueError(
                        "twist modes must be Hermitian (real-valued f): "
                        f"offending frequency {k}"
                    )
                if len(k) != beta0.size:
                    raise ValueError("twist mode dimension mismatch")
            items = sorted(m.items())
        object.__setattr__(self, "beta0", beta0)
        object.__setattr__(self, "modes", tuple(items))

    @property
    def dim(self) -> int:
        return self.beta0.size

    @property
    def is_integer(self) -> bool:
        """True when beta0 has an integer representative (trivial holonomy class)."""
        return bool(np.all(np.abs(self.beta0 - np.round(self.beta0)) < 1e-12))

    def f_eval(self, x: np.ndarray) -> np.ndarray:
        """Evaluate f at points x, shape (n, d) -> (n,), real."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape[0], dtype=complex)
        for k, c in self.modes:
            out += c * np.exp(1j * (x @ np.asarray(k, dtype=float)))
        return out.real

    def holonomy(self, start: np.ndarray, displacement: np.ndarray) -> np.ndarray:
        """exp(i integral of beta) along straight segments start -> start+displacement."""
        start = np.atleast_2d(start)
        displacement = np.atleast_2d(displacement)
        arg = displacement @ self.beta0 + self.f_eval(start + displacement) - self.f_eval(start)
        return np.exp(1j * arg)


@dataclass(frozen=True)
class Orthogeodesic:
    xi: tuple
    theta: np.ndarray
    length: float
    foot1: np.ndarray
    foot2: np.ndarray
    phase: complex


@dataclass(frozen=True, eq=False)
class LengthSpectrum:
    """Sorted orthospectrum records plus the query that produced them.

    Arrays are parallel and ordered by (length, xi lexicographic); rejects
    holds (xi, reason, approximate length) tuples for candidates that failed
    the transversality proxy.
    """

    dim: int
    body1: convex.SupportBody
    body2: convex.SupportBody
    orient: str
    T0: float
    T: float
    beta: TwistForm
    xi: np.ndarray       # (n, d) int
    theta: np.ndarray    # (n, d)
    lengths: np.ndarray  # (n,)
    foot1: np.ndarray    # (n, d)
    foot2: np.ndarray    # (n, d)
    phases: np.ndarray   # (n,) complex, unit modulus
    rejects: tuple = field(default=())

    def __len__(self) -> int:
        return self.lengths.size

    def record(self, i: int) -> Orthogeodesic:
        return Orthogeodesic(
            xi=tuple(int(c) for c in self.xi[i]),
            theta=self.theta[i].copy(),
            length=float(self.lengths[i]),
            foot1=self.foot1[i].copy(),
            foot2=self.foot2[i].copy(),
            phase=complex(self.phases[i]),
        )

    def groups(self):
        """Yield (length, multiplicity) with 1e-9 absolute grouping."""
        if not len(self):
            return
        start = 0
        for i in range(1, len(self) + 1):
            if i == len(self) or self.lengths[i] - self.lengths[start] > _GROUP_TOL:
                yield float(self.lengths[start]), i - start
                start = i


def difference_body(K1: convex.SupportBody, K2: convex.SupportBody,
                    orient: str = "+-") -> convex.SupportBody:
    """The body governing the orthospectrum: K1 + (-K2) for "+-", reflected for "-+"."""
    if orient not in _ORIENTATIONS:
        raise ValueError(
            f"unsupported orientation {orient!r}: only the two convex "
            f"conventions {_ORIENTATIONS} give countable orthospectra"
        )
    if orient == "+-":
        return convex.minkowski_sum(K1, convex.reflect(K2))
    return convex.minkowski_sum(convex.reflect(K1), K2)


def _lattice_candidates(dim: int, lo: float, hi: float) -> np.ndarray:
    """Integer points with lo <= |2 pi xi| <= hi, any order handled by caller."""
    r = int(math.floor(hi / (2 * math.pi)))
    ax = np.arange(-r, r + 1)
    grids = np.meshgrid(*([ax] * dim), indexing="ij")
    pts = np.stack(grids, axis=-1).reshape(-1, dim)
    norms = 2 * math.pi * np.linalg.norm(pts, axis=1)
    return pts[(norms >= lo) & (norms <= hi)]


def _restart_directions(dim: int) -> np.ndarray:
    if dim == 2:
        a = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    return spherequad.grid(dim, 8).nodes


def _newton_batch(L: convex.SupportBody, w: np.ndarray, theta0: np.ndarray):
    """Maximize theta.w - h_L(theta) per row; returns (theta, value, min_curv).

    min_curv is the smallest eigenvalue magnitude of the negated sphere
    Hessian M + f I at the solution (the transversality proxy).  Rows that
    fail to converge get value = nan.
    """
    n, d = w.shape
    theta = theta0.copy()
    active = np.ones(n, dtype=bool)
    for _ in range(_NEWTON_MAX):
        if not np.any(active):
            break
        th = theta[active]
        wa = w[active]
        frames = convex._tangent_frames(th)
        gradH = L.grad(th)
        diff = wa - gradH
        gE = np.einsum("nia,ni->na", frames, diff)
        gnorm = np.linalg.norm(gE, axis=1)
        scale = np.maximum(1.0, np.linalg.norm(wa, axis=1))
        done = gnorm <= _NEWTON_TOL * scale
        f = np.einsum("ni,ni->n", th, wa) - L.h(th)
        M = convex._hessian_tangent(L, th)
        A = M + f[:, None, None] * np.eye(d - 1)[None, :, :]
        step = np.zeros_like(gE)
        solvable = np.ones(th.shape[0], dtype=bool)
        try:
            step = np.linalg.solve(A, gE[..., None])[..., 0]
        except np.linalg.LinAlgError:
            for i in range(th.shape[0]):
                try:
                    step[i] = np.linalg.solve(A[i], gE[i])
                except np.linalg.LinAlgError:
                    solvable[i] = False
        # Newton step in the tangent frame; fall back to a short gradient
        # ascent step when the local model is not positive or overshoots.
        bad = ~solvable | (np.linalg.norm(step, axis=1) > 0.5)
        if np.any(bad):
            g = gE[bad]
            gn = np.linalg.norm(g, axis=1, keepdims=True)
            step[bad] = g / np.maximum(gn, 1e-30) * np.minimum(gn, 0.2)
        new = th + np.einsum("nia,na->ni", frames, step)
        new /= np.linalg.norm(new, axis=1, keepdims=True)
        new[done] = th[done]
        theta[active] = new
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    frames = convex._tangent_frames(theta)
    diff = w - L.grad(theta)
    gE = np.einsum("nia,ni->na", frames, diff)
    gnorm = np.linalg.norm(gE, axis=1)
    value = np.einsum("ni,ni->n", theta, w) - L.h(theta)
    M = convex._hessian_tangent(L, theta)
    A = M + value[:, None, None] * np.eye(d - 1)[None, :, :]
    min_curv = np.min(np.abs(np.linalg.eigvalsh(A)), axis=1)
    value = np.where(gnorm <= 1e-10 * np.maximum(1.0, np.linalg.norm(w, axis=1)),
                     value, np.nan)
    return theta, value, min_curv


def _solve_chunk(L, xi_chunk, T0, T, h_lo, h_hi):
    """Newton-solve one candidate chunk; returns accepted arrays and rejects."""
    w = 2 * math.pi * xi_chunk.astype(float)
    wn = np.linalg.norm(w, axis=1)
    # t(xi) is pinched between |w| - max h and |w| - min h
    could = (wn - h_hi <= T) & (wn - h_lo > T0)
    xi_chunk, w, wn = xi_chunk[could], w[could], wn[could]
    if xi_chunk.shape[0] == 0:
        d = L.dim
        z = np.zeros((0, d))
        return xi_chunk, z, np.zeros(0), []
    theta0 = np.where(wn[:, None] > 0, w / np.maximum(wn, 1e-300)[:, None], 0.0)
    if np.any(wn == 0):
        rd = _restart_directions(L.dim)
        vals = rd @ np.zeros(L.dim) - L.h(rd)
        theta0[wn == 0] = rd[int(np.argmax(vals))]
    theta, value, min_curv = _newton_batch(L, w, theta0)
    stuck = np.isnan(value)
    if np.any(stuck):
        rd = _restart_directions(L.dim)
        hs = L.h(rd)
        for i in np.flatnonzero(stuck):
            vals = rd @ w[i] - hs
            t2, v2, c2 = _newton_batch(
                L, w[i : i + 1], rd[int(np.argmax(vals))][None, :]
            )
            theta[i], value[i], min_curv[i] = t2[0], v2[0], c2[0]
        still = np.isnan(value)
        for i in np.flatnonzero(still):
            # only fatal when the candidate could land inside (T0, T]
            if wn[i] - h_hi <= T and wn[i] - h_lo > T0:
                raise NewtonDiverged(
                    f"lattice candidate {tuple(xi_chunk[i])} did not converge; "
                    f"raise T0 or inspect the body curvature"
                )
        keepable = ~still
        xi_chunk, w, theta, value, min_curv = (
            xi_chunk[keepable], w[keepable], theta[keepable],
            value[keepable], min_curv[keepable],
        )
    rejects = []
    degenerate = min_curv < _TRANSVERSALITY_TOL
    window = (value > T0) & (value <= T)
    for i in np.flatnonzero(degenerate & window):
        rejects.append((tuple(int(c) for c in xi_chunk[i]),
                        "NonUniqueMaximizer", float(value[i])))
    keep = window & ~degenerate
    return xi_chunk[keep], theta[keep], value[keep], rejects


def enumerate(K1: convex.SupportBody, K2: convex.SupportBody, orient: str = "+-",
              T0: Optional[float] = None, T: float = 50.0,
              beta: Optional[TwistForm] = None,
              workers: int = 1) -> LengthSpectrum:
    """Enumerate all orthogeodesics with length in (T0, T].

    T0 defaults to 2 (r_max(K1) + r_max(K2)) + 1, above the transversality
    threshold for desk-scale bodies.  The lattice scan window is a certified
    superset of the candidates; results are independent of worker count.
    """
    if K1.dim != K2.dim:
        raise ValueError("body dimension mismatch")
    d = K1.dim
    if beta is None:
        beta = TwistForm(np.zeros(d))
    if beta.dim != d:
        raise ValueError("twist form dimension mismatch")
    L = difference_body(K1, K2, orient)
    if T0 is None:
        T0 = 2.0 * (K1.r_max + K2.r_max) + 1.0
    if not (T > T0 >= 0):
        raise ValueError("need T > T0 >= 0")
    hb = L.h_bound()
    g = spherequad.grid(d, 24)
    hvals = L.h(g.nodes)
    # pad the grid min/max so the pre-filter stays a certified superset
    h_lo, h_hi = float(np.min(hvals)) - 1e-6, float(np.max(hvals)) + 1e-6
    cands = _lattice_candidates(d, max(0.0, T0 - hb), T + hb + 1.0)
    chunks = [cands[i : i + _CHUNK] for i in range(0, max(cands.shape[0], 1), _CHUNK)]

    def work(chunk):
        return _solve_chunk(L, chunk, T0, T, h_lo, h_hi)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]

    xi = np.concatenate([p[0] for p in parts], axis=0)
    theta = np.concatenate([p[1] for p in parts], axis=0)
    lengths = np.concatenate([p[2] for p in parts], axis=0)
    rejects = tuple(r for p in parts for r in p[3])

    order = np.lexsort(tuple(xi[:, k] for k in range(d - 1, -1, -1)) + (lengths,))
    xi, theta, lengths = xi[order], theta[order], lengths[order]

    if orient == "+-":
        start = convex.inverse_gauss(K1, theta) if len(lengths) else np.zeros((0, d))
        foot1 = start
        foot2 = start + lengths[:, None] * theta
        end = foot2
    else:
        start = convex.inverse_gauss(K2, theta) if len(lengths) else np.zeros((0, d))
        foot2 = start
        foot1 = start + lengths[:, None] * theta
        end = foot1
    arg = (lengths[:, None] * theta) @ beta.beta0 + beta.f_eval(end) - beta.f_eval(start)
    phases = np.exp(1j * arg)

    return LengthSpectrum(
        dim=d, body1=K1, body2=K2, orient=orient, T0=float(T0), T=float(T),
        beta=beta, xi=xi, theta=theta, lengths=lengths,
        foot1=foot1, foot2=foot2, phases=phases, rejects=rejects,
    )


def counting(spec: LengthSpectrum, T: float) -> int:
    """N(T): number of orthogeodesics with length in (T0, T]."""
    if T > spec.T + _GROUP_TOL:
        raise ValueError("T exceeds the enumerated range")
    return int(np.searchsorted(spec.lengths, T + _GROUP_TOL, side="left"))


def counting_weighted(spec: LengthSpectrum, beta: TwistForm, T: float) -> complex:
    """N_beta(T): phase-weighted count with the supplied twist form."""
    if T > spec.T + _GROUP_TOL:
        raise ValueError("T exceeds the enumerated range")
    n = counting(spec, T)
    if n == 0:
        return 0.0 + 0.0j
    if spec.orient == "+-":
        start, end = spec.foot1[:n], spec.foot2[:n]
    else:
        start, end = spec.foot2[:n], spec.foot1[:n]
    arg = ((spec.lengths[:n, None] * spec.theta[:n]) @ beta.beta0
           + beta.f_eval(end) - beta.f_eval(start))
    return complex(np.sum(np.exp(1j * arg)))


def density_coeffs(K1: convex.SupportBody, K2: convex.SupportBody,
                   orient: str = "+-") -> np.ndarray:
    """Coefficients rho'_k, k=1..d, of the model density rho'(t) = sum rho'_k t^{k-1}.

    rho'_k = (2 pi)^{-d} m_{k-1}(L) with m_j the surface moments of the
    difference body L.
    """
    L = difference_body(K1, K2, orient)
    data = convex.steiner(L)
    return data.surface_moments / (2 * math.pi) ** K1.dim


def steiner_density(K1: convex.SupportBody, K2: convex.SupportBody,
                    orient: str, t) -> np.ndarray | float:
    """Smooth counting density rho'(t) = (2 pi)^{-d} d/dt Vol(L + tB)."""
    coeffs = density_coeffs(K1, K2, orient)
    t_arr = np.asarray(t, dtype=float)
    powers = t_arr[..., None] ** np.arange(coeffs.size)
    out = powers @ coeffs
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def to_csv(spec: LengthSpectrum, csv_path, meta_path=None) -> None:
    """Write the spectrum table; query parameters go to a JSON sidecar."""
    d = spec.dim
    header = (
        [f"xi_{k+1}" for k in range(d)]
        + [f"theta_{k+1}" for k in range(d)]
        + ["length", "phase_re", "phase_im"]
    )
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for i in range(len(spec)):
            row = (
                [int(c) for c in spec.xi[i]]
                + [repr(float(c)) for c in spec.theta[i]]
                + [repr(float(spec.lengths[i])),
                   repr(float(spec.phases[i].real)),
                   repr(float(spec.phases[i].imag))]
            )
            wr.writerow(row)
    if meta_path is not None:
        meta = {
            "dim": d,
            "orient": spec.orient,
            "T0": spec.T0,
            "T": spec.T,
            "beta0": [float(b) for b in spec.beta.beta0],
            "f_modes": {",".join(str(c) for c in k): [v.real, v.imag]
                        for k, v in spec.beta.modes},
            "kind1": spec.body1.kind,
            "kind2": spec.body2.kind,
            "count": len(spec),
            "rejects": [list(r) for r in spec.rejects],
        }
        with open(meta_path, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
