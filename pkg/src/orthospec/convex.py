"""Strictly convex bodies described by their support functions.

A body is a Minkowski sum of primitive parts (point, ball, ellipsoid, zonal
harmonic bump).  Every primitive knows its support function h restricted to
unit vectors, the gradient of the 1-homogeneous extension (the inverse Gauss
map), and, when analytic, the extension's Hessian; curvature of harmonic
perturbations is obtained by 4th-order central finite differences of the
gradient in an orthonormal tangent frame (step 1e-4).  Principal curvature
radii are the tangent-space eigenvalues of that Hessian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import eval_chebyt, eval_chebyu, eval_gegenbauer, gamma as _gamma
from scipy.special import binom as _binom

from . import spherequad

__all__ = [
    "SupportBody",
    "SteinerData",
    "QuadratureDisagreement",
    "point",
    "ball",
    "ellipsoid",
    "harmonic",
    "support",
    "inverse_gauss",
    "minkowski_sum",
    "reflect",
    "area_element",
    "principal_radii",
    "steiner",
    "as_direction",
]

_FD_STEP = 1e-4
_MIN_RADIUS = 1e-6


class QuadratureDisagreement(Exception):
    """Doubling the quadrature order moved a Steiner integral past tolerance."""


def as_direction(v) -> np.ndarray:
    """Validate and return a unit vector (|v| = 1 within 1e-14)."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if abs(n - 1.0) > 1e-14:
        raise ValueError(f"direction must be unit length, got |v| = {n!r}")
    return v


# ---------------------------------------------------------------------------
# primitives


@dataclass(frozen=True, eq=False)
class _Point:
    x0: np.ndarray

    analytic_hessian = True

    def h(self, u):
        return u @ self.x0

    def grad(self, u):
        return np.broadcast_to(self.x0, u.shape).copy()

    def hess(self, u):
        n, d = u.shape
        return np.zeros((n, d, d))

    def reflected(self):
        return _Point(-self.x0)


@dataclass(frozen=True, eq=False)
class _Ball:
    center: np.ndarray
    radius: float

    analytic_hessian = True

    def h(self, u):
        return u @ self.center + self.radius

    def grad(self, u):
        return self.center[None, :] + self.radius * u

    def hess(self, u):
        n, d = u.shape
        eye = np.eye(d)[None, :, :]
        return self.radius * (eye - u[:, :, None] * u[:, None, :])

    def reflected(self):
        return _Ball(-self.center, self.radius)


@dataclass(frozen=True, eq=False)
class _Ellipsoid:
    center: np.ndarray
    quad_form: np.ndarray  # B = R diag(a_i^2) R^T

    analytic_hessian = True

    def _q(self, u):
        return np.sqrt(np.einsum("ni,ij,nj->n", u, self.quad_form, u))

    def h(self, u):
        return u @ self.center + self._q(u)

    def grad(self, u):
        q = self._q(u)
        return self.center[None, :] + (u @ self.quad_form) / q[:, None]

    def hess(self, u):
        q = self._q(u)
        bu = u @ self.quad_form
        return (
            self.quad_form[None, :, :] / q[:, None, None]
            - bu[:, :, None] * bu[:, None, :] / (q ** 3)[:, None, None]
        )

    def reflected(self):
        return _Ellipsoid(-self.center, self.quad_form)


def _gegenbauer_norm(dim: int, k: int, s):
    """Zonal harmonic of degree k on S^(dim-1) in the polar cosine, normalized to 1 at s=1."""
    if dim == 2:
        return eval_chebyt(k, s)
    lam = (dim - 2) / 2.0
    return eval_gegenbauer(k, lam, s) / _binom(k + dim - 3, k)


def _gegenbauer_norm_deriv(dim: int, k: int, s):
    if k == 0:
        return np.zeros_like(np.asarray(s, dtype=float))
    if dim == 2:
        return k * eval_chebyu(k - 1, s)
    lam = (dim - 2) / 2.0
    return 2.0 * lam * eval_gegenbauer(k - 1, lam + 1.0, s) / _binom(k + dim - 3, k)


@dataclass(frozen=True, eq=False)
class _Zonal:
    dim: int
    degree: int
    axis: np.ndarray  # unit vector
    coeff: float

    analytic_hessian = False

    def h(self, u):
        return self.coeff * _gegenbauer_norm(self.dim, self.degree, u @ self.axis)

    def grad(self, u):
        s = u @ self.axis
        g = _gegenbauer_norm(self.dim, self.degree, s)
        dg = _gegenbauer_norm_deriv(self.dim, self.degree, s)
        return self.coeff * (
            g[:, None] * u + dg[:, None] * (self.axis[None, :] - s[:, None] * u)
        )

    def reflected(self):
        # even degree: h(-theta) = h with the axis flipped
        return _Zonal(self.dim, self.degree, -self.axis, self.coeff)


# ---------------------------------------------------------------------------
# bodies


@dataclass(frozen=True, eq=False)
class SupportBody:
    """Convex body given as a Minkowski sum of support-function primitives."""

    dim: int
    kind: str
    parts: tuple
    r_min: float = 0.0  # certified minimum principal radius on the validation grid
    r_max: float = 0.0

    def h(self, u: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        out = np.zeros(u.shape[0])
        for p in self.parts:
            out = out + p.h(u)
        return out

    def grad(self, u: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        out = np.zeros_like(u)
        for p in self.parts:
            out = out + p.grad(u)
        return out

    @property
    def is_point(self) -> bool:
        return all(isinstance(p, _Point) for p in self.parts)

    def h_bound(self) -> float:
        """Max of |h| over a sample grid (used for lattice scan windows)."""
        g = spherequad.grid(self.dim, 24)
        return float(np.max(np.abs(self.h(g.nodes))))


def _tangent_frames(theta: np.ndarray) -> np.ndarray:
    """Orthonormal frames (n, d, d-1) spanning the tangent space at each unit theta."""
    n, d = theta.shape
    e = np.zeros(d)
    e[-1] = 1.0
    w = theta - e[None, :]
    wn = np.linalg.norm(w, axis=1)
    frames = np.empty((n, d, d - 1))
    ok = wn > 1e-8
    # Householder Q = I - 2 w w^T / |w|^2 maps e_d to theta; first d-1 columns are tangent.
    if np.any(ok):
        wo = w[ok] / wn[ok][:, None]
        q = np.eye(d)[None, :, :] - 2.0 * wo[:, :, None] * wo[:, None, :]
        frames[ok] = q[:, :, : d - 1]
    if np.any(~ok):
        frames[~ok] = np.eye(d)[:, : d - 1][None, :, :]
    return frames


def _hessian_tangent(body: SupportBody, theta: np.ndarray) -> np.ndarray:
    """Tangent-space block of the extension Hessian: (n, d-1, d-1), symmetric."""
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    n, d = theta.shape
    frames = _tangent_frames(theta)
    M = np.zeros((n, d - 1, d - 1))
    analytic = [p for p in body.parts if p.analytic_hessian]
    fd = [p for p in body.parts if not p.analytic_hessian]
    if analytic:
        H = np.zeros((n, d, d))
        for p in analytic:
            H = H + p.hess(theta)
        M += np.einsum("nia,nij,njb->nab", frames, H, frames)
    if fd:
        def grad_sum(u):
            u = u / np.linalg.norm(u, axis=1, keepdims=True)
            out = np.zeros_like(u)
            for p in fd:
                out = out + p.grad(u)
            return out

        h = _FD_STEP
        cols = []
        for b in range(d - 1):
            eb = frames[:, :, b]
            gp2 = grad_sum(theta + 2 * h * eb)
            gp1 = grad_sum(theta + h * eb)
            gm1 = grad_sum(theta - h * eb)
            gm2 = grad_sum(theta - 2 * h * eb)
            dcol = (-gp2 + 8.0 * gp1 - 8.0 * gm1 + gm2) / (12.0 * h)
            cols.append(np.einsum("nia,ni->na", frames, dcol))
        Mfd = np.stack(cols, axis=2)  # (n, d-1, d-1) columns = directions
        M += 0.5 * (Mfd + np.swapaxes(Mfd, 1, 2))
    return M


def principal_radii(body: SupportBody, theta: np.ndarray) -> np.ndarray:
    """Principal curvature radii (n, d-1), ascending, at unit normals theta."""
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    if body.is_point:
        return np.zeros((theta.shape[0], body.dim - 1))
    return np.linalg.eigvalsh(_hessian_tangent(body, theta))


def _certify(dim: int, kind: str, parts: tuple, check_strict: bool) -> SupportBody:
    body = SupportBody(dim=dim, kind=kind, parts=parts)
    if body.is_point:
        return body
    g = spherequad.grid(dim, 24)
    radii = principal_radii(body, g.nodes)
    r_min = float(np.min(radii))
    r_max = float(np.max(radii))
    if check_strict and r_min <= _MIN_RADIUS:
        raise ValueError(
            f"body is not certifiably strictly convex: min principal radius "
            f"{r_min:.3e} <= {_MIN_RADIUS:g}"
        )
    return replace(body, r_min=r_min, r_max=r_max)


def point(x0) -> SupportBody:
    x0 = np.asarray(x0, dtype=float)
    return SupportBody(dim=x0.size, kind="point", parts=(_Point(x0),))


def ball(center, radius: float) -> SupportBody:
    center = np.asarray(center, dtype=float)
    if radius <= 0:
        raise ValueError("ball radius must be positive")
    return _certify(center.size, "ball", (_Ball(center, float(radius)),), True)


def ellipsoid(center, semiaxes, rotation: Optional[np.ndarray] = None) -> SupportBody:
    center = np.asarray(center, dtype=float)
    semiaxes = np.asarray(semiaxes, dtype=float)
    if np.any(semiaxes <= 0):
        raise ValueError("semiaxes must be positive")
    if center.size != semiaxes.size:
        raise ValueError("center and semiaxes dimension mismatch")
    B = np.diag(semiaxes ** 2)
    if rotation is not None:
        rotation = np.asarray(rotation, dtype=float)
        B = rotation @ B @ rotation.T
    return _certify(center.size, "ellipsoid", (_Ellipsoid(center, B),), True)


def harmonic(base: SupportBody, terms: Sequence[tuple]) -> SupportBody:
    """Base body plus even zonal harmonic perturbations of the support function.

    Each term is (degree, axis, coeff) with even degree >= 2; the axis is
    normalized.  Construction fails unless the perturbed body stays strictly
    convex (min principal radius > 1e-6 on the validation grid).
    """
    parts = list(base.parts)
    for degree, axis, coeff in terms:
        degree = int(degree)
        if degree < 2 or degree % 2 != 0:
            raise ValueError("harmonic degrees must be even and >= 2")
        axis = np.asarray(axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        parts.append(_Zonal(base.dim, degree, axis, float(coeff)))
    return _certify(base.dim, "harmonic", tuple(parts), True)


# ---------------------------------------------------------------------------
# operations


def support(body: SupportBody, u) -> np.ndarray | float:
    """Support function h(u) = max over the body of u.x, for unit u."""
    u_arr = np.atleast_2d(np.asarray(u, dtype=float))
    vals = body.h(u_arr)
    return float(vals[0]) if np.asarray(u).ndim == 1 else vals

def inverse_gauss(body: SupportBody, u) -> np.ndarray:
    """Boundary point with outward normal u: the gradient of the extension of h."""
    u_arr = np.atleast_2d(np.asarray(u, dtype=float))
    vals = body.grad(u_arr)
    return vals[0] if np.asarray(u).ndim == 1 else vals


def _simplify(parts: list) -> list:
    points = [p for p in parts if isinstance(p, _Point)]
    balls = [p for p in parts if isinstance(p, _Ball)]
    rest = [p for p in parts if not isinstance(p, (_Point, _Ball))]
    out = []
    if balls:
        c = sum(b.center for b in balls) + sum(p.x0 for p in points)
        out.append(_Ball(np.asarray(c, dtype=float), sum(b.radius for b in balls)))
    elif points:
        shift = np.asarray(sum(p.x0 for p in points), dtype=float)
        if rest and isinstance(rest[0], _Ellipsoid):
            e = rest.pop(0)
            out.append(_Ellipsoid(e.center + shift, e.quad_form))
        else:
            out.append(_Point(shift))
    return out + rest


def minkowski_sum(a: SupportBody, b: SupportBody) -> SupportBody:
    """Body with support function h_a + h_b."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    parts = _simplify(list(a.parts) + list(b.parts))
    if len(parts) == 1:
        kind = {"_Point": "point", "_Ball": "ball", "_Ellipsoid": "ellipsoid"}.get(
            type(parts[0]).__name__, "sum"
        )
    else:
        kind = "sum"
    return _certify(a.dim, kind, tuple(parts), False)


def reflect(body: SupportBody) -> SupportBody:
    """The reflected body -K, whose support function is h(-u)."""
    return _certify(body.dim, body.kind, tuple(p.reflected() for p in body.parts), False)


def area_element(body: SupportBody, t, theta) -> np.ndarray:
    """Area element of the outer parallel body at distance t: product of (t + r_i(theta)).

    Monic of degree dim-1 in t; strictly positive for t >= 0 on strictly
    convex bodies; reduces to t^(dim-1) for points.
    """
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    radii = principal_radii(body, theta)
    t = np.asarray(t, dtype=float)
    return np.prod(t[..., None, None] + radii[None, ...], axis=-1).squeeze()


def _area_coeffs(body: SupportBody, theta: np.ndarray) -> np.ndarray:
    """Coefficients a_j(theta) of P(t, theta) = sum_j a_j t^j, shape (n, dim)."""
    radii = principal_radii(body, theta)
    n, dm1 = radii.shape
    coeffs = np.zeros((n, dm1 + 1))
    coeffs[:, 0] = 1.0
    for i in range(dm1):
        coeffs[:, 1 : i + 2] += coeffs[:, : i + 1] * radii[:, i : i + 1]
    # coeffs[:, j] currently multiplies t^(dm1 - j); flip to ascending powers
    return coeffs[:, ::-1]


@dataclass(frozen=True)
class SteinerData:
    """Integrated curvature data of a body.

    surface_moments[j] is the sphere integral of the area-element coefficient
    of t^j; steiner_coeffs[l] is the coefficient of t^l in the volume of the
    outer parallel body; intrinsic[j] is the j-th intrinsic volume, so
    intrinsic[0] = 1, intrinsic[dim] = volume, intrinsic[dim-1] = half the
    boundary surface.
    """

    dim: int
    volume: float
    surface_moments: np.ndarray  # (dim,)
    steiner_coeffs: np.ndarray   # (dim+1,)
    intrinsic: np.ndarray        # (dim+1,), index = intrinsic-volume degree

    def parallel_volume(self, t: float) -> float:
        return float(np.polyval(self.steiner_coeffs[::-1], t))


def steiner(body: SupportBody, order: int = 48) -> SteinerData:
    """Steiner data by sphere quadrature, validated by order doubling (tol 1e-8)."""
    d = body.dim

    def compute(n):
        g = spherequad.grid(d, n)
        coeffs = _area_coeffs(body, g.nodes)
        moments = g.weights @ coeffs
        vol = float(g.weights @ (body.h(g.nodes) * coeffs[:, 0])) / d
        return vol, moments

    vol1, m1 = compute(order)
    vol2, m2 = compute(2 * order)
    disagreement = max(abs(vol2 - vol1), float(np.max(np.abs(m2 - m1))))
    if disagreement > 1e-8:
        raise QuadratureDisagreement(
            f"steiner quadrature disagreement {disagreement:.3e} at orders "
            f"{order}/{2 * order}"
        )
    steiner_coeffs = np.zeros(d + 1)
    steiner_coeffs[0] = vol2
    steiner_coeffs[1:] = m2 / np.arange(1, d + 1)
    ell = np.arange(d + 1)
    intrinsic_rev = steiner_coeffs * _gamma(ell / 2.0 + 1.0) / math.pi ** (ell / 2.0)
    return SteinerData(
        dim=d,
        volume=vol2,
        surface_moments=m2,
        steiner_coeffs=steiner_coeffs,
        intrinsic=intrinsic_rev[::-1].copy(),
    )
