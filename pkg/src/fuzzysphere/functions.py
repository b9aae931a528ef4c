"""Band-limited functions on the sphere stored as spherical-harmonic coefficients.

Harmonics are normalized against the probability measure on the sphere, so
``Y_00 = 1`` and ``int |Y_lm|^2 dmu = 1``.  Coefficient ``(l, m)`` lives at flat
index ``l*l + l + m``.  The angular-momentum operators ``L_k = -i (r x grad)_k``
act on each degree block as the spin-``l`` matrices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.special import sph_harm_y

from .errors import BandLimitExceeded
from .groupmodel import CoherentFrame, sphere_angles, sphere_points, su2_frame


def n_coeffs(l_max: int) -> int:
    return (l_max + 1) ** 2


def flat_index(l: int, m: int) -> int:
    return l * l + l + m


@lru_cache(maxsize=None)
def degree_labels(l_max: int):
    """Arrays ``(l, m)`` for every flat index up to ``l_max``."""
    ls = np.concatenate([np.full(2 * l + 1, l) for l in range(l_max + 1)])
    ms = np.concatenate([np.arange(-l, l + 1) for l in range(l_max + 1)])
    ls.setflags(write=False)
    ms.setflags(write=False)
    return ls, ms


def harmonic_matrix(l_max: int, theta, phi):
    """Rows of normalized ``Y_lm`` at each point: shape ``(npts, (l_max+1)^2)``."""
    ls, ms = degree_labels(l_max)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    y = sph_harm_y(ls[None, :], ms[None, :], theta[:, None], phi[:, None])
    return np.sqrt(4 * np.pi) * y


@lru_cache(maxsize=64)
def _frame_harmonics(l_max: int, band: int):
    frame = su2_frame(band)
    Y = harmonic_matrix(l_max, frame.theta, frame.phi)
    Y.setflags(write=False)
    return frame, Y


def projection_frame(degree: int):
    """Smallest product frame integrating products of degree ``<= degree`` harmonics."""
    return su2_frame(max(1, -(-degree // 2)))


@lru_cache(maxsize=None)
def angular_momentum_blocks(l_max: int):
    """Matrices ``L_x, L_y, L_z`` on the flat coefficient vector (block diagonal)."""
    size = n_coeffs(l_max)
    lx = np.zeros((size, size), dtype=complex)
    ly = np.zeros((size, size), dtype=complex)
    lz = np.zeros((size, size), dtype=complex)
    for l in range(l_max + 1):
        off = l * l
        m = np.arange(-l, l + 1)
        # L_+ Y_lm = sqrt(l(l+1) - m(m+1)) Y_l,m+1 ; column m maps to row m+1
        lp = np.diag(np.sqrt(l * (l + 1) - m[:-1] * (m[:-1] + 1.0)), k=-1)
        lm = lp.T
        sl = slice(off, off + 2 * l + 1)
        lx[sl, sl] = (lp + lm) / 2
        ly[sl, sl] = (lp - lm) / 2j
        lz[sl, sl] = np.diag(m)
    for a in (lx, ly, lz):
        a.setflags(write=False)
    return lx, ly, lz


@lru_cache(maxsize=None)
def real_basis(l_max: int):
    """Columns map real parameters to coefficients of real-valued functions.

    Orthonormal: the L^2 norm of the function equals the Euclidean norm of the
    parameter vector.
    """
    size = n_coeffs(l_max)
    B = np.zeros((size, size), dtype=complex)
    col = 0
    r2 = 1 / np.sqrt(2)
    for l in range(l_max + 1):
        B[flat_index(l, 0), col] = 1.0
        col += 1
        for m in range(1, l + 1):
            sign = (-1) ** m
            B[flat_index(l, m), col] = r2
            B[flat_index(l, -m), col] = sign * r2
            B[flat_index(l, m), col + 1] = 1j * r2
            B[flat_index(l, -m), col + 1] = -1j * sign * r2
            col += 2
    B.setflags(write=False)
    return B


@dataclass(frozen=True, eq=False)
class FunctionElement:
    """Complex function on the sphere with harmonic content up to ``l_max``."""

    l_max: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (n_coeffs(self.l_max),):
            raise ValueError(f"expected {n_coeffs(self.l_max)} coefficients, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    # -- constructors
    @classmethod
    def zero(cls, l_max: int = 0):
        return cls(l_max, np.zeros(n_coeffs(l_max), dtype=complex))

    @classmethod
    def constant(cls, c, l_max: int = 0):
        out = np.zeros(n_coeffs(l_max), dtype=complex)
        out[0] = c
        return cls(l_max, out)

    @classmethod
    def harmonic(cls, l: int, m: int, l_max: int | None = None, scale=1.0):
        l_max = l if l_max is None else l_max
        out = np.zeros(n_coeffs(l_max), dtype=complex)
        out[flat_index(l, m)] = scale
        return cls(l_max, out)

    @classmethod
    def from_real_params(cls, l_max: int, params):
        return cls(l_max, real_basis(l_max) @ np.asarray(params, dtype=float))

    @classmethod
    def random(cls, rng, l_max: int, real: bool = True, scale: float = 1.0):
        size = n_coeffs(l_max)
        if real:
            return cls.from_real_params(l_max, scale * rng.standard_normal(size))
        c = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        return cls(l_max, scale * c / np.sqrt(2))

    @classmethod
    def from_samples(cls, values, frame: CoherentFrame, l_max: int):
        """Quadrature projection of grid samples onto harmonics of degree ``<= l_max``."""
        Y = harmonic_matrix(l_max, frame.theta, frame.phi)
        coeffs = (Y.conj() * frame.weights[:, None]).T @ np.asarray(values)
        return cls(l_max, coeffs)

    @classmethod
    def from_callable(cls, func, l_max: int):
        """Project ``func(theta, phi)``; exact when ``func`` has degree ``<= l_max``."""
        frame = projection_frame(2 * l_max)
        return cls.from_samples(func(frame.theta, frame.phi), frame, l_max)

    # -- structure
    def padded(self, l_max: int):
        if l_max < self.l_max:
            if np.any(np.abs(self.coeffs[n_coeffs(l_max):]) > 1e-12):
                raise BandLimitExceeded(f"content above degree {l_max}")
            return FunctionElement(l_max, self.coeffs[: n_coeffs(l_max)])
        out = np.zeros(n_coeffs(l_max), dtype=complex)
        out[: self.coeffs.size] = self.coeffs
        return FunctionElement(l_max, out)

    def band(self, tol: float = 1e-12) -> int:
        """Highest degree carrying a coefficient above ``tol``."""
        ls, _ = degree_labels(self.l_max)
        nz = np.abs(self.coeffs) > tol
        return int(ls[nz].max()) if nz.any() else 0

    def degree_part(self, l: int):
        out = np.zeros_like(self.coeffs)
        sl = slice(l * l, (l + 1) ** 2)
        out[sl] = self.coeffs[sl]
        return FunctionElement(self.l_max, out)

    def conj(self):
        """Coefficients of the complex conjugate function."""
        ls, ms = degree_labels(self.l_max)
        mirror = ls * ls + ls - ms
        sign = np.where(ms % 2 == 0, 1.0, -1.0)
        return FunctionElement(self.l_max, sign * np.conj(self.coeffs[mirror]))

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.coeffs - self.conj().coeffs), initial=0.0) <= tol)

    def real_part(self):
        return FunctionElement(self.l_max, (self.coeffs + self.conj().coeffs) / 2)

    def imag_part(self):
        return FunctionElement(self.l_max, (self.coeffs - self.conj().coeffs) / 2j)

    def _align(self, other):
        L = max(self.l_max, other.l_max)
        return self.padded(L).coeffs, other.padded(L).coeffs, L

    def __add__(self, other):
        if not isinstance(other, FunctionElement):
            return self + FunctionElement.constant(other)
        a, b, L = self._align(other)
        return FunctionElement(L, a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __rsub__(self, other):
        return (-1) * self + other

    def __neg__(self):
        return (-1) * self

    def __mul__(self, other):
        if isinstance(other, FunctionElement):
            return self.product(other)
        return FunctionElement(self.l_max, self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return FunctionElement(self.l_max, self.coeffs / c)

    def product(self, other):
        """Exact pointwise product, band ``l_max`` of the sum."""
        L = self.l_max + other.l_max
        frame, Y = _frame_harmonics(L, projection_frame(2 * L).n_band)
        va = Y[:, : self.coeffs.size] @ self.coeffs
        vb = Y[:, : other.coeffs.size] @ other.coeffs
        return FunctionElement(L, (Y.conj() * frame.weights[:, None]).T @ (va * vb))

    # -- evaluation
    def __call__(self, theta, phi):
        return harmonic_matrix(self.l_max, theta, phi) @ self.coeffs

    def at_points(self, points):
        theta, phi = sphere_angles(points)
        return self(theta, phi)

    def on_frame(self, frame: CoherentFrame):
        return self(frame.theta, frame.phi)

    def angular(self):
        """Coefficients of ``(L_x f, L_y f, L_z f)`` as a ``(3, ncoeff)`` array."""
        return np.stack([A @ self.coeffs for A in angular_momentum_blocks(self.l_max)])

    def angular_at(self, theta, phi):
        """Values of ``L_k f`` at points, shape ``(3, npts)``."""
        Y = harmonic_matrix(self.l_max, theta, phi)
        return self.angular() @ Y.T

    def mean(self) -> complex:
        return complex(self.coeffs[0])

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def sup_norm(self, refine: bool = True) -> float:
        coeffs = self.coeffs
        l_max = self.l_max

        def modulus(theta, phi):
            return np.abs(harmonic_matrix(l_max, theta, phi) @ coeffs)

        return maximize_on_sphere(modulus, l_max, refine=refine)[0]

    # -- serialization
    def to_json(self) -> dict:
        ls, ms = degree_labels(self.l_max)
        rows = [
            [int(l), int(m), float(c.real), float(c.imag)]
            for l, m, c in zip(ls, ms, self.coeffs)
            if c != 0
        ]
        return {"l_max": int(self.l_max), "coeffs": rows}

    @classmethod
    def from_json(cls, data):
        if isinstance(data, (str, Path)) and not str(data).lstrip().startswith("{"):
            data = Path(data).read_text()
        if isinstance(data, str):
            data = json.loads(data)
        l_max = int(data["l_max"])
        out = np.zeros(n_coeffs(l_max), dtype=complex)
        for l, m, re, im in data["coeffs"]:
            if not (0 <= l <= l_max and -l <= m <= l):
                raise BandLimitExceeded(f"coefficient ({l}, {m}) outside l_max={l_max}")
            out[flat_index(int(l), int(m))] = re + 1j * im
        return cls(l_max, out)


def cos_theta(l_max: int = 1) -> FunctionElement:
    """The zonal function ``cos(theta)``: ``Y_10 = sqrt(3) cos(theta)``."""
    return FunctionElement.harmonic(1, 0, l_max, scale=1 / np.sqrt(3))


def gradient_modulus(values_of_L):
    """Per point ``sup_{|X|=1} |X . v|`` for complex ``v = (L_x f, L_y f, L_z f)``.

    With ``v = a + ib`` this is the square root of the top eigenvalue of the
    2x2 Gram matrix of ``a`` and ``b``.
    """
    a = values_of_L.real
    b = values_of_L.imag
    aa = np.sum(a * a, axis=0)
    bb = np.sum(b * b, axis=0)
    ab = np.sum(a * b, axis=0)
    half = 0.5 * (aa + bb)
    disc = np.sqrt(0.25 * (aa - bb) ** 2 + ab**2)
    return np.sqrt(np.maximum(half + disc, 0.0))


def gradient_direction(values_of_L):
    """Maximizing unit direction ``X`` and phase for :func:`gradient_modulus`.

    Returns ``(X, phase)`` with ``X . v = e^{i phase} |X . v|`` per point.
    """
    a = values_of_L.real
    b = values_of_L.imag
    npts = a.shape[1]
    X = np.empty((3, npts))
    for j in range(npts):
        G = np.array([[a[:, j] @ a[:, j], a[:, j] @ b[:, j]], [a[:, j] @ b[:, j], b[:, j] @ b[:, j]]])
        w, V = np.linalg.eigh(G)
        c = V[:, -1]
        x = c[0] * a[:, j] + c[1] * b[:, j]
        nrm = np.linalg.norm(x)
        X[:, j] = x / nrm if nrm > 0 else np.array([0.0, 0.0, 1.0])
    proj = np.sum(X * values_of_L, axis=0)
    return X, np.angle(proj)


# ---------------------------------------------------------------- sphere search


def _tangent_basis(p):
    helper = np.where(np.abs(p[:, 2:3]) < 0.9, np.array([[0.0, 0.0, 1.0]]), np.array([[1.0, 0.0, 0.0]]))
    e1 = np.cross(p, helper)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(p, e1)
    return e1, e2


def search_points(degree: int):
    """Dense product grid plus both poles, fine enough for degree ``degree`` content."""
    frame = su2_frame(max(3, degree + 2))
    theta = np.concatenate([frame.theta, [0.0, np.pi]])
    phi = np.concatenate([frame.phi, [0.0, 0.0]])
    return theta, phi


def maximize_on_sphere(func, degree: int, refine: bool = True, n_seeds: int = 6, tol: float = 1e-8):
    """Maximize a vectorized ``func(theta, phi) -> values`` over the sphere.

    A dense grid gives seeds; each seed is polished by a compass search in its
    tangent plane.  Returns ``(value, (theta, phi))``.
    """
    theta, phi = search_points(degree)
    vals = func(theta, phi)
    best = int(np.argmax(vals))
    if not refine:
        return float(vals[best]), (float(theta[best]), float(phi[best]))
    order = np.argsort(-vals, kind="stable")[:n_seeds]
    p = sphere_points(theta[order], phi[order])
    cur = vals[order].astype(float)
    h = np.full(len(order), np.pi / (degree + 2))
    angles = 2 * np.pi * np.arange(8) / 8
    ca, sa = np.cos(angles), np.sin(angles)
    for _ in range(200):
        active = h > tol
        if not active.any():
            break
        e1, e2 = _tangent_basis(p)
        cand = (
            p[:, None, :]
            + h[:, None, None] * (ca[None, :, None] * e1[:, None, :] + sa[None, :, None] * e2[:, None, :])
        )
        cand /= np.linalg.norm(cand, axis=2, keepdims=True)
        ct, cp = sphere_angles(cand.reshape(-1, 3))
        cv = func(ct, cp).reshape(len(order), 8)
        j = np.argmax(cv, axis=1)
        gain = cv[np.arange(len(order)), j]
        move = active & (gain > cur)
        p[move] = cand[move, j[move]]
        cur[move] = gain[move]
        h[active & ~move] *= 0.5
    k = int(np.argmax(cur))
    if cur[k] < vals[best]:
        return float(vals[best]), (float(theta[best]), float(phi[best]))
    t, f = sphere_angles(p[k : k + 1])
    return float(cur[k]), (float(t[0]), float(f[0]))


# ---------------------------------------------------------------------- jets


@dataclass(frozen=True, eq=False)
class Jet:
    """Values and first derivatives ``L_k f`` of a function on a fixed point set.

    Closed under products and inverses, so the Leibniz inequalities can be
    tested for functions such as ``1/f`` that are not band-limited.
    """

    theta: np.ndarray
    phi: np.ndarray
    values: np.ndarray
    derivs: np.ndarray

    @classmethod
    def of(cls, f: FunctionElement, theta, phi):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        return cls(theta, phi, f(theta, phi), f.angular_at(theta, phi))

    @classmethod
    def constant(cls, c, theta, phi):
        z = np.zeros(np.size(theta), dtype=complex)
        return cls(theta, phi, z + c, np.zeros((3, np.size(theta)), dtype=complex))

    def _same(self, other):
        if self.values.shape != other.values.shape:
            raise ValueError("jets live on different point sets")

    def __add__(self, other):
        self._same(other)
        return Jet(self.theta, self.phi, self.values + other.values, self.derivs + other.derivs)

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._same(other)
            return Jet(
                self.theta,
                self.phi,
                self.values * other.values,
                self.derivs * other.values + self.values * other.derivs,
            )
        return Jet(self.theta, self.phi, self.values * other, self.derivs * other)

    __rmul__ = __mul__

    def inverse(self):
        inv = 1.0 / self.values
        return Jet(self.theta, self.phi, inv, -self.derivs * inv**2)

    def conj(self):
        # L_k conj(f) = -conj(L_k f) because L_k = -i (r x grad)_k
        return Jet(self.theta, self.phi, np.conj(self.values), -np.conj(self.derivs))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __call__(self, theta, phi):
        return self.values
