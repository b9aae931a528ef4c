"""Spin-n/2 representations of SU(2), coherent projections and the isotypic
decomposition of the matrix algebra under conjugation."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal, expm
from scipy.special import gammaln

from .errors import DegenerateBasis

MAX_N = 64


@dataclass(frozen=True, eq=False)
class SpinIrrep:
    """Irreducible representation of highest weight ``n`` (spin ``n/2``).

    Basis is the ``J_z`` eigenbasis ordered ``m = n/2, n/2 - 1, ..., -n/2``, so
    the highest weight vector is the first standard basis vector.
    """

    n: int
    Jx: np.ndarray
    Jy: np.ndarray
    Jz: np.ndarray
    xi: np.ndarray
    P: np.ndarray

    @property
    def d(self) -> int:
        return self.n + 1

    @property
    def J(self):
        return (self.Jx, self.Jy, self.Jz)

    @property
    def Jplus(self):
        return self.Jx + 1j * self.Jy

    @property
    def Jminus(self):
        return self.Jx - 1j * self.Jy

    @property
    def m_values(self):
        return self.n / 2.0 - np.arange(self.n + 1)

    def generator(self, direction):
        """``X . J`` for a real 3-vector X."""
        x = np.asarray(direction, dtype=float)
        return x[0] * self.Jx + x[1] * self.Jy + x[2] * self.Jz

    def rotation(self, axis, angle):
        """``exp(-i angle axis.J)``: rotates by ``angle`` about the unit ``axis``."""
        axis = np.asarray(axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        return expm(-1j * angle * self.generator(axis))

    def euler(self, theta, phi):
        """``exp(-i phi J_z) exp(-i theta J_y)``."""
        return expm(-1j * phi * self.Jz) @ expm(-1j * theta * self.Jy)

    def coherent_states(self, theta, phi):
        """Coherent vectors ``|x> = exp(-i phi J_z) exp(-i theta J_y) xi`` as rows.

        Closed form ``sqrt(C(n, k)) cos(theta/2)^(n-k) sin(theta/2)^k e^{-i m phi}``
        with ``m = n/2 - k``.
        """
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        return _coherent_rows(self.n, theta, phi)


def _coherent_rows(n, theta, phi):
    k = np.arange(n + 1)
    logbinom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    c = np.cos(theta / 2)[:, None]
    s = np.sin(theta / 2)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        amp = np.exp(0.5 * logbinom) * np.power(c, n - k) * np.power(s, k)
    m = n / 2.0 - k
    return amp * np.exp(-1j * np.outer(phi, m))


@lru_cache(maxsize=None)
def spin_irrep(n: int) -> SpinIrrep:
    """Standard spin-``n/2`` matrices (Condon-Shortley phases)."""
    n = int(n)
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must lie in [1, {MAX_N}]")
    j = n / 2.0
    m = j - np.arange(n + 1)
    jz = np.diag(m).astype(complex)
    # <m+1|J+|m> = sqrt(j(j+1) - m(m+1)); row index of m+1 is one above m
    jp = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    xi = np.zeros(n + 1, dtype=complex)
    xi[0] = 1.0
    P = np.outer(xi, xi.conj())
    for arr in (jx, jy, jz, xi, P):
        arr.setflags(write=False)
    return SpinIrrep(n, jx, jy, jz, xi, P)


def coherent_projection(irrep: SpinIrrep, point):
    """``alpha_x(P) = |x><x|`` for ``point = (theta, phi)``; batched over arrays."""
    theta, phi = point
    rows = irrep.coherent_states(theta, phi)
    proj = rows[:, :, None] * rows[:, None, :].conj()
    if np.ndim(theta) == 0:
        return proj[0]
    return proj


def weyl_dim(n: int) -> int:
    """Dimension of the SU(2) irrep with highest weight ``n``.

    Weyl's formula with the single positive root: ``<n w + delta, a> / <delta, a>``
    with ``<w, a> = <delta, a> = 1``.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    return n + 1


# ------------------------------------------------------------ isotypic pieces


@dataclass(frozen=True, eq=False)
class IsotypicBasis:
    """``blocks[l]`` has shape ``(2l + 1, d, d)``: ``T^l_m`` for ``m = l, ..., -l``."""

    n: int
    blocks: tuple

    def flat(self):
        """All basis matrices stacked, ordered by ``l`` then descending ``m``."""
        return np.concatenate(self.blocks, axis=0)

    def labels(self):
        return [(l, m) for l in range(self.n + 1) for m in range(l, -l - 1, -1)]

    def coefficients(self, T):
        """Hilbert-Schmidt coefficients of ``T`` in the flat basis."""
        flat = self.flat()
        return np.einsum("kij,ij->k", flat.conj(), T)

    def project(self, T):
        """Components of ``T`` in each spin-``l`` subspace."""
        return [np.einsum("k,kij->ij", np.einsum("kab,ab->k", b.conj(), T), b) for b in self.blocks]


@lru_cache(maxsize=None)
def isotypic_basis(irrep: SpinIrrep, tol: float = 1e-12) -> IsotypicBasis:
    """Orthonormal basis of each spin-l component of ``M_{n+1}`` under ``ad J``.

    ``T^l_m`` lives on the ``m``-th superdiagonal.  Repeated ``ad J_-`` from
    ``J_+^l`` loses orthogonality badly beyond n ~ 20, so each superdiagonal is
    diagonalized directly: there the adjoint Casimir is a symmetric tridiagonal
    matrix with simple spectrum ``l(l+1)``, ``l = |m|, ..., n``.  Signs follow
    the ladder convention: ``T^l_l`` has positive overlap with ``J_+^l`` and
    ``T^l_{m-1}`` with ``ad J_-(T^l_m)``.  Matrices are unit in the
    Hilbert-Schmidt norm ``tr(A* B)``.
    """
    n, d = irrep.n, irrep.d
    j = n / 2.0
    mv = irrep.m_values
    # a[p] = <p-1|J_+|p>, zero for p = 0
    a = np.concatenate([[0.0], np.real(np.diag(irrep.Jplus, k=1))])
    a_ext = np.concatenate([a, [0.0]])
    vectors = {}
    for m in range(-n, n + 1):
        p = np.arange(max(0, -m), min(d, d - m))
        q = p + m
        diag = 2 * j * (j + 1) - 2 * mv[p] * mv[q]
        off = -a_ext[p[1:]] * a_ext[q[1:]]
        evals, evecs = eigh_tridiagonal(diag, off)
        expected = np.array([l * (l + 1) for l in range(abs(m), n + 1)], dtype=float)
        if np.max(np.abs(evals - expected)) > 1e-8 * max(1.0, expected[-1]):
            raise DegenerateBasis(f"Casimir spectrum off on superdiagonal {m}")
        vectors[m] = (p, q, evecs)

    def assemble(l, m):
        p, q, evecs = vectors[m]
        T = np.zeros((d, d), dtype=complex)
        T[p, q] = evecs[:, l - abs(m)]
        return T

    jp, jm = irrep.Jplus, irrep.Jminus
    blocks = []
    top = np.eye(d, dtype=complex)
    for l in range(n + 1):
        if l > 0:
            top = top @ jp
            top = top / np.linalg.norm(top)
        cur = assemble(l, l)
        if np.real(np.vdot(cur, top)) < 0:
            cur = -cur
        block = [cur]
        for m in range(l, -l, -1):
            lowered = jm @ cur - cur @ jm
            if np.linalg.norm(lowered) < tol:
                raise DegenerateBasis(f"ladder pivot vanished at l={l}, m={m}")
            nxt = assemble(l, m - 1)
            if np.real(np.vdot(nxt, lowered)) < 0:
                nxt = -nxt
            block.append(nxt)
            cur = nxt
        blocks.append(np.array(block))
    return IsotypicBasis(n, tuple(blocks))


def adjoint_casimir(irrep: SpinIrrep, T):
    """``sum_k [J_k, [J_k, T]]``."""
    out = np.zeros_like(T, dtype=complex)
    for J in irrep.J:
        c = J @ T - T @ J
        out += J @ c - c @ J
    return out


# ------------------------------------------------------------------ span check


@dataclass(frozen=True)
class SpanReport:
    rank: int
    target: int
    singular_values: tuple

    @property
    def full(self) -> bool:
        return self.rank == self.target


def span_check(projections, tol: float = 1e-9) -> SpanReport:
    """Numerical rank of the linear span of a family of ``d x d`` matrices."""
    projections = np.asarray(projections)
    d = projections.shape[-1]
    rows = projections.reshape(len(projections), d * d)
    sv = np.linalg.svd(rows, compute_uv=False)
    rank = int(np.sum(sv > tol))
    return SpanReport(rank, d * d, tuple(float(s) for s in sv))


def span_check_su2(irrep: SpinIrrep, frame, tol: float = 1e-9) -> SpanReport:
    return span_check(coherent_projection(irrep, (frame.theta, frame.phi)), tol)


def span_check_finite(model, P, tol: float = 1e-9) -> SpanReport:
    P = np.asarray(P, dtype=complex)
    return span_check([u @ P @ u.conj().T for u in model.elements], tol)
