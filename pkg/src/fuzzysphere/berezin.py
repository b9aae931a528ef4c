"""Covariant and contravariant Berezin symbols for the spin-n/2 fuzzy sphere.

``sigma_T(x) = <x|T|x>`` sends matrices to functions of degree ``<= n``;
``breve_sigma_f = d * int f(x) |x><x| dx`` goes back.  Both are unital,
positive and equivariant, and they are adjoint for the inner products
``int conj(f) g dmu`` and ``tr(A* B) / d``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import BandLimitExceeded
from .functions import FunctionElement, harmonic_matrix, maximize_on_sphere, n_coeffs
from .groupmodel import CoherentFrame, radial_integral_checked, su2_frame
from .repn import SpinIrrep, spin_irrep


@dataclass(frozen=True, eq=False)
class BerezinContext:
    """Irrep plus a product frame exact to degree ``4n``.

    Coherent vectors at the nodes are stored as rows; the projections
    ``|x><x|`` are never materialized.
    """

    irrep: SpinIrrep
    frame: CoherentFrame

    @property
    def n(self) -> int:
        return self.irrep.n

    @property
    def d(self) -> int:
        return self.irrep.d

    @cached_property
    def rows(self):
        r = self.irrep.coherent_states(self.frame.theta, self.frame.phi)
        r.setflags(write=False)
        return r

    @cached_property
    def harmonics(self):
        """Normalized ``Y_lm`` for ``l <= 2n`` at the nodes."""
        Y = harmonic_matrix(2 * self.n, self.frame.theta, self.frame.phi)
        Y.setflags(write=False)
        return Y

    def projections(self, idx=None):
        r = self.rows if idx is None else self.rows[idx]
        return r[:, :, None] * r[:, None, :].conj()

    def expectation(self, T):
        """``<x_i|T|x_i>`` at every node."""
        return np.einsum("ni,ij,nj->n", self.rows.conj(), T, self.rows)


@lru_cache(maxsize=None)
def berezin_context(n: int, band: int | None = None) -> BerezinContext:
    band = n if band is None else band
    frame = su2_frame(band)
    if frame.exactness_degree < 4 * n:
        raise ValueError("frame exactness must be at least 4n")
    return BerezinContext(spin_irrep(n), frame)


def covariant_symbol(ctx: BerezinContext, T) -> FunctionElement:
    """``x -> tr(T |x><x|)`` as a degree-``n`` harmonic expansion."""
    T = np.asarray(T, dtype=complex)
    vals = ctx.expectation(T)
    Y = ctx.harmonics[:, : n_coeffs(ctx.n)]
    coeffs = Y.conj().T @ (ctx.frame.weights * vals)
    return FunctionElement(ctx.n, coeffs)


def contravariant_symbol(ctx: BerezinContext, f: FunctionElement):
    """``d * sum_i w_i f(x_i) |x_i><x_i|``; exact for ``f`` of degree ``<= 2n``."""
    if f.band() > 2 * ctx.n:
        raise BandLimitExceeded(f"degree {f.band()} exceeds 2n={2 * ctx.n}")
    f = f.padded(2 * ctx.n)
    vals = ctx.harmonics @ f.coeffs
    wf = ctx.d * ctx.frame.weights * vals
    return np.einsum("n,ni,nj->ij", wf, ctx.rows, ctx.rows.conj())


def contravariant_from_samples(ctx: BerezinContext, values):
    """Same map applied to raw node samples (no band check)."""
    wf = ctx.d * ctx.frame.weights * np.asarray(values)
    return np.einsum("n,ni,nj->ij", wf, ctx.rows, ctx.rows.conj())


def berezin_transform(ctx: BerezinContext, f: FunctionElement) -> FunctionElement:
    return covariant_symbol(ctx, contravariant_symbol(ctx, f))


def berezin_eigenvalues(n: int):
    """Closed form ``n! (n+1)! / ((n+l+1)! (n-l)!)`` for ``l = 0..n``."""
    l = np.arange(n + 1)
    log = gammaln(n + 1) + gammaln(n + 2) - gammaln(n + l + 2) - gammaln(n - l + 1)
    return np.exp(log)


def berezin_eigenvalues_funk_hecke(n: int, n_nodes: int = 200):
    """Same numbers by Funk-Hecke: ``(n+1) int P_l(cos t) cos^{2n}(t/2) dmu``."""
    from scipy.special import eval_legendre

    out = []
    for l in range(n + 1):
        val, _, _ = radial_integral_checked(
            lambda t, l=l: (n + 1) * eval_legendre(l, np.cos(t)) * np.cos(t / 2) ** (2 * n), n_nodes
        )
        out.append(val)
    return np.array(out)


def transform_eigenvalue(ctx: BerezinContext, l: int, m: int = 0) -> complex:
    """Computed eigenvalue of the transform on ``Y_lm``."""
    f = FunctionElement.harmonic(l, m, ctx.n)
    return complex(berezin_transform(ctx, f).coeffs[l * l + l + m])


def transform_matrix(ctx: BerezinContext):
    """Matrix of the Berezin transform on degree-``<= n`` coefficients."""
    size = n_coeffs(ctx.n)
    cols = [berezin_transform(ctx, FunctionElement(ctx.n, np.eye(size)[k])).coeffs for k in range(size)]
    return np.array(cols).T


def symbol_matrix(ctx: BerezinContext):
    """Matrix of the covariant symbol from flattened ``T`` to coefficients."""
    d = ctx.d
    Y = ctx.harmonics[:, : n_coeffs(ctx.n)]
    # <x|T|x> = sum_ij conj(r_i) r_j T_ij
    design = (ctx.rows.conj()[:, :, None] * ctx.rows[:, None, :]).reshape(-1, d * d)
    return Y.conj().T @ (ctx.frame.weights[:, None] * design)


# ----------------------------------------------------------- scalar constants


def delta_A(n: int, n_nodes: int = 96):
    """``(n+1) int theta cos^{2n}(theta/2) dmu`` with its doubled-resolution check.

    Returns ``(value, converged)``.
    """
    val, _, ok = radial_integral_checked(lambda t: (n + 1) * t * np.cos(t / 2) ** (2 * n), n_nodes)
    return val, ok


def probability_mass(ctx: BerezinContext) -> float:
    """``(n+1) sum_i w_i cos^{2n}(theta_i/2)``, which equals 1."""
    return float((ctx.n + 1) * ctx.frame.integrate(np.cos(ctx.frame.theta / 2) ** (2 * ctx.n)))


# ---------------------------------------------------------------- checks


def berezin_defect(ctx: BerezinContext, f: FunctionElement, refine: bool = True) -> float:
    """``sup |f - sigma(breve_sigma(f))|`` for ``f`` of degree ``<= n``."""
    if f.band() > ctx.n:
        raise BandLimitExceeded(f"degree {f.band()} exceeds n={ctx.n}")
    g = f.padded(ctx.n) - berezin_transform(ctx, f)
    return g.sup_norm(refine=refine)


def kadison_schwarz_gap(ctx: BerezinContext, f: FunctionElement) -> float:
    """Smallest eigenvalue of ``breve_sigma(|f|^2) - breve_sigma(f) breve_sigma(f)*``."""
    if f.band() > ctx.n:
        raise BandLimitExceeded(f"degree {f.band()} exceeds n={ctx.n}")
    f = f.padded(ctx.n)
    A = contravariant_symbol(ctx, f)
    M = contravariant_symbol(ctx, f.product(f.conj())) - A @ A.conj().T
    return float(np.linalg.eigvalsh((M + M.conj().T) / 2)[0])


def truncation_degrees(n: int, threshold: float = 0.5):
    """Degrees whose Berezin eigenvalue exceeds ``threshold``."""
    b = berezin_eigenvalues(n)
    return [l for l in range(n + 1) if b[l] > threshold]


@dataclass(frozen=True)
class TruncatedInverseReport:
    degrees: tuple
    inverse_norm_l2: float
    sampled_inverse_norm_sup: float

    @property
    def ok(self) -> bool:
        return self.inverse_norm_l2 < 2 and self.sampled_inverse_norm_sup < 2


def truncated_inverse_check(ctx: BerezinContext, rng, samples: int = 50) -> TruncatedInverseReport:
    """Norm of the inverse transform on the span of degrees with eigenvalue ``> 1/2``.

    The L^2 norm comes from the computed transform matrix restricted to those
    degrees; the sup-norm figure is a sampled lower estimate on random real
    functions.
    """
    degrees = tuple(truncation_degrees(ctx.n))
    idx = np.concatenate([np.arange(l * l, (l + 1) ** 2) for l in degrees])
    M = transform_matrix(ctx)[np.ix_(idx, idx)]
    inv = np.linalg.inv(M)
    l2 = float(np.linalg.norm(inv, 2))
    worst = 0.0
    lmax = max(degrees)
    for _ in range(samples):
        g = FunctionElement.random(rng, lmax).padded(ctx.n)
        mask = np.zeros(n_coeffs(ctx.n), dtype=bool)
        mask[idx] = True
        g = FunctionElement(ctx.n, np.where(mask, g.coeffs, 0))
        sub = g.coeffs[idx]
        h = np.zeros(n_coeffs(ctx.n), dtype=complex)
        h[idx] = inv @ sub
        hn = FunctionElement(ctx.n, h).sup_norm()
        gn = g.sup_norm()
        if gn > 0:
            worst = max(worst, hn / gn)
    return TruncatedInverseReport(degrees, l2, float(worst))


def reconstruction_error(ctx: BerezinContext, T) -> float:
    """``||T - breve_sigma(sigma_T)||`` (operator norm)."""
    T = np.asarray(T, dtype=complex)
    return float(np.linalg.norm(T - contravariant_symbol(ctx, covariant_symbol(ctx, T)), 2))


def berezin_operator(ctx: BerezinContext):
    """Matrix of ``T -> breve_sigma(sigma_T)`` on row-major flattened matrices."""
    d = ctx.d
    basis = np.eye(d * d).reshape(d * d, d, d)
    cols = [contravariant_symbol(ctx, covariant_symbol(ctx, E)).ravel() for E in basis]
    return np.array(cols).T
