"""Group backends: SU(2) with its rotation-angle length and sphere quadrature,
and explicit finite groups given by faithful unitary representations.

Length convention: an element of SU(2) is ``exp(-i beta X.sigma/2)`` with
``|X| = 1`` and ``beta`` in ``[0, 2 pi]``; its length is ``beta``.  The induced
distance on the sphere ``SU(2)/U(1)`` is the great-circle distance, so the
distance from the north pole to ``(theta, phi)`` is ``theta``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadLength, NonGroup

LENGTH_CONVENTION = "rotation angle beta in [0, 2pi] on SU(2); induced sphere metric = geodesic angle"

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


# ---------------------------------------------------------------- sphere grids


@dataclass(frozen=True, eq=False)
class CoherentFrame:
    """Product quadrature on the sphere with weights summing to one."""

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    exactness_degree: int
    n_band: int

    def __len__(self):
        return self.theta.size

    @property
    def base_distances(self):
        # geodesic distance from the north pole
        return self.theta

    @property
    def points(self):
        return sphere_points(self.theta, self.phi)

    def integrate(self, values):
        """Quadrature sum over the last axis of ``values``."""
        return np.asarray(values) @ self.weights


def su2_frame(n_band: int) -> CoherentFrame:
    """Gauss-Legendre (in cos theta) times uniform (in phi) rule on S^2.

    Uses ``2*n_band + 1`` latitude nodes and ``4*n_band + 1`` longitudes, which
    integrates every spherical harmonic of degree ``<= 4*n_band`` exactly.
    Gauss-Legendre nodes never hit the poles.
    """
    n_band = int(n_band)
    if n_band < 1:
        raise ValueError("n_band must be >= 1")
    n_theta = 2 * n_band + 1
    n_phi = 4 * n_band + 1
    t, wt = np.polynomial.legendre.leggauss(n_theta)
    theta_1d = np.arccos(t)
    phi_1d = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    theta, phi = np.meshgrid(theta_1d, phi_1d, indexing="ij")
    weights = np.outer(wt / 2.0, np.full(n_phi, 1.0 / n_phi))
    exact = min(2 * n_theta - 1, n_phi - 1)
    return CoherentFrame(
        theta=theta.ravel(),
        phi=phi.ravel(),
        weights=weights.ravel(),
        exactness_degree=exact,
        n_band=n_band,
    )


def sphere_points(theta, phi):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def sphere_angles(points):
    points = np.asarray(points, dtype=float)
    # atan2 keeps full precision near the poles
    theta = np.arctan2(np.hypot(points[..., 0], points[..., 1]), points[..., 2])
    phi = np.mod(np.arctan2(points[..., 1], points[..., 0]), 2 * np.pi)
    return theta, phi


def geodesic_distance(p, q):
    """Great-circle distance between unit vectors (broadcasting)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    cross = np.linalg.norm(np.cross(p, q), axis=-1)
    dot = np.sum(p * q, axis=-1)
    return np.arctan2(cross, dot)


def radial_integral(g, n_nodes: int = 96) -> float:
    """Integral of a zonal function ``g(theta)`` against the normalized sphere measure.

    ``(1/2) * int_0^pi g(theta) sin(theta) dtheta`` by Gauss-Legendre in theta.
    Integrands such as ``theta * cos(theta/2)**n`` are smooth in theta but not
    polynomial in cos(theta), so the product frame is the wrong tool for them.
    """
    x, w = np.polynomial.legendre.leggauss(int(n_nodes))
    theta = 0.5 * np.pi * (x + 1.0)
    vals = np.asarray(g(theta), dtype=float)
    return float(0.25 * np.pi * np.sum(w * vals * np.sin(theta)))


def radial_integral_checked(g, n_nodes: int = 96, tol: float = 1e-8):
    """``radial_integral`` plus the value at doubled resolution and their agreement."""
    a = radial_integral(g, n_nodes)
    b = radial_integral(g, 2 * n_nodes)
    return b, abs(a - b), abs(a - b) <= tol * max(1.0, abs(b))


# ------------------------------------------------------------------ SU(2) itself


def su2_element(axis, angle):
    """``exp(-i angle axis.sigma / 2)`` for a unit 3-vector ``axis``."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    gen = sum(a * s for a, s in zip(axis, PAULI))
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * gen


def su2_length(axis, angle) -> float:
    """Length of the rotation by ``angle`` about ``axis``; the axis is irrelevant.

    Negative angles denote the inverse rotation, which has the same length.
    """
    a = abs(float(angle))
    if a > 2 * np.pi + 1e-12:
        raise ValueError("angle must lie in [-2pi, 2pi]")
    return min(a, 2 * np.pi)


def su2_length_of(u) -> float:
    """Rotation angle of a 2x2 SU(2) matrix, in ``[0, 2 pi]``."""
    u = np.asarray(u)
    c = np.real(u[0, 0] + u[1, 1]) / 2.0
    # sin(beta/2) from the vector part; atan2 stays accurate near beta = 0, 2pi
    s = np.sqrt(np.imag(u[0, 0] - u[1, 1]) ** 2 / 4.0 + np.abs(u[0, 1] - u[1, 0].conj()) ** 2 / 4.0)
    return float(2.0 * np.arctan2(s, c))


def su2_axis_angle(u):
    """``(axis, angle)`` with ``u = exp(-i angle axis.sigma / 2)``, angle in ``[0, 2 pi]``."""
    u = np.asarray(u)
    beta = su2_length_of(u)
    vec = np.array([-np.imag(u[0, 1] + u[1, 0]), np.real(u[1, 0] - u[0, 1]), -np.imag(u[0, 0] - u[1, 1])]) / 2
    nrm = np.linalg.norm(vec)
    axis = vec / nrm if nrm > 0 else np.array([0.0, 0.0, 1.0])
    return axis, beta


def su2_random(rng, size=None):
    """Haar-random SU(2) matrices from normalized Gaussian quaternions."""
    shape = () if size is None else (size,)
    q = rng.standard_normal(shape + (4,))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    a = q[..., 0] - 1j * q[..., 3]
    b = -q[..., 2] - 1j * q[..., 1]
    u = np.empty(shape + (2, 2), dtype=complex)
    u[..., 0, 0] = a
    u[..., 0, 1] = b
    u[..., 1, 0] = -np.conj(b)
    u[..., 1, 1] = np.conj(a)
    return u


def su2_rotation_matrix(u):
    """SO(3) image of an SU(2) element, ``R_ij = tr(sigma_i u sigma_j u*)/2``."""
    r = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            r[i, j] = 0.5 * np.real(np.trace(PAULI[i] @ u @ PAULI[j] @ u.conj().T))
    return r


def haar_radius(n_nodes: int = 128) -> float:
    """Haar mean of the rotation-angle length on SU(2).

    The length is a class function, so the integral reduces to
    ``(1/pi) * int_0^{2pi} beta sin^2(beta/2) dbeta``.
    """
    x, w = np.polynomial.legendre.leggauss(int(n_nodes))
    beta = np.pi * (x + 1.0)
    # dbeta = pi dx cancels the 1/pi of the class-function density
    return float(np.sum(w * beta * np.sin(beta / 2) ** 2))


def check_su2_length_axioms(rng, n_samples: int = 1000, tol: float = 1e-9):
    """Sampled check of the length axioms; returns a dict of worst violations."""
    x = su2_random(rng, n_samples)
    y = su2_random(rng, n_samples)
    lx = np.array([su2_length_of(u) for u in x])
    ly = np.array([su2_length_of(u) for u in y])
    lxy = np.array([su2_length_of(a @ b) for a, b in zip(x, y)])
    linv = np.array([su2_length_of(u.conj().T) for u in x])
    lconj = np.array([su2_length_of(a @ b @ a.conj().T) for a, b in zip(x, y)])
    report = {
        "identity": su2_length_of(np.eye(2)),
        "positive": float(lx.min()),
        "symmetry": float(np.max(np.abs(linv - lx))),
        "subadditivity": float(np.max(lxy - lx - ly)),
        "conjugation": float(np.max(np.abs(lconj - ly))),
    }
    report["ok"] = (
        report["identity"] <= tol
        and report["positive"] > 0
        and report["symmetry"] <= tol
        and report["subadditivity"] <= tol
        and report["conjugation"] <= tol
    )
    return report


# ----------------------------------------------------------------- finite groups


def decode_complex_matrix(rows):
    """JSON ``[[[re, im], ...], ...]`` to a complex array."""
    arr = np.asarray(rows, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr.astype(complex)


def encode_complex_matrix(m):
    m = np.asarray(m, dtype=complex)
    return np.stack([m.real, m.imag], axis=-1).tolist()


@dataclass(frozen=True, eq=False)
class FiniteGroupModel:
    name: str
    elements: tuple
    table: np.ndarray
    inverse: np.ndarray
    identity: int
    lengths: np.ndarray
    dim: int = field(default=0)

    def __len__(self):
        return len(self.elements)

    def stabilizer(self, projection, tol: float = 1e-9):
        """Indices of elements whose conjugation fixes ``projection``."""
        return [
            i
            for i, u in enumerate(self.elements)
            if np.linalg.norm(u @ projection @ u.conj().T - projection) <= tol
        ]

    def haar_radius(self) -> float:
        # normalized counting measure
        return float(np.mean(self.lengths))


def _find(elements, m, tol):
    for k, e in enumerate(elements):
        if np.max(np.abs(e - m)) <= tol:
            return k
    return -1


def finite_group_load(spec, tol: float = 1e-8, n_assoc: int = 200, seed: int = 0) -> FiniteGroupModel:
    """Validate a finite group given as ``{name, elements, lengths}``.

    ``spec`` may be a dict, a JSON string or a path to a JSON file.  Element
    matrices use the ``[re, im]`` pair encoding.  Raises ``NonGroup`` or
    ``BadLength``.
    """
    if isinstance(spec, str) and spec.lstrip().startswith("{"):
        spec = json.loads(spec)
    elif isinstance(spec, (str, Path)):
        spec = json.loads(Path(spec).read_text())
    name = spec.get("name", "group")
    elements = tuple(decode_complex_matrix(e) for e in spec["elements"])
    if not elements:
        raise NonGroup("empty element list")
    d = elements[0].shape[0]
    for k, u in enumerate(elements):
        if u.shape != (d, d):
            raise NonGroup(f"element {k} has shape {u.shape}, expected {(d, d)}")
        if np.max(np.abs(u @ u.conj().T - np.eye(d))) > 1e-10:
            raise NonGroup(f"element {k} is not unitary")
    m = len(elements)
    table = np.empty((m, m), dtype=int)
    for i, j in itertools.product(range(m), repeat=2):
        k = _find(elements, elements[i] @ elements[j], tol)
        if k < 0:
            raise NonGroup(f"product of elements {i} and {j} is not in the set")
        table[i, j] = k
    identity = _find(elements, np.eye(d), tol)
    if identity < 0:
        raise NonGroup("identity matrix missing")
    inverse = np.array([int(np.flatnonzero(table[i] == identity)[0]) if np.any(table[i] == identity) else -1 for i in range(m)])
    if np.any(inverse < 0):
        raise NonGroup("some element lacks an inverse")
    rng = np.random.default_rng(seed)
    triples = rng.integers(0, m, size=(n_assoc, 3)) if m ** 3 > n_assoc else np.array(list(itertools.product(range(m), repeat=3)))
    for a, b, c in triples:
        if table[table[a, b], c] != table[a, table[b, c]]:
            raise NonGroup(f"associativity fails on ({a}, {b}, {c})")

    lengths = np.asarray(spec.get("lengths", np.zeros(m)), dtype=float)
    if lengths.shape != (m,):
        raise BadLength("length table has the wrong size")
    _check_length_table(table, inverse, identity, lengths, tol)
    return FiniteGroupModel(name, elements, table, inverse, identity, lengths, d)


def _check_length_table(table, inverse, identity, lengths, tol):
    m = len(lengths)
    if abs(lengths[identity]) > tol:
        raise BadLength("length of the identity is not zero", (identity,))
    for x in range(m):
        if lengths[x] < -tol:
            raise BadLength("negative length", (x,))
        if x != identity and lengths[x] <= tol:
            raise BadLength("non-identity element of zero length", (x,))
        if abs(lengths[inverse[x]] - lengths[x]) > tol:
            raise BadLength("length not inverse-symmetric", (x, int(inverse[x])))
    for x, y in itertools.product(range(m), repeat=2):
        if lengths[table[x, y]] > lengths[x] + lengths[y] + tol:
            raise BadLength("subadditivity fails", (x, y))
        if abs(lengths[table[table[x, y], inverse[x]]] - lengths[y]) > tol:
            raise BadLength("length not conjugation invariant", (x, y))


def cyclic_group_spec(order: int, lengths=None):
    """``Z_order`` acting on C^2 by powers of ``diag(1, exp(2 pi i / order))``."""
    w = np.exp(2j * np.pi / order)
    elements = [encode_complex_matrix(np.diag([1.0, w ** k])) for k in range(order)]
    if lengths is None:
        lengths = [min(k, order - k) for k in range(order)]
    return {"name": f"Z{order}", "elements": elements, "lengths": list(lengths)}


def trivial_group_spec():
    return {"name": "trivial", "elements": [encode_complex_matrix(np.eye(1))], "lengths": [0.0]}
