"""3x3 complex matrix algebra of Nijenhuis matrices.

Conventions: ``rho_act(g, a) = g a g^* / conj(det g)`` is the change-of-frame
action; ``polar_det`` and ``polar_adj`` are the polarisations of the
determinant and the adjugate.  The orbit of the identity under this action
is the set of nonzero complex multiples of positive definite Hermitian
matrices, and the orbit of diag(1,-1,-1) is the set of nonzero complex
multiples of Hermitian matrices of signature (1,2); orbit membership is
therefore decided by a rank-one test on the two Hermitian parts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .tolerances import TOL_CLASS

ELLIPTIC = "Elliptic"
HYPERBOLIC = "Hyperbolic"

ZERO = "Zero"
ELLIPTIC_STRICT = "EllipticStrict"
HYPERBOLIC_STRICT = "HyperbolicStrict"
REAL_TYPE_DEGENERATE = "RealTypeDegenerate"
GENERAL = "General"
ORBIT_KINDS = (ZERO, ELLIPTIC_STRICT, HYPERBOLIC_STRICT, REAL_TYPE_DEGENERATE, GENERAL)

I3 = np.eye(3, dtype=complex)
D3 = np.diag([1.0, -1.0, -1.0]).astype(complex)

_EPS = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS[_i, _j, _k] = 1.0
    _EPS[_i, _k, _j] = -1.0


class SingularGroupElement(ValueError):
    """A group element is not invertible."""


class WrongOrbit(ValueError):
    """The matrix is not in the orbit a reduction was asked for."""


class NonGeneric(ValueError):
    """The matrix lies off the open set where the diagonal normal form exists."""


def as_cmat(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def adjugate(a) -> np.ndarray:
    """Classical adjugate (transpose of the cofactor matrix); defined for singular input."""
    return polar_adj(a, a)


def polar_det(a, b, c) -> complex:
    """Symmetric trilinear P with P(a, a, a) = det a."""
    a, b, c = as_cmat(a), as_cmat(b), as_cmat(c)
    # mixed discriminant; symmetric because both epsilons flip together
    return complex(np.einsum("ijk,lmn,il,jm,kn->", _EPS, _EPS, a, b, c)) / 6.0


def polar_adj(a, b) -> np.ndarray:
    """Symmetric bilinear Q with Q(a, a) = adj(a)."""
    a, b = as_cmat(a), as_cmat(b)
    # cofactor of a at (i, j) is (1/2) eps_ikl eps_jmn a_km a_ln; adj is its transpose
    cof = 0.5 * np.einsum("ikl,jmn,km,ln->ij", _EPS, _EPS, a, b)
    return cof.T


def r_map(a) -> np.ndarray:
    """R(a) = P(conj a, conj a, a^T) a."""
    a = as_cmat(a)
    return polar_det(a.conj(), a.conj(), a.T) * a


def rho_act(g, a, tol_class: float = TOL_CLASS) -> np.ndarray:
    """rho(g)(a) = g a conj(g)^T / conj(det g)."""
    g, a = as_cmat(g), as_cmat(a)
    det = np.linalg.det(g)
    if abs(det) <= tol_class * max(np.linalg.norm(g, 2), 1e-300) ** 3:
        raise SingularGroupElement("group element is singular")
    return g @ a @ g.conj().T / np.conj(det)


def hermitian_parts(a) -> tuple[np.ndarray, np.ndarray]:
    """H1, H2 Hermitian with a = H1 + i H2."""
    a = as_cmat(a)
    return (a + a.conj().T) / 2.0, (a - a.conj().T) / 2.0j


def _herm_to_real(h: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(3, 1)
    return np.concatenate([np.diag(h).real, np.sqrt(2) * h[iu].real, np.sqrt(2) * h[iu].imag])


def _real_to_herm(v: np.ndarray) -> np.ndarray:
    h = np.diag(v[:3]).astype(complex)
    iu = np.triu_indices(3, 1)
    h[iu] = (v[3:6] + 1j * v[6:9]) / np.sqrt(2)
    h[(iu[1], iu[0])] = np.conj(h[iu])
    return h


def signature(h, tol_class: float = TOL_CLASS) -> tuple[int, int, int]:
    """(positive, negative, zero) eigenvalue counts of a Hermitian matrix."""
    w = np.linalg.eigvalsh(as_cmat(h))
    scale = np.max(np.abs(w)) if w.size else 0.0
    if scale == 0:
        return 0, 0, 3
    pos = int(np.sum(w > tol_class * scale))
    neg = int(np.sum(w < -tol_class * scale))
    return pos, neg, 3 - pos - neg


@dataclass(frozen=True)
class RealType:
    """a = mu h with |mu| = 1, arg mu in (-pi/2, pi/2], h Hermitian."""

    mu: complex
    h: np.ndarray
    signature: tuple[int, int, int]
    dependence: float


def real_type_test(a, tol_class: float = TOL_CLASS) -> Optional[RealType]:
    """Return (mu, h, signature) when a is a complex multiple of a Hermitian matrix."""
    a = as_cmat(a)
    h1, h2 = hermitian_parts(a)
    M = np.stack([_herm_to_real(h1), _herm_to_real(h2)], axis=1)  # 9 x 2
    u, s, vt = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0:
        return RealType(1.0 + 0j, np.zeros((3, 3), dtype=complex), (0, 0, 3), 0.0)
    dependence = float(s[1] / s[0])
    if dependence > tol_class:
        return None
    mu = complex(vt[0, 0], vt[0, 1])
    h = s[0] * _real_to_herm(u[:, 0])
    ang = np.angle(mu)
    if ang <= -np.pi / 2 or ang > np.pi / 2:
        mu, h = -mu, -h
    return RealType(mu, h, signature(h, tol_class), dependence)


@dataclass(frozen=True)
class OrbitClass:
    kind: str
    certificate: Optional[np.ndarray] = None
    mu: Optional[complex] = None
    hermitian: Optional[np.ndarray] = None
    signature: Optional[tuple[int, int, int]] = None
    margins: dict = field(default_factory=dict)


def _scalar_fix(target_scalar: complex) -> complex:
    """t with rho(t I)(x) = x * target_scalar, i.e. e^{3i theta}/r = target_scalar."""
    r = 1.0 / abs(target_scalar)
    theta = np.angle(target_scalar) / 3.0
    return r * np.exp(1j * theta)


def reduce_to_unitary(a, target: str, tol_class: float = TOL_CLASS) -> np.ndarray:
    """g with rho(g)(a) = I3 (Elliptic) or diag(1,-1,-1) (Hyperbolic)."""
    a = as_cmat(a)
    if target not in (ELLIPTIC, HYPERBOLIC):
        raise ValueError(f"unknown target {target!r}")
    rt = real_type_test(a, tol_class)
    if rt is None:
        raise WrongOrbit("matrix is not a complex multiple of a Hermitian matrix")
    pos, neg, zero = rt.signature
    mu, h = rt.mu, rt.h
    if zero:
        raise WrongOrbit("Hermitian representative is singular")
    if target == ELLIPTIC:
        if pos == 0:
            mu, h = -mu, -h
        elif neg:
            raise WrongOrbit("Hermitian representative is indefinite")
    else:
        if (pos, neg) == (2, 1):
            mu, h = -mu, -h
        elif (pos, neg) != (1, 2):
            raise WrongOrbit("Hermitian representative is definite")
    w, U = np.linalg.eigh(h)
    order = np.argsort(-w)  # positive eigenvalue first
    w, U = w[order], U[:, order]
    c = U * np.sqrt(np.abs(w))  # h = c T c^*, T the target
    # rho(t c)(T) = h e^{3 i arg t} / (|t| conj(det c)); match mu h
    t = _scalar_fix(mu * np.conj(np.linalg.det(c)))
    g0 = t * c
    return np.linalg.inv(g0)


def classify_orbit(a, tol_class: float = TOL_CLASS) -> OrbitClass:
    a = as_cmat(a)
    norm = float(np.linalg.norm(a))
    margins: dict = {"norm": norm}
    if norm < tol_class:
        return OrbitClass(ZERO, margins=margins)
    rt = real_type_test(a, tol_class)
    h1, h2 = hermitian_parts(a)
    M = np.stack([_herm_to_real(h1), _herm_to_real(h2)], axis=1)
    s = np.linalg.svd(M, compute_uv=False)
    margins["hermitian_dependence"] = float(s[1] / s[0])
    if rt is None:
        return OrbitClass(GENERAL, margins=margins)
    w = np.linalg.eigvalsh(rt.h)
    margins["eigen_ratio"] = float(np.min(np.abs(w)) / np.max(np.abs(w)))
    pos, neg, zero = rt.signature
    if zero:
        return OrbitClass(REAL_TYPE_DEGENERATE, None, rt.mu, rt.h, rt.signature, margins)
    if pos == 0 or neg == 0:
        g = reduce_to_unitary(a, ELLIPTIC, tol_class)
        return OrbitClass(ELLIPTIC_STRICT, g, rt.mu, rt.h, rt.signature, margins)
    g = reduce_to_unitary(a, HYPERBOLIC, tol_class)
    return OrbitClass(HYPERBOLIC_STRICT, g, rt.mu, rt.h, rt.signature, margins)


def _simultaneous_diagonalizer(h1: np.ndarray, h2: np.ndarray, tol_class: float) -> Optional[np.ndarray]:
    """V with V^* h1 V and V^* h2 V both diagonal, or None."""
    # a definite member of the pencil makes the problem a Hermitian eigenproblem
    best, best_phi = -np.inf, 0.0
    for phi in np.linspace(0.0, 2 * np.pi, 73)[:-1]:
        m = np.linalg.eigvalsh(np.cos(phi) * h1 + np.sin(phi) * h2)
        score = m[0] / max(np.max(np.abs(m)), 1e-300)
        if score > best:
            best, best_phi = score, phi
    if best > tol_class:
        hd = np.cos(best_phi) * h1 + np.sin(best_phi) * h2
        ho = -np.sin(best_phi) * h1 + np.cos(best_phi) * h2
        L = np.linalg.cholesky(hd)
        Linv = np.linalg.inv(L)
        _, W = np.linalg.eigh(Linv @ ho @ Linv.conj().T)
        return Linv.conj().T @ W
    # otherwise the pencil det(h1 + t h2) needs three distinct real roots
    if np.linalg.svd(h2, compute_uv=False)[-1] <= tol_class * max(np.linalg.norm(h2, 2), 1e-300):
        return None
    w, V = np.linalg.eig(np.linalg.solve(h2, h1))
    scale = max(np.max(np.abs(w)), 1.0)
    if np.max(np.abs(w.imag)) > np.sqrt(tol_class) * scale:
        return None
    wr = np.sort(w.real)
    if np.min(np.diff(wr)) <= np.sqrt(tol_class) * scale:
        return None
    return V


@dataclass(frozen=True)
class NormalForm:
    g: np.ndarray
    lam: np.ndarray
    attempts: int


def normalize_pair(a, tol_class: float = TOL_CLASS, retries: int = 8, seed: int = 0) -> NormalForm:
    """g and sorted angles lam (sum 0) with rho(g)(a) = diag(exp(i lam))."""
    a = as_cmat(a)
    if np.linalg.norm(a) == 0:
        raise NonGeneric("zero matrix has no diagonal normal form")
    rng = np.random.default_rng(seed)
    for attempt in range(retries + 1):
        # retries rotate the pencil by a scalar phase, which rho(t I) realises
        t = np.exp(1j * rng.uniform(0, 2 * np.pi / 3)) if attempt else 1.0 + 0j
        b = rho_act(t * I3, a)
        h1, h2 = hermitian_parts(b)
        V = _simultaneous_diagonalizer(h1, h2, tol_class)
        if V is None:
            continue
        g = V.conj().T @ (t * I3)
        c = rho_act(g, a)
        d = np.diag(c)
        if np.max(np.abs(c - np.diag(d))) > np.sqrt(tol_class) * np.max(np.abs(d)) or np.min(np.abs(d)) == 0:
            continue
        r = np.sqrt(np.abs(d))
        s = np.diag(1.0 / r) * np.prod(r)
        g = s @ g
        d = np.diag(rho_act(g, a))
        g = _scalar_fix(np.exp(-1j * np.sum(np.angle(d)) / 3.0)) * g
        d = np.diag(rho_act(g, a))
        lam = np.angle(d)
        total = float(np.sum(lam))
        if abs(total) > 1e-6:
            g = np.exp(-1j * total / 9.0) * g
            lam = np.angle(np.diag(rho_act(g, a)))
        order = np.argsort(lam, kind="stable")
        P = np.eye(3)[order]
        if round(np.linalg.det(P)) < 0:
            P = np.exp(1j * np.pi / 3) * P
        g = P @ g
        lam = np.angle(np.diag(rho_act(g, a)))
        lam = lam - np.sum(lam) / 3.0
        return NormalForm(g, lam, attempt + 1)
    raise NonGeneric("pencil of Hermitian parts has no simultaneous diagonalisation")


@dataclass(frozen=True)
class InvariantForms:
    """Density coefficients of Phi, omega, psi and the bi-forms E0, E1, E2."""

    phi_coeff: float
    omega_matrix: np.ndarray
    psi_coeff: complex
    e0: tuple[np.ndarray, complex]
    e1: tuple[np.ndarray, complex]
    e2: tuple[np.ndarray, complex]


def invariant_forms(n) -> InvariantForms:
    n = as_cmat(n)
    nb, nt = n.conj(), n.T
    omega = polar_adj(nt, nb)
    psi = polar_det(nb, nb, nt)
    return InvariantForms(
        phi_coeff=float(abs(np.linalg.det(n)) ** 2),
        omega_matrix=omega,
        psi_coeff=psi,
        e0=(omega, psi),
        e1=(polar_adj(nt, nt), polar_det(nb, nb, nb)),
        e2=(polar_adj(nb, nb), polar_det(nt, nt, nb)),
    )


@dataclass(frozen=True)
class IdentityResiduals:
    """Scale-relative residuals of the pointwise identities."""

    psi_det_q: float
    trace: float
    det_q_slack: float
    r_trace: float


def identity_residuals(a) -> IdentityResiduals:
    """Residuals of:

    * 9 |P(a,a,a^T*)|^2 = |det a|^2 + 8 det Q(a, conj(a)^T)
    * tr(a^T Q(a^T, conj a)) = 3 P(a, a, conj(a)^T)
    * det Q(a, conj(a)^T) + |det a|^2 / 8 >= 0 (reported as signed slack)
    * tr(R(a)^T Q(a^T, conj a)) = 3 |P(a, a, conj(a)^T)|^2

    All four are homogeneous, so they are evaluated on a / |a|_F; this
    equals dividing each value by the matching power of the norm.
    """
    a = as_cmat(a)
    n = float(np.linalg.norm(a))
    if n > 0:
        a = a / n
    ah = a.conj().T
    p = polar_det(a, a, ah)
    detq = np.linalg.det(polar_adj(a, ah))
    det2 = abs(np.linalg.det(a)) ** 2
    q2 = polar_adj(a.T, a.conj())
    return IdentityResiduals(
        psi_det_q=float(abs(9 * abs(p) ** 2 - det2 - 8 * detq)),
        trace=float(abs(np.trace(a.T @ q2) - 3 * p)),
        det_q_slack=float(detq.real + det2 / 8.0),
        r_trace=float(abs(np.trace(r_map(a).T @ q2) - 3 * abs(p) ** 2)),
    )


def random_cmat(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Entries uniform in the complex square [-scale, scale]^2."""
    return scale * (rng.uniform(-1, 1, (3, 3)) + 1j * rng.uniform(-1, 1, (3, 3)))


def random_gl3(rng: np.random.Generator) -> np.ndarray:
    while True:
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        if np.linalg.svd(g, compute_uv=False)[-1] > 1e-2:
            return g


def matrix_to_json(a) -> list:
    a = as_cmat(a)
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def matrix_from_json(data) -> np.ndarray:
    rows = np.asarray(data, dtype=float)
    if rows.shape != (3, 3, 2):
        raise ValueError("matrix JSON must be a 3x3 array of [re, im] pairs")
    return as_cmat(rows[..., 0] + 1j * rows[..., 1])
