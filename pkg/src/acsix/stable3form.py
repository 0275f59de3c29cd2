"""Real 3-forms in dimension six.

``j_operator`` returns the matrix K with (v -| phi) ^ phi = (K v) -| vol;
its square is a multiple lambda of the identity and the sign of lambda
separates the two open orbits.  Every classification result carries a
basis ``A`` (columns are vectors) with ``pullback(phi, A)`` equal to the
listed normal form, so callers can re-verify it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .exterior import (
    DEFINITE,
    LORENTZ12,
    ComplexFrame,
    Form,
    WrongType,
    basis,
    frame_from_rows,
    hook,
    pullback,
    standard_frame,
    subsets,
    to_frame_basis,
    to_vector,
    top_coefficient,
)
from .nmatrix import adjugate, signature as herm_signature
from .tolerances import TOL_CLASS, TOL_REL

TYPES = ("Type1", "Type2", "Type3", "Type4", "Type5", "Type6")

NORMAL_FORMS: dict[str, Form] = {
    "Type1": basis(1, 2, 3) + basis(4, 5, 6),
    "Type2": basis(1, 3, 5) - basis(1, 4, 6) - basis(2, 3, 6) - basis(2, 4, 5),
    "Type3": basis(1, 5, 6) + basis(2, 6, 4) + basis(3, 4, 5),
    "Type4": basis(1, 2, 5) + basis(3, 4, 5),
    "Type5": basis(1, 2, 3),
    "Type6": Form(),
}


class NotType2(ValueError):
    """The 3-form does not lie in the orbit that induces a complex structure."""


class NotPositive(ValueError):
    """A (2,2)-form lies outside both admissible cones."""


class DegenerateOmega(ValueError):
    """The 2-form is not symplectic."""


class IncompatiblePair(ValueError):
    """The pair does not satisfy omega ^ phi = 0."""


def _real_coeffs(phi: Form, tol: float = TOL_REL) -> Form:
    if any(d != 3 for d in phi.degrees()):
        raise WrongType("expected a 3-form")
    if phi.imag.norm() > tol * max(phi.norm(), 1.0):
        raise WrongType("expected a real 3-form")
    return phi.real


@lru_cache(maxsize=None)
def _j_tensor() -> np.ndarray:
    """T[j, v, I, J]: coefficient of e_j -| vol in (e_v -| e^I) ^ e^J."""
    subs = subsets(3)
    T = np.zeros((6, 6, 20, 20))
    for v in range(6):
        ev = np.zeros(6)
        ev[v] = 1.0
        for I, si in enumerate(subs):
            h = hook(ev, basis(*si))
            if not h:
                continue
            for J, sj in enumerate(subs):
                f = h ^ basis(*sj)
                for idx, c in f.terms.items():
                    missing = ({1, 2, 3, 4, 5, 6} - set(idx)).pop()
                    # e_j -| vol = (-1)^(j-1) e^{1..6 without j}
                    T[missing - 1, v, I, J] += (-1) ** (missing - 1) * c.real
    return T


def j_operator(phi: Form) -> np.ndarray:
    """K with (e_v -| phi) ^ phi = (K e_v) -| vol."""
    x = to_vector(_real_coeffs(phi), 3).real
    return np.einsum("jvIK,I,K->jv", _j_tensor(), x, x)


def j_operator_sparse(phi: Form) -> np.ndarray:
    """Same operator evaluated directly with sparse forms."""
    phi = _real_coeffs(phi)
    K = np.zeros((6, 6))
    for v in range(6):
        ev = np.zeros(6)
        ev[v] = 1.0
        f = hook(ev, phi) ^ phi
        for j in range(6):
            idx = tuple(i for i in range(1, 7) if i != j + 1)
            K[j, v] = ((-1) ** j * f.coefficient(idx)).real
    return K


def hitchin_invariant(phi: Form) -> float:
    K = j_operator(phi)
    return float(np.trace(K @ K) / 6.0)


def _null_space(M: np.ndarray, dim: int) -> np.ndarray:
    """Columns spanning the ``dim`` smallest right singular directions of M."""
    _, _, vh = np.linalg.svd(M)
    return vh[-dim:].conj().T if dim else np.zeros((M.shape[1], 0), dtype=M.dtype)


def _complement(cols: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning the orthogonal complement of ``cols``."""
    n, k = cols.shape
    u, _, _ = np.linalg.svd(cols, full_matrices=True)
    return u[:, k:]


def hook_matrix(phi: Form) -> np.ndarray:
    """15 x 6 matrix of v -> v -| phi."""
    cols = []
    for v in range(6):
        ev = np.zeros(6)
        ev[v] = 1.0
        cols.append(to_vector(hook(ev, phi), 2).real)
    return np.array(cols).T


def divisor_matrix(phi: Form) -> np.ndarray:
    """15 x 6 matrix of theta -> theta ^ phi."""
    cols = []
    for a in range(6):
        cols.append(to_vector(basis(a + 1) ^ phi, 4).real)
    return np.array(cols).T


def _rank_profile(M: np.ndarray, tol_class: float) -> tuple[int, np.ndarray]:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0, s
    return int(np.sum(s > tol_class * s[0])), s


def _darboux(W: np.ndarray, tol_class: float = TOL_CLASS) -> np.ndarray:
    """Columns p1, q1, p2, q2, ... with W(p_i, q_i) = 1 and all other pairings 0."""
    n = W.shape[0]
    pool = [np.eye(n)[:, i] for i in range(n)]
    out = []
    scale = max(np.max(np.abs(W)), 1e-300)
    while pool:
        pool.sort(key=lambda v: -np.linalg.norm(v))
        p = pool.pop(0)
        if np.linalg.norm(p) <= tol_class:
            break
        vals = [abs(p @ W @ q) for q in pool]
        if not vals or max(vals) <= tol_class * scale * np.linalg.norm(p):
            raise DegenerateOmega("2-form is degenerate")
        q = pool.pop(int(np.argmax(vals)))
        q = q / (p @ W @ q)
        out.extend([p, q])
        pool = [v - (v @ W @ q) * p + (v @ W @ p) * q for v in pool]
    if len(out) != n:
        raise DegenerateOmega("2-form is degenerate")
    return np.array(out).T


@dataclass(frozen=True)
class ThreeFormClass:
    kind: str
    basis: np.ndarray
    lambda_value: float
    margin: float
    residual: float

    @property
    def normal_form(self) -> Form:
        return NORMAL_FORMS[self.kind]


def _frame_coeff(phi: Form, Z: np.ndarray, idx: tuple[int, ...]) -> complex:
    return to_frame_basis(phi, frame_from_rows(Z)).coefficient(idx)


def _type1_basis(phi: Form, K: np.ndarray, lam: float) -> np.ndarray:
    r = np.sqrt(lam)
    V = np.hstack([_null_space(K - r * np.eye(6), 3), _null_space(K + r * np.eye(6), 3)]).real
    p = pullback(phi, V)
    a, b = p.coefficient((1, 2, 3)).real, p.coefficient((4, 5, 6)).real
    return V @ np.diag([1 / a, 1, 1, 1 / b, 1, 1])


def _plus_i_covectors(Jm: np.ndarray) -> np.ndarray:
    """Rows z with z J = i z."""
    return _null_space(Jm.T - 1j * np.eye(6), 3).T


def _type2_basis(phi: Form, K: np.ndarray, lam: float) -> np.ndarray:
    Jm = K / np.sqrt(-lam)
    Z = _plus_i_covectors(Jm)
    c = _frame_coeff(phi, Z, (1, 2, 3))
    Z[0] = 2 * c * Z[0]
    F = np.empty((6, 6))
    F[0::2] = Z.real
    F[1::2] = Z.imag
    return np.linalg.inv(F)


def _type3_basis(phi: Form, K: np.ndarray) -> np.ndarray:
    kern = _null_space(K, 3).real
    B = np.hstack([kern, _complement(kern)])
    p = pullback(phi, B)
    M = np.zeros((3, 3))
    for i in range(3):
        M[i, 0] = p.coefficient((i + 1, 5, 6)).real
        M[i, 1] = p.coefficient((i + 1, 6, 4)).real
        M[i, 2] = p.coefficient((i + 1, 4, 5)).real
    c = p.coefficient((4, 5, 6)).real
    Fp = np.eye(6)
    Fp[:3, :3] = M.T
    Fp[0, 3] += c
    return B @ np.linalg.inv(Fp)


def _type4_basis(phi: Form, tol_class: float) -> np.ndarray:
    theta = _null_space(divisor_matrix(phi), 1)[:, 0].real
    n = _null_space(hook_matrix(phi), 1)[:, 0].real
    w = theta / (theta @ theta)
    beta = hook(w, phi)
    S = _null_space(np.vstack([theta, n]), 4).real
    Wb = _two_form_matrix_real(beta)
    P = _darboux(S.T @ Wb @ S, tol_class)
    s = S @ P
    return np.column_stack([s[:, 0], s[:, 1], s[:, 2], s[:, 3], w, n])


def _type5_basis(phi: Form) -> np.ndarray:
    thetas = _null_space(divisor_matrix(phi), 3).real
    F = np.vstack([thetas.T, _complement(thetas).T])
    d = pullback(phi, np.linalg.inv(F)).coefficient((1, 2, 3)).real
    F[0] *= d
    return np.linalg.inv(F)


def _two_form_matrix_real(a: Form) -> np.ndarray:
    W = np.zeros((6, 6))
    for (i, j), c in a.part(2).terms.items():
        W[i - 1, j - 1] += c.real
        W[j - 1, i - 1] -= c.real
    return W


def certificate_residual(phi: Form, kind: str, A: np.ndarray) -> float:
    return (pullback(phi, A) - NORMAL_FORMS[kind]).norm()


def classify(phi: Form, tol_class: float = TOL_CLASS) -> ThreeFormClass:
    """Orbit type of a real 3-form together with a normalising basis."""
    phi = _real_coeffs(phi)
    x = to_vector(phi, 3).real
    size = float(np.linalg.norm(x))
    if size <= tol_class:
        return ThreeFormClass("Type6", np.eye(6), 0.0, size, 0.0)
    K = j_operator(phi)
    kk = float(np.linalg.norm(K))
    lam = float(np.trace(K @ K) / 6.0)
    ratio = abs(lam) / kk**2 if kk > 0 else 0.0
    if kk > tol_class * size**2 and ratio > tol_class:
        kind = "Type1" if lam > 0 else "Type2"
        A = _type1_basis(phi, K, lam) if lam > 0 else _type2_basis(phi, K, lam)
        margin = ratio
    else:
        rk, s = _rank_profile(hook_matrix(phi), tol_class)
        kernel = 6 - rk
        margin = float(s[rk - 1] / s[0]) if rk else 0.0
        if kernel == 0:
            kind, A = "Type3", _type3_basis(phi, K)
        elif kernel == 1:
            kind, A = "Type4", _type4_basis(phi, tol_class)
        else:
            kind, A = "Type5", _type5_basis(phi)
    return ThreeFormClass(kind, A, lam, margin, certificate_residual(phi, kind, A))


def derivation(phi: Form, X: np.ndarray) -> Form:
    """d/dt pullback(phi, I + t X) at t = 0."""
    out: dict = {}
    for idx, c in phi.terms.items():
        for p, i in enumerate(idx):
            for j in range(6):
                x = X[i - 1, j]
                if x:
                    new = idx[:p] + (j + 1,) + idx[p + 1:]
                    out[new] = out.get(new, 0j) + x * c
    return Form(out)


def stabilizer_dimension(phi: Form, tol_class: float = TOL_CLASS) -> int:
    """Dimension of the kernel of X -> derivation(phi, X) on gl(6)."""
    cols = []
    for a in range(6):
        for b in range(6):
            E = np.zeros((6, 6))
            E[a, b] = 1.0
            cols.append(to_vector(derivation(phi, E), 3).real)
    rk, _ = _rank_profile(np.array(cols).T, tol_class)
    return 36 - rk


# -- induced complex structure ---------------------------------------------------

@dataclass(frozen=True)
class AcsResult:
    J: np.ndarray
    star_phi: Form
    frame: ComplexFrame


def acs_from_stable(phi: Form, orientation: int = 1, tol_class: float = TOL_CLASS) -> AcsResult:
    """J with J^2 = -1, the dual form J^* phi and a frame with phi + i J^*phi = zeta^123."""
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    phi = _real_coeffs(phi)
    cls = classify(phi, tol_class)
    if cls.kind != "Type2":
        raise NotType2(f"3-form is {cls.kind}, not in the complex-structure orbit")
    K = j_operator(phi)
    J = K / np.sqrt(-cls.lambda_value)
    star = pullback(phi, J).real
    if np.sign(top_coefficient(phi ^ star).real) != orientation:
        J, star = -J, -star
    Z = _plus_i_covectors(J)
    c = _frame_coeff(phi + 1j * star, Z, (1, 2, 3))
    Z[0] = c * Z[0]
    return AcsResult(J, star, frame_from_rows(Z, DEFINITE, orientation))


def acs_residuals(phi: Form, res: AcsResult) -> dict[str, float]:
    J = res.J
    star_star = acs_from_stable(res.star_phi, res.frame.orientation).star_phi
    hol = res.frame.holomorphic_volume()
    return {
        "J_squared": float(np.max(np.abs(J @ J + np.eye(6)))),
        "star_is_pullback": (pullback(phi, J).real - res.star_phi).norm(),
        "star_star": (star_star + phi).norm(),
        "three_zero": (phi + 1j * res.star_phi - hol).norm(),
    }


# -- (1,1) and (2,2) forms ---------------------------------------------------------

def form11(h: np.ndarray, frame: Optional[ComplexFrame] = None) -> Form:
    """(i/2) sum h_jk zeta^j ^ conj(zeta^k)."""
    frame = frame or standard_frame()
    out = Form()
    for j in range(3):
        for k in range(3):
            if h[j, k] != 0:
                out = out + (0.5j * h[j, k]) * (frame.zeta[j] ^ frame.bar(k))
    return out


def _pairs(frame: ComplexFrame) -> tuple[list[Form], list[Form]]:
    z = frame.zeta
    P = [z[1] ^ z[2], z[2] ^ z[0], z[0] ^ z[1]]
    return P, [p.conj() for p in P]


def form22(m: np.ndarray, frame: Optional[ComplexFrame] = None) -> Form:
    """(1/4) sum m_kl P_k ^ conj(P_l) with P = (zeta^23, zeta^31, zeta^12)."""
    frame = frame or standard_frame()
    P, Pb = _pairs(frame)
    out = Form()
    for k in range(3):
        for l in range(3):
            if m[k, l] != 0:
                out = out + (0.25 * m[k, l]) * (P[k] ^ Pb[l])
    return out


_PAIR_LABELS = ((2, 3), (3, 1), (1, 2))


def matrix_of_22(pi: Form, frame: Optional[ComplexFrame] = None) -> tuple[np.ndarray, float]:
    """m with pi = form22(m) and the size of the part of pi outside that span."""
    frame = frame or standard_frame()
    b = to_frame_basis(pi, frame)
    m = np.zeros((3, 3), dtype=complex)
    used = set()
    for k, (a1, a2) in enumerate(_PAIR_LABELS):
        for l, (c1, c2) in enumerate(_PAIR_LABELS):
            mono = Form({(a1, a2, c1 + 3, c2 + 3): 1.0})
            (key, sgn), = mono.terms.items()
            m[k, l] = 4 * sgn * b.terms.get(key, 0j)
            used.add(key)
    rest = max((abs(c) for k, c in b.terms.items() if k not in used), default=0.0)
    return m, float(rest)


def square_map(h: np.ndarray, frame: Optional[ComplexFrame] = None) -> Form:
    """s(h) = (1/2) form11(h)^2."""
    f = form11(h, frame)
    return 0.5 * (f ^ f)


def _branch_ok(m: np.ndarray, branch: str, tol_class: float) -> bool:
    pos, neg, zero = herm_signature(m, tol_class)
    if zero:
        return False
    return (pos, neg) == ((3, 0) if branch == DEFINITE else (1, 2))


def sigma_sqrt(m: np.ndarray, branch: str = DEFINITE, tol_class: float = TOL_CLASS) -> np.ndarray:
    """Hermitian h with (1/2) form11(h)^2 = form22(m).

    Since (1/2) form11(h)^2 = form22(adj(h)^T), the root is
    h = adj(m)^T / sqrt(det m).
    """
    m = np.asarray(m, dtype=complex)
    if branch not in (DEFINITE, LORENTZ12):
        raise ValueError(f"unknown branch {branch!r}")
    if np.max(np.abs(m - m.conj().T)) > TOL_REL * max(1.0, np.max(np.abs(m))):
        raise NotPositive("matrix is not Hermitian")
    # degeneracy is judged per eigenvalue by the signature test, not by det / |m|^3
    det = np.linalg.det(m).real
    if det <= 0 or not _branch_ok(m, branch, tol_class):
        raise NotPositive(f"matrix lies outside the {branch} cone")
    h = adjugate(m).T / np.sqrt(det)
    return (h + h.conj().T) / 2


# -- pointwise quasi-integrable structure ---------------------------------------------

ELLIPTIC_STRICT = "EllipticStrict"
HYPERBOLIC_STRICT = "HyperbolicStrict"


@dataclass(frozen=True)
class QIReport:
    eta: Form
    h: np.ndarray
    F: complex
    frame: ComplexFrame
    kind: str
    residuals: dict


def unitary_factor(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """C and signs S with h = C^T S conj(C), positive eigenvalue first."""
    w, U = np.linalg.eigh(h)
    order = np.argsort(-w)
    w, U = w[order], U[:, order]
    C = (U * np.sqrt(np.abs(w))).T
    return C, np.sign(w)


def quasi_integrable_from_pair(phi: Form, pi: Form, reference: Optional[np.ndarray] = None,
                               orientation: int = 1, tol_class: float = TOL_CLASS) -> QIReport:
    """Hermitian form eta with 2 eta^2 = pi, a unitary coframe and the scalar F.

    F is defined by phi + i *phi = F^{-1} alpha^123.  Its phase depends on
    the unitary coframe; ``reference`` (3 x 6 complex rows) fixes that
    coframe, otherwise the canonical one with F real and positive is used.
    """
    acs = acs_from_stable(phi, orientation, tol_class)
    zeta = acs.frame
    m_pi, off = matrix_of_22(pi, zeta)
    scale = max(pi.norm(), 1e-300)
    if pi.imag.norm() > TOL_REL * scale or off > np.sqrt(TOL_REL) * scale:
        raise NotPositive("pi is not a real (2,2)-form")
    m = (m_pi + m_pi.conj().T) / 8.0
    if _branch_ok(m, DEFINITE, tol_class):
        branch, kind = DEFINITE, ELLIPTIC_STRICT
    elif _branch_ok(m, LORENTZ12, tol_class):
        branch, kind = LORENTZ12, HYPERBOLIC_STRICT
    else:
        raise NotPositive("pi lies outside both admissible cones")
    h = sigma_sqrt(m, branch, tol_class)
    eta = form11(h, zeta)
    Zz = np.array([[z.coefficient((a,)) for a in range(1, 7)] for z in zeta.zeta])
    residuals: dict[str, float] = {"pi_type": off / scale}
    if reference is None:
        C, S = unitary_factor(h)
        F = np.linalg.det(C)
        C[0] *= np.conj(F) / abs(F)
        F = np.linalg.det(C)
    else:
        R = np.asarray(reference, dtype=complex)
        coords = R @ np.linalg.inv(zeta.matrix())
        C = coords[:, :3]
        residuals["reference_type"] = float(np.max(np.abs(coords[:, 3:])))
        S = np.array([1.0, 1.0, 1.0]) if branch == DEFINITE else np.array([1.0, -1.0, -1.0])
        residuals["reference_unitary"] = float(np.max(np.abs(C.T @ np.diag(S) @ C.conj() - h)))
        F = np.linalg.det(C)
    alpha = C @ Zz
    sig = DEFINITE if branch == DEFINITE else LORENTZ12
    frame = frame_from_rows(alpha, sig, orientation)
    # rebuild pi from N(alpha) = F S and compare
    P, Pb = _pairs(frame)
    N = F * np.diag(S)
    rebuilt = Form()
    for k in range(3):
        for l in range(3):
            if N[k, l]:
                rebuilt = rebuilt + (N[k, l] / F) * (P[k] ^ Pb[l])
    residuals["pi_rebuilt"] = (rebuilt - pi).norm() / scale
    residuals["two_eta_squared"] = (2 * (eta ^ eta) - pi).norm() / scale
    residuals["holomorphic_volume"] = ((phi + 1j * acs.star_phi) - frame.holomorphic_volume() / F).norm()
    return QIReport(eta, h, complex(F), frame, kind, residuals)


# -- symplectic pairs -------------------------------------------------------------------

OMEGA_STD = basis(1, 4) + basis(2, 5) + basis(3, 6)
SPLIT = "Split"
UNITARY_DEFINITE = "UnitaryDefinite"
UNITARY_INDEFINITE = "UnitaryIndefinite"
ORTHOGONAL_PLUS = "OrthogonalPlus"
ORTHOGONAL_MINUS = "OrthogonalMinus"
DEGENERATE_PLUS = "DegeneratePlus"
DEGENERATE_MINUS = "DegenerateMinus"
LAGRANGIAN = "Lagrangian"
NULL = "Null"
PAIR_CASES = (SPLIT, UNITARY_DEFINITE, UNITARY_INDEFINITE, ORTHOGONAL_PLUS, ORTHOGONAL_MINUS,
              DEGENERATE_PLUS, DEGENERATE_MINUS, LAGRANGIAN, NULL)


def normal_pair(case: str, mu: float = 1.0) -> tuple[Form, Form]:
    """(omega, phi) normal form of a symplectic pair."""
    e = basis
    table = {
        SPLIT: mu * (e(1, 2, 3) + e(4, 5, 6)),
        UNITARY_DEFINITE: mu * (e(1, 2, 3) - e(1, 5, 6) - e(2, 6, 4) - e(3, 4, 5)),
        UNITARY_INDEFINITE: mu * (e(1, 2, 3) - e(1, 5, 6) + e(2, 6, 4) + e(3, 4, 5)),
        ORTHOGONAL_PLUS: e(1, 5, 6) + e(2, 6, 4) + e(3, 4, 5),
        ORTHOGONAL_MINUS: e(1, 5, 6) - e(2, 6, 4) - e(3, 4, 5),
        DEGENERATE_PLUS: (e(1, 2) + e(4, 5)) ^ e(3),
        DEGENERATE_MINUS: (e(1, 2) - e(4, 5)) ^ e(3),
        LAGRANGIAN: e(1, 2, 3),
        NULL: Form(),
    }
    return OMEGA_STD, table[case]


# Stabilizer groups of the normal pairs, where known in closed form.
PAIR_STABILIZERS = {
    SPLIT: "SL(3,R)",
    UNITARY_DEFINITE: "SU(3)",
    UNITARY_INDEFINITE: "SU(1,2)",
    ORTHOGONAL_PLUS: "R^5 x SO(3)",
    ORTHOGONAL_MINUS: "R^5 x SO(1,2)",
}


@dataclass(frozen=True)
class PairClass:
    case: str
    basis: np.ndarray
    mu: Optional[float]
    residual: float

    @property
    def stabilizer(self) -> Optional[str]:
        return PAIR_STABILIZERS.get(self.case)


def pair_stabilizer_dimension(omega: Form, phi: Form, tol_class: float = TOL_CLASS) -> int:
    """Dimension of the common kernel of X -> (X.omega, X.phi) on gl(6)."""
    cols = []
    for a in range(6):
        for b in range(6):
            E = np.zeros((6, 6))
            E[a, b] = 1.0
            cols.append(np.concatenate([to_vector(derivation(omega, E), 2).real,
                                        to_vector(derivation(phi, E), 3).real]))
    rk, _ = _rank_profile(np.array(cols).T, tol_class)
    return 36 - rk


def _pair_residual(omega: Form, phi: Form, case: str, A: np.ndarray, mu: Optional[float]) -> float:
    w0, p0 = normal_pair(case, 1.0 if mu is None else mu)
    return max((pullback(omega, A) - w0).norm(), (pullback(phi, A) - p0).norm())


def _split_case(omega: Form, phi: Form, A1: np.ndarray) -> tuple[np.ndarray, float]:
    def amat(A):
        w = pullback(omega, A)
        return np.array([[w.coefficient((i + 1, j + 4)).real for j in range(3)] for i in range(3)])

    a = amat(A1)
    if np.linalg.det(a) < 0:
        swap = np.zeros((6, 6))
        swap[:3, 3:] = np.eye(3)
        swap[3:, :3] = np.eye(3)
        A1 = A1 @ swap
        a = amat(A1)
    d = np.linalg.det(a)
    s = d ** (1.0 / 6.0)
    F = np.eye(6)
    F[3:, 3:] = a
    G = np.diag([s, s, s, 1 / s, 1 / s, 1 / s])
    return A1 @ np.linalg.inv(G @ F), float(d ** -0.5)


def _unitary_case(omega: Form, phi: Form, A2: np.ndarray) -> tuple[str, np.ndarray, float]:
    std = standard_frame()
    Z0 = np.array([[z.coefficient((a,)) for a in range(1, 7)] for z in std.zeta])
    w = pullback(omega, A2)

    def hermitian(Z):
        b = to_frame_basis(w, frame_from_rows(Z))
        # omega = (i/2) sum a_ij zeta^j ^ conj(zeta^i)
        return np.array([[-2j * b.coefficient((j + 1, i + 4)) for j in range(3)] for i in range(3)])

    Z = Z0.copy()
    a = hermitian(Z)
    if np.linalg.det(a).real < 0:
        Z = Z.conj()
        a = hermitian(Z)
    a = (a + a.conj().T) / 2
    ev, U = np.linalg.eigh(a)
    order = np.argsort(-ev)
    ev, U = ev[order], U[:, order]
    B = U / np.sqrt(np.abs(ev))
    B = B * np.linalg.det(B) ** (-1.0 / 3.0)
    lam = float(np.linalg.det(a).real ** (1.0 / 3.0))
    signs = np.sign(ev)
    # zeta = B zeta'  so zeta' = B^{-1} zeta; then rescale by sqrt(lam)
    Zp = np.sqrt(lam) * (np.linalg.inv(B) @ Z)
    F = np.empty((6, 6))
    F[:3] = Zp.real
    F[3:] = Zp.imag * signs[:, None]
    case = UNITARY_DEFINITE if signs[1] > 0 else UNITARY_INDEFINITE
    return case, A2 @ np.linalg.inv(F), lam ** -1.5


def _orthogonal_case(omega: Form, phi: Form, A3: np.ndarray) -> tuple[str, np.ndarray]:
    w = pullback(omega, A3)
    a = np.array([[w.coefficient((i + 1, j + 4)).real for j in range(3)] for i in range(3)])
    a = (a + a.T) / 2
    ev, Q = np.linalg.eigh(a)
    pos = int(np.sum(ev > 0))
    # positive-definite or signature-(1,2) after an overall sign
    flip = pos in (0, 2)
    order = np.argsort(ev if flip else -ev)
    ev, Q = ev[order], Q[:, order]
    r = np.prod(np.sqrt(np.abs(ev))) / np.linalg.det(Q)
    if flip:
        r = -r
    Hinv = (Q / np.sqrt(np.abs(ev))) * r
    H = np.linalg.inv(Hinv)
    cof = np.linalg.det(H) * np.linalg.inv(H).T
    # x' = cof(H)^{-T} x, y' = H y
    T = np.zeros((6, 6))
    T[:3, :3] = np.linalg.inv(cof).T
    T[3:, 3:] = H
    A = A3 @ np.linalg.inv(T)
    w = pullback(omega, A)
    sigma = np.array([w.coefficient((i + 1, i + 4)).real for i in range(3)])
    sigma = np.sign(sigma)
    s = np.zeros((3, 3))
    for p in range(3):
        for q in range(p + 1, 3):
            s[q, p] = w.coefficient((p + 4, q + 4)).real / sigma[q]
    E = np.eye(6)
    E[:3, 3:] = s
    A = A @ np.linalg.inv(E)
    minus = sigma[1] < 0
    if minus:
        A = A @ np.diag([1, 1, 1, 1, -1, -1])
    return (ORTHOGONAL_MINUS if minus else ORTHOGONAL_PLUS), A


def _degenerate_case(omega: Form, phi: Form, tol_class: float) -> tuple[str, np.ndarray]:
    W = _two_form_matrix_real(omega)
    theta = _null_space(divisor_matrix(phi), 1)[:, 0].real
    # u -| omega = theta  means  W^T u = theta
    u = np.linalg.solve(W.T, theta)
    n = -u
    w = theta / (theta @ theta)
    S = _null_space(np.vstack([theta, W.T @ w]), 4).real
    beta = hook(w, phi)
    Wb = _two_form_matrix_real(beta)
    Ws, Wbs = S.T @ W @ S, S.T @ Wb @ S
    T = np.linalg.solve(Ws, Wbs)
    c = float(np.trace(T @ T) / 4)
    k = np.sqrt(abs(c))
    T = T / k
    sgn = 1.0 if c > 0 else -1.0
    # x must not be an eigenvector of T, otherwise y does not exist
    cands = list(np.eye(4)) + [a + b for i, a in enumerate(np.eye(4)) for b in np.eye(4)[i + 1:]]
    x = max(cands, key=lambda v: np.linalg.svd(np.vstack([v @ Ws, (T @ v) @ Ws]), compute_uv=False)[-1])
    rows = np.vstack([x @ Ws, (T @ x) @ Ws])
    y = np.linalg.lstsq(rows, np.array([1.0, 0.0]), rcond=None)[0]
    cols = [x, sgn * (T @ y), None, y, -(T @ x)]
    E = [S @ v for v in (cols[0], cols[1])] + [w / k] + [S @ v for v in (cols[3], cols[4])] + [k * n]
    return (DEGENERATE_PLUS if c > 0 else DEGENERATE_MINUS), np.column_stack(E)


def _lagrangian_case(omega: Form, phi: Form) -> np.ndarray:
    W = _two_form_matrix_real(omega)
    kern = _null_space(hook_matrix(phi), 3).real
    comp = _complement(kern)
    # a_i = comp c_i with omega(a_i, k_j) = delta_ij
    G = comp.T @ W @ kern
    A = comp @ np.linalg.inv(G).T
    Om = A.T @ W @ A
    A = A + kern @ (Om / 2).T
    d = (pullback(phi, np.column_stack([A, kern])).coefficient((1, 2, 3))).real
    t = np.cbrt(1.0 / d)
    return np.column_stack([A * t, kern / t])


def _null_case(omega: Form, tol_class: float) -> np.ndarray:
    P = _darboux(_two_form_matrix_real(omega), tol_class)
    return P[:, [0, 2, 4, 1, 3, 5]]


def symplectic_pair_normal_form(omega: Form, phi: Form, tol_class: float = TOL_CLASS,
                                tol_rel: float = TOL_REL) -> PairClass:
    """Case label, normalising basis and modulus of a compatible pair (omega, phi)."""
    if any(d != 2 for d in omega.degrees()):
        raise WrongType("omega must be a 2-form")
    omega = omega.real
    phi = _real_coeffs(phi)
    cube = top_coefficient(omega ^ omega ^ omega).real
    if abs(cube) <= tol_class * max(omega.norm(), 1e-300) ** 3:
        raise DegenerateOmega("omega^3 = 0")
    if (omega ^ phi).norm() > tol_rel * max(omega.norm() * phi.norm(), 1e-300):
        raise IncompatiblePair("omega ^ phi is not zero")
    cls = classify(phi, tol_class)
    mu: Optional[float] = None
    if cls.kind == "Type1":
        A, mu = _split_case(omega, phi, cls.basis)
        case = SPLIT
    elif cls.kind == "Type2":
        case, A, mu = _unitary_case(omega, phi, cls.basis)
    elif cls.kind == "Type3":
        case, A = _orthogonal_case(omega, phi, cls.basis)
    elif cls.kind == "Type4":
        case, A = _degenerate_case(omega, phi, tol_class)
    elif cls.kind == "Type5":
        case, A = LAGRANGIAN, _lagrangian_case(omega, phi)
    else:
        case, A = NULL, _null_case(omega, tol_class)
    return PairClass(case, A, mu, _pair_residual(omega, phi, case, A, mu))


def random_gl6(rng: np.random.Generator, min_sv: float = 0.1) -> np.ndarray:
    while True:
        g = rng.normal(size=(6, 6))
        if np.linalg.svd(g, compute_uv=False)[-1] > min_sv:
            return g


def random_three_form(rng: np.random.Generator) -> Form:
    from .exterior import from_vector

    return from_vector(rng.normal(size=20).astype(complex), 3)
