"""Sparse exterior algebra with complex coefficients.

A :class:`Form` maps strictly increasing index tuples to complex
coefficients.  The class itself does not fix a dimension, so the coframe
models reuse it for their larger generator sets; everything else in this
module works over the fixed real basis e^1..e^6 of a six-dimensional space.

Frame-adapted coordinates: for a :class:`ComplexFrame` the covectors
zeta^1, zeta^2, zeta^3, conj(zeta^1), conj(zeta^2), conj(zeta^3) are
labelled 1..6, so an index <= 3 marks a (1,0) factor and an index >= 4 a
(0,1) factor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .tolerances import TOL_CLASS, TOL_REL

DIM = 6
DEFINITE = "Definite"
LORENTZ12 = "Lorentz12"
SIGNATURES = (DEFINITE, LORENTZ12)


class DegenerateFrame(ValueError):
    """The six frame covectors do not span the complexified dual space."""


class WrongType(ValueError):
    """A form does not have the bidegree an operation requires."""


class ZeroCovector(ValueError):
    """A covector argument vanishes."""


def sort_sign(idx: Iterable[int]) -> tuple[tuple[int, ...] | None, int]:
    """Sort ``idx`` and return it with the permutation sign.

    Returns ``(None, 0)`` when an index repeats (the product vanishes).
    """
    lst = list(idx)
    if len(set(lst)) != len(lst):
        return None, 0
    sign = 1
    for i in range(1, len(lst)):
        j = i
        while j > 0 and lst[j - 1] > lst[j]:
            lst[j - 1], lst[j] = lst[j], lst[j - 1]
            sign = -sign
            j -= 1
    return tuple(lst), sign


def _merge(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[tuple[int, ...] | None, int]:
    # a and b are sorted; the sign counts inversions between them
    if not a:
        return b, 1
    if not b:
        return a, 1
    inv = 0
    for x in a:
        for y in b:
            if x == y:
                return None, 0
            if x > y:
                inv += 1
    return tuple(sorted(a + b)), (-1 if inv & 1 else 1)


class Form:
    """Immutable sparse exterior form with complex coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Sequence[int], complex] | None = None):
        clean: dict[tuple[int, ...], complex] = {}
        for idx, c in (terms or {}).items():
            key, s = sort_sign(idx)
            if key is None:
                continue
            clean[key] = clean.get(key, 0j) + s * complex(c)
        self._terms = {k: v for k, v in clean.items() if v != 0}

    @classmethod
    def _trusted(cls, terms: dict[tuple[int, ...], complex]) -> "Form":
        out = cls.__new__(cls)
        out._terms = {k: v for k, v in terms.items() if v != 0}
        return out

    @property
    def terms(self) -> Mapping[tuple[int, ...], complex]:
        return MappingProxyType(self._terms)

    def degrees(self) -> list[int]:
        return sorted({len(k) for k in self._terms})

    def part(self, k: int) -> "Form":
        """Homogeneous component of degree ``k``."""
        return Form._trusted({i: c for i, c in self._terms.items() if len(i) == k})

    def coefficient(self, idx: Sequence[int]) -> complex:
        key, s = sort_sign(idx)
        if key is None:
            return 0j
        return s * self._terms.get(key, 0j)

    def norm(self) -> float:
        """Largest coefficient modulus (0 for the zero form)."""
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.norm() <= tol

    def chop(self, tol: float) -> "Form":
        return Form._trusted({i: c for i, c in self._terms.items() if abs(c) > tol})

    def conj(self) -> "Form":
        """Complex conjugate with respect to the real basis."""
        return Form._trusted({i: c.conjugate() for i, c in self._terms.items()})

    @property
    def real(self) -> "Form":
        return Form._trusted({i: complex(c.real) for i, c in self._terms.items()})

    @property
    def imag(self) -> "Form":
        return Form._trusted({i: complex(c.imag) for i, c in self._terms.items()})

    def __add__(self, other: "Form") -> "Form":
        out = dict(self._terms)
        for i, c in other._terms.items():
            out[i] = out.get(i, 0j) + c
        return Form._trusted(out)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __neg__(self) -> "Form":
        return Form._trusted({i: -c for i, c in self._terms.items()})

    def __mul__(self, s: complex) -> "Form":
        if isinstance(s, Form):
            return NotImplemented
        s = complex(s)
        return Form._trusted({i: s * c for i, c in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, s: complex) -> "Form":
        return self * (1.0 / complex(s))

    def __xor__(self, other: "Form") -> "Form":
        return wedge(self, other)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Form) and self._terms == other._terms

    __hash__ = None  # type: ignore[assignment]

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __repr__(self) -> str:
        if not self._terms:
            return "Form(0)"
        parts = [f"{c:.6g}*e{''.join(map(str, i)) or '()'}" for i, c in sorted(self._terms.items())]
        return "Form(" + " + ".join(parts) + ")"

    def to_json(self) -> dict:
        return {
            "terms": [
                {"idx": list(i), "re": c.real, "im": c.imag}
                for i, c in sorted(self._terms.items(), key=lambda t: (len(t[0]), t[0]))
            ]
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Form":
        terms: dict[tuple[int, ...], complex] = {}
        for t in data["terms"]:
            idx = tuple(int(i) for i in t["idx"])
            if any(i < 1 for i in idx):
                raise ValueError(f"form index out of range: {idx}")
            c = complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
            key, s = sort_sign(idx)
            if key is None:
                continue
            terms[key] = terms.get(key, 0j) + s * c
        return cls(terms)


def basis(*idx: int) -> Form:
    """The monomial e^{i1} ^ ... ^ e^{ik}; ``basis()`` is the constant 1."""
    return Form({tuple(idx): 1.0})


def covector(coeffs: Sequence[complex]) -> Form:
    """1-form sum_a coeffs[a-1] e^a."""
    return Form({(a + 1,): c for a, c in enumerate(coeffs) if c != 0})


def wedge(*forms: Form) -> Form:
    if not forms:
        return basis()
    acc = forms[0]
    for f in forms[1:]:
        out: dict[tuple[int, ...], complex] = {}
        for i, a in acc._terms.items():
            for j, b in f._terms.items():
                key, s = _merge(i, j)
                if key is None:
                    continue
                out[key] = out.get(key, 0j) + s * a * b
        acc = Form._trusted(out)
    return acc


def hook(v: Sequence[complex], a: Form) -> Form:
    """Interior product contracting ``v`` into the leading slot."""
    out: dict[tuple[int, ...], complex] = {}
    for idx, c in a.terms.items():
        for s, i in enumerate(idx):
            vi = v[i - 1]
            if vi == 0:
                continue
            key = idx[:s] + idx[s + 1:]
            out[key] = out.get(key, 0j) + (-1) ** s * vi * c
    return Form._trusted(out)


@lru_cache(maxsize=None)
def subsets(k: int, n: int = DIM) -> tuple[tuple[int, ...], ...]:
    """Increasing k-subsets of {1..n} in lexicographic order."""
    return tuple(itertools.combinations(range(1, n + 1), k))


@lru_cache(maxsize=None)
def _subset_index(k: int, n: int) -> dict[tuple[int, ...], int]:
    return {s: i for i, s in enumerate(subsets(k, n))}


def to_vector(a: Form, k: int, n: int = DIM) -> np.ndarray:
    """Coefficients of the degree-k part of ``a`` in lexicographic order."""
    pos = _subset_index(k, n)
    vec = np.zeros(len(pos), dtype=complex)
    for idx, c in a.terms.items():
        if len(idx) == k:
            vec[pos[idx]] = c
    return vec


def from_vector(vec: np.ndarray, k: int, n: int = DIM) -> Form:
    return Form._trusted({s: complex(c) for s, c in zip(subsets(k, n), vec) if c != 0})


def compound(A: np.ndarray, k: int) -> np.ndarray:
    """k-th compound matrix: entry (I, J) is the minor det A[I, J]."""
    A = np.asarray(A)
    n = A.shape[0]
    subs = [np.array(s) - 1 for s in subsets(k, n)]
    if k == 0:
        return np.ones((1, 1), dtype=A.dtype)
    rows = np.stack([A[s] for s in subs])  # (m, k, n)
    blocks = np.stack([rows[:, :, s] for s in subs], axis=1)  # (m, m, k, k)
    return np.linalg.det(blocks)


def pullback(a: Form, A: np.ndarray) -> Form:
    """Substitute e^i -> sum_j A[i, j] e^j in every term of ``a``.

    For a linear map with matrix ``A`` acting on column vectors this is the
    pullback A^* a.
    """
    A = np.asarray(A)
    n = A.shape[0]
    out = Form()
    for k in a.degrees():
        vec = to_vector(a, k, n)
        out = out + from_vector(vec @ compound(A, k), k, n)
    return out


def evaluate(a: Form, vectors: Sequence[Sequence[complex]]) -> complex:
    """Value of the degree-k part of ``a`` on k vectors."""
    k = len(vectors)
    V = np.array(vectors, dtype=complex).T  # columns are the vectors
    total = 0j
    for idx, c in a.part(k).terms.items():
        total += c * np.linalg.det(V[np.array(idx) - 1, :]) if k else c
    return total


def two_form_matrix(a: Form, n: int = DIM) -> np.ndarray:
    """Antisymmetric matrix W with a(u, v) = u^T W v."""
    W = np.zeros((n, n), dtype=complex)
    for (i, j), c in a.part(2).terms.items():
        W[i - 1, j - 1] += c
        W[j - 1, i - 1] -= c
    return W


def volume() -> Form:
    return basis(1, 2, 3, 4, 5, 6)


def top_coefficient(a: Form) -> complex:
    """Coefficient of e^123456 in ``a``."""
    return a.coefficient((1, 2, 3, 4, 5, 6))


def rank(M: np.ndarray, tol_class: float = TOL_CLASS) -> int:
    """Numerical rank by singular values relative to the largest one."""
    M = np.asarray(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol_class * s[0]))


@dataclass(frozen=True)
class ComplexFrame:
    """Three (1,0) covectors with a Hermitian sign convention and orientation."""

    zeta: tuple[Form, Form, Form]
    signature: str = DEFINITE
    orientation: int = 1

    def __post_init__(self) -> None:
        if len(self.zeta) != 3:
            raise ValueError("a frame needs exactly three covectors")
        if self.signature not in SIGNATURES:
            raise ValueError(f"unknown signature {self.signature!r}")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        for z in self.zeta:
            if z.degrees() not in ([], [1]):
                raise ValueError("frame covectors must be 1-forms")

    @property
    def signs(self) -> np.ndarray:
        return np.array([1.0, 1.0, 1.0] if self.signature == DEFINITE else [1.0, -1.0, -1.0])

    def matrix(self) -> np.ndarray:
        """6x6 matrix whose rows are zeta^1..3 and their conjugates in e-coordinates."""
        rows = [[z.coefficient((a,)) for a in range(1, DIM + 1)] for z in self.zeta]
        Z = np.array(rows, dtype=complex)
        return np.vstack([Z, Z.conj()])

    def conditioning(self) -> float:
        s = np.linalg.svd(self.matrix(), compute_uv=False)
        return float(s[-1] / s[0]) if s[0] > 0 else 0.0

    def check(self, tol_class: float = TOL_CLASS) -> None:
        if self.conditioning() <= tol_class:
            raise DegenerateFrame("frame covectors are linearly dependent")

    def bar(self, k: int) -> Form:
        return self.zeta[k].conj()

    def eta(self) -> Form:
        """Hermitian form (i/2) sum_k s_k zeta^k ^ conj(zeta^k)."""
        out = Form()
        for k in range(3):
            out = out + (0.5j * self.signs[k]) * wedge(self.zeta[k], self.bar(k))
        return out

    def volume(self) -> Form:
        """Omega = (i/8) zeta^123 ^ conj(zeta^123)."""
        return 0.125j * wedge(*self.zeta, *(self.bar(k) for k in range(3)))

    def holomorphic_volume(self) -> Form:
        return wedge(*self.zeta)

    def with_signature(self, signature: str) -> "ComplexFrame":
        return ComplexFrame(self.zeta, signature, self.orientation)


def standard_frame(signature: str = DEFINITE, orientation: int = 1) -> ComplexFrame:
    """zeta^k = e^{2k-1} + i e^{2k}."""
    zeta = tuple(basis(2 * k - 1) + 1j * basis(2 * k) for k in (1, 2, 3))
    return ComplexFrame(zeta, signature, orientation)  # type: ignore[arg-type]


def frame_from_rows(Z: np.ndarray, signature: str = DEFINITE, orientation: int = 1) -> ComplexFrame:
    """Frame whose k-th covector has e-coordinates ``Z[k]``."""
    Z = np.asarray(Z, dtype=complex)
    return ComplexFrame(tuple(covector(row) for row in Z), signature, orientation)  # type: ignore[arg-type]


def to_frame_basis(a: Form, frame: ComplexFrame, tol_class: float = TOL_CLASS) -> Form:
    """Rewrite ``a`` in frame-adapted coordinates (labels 1..6, see module doc)."""
    frame.check(tol_class)
    return pullback(a, np.linalg.inv(frame.matrix()))


def from_frame_basis(b: Form, frame: ComplexFrame) -> Form:
    return pullback(b, frame.matrix())


def bidegree(idx: Sequence[int]) -> tuple[int, int]:
    p = sum(1 for i in idx if i <= 3)
    return p, len(idx) - p


def type_split(a: Form, frame: ComplexFrame, tol: float = TOL_REL,
               tol_class: float = TOL_CLASS) -> dict[tuple[int, int], Form]:
    """Split ``a`` into (p,q) components relative to ``frame``.

    Components whose coefficients all fall below ``tol`` times the input
    scale are dropped.
    """
    b = to_frame_basis(a, frame, tol_class)
    groups: dict[tuple[int, int], dict] = {}
    for idx, c in b.terms.items():
        groups.setdefault(bidegree(idx), {})[idx] = c
    scale = max(a.norm(), 1e-300)
    out = {}
    for pq in sorted(groups):
        comp = from_frame_basis(Form._trusted(groups[pq]), frame)
        if comp.norm() > tol * scale:
            out[pq] = comp
    return out


def trace_eta(a: Form, frame: ComplexFrame, tol: float = TOL_REL,
              tol_class: float = TOL_CLASS) -> tuple[complex, Form]:
    """Trace of a (1,1)-form against eta and its eta-primitive part.

    With a = sum a_{ij} zeta^i ^ conj(zeta^j) the trace is
    -2i sum_k s_k a_{kk}, normalised so that tr(eta) = 3.
    """
    if any(d != 2 for d in a.degrees()):
        raise WrongType("trace_eta expects a 2-form")
    b = to_frame_basis(a, frame, tol_class)
    scale = max(a.norm(), 1e-300)
    for idx, c in b.terms.items():
        if bidegree(idx) != (1, 1) and abs(c) > tol * scale:
            raise WrongType("form is not of type (1,1) for this frame")
    s = frame.signs
    tr = -2j * sum(s[k] * b.coefficient((k + 1, k + 4)) for k in range(3))
    return tr, a - (tr / 3.0) * frame.eta()


@dataclass(frozen=True)
class SymbolRanks:
    """Ranks along Lambda^{1,1}_0 -> Lambda^{2,1}+Lambda^{1,2} -> Lambda^4 -> Lambda^5 -> Lambda^6."""

    dims: tuple[int, ...]
    ranks: tuple[int, ...]
    injective: bool
    exact: tuple[bool, ...]

    @property
    def ok(self) -> bool:
        return self.injective and all(self.exact)


def _frame_monomial(idx: Sequence[int], frame: ComplexFrame) -> Form:
    cov = list(frame.zeta) + [frame.bar(k) for k in range(3)]
    return wedge(*(cov[i - 1] for i in idx))


def primitive_11_basis(frame: ComplexFrame) -> list[Form]:
    """Basis of the eta-primitive (1,1)-forms (complex dimension 8)."""
    s = frame.signs
    out = [_frame_monomial((i, j + 3), frame) for i in (1, 2, 3) for j in (1, 2, 3) if i != j]
    out.append(s[0] * _frame_monomial((1, 4), frame) - s[1] * _frame_monomial((2, 5), frame))
    out.append(s[1] * _frame_monomial((2, 5), frame) - s[2] * _frame_monomial((3, 6), frame))
    return out


def mixed_three_basis(frame: ComplexFrame) -> list[Form]:
    """Basis of Lambda^{2,1} + Lambda^{1,2} (complex dimension 18)."""
    out = []
    for idx in subsets(3, DIM):
        if bidegree(idx) in ((2, 1), (1, 2)):
            out.append(_frame_monomial(idx, frame))
    return out


def symbol_sequence_ranks(xi: Sequence[float], frame: ComplexFrame | None = None,
                          tol_class: float = TOL_CLASS) -> SymbolRanks:
    """Ranks of left multiplication by the real covector ``xi`` along the symbol sequence."""
    xi_arr = np.asarray(xi, dtype=float)
    if xi_arr.shape != (DIM,):
        raise ValueError("covector must have six components")
    if not np.any(xi_arr):
        raise ZeroCovector("symbol sequence needs a nonzero covector")
    frame = frame or standard_frame()
    frame.check(tol_class)
    x = covector(xi_arr)

    def image(domain: list[Form], k: int) -> np.ndarray:
        return np.array([to_vector(wedge(x, f), k) for f in domain]).T

    prim = primitive_11_basis(frame)
    mixed = mixed_three_basis(frame)
    lam4 = [basis(*s) for s in subsets(4)]
    lam5 = [basis(*s) for s in subsets(5)]
    maps = [image(prim, 3), image(mixed, 4), image(lam4, 5), image(lam5, 6)]
    dims = (len(prim), len(mixed), len(lam4), len(lam5), 1)
    ranks = tuple(rank(m, tol_class) for m in maps)
    exact = tuple(ranks[i] == dims[i + 1] - ranks[i + 1] for i in range(3))
    return SymbolRanks(dims, ranks, ranks[0] == dims[0], exact)


def dual_five_form(frame: ComplexFrame, k: int, tol_class: float = TOL_CLASS) -> Form:
    """5-form alpha_[k] with conj(zeta^j) ^ alpha_[k] = delta_jk Omega and zeta^j ^ alpha_[k] = 0.

    ``k`` runs over 1..3.
    """
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    frame.check(tol_class)
    rest = tuple(i for i in range(1, 7) if i != k + 3)
    _, sign = sort_sign((k + 3,) + rest)
    return _frame_monomial(rest, frame) * (0.125j * sign)
