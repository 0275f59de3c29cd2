"""Exterior differential algebras with constant structure coefficients.

A :class:`CoframeModel` is a free exterior algebra on complex 1-form
symbols.  A complex generator ``s`` contributes two symbols, ``s`` and its
conjugate ``~s``; a real generator contributes one symbol that is its own
conjugate.  The exterior derivative is given on generators by the d-table
and extended as an anti-derivation.  Dependent symbols (for example
``b3 = -b1 - b2``) are eliminated by substitution.

Three generators are designated as the base (1,0)-forms alpha_1..3; every
bidegree count in this module is taken with respect to them and their
conjugates only, other symbols being treated as connection forms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .exterior import Form, basis, sort_sign, wedge
from .tolerances import TOL_REL

DEFINITE = "Definite"
LORENTZ12 = "Lorentz12"

CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))
_EPS = np.zeros((3, 3, 3))
for _i, _j, _k in CYCLIC:
    _EPS[_i, _j, _k] = 1.0
    _EPS[_i, _k, _j] = -1.0


class UnknownSymbol(KeyError):
    """An expression refers to a symbol the model does not declare."""


class MissingConnection(ValueError):
    """The operation needs a connection table the model does not carry."""


class ShapeMismatch(ValueError):
    """The structure equations do not have the conformal-unitary shape."""


@dataclass(frozen=True)
class Generator:
    name: str
    real: bool = False


Term = tuple[complex, tuple[str, ...]]


class CoframeModel:
    """Immutable constant-coefficient coframe model.

    ``d_table`` maps each generator name to a list of ``(coeff, factors)``
    terms, ``factors`` being two symbol names (``"~s"`` is the conjugate of
    ``s``).  ``kappa`` is a 3x3 table of 1-form term lists with
    ``d alpha_i = -kappa_ij ^ alpha_j + ...``.  ``constraints`` maps a
    dependent symbol name to a term list of 1-forms.
    """

    def __init__(
        self,
        name: str,
        generators: Sequence[Generator],
        d_table: Mapping[str, Sequence[Term]],
        alpha: Sequence[str],
        kappa: Optional[Sequence[Sequence[Sequence[Term]]]] = None,
        rho: Optional[Sequence[Term]] = None,
        constraints: Optional[Mapping[str, Sequence[Term]]] = None,
        signature: str = DEFINITE,
    ):
        if len(alpha) != 3:
            raise ValueError("a model designates exactly three base (1,0)-forms")
        if signature not in (DEFINITE, LORENTZ12):
            raise ValueError(f"unknown signature {signature!r}")
        self.name = name
        self.generators = tuple(generators)
        self.signature = signature
        self._raw = {
            "d": {k: [(complex(c), tuple(f)) for c, f in v] for k, v in d_table.items()},
            "kappa": None if kappa is None else [[[(complex(c), tuple(f)) for c, f in e] for e in row] for row in kappa],
            "rho": None if rho is None else [(complex(c), tuple(f)) for c, f in rho],
            "constraints": {k: [(complex(c), tuple(f)) for c, f in v] for k, v in (constraints or {}).items()},
        }
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise ValueError("generator names must be distinct")
        self._index: dict[str, int] = {}
        self._conj_index: dict[int, int] = {}
        self._labels: list[str] = []
        for g in self.generators:
            i = len(self._labels) + 1
            self._index[g.name] = i
            self._labels.append(g.name)
            if g.real:
                self._index["~" + g.name] = i
                self._conj_index[i] = i
            else:
                self._index["~" + g.name] = i + 1
                self._labels.append("~" + g.name)
                self._conj_index[i] = i + 1
                self._conj_index[i + 1] = i
        self.n_symbols = len(self._labels)
        self._dependent: dict[str, Form] = {}
        for dep, terms in self._raw["constraints"].items():
            if dep in self._index or dep.startswith("~"):
                raise ValueError(f"constraint target {dep!r} must be a fresh symbol name")
            self._dependent[dep] = self._expr(terms)
        for a in alpha:
            if a not in names or self.is_real(a):
                raise ValueError(f"base form {a!r} must be a complex generator")
        self.alpha_names = tuple(alpha)
        self.alpha_idx = tuple(self._index[a] for a in alpha)
        self.alpha_bar_idx = tuple(self._index["~" + a] for a in alpha)
        self._d_basis: dict[int, Form] = {}
        for g in self.generators:
            if g.name not in self._raw["d"]:
                raise ValueError(f"d-table has no entry for generator {g.name!r}")
            dg = self._expr(self._raw["d"][g.name])
            if any(len(k) != 2 for k in dg.terms):
                raise ValueError(f"d({g.name}) must be a 2-form")
            i = self._index[g.name]
            if g.real:
                if not (dg - self.conj(dg)).is_zero(1e-14):
                    raise ValueError(f"d of real generator {g.name!r} is not real")
                self._d_basis[i] = dg
            else:
                self._d_basis[i] = dg
                self._d_basis[self._conj_index[i]] = self.conj(dg)
        for k in self._raw["d"]:
            if k not in names:
                raise UnknownSymbol(k)

    # -- symbols and expressions -------------------------------------------------

    def is_real(self, name: str) -> bool:
        return any(g.name == name and g.real for g in self.generators)

    def sym(self, name: str) -> Form:
        """The 1-form denoted by ``name`` (dependent symbols substituted)."""
        if name in self._index:
            return basis(self._index[name])
        bare = name[1:] if name.startswith("~") else name
        if bare in self._dependent:
            f = self._dependent[bare]
            return self.conj(f) if name.startswith("~") else f
        raise UnknownSymbol(name)

    def _expr(self, terms: Iterable[Term]) -> Form:
        acc = Form()
        for c, factors in terms:
            acc = acc + complex(c) * wedge(*(self.sym(f) for f in factors))
        return acc

    def expr(self, terms: Iterable[Term]) -> Form:
        """Form from ``(coeff, factors)`` terms."""
        return self._expr(terms)

    def conj(self, a: Form) -> Form:
        out: dict[tuple[int, ...], complex] = {}
        for idx, c in a.terms.items():
            key, s = sort_sign(self._conj_index[i] for i in idx)
            if key is None:
                continue
            out[key] = out.get(key, 0j) + s * c.conjugate()
        return Form(out)

    def re(self, a: Form) -> Form:
        """Real part with respect to the model's conjugation."""
        return (a + self.conj(a)) * 0.5

    def im(self, a: Form) -> Form:
        return (a - self.conj(a)) * -0.5j

    def label(self, idx: Sequence[int]) -> str:
        return "^".join(self._labels[i - 1] for i in idx) or "1"

    def alpha(self, k: int) -> Form:
        """Base form alpha_k, k = 1..3."""
        return basis(self.alpha_idx[k - 1])

    def alpha_bar(self, k: int) -> Form:
        return basis(self.alpha_bar_idx[k - 1])

    @property
    def signs(self) -> np.ndarray:
        return np.array([1.0, 1.0, 1.0]) if self.signature == DEFINITE else np.array([1.0, -1.0, -1.0])

    # -- exterior derivative -----------------------------------------------------

    def d(self, a: Form) -> Form:
        """Anti-derivation extension of the d-table."""
        out = Form()
        for idx, c in a.terms.items():
            for p, i in enumerate(idx):
                di = self._d_basis[i]
                if not di:
                    continue
                term = wedge(basis(*idx[:p]), di, basis(*idx[p + 1:]))
                out = out + ((-1) ** p * c) * term
        return out

    @cached_property
    def kappa(self) -> Optional[list[list[Form]]]:
        if self._raw["kappa"] is None:
            return None
        return [[self._expr(e) for e in row] for row in self._raw["kappa"]]

    @cached_property
    def rho(self) -> Form:
        return Form() if self._raw["rho"] is None else self._expr(self._raw["rho"])

    def require_kappa(self) -> list[list[Form]]:
        if self.kappa is None:
            raise MissingConnection(f"model {self.name!r} has no connection table")
        return self.kappa

    # -- bidegree ----------------------------------------------------------------

    def base_bidegree(self, idx: Sequence[int]) -> Optional[tuple[int, int]]:
        """(p, q) counted on alpha / conj(alpha); None when a connection factor occurs."""
        p = q = 0
        for i in idx:
            if i in self.alpha_idx:
                p += 1
            elif i in self.alpha_bar_idx:
                q += 1
            else:
                return None
        return p, q

    def split(self, a: Form) -> tuple[dict[tuple[int, int], Form], Form]:
        """Bidegree parts of the semi-basic terms and the non-semi-basic remainder."""
        parts: dict[tuple[int, int], dict] = {}
        rest: dict = {}
        for idx, c in a.terms.items():
            bd = self.base_bidegree(idx)
            if bd is None:
                rest[idx] = c
            else:
                parts.setdefault(bd, {})[idx] = c
        return {k: Form(v) for k, v in parts.items()}, Form(rest)

    def part(self, a: Form, p: int, q: int) -> Form:
        return self.split(a)[0].get((p, q), Form())

    # -- serialisation -----------------------------------------------------------

    def to_json(self) -> dict:
        def terms_json(ts):
            return [{"coeff": [c.real, c.imag], "factors": list(f)} for c, f in ts]

        out = {
            "name": self.name,
            "generators": [{"name": g.name, "real": g.real} for g in self.generators],
            "d": {k: terms_json(v) for k, v in self._raw["d"].items()},
            "alpha": list(self.alpha_names),
            "signature": self.signature,
        }
        if self._raw["kappa"] is not None:
            out["kappa"] = [[terms_json(e) for e in row] for row in self._raw["kappa"]]
        if self._raw["rho"] is not None:
            out["rho"] = terms_json(self._raw["rho"])
        if self._raw["constraints"]:
            out["constraints"] = [{"symbol": k, "terms": terms_json(v)} for k, v in self._raw["constraints"].items()]
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "CoframeModel":
        def terms(ts):
            return [(complex(*t["coeff"]), tuple(t["factors"])) for t in ts]

        kappa = data.get("kappa")
        return cls(
            name=data.get("name", "model"),
            generators=[Generator(g["name"], bool(g.get("real", False))) for g in data["generators"]],
            d_table={k: terms(v) for k, v in data["d"].items()},
            alpha=list(data["alpha"]),
            kappa=None if kappa is None else [[terms(e) for e in row] for row in kappa],
            rho=None if data.get("rho") is None else terms(data["rho"]),
            constraints={c["symbol"]: terms(c["terms"]) for c in data.get("constraints", [])},
            signature=data.get("signature", DEFINITE),
        )

    def with_d_coefficient(self, generator: str, factors: Sequence[str], coeff: complex) -> "CoframeModel":
        """Copy with the coefficient of one monomial in d(generator) replaced."""
        data = self.to_json()
        target = self.expr([(1.0, tuple(factors))])
        (key, sgn), = target.terms.items()
        kept = [t for t in data["d"][generator]
                if not set(self.expr([(1.0, tuple(t["factors"]))]).terms) & {key}]
        kept.append({"coeff": [complex(coeff).real, complex(coeff).imag], "factors": list(factors)})
        data["d"][generator] = kept
        data["name"] = self.name + "*"
        return CoframeModel.from_json(data)

    def __repr__(self) -> str:
        return f"CoframeModel({self.name!r}, symbols={self.n_symbols})"


def load_model(path: str) -> CoframeModel:
    with open(path, encoding="utf-8") as fh:
        return CoframeModel.from_json(json.load(fh))


# -- catalog ---------------------------------------------------------------------

def _terms_from_form(model_like: "_Builder", f: Form) -> list[Term]:
    return [(c, tuple(model_like.labels[i - 1] for i in idx)) for idx, c in f.terms.items()]


class _Builder:
    """Scratch algebra used to assemble d-tables by formula."""

    def __init__(self, generators: Sequence[Generator], constraints: Mapping[str, Sequence[Term]] = ()):
        self.generators = list(generators)
        stub = CoframeModel("stub", generators, {g.name: [] for g in generators},
                            [g.name for g in generators if not g.real][:3], constraints=dict(constraints))
        self.model = stub
        self.labels = stub._labels

    def s(self, name: str) -> Form:
        return self.model.sym(name)

    def conj(self, f: Form) -> Form:
        return self.model.conj(f)

    def terms(self, f: Form) -> list[Term]:
        return _terms_from_form(self, f)


def _unitary_kappa_symbols(offdiag: Mapping[tuple[int, int], str], diag: Sequence[str]) -> list[list[list[Term]]]:
    """kappa_ij = s_ij (i<j), -conj(s_ji) (i>j), i*diag_i on the diagonal."""
    table: list[list[list[Term]]] = [[[] for _ in range(3)] for _ in range(3)]
    for (i, j), s in offdiag.items():
        table[i][j] = [(1.0, (s,))]
        table[j][i] = [(-1.0, ("~" + s,))]
    for i, s in enumerate(diag):
        table[i][i] = [(1j, (s,))]
    return table


def nearly_kahler_model(c: float = 1.0, name: Optional[str] = None) -> CoframeModel:
    """Homogeneous nearly Kahler structure equations with constant c and zero K.

    c = 1 is the G2-invariant structure on the six-sphere.
    """
    c = float(c)
    gens = [Generator("a1"), Generator("a2"), Generator("a3"),
            Generator("k12"), Generator("k13"), Generator("k23"),
            Generator("b1", real=True), Generator("b2", real=True)]
    constraints = {"b3": [(-1.0, ("b1",)), (-1.0, ("b2",))]}
    B = _Builder(gens, constraints)
    ktab = _unitary_kappa_symbols({(0, 1): "k12", (0, 2): "k13", (1, 2): "k23"}, ("b1", "b2", "b3"))
    K = [[B.model.expr(e) for e in row] for row in ktab]
    a = [B.s("a1"), B.s("a2"), B.s("a3")]
    ab = [B.conj(x) for x in a]
    d: dict[str, list[Term]] = {}
    for i, j, k in CYCLIC:
        f = Form()
        for l in range(3):
            f = f - (K[i][l] ^ a[l])
        f = f + c * (ab[j] ^ ab[k])
        d[f"a{i + 1}"] = B.terms(f)
    trace = a[0] ^ ab[0]
    trace = trace + (a[1] ^ ab[1]) + (a[2] ^ ab[2])

    def dkappa(i: int, j: int) -> Form:
        f = Form()
        for k in range(3):
            f = f - (K[i][k] ^ K[k][j])
        f = f + (0.75 * c * c) * (a[i] ^ ab[j])
        if i == j:
            f = f - (0.25 * c * c) * trace
        return f

    d["k12"] = B.terms(dkappa(0, 1))
    d["k13"] = B.terms(dkappa(0, 2))
    d["k23"] = B.terms(dkappa(1, 2))
    # kappa_jj = i b_j
    d["b1"] = B.terms(-1j * dkappa(0, 0))
    d["b2"] = B.terms(-1j * dkappa(1, 1))
    if name is None:
        name = "g2-s6" if c == 1.0 else f"nk({_fmt(c)})"
    return CoframeModel(name, gens, d, ("a1", "a2", "a3"), kappa=ktab, constraints=constraints)


def _fmt(c: float) -> str:
    fr = Fraction(c).limit_denominator(1000)
    return str(fr) if float(fr) == c else repr(c)


def flag_model(hyperbolic: bool = False) -> CoframeModel:
    """Maurer-Cartan model of SU(3)/T^2, or of SU(1,2)/T^2 when ``hyperbolic``.

    The Lie algebra valued form is gamma with d gamma = -gamma ^ gamma;
    the hyperbolic entries preserve the Hermitian form diag(1,-1,-1).
    """
    gens = [Generator("a1"), Generator("a2"), Generator("a3"),
            Generator("b1", real=True), Generator("b2", real=True)]
    constraints = {"b3": [(-1.0, ("b1",)), (-1.0, ("b2",))]}
    B = _Builder(gens, constraints)
    a = [B.s("a1"), B.s("a2"), B.s("a3")]
    ab = [B.conj(x) for x in a]
    b = [B.s("b1"), B.s("b2"), B.s("b3")]
    s = 1.0 if hyperbolic else -1.0
    gamma = [[1j * b[0], a[2], s * ab[1]],
             [s * ab[2], 1j * b[1], a[0]],
             [a[1], -ab[0], 1j * b[2]]]
    gg = [[sum((gamma[i][k] ^ gamma[k][j] for k in range(3)), Form()) for j in range(3)] for i in range(3)]
    d = {
        "a1": B.terms(-gg[1][2]),
        "a2": B.terms(-gg[2][0]),
        "a3": B.terms(-gg[0][1]),
        "b1": B.terms(1j * gg[0][0]),
        "b2": B.terms(1j * gg[1][1]),
    }
    # d alpha_i = -i(b_j - b_k) ^ alpha_i + ...
    ktab: list[list[list[Term]]] = [[[] for _ in range(3)] for _ in range(3)]
    for i, j, k in CYCLIC:
        ktab[i][i] = [(1j, (f"b{j + 1}",)), (-1j, (f"b{k + 1}",))]
    name = "su12-flag" if hyperbolic else "su3-flag"
    return CoframeModel(name, gens, d, ("a1", "a2", "a3"), kappa=ktab, constraints=constraints,
                        signature=LORENTZ12 if hyperbolic else DEFINITE)


def flat_model() -> CoframeModel:
    """Flat complex 3-space: d alpha_i = 0, zero connection."""
    gens = [Generator("a1"), Generator("a2"), Generator("a3")]
    zero: list[list[list[Term]]] = [[[] for _ in range(3)] for _ in range(3)]
    return CoframeModel("flat-c3", gens, {"a1": [], "a2": [], "a3": []}, ("a1", "a2", "a3"), kappa=zero)


CATALOG_NAMES = ("g2-s6", "su3-flag", "su12-flag", "nk(c)", "flat-c3")


def catalog(name: str) -> CoframeModel:
    """Built-in model by name; ``nk(c)`` accepts a number or fraction for c."""
    name = name.strip()
    if name == "g2-s6":
        return nearly_kahler_model(1.0)
    if name == "su3-flag":
        return flag_model(False)
    if name == "su12-flag":
        return flag_model(True)
    if name == "flat-c3":
        return flat_model()
    if name.startswith("nk(") and name.endswith(")"):
        try:
            c = float(Fraction(name[3:-1]))
        except (ValueError, ZeroDivisionError) as exc:
            raise UnknownSymbol(f"bad nearly Kahler constant in {name!r}") from exc
        return nearly_kahler_model(c, name=f"nk({_fmt(c)})")
    raise UnknownSymbol(f"unknown catalog model {name!r}")


@dataclass(frozen=True)
class PointModel:
    """First-order data at a single point: the Nijenhuis matrix itself."""

    name: str
    n: np.ndarray


def point_model(c, name: str = "point") -> PointModel:
    n = np.asarray(c, dtype=complex)
    if n.shape != (3, 3):
        raise ValueError("point model needs a 3x3 matrix")
    return PointModel(name, n)


# -- checks ----------------------------------------------------------------------

def model_d(model: CoframeModel, expr: Form) -> Form:
    return model.d(expr)


def check_d_squared(model: CoframeModel) -> dict[str, float]:
    """Largest coefficient of d(d(s)) for each generator."""
    return {g.name: model.d(model.d(model.sym(g.name))).norm() for g in model.generators}


def _pbar(model: CoframeModel) -> list[Form]:
    """(conj(a2^a3), conj(a3^a1), conj(a1^a2))."""
    ab = [model.alpha_bar(k) for k in (1, 2, 3)]
    return [ab[1] ^ ab[2], ab[2] ^ ab[0], ab[0] ^ ab[1]]


def nijenhuis_from_model(model: CoframeModel) -> np.ndarray:
    """Matrix N with (0,2)-part of d alpha_i = sum_m N_im Pbar_m."""
    pb = _pbar(model)
    n = np.zeros((3, 3), dtype=complex)
    for i in range(3):
        part = model.part(model.d(model.alpha(i + 1)), 0, 2)
        for m in range(3):
            (key, _), = pb[m].terms.items()
            n[i, m] = pb[m].terms[key].conjugate() * part.terms.get(key, 0j)
            part = part - n[i, m] * pb[m]
        assert part.is_zero(1e-12), "(0,2) forms in three variables span three monomials"
    return n


def omega_form(model: CoframeModel, h: np.ndarray) -> Form:
    """(i/2) sum h_jk alpha_j ^ conj(alpha_k)."""
    f = Form()
    for j in range(3):
        for k in range(3):
            if h[j, k] != 0:
                f = f + (0.5j * h[j, k]) * (model.alpha(j + 1) ^ model.alpha_bar(k + 1))
    return f


def psi_form(model: CoframeModel, coeff: complex = 1.0) -> Form:
    return coeff * wedge(model.alpha(1), model.alpha(2), model.alpha(3))


def invariant_model_forms(model: CoframeModel) -> tuple[Form, Form]:
    """omega(J) and psi(J) built from the model's Nijenhuis matrix."""
    from .nmatrix import invariant_forms

    inv = invariant_forms(nijenhuis_from_model(model))
    return omega_form(model, inv.omega_matrix), psi_form(model, inv.psi_coeff)


def base_forms(model: CoframeModel) -> tuple[Form, Form]:
    """omega_0 = (i/2) sum s_k alpha_k ^ conj(alpha_k) and psi_0 = alpha_123."""
    return omega_form(model, np.diag(model.signs).astype(complex)), psi_form(model)


def verify_form_identity(model: CoframeModel, lhs: Form, rhs: Form) -> float:
    return (lhs - rhs).norm()


@dataclass(frozen=True)
class FormIdentityReport:
    """Residuals of the first-order form identities inside a model."""

    d_omega_nk: float
    d_psi_nk: float
    d_omega_split: float
    dm12_omega: float
    dbar_omega: float
    constant: float

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


def form_identities(model: CoframeModel) -> FormIdentityReport:
    """Nearly-Kahler relations, the (-1,2) identity and the splitting of d omega.

    ``constant`` is the c in d omega_0 = 3c Im psi_0, read off from the
    Nijenhuis matrix as N = c S (S the signature matrix); the nearly Kahler
    residuals are NaN when N has no such form.
    """
    n = nijenhuis_from_model(model)
    S = np.diag(model.signs)
    c = complex(n[0, 0] * S[0, 0])
    if np.max(np.abs(n - c * S)) > TOL_REL * max(1.0, np.max(np.abs(n))) or abs(c.imag) > TOL_REL:
        d_omega_nk = d_psi_nk = float("nan")
    else:
        omega0, psi0 = base_forms(model)
        d_omega_nk = verify_form_identity(model, model.d(omega0), 3 * c.real * model.im(psi0))
        d_psi_nk = verify_form_identity(model, model.d(psi0), 2 * c.real * (omega0 ^ omega0))
    omega, psi = invariant_model_forms(model)
    dw = model.d(omega)
    parts, rest = model.split(dw)
    zero = Form()
    dm12 = parts.get((0, 3), zero)
    d21 = parts.get((3, 0), zero)
    split_res = (dw - 3 * model.im(psi) - parts.get((2, 1), zero) - parts.get((1, 2), zero)).norm()
    return FormIdentityReport(
        d_omega_nk=float(d_omega_nk),
        d_psi_nk=float(d_psi_nk),
        d_omega_split=max(split_res, rest.norm()),
        dm12_omega=max((dm12 - 1.5j * model.conj(psi)).norm(), (d21 + 1.5j * psi).norm()),
        dbar_omega=parts.get((1, 2), zero).norm(),
        constant=float(c.real),
    )


def eta_trace(model: CoframeModel, f: Form) -> complex:
    """-2i sum_k s_k (coefficient of alpha_k ^ conj(alpha_k)); eta itself has trace 3."""
    tr = 0j
    for k in range(3):
        mono = model.alpha(k + 1) ^ model.alpha_bar(k + 1)
        (key, sgn), = mono.terms.items()
        tr += model.signs[k] * sgn * f.terms.get(key, 0j)
    return -2j * tr


@dataclass(frozen=True)
class CurvatureReport:
    F: list
    non_11: float
    non_semibasic: float
    trace: np.ndarray


def curvature(model: CoframeModel) -> CurvatureReport:
    """F = d kappa + kappa ^ kappa with its type and eta-trace diagnostics."""
    K = model.require_kappa()
    F = [[model.d(K[i][j]) + sum((K[i][k] ^ K[k][j] for k in range(3)), Form()) for j in range(3)]
         for i in range(3)]
    non11 = nonsb = 0.0
    tr = np.zeros((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            parts, rest = model.split(F[i][j])
            nonsb = max(nonsb, rest.norm())
            for bd, p in parts.items():
                if bd != (1, 1):
                    non11 = max(non11, p.norm())
            tr[i, j] = eta_trace(model, F[i][j])
    return CurvatureReport(F, non11, nonsb, tr)


@dataclass(frozen=True)
class TorsionData:
    lam: complex
    b_tensor: np.ndarray
    a_trace: np.ndarray
    lambda_bar: np.ndarray


def torsion_from_model(model: CoframeModel, tol: float = TOL_REL) -> TorsionData:
    """Read lambda and B off d alpha_i = -rho alpha_i - kappa_ij alpha_j - B_ijk conj(alpha_j) alpha_k + lambda (0,2).

    For a Lorentzian model the (0,2)-part is lambda times the signature
    matrix.  Constant models have vanishing covariant derivatives, so
    ``a_trace`` and ``lambda_bar`` are zero.
    """
    K = model.require_kappa()
    S = model.signs
    lam = None
    B = np.zeros((3, 3, 3), dtype=complex)
    for i in range(3):
        rem = model.d(model.alpha(i + 1)) + (model.rho ^ model.alpha(i + 1))
        for j in range(3):
            rem = rem + (K[i][j] ^ model.alpha(j + 1))
        parts, rest = model.split(rem)
        if rest.norm() > tol:
            raise ShapeMismatch(f"d alpha_{i + 1} has non-semi-basic torsion")
        if parts.get((2, 0), Form()).norm() > tol:
            raise ShapeMismatch(f"d alpha_{i + 1} has a (2,0) part")
        for j in range(3):
            for k in range(3):
                mono = model.alpha_bar(j + 1) ^ model.alpha(k + 1)
                (key, sgn), = mono.terms.items()
                B[i, j, k] = -sgn * parts.get((1, 1), Form()).terms.get(key, 0j)
    n = nijenhuis_from_model(model)
    lam = complex(n[0, 0] * S[0])
    scale = max(1.0, float(np.max(np.abs(n))))
    if np.max(np.abs(n - lam * np.diag(S))) > tol * scale:
        raise ShapeMismatch("(0,2) torsion is not a multiple of the signature matrix")
    if np.max(np.abs(B + B.transpose(1, 0, 2))) > tol:
        raise ShapeMismatch("(1,1) torsion is not antisymmetric in its first two indices")
    if np.max(np.abs(np.einsum("ijj,j->i", B, S))) > tol:
        raise ShapeMismatch("(1,1) torsion is not trace-free")
    return TorsionData(lam, B, np.zeros(3, dtype=complex), np.zeros(3, dtype=complex))


@dataclass(frozen=True)
class DichotomyReport:
    obstruction: float
    second_order: float


def dichotomy_check(model: CoframeModel) -> DichotomyReport:
    """Residuals of lambda (8 a + 3 lambda_bar) = 0 and lambda_bar_l + (1/3) eps_ijl B_ijkk."""
    t = torsion_from_model(model)
    obstruction = float(np.max(np.abs(t.lam * (8 * t.a_trace + 3 * t.lambda_bar))))
    if t.lam == 0:
        return DichotomyReport(obstruction, 0.0)
    # B_ijkk is a covariant derivative of the torsion, zero for constant coefficients
    b_div = np.zeros((3, 3), dtype=complex)
    second = t.lambda_bar + np.einsum("ijl,ij->l", _EPS, b_div) / 3.0
    return DichotomyReport(obstruction, float(np.max(np.abs(second))))


def dual_five_form(model: CoframeModel, k: int) -> Form:
    """alpha_[k]: conj(alpha_j) ^ alpha_[k] = delta_jk Omega, alpha_j ^ alpha_[k] = 0.

    Omega = (i/8) alpha_123 ^ conj(alpha_123).
    """
    a123 = wedge(model.alpha(1), model.alpha(2), model.alpha(3))
    omega = (1j / 8) * (a123 ^ wedge(model.alpha_bar(1), model.alpha_bar(2), model.alpha_bar(3)))
    rest = [j for j in (1, 2, 3) if j != k]
    cand = a123 ^ model.alpha_bar(rest[0]) ^ model.alpha_bar(rest[1])
    probe = model.alpha_bar(k) ^ cand
    (key, val), = omega.terms.items()
    return cand * (val / probe.terms[key])


def volume_form(model: CoframeModel) -> Form:
    a123 = wedge(model.alpha(1), model.alpha(2), model.alpha(3))
    return (1j / 8) * (a123 ^ wedge(model.alpha_bar(1), model.alpha_bar(2), model.alpha_bar(3)))


@dataclass
class CatalogReport:
    """All model-level checks gathered for one model."""

    name: str
    d_squared: float
    nijenhuis: np.ndarray
    identities: FormIdentityReport
    curvature_non_11: float
    curvature_non_semibasic: float
    curvature_trace: float
    torsion_lambda: complex
    dichotomy: DichotomyReport
    residuals: dict = field(default_factory=dict)


def examine(model: CoframeModel) -> CatalogReport:
    d2 = max(check_d_squared(model).values(), default=0.0)
    n = nijenhuis_from_model(model)
    ids = form_identities(model)
    curv = curvature(model)
    tors = torsion_from_model(model)
    dich = dichotomy_check(model)
    report = CatalogReport(
        name=model.name,
        d_squared=d2,
        nijenhuis=n,
        identities=ids,
        curvature_non_11=curv.non_11,
        curvature_non_semibasic=curv.non_semibasic,
        curvature_trace=float(np.max(np.abs(curv.trace))),
        torsion_lambda=tors.lam,
        dichotomy=dich,
    )
    S = np.diag(model.signs)
    report.residuals = {
        "d_squared": d2,
        "nijenhuis_scalar": float(np.max(np.abs(n - n[0, 0] * S[0, 0] * S))),
        "d_omega_nk": ids.d_omega_nk,
        "d_psi_nk": ids.d_psi_nk,
        "d_omega_split": ids.d_omega_split,
        "dm12_omega": ids.dm12_omega,
        "curvature_non_11": curv.non_11,
        "curvature_non_semibasic": curv.non_semibasic,
        "curvature_trace": report.curvature_trace,
        "dichotomy_obstruction": dich.obstruction,
        "dichotomy_second_order": dich.second_order,
    }
    return report
