"""First-order functionals c1 |det N|^2 + c2 |P(conj N, conj N, N^T)|^2.

The gradient tensor ``G[i, j, k]`` stands for L^{jk}_i (barred pair
(j, k)), defined by dL = Re(sum_{ijk} G[i, j, k] dN^i_{jk}) where
N^i_{jk} = eps_{jkm} N_{im} are the (0,2)-torsion components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .coframe import CoframeModel, _EPS, _pbar, dual_five_form, nijenhuis_from_model, volume_form
from .exterior import Form
from .nmatrix import adjugate, as_cmat, polar_adj, polar_det
from .tolerances import TOL_REL


class StructureEquationMismatch(ValueError):
    """The model's connection does not satisfy d alpha = -kappa alpha + N Pbar."""


@dataclass(frozen=True)
class FunctionalCoeffs:
    c1: float
    c2: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c1) and math.isfinite(self.c2)):
            raise ValueError("functional coefficients must be finite")


def psi_density(a) -> complex:
    a = as_cmat(a)
    return polar_det(a.conj(), a.conj(), a.T)


def lagrangian_density(c: FunctionalCoeffs, a) -> float:
    a = as_cmat(a)
    return float(c.c1 * abs(np.linalg.det(a)) ** 2 + c.c2 * abs(psi_density(a)) ** 2)


def wirtinger_gradient(c: FunctionalCoeffs, a) -> np.ndarray:
    """dL/dN in the Wirtinger sense, (1/2)(d/dx - i d/dy) entrywise."""
    a = as_cmat(a)
    grad = np.zeros((3, 3), dtype=complex)
    if c.c1:
        grad += c.c1 * np.conj(np.linalg.det(a)) * adjugate(a).T
    if c.c2:
        ab = a.conj()
        psi = polar_det(ab, ab, a.T)
        grad += c.c2 * (np.conj(psi) * polar_adj(ab, ab) / 3.0
                        + psi * (2.0 / 3.0) * np.conj(polar_adj(ab, a.T)).T)
    return grad


def gradient_L(c: FunctionalCoeffs, a) -> np.ndarray:
    """Tensor G[i, j, k] = L^{jk}_i, antisymmetric in (j, k)."""
    return np.einsum("jkm,im->ijk", _EPS, wirtinger_gradient(c, a))


def fd_wirtinger_gradient(c: FunctionalCoeffs, a, step: float = 1e-5) -> np.ndarray:
    """Central-difference Wirtinger derivative of the Lagrangian density."""
    a = as_cmat(a)
    out = np.zeros((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            e = np.zeros((3, 3), dtype=complex)
            e[i, j] = step
            dx = (lagrangian_density(c, a + e) - lagrangian_density(c, a - e)) / (2 * step)
            dy = (lagrangian_density(c, a + 1j * e) - lagrangian_density(c, a - 1j * e)) / (2 * step)
            out[i, j] = 0.5 * (dx - 1j * dy)
    return out


def torsion_components(dn) -> np.ndarray:
    """dN^i_{jk} = eps_{jkm} dN_{im}."""
    return np.einsum("jkm,im->ijk", _EPS, as_cmat(dn))


@dataclass(frozen=True)
class ELReport:
    """Omega-coefficients of the Euler-Lagrange 6-forms, indexed [i, j]."""

    residuals: np.ndarray
    max_abs: float
    critical: bool
    off_volume: float
    precondition: float
    scale: float

    def as_dict(self) -> dict:
        return {
            "residuals": [[[float(z.real), float(z.imag)] for z in row] for row in self.residuals],
            "maxAbs": self.max_abs,
            "critical": self.critical,
            "offVolume": self.off_volume,
            "precondition": self.precondition,
            "scale": self.scale,
        }


def _kappa_tables(model: CoframeModel, kappa: Optional[Sequence[Sequence[Form]]]) -> list[list[Form]]:
    return [list(r) for r in (kappa if kappa is not None else model.require_kappa())]


def structure_residual(model: CoframeModel, kappa: Optional[Sequence[Sequence[Form]]] = None) -> float:
    """Residual of d alpha_i + kappa_ij ^ alpha_j - N_im Pbar_m."""
    K = _kappa_tables(model, kappa)
    n = nijenhuis_from_model(model)
    pb = _pbar(model)
    worst = 0.0
    for i in range(3):
        r = model.d(model.alpha(i + 1))
        for j in range(3):
            r = r + (K[i][j] ^ model.alpha(j + 1))
            r = r - n[i, j] * pb[j]
        worst = max(worst, r.norm())
    return worst


class _ELPieces:
    """The 6-forms whose linear combinations make up every EL residual."""

    def __init__(self, model: CoframeModel, kappa: Optional[Sequence[Sequence[Form]]]):
        K = _kappa_tables(model, kappa)
        self.model = model
        duals = [dual_five_form(model, k + 1) for k in range(3)]
        self.d_dual = [model.d(f) for f in duals]
        # kappa^l_i ^ alpha_[k] and conj(kappa^j_l) ^ alpha_[k]
        self.k_dual = [[[K[l][i] ^ duals[k] for k in range(3)] for i in range(3)] for l in range(3)]
        self.kb_dual = [[[model.conj(K[j][l]) ^ duals[k] for k in range(3)] for l in range(3)] for j in range(3)]
        vol = volume_form(model)
        (self.vol_key, self.vol_coeff), = vol.terms.items()

    def upsilon(self, G: np.ndarray, i: int, j: int) -> Form:
        out = Form()
        for k in range(3):
            if G[i, j, k]:
                out = out + G[i, j, k] * self.d_dual[k]
            for l in range(3):
                # covariant signs: lower index i against kappa, upper barred j against conj(kappa)
                if G[l, j, k]:
                    out = out - G[l, j, k] * self.k_dual[l][i][k]
                if G[i, l, k]:
                    out = out + G[i, l, k] * self.kb_dual[j][l][k]
        return out


def el_residual(model: CoframeModel, c: FunctionalCoeffs, tol_rel: float = TOL_REL,
                kappa: Optional[Sequence[Sequence[Form]]] = None,
                _pieces: Optional[_ELPieces] = None) -> ELReport:
    """Euler-Lagrange 6-forms for a constant-coefficient model.

    Upsilon^j_i = d(L^{jk}_i alpha_[k]) - L^{jk}_l kappa^l_i ^ alpha_[k]
    + L^{lk}_i conj(kappa^j_l) ^ alpha_[k], the covariant exterior derivative
    of L^{jk}_i alpha_[k].  ``residuals`` holds the Omega-coefficients and
    ``off_volume`` the largest coefficient on any other 6-form monomial.
    """
    pre = structure_residual(model, kappa)
    if pre > tol_rel:
        raise StructureEquationMismatch(f"structure equation residual {pre:.3g}")
    pieces = _pieces or _ELPieces(model, kappa)
    G = gradient_L(c, nijenhuis_from_model(model))
    res = np.zeros((3, 3), dtype=complex)
    off = 0.0
    for i in range(3):
        for j in range(3):
            u = pieces.upsilon(G, i, j)
            v = u.terms.get(pieces.vol_key, 0j)
            res[i, j] = v / pieces.vol_coeff
            off = max(off, (u - Form({pieces.vol_key: v})).norm())
    scale = max(1.0, float(np.max(np.abs(G))))
    max_abs = float(max(np.max(np.abs(res)), off))
    return ELReport(res, max_abs, max_abs < tol_rel * scale, off, pre, scale)


def el_grid(model: CoframeModel, grid: Sequence[FunctionalCoeffs], tol_rel: float = TOL_REL) -> list[ELReport]:
    pieces = _ELPieces(model, None)
    return [el_residual(model, c, tol_rel, _pieces=pieces) for c in grid]


def coefficient_grid(n: int = 5, lo: float = -2.0, hi: float = 2.0) -> list[FunctionalCoeffs]:
    vals = np.linspace(lo, hi, n)
    return [FunctionalCoeffs(float(a), float(b)) for a in vals for b in vals]


def perturbed_kappa(model: CoframeModel, s: np.ndarray) -> list[list[Form]]:
    """kappa^i_j + s[i, j, k] alpha_k with s symmetric in (j, k)."""
    s = np.asarray(s, dtype=complex)
    if s.shape != (3, 3, 3) or np.max(np.abs(s - s.transpose(0, 2, 1))) > 0:
        raise ValueError("perturbation must be a 3x3x3 array symmetric in its last two indices")
    K = model.require_kappa()
    return [[K[i][j] + sum((s[i, j, k] * model.alpha(k + 1) for k in range(3)), Form()) for j in range(3)]
            for i in range(3)]


def kappa_ambiguity_check(model: CoframeModel, c: FunctionalCoeffs, s: np.ndarray,
                          tol_rel: float = TOL_REL) -> float:
    """Largest change in the EL residuals when kappa is shifted by s alpha."""
    base = el_residual(model, c, tol_rel)
    moved = el_residual(model, c, tol_rel, kappa=perturbed_kappa(model, s))
    return float(max(np.max(np.abs(base.residuals - moved.residuals)),
                     abs(base.off_volume - moved.off_volume)))


def random_symmetric_s(rng: np.random.Generator) -> np.ndarray:
    s = rng.normal(size=(3, 3, 3)) + 1j * rng.normal(size=(3, 3, 3))
    return (s + s.transpose(0, 2, 1)) / 2
