"""Command-line front end; every command prints one JSON report.

Exit codes: 0 pass, 1 fail, 2 input error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import coframe, exterior, nmatrix, stable3form, variational
from .tolerances import TOL_CLASS, TOL_REL, Tolerances

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class InputError(ValueError):
    """Malformed command-line input or input file."""


# -- serialisation -------------------------------------------------------------------

def _plain(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, exterior.Form):
        return x.to_json()
    return x


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""

    def enc(x: Any) -> str:
        if isinstance(x, dict):
            return "{" + ", ".join(json.dumps(k) + ": " + enc(x[k]) for k in sorted(x)) + "}"
        if isinstance(x, list):
            return "[" + ", ".join(enc(v) for v in x) + "]"
        if isinstance(x, float):
            if math.isfinite(x):
                return format(x, ".17g")
            return json.dumps("NaN" if math.isnan(x) else ("Infinity" if x > 0 else "-Infinity"))
        return json.dumps(x)

    return enc(_plain(obj))


def digest(payload: Any) -> str:
    return hashlib.sha256(dumps(payload).encode()).hexdigest()


def _file_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _read_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def load_form(path: str) -> exterior.Form:
    data = _read_json(path)
    try:
        return exterior.Form.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path} is not a form: {exc}") from exc


def load_matrix(path: str) -> np.ndarray:
    data = _read_json(path)
    try:
        return nmatrix.matrix_from_json(data["matrix"] if isinstance(data, dict) else data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path} is not a 3x3 complex matrix: {exc}") from exc


def load_model(source: str) -> coframe.CoframeModel:
    if os.path.exists(source):
        try:
            return coframe.load_model(source)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{source} is not a coframe model: {exc}") from exc
    try:
        return coframe.catalog(source)
    except (KeyError, ValueError) as exc:
        raise InputError(f"unknown model {source!r}") from exc


def make_report(command: str, inputs: Any, results: Any, residuals: dict, tol: Tolerances,
                seed: Optional[int] = None, limits: Optional[dict] = None) -> dict:
    """pass holds iff every residual is below its limit (tol_rel unless overridden)."""
    limits = limits or {}
    ok = all(math.isfinite(v) and v < limits.get(k, tol.rel) for k, v in residuals.items())
    return {
        "command": command,
        "inputsDigest": digest(inputs),
        "results": results,
        "residuals": residuals,
        "pass": ok,
        "tolerances": {"rel": tol.rel, "class": tol.cls},
        "seed": seed,
    }


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent substream for sample ``index``."""
    return np.random.default_rng([seed, index])


# -- commands -------------------------------------------------------------------------

def cmd_classify_nijenhuis(args, tol: Tolerances) -> dict:
    a = load_matrix(args.path)
    oc = nmatrix.classify_orbit(a, tol.cls)
    inv = nmatrix.invariant_forms(a)
    residuals = {}
    if oc.certificate is not None:
        target = nmatrix.I3 if oc.kind == nmatrix.ELLIPTIC_STRICT else nmatrix.D3
        got = nmatrix.rho_act(oc.certificate, a, tol.cls)
        residuals["certificate"] = float(np.max(np.abs(got - target)))
    results = {
        "kind": oc.kind,
        "mu": oc.mu,
        "certificate": None if oc.certificate is None else nmatrix.matrix_to_json(oc.certificate),
        "hermitian": None if oc.hermitian is None else nmatrix.matrix_to_json(oc.hermitian),
        "signature": oc.signature,
        "margins": oc.margins,
        "invariants": {
            "phi": inv.phi_coeff,
            "omega": nmatrix.matrix_to_json(inv.omega_matrix),
            "psi": inv.psi_coeff,
        },
    }
    return make_report("classify-nijenhuis", {"file": _file_digest(args.path)}, results, residuals, tol)


def cmd_classify_3form(args, tol: Tolerances) -> dict:
    phi = load_form(args.path)
    c = stable3form.classify(phi, tol.cls)
    results = {"kind": c.kind, "lambda": c.lambda_value, "margin": c.margin, "basis": c.basis}
    return make_report("classify3form", {"file": _file_digest(args.path)}, results,
                       {"certificate": c.residual}, tol)


def cmd_identities(args, tol: Tolerances) -> dict:
    if args.samples < 1:
        raise InputError("--samples must be at least 1")
    worst = {"psi_det_q": 0.0, "trace": 0.0, "det_q_slack_violation": 0.0, "r_trace": 0.0,
             "rho_equivariance": 0.0}
    min_slack = math.inf
    c1, c2 = variational.FunctionalCoeffs(1.0, 0.0), variational.FunctionalCoeffs(0.0, 1.0)
    for i in range(args.samples):
        rng = sample_rng(args.seed, i)
        a = nmatrix.I3 if (args.samples == 1 and args.identity) else nmatrix.random_cmat(rng)
        r = nmatrix.identity_residuals(a)
        worst["psi_det_q"] = max(worst["psi_det_q"], r.psi_det_q)
        worst["trace"] = max(worst["trace"], r.trace)
        worst["r_trace"] = max(worst["r_trace"], r.r_trace)
        min_slack = min(min_slack, r.det_q_slack)
        g = nmatrix.random_gl3(rng)
        scale = abs(np.linalg.det(g)) ** 2
        b = nmatrix.rho_act(g, a, tol.cls)
        for c in (c1, c2):
            base = variational.lagrangian_density(c, a)
            moved = variational.lagrangian_density(c, b) * scale
            worst["rho_equivariance"] = max(worst["rho_equivariance"],
                                            abs(moved - base) / max(base, np.linalg.norm(a) ** 6, 1e-300))
    worst["det_q_slack_violation"] = max(0.0, -min_slack)
    results = {"samples": args.samples, "minSlack": min_slack}
    return make_report("identities", {"samples": args.samples, "seed": args.seed,
                                      "identity": bool(args.identity)},
                       results, worst, tol, seed=args.seed)


def examine_model(model: coframe.CoframeModel, grid: int, tol: Tolerances) -> tuple[dict, dict]:
    rep = coframe.examine(model)
    residuals = {k: v for k, v in rep.residuals.items() if not math.isnan(v)}
    results: dict = {
        "nijenhuis": nmatrix.matrix_to_json(rep.nijenhuis),
        "constant": rep.identities.constant,
        "torsionLambda": rep.torsion_lambda,
    }
    if grid > 0 and model.kappa is not None:
        reports = variational.el_grid(model, variational.coefficient_grid(grid), tol.rel)
        residuals["el_grid"] = max(r.max_abs / r.scale for r in reports)
        results["elGrid"] = grid
    return results, residuals


def cmd_examples(args, tol: Tolerances) -> dict:
    if args.all == bool(args.name):
        raise InputError("give exactly one of NAME or --all")
    names = ["g2-s6", "su3-flag", "su12-flag", "nk(1/2)", "nk(2)", "flat-c3"] if args.all else [args.name]
    results, residuals = {}, {}
    for name in names:
        model = load_model(name)
        t0 = time.perf_counter()
        res, rsd = examine_model(model, args.grid, tol)
        res["seconds"] = time.perf_counter() - t0
        results[model.name] = res
        residuals.update({f"{model.name}.{k}": v for k, v in rsd.items()})
    return make_report("examples", {"names": names, "grid": args.grid}, results, residuals, tol)


def cmd_symbol_check(args, tol: Tolerances) -> dict:
    if args.xi is not None:
        try:
            xis = [np.array([float(t) for t in args.xi.split(",")])]
        except ValueError as exc:
            raise InputError(f"bad covector {args.xi!r}") from exc
    else:
        if args.trials < 1:
            raise InputError("--trials must be at least 1")
        xis = [sample_rng(args.seed, i).normal(size=6) for i in range(args.trials)]
    failures = 0
    ranks, dims = set(), None
    for xi in xis:
        try:
            r = exterior.symbol_sequence_ranks(xi, tol_class=tol.cls)
        except (exterior.ZeroCovector, ValueError) as exc:
            raise InputError(str(exc)) from exc
        dims = r.dims
        ranks.add(r.ranks)
        failures += not r.ok
    results = {"trials": len(xis), "dims": dims, "ranks": sorted(ranks), "failures": failures}
    return make_report("symbol-check", {"trials": args.trials, "seed": args.seed, "xi": args.xi},
                       results, {"failures": float(failures)}, tol, seed=args.seed,
                       limits={"failures": 0.5})


def cmd_el_check(args, tol: Tolerances) -> dict:
    model = load_model(args.model)
    if args.grid:
        grid = variational.coefficient_grid(args.grid)
    else:
        try:
            grid = [variational.FunctionalCoeffs(args.c1, args.c2)]
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    reports = variational.el_grid(model, grid, tol.rel)
    results = {"model": model.name,
               "points": [{"c1": c.c1, "c2": c.c2, **r.as_dict()} for c, r in zip(grid, reports)]}
    residuals = {"el_max": max(r.max_abs / r.scale for r in reports),
                 "structure": max(r.precondition for r in reports)}
    return make_report("el-check", {"model": model.to_json(), "grid": args.grid,
                                    "c1": args.c1, "c2": args.c2}, results, residuals, tol)


def cmd_symplectic_pair(args, tol: Tolerances) -> dict:
    omega, phi = load_form(args.omega), load_form(args.phi)
    r = stable3form.symplectic_pair_normal_form(omega, phi, tol.cls, tol.rel)
    results = {"case": r.case, "mu": r.mu, "basis": r.basis, "stabilizer": r.stabilizer}
    return make_report("symplectic-pair", {"omega": _file_digest(args.omega), "phi": _file_digest(args.phi)},
                       results, {"certificate": r.residual}, tol)


def cmd_acs(args, tol: Tolerances) -> dict:
    phi = load_form(args.path)
    r = stable3form.acs_from_stable(phi, args.orientation, tol.cls)
    residuals = stable3form.acs_residuals(phi, r)
    frame = [z.to_json() for z in r.frame.zeta]
    results = {"J": r.J, "starPhi": r.star_phi, "frame": frame}
    return make_report("acs", {"file": _file_digest(args.path), "orientation": args.orientation},
                       results, residuals, tol)


# -- entry point -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-rel", type=float, default=TOL_REL)
    common.add_argument("--tol-class", type=float, default=TOL_CLASS)
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--json", metavar="OUT", help="also write the report to OUT")

    p = argparse.ArgumentParser(prog="acsix", description="Checks for almost complex structures in dimension six.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify-nijenhuis", parents=[common], help="orbit of a Nijenhuis matrix")
    s.add_argument("path")
    s.set_defaults(func=cmd_classify_nijenhuis)

    s = sub.add_parser("classify3form", parents=[common], help="orbit type of a real 3-form")
    s.add_argument("path")
    s.set_defaults(func=cmd_classify_3form)

    s = sub.add_parser("identities", parents=[common], help="fuzz the pointwise matrix identities")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--identity", action="store_true", help="with --samples 1, test at the identity matrix")
    s.set_defaults(func=cmd_identities)

    s = sub.add_parser("examples", parents=[common], help="verify catalog models")
    s.add_argument("name", nargs="?")
    s.add_argument("--all", action="store_true")
    s.add_argument("--grid", type=int, default=5, help="EL coefficient grid size (0 disables)")
    s.set_defaults(func=cmd_examples)

    s = sub.add_parser("symbol-check", parents=[common], help="exactness of the symbol sequence")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--xi", help="comma-separated covector instead of random trials")
    s.set_defaults(func=cmd_symbol_check)

    s = sub.add_parser("el-check", parents=[common], help="Euler-Lagrange residuals of a model")
    s.add_argument("model", help="catalog name or model JSON path")
    s.add_argument("--c1", type=float, default=1.0)
    s.add_argument("--c2", type=float, default=0.0)
    s.add_argument("--grid", type=int, default=0, help="use an n x n grid on [-2, 2]^2")
    s.set_defaults(func=cmd_el_check)

    s = sub.add_parser("symplectic-pair", parents=[common], help="normal form of (omega, phi)")
    s.add_argument("omega")
    s.add_argument("phi")
    s.set_defaults(func=cmd_symplectic_pair)

    s = sub.add_parser("acs", parents=[common], help="complex structure of a stable 3-form")
    s.add_argument("path")
    s.add_argument("--orientation", type=int, choices=(1, -1), default=1)
    s.set_defaults(func=cmd_acs)
    return p


_INPUT_ERRORS = (
    InputError,
    exterior.WrongType,
    exterior.ZeroCovector,
    coframe.UnknownSymbol,
    coframe.ShapeMismatch,
    coframe.MissingConnection,
    stable3form.NotType2,
    stable3form.NotPositive,
    stable3form.DegenerateOmega,
    stable3form.IncompatiblePair,
    variational.StructureEquationMismatch,
)


def run(argv: Optional[Sequence[str]] = None, out: Callable[[str], None] = print) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = Tolerances(args.tol_rel, args.tol_class)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        report = args.func(args, tol)
    except (np.linalg.LinAlgError, FloatingPointError, exterior.DegenerateFrame) as exc:
        sys.stderr.write(f"numeric error: {exc}\n")
        return EXIT_NUMERIC
    except _INPUT_ERRORS as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    text = dumps(report)
    out(text)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(argv))
