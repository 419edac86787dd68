"""Command-line front end.

Exit codes: 0 success, 1 input or parse error, 2 violated precondition,
3 a verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .bounded_transform import bounded_transform, inverse_transform, transform_report, unbounded_path_spectral_theorem
from .clifford_core import SliceUnit
from .clifford_module import (
    CliffordOperator,
    adjoint,
    compose,
    diff_norm,
    is_anti_self_adjoint,
    is_imaginary,
    is_normal,
    is_positive,
    is_self_adjoint,
    is_unitary,
    operator_norm,
)
from .config import Tolerances, scale_of
from .decompositions import (
    NotPositiveError,
    additive_decomposition,
    check_decomposition,
    polar,
    positive_sqrt,
    positive_sqrt_chebyshev,
    split_imaginary,
)
from .functional_calculus import (
    borel_calculus,
    calculus_laws,
    classify_subclass,
    normal_theorem_report,
    parse_function,
    spectral_mapping,
    spectral_theorem_normal,
)
from .generators import KINDS, generate
from .io import FormatError, measure_to_json, operator_to_json, read_operator, write_json
from .s_spectrum import (
    neumann_partial_sum,
    resolvent_grid,
    s_resolvent_left,
    s_spectrum,
    spectral_radius,
    spectrum_location_checks,
)

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_VERIFY = 0, 1, 2, 3
SEED_ENV = "CLIFFSPEC_SEED"


class ParseError(Exception):
    pass


class PreconditionError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    tolerances: Tolerances
    seed: int
    slice: SliceUnit | None
    output_format: str

    def to_json(self) -> dict:
        return {
            "tolerances": self.tolerances.as_dict(),
            "seed": self.seed,
            "slice": None if self.slice is None else list(self.slice.components),
            "format": self.output_format,
        }


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


_TOL_FLAGS = {
    "eq": "eq_tol",
    "psd": "psd_tol",
    "merge": "spec_merge_tol",
    "decomp": "decomp_tol",
    "sqrt": "sqrt_tol",
    "comm": "comm_tol",
}


def _common(p: argparse.ArgumentParser, needs_input: bool = True) -> None:
    if needs_input:
        p.add_argument("--input", "--operator", dest="input", required=True, help="operator JSON file")
    p.add_argument("--output", default="-", help="output file, '-' for stdout")
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (falls back to ${SEED_ENV}, then 0)")
    p.add_argument("--slice", default=None, help="slice unit as comma separated 1-vector components")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    for flag, field in _TOL_FLAGS.items():
        p.add_argument(f"--tol-{flag}", dest=f"tol_{flag}", type=float, default=None, help=f"override {field}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cliffspec", description="Spectral computations for right-linear Clifford operators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a random operator of a given class")
    g.add_argument("kind", choices=KINDS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    _common(g, needs_input=False)

    for name, text in (("spectrum", "S-spectrum and spectrum-location checks"),
                       ("decompose", "additive decomposition T = A + J B"),
                       ("polar", "polar decomposition T = U Q"),
                       ("sqrt", "positive square root by two independent paths"),
                       ("transform", "bounded transform Z_T and its inverse"),
                       ("verify", "run every applicable check")):
        _common(sub.add_parser(name, help=text))

    r = sub.add_parser("resolvent-grid", help="sigma_min(Q_s) over a (u, v) grid, as CSV")
    _common(r)
    r.add_argument("--grid", default=None, help='"umin,umax,vmin,vmax,steps"')

    f = sub.add_parser("funcalc", help="Borel functional calculus of a normal operator")
    _common(f)
    f.add_argument("--function", required=True, help='registry name or "poly:c0,c1,..."')
    return parser


def _seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise ParseError(f"{SEED_ENV}={env!r} is not an integer") from exc


def _config(args: argparse.Namespace, n: int | None) -> RunConfig:
    overrides = {field: getattr(args, f"tol_{flag}") for flag, field in _TOL_FLAGS.items()
                 if getattr(args, f"tol_{flag}") is not None}
    try:
        tol = Tolerances().with_(**overrides)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    unit = None
    if args.slice is not None:
        try:
            unit = SliceUnit.normalized([float(c) for c in args.slice.split(",")])
        except ValueError as exc:
            raise ParseError(f"bad --slice: {exc}") from exc
        if n is not None and unit.n != n:
            raise ParseError(f"--slice has {unit.n} components, operator needs {n}")
    default_format = "csv" if args.command == "resolvent-grid" else "json"
    return RunConfig(tol, _seed(args.seed), unit, args.format or default_format)


def _slice(cfg: RunConfig, n: int) -> SliceUnit | None:
    if cfg.slice is not None:
        return cfg.slice
    return SliceUnit.axis(n, 0) if n >= 1 else None


def _check(ok: bool, **values: Any) -> dict:
    return {"status": "pass" if ok else "fail", **values}


def _skipped(reason: str) -> dict:
    return {"status": "skipped", "reason": reason}


def _failed(report: dict) -> bool:
    return any(isinstance(v, dict) and v.get("status") == "fail" for v in report.values())


def _load(args: argparse.Namespace) -> CliffordOperator:
    try:
        return read_operator(args.input)
    except OSError as exc:
        raise ParseError(f"cannot read {args.input}: {exc.strerror or exc}") from exc
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed operator file: {exc}") from exc


_GEN_PREDICATES: dict[str, Callable[[CliffordOperator, Tolerances], bool]] = {
    "self-adjoint": lambda t, tol: is_self_adjoint(t, tol.eq_tol),
    "positive": lambda t, tol: is_positive(t, tol.psd_tol),
    "anti-self-adjoint": lambda t, tol: is_anti_self_adjoint(t, tol.eq_tol),
    "unitary": lambda t, tol: is_unitary(t, tol.eq_tol),
    "imaginary": lambda t, tol: is_imaginary(t, tol.eq_tol),
    "normal": lambda t, tol: is_normal(t, tol.eq_tol),
    "generic": lambda t, tol: True,
}


def cmd_gen(args: argparse.Namespace, cfg: RunConfig) -> tuple[dict, bool]:
    rng = np.random.default_rng(cfg.seed)
    try:
        t = generate(args.kind, args.n, args.m, rng, cfg.tolerances)
    except ValueError as exc:
        raise PreconditionError(str(exc)) from exc
    return operator_to_json(t), _GEN_PREDICATES[args.kind](t, cfg.tolerances)


def cmd_spectrum(t: CliffordOperator, cfg: RunConfig, rng: np.random.Generator) -> tuple[dict, bool]:
    spec = s_spectrum(t, cfg.tolerances)
    loc = spectrum_location_checks(t, cfg.tolerances)
    out = {
        "points": [{"u": p.u, "v": p.v} for p in spec.points],
        "multiplicities": list(spec.multiplicities),
        "spectral_radius": spectral_radius(t, cfg.tolerances),
        "norm": operator_norm(t),
        "location_checks": loc["checks"],
    }
    return out, loc["ok"]


def cmd_resolvent_grid(t: CliffordOperator, cfg: RunConfig, grid: str | None) -> tuple[Any, bool]:
    if grid is None:
        r = 1.1 * scale_of(operator_norm(t))
        bounds, steps = (-r, r, 0.0, r), 50
    else:
        parts = grid.split(",")
        if len(parts) != 5:
            raise ParseError('--grid needs "umin,umax,vmin,vmax,steps"')
        try:
            bounds, steps = tuple(float(p) for p in parts[:4]), int(parts[4])
        except ValueError as exc:
            raise ParseError(f"bad --grid: {exc}") from exc
        if steps < 1:
            raise ParseError("--grid steps must be positive")
    rows = resolvent_grid(t, bounds[:2], bounds[2:], steps)
    return rows, True


def _rows_to_csv(rows: np.ndarray) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u", "v", "sigma_min", "resolvent_norm"])
    for row in rows:
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def cmd_decompose(t: CliffordOperator, cfg: RunConfig, rng: np.random.Generator) -> tuple[dict, bool]:
    dec = additive_decomposition(t, rng=rng, tol=cfg.tolerances)
    checks = check_decomposition(dec, t, cfg.tolerances)
    ok = all(v is not False for v in checks.values() if isinstance(v, bool) or v is None)
    return {
        "A": operator_to_json(dec.A),
        "B": operator_to_json(dec.B),
        "J": operator_to_json(dec.J),
        "complete": dec.complete,
        "residual": dec.residual,
        "commutator_norms": dec.commutator_norms,
        "completion": dec.completion,
        "checks": checks,
        "seed": cfg.seed,
    }, ok


def cmd_polar(t: CliffordOperator, cfg: RunConfig, rng: np.random.Generator) -> tuple[dict, bool]:
    tol = cfg.tolerances
    pol = polar(t, tol=tol)
    scale = scale_of(operator_norm(t))
    checks = {"residual_ok": pol.residual <= tol.decomp_tol * scale, "Q_positive": is_positive(pol.Q, tol.psd_tol)}
    if is_normal(t, tol.eq_tol):
        comm = diff_norm(compose(pol.U, pol.Q), compose(pol.Q, pol.U))
        checks.update({"U_unitary": is_unitary(pol.U, tol.eq_tol), "UQ_commute": comm <= tol.decomp_tol * scale})
    return {"U": operator_to_json(pol.U), "Q": operator_to_json(pol.Q), "residual": pol.residual,
            "unitary_extension": pol.unitary_extension, "checks": checks}, all(checks.values())


def cmd_sqrt(t: CliffordOperator, cfg: RunConfig, rng: np.random.Generator) -> tuple[dict, bool]:
    tol = cfg.tolerances
    try:
        root = positive_sqrt(t, tol)
    except NotPositiveError as exc:
        raise PreconditionError(str(exc)) from exc
    cheb, degree, err = positive_sqrt_chebyshev(t, tol=tol)
    scale = scale_of(operator_norm(t))
    square = diff_norm(compose(root, root), t)
    gap = diff_norm(root, cheb)
    checks = {"square_ok": square <= tol.sqrt_tol * scale, "paths_agree": gap <= 1e-6,
              "root_positive": is_positive(root, tol.psd_tol)}
    return {"sqrt": operator_to_json(root), "square_residual": square, "path_gap": gap,
            "chebyshev_degree": degree, "chebyshev_error": err, "checks": checks}, all(checks.values())


def cmd_funcalc(t: CliffordOperator, cfg: RunConfig, rng: np.random.Generator, function: str) -> tuple[dict, bool]:
    tol = cfg.tolerances
    try:
        f = parse_function(function)
    except (KeyError, ValueError) as exc:
        raise ParseError(str(exc).strip("'\"")) from exc
    if not is_normal(t, tol.eq_tol):
        raise PreconditionError("funcalc needs a normal operator")
    e, j = spectral_theorem_normal(t, rng=rng, tol=tol)
    result = borel_calculus(e, j, f, tol, name=f.to_json())
    vals = [f(lab.complex) for lab in e.support()]
    if not all(np.isfinite(v) for v in vals):
        raise PreconditionError(f"function {f.to_json()} is not finite on the spectrum")
    laws = calculus_laws(e, j, f, lambda z: z, rng=rng)
    mapping = spectral_mapping(e, j, f, tol)
    report = {
        "spectral_theorem": _check(normal_theorem_report(t, e, j, tol, rng)["reconstruction_ok"]),
        "laws": _check(all(v <= max(1e-9, 1e-9 * max(abs(x) for x in vals)) for v in laws.values()), **laws),
        "spectral_mapping": _check(mapping.agree, direct=mapping.direct.to_json()["points"],
                                   mapped=mapping.mapped.to_json()["points"]),
    }
    unit = _slice(cfg, t.n)
    if unit is not None and t.n >= 1:
        sp = split_imaginary(j, unit)
        report["slice_splitting"] = _check(bool(sp.report.get("direct_sum", True)), dims=list(sp.dims))
    return {"function": f.to_json(), "operator": operator_to_json(result.operator),
            "measure": measure_to_json(e), "report": report}, not _failed(report)


def cmd_transform(t: CliffordOperator, cfg: RunConfig, rng: np.random.Generator) -> tuple[dict, bool]:
    tol = cfg.tolerances
    pair = bounded_transform(t, tol)
    rep = transform_report(pair, tol)
    ok = rep["norm_Z"] <= 1 + 1e-12 and rep["identity_residual"] <= 1e-9 and rep["adjoint_residual"] <= 1e-9
    roundtrip = None
    if is_normal(t, tol.eq_tol):
        try:
            roundtrip = diff_norm(inverse_transform(pair.Z, rng=rng, tol=tol), t)
        except ValueError as exc:
            raise PreconditionError(str(exc)) from exc
        ok = ok and roundtrip <= 1e-7 * scale_of(operator_norm(t))
    return {"Z": operator_to_json(pair.Z), "C": operator_to_json(pair.C),
            "norms": {"T": operator_norm(t), "Z": rep["norm_Z"], "C": operator_norm(pair.C)},
            "roundtrip_residual": roundtrip, "report": rep}, ok


def verify_battery(t: CliffordOperator, cfg: RunConfig, rng: np.random.Generator) -> dict:
    """Every check that applies to T; normal-only checks are skipped for other inputs."""
    tol = cfg.tolerances
    norm = operator_norm(t)
    scale = scale_of(norm)
    normal = is_normal(t, tol.eq_tol)
    out: dict[str, Any] = {}
    cstar = abs(operator_norm(compose(adjoint(t), t)) - norm ** 2)
    out["c_star_identity"] = _check(cstar <= 1e-9 * scale ** 2, residual=cstar)
    loc = spectrum_location_checks(t, tol)
    out["spectrum_location"] = _check(loc["ok"], spectrum=loc["spectrum"]["points"])
    r = spectral_radius(t, tol)
    if normal:
        out["spectral_radius_equals_norm"] = _check(abs(norm - r) <= 1e-8 * scale, radius=r, norm=norm)
    else:
        out["spectral_radius_at_most_norm"] = _check(r <= norm * (1 + 1e-12) + 1e-15, radius=r, norm=norm)
    if norm > 0:
        s = complex(2 * norm, 0.0)
        series = neumann_partial_sum(t, s, 60)
        exact = s_resolvent_left(t, s, tol)
        gap = diff_norm(series, exact) / scale_of(operator_norm(exact))
        out["neumann_resolvent"] = _check(gap <= 1e-6, relative_error=gap)
    else:
        out["neumann_resolvent"] = _skipped("zero operator")
    pol = polar(t, tol=tol)
    ok = pol.residual <= tol.decomp_tol * scale and is_positive(pol.Q, tol.psd_tol)
    if normal:
        ok = ok and is_unitary(pol.U, tol.eq_tol)
    out["polar_decomposition"] = _check(ok, residual=pol.residual)
    tt = compose(adjoint(t), t)
    root = positive_sqrt(tt, tol)
    cheb, degree, _ = positive_sqrt_chebyshev(tt, tol=tol)
    gap = diff_norm(root, cheb)
    sq = diff_norm(compose(root, root), tt)
    out["positive_square_root"] = _check(gap <= 1e-6 and sq <= 1e-8 * scale_of(norm ** 2),
                                         path_gap=gap, square_residual=sq, degree=degree)
    pair = bounded_transform(t, tol)
    trep = transform_report(pair, tol)
    out["bounded_transform"] = _check(trep["norm_Z"] <= 1 + 1e-12 and trep["identity_residual"] <= 1e-9
                                      and trep["adjoint_residual"] <= 1e-9,
                                      norm_Z=trep["norm_Z"], identity_residual=trep["identity_residual"])
    normal_only = ("additive_decomposition", "spectral_theorem", "borel_calculus", "subclasses",
                   "transform_roundtrip", "unbounded_path")
    if not normal:
        for key in normal_only:
            out[key] = _skipped("operator is not normal")
        return out
    dec = additive_decomposition(t, rng=rng, tol=tol)
    dchk = check_decomposition(dec, t, tol)
    out["additive_decomposition"] = _check(all(v is not False for v in dchk.values() if not isinstance(v, float)),
                                           residual=dec.residual, commutators=dec.commutator_norms)
    e, j = spectral_theorem_normal(t, rng=rng, tol=tol)
    srep = normal_theorem_report(t, e, j, tol, rng)
    out["spectral_theorem"] = _check(srep["reconstruction_ok"] and srep["support_matches_spectrum"]
                                     and srep["measure_valid"] and srep["J_imaginary"],
                                     reconstruction=srep["reconstruction"])
    coeffs = rng.standard_normal(3)
    laws = calculus_laws(e, j, lambda z: coeffs[0] + coeffs[1] * z + coeffs[2] * z * z, np.exp, rng=rng)
    out["borel_calculus"] = _check(max(laws.values()) <= 1e-9 * 10, **laws)
    sub = classify_subclass(t, tol)
    out["subclasses"] = _check(all(sub[c]["agree"] for c in sub if isinstance(sub[c], dict) and "agree" in sub[c]),
                               labels=sub["labels"])
    try:
        rt = diff_norm(inverse_transform(pair.Z, rng=rng, tol=tol), t)
        out["transform_roundtrip"] = _check(rt <= 1e-7 * scale, residual=rt)
    except ValueError as exc:
        out["transform_roundtrip"] = _check(False, error=str(exc))
    urep: dict = {}
    unbounded_path_spectral_theorem(t, rng=rng, tol=tol, report=urep)
    out["unbounded_path"] = _check(urep["points_match"] and urep["projection_gap"] <= 1e-7,
                                   point_gap=urep["point_gap"], projection_gap=urep["projection_gap"],
                                   reconstruction=urep["reconstruction"])
    return out


def cmd_verify(t: CliffordOperator, cfg: RunConfig, rng: np.random.Generator) -> tuple[dict, bool]:
    report = verify_battery(t, cfg, rng)
    return {"checks": report, "normal": is_normal(t, cfg.tolerances.eq_tol)}, not _failed(report)


_OPERATOR_COMMANDS: dict[str, Callable[..., tuple[Any, bool]]] = {
    "spectrum": cmd_spectrum,
    "decompose": cmd_decompose,
    "polar": cmd_polar,
    "sqrt": cmd_sqrt,
    "transform": cmd_transform,
    "verify": cmd_verify,
}


def run(argv: Sequence[str] | None = None) -> tuple[int, str, bool]:
    """Parse ``argv`` and execute; returns (exit code, text, whether the text went to a file)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    to_file = args.output != "-"
    try:
        if args.command == "gen":
            cfg = _config(args, args.n)
            payload, ok = cmd_gen(args, cfg)
            return (EXIT_OK if ok else EXIT_VERIFY), write_json(payload, args.output), to_file
        t = _load(args)
        cfg = _config(args, t.n)
        rng = np.random.default_rng(cfg.seed)
        if args.command == "resolvent-grid":
            rows, ok = cmd_resolvent_grid(t, cfg, args.grid)
            if cfg.output_format == "csv":
                text = _rows_to_csv(rows)
                if to_file:
                    with open(args.output, "w") as fh:
                        fh.write(text)
            else:
                text = write_json({"columns": ["u", "v", "sigma_min", "resolvent_norm"],
                                   "rows": [[float(x) if np.isfinite(x) else None for x in r] for r in rows]},
                                  args.output)
            return EXIT_OK, text, to_file
        if args.command == "funcalc":
            payload, ok = cmd_funcalc(t, cfg, rng, args.function)
        else:
            payload, ok = _OPERATOR_COMMANDS[args.command](t, cfg, rng)
        payload = {**payload, "config": cfg.to_json()}
        return (EXIT_OK if ok else EXIT_VERIFY), write_json(payload, args.output), to_file
    except (ParseError, FormatError) as exc:
        return EXIT_PARSE, f"error: {exc}\n", False
    except (PreconditionError, ValueError) as exc:
        return EXIT_PRECONDITION, f"error: {exc}\n", False


def main(argv: Sequence[str] | None = None) -> int:
    code, text, to_file = run(argv)
    if code in (EXIT_PARSE, EXIT_PRECONDITION):
        sys.stderr.write(text)
    elif not to_file:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); silence the flush at exit
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return code


if __name__ == "__main__":
    sys.exit(main())
