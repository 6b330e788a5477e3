"""Command-line front end: ``tubeops {classify, verify-identity, certificate, sweep, apply, selftest}``.

Exit codes for ``classify`` follow the verdict (0 bounded, 1 unbounded, 2
outside coverage, 3 inadmissible weights); the other commands exit 0 when
their check passes and 1 otherwise.  Malformed input exits 64.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Sequence

from .acceptance import run_all
from .classifier import (
    BoundednessVerdict,
    MixedExponents,
    classify,
    classify_berezin,
    classify_projection,
    classify_Tc,
    parse_exponent,
)
from .geometry import MembershipError, TubePoint, sample_points
from .integration import DivergentParameterError, QuadratureConfig, verify_identity_first, verify_identity_second
from .operators import InadmissibleWeightsError, OperatorParams, apply_S, apply_T
from .schur import (
    InfeasibleCertificateError,
    build_certificate,
    verify_infinity_condition,
    verify_schur_conditions,
)
from .witnesses import DEFAULT_SCALES, WitnessError, blowup_sweep, closed_form_T_image, make_direct_family

EXIT_USAGE = 64

PARAM_DEFAULTS: dict[str, Any] = {
    "n": 1,
    "p1": 2.0, "p2": 2.0, "q1": 2.0, "q2": 2.0,
    "a1": 0.0, "a2": 0.0, "b1": 0.0, "b2": 0.0, "c1": None, "c2": None,
    "alpha1": 0.0, "alpha2": 0.0, "beta1": 0.0, "beta2": 0.0,
    "gamma1": 0.0, "gamma2": 0.0,
    "operator": "T",
    "formal": False,
    "format": "json",
    "seed": 0,
    "rel_tol": 1e-4,
    "max_evals": 4_000_000,
    "output": None,
    # command-specific
    "identity": "first", "r": 2.0, "s": 2.0, "t": 0.0, "z": None, "u": None, "w": None, "xi": None, "eta": None,
    "points": 5, "tolerance": None, "verify": False, "samples": 10, "scales": DEFAULT_SCALES,
    "method": "closed_form", "quick": False,
}

TOLERANCES = {"verify-identity": 1e-2, "apply": 2e-2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 2 is a verdict code, so argparse errors use 64
        raise UsageError(message)


def _finite(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def _exponent(text: str) -> float:
    try:
        return parse_exponent(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _point(text: str) -> tuple[complex, ...]:
    """Comma-separated complex coordinates, e.g. ``1j`` or ``0.5+2j``."""
    try:
        return tuple(complex(part.strip()) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of complex numbers: {text!r}") from None


def _scales(text: str) -> tuple[float, ...]:
    values = tuple(_finite(part) for part in text.split(","))
    if len(values) < 2 or min(values) <= 0:
        raise argparse.ArgumentTypeError("need at least two positive scales")
    return values


def _global_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = parent.add_argument_group("run options")
    g.add_argument("--config", help="JSON file of option values; flags override it")
    g.add_argument("--format", choices=("json", "csv", "human"))
    g.add_argument("--seed", type=int)
    g.add_argument("--rel-tol", dest="rel_tol", type=_finite)
    g.add_argument("--max-evals", dest="max_evals", type=int)
    g.add_argument("--output", help="write to this path instead of stdout")
    return parent


def _param_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = parent.add_argument_group("operator parameters")
    g.add_argument("--n", type=int)
    for name in ("p1", "p2", "q1", "q2"):
        g.add_argument(f"--{name}", type=_exponent, help="exponent in [1, inf]; 'inf' accepted")
    for name in ("a1", "a2", "b1", "b2", "c1", "c2", "alpha1", "alpha2", "beta1", "beta2", "gamma1", "gamma2"):
        g.add_argument(f"--{name}", type=_finite)
    g.add_argument("--operator", choices=("T", "S", "projection", "berezin", "tc"))
    g.add_argument("--formal", action="store_true", help="allow alpha <= -1 (classification only)")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tubeops", argument_default=argparse.SUPPRESS, description="Classify and test two-slot kernel operators on the paraboloid tube.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common, params = _global_options(), _param_options()

    sub.add_parser("classify", argument_default=argparse.SUPPRESS, parents=[common, params], help="classify boundedness")

    ident = sub.add_parser("verify-identity", argument_default=argparse.SUPPRESS, parents=[common], help="check an integral identity by quadrature")
    ident.add_argument("--identity", choices=("first", "second"))
    ident.add_argument("--n", type=int)
    ident.add_argument("--r", type=_finite)
    ident.add_argument("--s", type=_finite)
    ident.add_argument("--t", type=_finite)
    ident.add_argument("--z", type=_point)
    ident.add_argument("--u", type=_point)
    ident.add_argument("--points", type=int, help="sample points for the second identity")
    ident.add_argument("--tolerance", type=_finite)

    cert = sub.add_parser("certificate", argument_default=argparse.SUPPRESS, parents=[common, params], help="build and check a Schur certificate")
    cert.add_argument("--verify", action="store_true", help="check the Schur conditions by quadrature")
    cert.add_argument("--samples", type=int)

    sweep = sub.add_parser("sweep", argument_default=argparse.SUPPRESS, parents=[common, params], help="witness-family norm-ratio sweep")
    sweep.add_argument("--scales", type=_scales)
    sweep.add_argument("--method", choices=("closed_form", "quadrature"))

    apply = sub.add_parser("apply", argument_default=argparse.SUPPRESS, parents=[common, params], help="apply T or S to a witness function")
    apply.add_argument("--xi", type=_point, help="first anchor of the witness family")
    apply.add_argument("--eta", type=_point, help="second anchor of the witness family")
    apply.add_argument("--z", type=_point)
    apply.add_argument("--w", type=_point)
    apply.add_argument("--tolerance", type=_finite)

    selftest = sub.add_parser("selftest", argument_default=argparse.SUPPRESS, parents=[common], help="run the acceptance suite")
    selftest.add_argument("--quick", action="store_true")
    return parser


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Merge defaults, the JSON config file and explicit flags, in that order of precedence."""
    values = dict(PARAM_DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = {k.replace("-", "_") for k in loaded} - set(PARAM_DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        values.update({k.replace("-", "_"): v for k, v in loaded.items()})
    values.update(vars(args))
    if values["tolerance"] is None:
        values["tolerance"] = TOLERANCES.get(args.command, 1e-2)
    try:
        for name in ("p1", "p2", "q1", "q2"):
            values[name] = parse_exponent(values[name])
        for name in ("a1", "a2", "b1", "b2", "alpha1", "alpha2", "beta1", "beta2", "gamma1", "gamma2", "c1", "c2"):
            if values[name] is not None:
                values[name] = _finite(str(values[name]))
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(str(exc)) from None
    try:
        for name in ("z", "u", "w", "xi", "eta"):
            if isinstance(values[name], str):
                values[name] = _point(values[name])
        if isinstance(values["scales"], str):
            values["scales"] = _scales(values["scales"])
        values["scales"] = tuple(float(v) for v in values["scales"])
    except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(str(exc)) from None
    if not isinstance(values["n"], int) or values["n"] < 1:
        raise UsageError("n must be a positive integer")
    if values["operator"] not in ("T", "S", "projection", "berezin", "tc"):
        raise UsageError(f"unknown operator {values['operator']!r}")
    if values["format"] not in ("json", "csv", "human"):
        raise UsageError(f"unknown format {values['format']!r}")
    return values


def _pair(values: dict, stem: str) -> tuple[float, float]:
    return (values[f"{stem}1"], values[f"{stem}2"])


def _quadrature(values: dict) -> QuadratureConfig:
    try:
        return QuadratureConfig(rel_tol=values["rel_tol"], max_evals=values["max_evals"], seed=values["seed"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _check_weights(values: dict) -> None:
    if not values["formal"] and min(_pair(values, "alpha")) <= -1.0:
        raise UsageError("alpha_i <= -1 is outside the weighted spaces; pass --formal to classify anyway")


def _operator_params(values: dict, need_c: bool = True) -> OperatorParams:
    _check_weights(values)
    c = _pair(values, "c")
    if need_c and None in c:
        raise UsageError("--c1 and --c2 are required")
    return OperatorParams(
        _pair(values, "a"), _pair(values, "b"), c, _pair(values, "alpha"), _pair(values, "beta"), bool(values["formal"])
    )


def _exponents(values: dict) -> tuple[MixedExponents, MixedExponents]:
    return MixedExponents(*_pair(values, "p")), MixedExponents(*_pair(values, "q"))


def _tube_point(coords: tuple[complex, ...] | None, n: int, default: TubePoint) -> TubePoint:
    if coords is None:
        return default
    if len(coords) != n:
        raise UsageError(f"point needs {n} coordinates, got {len(coords)}")
    try:
        return TubePoint.from_complex(*coords)
    except MembershipError as exc:
        raise UsageError(str(exc)) from None


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _render(values: dict, payload: dict, human: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    fmt = values["format"]
    if fmt == "json":
        return json.dumps(payload)
    if fmt == "csv":
        return _csv(header, rows)
    return human


# commands --------------------------------------------------------------------


def _verdict(values: dict) -> BoundednessVerdict:
    n, (p, q) = values["n"], _exponents(values)
    kind = values["operator"]
    alpha, beta, gamma = _pair(values, "alpha"), _pair(values, "beta"), _pair(values, "gamma")
    _check_weights(values)
    try:
        if kind in ("T", "S"):
            return classify(n, p, q, _operator_params(values), kind)
        if kind == "projection":
            return classify_projection(n, p, q, gamma, alpha, beta)
        if kind == "berezin":
            return classify_berezin(n, p, q, gamma, alpha, beta)
        c = _pair(values, "c")
        if None in c:
            raise UsageError("--c1 and --c2 are required for tc")
        return classify_Tc(n, p, q, c, gamma, beta)
    except InadmissibleWeightsError as exc:
        raise UsageError(str(exc)) from None


def cmd_classify(values: dict) -> tuple[int, str]:
    verdict = _verdict(values)
    d = verdict.to_dict()
    lam = d["lambda"] or [None, None]
    crit = d["critical_c"] or [None, None]
    row = [d["status"], d["theorem"], lam[0], lam[1], ";".join(d["failed"]), crit[0], crit[1]]
    header = ["status", "theorem", "lambda1", "lambda2", "failed", "critical_c1", "critical_c2"]
    return verdict.exit_code, _render(values, d, verdict.to_human(), header, [row])


def cmd_verify_identity(values: dict) -> tuple[int, str]:
    n, cfg = values["n"], _quadrature(values)
    if values["identity"] == "first":
        z = _tube_point(values["z"], n, TubePoint.vertical(n, 1.0))
        u = _tube_point(values["u"], n, TubePoint.vertical(n, 2.0))
        try:
            rep = verify_identity_first(n, values["r"], values["s"], values["t"], z, u, cfg)
        except DivergentParameterError as exc:
            payload = {"identity": "first", "divergent": True, "message": str(exc)}
            return 1, _render(values, payload, f"divergent: {exc}", ["divergent"], [[True]])
        ok = rep.rel_err <= values["tolerance"] and rep.result.converged
        payload = {
            "identity": "first",
            "lhs": [rep.lhs.real, rep.lhs.imag],
            "rhs": [rep.rhs.real, rep.rhs.imag],
            "rel_err": rep.rel_err,
            "converged": rep.result.converged,
            "passed": ok,
        }
        human = f"lhs: {rep.lhs:.10g}\nrhs: {rep.rhs:.10g}\nrel_err: {rep.rel_err:.3e}\npassed: {ok}"
        row = [rep.lhs.real, rep.lhs.imag, rep.rhs.real, rep.rhs.imag, rep.rel_err, ok]
        return (0 if ok else 1), _render(values, payload, human, ["lhs_re", "lhs_im", "rhs_re", "rhs_im", "rel_err", "passed"], [row])
    zs = [_tube_point(values["z"], n, None)] if values["z"] else sample_points(n, values["points"], values["seed"])
    rep = verify_identity_second(n, values["s"], values["t"], zs, cfg)
    ok = not rep.divergent and rep.homogeneity_spread < values["tolerance"]
    payload = {
        "identity": "second",
        "values": list(rep.values),
        "spread": None if rep.divergent else rep.homogeneity_spread,
        "constant": None if rep.divergent else rep.constant,
        "divergent": rep.divergent,
        "passed": ok,
    }
    human = "\n".join(
        [f"values: {', '.join(f'{v:.10g}' for v in rep.values)}", f"spread: {rep.homogeneity_spread:.3e}",
         f"constant: {rep.constant:.10g}", f"divergent: {rep.divergent}", f"passed: {ok}"]
    )
    rows = [[k, v] for k, v in enumerate(rep.values)]
    return (0 if ok else 1), _render(values, payload, human, ["point", "value"], rows)


def cmd_certificate(values: dict) -> tuple[int, str]:
    n, (p, q) = values["n"], _exponents(values)
    params = _operator_params(values)
    cfg = _quadrature(values)
    if math.isinf(q[0]) and math.isinf(q[1]):
        rep = verify_infinity_condition(n, p, params, values["samples"], cfg, values["seed"])
        payload = {"kind": "infinite_target", **rep.to_dict()}
        human = f"slice-norm spread: {rep.spread:.3e}\nslopes: {rep.slopes}\npassed: {rep.passed}"
        rows = [[k, v] for k, v in enumerate(rep.values)]
        return (0 if rep.passed else 1), _render(values, payload, human, ["point", "value"], rows)
    try:
        cert = build_certificate(n, p, q, params)
    except InfeasibleCertificateError as exc:
        payload = {"feasible": False, "message": str(exc)}
        return 1, _render(values, payload, f"infeasible: {exc}", ["feasible"], [[False]])
    payload = {"feasible": True, **cert.to_dict()}
    human = cert.to_human()
    ok = True
    if values["verify"]:
        report = verify_schur_conditions(cert, values["samples"], cfg, values["seed"])
        payload["verification"] = report.to_dict()
        human += "\n" + "\n".join(f"{c.name}: spread {c.spread:.3e} passed {c.passed}" for c in report.checks)
        ok = report.passed
    rows = [[i + 1, cert.tau[i], cert.r[i], cert.s[i], cert.gamma[i], cert.delta[i]] for i in range(2)]
    return (0 if ok else 1), _render(values, payload, human, ["slot", "tau", "r", "s", "gamma", "delta"], rows)


def cmd_sweep(values: dict) -> tuple[int, str]:
    n, (p, q) = values["n"], _exponents(values)
    params = _operator_params(values)
    try:
        result = blowup_sweep(n, p, q, params, values["scales"], _quadrature(values), values["method"])
    except WitnessError as exc:
        payload = {"error": str(exc)}
        return 1, _render(values, payload, f"error: {exc}", ["error"], [[str(exc)]])
    if values["format"] == "csv":
        return 0, result.to_csv().rstrip("\n")
    payload = {
        "slope": result.slope,
        "converged": result.converged,
        "rows": [{"scale": r.scale, "ratio": r.ratio, "slope": None if math.isnan(r.slope) else r.slope} for r in result.rows],
    }
    human = "\n".join([f"t={r.scale:g}  ratio={r.ratio:.10g}" for r in result.rows] + [f"slope: {result.slope:.6g}"])
    return 0, _render(values, payload, human, [], [])


def cmd_apply(values: dict) -> tuple[int, str]:
    n, (p, _) = values["n"], _exponents(values)
    if values["operator"] not in ("T", "S"):
        raise UsageError("apply takes --operator T or S")
    params = _operator_params(values)
    base = TubePoint.vertical(n, 1.0)
    xi, eta = (_tube_point(values[k], n, base) for k in ("xi", "eta"))
    z, w = (_tube_point(values[k], n, base) for k in ("z", "w"))
    family = make_direct_family(n, p, params, xi, eta)
    cfg = _quadrature(values)
    if values["operator"] == "T":
        res = apply_T(params, family.function, z, w, cfg)
        expected = closed_form_T_image(params, family)(z, w)
        rel = abs(res.value - expected) / abs(expected)
        ok = rel <= values["tolerance"] and res.converged
        extra = {"closed_form": [float(expected.real), float(expected.imag)], "rel_err": float(rel)}
    else:
        res = apply_S(params, family.function, z, w, cfg)
        ok, extra = res.converged and not res.divergent, {}
    value = complex(res.value)
    payload = {
        "operator": values["operator"],
        "value": [value.real, value.imag],
        "est_error": res.est_error,
        "converged": res.converged,
        "divergent": res.divergent,
        **extra,
        "passed": ok,
    }
    human = "\n".join(f"{k}: {v}" for k, v in payload.items())
    row = [values["operator"], value.real, value.imag, res.est_error, extra.get("rel_err", ""), ok]
    return (0 if ok else 1), _render(values, payload, human, ["operator", "re", "im", "est_error", "rel_err", "passed"], [row])


def cmd_selftest(values: dict) -> tuple[int, str]:
    echo = (lambda line: print(line, file=sys.stderr, flush=True)) if values["format"] == "human" else None
    results = run_all(values["quick"], echo=echo)
    ok = all(r.passed for r in results)
    payload = {
        "passed": ok,
        "criteria": [
            {"number": r.number, "title": r.title, "passed": r.passed, "detail": r.detail, "seconds": r.seconds}
            for r in results
        ],
    }
    human = "\n".join(r.line() for r in results) + f"\n{'all criteria passed' if ok else 'FAILED'}"
    rows = [[r.number, r.title, r.passed, r.detail, f"{r.seconds:.2f}"] for r in results]
    return (0 if ok else 1), _render(values, payload, human, ["number", "title", "passed", "detail", "seconds"], rows)


COMMANDS = {
    "classify": cmd_classify,
    "verify-identity": cmd_verify_identity,
    "certificate": cmd_certificate,
    "sweep": cmd_sweep,
    "apply": cmd_apply,
    "selftest": cmd_selftest,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        values = resolve(args)
        code, text = COMMANDS[args.command](values)
    except UsageError as exc:
        print(f"tubeops: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if values["output"]:
        with open(values["output"], "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
