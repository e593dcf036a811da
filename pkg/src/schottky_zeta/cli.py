"""Command line front end: ``schottky-zeta validate|products|pairing|tate``.

Exit codes: 0 when every requested identity holds within tolerance, 1 when
one fails, 2 for unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import differentials, schottky, tate, zetaprod
from .errors import GenusTooSmall, SchottkyZetaError, SpecError
from .schottky import GroupSpec, dump_complex

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

NORMALIZATION_TOL = 1e-6
DUALITY_TOL = 1e-8
TATE_WHICH = ("s1", "s3", "s5", "a4", "a6", "delta", "disc-check")


def _jsonable(x):
    """Complex numbers become ``[re, im]``, arrays nested lists, inf/nan ``None``."""
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(float(x.real)), _jsonable(float(x.imag))]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if x is schottky.INF:
        return "inf"
    return x


@dataclass
class RunReport:
    command: str
    inputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    status: str = "ok"

    def check(self, name: str, value: float, tol: float) -> bool:
        ok = bool(value is not None and math.isfinite(value) and value < tol)
        self.checks[name] = {"value": value, "tol": tol, "pass": ok}
        return ok

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks.values())

    def to_dict(self) -> dict:
        return _jsonable({
            "command": self.command,
            "status": self.status,
            "inputs": self.inputs,
            "results": self.results,
            "checks": self.checks,
            "warnings": self.warnings,
            "timing": self.timing,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        d = json.loads(text)
        return cls(
            command=d["command"],
            inputs=d.get("inputs", {}),
            results=d.get("results", {}),
            checks=d.get("checks", {}),
            warnings=d.get("warnings", []),
            timing=d.get("timing", {}),
            status=d.get("status", "ok"),
        )

    def to_text(self) -> str:
        lines = [f"command: {self.command}    status: {self.status}"]
        flat = []
        _flatten("", self.results, flat)
        if flat:
            width = max(len(k) for k, _ in flat)
            lines.append("")
            lines += [f"  {k.ljust(width)}  {v}" for k, v in flat]
        if self.checks:
            width = max(len(k) for k in self.checks)
            lines.append("")
            for name, c in self.checks.items():
                verdict = "PASS" if c["pass"] else "FAIL"
                lines.append(f"  {verdict}  {name.ljust(width)}  {_fmt(c['value'])} < {c['tol']:g}")
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, float) for x in v):
        re, im = v
        return f"{re:.12g}{im:+.12g}j"
    return json.dumps(v)


def _flatten(prefix: str, obj, out: list) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    else:
        out.append((prefix, _fmt(_jsonable(obj))))


# ---------------------------------------------------------------------------
# helpers


def corpus_path(name: str) -> Path:
    """Path of a shipped corpus spec (``genus1``, ``genus2_real``, ...)."""
    base = resources.files("schottky_zeta") / "corpus"
    return Path(str(base / (name if name.endswith(".json") else name + ".json")))


def load_spec(path: str) -> GroupSpec:
    p = Path(path)
    if not p.exists() and not p.suffix:
        p = corpus_path(path)
    try:
        data = json.loads(p.read_text())
    except FileNotFoundError as exc:
        raise SpecError(f"spec file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec is not valid JSON: {exc}") from exc
    return GroupSpec.from_dict(data)


def _group_summary(group: schottky.SchottkyGroup) -> dict:
    rep = group.circle_report
    return {
        "genus": group.genus,
        "is_real": group.is_real,
        "generators": group.resolved_generators(),
        "circles": None if rep is None else rep.to_dict(),
    }


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    return int(os.environ.get(zetaprod.THREADS_ENV, "1"))


def _parse_ks(text: str) -> list[int]:
    try:
        ks = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise SpecError(f"bad --k list {text!r}") from exc
    if not ks or any(k < 2 for k in ks):
        raise SpecError("--k needs integers >= 2")
    return ks


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args, report: RunReport) -> None:
    spec = load_spec(args.spec)
    report.inputs["spec"] = spec.to_dict()
    group = schottky.build(spec)
    report.results["group"] = _group_summary(group)
    for i in range(1, group.genus + 1):
        report.results.setdefault("multipliers", []).append(dump_complex(group.qs[i - 1]))
    rep = group.circle_report
    if group.circles is not None:
        report.results["delta_estimate"] = schottky.delta_estimate(group, args.max_word_len or 8)
    report.checks["circles_valid"] = {"value": rep.margin, "tol": 0.0, "pass": rep.valid}
    if not rep.valid:
        report.warnings.append(rep.message)


def _product(pv: zetaprod.ProductValue) -> dict:
    return pv.to_dict()


def cmd_products(args, report: RunReport) -> None:
    spec = load_spec(args.spec)
    ks = _parse_ks(args.k)
    policy = zetaprod.TruncationPolicy(
        max_word_len=args.max_word_len or 10, tol=args.tol, threads=_threads(args)
    )
    report.inputs.update({"spec": spec.to_dict(), "k": ks, "max_word_len": policy.max_word_len,
                          "tol": args.tol})
    group = schottky.build(spec)
    report.inputs["resolved"] = _group_summary(group)
    f1 = zetaprod.zograf_F1(group, policy)
    res = report.results
    res["F1"] = _product(f1)
    report.warnings += list(f1.warnings)
    if group.genus < 2:
        raise GenusTooSmall("F(k), the Mumford ratio and modified Ruelle values need genus >= 2")
    fks = {}
    for k in sorted(set(ks) | {k + 1 for k in ks} if group.is_real else set(ks)):
        fks[k] = zetaprod.mt_Fk(group, k, policy)
    for k in ks:
        res[f"F{k}"] = _product(fks[k])
        mr = zetaprod.mumford_ratio(group, k, policy)
        res[f"mumford_ratio_k{k}"] = {"via_F": mr.via_F.value, "via_intro": mr.via_intro.value,
                                      "d_k": zetaprod.d_k(k)}
        report.check(f"mumford_ratio_k{k}", mr.residual, args.tol)
    if group.is_real:
        for s in sorted(set(ks)):
            res[f"ruelle_s{s}"] = _product(zetaprod.ruelle(group, s, policy))
        for k in ks:
            mr = zetaprod.modified_ruelle(group, k, policy)
            ratio = fks[k + 1].value / fks[k].value
            res[f"modified_ruelle_k{k}"] = {"value": mr.value, "F_ratio": ratio}
            report.check(f"modified_ruelle_k{k}", abs(mr.value - ratio), args.tol)
    else:
        report.warnings.append("group not real: Ruelle identities skipped")


def cmd_pairing(args, report: RunReport) -> None:
    spec = load_spec(args.spec)
    L = args.max_word_len or 8
    tol = args.tol
    report.inputs.update({"spec": spec.to_dict(), "max_word_len": L, "tol": tol})
    res = report.results
    if args.scale_family:
        triples = [(schottky.parse_point(g["alpha"]), schottky.parse_point(g["beta"]),
                    schottky.parse_complex(g["q"])) for g in spec.generators]
        fit = differentials.det_leading_order(triples)
        res["det_leading_order"] = {
            "exponent": fit.exponent, "expected_exponent": spec.genus - 1,
            "coefficient": fit.coefficient, "predicted": fit.predicted, "ts": fit.ts,
        }
        report.check("det_exponent", abs(fit.exponent - (spec.genus - 1)), 0.05)
        report.check("det_coefficient", fit.rel_error, 0.01)
        return
    group = schottky.build(spec)
    report.inputs["resolved"] = _group_summary(group)
    m = differentials.normalization_matrix(group, L, tol)
    dev = float(np.max(np.abs(m - np.eye(group.genus))))
    res["normalization_matrix"] = m
    report.check("normalization", dev, NORMALIZATION_TOL)
    periods = spec.periods or {}
    coeff_1 = np.asarray(_matrix(periods.get("coeff_1")) if "coeff_1" in periods else np.eye(group.genus))
    policy = zetaprod.TruncationPolicy(threads=_threads(args))
    f1 = zetaprod.zograf_F1(group, policy).value
    if group.genus >= 2:
        bc = differentials.normalized_basis_change(group, L, tol)
        pm = bc.pairing
        res["pairing"] = {"rows": pm.rows, "cols": pm.cols, "matrix": pm.matrix,
                          "det": pm.det, "cond": pm.cond, "nodes": pm.nodes}
        res["basis_change"] = {"det_B": bc.detB}
        report.check("duality", bc.residual, DUALITY_TOL)
        n = 3 * group.genus - 3
        coeff_k = np.asarray(_matrix(periods.get("coeff_k")) if "coeff_k" in periods else np.eye(n))
        omega1, omegak = differentials.period_determinants(coeff_1, coeff_k, m)
        res["periods"] = {"Omega_1": omega1, "Omega_k": omegak}
    else:
        omega1, _ = differentials.period_determinants(coeff_1, np.eye(1), m)
        res["periods"] = {"Omega_1": omega1}
    res["c_gamma"] = f1 / omega1


def _matrix(rows) -> np.ndarray:
    return np.array([[schottky.parse_complex(x) for x in row] for row in rows], dtype=complex)


def cmd_tate(args, report: RunReport) -> None:
    N = args.N
    if N < 1:
        raise SpecError("N must be >= 1")
    which = [w.strip() for w in args.which.split(",") if w.strip()]
    bad = [w for w in which if w not in TATE_WHICH]
    if bad:
        raise SpecError(f"unknown series {bad}; choose from {', '.join(TATE_WHICH)}")
    report.inputs.update({"N": N, "which": which})
    makers = {
        "s1": lambda: tate.s_k_series(1, N),
        "s3": lambda: tate.s_k_series(3, N),
        "s5": lambda: tate.s_k_series(5, N),
        "a4": lambda: tate.a4_series(N),
        "a6": lambda: tate.a6_series(N),
        "delta": lambda: tate.delta_series(N),
    }
    for w in which:
        if w == "disc-check":
            disc = tate.discriminant_series(N)
            delta = tate.delta_series(N)
            diff = sum(abs(a - b) for a, b in zip(disc.coeffs, delta.coeffs))
            report.results["disc-check"] = {"equal": diff == 0, "discriminant": disc.to_json()}
            report.check("discriminant_equals_delta", float(diff), 0.5)
        else:
            report.results[w] = makers[w]().to_json()


COMMANDS = {
    "validate": cmd_validate,
    "products": cmd_products,
    "pairing": cmd_pairing,
    "tate": cmd_tate,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schottky-zeta", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, spec=True, tol=1e-9):
        if spec:
            sp.add_argument("--spec", required=True,
                            help="group spec JSON file, or the name of a shipped corpus spec")
            sp.add_argument("--max-word-len", type=int, default=None, help="truncation length L")
            sp.add_argument("--threads", type=int, default=None,
                            help=f"worker processes (default ${zetaprod.THREADS_ENV} or 1)")
        sp.add_argument("--tol", type=float, default=tol)
        sp.add_argument("--pretty", action="store_true", help="aligned text instead of JSON")
        sp.add_argument("--out", default=None, help="write the report here instead of stdout")

    common(sub.add_parser("validate", help="build a group and check its circles"))
    sp = sub.add_parser("products", help="F(1), F(k), Mumford ratio and Ruelle values")
    common(sp, tol=1e-9)  # identity tolerance
    sp.add_argument("--k", default="2", help="comma separated list of k >= 2")
    sp = sub.add_parser("pairing", help="normalization, pairing matrix and periods")
    common(sp, tol=1e-10)
    sp.add_argument("--scale-family", action="store_true",
                    help="treat the spec multipliers as q_hat and fit det P(t) over q = t q_hat")
    sp = sub.add_parser("tate", help="exact Tate curve q-series")
    common(sp, spec=False)
    sp.add_argument("--N", type=int, default=10, help="truncation order")
    sp.add_argument("--which", default="delta", help=f"comma list from {', '.join(TATE_WHICH)}")
    return p


def run(argv=None) -> tuple[RunReport, int]:
    return execute(build_parser().parse_args(argv))


def execute(args) -> tuple[RunReport, int]:
    report = RunReport(args.command)
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        COMMANDS[args.command](args, report)
        if not report.passed:
            report.status = "fail"
            code = EXIT_FAIL
    except SchottkyZetaError as exc:
        report.status = "error"
        report.results["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = EXIT_INPUT
    report.timing["seconds"] = round(time.perf_counter() - t0, 3)
    return report, code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    report, code = execute(args)
    text = report.to_text() if args.pretty else report.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
