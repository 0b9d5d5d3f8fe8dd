"""Command-line front end: ``torus-cauchy {classify|solve|witness|oracle-check|fit-decay}``.

Exit codes: 0 success, 1 schema error, 2 unclassifiable, 3 solver failure,
4 oracle-check failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import classifier, oracle, witness
from .errors import (
    InsufficientData,
    MalformedStructure,
    SchemaError,
    TorusCauchyError,
    Unclassifiable,
)
from .schema import PROBLEM
from .spectral_field import (
    THREADS_ENV,
    DataSpec,
    GevreyDecay,
    SingleMode,
    Table,
    Zero,
    frequency_box,
    gevrey_fit,
    read_field_csv,
    solve_cauchy,
    write_field_csv,
)
from .symbol_ode import SymbolSpec
from .time_coeffs import Factored, Named, Polynomial, Sampled, VanishingProfile, constant, zero

EXIT_OK, EXIT_SCHEMA, EXIT_UNCLASSIFIABLE, EXIT_SOLVER, EXIT_ORACLE = 0, 1, 2, 3, 4


# ---------------------------------------------------------------------------
# parsing


def _reject_constant(name: str):
    raise SchemaError(f"non-finite number {name} in input")


def load_problem(path: str | os.PathLike) -> tuple[dict, bytes]:
    """Read and validate a problem file; returns the document and its raw bytes."""
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw.decode("utf-8"), parse_constant=_reject_constant)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    try:
        jsonschema.validate(doc, PROBLEM)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{path}: {where}: {exc.message}") from exc
    return doc, raw


def _complex(v) -> complex:
    if isinstance(v, list):
        return complex(v[0], v[1])
    return complex(v)


def build_coefficient(doc: Any, horizon: float):
    if isinstance(doc, (int, float)):
        return constant(float(doc), horizon)
    if "polynomial" in doc:
        return Polynomial([_complex(c) for c in doc["polynomial"]], horizon)
    if "named" in doc:
        params = {k: doc[k] for k in ("lam", "t0", "p") if k in doc}
        return Named(doc["named"], _complex(doc.get("amplitude", 1.0)), horizon, **params)
    if "factored" in doc:
        f = doc["factored"]
        zeros = [
            VanishingProfile(z["t"], z["order"], z.get("lower", 1.0), z.get("upper", 1.0), z.get("sign", -1))
            for z in f["zeros"]
        ]
        return Factored(zeros, [_complex(c) for c in f["remainder"]], horizon)
    if "sampled" in doc:
        return Sampled([_complex(c) for c in doc["sampled"]], horizon)
    raise SchemaError(f"unrecognized coefficient {doc!r}")


def build_spec(doc: dict) -> SymbolSpec:
    """The symbol described by the ``coefficients`` block."""
    if "coefficients" not in doc:
        raise SchemaError("missing 'coefficients' block")
    c = doc["coefficients"]
    T = float(doc["horizon"])
    N = int(doc["dimension"])
    if "preset" in c:
        name = c["preset"]
        if name == "heat":
            return SymbolSpec.operator_form(constant(-1j, T), [zero(T) for _ in range(N)], horizon=T)
        if N != 1:
            raise SchemaError(f"preset {name!r} is one-dimensional")
        if name == "intro":
            if "k" not in c or "ell" not in c:
                raise SchemaError("preset 'intro' needs k and ell")
            return SymbolSpec.intro_example(c["k"], c["ell"], T)
        if name in ("flat-ill-posed", "flat-well-posed"):
            return witness.flat_spec(well_posed=name == "flat-well-posed", horizon=T)
        if name == "fourth-order":
            return witness.fourth_order_spec(T)
    a2 = build_coefficient(c["a2"], T)
    a1 = [build_coefficient(x, T) for x in c["a1"]]
    if len(a1) != N:
        raise SchemaError(f"expected {N} drift coefficients, got {len(a1)}")
    if c.get("form", "operator") == "normal":
        if "a0" in c or "extra_monomials" in c:
            raise SchemaError("normal form takes only a2 (c2) and a1 (c1)")
        return SymbolSpec.normal_form(a2, a1, T)
    a0 = build_coefficient(c["a0"], T) if "a0" in c else zero(T)
    extra = tuple((e["m"], build_coefficient(e["coef"], T)) for e in c.get("extra_monomials", []))
    return SymbolSpec(N, T, a2, tuple(a1), a0, extra)


def build_generator(doc: dict | None, dimension: int):
    if doc is None or doc["kind"] == "zero":
        return Zero()
    kind = doc["kind"]
    amp = _complex(doc.get("amplitude", 1.0))
    axis = doc.get("axis")
    if axis is not None and axis > dimension:
        raise SchemaError(f"axis {axis} exceeds dimension {dimension}")
    axis0 = None if axis is None else axis - 1
    if kind == "gevrey":
        if "delta" not in doc:
            raise SchemaError("gevrey data needs delta")
        return GevreyDecay(doc["delta"], doc.get("s", 1.0), axis0, doc.get("sign", 1), amp)
    if kind == "exponential":
        if "rate" not in doc:
            raise SchemaError("exponential data needs rate")
        return GevreyDecay(doc["rate"], 1.0, axis0, doc.get("sign", 1), amp)
    if kind == "single":
        if len(doc.get("xi", [])) != dimension:
            raise SchemaError("single-mode data needs xi of the problem dimension")
        return SingleMode(tuple(doc["xi"]), amp)
    if kind == "table":
        entries = {tuple(e["xi"]): _complex(e["value"]) for e in doc.get("entries", [])}
        if any(len(k) != dimension for k in entries):
            raise SchemaError("table frequencies must match the problem dimension")
        return Table(entries)
    raise SchemaError(f"unknown data kind {kind!r}")


def build_data(doc: dict) -> DataSpec | None:
    if "data" not in doc:
        return None
    d = doc["data"]
    N = int(doc["dimension"])
    return DataSpec(build_generator(d.get("g"), N), build_generator(d.get("f"), N))


def _point(d: dict) -> classifier.DegeneratePoint:
    conv = classifier._order_from_json
    return classifier.DegeneratePoint(float(d["t"]), conv(d["p"]), tuple(conv(q) for q in d["q"]))


# ---------------------------------------------------------------------------
# output helpers


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _settings_hash(doc: dict, args: argparse.Namespace) -> str:
    canon = json.dumps({"problem": doc, "seed": args.seed, "trials": args.trials, "command": args.command},
                       sort_keys=True, separators=(",", ":"))
    return _sha256(canon.encode())


def _write(path: Path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _manifest(out: Path, doc: dict, raw: bytes, args: argparse.Namespace, files: list[dict]) -> None:
    for f in files:
        f["sha256"] = _sha256((out / f["name"]).read_bytes())
    _write(out / "manifest.json", _dump({
        "command": args.command,
        "input_sha256": _sha256(raw),
        "settings_sha256": _settings_hash(doc, args),
        "seed": args.seed,
        "files": files,
    }))


def _workers() -> int:
    cap = os.environ.get(THREADS_ENV)
    return max(1, int(cap)) if cap else 1


# ---------------------------------------------------------------------------
# commands


def cmd_classify(doc: dict, raw: bytes, args) -> int:
    N = int(doc["dimension"])
    if "structure" in doc:
        st = classifier.structure_from_json(doc["structure"], N)
    else:
        st = classifier.structure_from_spec(build_spec(doc))
    verdict = classifier.classify(st)
    text = verdict.to_json()
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "verdict.json", text + "\n")
        _manifest(out, doc, raw, args, [{"name": "verdict.json"}])
    return EXIT_OK


def cmd_solve(doc: dict, raw: bytes, args) -> int:
    spec = build_spec(doc)
    data = build_data(doc) or DataSpec()
    if "solve" not in doc:
        raise SchemaError("missing 'solve' block")
    s = doc["solve"]
    fields = solve_cauchy(
        spec, data, s["times"], s["truncation"], s.get("nodes_per_unit"), s.get("adaptive", True), _workers()
    )
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for k, fld in enumerate(fields):
        name = f"field_t{k}.csv"
        write_field_csv(fld, out / name)
        files.append({"name": name, "time": fld.timestamp})
    _manifest(out, doc, raw, args, files)
    print(_dump({"fields": [f["name"] for f in files], "out": str(out)}), end="")
    return EXIT_OK


def _probe_setup(doc: dict, spec: SymbolSpec):
    if "probe" not in doc:
        raise SchemaError("missing 'probe' block")
    p = doc["probe"]
    kind = p["kind"]
    N = int(doc["dimension"])
    ns = p.get("ns")
    if kind == "flat":
        data, seq = witness.flat_probe(ns or (64, 256, 1024, 4096))
    elif kind == "fourth-order":
        data, seq = witness.fourth_order_probe(ns or (64, 256, 1024, 4096))
    elif kind == "degenerate":
        if "point" not in p:
            raise SchemaError("degenerate probe needs a point")
        data, seq = witness.degenerate_witness(
            _point(p["point"]), p.get("Gamma", 1.0), p.get("gamma", 1.0), p.get("ell"), spec.horizon, ns,
            p.get("sign", 1),
        )
    elif kind == "parabolic":
        t = p.get("t_star", p.get("t", spec.horizon))
        data = witness.parabolic_violation_data(t)
        seq = witness.axis_probe("parabolic", ns or witness.geometric_indices(4, 256), t,
                                 p.get("axis", 1) - 1, N, p.get("sign", 1))
    elif kind == "drift":
        data = witness.drift_violation_data(p.get("axis", 1), p.get("varsigma", 1.0), p.get("delta", 1.0),
                                            p.get("sign", 1))
        seq = witness.axis_probe("drift", ns or witness.geometric_indices(4, 256), p.get("t", spec.horizon),
                                 p.get("axis", 1) - 1, N, p.get("sign", 1))
    else:
        data = DataSpec()
        seq = witness.axis_probe("axis", ns or witness.geometric_indices(4, 256), p.get("t", spec.horizon),
                                 p.get("axis", 1) - 1, N, p.get("sign", 1))
    override = build_data(doc)
    return (override or data), seq


def cmd_witness(doc: dict, raw: bytes, args) -> int:
    spec = build_spec(doc)
    data, seq = _probe_setup(doc, spec)
    p = doc["probe"]
    report = witness.probe(spec, data, seq, p.get("floor", witness.DIVERGENCE_FLOOR),
                           p.get("ceiling", witness.BOUNDED_CEILING))
    text = witness.report_json(report)
    print(text, end="")
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    witness.write_probe_csv(report, out / "probe.csv")
    _write(out / "report.json", text)
    _manifest(out, doc, raw, args, [{"name": "probe.csv"}, {"name": "report.json"}])
    return EXIT_OK


def cmd_oracle_check(doc: dict, raw: bytes, args) -> int:
    o = doc.get("oracle", {})
    suite = o.get("suite", "random" if "coefficients" not in doc else "file")
    if suite == "random":
        cases = oracle.random_suite(args.seed, args.trials, max_freq=o.get("max_freq", 16))
    else:
        spec = build_spec(doc)
        data = build_data(doc) or DataSpec()
        if "solve" not in doc:
            raise SchemaError("file oracle check needs a 'solve' block")
        s = doc["solve"]
        freqs = frequency_box(spec.dimension, s["truncation"])
        g = [data.g.value(x) for x in freqs]
        f = [data.f.value(x) for x in freqs]
        cases = oracle.field_cases(spec, g, f, freqs, s["times"])
        if args.trials is not None and args.trials < len(cases):
            pick = np.random.default_rng(args.seed).choice(len(cases), args.trials, replace=False)
            cases = [cases[k] for k in sorted(pick)]
    summary = oracle.run_oracle(
        cases, o.get("steps", 10_000), o.get("tolerance", 1e-6), o.get("nodes_per_unit"), o.get("adaptive", True)
    )
    result = dict(summary.to_json_dict(), seed=args.seed, suite=suite)
    text = _dump(result)
    print(text, end="")
    print(f"{'PASS' if summary.passed else 'FAIL'}: {len(summary.checked) - summary.failures}/"
          f"{len(summary.checked)} within {summary.tolerance:g} (max error {summary.max_error:.3g})",
          file=sys.stderr)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "oracle.json", text)
        _manifest(out, doc, raw, args, [{"name": "oracle.json"}])
    return EXIT_OK if summary.passed else EXIT_ORACLE


def cmd_fit_decay(path: str, args) -> int:
    fld = read_field_csv(path)
    fit = gevrey_fit(fld)
    text = _dump({
        "s_hat": fit.s_hat,
        "delta_hat": fit.delta_hat,
        "residual": fit.residual,
        "admissible": fit.admissible,
        "diagnostic": fit.diagnostic,
        "samples": fit.samples,
        "ray": list(fit.ray),
    })
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "fit.json", text)
    return EXIT_OK


COMMANDS = ("classify", "solve", "witness", "oracle-check", "fit-decay")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="torus-cauchy", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("spec", help="problem JSON file (a field CSV for fit-decay)")
    ap.add_argument("--out", default=None, help="output directory")
    ap.add_argument("--seed", type=int, default=42, help="seed for randomized suites (default 42)")
    ap.add_argument("--trials", type=int, default=None, help="number of oracle trials (default 100)")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fit-decay":
            try:
                return cmd_fit_decay(args.spec, args)
            except InsufficientData:
                raise
            except (MalformedStructure, ValueError, OSError) as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_SCHEMA
        doc, raw = load_problem(args.spec)
        if args.command == "oracle-check" and args.trials is None and doc.get("oracle", {}).get("suite") != "file":
            args.trials = 100
        handler = {
            "classify": cmd_classify,
            "solve": cmd_solve,
            "witness": cmd_witness,
            "oracle-check": cmd_oracle_check,
        }[args.command]
        return handler(doc, raw, args)
    except (SchemaError, MalformedStructure, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except Unclassifiable as exc:
        print(f"unclassifiable: {exc}", file=sys.stderr)
        return EXIT_UNCLASSIFIABLE
    except TorusCauchyError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
