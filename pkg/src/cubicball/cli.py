"""Command-line interface: ``cubicball <verb> ...``.

Cubic files are JSON objects ``{"dim": 2|3, "coeffs": {"300": 1.0, ...}}``
keyed by exponent strings; missing monomials are zero. Exit status is 0 on
success, 2 when a verification fails and 1 on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import circle, families, gramian, sphere
from .certificate import extremality_certificate
from .classify import classify_s2
from .poly import Cubic2, Cubic3, riemannian_gradient

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2
DEFAULT_TOL = 1e-9


class UsageError(Exception):
    pass


def boundary_tol() -> float:
    raw = os.environ.get("CUBIC_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError as exc:
        raise UsageError(f"CUBIC_TOL is not a number: {raw!r}") from exc
    if not tol > 0:
        raise UsageError("CUBIC_TOL must be positive")
    return tol


# ------------------------------------------------------------ serialization


def _fmt(v: float) -> str:
    if not math.isfinite(v):
        return json.dumps(str(v))
    s = format(v, ".17g")
    return s if any(c in s for c in ".en") else s + ".0"


def dumps(obj) -> str:
    """JSON with insertion-ordered keys and 17 significant digits for floats."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    return json.dumps(obj)


def cubic_to_json(p) -> dict:
    return {"dim": p.dim, "coeffs": p.monomials()}


def cubic_from_json(data) -> Cubic2 | Cubic3:
    if not isinstance(data, dict):
        raise UsageError("cubic JSON must be an object")
    key = "coeffs" if "coeffs" in data else "coefficients"
    if key not in data:
        raise UsageError("missing key 'coeffs'")
    coeffs = data[key]
    if not isinstance(coeffs, dict):
        raise UsageError(f"key {key!r} must map exponent strings to numbers")
    dim = data.get("dim", len(next(iter(coeffs), "000")))
    if dim not in (2, 3):
        raise UsageError(f"key 'dim' must be 2 or 3, got {dim!r}")
    cls = Cubic2 if dim == 2 else Cubic3
    for mono, val in coeffs.items():
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise UsageError(f"coefficient {mono!r} is not a number")
    try:
        return cls.from_monomials(coeffs)
    except ValueError as exc:
        raise UsageError(f"key {key!r}: {exc}") from exc


def _read_json(path: str | None):
    try:
        if path in (None, "-"):
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise UsageError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path or 'stdin'}: {exc}") from exc


def _read_cubic(path: str | None, dim: int | None = None):
    p = cubic_from_json(_read_json(path))
    if dim is not None and p.dim != dim:
        raise UsageError(f"expected a cubic in {dim} variables, got {p.dim}")
    return p


def _emit(obj, output: str | None = None) -> None:
    text = dumps(obj)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _floats(text: str, name: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"option {name} expects comma-separated numbers, got {text!r}") from exc


def _params(text: str | None) -> dict[str, float]:
    out = {}
    for item in (text or "").split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise UsageError(f"parameter {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError as exc:
            raise UsageError(f"parameter {k.strip()!r} is not a number") from exc
    return out


# ------------------------------------------------------------------ verbs


def cmd_norm(args) -> int:
    p = _read_cubic(args.input)
    if args.surface == "s1":
        if p.dim != 2:
            raise UsageError("surface s1 needs a binary cubic")
        val, arg = circle.norm_s1(p)
        _emit({"norm": val, "argmax": arg})
    else:
        if p.dim != 3:
            raise UsageError("surface s2 needs a ternary cubic")
        val, arg = sphere.norm_s2(p)
        _emit({"norm": val, "argmax": [m.to_dict() for m in arg]})
    return EXIT_OK


def cmd_check(args) -> int:
    face = args.face
    p = _read_cubic(args.input, 2 if face == "F" else 3)
    try:
        if face == "F":
            q = circle.FaceFPoint.from_cubic(p)
            out = {"face": face, "member": circle.face_F_membership(q), "lmi_member": circle.face_F_membership_lmi(q)}
        elif face == "calF":
            rep = sphere.face_calF_membership(p)
            out = {"face": face, "verdict": rep.verdict.value, "delta_min": rep.delta_min.value}
        elif face == "F3":
            q = families.F3Point(p.scaled("102"), p.scaled("012"), p.coefficient("003"))
            if not q.cubic().allclose(p, 1e-9):
                raise UsageError("cubic is not of the three-maxima normal form")
            status, extremal = families.face_F3_membership(q)
            out = {"face": face, "status": status.value, "extremal": extremal}
        else:
            q = families.F4Point(p.scaled("102"), p.scaled("021"), p.scaled("012"), p.coefficient("003"))
            out = {"face": face, "status": families.face_F4_membership(q).value}
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(out)
    return EXIT_OK


def cmd_construct(args) -> int:
    fam = args.family.lower()
    try:
        if fam == "extremal-s1":
            if args.tau is None:
                raise UsageError("family extremal-s1 needs --tau")
            p = circle.extremal_poly(args.tau)
        elif fam in ("g", "h"):
            prm = _params(args.params)
            names = families.PARAM_NAMES[families.Form(fam.upper())]
            if sorted(prm) != sorted(names):
                raise UsageError(f"family {fam} takes parameters {names}")
            p = families.CanonicalForm(families.Form(fam.upper()), tuple(prm[n] for n in names)).cubic()
        else:
            p = families.construct(fam, **_params(args.params))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(cubic_to_json(p), args.output)
    return EXIT_OK


def cmd_classify(args) -> int:
    tol = boundary_tol()
    p = _read_cubic(args.input)
    try:
        if args.surface == "s1":
            if p.dim != 2:
                raise UsageError("surface s1 needs a binary cubic")
            r = circle.classify_s1(p, tol)
            out = {"kind": r.kind.value, "rotation_angle": r.rotation_angle, "tau": r.tau, "maxima": r.maxima, "norm": r.norm}
        else:
            if p.dim != 3:
                raise UsageError("surface s2 needs a ternary cubic")
            out = classify_s2(p, tol).to_dict()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(out)
    return EXIT_OK


def verify_report(p: Cubic3, tol: float) -> dict:
    """Criticality, census, index count and certificate for a ternary cubic."""
    census = sphere.critical_points_s2(p)
    top = census.max_value()
    maxima = census.global_maxima()
    grad = max(
        (float(np.linalg.norm(riemannian_gradient(p, m.location))) for m in maxima if isinstance(m, sphere.CriticalPoint)),
        default=0.0,
    )
    checks = {
        "norm_is_one": abs(top - 1.0) <= tol,
        "maxima_critical": grad <= 1e-8 * max(1.0, p.frobenius()),
        "census_complete": census.complete,
        "index_sum": (census.euler == 2) if census.index_checkable else None,
    }
    # the certificate needs a cubic on the unit sphere of the norm; rescale within tolerance
    cert = None
    if checks["norm_is_one"]:
        scaled = [dataclasses.replace(m, value=m.value / top) for m in maxima]
        cert = extremality_certificate(p * (1.0 / top), scaled, verify_grid=0)
    return {
        "ok": all(v is not False for v in checks.values()),
        "norm": top,
        "checks": checks,
        "census": {k: census.to_dict()[k] for k in ("maxima", "minima", "saddles", "circles")},
        "extremal": cert.extremal if cert else False,
        "certificate_rank": cert.rank if cert else None,
        "warnings": list(census.warnings),
    }


def cmd_verify(args) -> int:
    p = _read_cubic(args.input, 3)
    rep = verify_report(p, boundary_tol())
    _emit(rep)
    return EXIT_OK if rep["ok"] else EXIT_FAILED


def cmd_critical_points(args) -> int:
    p = _read_cubic(args.input, 3)
    _emit(sphere.critical_points_s2(p).to_dict())
    return EXIT_OK


def cmd_gram(args) -> int:
    vals = np.array(_floats(args.b, "--b"))
    try:
        g = {
            "central": gramian.gram_central,
            "wing": gramian.gram_wing,
            "case-b": gramian.gram_case_b,
            "from-z": gramian.gram_from_z,
        }[args.mode](vals)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit({"mode": args.mode, "b": [float(v) for v in vals], **g.to_dict()}, args.output)
    return EXIT_OK


def cmd_recover(args) -> int:
    data = _read_json(args.gram)
    if not isinstance(data, dict) or "gram" not in data:
        raise UsageError("missing key 'gram'")
    try:
        mat = np.array(data["gram"], dtype=float)
        pts = gramian.points_from_gram(mat)
        qc = gramian.cubic_from_quadruple(pts)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"key 'gram': {exc}") from exc
    census = sphere.critical_points_s2(qc.cubic)
    counts = {k: census.to_dict()[k] for k in ("maxima", "minima", "saddles", "circles")}
    ok = census.complete and counts["maxima"] == 4 and counts["minima"] == 4 and counts["saddles"] == 6
    _emit(
        {
            "cubic": cubic_to_json(qc.cubic),
            "points": [[float(v) for v in u] for u in pts],
            "z": [float(v) for v in qc.z],
            "census": counts,
            "norm": census.max_value(),
            "ok": ok,
        },
        args.output,
    )
    return EXIT_OK if ok else EXIT_FAILED


def cmd_contour(args) -> int:
    p = _read_cubic(args.input, 3)
    n = args.resolution
    if n < 2:
        raise UsageError("--resolution must be at least 2")
    theta = np.linspace(0.0, np.pi, n)
    phi = np.linspace(0.0, 2 * np.pi, 2 * n, endpoint=False)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["phi", "theta", "value"])
        for t in theta:
            x = np.column_stack([np.sin(t) * np.cos(phi), np.sin(t) * np.sin(phi), np.full_like(phi, np.cos(t))])
            for f, v in zip(phi, p(x)):
                w.writerow([_fmt(float(f)), _fmt(float(t)), _fmt(float(v))])
    finally:
        if args.output:
            out.close()
    return EXIT_OK


def sweep_grid(family: str, n: int) -> list[dict[str, float]]:
    eps = 1e-3
    if family == "b":
        pts = []
        for x in np.linspace(eps, 0.5 - eps, n):
            for y in np.linspace(0.0, families.SQRT3 * x, max(2, int(n * x / 0.5))):
                pts.append({"p102": float(x), "p012": float(y)})
        return pts
    if family in ("c", "e"):
        return [{"p102": float(x)} for x in np.linspace(-1 + eps, 0.5 - eps, n)]
    if family == "f":
        return [
            {"p102": float(x), "xi": float(t)}
            for x in np.linspace(-1 + eps, 0.5 - eps, n)
            for t in np.linspace(0.0, np.pi / 2 - eps, n)
        ]
    if family == "g":
        out = []
        for i in range(1, n):
            for j in range(1, n - i):
                for k in range(1, n - i - j):
                    out.append({"b1": i / n, "b2": j / n, "b3": k / n, "b4": (n - i - j - k) / n})
        return out
    if family == "h":
        vals = np.linspace(0.1, 3.0, n)
        return [{"b1": float(a), "b2": float(b), "b3": float(c)} for a in vals for b in vals for c in vals]
    raise UsageError(f"unknown sweep family {family!r}")


def sweep_point(task) -> dict:
    family, prm, tol = task
    if family in ("g", "h"):
        names = families.PARAM_NAMES[families.Form(family.upper())]
        p = families.CanonicalForm(families.Form(family.upper()), tuple(prm[n] for n in names)).cubic()
    else:
        p = families.construct(family, **prm)
    rep = verify_report(p, tol)
    return {"params": prm, "ok": rep["ok"] and rep["extremal"], "norm": rep["norm"], "census": rep["census"], "rank": rep["certificate_rank"]}


def cmd_sweep(args) -> int:
    grid = sweep_grid(args.family.lower(), args.grid)
    tol = boundary_tol()
    tasks = [(args.family.lower(), prm, tol) for prm in grid]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(sweep_point, tasks, chunksize=8))
    else:
        rows = [sweep_point(t) for t in tasks]
    failed = sum(1 for r in rows if not r["ok"])
    _emit({"family": args.family, "points": len(rows), "failed": failed, "results": rows}, args.output)
    return EXIT_OK if failed == 0 else EXIT_FAILED


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cubicball", description="Sup-norm balls of real cubic forms.")
    sub = ap.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("norm", help="maximum on the circle or sphere")
    s.add_argument("--input", required=True)
    s.add_argument("--surface", choices=["s1", "s2"], default="s2")
    s.set_defaults(func=cmd_norm)

    s = sub.add_parser("check", help="face membership")
    s.add_argument("--input", required=True)
    s.add_argument("--face", choices=["F", "calF", "F3", "F4"], required=True)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("construct", help="build a family member")
    s.add_argument("--family", required=True, help="a..h or extremal-s1")
    s.add_argument("--params", default="", help="comma-separated key=value pairs")
    s.add_argument("--tau", type=float)
    s.add_argument("--output")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("classify", help="canonical form of a boundary cubic")
    s.add_argument("--input", required=True)
    s.add_argument("--surface", choices=["s1", "s2"], default="s2")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("verify", help="criticality, census, index count and certificate")
    s.add_argument("--input", required=True)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("critical-points", help="full critical point census on the sphere")
    s.add_argument("--input", required=True)
    s.set_defaults(func=cmd_critical_points)

    s = sub.add_parser("gram", help="Gramian of four maxima")
    s.add_argument("--mode", choices=["central", "wing", "case-b", "from-z"], required=True)
    s.add_argument("--b", required=True, help="comma-separated parameters (z values for from-z)")
    s.add_argument("--output")
    s.set_defaults(func=cmd_gram)

    s = sub.add_parser("recover", help="cubic with maxima at the points of a Gramian")
    s.add_argument("--gram", default="-", help="Gramian JSON file, '-' for stdin")
    s.add_argument("--output")
    s.set_defaults(func=cmd_recover)

    s = sub.add_parser("contour", help="values on a longitude/colatitude grid as CSV")
    s.add_argument("--input", required=True)
    s.add_argument("--resolution", type=int, default=100)
    s.add_argument("--output")
    s.set_defaults(func=cmd_contour)

    s = sub.add_parser("sweep", help="verify a family over a parameter grid")
    s.add_argument("--family", required=True, choices=["b", "c", "e", "f", "g", "h"])
    s.add_argument("--grid", type=int, default=50)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--output")
    s.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
