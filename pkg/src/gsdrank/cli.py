"""Command-line front end.

Subcommands: ``classify``, ``fit``, ``decompose``, ``perturb``, ``gen`` and
``qz``. Reports go to stdout or ``--output``; ``--format json`` gives a
machine-readable report with full-precision floats, ``text`` rounds to six
significant digits. Exit status is 0 on success, 1 on computation or input
errors and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .classify import (Region, boundary_perturbation, classify_general, classify_square,
                       eigenvalue_repr)
from .errors import GSDRankError
from .fileio import emit_tensor, parse_tensor
from .generate import KINDS, generate_instance
from .gsd import best_gsd_fit, extract_cp_interior, full_gsd, full_gsd_singular_pencil
from .pencil import is_singular_pencil, real_qz, singularity_score
from .tensor import Tensor3, cp_reconstruct, frobenius_distance

__all__ = ["main", "run_command", "build_parser"]


class _UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# payload helpers

def _clean(x):
    """Turn numpy values into JSON-ready python values; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, Region):
        return x.value
    return x


def _eigs(eigs, ordered=False):
    out = [eigenvalue_repr(e) for e in eigs]
    if ordered:
        # finite values by (re, im), infinite ones last
        out.sort(key=lambda d: (d["re"] is None, d["re"] or 0.0, d["im"] or 0.0))
    return out


def _square_class_payload(c):
    return {"label": c.label.value, "case": c.case, "margin": c.margin,
            "eigenvalues": _eigs(c.eigenvalues, ordered=True),
            "slicemix": None if c.mix is None else c.mix}


def _gsd_payload(D, Y):
    res = frobenius_distance(Y, D.reconstruct())
    nrm = Y.norm()
    return {"Qa": D.Qa, "Qb": D.Qb, "R1": D.R1, "R2": D.R2, "residual": res,
            "relative_residual": res / nrm if nrm > 0 else 0.0}


# --------------------------------------------------------------------------
# subcommands

def _load(args):
    if args.input is None:
        raise _UsageError("--input is required")
    if args.input == "-":
        raw = sys.stdin.buffer.read()
        name = "<stdin>"
    else:
        try:
            with open(args.input, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise GSDRankError(f"{args.input}: {exc.strerror}") from None
        name = args.input
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise GSDRankError(f"{name}: not UTF-8 text") from None
    try:
        Y = parse_tensor(text)
    except GSDRankError as exc:
        raise GSDRankError(f"{name}: {exc}") from None
    return Y, hashlib.sha256(raw).hexdigest()


def _classify_one(Y, args):
    I, J, _ = Y.shape
    if args.R is None and I == J:
        c = classify_square(Y, tol=args.tol, sing_tol=args.sing_tol)
        return _square_class_payload(c)
    R = min(I, J) if args.R is None else args.R
    g = classify_general(Y, R, tol=args.member_tol, class_tol=args.tol, sing_tol=args.sing_tol,
                         max_sweeps=args.max_sweeps, restarts=args.restarts, seed=args.seed)
    out = {"label": g.label.value, "R": R, "residual": g.residual,
           "relative_residual": g.relative_residual}
    if g.square is not None:
        out["square"] = _square_class_payload(g.square)
    return out


def cmd_classify(args):
    if args.batch is not None:
        if args.input is not None:
            raise _UsageError("use either --input or --batch, not both")
        try:
            names = sorted(f for f in os.listdir(args.batch) if f.endswith(".json"))
        except OSError as exc:
            raise GSDRankError(f"{args.batch}: {exc.strerror}") from None
        results = []
        failed = False
        for f in names:
            path = os.path.join(args.batch, f)
            try:
                with open(path, "rb") as fh:
                    raw = fh.read()
                Y = parse_tensor(raw.decode("utf-8"))
                entry = {"file": f, "input_digest": hashlib.sha256(raw).hexdigest(),
                         "result": _classify_one(Y, args)}
            except (GSDRankError, ValueError, OSError) as exc:
                failed = True
                entry = {"file": f, "error": str(exc)}
            results.append(entry)
        return {"files": results}, None, (1 if failed else 0)
    Y, digest = _load(args)
    return _classify_one(Y, args), digest, 0


def cmd_fit(args):
    Y, digest = _load(args)
    if args.R is None:
        raise _UsageError("fit needs -R")
    D, rep = best_gsd_fit(Y, args.R, max_sweeps=args.max_sweeps, restarts=args.restarts,
                          seed=args.seed, sing_tol=args.sing_tol)
    out = _gsd_payload(D, Y)
    out.update({"R": args.R, "trace": rep.trace, "converged": rep.converged,
                "sweeps": rep.sweeps, "start": rep.start,
                "start_residuals": rep.start_residuals})
    return out, digest, 0


def cmd_decompose(args):
    Y, digest = _load(args)
    Y.require_square()
    if args.cp:
        F = extract_cp_interior(Y, tol=args.tol, sing_tol=args.sing_tol)
        err = frobenius_distance(Y, cp_reconstruct(F))
        return {"A": F.A, "B": F.B, "C": F.C, "rank": F.rank, "residual": err}, digest, 0
    singular = is_singular_pencil(*Y.slices, tol=args.sing_tol)
    D = full_gsd(Y, sing_tol=args.sing_tol)
    out = _gsd_payload(D, Y)
    out["method"] = "singular-pencil construction" if singular else "qz"
    return out, digest, 0


def cmd_perturb(args):
    Y, digest = _load(args)
    Y.require_square()
    if not is_singular_pencil(*Y.slices, tol=args.sing_tol):
        raise GSDRankError("perturb needs an identically singular pencil; "
                           f"singularity score {singularity_score(*Y.slices):.3g}")
    D = full_gsd_singular_pencil(Y, tol=args.sing_tol)
    H1, H2, plan = boundary_perturbation(D.R1, D.R2, args.eps)
    c = classify_square(Tensor3.from_slices(H1, H2), tol=args.tol, sing_tol=plan.sing_tol)
    P1, P2 = D.Qa @ H1 @ D.Qb.T, D.Qa @ H2 @ D.Qb.T
    out = {
        "plan": {"positions": list(plan.positions), "delta1": plan.delta1,
                 "delta2": plan.delta2, "eta": plan.eta, "case": plan.case,
                 "common_zeros": plan.common, "eps": plan.eps},
        "perturbation_norm": plan.norm,
        "distance": frobenius_distance(Y, Tensor3.from_slices(P1, P2)),
        "H1": H1, "H2": H2, "Qa": D.Qa, "Qb": D.Qb,
        "slices": [P1, P2],
        "h1_min_singular_value": float(np.linalg.svd(H1, compute_uv=False)[-1]),
        "core_classification": _square_class_payload(c),
        "core_sing_tol": plan.sing_tol,
    }
    return out, digest, 0


def cmd_qz(args):
    Y, digest = _load(args)
    Y.require_square()
    Y1, Y2 = Y.slices
    qz = real_qz(Y1, Y2)
    n = qz.n
    orth = max(np.abs(qz.Q @ qz.Q.T - np.eye(n)).max(), np.abs(qz.Z @ qz.Z.T - np.eye(n)).max())
    scale = np.linalg.norm(Y1) + np.linalg.norm(Y2)
    res = (np.linalg.norm(qz.Q.T @ qz.F @ qz.Z.T - Y1)
           + np.linalg.norm(qz.Q.T @ qz.G @ qz.Z.T - Y2)) / (scale if scale > 0 else 1.0)
    out = {"Q": qz.Q, "Z": qz.Z, "F": qz.F, "G": qz.G,
           "blocks": [list(b) for b in qz.blocks], "iterations": qz.iterations,
           "eigenvalues": _eigs(qz.eigenvalues()),
           "orthonormality_error": orth, "relative_residual": res}
    return out, digest, 0


# --------------------------------------------------------------------------
# formatting

def _fmt_num(x):
    if x is None:
        return "-"
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _is_matrix(v):
    return (isinstance(v, list) and v and all(isinstance(r, list) for r in v)
            and all(not isinstance(x, (list, dict)) for r in v for x in r))


def _text(obj, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, dict):
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            elif _is_matrix(v):
                lines.append(f"{pad}{k}:")
                for row in v:
                    lines.append(pad + "  [" + " ".join(f"{_fmt_num(x):>12}" for x in row) + "]")
            elif isinstance(v, list) and any(isinstance(x, (dict, list)) for x in v):
                lines.append(f"{pad}{k}:")
                for i, item in enumerate(v):
                    lines.append(f"{pad}  [{i}]")
                    lines.extend(_text(item, indent + 2))
            elif isinstance(v, list):
                lines.append(f"{pad}{k}: [" + ", ".join(_fmt_num(x) for x in v) + "]")
            else:
                lines.append(f"{pad}{k}: {_fmt_num(v)}")
    elif _is_matrix(obj):
        for row in obj:
            lines.append(pad + "[" + " ".join(f"{_fmt_num(x):>12}" for x in row) + "]")
    elif isinstance(obj, list):
        lines.append(pad + "[" + ", ".join(_fmt_num(x) for x in obj) + "]")
    else:
        lines.append(pad + _fmt_num(obj))
    return lines


def render(report, fmt):
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"
    return "\n".join(_text(report)) + "\n"


# --------------------------------------------------------------------------

def _positive_float(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {s}")
    return v


def _nonneg_int(s):
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {v}")
    return v


def _pos_int(s):
    v = _nonneg_int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=1e-8,
                        help="relative eigenvalue distinctness threshold (default 1e-8)")
    common.add_argument("--sing-tol", type=_positive_float, default=1e-10,
                        help="identically-singular pencil threshold (default 1e-10)")
    common.add_argument("--member-tol", type=_positive_float, default=1e-6,
                        help="relative fit residual counted as closure membership (default 1e-6)")
    common.add_argument("--max-sweeps", type=_pos_int, default=500)
    common.add_argument("--restarts", type=_nonneg_int, default=8)
    common.add_argument("--seed", type=_nonneg_int, default=0)
    common.add_argument("--output", "-o", default=None, help="write the report to this file")
    common.add_argument("--format", choices=("text", "json"), default="text")

    p = argparse.ArgumentParser(prog="gsdrank",
                                description="GSDs and rank classification of I x J x 2 arrays")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="interior/boundary/exterior label")
    c.add_argument("--input", "-i")
    c.add_argument("--batch", help="classify every *.json file in this directory")
    c.add_argument("-R", type=_pos_int, default=None,
                   help="rank for closure membership (default: square classification)")
    c.set_defaults(func=cmd_classify)

    f = sub.add_parser("fit", parents=[common], help="best-fitting GSD of size R")
    f.add_argument("--input", "-i")
    f.add_argument("-R", type=_pos_int, required=True)
    f.set_defaults(func=cmd_fit)

    d = sub.add_parser("decompose", parents=[common], help="exact GSD or CP of a square array")
    d.add_argument("--input", "-i")
    d.add_argument("--cp", action="store_true", help="rank-I CP factors of an interior point")
    d.set_defaults(func=cmd_decompose)

    q = sub.add_parser("perturb", parents=[common],
                       help="move a singular-pencil array onto a repeated eigenvalue")
    q.add_argument("--input", "-i")
    q.add_argument("--eps", type=_positive_float, default=1e-6)
    q.set_defaults(func=cmd_perturb)

    g = sub.add_parser("gen", parents=[common], help="seeded instance of a given kind")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--dims", type=_pos_int, nargs=2, metavar=("I", "J"), required=True)
    g.add_argument("-R", type=_pos_int, default=None)
    g.set_defaults(func=None)

    z = sub.add_parser("qz", parents=[common], help="real generalized Schur form of (Y1, Y2)")
    z.add_argument("--input", "-i")
    z.set_defaults(func=cmd_qz)
    return p


def _settings(args):
    keys = ("tol", "sing_tol", "member_tol", "max_sweeps", "restarts", "seed", "eps", "R")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _write(text, path, stdout):
    if path is None:
        stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def run_command(argv, stdout=None, stderr=None):
    """Run the CLI on ``argv`` and return the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    old = sys.stdout, sys.stderr
    sys.stdout, sys.stderr = stdout, stderr
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    finally:
        sys.stdout, sys.stderr = old

    try:
        if args.command == "gen":
            Y = generate_instance(args.kind, tuple(args.dims), R=args.R, seed=args.seed,
                                  tol=args.tol, sing_tol=args.sing_tol)
            _write(emit_tensor(Y) + "\n", args.output, stdout)
            return 0
        payload, digest, status = args.func(args)
        report = _clean({"command": args.command, "argv": list(argv), "input_digest": digest,
                         "settings": _settings(args), "result": payload})
        _write(render(report, args.format), args.output, stdout)
        return status
    except _UsageError as exc:
        stderr.write(f"gsdrank {args.command}: usage error: {exc}\n")
        return 2
    except (GSDRankError, ValueError, np.linalg.LinAlgError, OSError) as exc:
        stderr.write(f"gsdrank {args.command}: error: {exc}\n")
        return 1


def main(argv=None):
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
