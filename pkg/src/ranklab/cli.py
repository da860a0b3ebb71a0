"""Command-line interface.

Exit codes: 0 success, 1 axiom violations found, 2 invalid input,
3 solver failure, 4 external procedure broke the protocol. Errors are
printed to stderr as JSON ``{"error": CODE, "message": ...}``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import axioms, implicit, io, orders, paretian
from .errors import ProtocolError, RanklabError, SolverError, ValidationError
from .generate import MODES, GeneratorConfig, generate_profiles
from .procedures import METHODS, get_procedure
from .profile import ScoreVector, default_tolerance

EXIT_OK, EXIT_VIOLATIONS, EXIT_VALIDATION, EXIT_SOLVER, EXIT_PROTOCOL = 0, 1, 2, 3, 4

IMPLICIT_METHODS = {
    "grs": "grs", "zermelo": "zermelo", "katz": "katz", "lsq": "lsq",
    "daniels-lin": "daniels-lin", "daniels-ratio": "daniels-ratio", "cowden": "cowden",
}
REPORTED_WITNESSES = 5
STORED_VIOLATIONS = 1000


def _emit(args, payload: dict, text: str | None = None) -> None:
    out = text if text is not None else io.dumps(payload) + "\n"
    if getattr(args, "out", None) and args.command in ("score", "kemeny", "choice", "extend", "residual"):
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)


def _tolerance(args) -> float:
    return default_tolerance() if args.tol is None else args.tol


def _procedure(args):
    if getattr(args, "exec", None):
        return io.external_procedure(args.exec)
    if not args.method:
        raise ValidationError("give --method or --exec")
    return get_procedure(
        args.method,
        epsilon=args.eps,
        points=io.read_vector(args.points) if args.points else None,
        lobby=io.read_vector(args.lobby) if args.lobby else None,
        nu=args.nu,
    )


def _scores_payload(s: ScoreVector) -> dict:
    return {"scores": io.numbers(s.scores)}


# --- subcommands ------------------------------------------------------------


def cmd_score(args) -> int:
    profile = io.read_profile(args.input)
    s = _procedure(args)(profile)
    s = ScoreVector(s.scores, _tolerance(args))
    if args.format == "csv":
        lines = ["alternative,score"] + [f"{i},{v!r}" for i, v in enumerate(io.numbers(s.scores), start=1)]
        _emit(args, {}, "\n".join(lines) + "\n")
    else:
        payload = _scores_payload(s)
        if args.ranking:
            payload["ranking"] = orders.ranking_from_scores(s).tolist()
        _emit(args, payload)
    return EXIT_OK


def cmd_residual(args) -> int:
    if args.method not in IMPLICIT_METHODS:
        raise ValidationError(f"residuals exist for implicit methods only: {', '.join(IMPLICIT_METHODS)}")
    profile = io.read_profile(args.input)
    eps = args.eps
    if eps is None and args.method == "grs":
        eps = 1.0
    elif eps is None and args.method == "katz":
        eps = implicit.katz_default_epsilon(profile)
    spec = implicit.ImplicitProcedureSpec(IMPLICIT_METHODS[args.method], eps)
    s = np.array(io.read_vector(args.scores))
    r = implicit.residual(spec, profile, s)
    _emit(args, {"residuals": io.numbers(r), "max_abs": io.number(np.abs(r).max())})
    return EXIT_OK


def _generator(args) -> GeneratorConfig:
    base = axioms.FUZZ_DEFAULTS
    return GeneratorConfig(
        n_min=args.n_min if args.n_min is not None else base.n_min,
        n_max=args.n_max if args.n_max is not None else base.n_max,
        m_min=args.m_min if args.m_min is not None else base.m_min,
        m_max=args.m_max if args.m_max is not None else base.m_max,
        mode=args.mode or base.mode,
        seed=args.seed,
    )


def cmd_check(args, argv) -> int:
    proc = _procedure(args)
    gen = _generator(args)
    t0 = time.perf_counter()
    summary = axioms.fuzz_axiom(proc, args.axiom, args.trials, args.seed, gen, _tolerance(args))
    elapsed = time.perf_counter() - t0
    result = summary.to_dict()
    found = result.pop("violations")
    result["violation_count"] = len(found)
    result["passed"] = summary.passed
    if args.out:
        report = io.RunReport(
            list(argv),
            {"axiom": summary.axiom, "procedure": proc.name, "trials": args.trials, "seed": args.seed,
             "generator": vars(gen), "tolerance": _tolerance(args)},
            dict(result, violations=found[:STORED_VIOLATIONS]),
            elapsed,
        )
        report.write(args.out)
    result["witnesses"] = found[:REPORTED_WITNESSES]
    sys.stdout.write(io.dumps(result) + "\n")
    return EXIT_OK if summary.passed else EXIT_VIOLATIONS


def cmd_kemeny(args) -> int:
    profile = io.read_profile(args.input)
    _emit(args, orders.kemeny_median(profile, args.cap).to_dict())
    return EXIT_OK


def cmd_choice(args) -> int:
    profile = io.read_profile(args.input)
    if args.method == "closeness":
        choice = orders.closeness_to_unanimity_choice(profile)
    else:
        s = _procedure(args)(profile)
        choice = orders.choice_from_scores(ScoreVector(s.scores, _tolerance(args)))
    _emit(args, {"choice": choice.tolist()})
    return EXIT_OK


def cmd_extend(args) -> int:
    pset = io.paretian_from_dict(json.loads(Path(args.paretian).read_text()))
    queries = io.read_queries(args.queries)
    if queries.shape[1] != pset.k:
        raise ValidationError(f"queries have {queries.shape[1]} coordinates, the set has {pset.k}")
    if args.cube:
        ext = paretian.CubeExtension(pset.points, pset.values, pset.f_min, pset.f_max)
        values = [ext(q) for q in queries]
    else:
        values = [paretian.extend_evaluate(pset, q) for q in queries]
    _emit(args, {"values": io.numbers(values)})
    return EXIT_OK


def cmd_generate(args) -> int:
    cfg = GeneratorConfig(
        n_min=args.n_min if args.n_min is not None else 2,
        n_max=args.n_max if args.n_max is not None else 6,
        m_min=args.m_min if args.m_min is not None else 1,
        m_max=args.m_max if args.m_max is not None else 5,
        mode=args.mode or "interior",
        seed=args.seed,
    )
    lines = "".join(io.dumps_profile(p) + "\n" for p in generate_profiles(cfg, args.count))
    if args.out:
        Path(args.out).write_text(lines)
    else:
        sys.stdout.write(lines)
    return EXIT_OK


def cmd_compare(args) -> int:
    """Majorizations between alternatives of two profiles and whether scores respect them."""
    a = io.read_profile(args.input)
    b = io.read_profile(args.other) if args.other else a
    proc = _procedure(args)
    tol = _tolerance(args)
    sa, sb = proc(a).scores, proc(b).scores
    pairs = []
    for i in range(1, a.n + 1):
        for j in range(1, b.n + 1):
            w = axioms.majorizes(axioms.performance_multiset(a, sa, i), axioms.performance_multiset(b, sb, j), tol)
            if w is not None and not (args.other is None and i == j):
                pairs.append({"i": i, "j": j, "strict": w.strict, "score_i": io.number(sa[i - 1]),
                              "score_j": io.number(sb[j - 1])})
    violations = axioms.check_self_consistency(proc, a, b if args.other else None, tol)
    payload = {
        "majorizations": pairs,
        "violations": [{"i": v.i, "j": v.j, "kind": v.kind, "gap": v.gap} for v in violations],
    }
    sys.stdout.write(io.dumps(payload) + "\n")
    return EXIT_VIOLATIONS if violations else EXIT_OK


# --- parser -----------------------------------------------------------------


def _add_method(p, required: bool = False, extra=()):
    p.add_argument("--method", choices=METHODS + tuple(extra), required=required)
    p.add_argument("--eps", type=float, help="epsilon for grs (default 1) and katz (default 1/(2m(n-1)))")
    p.add_argument("--nu", type=float, help="weight of point scores in a convex combination")
    p.add_argument("--points", metavar="FILE", help="positional weights w_0..w_{n-1}")
    p.add_argument("--lobby", metavar="FILE", help="lobby weights w_0..w_m")


def _add_common(p):
    p.add_argument("--tol", type=float, help="score comparison tolerance (default RANKLAB_TOL or 1e-9)")
    p.add_argument("--out", metavar="FILE")


def _add_generator(p):
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--m-min", type=int)
    p.add_argument("--m-max", type=int)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ranklab", description="Scores from paired comparisons.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score the alternatives of a profile")
    _add_method(p)
    p.add_argument("--exec", metavar="CMD", help="external procedure (stdin profile, stdout scores)")
    p.add_argument("--input", nargs="+", required=True, metavar="FILE")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--ranking", action="store_true", help="also print the induced ranking")
    _add_common(p)

    p = sub.add_parser("residual", help="residuals of an implicit system at given scores")
    _add_method(p, required=True)
    p.add_argument("--input", nargs="+", required=True, metavar="FILE")
    p.add_argument("--scores", required=True, metavar="FILE")
    _add_common(p)

    p = sub.add_parser("check", help="fuzz an axiom")
    names = [a.replace("_", "-") for a in axioms.AXIOMS]
    p.add_argument("--axiom", required=True, choices=names + [a for a in axioms.AXIOMS if a not in names])
    _add_method(p)
    p.add_argument("--exec", metavar="CMD")
    p.add_argument("--trials", type=int, default=1000)
    _add_generator(p)
    _add_common(p)

    p = sub.add_parser("kemeny", help="exact Kemeny median")
    p.add_argument("--input", nargs="+", required=True, metavar="FILE")
    p.add_argument("--cap", type=int, default=orders.KEMENY_CAP)
    _add_common(p)

    p = sub.add_parser("choice", help="top stratum of a method, or the closeness-to-unanimity choice")
    _add_method(p, extra=("closeness",))
    p.add_argument("--exec", metavar="CMD")
    p.add_argument("--input", nargs="+", required=True, metavar="FILE")
    _add_common(p)

    p = sub.add_parser("extend", help="evaluate the increasing extension of a Paretian set")
    p.add_argument("--paretian", required=True, metavar="FILE")
    p.add_argument("--queries", required=True, metavar="FILE")
    p.add_argument("--cube", action="store_true", help="points and queries are already in the open unit cube")
    _add_common(p)

    p = sub.add_parser("generate", help="seeded random profiles, one JSON object per line")
    _add_generator(p)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--out", metavar="FILE")

    p = sub.add_parser("compare", help="majorizations between alternatives of two profiles")
    _add_method(p)
    p.add_argument("--exec", metavar="CMD")
    p.add_argument("--input", nargs="+", required=True, metavar="FILE")
    p.add_argument("--other", nargs="+", metavar="FILE", help="second profile (default: the first)")
    p.add_argument("--tol", type=float)
    return parser


def _fail(code: str, message: str, status: int) -> int:
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")
    return status


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            return cmd_check(args, argv)
        return {
            "score": cmd_score, "residual": cmd_residual, "kemeny": cmd_kemeny,
            "choice": cmd_choice, "extend": cmd_extend, "generate": cmd_generate,
            "compare": cmd_compare,
        }[args.command](args)
    except ProtocolError as exc:
        return _fail(exc.code, str(exc), EXIT_PROTOCOL)
    except SolverError as exc:
        return _fail(exc.code, str(exc), EXIT_SOLVER)
    except RanklabError as exc:
        return _fail(exc.code, str(exc), EXIT_VALIDATION)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        return _fail("VALIDATION", str(exc), EXIT_VALIDATION)


if __name__ == "__main__":
    sys.exit(main())
