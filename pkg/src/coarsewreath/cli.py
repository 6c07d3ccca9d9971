"""``cw``: command-line front door.

Exit codes: 0 ok, 1 property violation found, 2 input error, 3 cap exceeded.
Reports go to stdout (or ``--out DIR``) as JSON with rationals as ``"num/den"``
strings; plot data goes to ``--tsv`` files.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from ._validation import CapExceeded, PropertyViolation, as_fraction
from .io import (
    InputError,
    computed,
    dumps,
    fitted,
    load_json,
    parse_group,
    parse_instance,
    parse_metric,
    parse_points,
    parse_walls,
    point_to_json,
    tsv,
    walls_to_json,
)

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3
DATA = Path(__file__).with_name("data")


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    dp_cap: int = 14
    enum_cap: int = 1_000_000
    radius: Fraction | None = None
    out: Path | None = None
    seed: int = 0

    def __post_init__(self):
        if self.dp_cap < 1 or self.enum_cap < 1:
            raise InputError("caps must be positive")
        if self.radius is not None and self.radius < 0:
            raise InputError("radius must be nonnegative")


class _Ctx:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg

    def emit(self, name: str, report: Any) -> None:
        text = dumps(report)
        if self.cfg.out is None:
            sys.stdout.write(text)
            return
        self.cfg.out.mkdir(parents=True, exist_ok=True)
        path = self.cfg.out / f"{name}.json"
        path.write_text(text)
        print(path)


def _fixture(path: str) -> str:
    """Plain paths win; ``fixture:NAME`` resolves to the shipped data directory."""
    if path.startswith("fixture:"):
        name = path.split(":", 1)[1]
        return str(DATA / (name if name.endswith(".json") else f"{name}.json"))
    return path


def _load(path: str) -> Any:
    return load_json(_fixture(path))


def _walls_arg(value: str | None, space, default: str = "canonical"):
    from .walls import canonical_walls, cycle_walls, discrete_walls, path_walls

    value = value or default
    n = len(space)
    builders = {
        "cycle": lambda: cycle_walls(n, space.points),
        "path": lambda: path_walls(n, space.points),
        "discrete": lambda: discrete_walls(n, space.points),
        "canonical": lambda: canonical_walls(space),
    }
    if value in builders:
        return builders[value]()
    W = parse_walls(_load(value), value)
    if len(W.ground) != n:
        raise InputError(f"{value}: walls have {len(W.ground)} ground points, expected {n}")
    return W


def _lambda(args, W):
    from .lift import LambdaStructure

    return LambdaStructure(W, _walls_arg(args.sigma, W.X), _walls_arg(args.nu, W.Y), _walls_arg(args.mu, W.Z))


def _ball(cfg: RunConfig, W, y: int = 0):
    from .wreath import PointSet, ball_pointset

    if cfg.radius is None:
        total = W.size()
        if total > cfg.enum_cap:
            raise CapExceeded(f"whole space has {total} points; pass --radius", kind="enumeration",
                              cap=cfg.enum_cap, value=total)
        grids = np.stack(np.meshgrid(*([np.arange(len(W.X))] * W.n_sites), np.arange(len(W.Y)), indexing="ij"), -1)
        grids = grids.reshape(-1, W.n_sites + 1)
        return PointSet(grids[:, :-1].astype(np.int64), grids[:, -1].astype(np.int64)), "all"
    P = ball_pointset(W, W.identity_point(y), cfg.radius)
    if len(P) > cfg.enum_cap:
        raise CapExceeded(f"ball has {len(P)} points", kind="enumeration", cap=cfg.enum_cap, value=len(P))
    return P, cfg.radius


def cmd_validate(ctx: _Ctx, args) -> int:
    from .metric import check_dense, validate_metric

    obj = _load(args.input)
    report: dict[str, Any] = {"input": args.input}
    bad = False
    if isinstance(obj, dict) and "halfspaces" in obj:
        W = parse_walls(obj, args.input)
        report.update(kind="walls", ground=len(W.ground), halfspaces=len(W.halfspaces))
    elif isinstance(obj, dict) and ("lamplighter" in obj or "X" in obj):
        W = parse_instance(obj, args.input)
        for name, M in (("X", W.X), ("Y", W.Y), ("Z", W.Z)):
            rep = validate_metric(M, pseudometric=args.pseudometric)
            report[name] = {"points": len(M), "violations": [list(v) for v in rep.violations]}
            bad |= not rep.ok
        dense, witness, radius = check_dense(W.p)
        report["dense"] = {"ok": dense, "C": W.C, "needed": radius, "witness": witness}
        bad |= not dense
        report["kind"] = "instance"
    else:
        M = parse_metric(obj, args.input)
        rep = validate_metric(M, pseudometric=args.pseudometric)
        report.update(kind="metric", points=len(M), violations=[list(v) for v in rep.violations])
        bad = not rep.ok
    report["ok"] = not bad
    ctx.emit("validate", report)
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_geometry(ctx: _Ctx, args) -> int:
    from .analysis import affine_upper, lifting_modulus, poly_fit
    from .lift import hypothesis_check

    W = parse_instance(_load(args.input), args.input)
    geo = hypothesis_check(W)
    prof = lifting_modulus(W.p)
    a, b = affine_upper(W.p)
    report = {
        "deltaX": computed(geo.deltaX),
        "deltaY": computed(geo.deltaY),
        "N_C": computed(geo.NC),
        "hypotheses": geo.flags,
        "selected": geo.hypothesis,
        "lifting": {"r": list(prof.rs), "theta": computed(list(prof.theta))},
        "affine_upper": computed([a, b]),
    }
    if len(prof.rs) >= 2:
        delta, K = poly_fit(prof)
        report["poly_fit"] = fitted({"delta": delta, "K": K})
    if args.tsv:
        Path(args.tsv).write_text(tsv(["r", "theta", "raw"], zip(prof.rs, prof.theta, prof.raw)))
    ctx.emit("geometry", report)
    return EXIT_OK if geo.ok else EXIT_VIOLATION


def cmd_wreath_dist(ctx: _Ctx, args) -> int:
    from .wreath import wreath_distance

    W = parse_instance(_load(args.instance), args.instance)
    pts = parse_points(_load(args.points), W, args.points)
    if args.all:
        rows = [[i] + [wreath_distance(W, a, b, cap=ctx.cfg.dp_cap) for b in pts] for i, a in enumerate(pts)]
        sys.stdout.write(tsv(["i"] + [str(j) for j in range(len(pts))], rows))
        return EXIT_OK
    i, j = args.pair
    if not (0 <= i < len(pts) and 0 <= j < len(pts)):
        raise InputError(f"{args.points}: pair ({i}, {j}) out of range for {len(pts)} points")
    d = wreath_distance(W, pts[i], pts[j], cap=ctx.cfg.dp_cap)
    print(dumps(d).strip().strip('"'))
    return EXIT_OK


def cmd_walls(ctx: _Ctx, args) -> int:
    from .walls import Infeasible, cut_decompose, embed_lp, wall_metric_space

    if args.action == "decompose":
        M = parse_metric(_load(args.input), args.input)
        res = cut_decompose(M, cap=args.cut_cap)
        if isinstance(res, Infeasible):
            ctx.emit("decompose", {
                "feasible": False,
                "certificate": [{"pair": list(k), "c": c} for k, c in sorted(res.certificate.items())],
                "violation": res.violation,
                "verified": res.verify(M),
            })
            return EXIT_VIOLATION
        ctx.emit("decompose", {"feasible": True, "walls": walls_to_json(res)})
        return EXIT_OK
    W = parse_walls(_load(args.input), args.input)
    if args.action == "metric":
        D = wall_metric_space(W)
        ctx.emit("wall_metric", {"points": list(D.points), "dist": computed(D.matrix())})
        return EXIT_OK
    T = embed_lp(W, args.p)
    text = T.to_csv()
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_embed_wreath(ctx: _Ctx, args) -> int:
    W = parse_instance(_load(args.input), args.input)
    lam = _lambda(args, W)
    if args.points:
        pts = parse_points(_load(args.points), W, args.points)
        from .wreath import PointSet

        P = PointSet.from_points(pts, W.n_sites, W.x0)
    else:
        P, _ = _ball(ctx.cfg, W)
    T = lam.embedding(P)
    n = len(P)
    ia, ib = np.triu_indices(n, 1)
    emb, den = T.pair_pnorm_ints(ia, ib)
    direct = lam.pair_ints(P, ia, P, ib)
    ok = bool((emb * lam.den == direct * den).all())
    if args.csv:
        Path(args.csv).write_text(T.to_csv())
    ctx.emit("embed_wreath", {
        "points": n,
        "dimension": T.dim,
        "isometric": ok,
        "distances_checked": int(len(ia)),
    })
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_certify(ctx: _Ctx, args) -> int:
    from .analysis import certify_c1c2, compute_moduli
    from .lift import LambdaStructure

    W = parse_instance(_load(args.input), args.input)
    lam = _lambda(args, W)
    P, radius = _ball(ctx.cfg, W)
    moduli = compute_moduli(lam, hypothesis=args.hypothesis)
    target = lam
    if args.mutate is not None:
        factor = as_fraction(args.mutate)
        target = LambdaStructure(W, lam.sigma.scaled(factor, index=args.mutate_index), lam.nu, lam.mu)
    rep = certify_c1c2(target, P, moduli=moduli)
    ctx.emit("certify", {
        "points": rep.n_points,
        "pairs": rep.n_pairs,
        "ball_radius": radius,
        "hypothesis": rep.hypothesis,
        "radii_checked": {"C1": rep.checked_c1, "C2": rep.checked_c2},
        "violations": [{**v, "pair": [point_to_json(p) for p in P.take(list(v["pair"])).to_points(W.x0)]}
                       for v in rep.violations],
        "mutated": args.mutate is not None,
        "ok": rep.ok,
    })
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def cmd_compress(ctx: _Ctx, args) -> int:
    from ._pool import pmap
    from .analysis import compression_fit

    W = parse_instance(_load(args.input), args.input)
    lam = _lambda(args, W)
    P, radius = _ball(ctx.cfg, W)
    from .wreath import WreathMetric

    n = len(P)
    rng = np.random.default_rng(ctx.cfg.seed)
    if n * (n - 1) // 2 <= args.sample:
        ia, ib = np.triu_indices(n, 1)
    else:
        ia, ib = rng.integers(0, n, args.sample), rng.integers(0, n, args.sample)
    metric = WreathMetric(W)
    metric.prepare(range(len(W.Y)))
    chunk = 100_000

    def work(s):
        a, b = ia[s : s + chunk], ib[s : s + chunk]
        return metric.pair_ints(P, a, P, b), lam.pair_ints(P, a, P, b)

    parts = pmap(work, range(0, len(ia), chunk))
    d = np.concatenate([p[0] for p in parts]) / W.den
    e = np.concatenate([p[1] for p in parts]) / lam.den
    fit = compression_fit(d, e, r=args.r)
    report = {
        "points": n,
        "pairs": int(len(ia)),
        "ball_radius": radius,
        "fit": fitted({"r": fit.r, "C": fit.C, "D": fit.D}),
        "feasible": fit.feasible,
    }
    if args.tsv:
        keep = d > 0
        ts, inv = np.unique(d[keep], return_inverse=True)
        lo = np.full(len(ts), np.inf)
        hi = np.zeros(len(ts))
        np.minimum.at(lo, inv, e[keep])
        np.maximum.at(hi, inv, e[keep])
        rows = zip(ts, lo, hi, ts**fit.r / fit.C - fit.D, fit.C * ts + fit.D)
        Path(args.tsv).write_text(tsv(["d", "dlambda_min", "dlambda_max", "lower_bound", "upper_bound"], rows))
    ctx.emit("compress", report)
    return EXIT_OK if fit.feasible else EXIT_VIOLATION


def _k_chain(text: str | None, levels: int) -> list[list[int]]:
    if text is None:
        return [[0]] * levels
    text = text.strip()
    if text.startswith("["):
        try:
            return [[int(x) for x in K] for K in json.loads(text)]
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise InputError(f"--K: {exc}") from exc
    try:
        return [[int(x) for x in part.split(",") if x.strip()] for part in text.split(";")]
    except ValueError as exc:
        raise InputError(f"--K: {exc}") from exc


def cmd_boxspace(ctx: _Ctx, args) -> int:
    from .boxspace import box_embedding, build_wreath_chain, check_M_chain, finite_H_box
    from .groups import cyclic

    G = parse_group(_load(args.lamp), args.lamp) if not args.lamp.isdigit() else cyclic(int(args.lamp))
    if args.top is not None:
        Ks = _k_chain(args.K, len(args.K.split(";")) if args.K else 1)
        chain = finite_H_box(G, Ks, cyclic(args.top))
    else:
        try:
            ns = [int(x) for x in args.chain.split(",")]
        except ValueError as exc:
            raise InputError(f"--chain: {exc}") from exc
        chain = build_wreath_chain(G, _k_chain(args.K, len(ns)), ns)
    rep = check_M_chain(chain, args.L)
    emb = box_embedding(chain, with_tables=False)
    report = {
        "orders": computed([lev.order for lev in chain.levels]),
        "notice": chain.notice,
        "chain": {"index_ok": rep.index_ok, "nested_ok": rep.nested_ok, "trivial_ok": rep.trivial_ok,
                  "ball_elements": rep.ball_size, "witnesses": rep.witnesses},
        "embedding": {"offsets": computed(emb.offsets), "rho_minus": computed([list(r) for r in emb.rho.table()]),
                      "unbounded": emb.unbounded, "growth_K": computed(emb.growth_K),
                      "offset_ok": emb.offset_ok, "valid_everywhere": emb.valid_everywhere,
                      "witnesses": emb.witnesses},
        "ok": rep.ok and emb.ok,
    }
    if args.tsv:
        Path(args.tsv).write_text(tsv(["t", "rho_minus"], emb.rho.table()))
    ctx.emit("boxspace", report)
    return EXIT_OK if report["ok"] else EXIT_VIOLATION


def cmd_selftest(ctx: _Ctx, args) -> int:
    from .acceptance import run_suite

    ids = [int(x) for x in args.only.split(",")] if args.only else None
    results = run_suite(ctx.cfg.seed, ids)
    for r in results:
        print(r.line(), file=sys.stderr)
    ctx.emit("selftest", {"seed": ctx.cfg.seed, "criteria": [r.as_dict() for r in results],
                          "passed": all(r.passed for r in results)})
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION


def _add_walls_opts(p: argparse.ArgumentParser) -> None:
    for name, where in (("sigma", "X"), ("nu", "Y"), ("mu", "Z")):
        p.add_argument(f"--{name}", help=f"walls on {where}: cycle, path, discrete, canonical or a JSON file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cw", description="Exact coarse geometry of wreath-type spaces.")
    ap.add_argument("--out", type=Path, help="write JSON reports into this directory")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--dp-cap", type=int, default=14, help="largest support handled by the path DP")
    ap.add_argument("--enum-cap", type=int, default=1_000_000, help="largest point set enumerated")
    ap.add_argument("--radius", type=str, help="closed ball radius around the base point (rational)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check metric axioms of a metric, instance or walls file")
    p.add_argument("input")
    p.add_argument("--pseudometric", action="store_true")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("geometry", help="discreteness, bounded geometry and lifting profile of an instance")
    p.add_argument("input")
    p.add_argument("--tsv", help="write the lifting profile as TSV")
    p.set_defaults(fn=cmd_geometry)

    p = sub.add_parser("wreath-dist", help="exact wreath distance between points")
    p.add_argument("instance")
    p.add_argument("points")
    p.add_argument("--pair", type=int, nargs=2, default=(0, 1), metavar=("I", "J"))
    p.add_argument("--all", action="store_true", help="print the full distance matrix as TSV")
    p.set_defaults(fn=cmd_wreath_dist)

    p = sub.add_parser("walls", help="wall metric, Lp coordinates or cut decomposition")
    p.add_argument("action", choices=["metric", "embed", "decompose"])
    p.add_argument("input")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--csv")
    p.add_argument("--cut-cap", type=int, default=12)
    p.set_defaults(fn=cmd_walls)

    p = sub.add_parser("embed-wreath", help="explicit coordinates of the assembled walls metric")
    p.add_argument("input")
    p.add_argument("--points")
    p.add_argument("--csv")
    _add_walls_opts(p)
    p.set_defaults(fn=cmd_embed_wreath)

    p = sub.add_parser("certify", help="certify both distortion bounds on a ball")
    p.add_argument("input")
    p.add_argument("--hypothesis")
    p.add_argument("--mutate", help="scale one sigma halfspace weight by this factor")
    p.add_argument("--mutate-index", type=int, default=0)
    _add_walls_opts(p)
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("compress", help="fit compression constants on a ball")
    p.add_argument("input")
    p.add_argument("--r", type=float, help="fix the exponent and fit only C, D")
    p.add_argument("--sample", type=int, default=200_000)
    p.add_argument("--tsv", help="write the distance envelope and fitted bounds as TSV")
    _add_walls_opts(p)
    p.set_defaults(fn=cmd_compress)

    p = sub.add_parser("boxspace", help="wreath box space chain checks and uniform embedding")
    p.add_argument("--lamp", default="2", help="order of a cyclic lamp group or a group JSON file")
    p.add_argument("--chain", default="2,4,8", help="comma-separated moduli n_i")
    p.add_argument("--K", help="subgroups K_i: 'a,b;c;...' or a JSON list of lists")
    p.add_argument("--top", type=int, help="use a finite cyclic top group of this order instead of Z")
    p.add_argument("--L", type=int, default=6, help="ball radius for the triviality check")
    p.add_argument("--tsv", help="write the uniform lower modulus as TSV")
    p.set_defaults(fn=cmd_boxspace)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.add_argument("--only", help="comma-separated criterion ids")
    p.set_defaults(fn=cmd_selftest)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        radius = as_fraction(args.radius) if args.radius is not None else None
        cfg = RunConfig(args.command, [], args.dp_cap, args.enum_cap, radius, args.out, args.seed)
        return args.fn(_Ctx(cfg), args)
    except InputError as exc:
        print(f"cw: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(json.dumps(exc.as_dict(), sort_keys=True), file=sys.stderr)
        return EXIT_CAP
    except PropertyViolation as exc:
        print(f"cw: violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        print(f"cw: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
