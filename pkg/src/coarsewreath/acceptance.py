"""The acceptance suite: eight desk-scale checks, each an exact oracle comparison or a certified inequality.

Every check returns deterministic details (no timings) so that reports are
byte-identical for a fixed seed.  Wall-clock time is returned separately.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from ._pool import pmap
from .analysis import (
    certify_c1c2,
    comp_lower_bound,
    compression_fit,
    compute_moduli,
    lifting_modulus,
    poly_fit,
)
from .boxspace import box_embedding, build_wreath_chain, check_M_chain
from .groups import cyclic
from .instances import random_instance, random_path_problem, random_walls, separating_walls
from .lift import LambdaStructure, LiftedWalls, hypothesis_check, lift_embedding, lift_metric, support_gauge
from .metric import DenseMap, cycle_metric
from .walls import (
    WallsStructure,
    cut_decompose,
    cycle_walls,
    embed_l1,
    embed_lp,
    path_walls,
    wall_metric,
    wall_metric_space,
)
from .wreath import (
    PointSet,
    WreathMetric,
    WreathPoint,
    ball_pointset,
    group_metric_crosscheck,
    lamplighter_instance,
    path_through,
    path_through_bruteforce,
)

__all__ = ["CriterionResult", "CRITERIA", "LIMITS", "run_criterion", "run_suite"]

# seconds allowed per criterion
LIMITS = {1: 60, 2: 30, 3: 10, 4: 60, 5: 120, 6: 60, 7: 300, 8: 300}


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"criterion {self.id} [{mark}] {self.name} ({self.elapsed:.2f}s, limit {LIMITS[self.id]}s)"

    def as_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "passed": self.passed, "details": self.details}


def _rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng([seed, k])


def criterion_1(seed: int) -> CriterionResult:
    cases = [(2, 2), (2, 3), (2, 4), (2, 5), (3, 3)]
    gaps = {}
    for g, h in cases:
        gaps[f"Z/{g} wr Z/{h}"] = group_metric_crosscheck(cyclic(g), cyclic(h))
    return CriterionResult(1, "group metric equals BFS word metric", all(v == 0 for v in gaps.values()),
                           {"max_gap": gaps})


def criterion_2(seed: int) -> CriterionResult:
    rng = _rng(seed, 2)
    bad, sizes = [], [0] * 7
    for k in range(300):
        P = random_path_problem(rng)
        sizes[len(P.fibers)] += 1
        a, b = path_through(P), path_through_bruteforce(P)
        if a != b:
            bad.append({"instance": k, "dp": a, "oracle": b})
    return CriterionResult(2, "subset DP equals permutation x lift enumeration", not bad,
                           {"instances": 300, "by_support_size": sizes, "mismatches": bad[:5]})


def criterion_3(seed: int) -> CriterionResult:
    rng = _rng(seed, 3)
    bad = 0
    for _ in range(200):
        n = int(rng.integers(1, 11))
        W = random_walls(rng, n)
        direct = [[wall_metric(W, i, j) for j in range(n)] for i in range(n)]
        tables = [embed_l1(W)] + [embed_lp(W, p) for p in (1, 2, 3)]
        for T in tables:
            if T.pairwise_pnorm_p() != direct:
                bad += 1
    return CriterionResult(3, "walls embeddings are exact isometries (p = 1, 2, 3)", bad == 0,
                           {"structures": 200, "defective_tables": bad})


def _all_points(nX: int, nZ: int, nY: int) -> PointSet:
    grids = np.stack(np.meshgrid(*([np.arange(nX)] * nZ), np.arange(nY), indexing="ij"), -1).reshape(-1, nZ + 1)
    return PointSet(grids[:, :nZ].astype(np.int64), grids[:, nZ].astype(np.int64))


def _triangle_ok(D: np.ndarray) -> bool:
    for j in range(D.shape[0]):
        if (D > D[:, j : j + 1] + D[j : j + 1, :]).any():
            return False
    return True


def criterion_4(seed: int) -> CriterionResult:
    rng = _rng(seed, 4)
    defects = triangle = 0
    for _ in range(100):
        nZ, nY = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        W = random_instance(rng, 2, nY, nZ)
        L = LiftedWalls(random_walls(rng, nZ), support_gauge(W))
        P = _all_points(2, nZ, nY)
        z = np.asarray(W.p.values, dtype=np.int64)[P.y]
        T = lift_embedding(L, P, z=z)
        n = len(P)
        ia, ib = (g.ravel() for g in np.meshgrid(np.arange(n), np.arange(n), indexing="ij"))
        emb, den = T.pair_pnorm_ints(ia, ib)
        pts = [WreathPoint(p.lamps, int(zz)) for p, zz in zip(P.to_points(0), z)]
        direct = np.array([[lift_metric(L, a, b) * den for b in pts] for a in pts], dtype=object)
        if not all(int(x) == int(v) for x, v in zip(direct.ravel(), emb)) or any(
            v.denominator != 1 for v in direct.ravel()
        ):
            defects += 1
        if not _triangle_ok(emb.reshape(n, n)) or not (emb.reshape(n, n) == emb.reshape(n, n).T).all():
            triangle += 1
    return CriterionResult(4, "lifted walls embedding is isometric; lifted metric is a pseudometric",
                           defects == 0 and triangle == 0,
                           {"instances": 100, "isometry_defects": defects, "pseudometric_failures": triangle})


def _ball_at_least(W, target: int) -> tuple[PointSet, Fraction]:
    center = W.identity_point(0)
    r = Fraction(0)
    while True:
        P = ball_pointset(W, center, r)
        if len(P) >= target or len(P) == W.size():
            return P, r
        r += 1


def _certify_case(name: str, lam: LambdaStructure, P: PointSet, radius) -> dict:
    rep = certify_c1c2(lam, P)
    return {"case": name, "points": rep.n_points, "pairs": rep.n_pairs, "ball_radius": radius,
            "hypothesis": rep.hypothesis, "violations": len(rep.violations)}


def criterion_5(seed: int) -> CriterionResult:
    rows = []
    C5 = lamplighter_instance(5)
    lam5 = LambdaStructure(C5, cycle_walls(2), cycle_walls(5), cycle_walls(5))
    full5 = _all_points(2, 5, 5)
    rows.append(_certify_case("C5 lamplighter, whole space", lam5, full5, "all"))
    C8 = lamplighter_instance(8)
    P8, r8 = _ball_at_least(C8, 500)
    rows.append(_certify_case("C8 lamplighter ball", LambdaStructure(C8, cycle_walls(2), cycle_walls(8), cycle_walls(8)), P8, r8))
    rng = _rng(seed, 5)
    made = 0
    while made < 2:
        W = random_instance(rng, 3, 5, 5)
        if not hypothesis_check(W).ok:
            continue
        lam = LambdaStructure(W, separating_walls(rng, 3), separating_walls(rng, 5), separating_walls(rng, 5))
        P, r = _ball_at_least(W, 500)
        rows.append(_certify_case(f"random instance {made + 1} (C = {W.C})", lam, P, r))
        made += 1
    moduli = compute_moduli(lam5)
    mutant = LambdaStructure(C5, cycle_walls(2).scaled(10, index=0), cycle_walls(5), cycle_walls(5))
    mrep = certify_c1c2(mutant, full5, moduli=moduli)
    witness = mrep.violations[0] if mrep.violations else None
    if witness:
        a, b = (full5.take([i]).to_points(0)[0] for i in witness["pair"])
        witness = {**witness, "pair": [str(a), str(b)]}
    big_enough = all(r["points"] >= 500 for r in rows[1:])
    passed = all(r["violations"] == 0 for r in rows) and big_enough and len(mrep.violations) >= 1
    return CriterionResult(5, "C1/C2 certification and mutation witness", passed,
                           {"cases": rows, "mutation_violations": len(mrep.violations), "mutation_witness": witness})


def criterion_6(seed: int) -> CriterionResult:
    rng = _rng(seed, 6)
    bad = 0
    for _ in range(100):
        n = int(rng.integers(1, 9))
        W = random_walls(rng, n)
        target = wall_metric_space(W)
        res = cut_decompose(target)
        if not isinstance(res, WallsStructure) or wall_metric_space(res).matrix() != target.matrix():
            bad += 1
    C5 = cycle_metric(5)
    res = cut_decompose(C5)
    c5_ok = isinstance(res, WallsStructure) and wall_metric_space(res).matrix() == C5.matrix()
    return CriterionResult(6, "cut decomposition round trip", bad == 0 and c5_ok,
                           {"structures": 100, "failures": bad, "C5_reconstructs": c5_ok,
                            "C5_cuts": len(res) if isinstance(res, WallsStructure) else None})


def _chunked_pairs(metric: WreathMetric, lam: LambdaStructure, P: PointSet, ia, ib, chunk: int = 100_000):
    metric.prepare(range(len(metric.W.Y)))

    def work(s):
        a, b = ia[s : s + chunk], ib[s : s + chunk]
        return metric.pair_ints(P, a, P, b), lam.pair_ints(P, a, P, b)

    parts = pmap(work, range(0, len(ia), chunk))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def criterion_7(seed: int) -> CriterionResult:
    Cn = cycle_metric(32)
    delta, K = poly_fit(lifting_modulus(DenseMap.identity(Cn)))
    bound = comp_lower_bound(1, 1, 1, 1)
    W = lamplighter_instance(16, shape="path")
    radius = 32
    P = ball_pointset(W, W.identity_point(0), radius)
    lam = LambdaStructure(W, cycle_walls(2), path_walls(16), path_walls(16))
    rng = _rng(seed, 7)
    n = len(P)
    centre = int(np.flatnonzero((P.F == 0).all(axis=1) & (P.y == 0))[0])
    sample = 200_000
    ia = np.concatenate([np.full(n, centre), rng.integers(0, n, sample)])
    ib = np.concatenate([np.arange(n), rng.integers(0, n, sample)])
    d, dl = _chunked_pairs(WreathMetric(W), lam, P, ia, ib)
    d = d / W.den
    dl = dl / lam.den
    fit = compression_fit(d, dl, r=0.5)
    free = compression_fit(d, dl)
    passed = abs(delta - 1) <= 0.01 and bound == Fraction(1, 2) and fit.feasible and radius >= 32
    return CriterionResult(7, "lifting exponent, lower bound and compression feasibility", passed, {
        "poly_fit": {"delta": delta, "K": K, "provenance": "fitted"},
        "comp_lower_bound": bound,
        "ball_radius": radius,
        "ball_points": n,
        "pairs": int(len(ia)),
        "compression_at_half": {"C": fit.C, "D": fit.D, "feasible": fit.feasible, "provenance": "fitted"},
        "compression_estimate": {"r": free.r, "provenance": "fitted"},
    })


def criterion_8(seed: int) -> CriterionResult:
    chain = build_wreath_chain(cyclic(2), [[0], [0], [0]], (2, 4, 8))
    orders = [lev.order for lev in chain.levels]
    rep = check_M_chain(chain, 6)
    emb = box_embedding(chain, with_tables=False)
    passed = orders == [8, 64, 2048] and rep.ok and emb.ok
    return CriterionResult(8, "box space chain, nesting, triviality and uniform envelope", passed, {
        "orders": orders,
        "index_ok": rep.index_ok,
        "nested_ok": rep.nested_ok,
        "trivial_ok": rep.trivial_ok,
        "ball_elements": rep.ball_size,
        "offsets": emb.offsets,
        "rho_minus": [[t, v] for t, v in emb.rho.table()],
        "unbounded": emb.unbounded,
        "growth_K": emb.growth_K,
        "offset_ok": emb.offset_ok,
    })


CRITERIA: dict[int, Callable[[int], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
}


def run_criterion(k: int, seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    res = CRITERIA[k](seed)
    res.elapsed = time.perf_counter() - t0
    return res


def run_suite(seed: int = 0, ids=None) -> list[CriterionResult]:
    return [run_criterion(k, seed) for k in (ids or sorted(CRITERIA))]
