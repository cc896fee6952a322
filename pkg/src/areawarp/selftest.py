"""Geometry self-test corpus and oracle-equivalence runner.

Three tiers of triangle pairs are exercised:

* seventeen frozen topological configurations, labelled ``v1 is s2 v2``
  (vertices of T1 inside T2, side crossings, sides of T2 crossed, vertices
  of T2 inside T1) with ``a``/``b`` suffixes where one label admits two
  arrangements;
* a structured set of degenerate configurations (shared vertices and
  sides, vertices on sides, collinear overlaps) plus seeded random pairs
  snapped onto each other's edges, since no finite degenerate taxonomy is
  provably exhaustive;
* seeded random pairs.

Every pair must agree with the half-plane clipping oracle to a relative
tolerance and with the Monte Carlo oracle to four standard errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import signed_area, triangle_intersection_area
from .oracles import clip_oracle_area, mc_area_batch

CLIP_RTOL = 1e-10
MC_SIGMAS = 4.0

# Frozen topological corpus; integer coordinates keep the classification
# exact, scaled to unit size. Labels follow the v1-is-s2-v2 scheme.
_T = 1.0 / 16.0
TOPOLOGICAL_CASES = [
    ("0000", [(0, 0), (4, 0), (0, 4)], [(9, 9), (13, 9), (9, 13)]),
    ("0003", [(13, 11), (9, 4), (3, 14)], [(10, 6), (9, 10), (5, 11)]),
    ("0221", [(10, 2), (11, 13), (1, 14)], [(7, 10), (4, 2), (5, 5)]),
    ("0222", [(1, 2), (1, 7), (14, 13)], [(5, 8), (9, 0), (7, 8)]),
    ("0420", [(0, 4), (14, 6), (9, 7)], [(4, 7), (13, 0), (12, 4)]),
    ("0431a", [(5, 8), (12, 7), (3, 13)], [(9, 10), (8, 9), (12, 5)]),
    ("0431b", [(8, 13), (8, 0), (0, 14)], [(1, 3), (7, 7), (10, 13)]),
    ("0630", [(9, 7), (5, 11), (9, 1)], [(11, 0), (5, 13), (7, 5)]),
    ("1210", [(0, 4), (1, 12), (6, 4)], [(1, 13), (14, 13), (0, 6)]),
    ("1221", [(2, 13), (8, 6), (5, 1)], [(14, 4), (1, 14), (4, 8)]),
    ("1222", [(12, 5), (4, 7), (1, 3)], [(6, 5), (5, 14), (3, 4)]),
    ("1420a", [(7, 2), (2, 8), (7, 6)], [(12, 7), (0, 0), (2, 7)]),
    ("1420b", [(3, 2), (0, 14), (6, 12)], [(1, 14), (9, 6), (1, 0)]),
    ("1431", [(10, 4), (3, 13), (5, 7)], [(8, 6), (1, 8), (12, 10)]),
    ("2210", [(4, 6), (2, 12), (14, 6)], [(13, 4), (1, 13), (0, 1)]),
    ("2221", [(11, 11), (9, 6), (14, 8)], [(13, 8), (12, 14), (6, 3)]),
    ("3000", [(4, 3), (7, 4), (5, 4)], [(1, 3), (14, 2), (11, 12)]),
]

# Structured degenerate configurations against the reference triangle
# R = {(0,0),(8,0),(0,8)}: shared vertices/sides, vertices on sides,
# collinear overlaps, inscribed and mirrored placements.
_R = [(0, 0), (8, 0), (0, 8)]
DEGENERATE_CASES = [
    ("identical", [(0, 0), (8, 0), (0, 8)], _R),
    ("identical-rotated-order", [(8, 0), (0, 8), (0, 0)], _R),
    ("mirror-across-shared-side", [(0, 0), (8, 0), (8, -8)], _R),
    ("shared-side-vertex-inside", [(0, 0), (8, 0), (2, 2)], _R),
    ("shared-side-scaled-outward", [(0, 0), (8, 0), (4, -12)], _R),
    ("shared-subside-outside", [(2, 0), (6, 0), (4, -4)], _R),
    ("shared-subside-inside", [(2, 0), (6, 0), (3, 3)], _R),
    ("shared-vertex-inside", [(0, 0), (3, 1), (1, 3)], _R),
    ("shared-vertex-touch-outside", [(0, 0), (-4, -1), (-1, -4)], _R),
    ("shared-vertex-interpenetrating", [(0, 0), (4, -2), (2, 6)], _R),
    ("shared-two-vertices-median-cut", [(0, 0), (8, 0), (4, 4)], _R),
    ("vertex-on-side-touch", [(4, 0), (8, -6), (1, -6)], _R),
    ("vertex-on-side-poking-in", [(4, 0), (6, 3), (8, -5)], _R),
    ("vertex-on-side-inside", [(4, 0), (2, 3), (1, 1)], _R),
    ("vertex-on-hypotenuse-touch", [(4, 4), (9, 5), (7, 9)], _R),
    ("vertex-on-hypotenuse-in", [(4, 4), (1, 2), (9, 8)], _R),
    ("two-vertices-on-same-side", [(2, 0), (6, 0), (12, -6)], _R),
    ("two-vertices-on-two-sides", [(3, 0), (0, 3), (2, 2)], _R),
    ("inscribed-medial", [(4, 0), (4, 4), (0, 4)], _R),
    ("inscribed-all-on-sides", [(2, 0), (5, 3), (0, 5)], _R),
    ("side-through-vertex-crossing", [(-2, -2), (4, 4), (6, -3)], _R),
    ("side-through-vertex-grazing", [(-3, 11), (3, 5), (6, 14)], _R),
    ("collinear-sides-same-halfplane", [(2, 0), (7, 0), (5, 5)], _R),
    ("collinear-sides-opposite", [(2, 0), (7, 0), (4, -5)], _R),
    ("collinear-disjoint-touchless", [(10, 0), (14, 0), (12, -4)], _R),
    ("corner-extension-collinear", [(8, 0), (12, 0), (8, 4)], _R),
    ("point-reflection-at-vertex", [(0, 0), (-8, 0), (0, -8)], _R),
    ("thin-sliver-along-side", [(1, 0), (7, 0), (4, 1)], _R),
    ("vertex-at-vertex-side-overlap", [(8, 0), (0, 0), (4, -6)], _R),
    ("crossing-through-two-vertices", [(-2, 4), (10, -2), (6, 6)], _R),
    ("one-common-vertex-one-on-side", [(0, 0), (4, 4), (6, -2)], _R),
    ("mutual-vertex-on-side", [(4, 0), (8, 4), (2, -6)], _R),
    ("half-overlap-shared-diagonal", [(0, 0), (8, 0), (8, 8)], _R),
    ("contained-shared-vertex-scaled", [(0, 0), (4, 0), (0, 4)], _R),
]


@dataclass
class CaseResult:
    name: str
    area: float
    clip_area: float
    mc_area: float
    mc_stderr: float
    passed: bool


@dataclass
class SelfTestReport:
    cases: list[CaseResult] = field(default_factory=list)
    n_random: int = 0
    n_random_failed: int = 0
    max_clip_dev: float = 0.0
    max_mc_sigma: float = 0.0

    @property
    def passed(self) -> bool:
        return self.n_random_failed == 0 and all(c.passed for c in self.cases)


def _case_arrays(cases, scale):
    names = [c[0] for c in cases]
    t1 = np.array([c[1] for c in cases], dtype=np.float64) * scale
    t2 = np.array([c[2] for c in cases], dtype=np.float64) * scale
    return names, t1, t2


def random_pairs(n: int, seed: int = 0):
    """Seeded random triangle pairs on the unit square, degenerates rejected."""
    rng = np.random.default_rng(seed)
    out1 = np.empty((n, 3, 2))
    out2 = np.empty((n, 3, 2))
    k = 0
    while k < n:
        t = rng.uniform(0.0, 1.0, size=(2, 3, 2))
        if abs(signed_area(t[0])) < 5e-4 or abs(signed_area(t[1])) < 5e-4:
            continue
        out1[k] = t[0]
        out2[k] = t[1]
        k += 1
    return out1, out2


def snapped_pairs(n: int, seed: int = 1):
    """Random pairs with t1 vertices snapped onto t2's vertices and sides.

    Supplements the structured degenerate list: the degenerate taxonomy is
    not provably exhaustive, so random on-edge configurations are thrown in.
    """
    rng = np.random.default_rng(seed)
    out1 = np.empty((n, 3, 2))
    out2 = np.empty((n, 3, 2))
    k = 0
    while k < n:
        t2 = rng.uniform(0.0, 1.0, size=(3, 2))
        if abs(signed_area(t2)) < 5e-3:
            continue
        t1 = rng.uniform(0.0, 1.0, size=(3, 2))
        for v in range(3):
            mode = rng.integers(0, 4)
            if mode == 0:
                t1[v] = t2[rng.integers(0, 3)]
            elif mode == 1:
                a = rng.integers(0, 3)
                lam = rng.uniform(0.0, 1.0)
                t1[v] = t2[a] + lam * (t2[(a + 1) % 3] - t2[a])
        if abs(signed_area(t1)) < 5e-4:
            continue
        out1[k] = t1
        out2[k] = t2
        k += 1
    return out1, out2


def _check_batch(names, t1, t2, mc_samples, seed, report, record_cases=True):
    areas = np.array([triangle_intersection_area(a, b) for a, b in zip(t1, t2)])
    clips = np.array([clip_oracle_area(a, b) for a, b in zip(t1, t2)])
    seeds = (np.uint64(seed) + np.arange(len(t1), dtype=np.uint64)
             * np.uint64(0x9E3779B97F4A7C15))
    mc, err = mc_area_batch(np.ascontiguousarray(t1), np.ascontiguousarray(t2),
                            mc_samples, seeds)
    scale = np.maximum(np.abs([signed_area(a) for a in t1]),
                       np.abs([signed_area(b) for b in t2]))
    clip_ok = np.abs(areas - clips) <= CLIP_RTOL * scale
    mc_dev = np.abs(areas - mc)
    mc_ok = mc_dev <= MC_SIGMAS * err + 1e-300
    sig = np.where(err > 0, mc_dev / np.where(err > 0, err, 1.0), 0.0)
    report.max_clip_dev = max(report.max_clip_dev,
                              float(np.max(np.abs(areas - clips) / scale)))
    report.max_mc_sigma = max(report.max_mc_sigma, float(np.max(sig)))
    ok = clip_ok & mc_ok
    if record_cases:
        for idx, name in enumerate(names):
            report.cases.append(CaseResult(name, float(areas[idx]),
                                           float(clips[idx]), float(mc[idx]),
                                           float(err[idx]), bool(ok[idx])))
    else:
        report.n_random += len(names)
        report.n_random_failed += int(np.sum(~ok))


def run_selftest(n_random: int = 10_000, mc_samples: int = 1_000_000,
                 seed: int = 0, n_snapped: int = 200,
                 progress=None) -> SelfTestReport:
    """Run the full oracle-equivalence suite; returns per-case results."""
    report = SelfTestReport()

    names, t1, t2 = _case_arrays(TOPOLOGICAL_CASES, _T)
    _check_batch(["topo-" + n for n in names], t1, t2, mc_samples, seed, report)
    if progress:
        progress(f"topological cases: {len(names)} done")

    names, t1, t2 = _case_arrays(DEGENERATE_CASES, 1.0 / 8.0)
    _check_batch(["degen-" + n for n in names], t1, t2, mc_samples,
                 seed + 1, report)
    if progress:
        progress(f"degenerate cases: {len(names)} done")

    t1, t2 = snapped_pairs(n_snapped, seed + 2)
    _check_batch([f"snapped-{i}" for i in range(len(t1))], t1, t2,
                 mc_samples, seed + 3, report, record_cases=False)
    if progress:
        progress(f"snapped random pairs: {len(t1)} done")

    if n_random > 0:
        t1, t2 = random_pairs(n_random, seed + 4)
        _check_batch([f"random-{i}" for i in range(len(t1))], t1, t2,
                     mc_samples, seed + 5, report, record_cases=False)
        if progress:
            progress(f"random pairs: {len(t1)} done")
    return report
