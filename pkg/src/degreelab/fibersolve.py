"""Certified enumeration of real solutions of F(x) = z inside a box.

The solver is a breadth-first branch-and-prune: boxes whose interval
image of some residual component excludes zero are discarded; surviving
boxes are tested with an interval Newton operator (midpoint-preconditioned),
whose contraction into the strict interior certifies existence and
uniqueness of a root; undecided boxes are split and re-queued.  Working
level by level in a fixed order makes the output independent of how many
worker threads participate.

The same sum-of-squares positivity kernel that backs boundary clearance
is exported for reuse by the degree module's boundary and path
certifications.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polycore import Interval, IntervalBox, Poly, _next_down, _next_up
from .mapforms import PolyMap, jacobian_det, jacobian_matrix

# Split point sits at 127/256 of the width rather than 1/2: an exact
# bisection of the symmetric boxes used throughout the corpus would land
# subdivision faces exactly on common roots (the origin first of all),
# which interval Newton can then never separate from either side.
_SPLIT_RATIO = 127.0 / 256.0

# Interval Newton on a wide box can't contract and wastes n^2 interval
# evaluations, so attempts are deferred until boxes are modest; depth 0
# is exempt so that near-linear problems on oversized boxes certify
# immediately instead of subdividing their way down to the gate.
_KRAWCZYK_GATE = 2.0

_STATUS_PRIORITY = ("boundary_contact", "singular_suspect", "depth_exceeded")


@dataclass(frozen=True)
class SolverConfig:
    max_depth: int = 60
    target_width: float = 1e-10
    newton_max_iters: int = 50
    boundary_margin: float = 1e-8

    def __post_init__(self):
        if self.max_depth <= 0 or self.newton_max_iters <= 0:
            raise ValueError("depth and iteration limits must be positive")
        if self.target_width <= 0 or self.boundary_margin <= 0:
            raise ValueError("width and margin parameters must be positive")


@dataclass(frozen=True)
class CertifiedRoot:
    isolator: IntervalBox
    jac_sign: int
    refinement_width: float


@dataclass(frozen=True)
class SolveStats:
    boxes_processed: int
    max_depth: int


@dataclass(frozen=True)
class FiberResult:
    roots: tuple[CertifiedRoot, ...]
    status: str
    stats: SolveStats


def bezout_bound(F: PolyMap) -> int:
    """Product of the component total degrees."""
    bound = 1
    for i, p in enumerate(F.components):
        if p.is_zero:
            raise ValueError(f"component {i + 1} is the zero polynomial")
        bound *= p.total_degree()
    return bound


def _split_point(side: Interval) -> float:
    return side.lo + _SPLIT_RATIO * (side.hi - side.lo)


def _interval_matrix(jac, box: IntervalBox):
    return [[entry.eval_interval(box) for entry in row] for row in jac]


def _krawczyk_image(gs, jac, box: IntervalBox) -> IntervalBox | None:
    """One interval Newton step: the operator image of the box, or None
    when the midpoint Jacobian cannot be inverted.

    The residual at the midpoint is enclosed by interval-evaluating over
    the degenerate point box, which is sound and avoids exact rational
    arithmetic on deep midpoints.
    """
    n = box.dims
    mid = box.midpoint()
    jm = np.array([[float(entry.eval(list(mid))) for entry in row] for row in jac])
    try:
        with np.errstate(all="ignore"):
            Y = np.linalg.inv(jm)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(Y)):
        return None
    point_box = IntervalBox(Interval(x, x) for x in mid)
    g_mid = [g.eval_interval(point_box) for g in gs]
    JX = _interval_matrix(jac, box)
    offsets = [box.sides[j] - Interval.point(mid[j]) for j in range(n)]
    out = []
    for i in range(n):
        newton = Interval(0.0, 0.0)
        for j in range(n):
            newton = newton + Interval.point(float(Y[i, j])) * g_mid[j]
        acc = Interval.point(mid[i]) - newton
        for j in range(n):
            e = Interval.point(1.0 if i == j else 0.0)
            dot = Interval(0.0, 0.0)
            for k in range(n):
                dot = dot + Interval.point(float(Y[i, k])) * JX[k][j]
            acc = acc + (e - dot) * offsets[j]
        out.append(acc)
    return IntervalBox(out)


def _krawczyk_batch(gs, jac, los: np.ndarray, his: np.ndarray):
    """Vectorized interval Newton images for a stack of boxes.

    Returns (K_lo, K_hi, usable) where usable is False for boxes whose
    midpoint Jacobian could not be inverted (or whose image overflowed).
    Operation order mirrors the scalar _krawczyk_image so both paths
    carry the same soundness argument.
    """
    count, n = los.shape
    mids = los + 0.5 * (his - los)
    with np.errstate(all="ignore"):
        jm = np.empty((count, n, n))
        for i in range(n):
            for j in range(n):
                jm[:, i, j] = jac[i][j].eval_array(mids)
        Y = np.empty_like(jm)
        usable = np.ones(count, dtype=bool)
        for k in range(count):
            try:
                yk = np.linalg.inv(jm[k])
            except np.linalg.LinAlgError:
                usable[k] = False
                continue
            if np.all(np.isfinite(yk)):
                Y[k] = yk
            else:
                usable[k] = False
        gml = np.empty((count, n))
        gmh = np.empty((count, n))
        cache_point: dict = {}
        for j, g in enumerate(gs):
            gml[:, j], gmh[:, j] = g.eval_interval_batch(mids, mids, cache_point)
        jxl = np.empty((count, n, n))
        jxh = np.empty((count, n, n))
        cache_box: dict = {}
        for i in range(n):
            for j in range(n):
                jxl[:, i, j], jxh[:, i, j] = jac[i][j].eval_interval_batch(
                    los, his, cache_box)
        off_lo = _next_down(los - mids)
        off_hi = _next_up(his - mids)
        k_lo = np.empty((count, n))
        k_hi = np.empty((count, n))
        for i in range(n):
            newton_lo = np.zeros(count)
            newton_hi = np.zeros(count)
            for j in range(n):
                y = Y[:, i, j]
                p1 = y * gml[:, j]
                p2 = y * gmh[:, j]
                newton_lo = _next_down(newton_lo + _next_down(np.minimum(p1, p2)))
                newton_hi = _next_up(newton_hi + _next_up(np.maximum(p1, p2)))
            acc_lo = _next_down(mids[:, i] - newton_hi)
            acc_hi = _next_up(mids[:, i] - newton_lo)
            for j in range(n):
                dot_lo = np.zeros(count)
                dot_hi = np.zeros(count)
                for k in range(n):
                    y = Y[:, i, k]
                    p1 = y * jxl[:, k, j]
                    p2 = y * jxh[:, k, j]
                    dot_lo = _next_down(dot_lo + _next_down(np.minimum(p1, p2)))
                    dot_hi = _next_up(dot_hi + _next_up(np.maximum(p1, p2)))
                delta = 1.0 if i == j else 0.0
                e_lo = _next_down(delta - dot_hi)
                e_hi = _next_up(delta - dot_lo)
                q1 = e_lo * off_lo[:, j]
                q2 = e_lo * off_hi[:, j]
                q3 = e_hi * off_lo[:, j]
                q4 = e_hi * off_hi[:, j]
                t_lo = _next_down(np.minimum(np.minimum(q1, q2), np.minimum(q3, q4)))
                t_hi = _next_up(np.maximum(np.maximum(q1, q2), np.maximum(q3, q4)))
                acc_lo = _next_down(acc_lo + t_lo)
                acc_hi = _next_up(acc_hi + t_hi)
            k_lo[:, i] = acc_lo
            k_hi[:, i] = acc_hi
    usable &= ~(np.isnan(k_lo).any(axis=1) | np.isnan(k_hi).any(axis=1))
    return k_lo, k_hi, usable


def _refine_isolator(gs, jac, box: IntervalBox, cfg: SolverConfig) -> IntervalBox:
    current = box
    for _ in range(cfg.newton_max_iters):
        if current.max_width() <= cfg.target_width:
            break
        image = _krawczyk_image(gs, jac, current)
        if image is None:
            break
        shrunk = current.intersect(image)
        if shrunk is None or shrunk == current:
            break
        current = shrunk
    return current


def _classify_stuck(box: IntervalBox, outer: IntervalBox, det: Poly,
                    cfg: SolverConfig) -> str:
    if box.boundary_gap(outer) <= cfg.boundary_margin:
        return "boundary_contact"
    if det.eval_interval(box).contains(0.0):
        return "singular_suspect"
    return "depth_exceeded"


def solve_fiber(F: PolyMap, z: Sequence[Fraction | int], box: IntervalBox,
                cfg: SolverConfig | None = None, workers: int = 1) -> FiberResult:
    """Certified solution set of F(x) = z in the closed box.

    status is "complete" only when every sub-box was either discarded by
    a sound exclusion test or certified to hold exactly one root, and no
    isolator approaches the outer boundary closer than the configured
    margin.  Worker count never changes the result, only the wall time.
    """
    cfg = cfg or SolverConfig()
    if box.dims != F.n:
        raise ValueError(f"box has {box.dims} dims, expected {F.n}")
    if len(z) != F.n:
        raise ValueError(f"target has length {len(z)}, expected {F.n}")
    target = [Fraction(v) for v in z]
    gs = [p - Poly.const(F.n, t) for p, t in zip(F.components, target)]
    jac = jacobian_matrix(F)
    det = jacobian_det(F)

    def certify(start: IntervalBox):
        isolator = _refine_isolator(gs, jac, start, cfg)
        det_range = det.eval_interval(isolator)
        if det_range.lo > 0.0:
            return ("root", CertifiedRoot(isolator, +1, isolator.max_width()))
        if det_range.hi < 0.0:
            return ("root", CertifiedRoot(isolator, -1, isolator.max_width()))
        return ("stuck", isolator)

    def leaf_or_split(node: IntervalBox, depth: int):
        if depth >= cfg.max_depth or node.max_width() <= cfg.target_width:
            return ("stuck", node)
        axis = node.widest_axis()
        side = node.sides[axis]
        at = _split_point(side)
        if not (side.lo < at < side.hi):
            return ("stuck", node)
        return ("split", node.split(axis, at))

    roots: list[CertifiedRoot] = []
    stuck_kinds: set[str] = set()
    boxes_processed = 0
    deepest = 0
    level: list[IntervalBox] = [box]
    depth = 0
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while level:
            boxes_processed += len(level)
            deepest = max(deepest, depth)
            count = len(level)
            los = np.array([[s.lo for s in node.sides] for node in level])
            his = np.array([[s.hi for s in node.sides] for node in level])
            # vectorized exclusion test: a box survives only if every
            # residual component's enclosure can reach zero
            alive = np.ones(count, dtype=bool)
            shared_pows: dict = {}
            for g in gs:
                glo, ghi = g.eval_interval_batch(los, his, shared_pows)
                alive &= (glo <= 0.0) & (ghi >= 0.0)
            widths = (his - los).max(axis=1) if count else np.zeros(0)
            newton_rows = alive & ((widths <= _KRAWCZYK_GATE) | (depth == 0))
            row_of = {}
            if newton_rows.any():
                idxs = np.nonzero(newton_rows)[0]
                row_of = {int(orig): pos for pos, orig in enumerate(idxs)}
                k_lo, k_hi, usable = _krawczyk_batch(
                    gs, jac, los[idxs], his[idxs])
            decisions = []
            certify_jobs = []
            for idx in range(count):
                if not alive[idx]:
                    continue
                node = level[idx]
                pos = row_of.get(idx)
                if pos is not None and usable[pos]:
                    xl, xh = los[idx], his[idx]
                    kl, kh = k_lo[pos], k_hi[pos]
                    if np.any(kh < xl) or np.any(kl > xh):
                        continue  # operator image misses the box: no root
                    contracted = IntervalBox(
                        Interval(max(float(a), float(b)), min(float(c), float(d)))
                        for a, b, c, d in zip(xl, kl, xh, kh))
                    if np.all(xl < kl) and np.all(kh < xh):
                        decisions.append(("certify", len(certify_jobs)))
                        certify_jobs.append(contracted)
                        continue
                    decisions.append(leaf_or_split(contracted, depth))
                else:
                    decisions.append(leaf_or_split(node, depth))
            if pool is None:
                certified = [certify(start) for start in certify_jobs]
            else:
                certified = list(pool.map(certify, certify_jobs))
            next_level: list[IntervalBox] = []
            for kind, payload in decisions:
                if kind == "certify":
                    kind, payload = certified[payload]
                if kind == "root":
                    roots.append(payload)
                elif kind == "stuck":
                    stuck_kinds.add(_classify_stuck(payload, box, det, cfg))
                else:
                    next_level.extend(payload)
            level = next_level
            depth += 1
    finally:
        if pool is not None:
            pool.shutdown(wait=False)

    roots.sort(key=lambda r: r.isolator.midpoint())
    boundary_roots = any(
        r.isolator.boundary_gap(box) <= cfg.boundary_margin for r in roots)
    if boundary_roots:
        status = "boundary_contact"
    elif stuck_kinds:
        status = next(s for s in _STATUS_PRIORITY if s in stuck_kinds)
    else:
        status = "complete"
    if status == "complete" and not any(p.is_zero for p in F.components):
        if len(roots) > bezout_bound(F):
            raise RuntimeError(
                "certified more roots than the degree product allows; "
                "this is a soundness bug, not a property of the input")
    return FiberResult(tuple(roots), status, SolveStats(boxes_processed, deepest))


# ---------------------------------------------------------------------
# Certified positivity of a sum of squares over a region, and the
# boundary clearance built on it.
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class ClearanceResult:
    m: float
    boxes_examined: int
    deepest: int
    failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.m > 0.0


def box_faces(box: IntervalBox) -> list[IntervalBox]:
    """The 2n boundary faces, each a box with one degenerate side."""
    faces = []
    for i, side in enumerate(box.sides):
        for endpoint in (side.lo, side.hi):
            pinned = (box.sides[:i]
                      + (Interval(endpoint, endpoint),)
                      + box.sides[i + 1:])
            faces.append(IntervalBox(pinned))
    return faces


def _sum_squares_lower(polys, node: IntervalBox) -> float:
    acc = Interval(0.0, 0.0)
    for p in polys:
        acc = acc + p.eval_interval(node).power(2)
    return acc.lo


def certified_min_sum_squares(polys: Sequence[Poly], regions: Sequence[IntervalBox],
                              max_depth: int = 40, split_budget: int = 20000,
                              improve_splits: int = 300):
    """Certified lower bound for min over the regions of sum of squares.

    Returns (bound, boxes_examined, deepest, failure_message).  bound is
    0.0 when some sub-box could not be pushed off zero within budget —
    a sound but useless bound, reported as failure.
    """
    heap = []
    seq = 0
    for region in regions:
        heapq.heappush(heap, (_sum_squares_lower(polys, region), seq, 0, region))
        seq += 1
    examined = len(regions)
    deepest = 0
    splits = 0
    while heap and heap[0][0] <= 0.0:
        low, _, depth, node = heapq.heappop(heap)
        if depth >= max_depth:
            return 0.0, examined, deepest, (
                f"sum-of-squares enclosure still reaches {low} at depth {depth}")
        if splits >= split_budget:
            return 0.0, examined, deepest, "split budget exhausted"
        axis = node.widest_axis()
        side = node.sides[axis]
        at = _split_point(side)
        if not (side.lo < at < side.hi):
            return 0.0, examined, deepest, (
                "degenerate box still encloses zero; the minimum may be zero")
        splits += 1
        for child in node.split(axis, at):
            heapq.heappush(
                heap, (_sum_squares_lower(polys, child), seq, depth + 1, child))
            seq += 1
            examined += 1
            deepest = max(deepest, depth + 1)
    if not heap:
        return 0.0, examined, deepest, "no regions supplied"
    # All boxes are strictly positive; spend a fixed budget sharpening the
    # weakest enclosure, which is usually loose overestimation.
    for _ in range(improve_splits):
        low, _, depth, node = heap[0]
        if depth >= max_depth:
            break
        axis = node.widest_axis()
        side = node.sides[axis]
        at = _split_point(side)
        if not (side.lo < at < side.hi):
            break
        heapq.heappop(heap)
        for child in node.split(axis, at):
            heapq.heappush(
                heap, (_sum_squares_lower(polys, child), seq, depth + 1, child))
            seq += 1
            examined += 1
            deepest = max(deepest, depth + 1)
    return heap[0][0], examined, deepest, None


def boundary_clearance(F: PolyMap, z: Sequence[Fraction | int], box: IntervalBox,
                       cfg: SolverConfig | None = None,
                       max_depth: int = 40, improve_splits: int = 300) -> ClearanceResult:
    """Certified lower bound m with min over the box boundary of |F - z| >= m.

    m = 0 means the certification failed (the target may touch the image
    of the boundary), never that the true clearance is known to be zero.
    """
    if box.dims != F.n:
        raise ValueError(f"box has {box.dims} dims, expected {F.n}")
    if len(z) != F.n:
        raise ValueError(f"target has length {len(z)}, expected {F.n}")
    target = [Fraction(v) for v in z]
    gs = [p - Poly.const(F.n, t) for p, t in zip(F.components, target)]
    bound_sq, examined, deepest, failure = certified_min_sum_squares(
        gs, box_faces(box), max_depth=max_depth, improve_splits=improve_splits)
    if failure is not None:
        return ClearanceResult(0.0, examined, deepest, failure)
    m = math.sqrt(bound_sq)
    # one ulp down guards the rounding of sqrt itself
    m = max(0.0, math.nextafter(m, -math.inf))
    return ClearanceResult(m, examined, deepest, None)
