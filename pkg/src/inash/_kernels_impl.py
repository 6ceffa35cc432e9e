"""Numeric kernels: exact 2-D clearance geometry, space-time collision
sweeps over timed polylines, and DAG scans (shortest-to-goal, path counts,
capped path enumeration, the pruned better-response scan).

Every function here is written in loop form so the whole module can be
compiled with numba. The loader in ``kernels.py`` executes this file twice,
once with ``jit = numba.njit`` and once with an identity decorator, which
yields the compiled and the pure-python/numpy variants of the same code.

Conventions:
    bounds   float64[4]   (xmin, ymin, xmax, ymax)
    rects    float64[R,4] (xmin, ymin, xmax, ymax) per obstacle
    circles  float64[C,3] (cx, cy, radius) per obstacle
    timed paths: parallel arrays xs, ys, ts with ts[0] == 0, ts strictly
    increasing; positions clamp to the end vertex after ts[-1] (parked).
All obstacle interiors are open: a disc touching a boundary is still free.
"""
import math

import numpy as np

if "jit" not in globals():  # pragma: no cover - set by the kernel loader
    def jit(fn):
        return fn

INF = math.inf


# ---------------------------------------------------------------------------
# static geometry


@jit
def sd_rect(px, py, x0, y0, x1, y1):
    """Signed distance from a point to a rectangle boundary (< 0 inside)."""
    dx = max(x0 - px, px - x1)
    dy = max(y0 - py, py - y1)
    if dx <= 0.0 and dy <= 0.0:
        return max(dx, dy)
    ox = dx if dx > 0.0 else 0.0
    oy = dy if dy > 0.0 else 0.0
    return math.hypot(ox, oy)


@jit
def point_free(px, py, infl, bounds, rects, circles):
    """True iff the closed disc of radius ``infl`` at (px,py) stays inside
    the bounds and intersects no obstacle interior."""
    if (
        px - infl < bounds[0]
        or py - infl < bounds[1]
        or px + infl > bounds[2]
        or py + infl > bounds[3]
    ):
        return False
    for i in range(rects.shape[0]):
        if sd_rect(px, py, rects[i, 0], rects[i, 1], rects[i, 2], rects[i, 3]) < infl:
            return False
    for i in range(circles.shape[0]):
        d = math.hypot(px - circles[i, 0], py - circles[i, 1]) - circles[i, 2]
        if d < infl:
            return False
    return True


@jit
def free_mask(xs, ys, infl, bounds, rects, circles):
    n = xs.shape[0]
    out = np.empty(n, np.bool_)
    for i in range(n):
        out[i] = point_free(xs[i], ys[i], infl, bounds, rects, circles)
    return out


@jit
def seg_point_dist(ax, ay, bx, by, px, py):
    vx = bx - ax
    vy = by - ay
    l2 = vx * vx + vy * vy
    if l2 <= 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * vx + (py - ay) * vy) / l2
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(ax + t * vx - px, ay + t * vy - py)


@jit
def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


@jit
def seg_seg_dist(ax, ay, bx, by, cx, cy, dx, dy):
    d1 = _orient(cx, cy, dx, dy, ax, ay)
    d2 = _orient(cx, cy, dx, dy, bx, by)
    d3 = _orient(ax, ay, bx, by, cx, cy)
    d4 = _orient(ax, ay, bx, by, dx, dy)
    if ((d1 > 0.0 and d2 < 0.0) or (d1 < 0.0 and d2 > 0.0)) and (
        (d3 > 0.0 and d4 < 0.0) or (d3 < 0.0 and d4 > 0.0)
    ):
        return 0.0
    e1 = seg_point_dist(cx, cy, dx, dy, ax, ay)
    e2 = seg_point_dist(cx, cy, dx, dy, bx, by)
    e3 = seg_point_dist(ax, ay, bx, by, cx, cy)
    e4 = seg_point_dist(ax, ay, bx, by, dx, dy)
    return min(min(e1, e2), min(e3, e4))


@jit
def seg_rect_dist(ax, ay, bx, by, x0, y0, x1, y1):
    """Distance from segment to the closed rectangle (0 if they intersect)."""
    if x0 <= ax <= x1 and y0 <= ay <= y1:
        return 0.0
    if x0 <= bx <= x1 and y0 <= by <= y1:
        return 0.0
    d = seg_seg_dist(ax, ay, bx, by, x0, y0, x1, y0)
    d = min(d, seg_seg_dist(ax, ay, bx, by, x1, y0, x1, y1))
    d = min(d, seg_seg_dist(ax, ay, bx, by, x1, y1, x0, y1))
    d = min(d, seg_seg_dist(ax, ay, bx, by, x0, y1, x0, y0))
    return d


@jit
def seg_in_open_rect(ax, ay, bx, by, x0, y0, x1, y1):
    """True iff some point of the segment lies strictly inside the rect."""
    t0 = 0.0
    t1 = 1.0
    # x axis
    d = bx - ax
    if d == 0.0:
        if ax <= x0 or ax >= x1:
            return False
    else:
        ta = (x0 - ax) / d
        tb = (x1 - ax) / d
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
    # y axis
    d = by - ay
    if d == 0.0:
        if ay <= y0 or ay >= y1:
            return False
    else:
        ta = (y0 - ay) / d
        tb = (y1 - ay) / d
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
    return t1 > t0


@jit
def segment_free(ax, ay, bx, by, infl, bounds, rects, circles):
    """True iff the whole segment, inflated by ``infl``, is free.

    Exact: capsule-in-bounds reduces to the two end discs (convexity),
    obstacle clearance uses segment-shape distances.
    """
    if (
        ax - infl < bounds[0]
        or ay - infl < bounds[1]
        or ax + infl > bounds[2]
        or ay + infl > bounds[3]
        or bx - infl < bounds[0]
        or by - infl < bounds[1]
        or bx + infl > bounds[2]
        or by + infl > bounds[3]
    ):
        return False
    for i in range(circles.shape[0]):
        d = seg_point_dist(ax, ay, bx, by, circles[i, 0], circles[i, 1])
        if d - circles[i, 2] < infl:
            return False
    for i in range(rects.shape[0]):
        d = seg_rect_dist(ax, ay, bx, by, rects[i, 0], rects[i, 1], rects[i, 2], rects[i, 3])
        if d < infl:
            return False
        if infl == 0.0 and d == 0.0:
            if seg_in_open_rect(ax, ay, bx, by, rects[i, 0], rects[i, 1], rects[i, 2], rects[i, 3]):
                return False
    return True


@jit
def segments_free_mask(x0s, y0s, x1, y1, infl, bounds, rects, circles):
    """Freeness of many segments sharing the endpoint (x1, y1)."""
    n = x0s.shape[0]
    out = np.empty(n, np.bool_)
    for i in range(n):
        out[i] = segment_free(x0s[i], y0s[i], x1, y1, infl, bounds, rects, circles)
    return out


# ---------------------------------------------------------------------------
# vertex queries


@jit
def nearest_vertex(xs, ys, n, px, py):
    best = INF
    bi = 0
    for i in range(n):
        dx = xs[i] - px
        dy = ys[i] - py
        d = dx * dx + dy * dy
        if d < best:
            best = d
            bi = i
    return bi


@jit
def near_indices(xs, ys, n, px, py, radius):
    out = np.empty(n, np.int64)
    m = 0
    r2 = radius * radius
    for i in range(n):
        dx = xs[i] - px
        dy = ys[i] - py
        if dx * dx + dy * dy <= r2:
            out[m] = i
            m += 1
    return out[:m].copy()


# ---------------------------------------------------------------------------
# space-time collision sweep


@jit
def pair_min_dist_sq(axs, ays, ats, bxs, bys, bts, t_end, stop_below):
    """Minimum squared distance between two timed polylines over [0, t_end].

    Positions are clamped to the final vertex after a path's own end time.
    The sweep walks the merged time breakpoints; on each elementary interval
    both points move with constant velocity, so the interval minimum is a
    clamped quadratic. Returns early once the running minimum drops below
    ``stop_below``.
    """
    na = axs.shape[0]
    nb = bxs.shape[0]
    ia = 0
    ib = 0
    t = 0.0
    best = INF
    while True:
        ta_next = ats[ia + 1] if ia + 1 < na else INF
        tb_next = bts[ib + 1] if ib + 1 < nb else INF
        tn = min(min(ta_next, tb_next), t_end)

        # position & velocity of a on [t, tn]
        if ia + 1 < na:
            seg_dt = ats[ia + 1] - ats[ia]
            avx = (axs[ia + 1] - axs[ia]) / seg_dt
            avy = (ays[ia + 1] - ays[ia]) / seg_dt
            ax = axs[ia] + avx * (t - ats[ia])
            ay = ays[ia] + avy * (t - ats[ia])
        else:
            avx = 0.0
            avy = 0.0
            ax = axs[na - 1]
            ay = ays[na - 1]
        if ib + 1 < nb:
            seg_dt = bts[ib + 1] - bts[ib]
            bvx = (bxs[ib + 1] - bxs[ib]) / seg_dt
            bvy = (bys[ib + 1] - bys[ib]) / seg_dt
            bx = bxs[ib] + bvx * (t - bts[ib])
            by = bys[ib] + bvy * (t - bts[ib])
        else:
            bvx = 0.0
            bvy = 0.0
            bx = bxs[nb - 1]
            by = bys[nb - 1]

        px = ax - bx
        py = ay - by
        vx = avx - bvx
        vy = avy - bvy
        d0 = px * px + py * py
        if d0 < best:
            best = d0
            if best < stop_below:
                return best
        dt = tn - t
        vv = vx * vx + vy * vy
        if vv > 0.0 and dt > 0.0:
            s = -(px * vx + py * vy) / vv
            if s > dt:
                s = dt
            if s > 0.0:
                qx = px + vx * s
                qy = py + vy * s
                d = qx * qx + qy * qy
                if d < best:
                    best = d
                    if best < stop_below:
                        return best
        if tn >= t_end:
            break
        t = tn
        while ia + 1 < na and ats[ia + 1] <= t:
            ia += 1
        while ib + 1 < nb and bts[ib + 1] <= t:
            ib += 1
    return best


@jit
def path_collides_any(cxs, cys, cts, c_radius, oxs, oys, ots, ooff, orad, margin, vanish):
    """True iff the candidate timed path conflicts with any packed path.

    ``vanish`` switches the parked-at-end window to a vanish-at-end window.
    """
    n_other = orad.shape[0]
    tc = cts[cts.shape[0] - 1]
    for j in range(n_other):
        s = ooff[j]
        e = ooff[j + 1]
        to = ots[e - 1]
        if vanish:
            t_end = min(tc, to)
        else:
            t_end = max(tc, to)
        thr = c_radius + orad[j] + margin
        d2 = pair_min_dist_sq(cxs, cys, cts, oxs[s:e], oys[s:e], ots[s:e], t_end, thr * thr)
        if d2 < thr * thr:
            return True
    return False


@jit
def collision_matrix(axs, ays, ats, aoff, ra, bxs, bys, bts, boff, rb, margin, vanish):
    """Pairwise conflict matrix between two sets of packed timed paths."""
    na = aoff.shape[0] - 1
    nb = boff.shape[0] - 1
    out = np.empty((na, nb), np.bool_)
    thr = ra + rb + margin
    thr2 = thr * thr
    for a in range(na):
        sa = aoff[a]
        ea = aoff[a + 1]
        tca = ats[ea - 1]
        for b in range(nb):
            sb = boff[b]
            eb = boff[b + 1]
            tcb = bts[eb - 1]
            if vanish:
                t_end = min(tca, tcb)
            else:
                t_end = max(tca, tcb)
            d2 = pair_min_dist_sq(
                axs[sa:ea], ays[sa:ea], ats[sa:ea],
                bxs[sb:eb], bys[sb:eb], bts[sb:eb],
                t_end, thr2,
            )
            out[a, b] = d2 < thr2
    return out


# ---------------------------------------------------------------------------
# DAG scans (edges always lead from lower to higher vertex index)


@jit
def dag_goal_dp(n_v, off, tgt, wlen, goal, out_lb, out_cnt):
    """Per-vertex shortest remaining length to a goal vertex and number of
    goal-truncated paths in the subtree. Goal vertices absorb (paths end at
    the first goal vertex). Counts saturate at 1e18."""
    for v in range(n_v - 1, -1, -1):
        if goal[v]:
            out_lb[v] = 0.0
            out_cnt[v] = 1.0
        else:
            best = INF
            c = 0.0
            for e in range(off[v], off[v + 1]):
                u = tgt[e]
                d = out_lb[u] + wlen[e]
                if d < best:
                    best = d
                c += out_cnt[u]
            if c > 1e18:
                c = 1e18
            out_lb[v] = best
            out_cnt[v] = c


@jit
def dag_root_dp(n_v, off, tgt, wlen, goal, out_dist, out_pred):
    """Shortest distance from the root to every vertex along paths that do
    not pass through a goal vertex (goal vertices terminate paths)."""
    for v in range(n_v):
        out_dist[v] = INF
        out_pred[v] = -1
    out_dist[0] = 0.0
    for v in range(n_v):
        dv = out_dist[v]
        if dv == INF or goal[v]:
            continue
        for e in range(off[v], off[v + 1]):
            u = tgt[e]
            nd = dv + wlen[e]
            if nd < out_dist[u]:
                out_dist[u] = nd
                out_pred[u] = v
    return 0


@jit
def enumerate_goal_paths(n_v, off, tgt, wlen, goal, cnt, cap):
    """Depth-first enumeration (children in ascending target order) of
    root-to-goal paths truncated at the first goal vertex, stopping after
    ``cap`` paths. Returns (flat vertex ids, path offsets, costs, n_paths).
    """
    buf = np.empty(1024, np.int64)
    pcap = min(cap, 1024)
    offs = np.empty(pcap + 1, np.int64)
    costs = np.empty(pcap, np.float64)
    offs[0] = 0
    n_paths = 0
    used = 0

    stack_v = np.empty(n_v + 1, np.int64)
    stack_ci = np.empty(n_v + 1, np.int64)
    stack_cost = np.empty(n_v + 1, np.float64)
    depth = 0
    stack_v[0] = 0
    stack_ci[0] = off[0]
    stack_cost[0] = 0.0
    entering = True
    while depth >= 0:
        v = stack_v[depth]
        if entering:
            entering = False
            if goal[v]:
                # emit stack_v[0..depth]
                need = used + depth + 1
                if need > buf.shape[0]:
                    ncap = buf.shape[0]
                    while ncap < need:
                        ncap *= 2
                    nbuf = np.empty(ncap, np.int64)
                    nbuf[:used] = buf[:used]
                    buf = nbuf
                if n_paths >= pcap:
                    pcap *= 2
                    noffs = np.empty(pcap + 1, np.int64)
                    noffs[: n_paths + 1] = offs[: n_paths + 1]
                    offs = noffs
                    ncosts = np.empty(pcap, np.float64)
                    ncosts[:n_paths] = costs[:n_paths]
                    costs = ncosts
                for q in range(depth + 1):
                    buf[used + q] = stack_v[q]
                used += depth + 1
                costs[n_paths] = stack_cost[depth]
                n_paths += 1
                offs[n_paths] = used
                if n_paths >= cap:
                    break
                depth -= 1
                continue
        if stack_ci[depth] < off[v + 1]:
            e = stack_ci[depth]
            stack_ci[depth] += 1
            u = tgt[e]
            if cnt[u] > 0.0:  # subtree reaches a goal vertex
                depth += 1
                stack_v[depth] = u
                stack_ci[depth] = off[u]
                stack_cost[depth] = stack_cost[depth - 1] + wlen[e]
                entering = True
        else:
            depth -= 1
    return buf[:used].copy(), offs[: n_paths + 1].copy(), costs[:n_paths].copy(), n_paths


@jit
def better_response_scan(
    off, tgt, wlen, goal, lb, cnt, xs, ys, speed,
    cost_min, cap,
    oxs, oys, ots, ooff, orad, self_radius, margin, vanish,
    out_path,
):
    """First strictly improving, conflict-free goal path in canonical
    depth-first order.

    Prunes subtrees whose best completion cannot beat ``cost_min`` (the
    per-vertex lower bounds are exact DAG shortest distances, so pruning
    skips only non-improving paths and the selected path matches the
    unpruned scan). Pruned subtrees still consume path budget via ``cnt``
    so the ``cap`` cutoff lands where plain enumeration would stop.

    Returns (found, path_len, cost, theta, processed, capped), where theta
    counts candidate collision checks.
    """
    n_v = xs.shape[0]
    stack_v = np.empty(n_v + 1, np.int64)
    stack_ci = np.empty(n_v + 1, np.int64)
    stack_cost = np.empty(n_v + 1, np.float64)
    cxs = np.empty(n_v + 1, np.float64)
    cys = np.empty(n_v + 1, np.float64)
    cts = np.empty(n_v + 1, np.float64)
    theta = 0
    processed = 0.0
    capped = False
    found = False
    out_len = 0
    out_cost = INF
    depth = 0
    stack_v[0] = 0
    stack_ci[0] = off[0]
    stack_cost[0] = 0.0
    entering = True
    while depth >= 0:
        v = stack_v[depth]
        if entering:
            entering = False
            if goal[v]:
                c = stack_cost[depth]
                if c < cost_min:
                    for q in range(depth + 1):
                        cxs[q] = xs[stack_v[q]]
                        cys[q] = ys[stack_v[q]]
                        cts[q] = stack_cost[q] / speed
                    theta += 1
                    hit = path_collides_any(
                        cxs[: depth + 1], cys[: depth + 1], cts[: depth + 1],
                        self_radius, oxs, oys, ots, ooff, orad, margin, vanish,
                    )
                    if not hit:
                        found = True
                        out_len = depth + 1
                        out_cost = c
                        for q in range(depth + 1):
                            out_path[q] = stack_v[q]
                        break
                processed += 1.0
                if processed >= cap:
                    capped = True
                    break
                depth -= 1
                continue
        if stack_ci[depth] < off[v + 1]:
            e = stack_ci[depth]
            stack_ci[depth] += 1
            u = tgt[e]
            ncost = stack_cost[depth] + wlen[e]
            if ncost + lb[u] < cost_min:
                depth += 1
                stack_v[depth] = u
                stack_ci[depth] = off[u]
                stack_cost[depth] = ncost
                entering = True
            else:
                processed += cnt[u]
                if processed >= cap:
                    capped = True
                    break
        else:
            depth -= 1
    return found, out_len, out_cost, theta, processed, capped


# ---------------------------------------------------------------------------
# centralized product search


@jit
def product_scan(sizes, costs_flat, cost_off, pair_flat, pair_off, out_idx):
    """Exhaustive scan of the strategy product (last robot varies fastest).

    ``pair_flat[pair_off[i,j] + a*sizes[j] + b]`` is True when path a of
    robot i conflicts with path b of robot j (i < j). One feasibility check
    is counted per tuple. Returns (found, best_total, n_tuples); the first
    tuple achieving the minimum wins.
    """
    n = sizes.shape[0]
    idx = np.zeros(n, np.int64)
    best = INF
    found = False
    theta = 0
    while True:
        theta += 1
        feasible = True
        for i in range(n):
            if not feasible:
                break
            for j in range(i + 1, n):
                if pair_flat[pair_off[i, j] + idx[i] * sizes[j] + idx[j]]:
                    feasible = False
                    break
        if feasible:
            tc = 0.0
            for i in range(n):
                tc += costs_flat[cost_off[i] + idx[i]]
            if not found or tc < best:
                found = True
                best = tc
                for i in range(n):
                    out_idx[i] = idx[i]
        p = n - 1
        while p >= 0:
            idx[p] += 1
            if idx[p] < sizes[p]:
                break
            idx[p] = 0
            p -= 1
        if p < 0:
            break
    return found, best, theta
