"""Convex-body machinery for the linear setting.

The search space is always the unit ball intersected with accumulated
halfspaces.  Width extrema are computed exactly by enumerating candidate
faces (sphere point, flat/sphere caps, constraint vertices — all closed-form
in low dimension), with a projected-ascent fallback once the face count blows
up.  Volumes of the Minkowski-inflated body are estimated by rejection
sampling from its bounding box, with distance-to-body membership tests on the
boundary shell.

Designed for small dimension (d <= 4); both the face combinatorics and the
rejection sampling degrade quickly beyond that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import InteractionChannel

DEFAULT_MC_SAMPLES = 20_000
DEFAULT_HALVING_TOL = 0.05

_FEAS_TOL = 1e-9


class InfeasibleBodyError(RuntimeError):
    """The ball/halfspace intersection appears empty."""


class DegenerateBodyError(RuntimeError):
    """Rejection sampling accepted (almost) nothing; the body volume is negligible."""


class DesignNotConvergedError(RuntimeError):
    def __init__(self, leverage: float, bound: float):
        super().__init__(f"design loop stalled at max leverage {leverage:.6g} > {bound:.6g}")
        self.leverage = leverage


class ConvexBody:
    """Unit ball intersected with halfspaces ``<v, u_j> <= c_j`` (unit normals)."""

    __slots__ = ("d", "normals", "offsets", "_axis_support", "_faces")

    def __init__(self, d: int, normals: np.ndarray | None = None,
                 offsets: np.ndarray | None = None):
        self.d = d
        self.normals = np.zeros((0, d)) if normals is None else normals
        self.offsets = np.zeros(0) if offsets is None else offsets
        self._axis_support = None  # cached support along +/- coordinate axes
        self._faces = None         # cached face structures for support queries

    @staticmethod
    def ball(d: int) -> "ConvexBody":
        return ConvexBody(d)

    def cut(self, normal: np.ndarray, offset: float) -> "ConvexBody":
        """New body with one more halfspace appended (normal gets unit-normalized)."""
        nrm = float(np.linalg.norm(normal))
        if nrm <= 0.0:
            raise ValueError("halfspace normal must be nonzero")
        u = np.asarray(normal, dtype=float) / nrm
        return ConvexBody(self.d,
                          np.vstack([self.normals, u[None, :]]),
                          np.append(self.offsets, offset / nrm))

    def contains(self, v: np.ndarray, tol: float = _FEAS_TOL) -> bool:
        v = np.asarray(v, dtype=float)
        if np.linalg.norm(v) > 1.0 + tol:
            return False
        if len(self.offsets) == 0:
            return True
        return bool(np.all(self.normals @ v <= self.offsets + tol))

    def contains_batch(self, V: np.ndarray, tol: float = _FEAS_TOL) -> np.ndarray:
        inside = np.linalg.norm(V, axis=1) <= 1.0 + tol
        if len(self.offsets):
            slack = V @ self.normals.T - self.offsets
            inside &= slack.max(axis=1) <= tol
        return inside


def _project_ball_plane(X: np.ndarray, U: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Exact projection of each row onto {|x| <= 1, <u, x> <= c} (u unit, row-wise)."""
    slack = np.einsum("ij,ij->i", X, U) - c
    onto = X - np.maximum(slack, 0.0)[:, None] * U
    nrm2 = np.einsum("ij,ij->i", onto, onto)
    over = nrm2 > 1.0
    if over.any():
        c_o = np.minimum(c[over], 1.0)
        w = onto[over] - c_o[:, None] * U[over]
        wn = np.sqrt(np.einsum("ij,ij->i", w, w))
        radial = np.sqrt(np.maximum(0.0, 1.0 - c_o ** 2))
        safe = wn > 1e-300
        scale = np.where(safe, radial / np.where(safe, wn, 1.0), 0.0)
        onto[over] = c_o[:, None] * U[over] + scale[:, None] * w
    return onto


def _project_feasible(body: ConvexBody, X: np.ndarray, tol: float = _FEAS_TOL,
                      max_iter: int = 120) -> tuple[np.ndarray, np.ndarray]:
    """Drive each row of X into the body by most-violated-constraint projections.

    Each pass projects every violating row exactly onto the intersection of
    the ball with its worst halfspace (closed form), so only genuinely
    multi-plane corners need repeated passes.  Returns (points, residual
    violations); residuals above tolerance after the pass budget signal an
    empty body.
    """
    X = np.array(X, dtype=float)
    U, c = body.normals, body.offsets
    have_planes = len(c) > 0
    rows = np.arange(len(X))
    worst = np.full(len(X), np.inf)
    for _ in range(max_iter):
        nrm2 = np.einsum("ij,ij->i", X, X)
        ball_viol = nrm2 - 1.0  # squared-norm slack; same sign as the true one
        if have_planes:
            slack = X @ U.T - c
            j = np.argmax(slack, axis=1)
            plane_viol = slack[rows, j]
            worst = np.maximum(plane_viol, np.sqrt(np.maximum(nrm2, 0.0)) - 1.0)
        else:
            worst = np.sqrt(np.maximum(nrm2, 0.0)) - 1.0
        bad = worst > tol
        if not bad.any():
            break
        if have_planes:
            on_plane = bad & (plane_viol > tol)
            if on_plane.any():
                jj = j[on_plane]
                X[on_plane] = _project_ball_plane(X[on_plane], U[jj], c[jj])
            only_ball = bad & ~on_plane & (ball_viol > 0.0)
        else:
            only_ball = bad
        if only_ball.any():
            X[only_ball] /= np.sqrt(nrm2[only_ball])[:, None]
    return X, np.maximum(worst, 0.0)


def _support_points_pga(body: ConvexBody, dirs: np.ndarray, tol: float = 1e-8,
                        max_iter: int = 400,
                        x0: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Support extrema by projected-gradient ascent with adaptive steps.

    Fallback for bodies whose face combinatorics are too large to enumerate;
    tracks the best iterate per direction and halves stalled steps, dropping
    converged rows out of the loop.  ``x0`` warm-starts the iterates.
    """
    dirs = np.asarray(dirs, dtype=float)
    norms = np.linalg.norm(dirs, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("zero direction")
    unit = dirs / norms[:, None]
    start = unit if x0 is None else np.asarray(x0, dtype=float)
    X, viol = _project_feasible(body, start)
    if np.any(viol > 1e-6):
        raise InfeasibleBodyError("projection cannot reach the body")
    best_x = X.copy()
    best_val = np.einsum("ij,ij->i", X, dirs)
    n = len(dirs)
    eta = np.full(n, 0.25)
    eta_min = tol * 1e-2
    active = np.ones(n, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if len(idx) == 0:
            break
        cand, _ = _project_feasible(body, best_x[idx] + eta[idx, None] * unit[idx])
        vals = np.einsum("ij,ij->i", cand, dirs[idx])
        gained = vals > best_val[idx] + 1e-13
        took = idx[gained]
        best_x[took] = cand[gained]
        best_val[took] = vals[gained]
        stalled = idx[~gained]
        eta[stalled] *= 0.5
        active[stalled] = eta[stalled] >= eta_min
    return best_val, best_x


def _combination_rows(m: int, k: int) -> np.ndarray:
    """All k-subsets of range(m) as an (n_subsets, k) index array."""
    from itertools import combinations
    if k > m:
        return np.zeros((0, k), dtype=int)
    return np.array(list(combinations(range(m), k)), dtype=int).reshape(-1, k)

# Enumeration is abandoned for the ascent fallback past this many candidate faces.
_MAX_FACES = 300_000


def _face_structures(body: ConvexBody) -> dict | None:
    """Per-body cache of candidate faces for exact support queries.

    For every subset J of at most d constraints: the minimum-norm point of
    the affine flat they define, an orthonormal basis of their normal span,
    and the chord radius where the flat cuts the unit sphere.  Subsets that
    are inconsistent, rank-deficient, or miss the ball are dropped; vertex
    subsets (|J| = d) contribute feasible points directly.
    """
    if body._faces is not None:
        return body._faces
    U, c = body.normals, body.offsets
    m, d = len(c), body.d
    total = sum(math.comb(m, k) for k in range(1, min(m, d) + 1))
    if total > _MAX_FACES:
        return None
    caps = []
    vertices = np.zeros((0, d))
    for k in range(1, min(m, d) + 1):
        J = _combination_rows(m, k)
        if len(J) == 0:
            continue
        A = U[J]                      # (nJ, k, d)
        cc = c[J]                     # (nJ, k)
        x0 = np.einsum("jdk,jk->jd", np.linalg.pinv(A, rcond=1e-10), cc)
        resid = np.einsum("jkd,jd->jk", A, x0) - cc
        consistent = np.max(np.abs(resid), axis=1) <= 1e-9
        inside = np.einsum("jd,jd->j", x0, x0) <= 1.0 + 1e-12
        ok = consistent & inside
        if not ok.any():
            continue
        if k == d:
            vertices = x0[ok]
            continue
        # Orthonormal basis of span(rows), dropping rank-deficient subsets
        # (their faces are covered by smaller subsets).
        _, s, vh = np.linalg.svd(A[ok], full_matrices=False)
        full_rank = s[:, -1] > 1e-10 * s[:, 0]
        keep = np.flatnonzero(ok)[full_rank]
        if len(keep) == 0:
            continue
        x0k = x0[keep]
        caps.append({
            "k": k,
            "x0": x0k,
            "basis": vh[full_rank],
            "radius": np.sqrt(np.maximum(0.0, 1.0 - np.einsum("jd,jd->j", x0k, x0k))),
        })
    feas_vertices = vertices[body.contains_batch(vertices, tol=1e-9)] if len(vertices) else vertices
    body._faces = {"caps": caps, "vertices": feas_vertices}
    return body._faces


def _support_points(body: ConvexBody, dirs: np.ndarray, tol: float = 1e-8,
                    x0: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Maximize <u, x> over the body for each row u; returns (values, points).

    Exact for small face counts: the maximizer lies either on the sphere, on
    a sphere/flat cap, or at a constraint vertex, all of which have closed
    forms.  Falls back to projected ascent when the face combinatorics blow
    up (far beyond the intended d <= 4 regime).
    """
    faces = _face_structures(body)
    if faces is None:
        return _support_points_pga(body, dirs, tol=tol, x0=x0)
    dirs = np.asarray(dirs, dtype=float)
    if dirs.ndim == 1:
        dirs = dirs[None, :]
    norms = np.linalg.norm(dirs, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("zero direction")
    U, c = body.normals, body.offsets
    n = len(dirs)
    best_val = np.full(n, -np.inf)
    best_x = np.zeros((n, body.d))

    def consider(points: np.ndarray, owner: np.ndarray) -> None:
        # points: (n_cand, d) candidate maximizers; owner: direction index per row.
        # Ascending-value fancy assignment leaves each direction's best in place.
        if len(points) == 0:
            return
        vals = np.einsum("cd,cd->c", points, dirs[owner])
        order = np.argsort(vals, kind="stable")
        vo, oo, po = vals[order], owner[order], points[order]
        sel = vo > best_val[oo]
        best_val[oo[sel]] = vo[sel]
        best_x[oo[sel]] = po[sel]

    # Sphere point per direction.
    ball_pts = dirs / norms[:, None]
    feas = body.contains_batch(ball_pts, tol=1e-9)
    if feas.any():
        idx = np.flatnonzero(feas)
        pts = ball_pts[idx]
        vals = np.einsum("cd,cd->c", pts, dirs[idx])
        best_val[idx] = vals
        best_x[idx] = pts
    # Constraint vertices (direction-independent candidates).
    verts = faces["vertices"]
    if len(verts):
        vals = dirs @ verts.T          # (n, n_vert)
        j = np.argmax(vals, axis=1)
        v = vals[np.arange(n), j]
        better = v > best_val
        best_val[better] = v[better]
        best_x[better] = verts[j[better]]
    # Sphere caps of each flat: x0 +/- r * (component of u orthogonal to the
    # flat's normal span), plus x0 itself when u lies in that span.  Both
    # signed endpoints are needed: when the flat meets the sphere in just two
    # points (k = d-1), the feasible maximizer may be the mirrored one.
    # Chunked over flats to bound the feasibility temporaries.
    for cap in faces["caps"]:
        x0c, basis, radius = cap["x0"], cap["basis"], cap["radius"]
        chunk = max(1, 250_000 // max(1, n * max(1, len(c))))
        for lo in range(0, len(x0c), chunk):
            x0b, bb, rb = x0c[lo:lo + chunk], basis[lo:lo + chunk], radius[lo:lo + chunk]
            proj = np.einsum("jkd,nd->jnk", bb, dirs)
            w = dirs[None, :, :] - np.einsum("jnk,jkd->jnd", proj, bb)
            wn = np.sqrt(np.einsum("jnd,jnd->jn", w, w))
            safe = wn > 1e-12
            scale = np.where(safe, rb[:, None] / np.where(safe, wn, 1.0), 0.0)
            for sign in (1.0, -1.0):
                pts = x0b[:, None, :] + sign * scale[:, :, None] * w   # (nJ, n, d)
                flat_pts = pts.reshape(-1, body.d)
                slack_ok = np.ones(len(flat_pts), dtype=bool)
                if len(c):
                    slack = flat_pts @ U.T - c
                    slack_ok = slack.max(axis=1) <= 1e-9
                owner = np.tile(np.arange(n), len(x0b))
                consider(flat_pts[slack_ok], owner[slack_ok])
    if np.any(~np.isfinite(best_val)):
        raise InfeasibleBodyError("no feasible support candidate; body appears empty")
    return best_val, best_x


def width(body: ConvexBody, u: np.ndarray, tol: float = 1e-8) -> float:
    """max_{x,y in S} <u, x - y>, solved as two support problems."""
    u = np.asarray(u, dtype=float)
    vals, _ = _support_points(body, np.vstack([u, -u]), tol=tol)
    return float(vals[0] + vals[1])


def _bounding_box(body: ConvexBody, z: float) -> tuple[np.ndarray, np.ndarray]:
    if body._axis_support is None:
        eye = np.eye(body.d)
        vals, _ = _support_points(body, np.vstack([eye, -eye]))
        body._axis_support = vals
    vals = body._axis_support
    hi = vals[:body.d] + z
    lo = -vals[body.d:] - z
    return lo, hi


def _membership_inflated(body: ConvexBody, V: np.ndarray, z: float,
                         proj_tol: float = _FEAS_TOL) -> np.ndarray:
    """Mask of rows within distance z of the body (distance via projection)."""
    nrm = np.linalg.norm(V, axis=1)
    if len(body.offsets):
        slack = V @ body.normals.T - body.offsets
        worst = slack.max(axis=1)
    else:
        worst = np.full(len(V), -np.inf)
    inside = (nrm <= 1.0 + proj_tol) & (worst <= proj_tol)
    if z == 0.0:
        return inside
    # The inflated body sits inside the per-constraint inflation, so anything
    # violating that is certainly out; only the remaining shell needs the
    # projection-based distance test.
    out = (nrm > 1.0 + z + proj_tol) | (worst > z + proj_tol)
    shell = ~inside & ~out
    if shell.any():
        pts, viol = _project_feasible(body, V[shell])
        dist = np.linalg.norm(V[shell] - pts, axis=1)
        ok = (dist <= z + 1e-9) & (viol <= 1e-6)
        inside[shell] = ok
    return inside


def _sample_inflated(body: ConvexBody, z: float, rng: np.random.Generator,
                     n_samples: int) -> np.ndarray:
    """Accepted uniform samples of S + z*B out of ``n_samples`` box proposals."""
    lo, hi = _bounding_box(body, z)
    V = lo + (hi - lo) * rng.random((n_samples, body.d))
    mask = _membership_inflated(body, V, z)
    accepted = V[mask]
    if len(accepted) < max(1, n_samples * 1e-4):
        raise DegenerateBodyError(
            f"accepted {len(accepted)} of {n_samples} proposals")
    return accepted


def volume_fraction_above(body: ConvexBody, z: float, x: np.ndarray,
                          threshold: float, rng: np.random.Generator,
                          n_samples: int = DEFAULT_MC_SAMPLES) -> float:
    """Monte Carlo fraction of Vol(S + zB) lying in ``<v, x> >= threshold``."""
    pts = _sample_inflated(body, z, rng, n_samples)
    return float(np.mean(pts @ np.asarray(x, dtype=float) >= threshold))


def _halving_cut(body: ConvexBody, z: float, x: np.ndarray, scale: float,
                 eps: float, rng: np.random.Generator, n_samples: int,
                 kappa: float) -> tuple[float, np.ndarray]:
    """Find y whose shifted threshold splits the inflated volume in half.

    Bisection over one shared sample set; targets a window strictly inside
    [0.5 - kappa, 0.5 + kappa] so fresh re-estimates stay within tolerance.
    Returns (y, the samples) for reuse by potential instrumentation.
    """
    pts = _sample_inflated(body, z, rng, n_samples)
    proj = pts @ np.asarray(x, dtype=float)
    lo = -scale * (1.0 + z) + eps
    hi = scale * (1.0 + z) + eps

    def frac(y: float) -> float:
        return float(np.mean(proj >= (y - eps) / scale))

    if frac(lo) < 0.5 or frac(hi) > 0.5:
        raise DegenerateBodyError("halving bisection cannot bracket the median")
    window = 0.6 * kappa
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f = frac(mid)
        if abs(f - 0.5) <= window:
            return mid, pts
        if f > 0.5:
            lo = mid
        else:
            hi = mid
    raise DegenerateBodyError("halving bisection failed to converge")


def steiner_halving_cut(body: ConvexBody, z: float, x: np.ndarray, scale: float,
                        eps: float, rng: np.random.Generator,
                        n_samples: int = DEFAULT_MC_SAMPLES,
                        kappa: float = DEFAULT_HALVING_TOL) -> float:
    y, _ = _halving_cut(body, z, x, scale, eps, rng, n_samples, kappa)
    return y


@dataclass
class MSPIteration:
    pair: tuple[int, int]
    width_unit: float
    index: int
    z: float
    y: float
    observed_first: bool
    witness_inside: bool | None
    potential_ratio: float | None


@dataclass
class MSPTrace:
    iterations: list[MSPIteration] = field(default_factory=list)
    final_pair_widths: dict = field(default_factory=dict)
    center: np.ndarray | None = None

    @property
    def rounds(self) -> int:
        return len(self.iterations)


def msp_search(features: np.ndarray, eps: float, xi: float,
               channel: InteractionChannel, rng: np.random.Generator,
               n_samples: int = DEFAULT_MC_SAMPLES,
               kappa: float = DEFAULT_HALVING_TOL,
               witness: np.ndarray | None = None,
               trace: MSPTrace | None = None) -> np.ndarray:
    """Multiscale search for the agent's parameter via conservatively cut bodies.

    Each iteration probes the widest pairwise arm direction with a near-median
    incentive threshold and keeps the halfspace consistent with the observed
    choice, shifted by ``eps`` so that bounded estimate error never expels the
    true parameter.  Returns a point of the final body (mean of interior
    samples); consumes one channel round per non-break iteration.
    """
    if eps <= 0 or xi <= 0:
        raise ValueError("eps and xi must be positive")
    A = np.asarray(features, dtype=float)
    K, d = A.shape
    pairs = [(i, j) for i in range(K) for j in range(i + 1, K)]
    diffs = np.array([A[i] - A[j] for i, j in pairs])
    scales = np.linalg.norm(diffs, axis=1)
    keep = scales > 1e-12
    pairs = [p for p, k in zip(pairs, keep) if k]
    diffs, scales = diffs[keep], scales[keep]
    if not pairs:
        raise ValueError("all arms coincide; no direction to search")
    body = ConvexBody.ball(d)
    all_dirs = np.vstack([diffs, -diffs])
    warm = None
    while True:
        sup, warm = _support_points(body, all_dirs, x0=warm)
        widths = sup[:len(pairs)] + sup[len(pairs):]
        p = int(np.argmax(widths))
        scale = float(scales[p])
        w_unit = max(float(widths[p]) / scale, 0.0)
        i1, i2 = pairs[p]
        x_t = diffs[p] / scale
        index = math.floor(-math.log2(w_unit)) if w_unit > 0 else 64
        z_i = 2.0 ** (-index) / (8.0 * d)
        if z_i < 4.0 * eps / scale:
            break
        y, pts = _halving_cut(body, z_i, x_t, scale, eps, rng, n_samples, kappa)
        observed = channel.propose(_pair_incentive(K, i1, i2, d, xi, y))
        if observed == i1:
            new_body = body.cut(-x_t, -(y - eps) / scale)
        else:
            new_body = body.cut(x_t, (y + eps) / scale)
        if trace is not None:
            n1 = len(pts)
            n2 = int(np.count_nonzero(_membership_inflated(new_body, pts, z_i)))
            trace.iterations.append(MSPIteration(
                pair=(i1, i2), width_unit=w_unit, index=index, z=z_i, y=y,
                observed_first=observed == i1,
                witness_inside=None if witness is None else new_body.contains(witness, tol=1e-7),
                potential_ratio=n2 / n1 if n1 else None,
            ))
        body = new_body
    center = np.mean(_sample_inflated(body, 0.0, rng, n_samples), axis=0)
    if trace is not None:
        trace.center = center
        sup, _ = _support_points(body, all_dirs, x0=warm)
        for q, (i1, i2) in enumerate(pairs):
            trace.final_pair_widths[(i1, i2)] = float(sup[q] + sup[q + len(pairs)])
    return center


def _pair_incentive(K: int, i1: int, i2: int, d: int, xi: float, y: float) -> np.ndarray:
    inc = np.zeros(K)
    inc[i1] = d + xi
    # Incentive vectors must stay nonnegative; y below -(d + xi) can only
    # arise from a body hugging the far end of the inflated range, where the
    # clamped probe still produces a (vacuous) consistent cut.
    inc[i2] = max(0.0, d + xi + y)
    return inc


# ---------------------------------------------------------------------------
# Approximate G-optimal design
# ---------------------------------------------------------------------------


@dataclass
class DesignWeights:
    """Arm weighting with a bounded-leverage certificate (C = 2)."""

    vectors: np.ndarray          # original input vectors, one row each
    weights: np.ndarray          # nonnegative, sums to one, aligned to vectors
    max_leverage: float
    bound: float

    @property
    def support(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.weights > 0)]

    def gram(self) -> np.ndarray:
        return (self.vectors * self.weights[:, None]).T @ self.vectors

    def leverages(self) -> np.ndarray:
        Ginv = np.linalg.pinv(self.gram(), rcond=1e-12)
        return np.einsum("ij,jk,ik->i", self.vectors, Ginv, self.vectors)


def approx_g_optimal_design(Z, C: float = 2.0, max_iter: int = 10_000) -> DesignWeights:
    """Frank-Wolfe on log-det until every vector's leverage is at most C * d.

    Duplicate vectors collapse onto their first occurrence; rank-deficient
    inputs are handled in the spanned subspace.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    n, d_amb = Z.shape
    uniq, inverse = np.unique(Z, axis=0, return_inverse=True)
    first = np.full(len(uniq), -1, dtype=int)
    for idx, u in enumerate(inverse):
        if first[u] < 0:
            first[u] = idx
    # Work in the subspace actually spanned.
    svd_u, svd_s, _ = np.linalg.svd(uniq.T, full_matrices=False)
    rank = int(np.sum(svd_s > 1e-12 * (svd_s[0] if len(svd_s) else 1.0)))
    if rank == 0:
        w = np.zeros(n)
        w[first[0]] = 1.0
        return DesignWeights(Z, w, 0.0, C * d_amb)
    basis = svd_u[:, :rank]
    W = uniq @ basis
    m = len(uniq)
    weights = np.full(m, 1.0 / m)
    bound = C * rank
    lev = None
    for _ in range(max_iter):
        G = (W * weights[:, None]).T @ W
        lev = np.einsum("ij,jk,ik->i", W, np.linalg.solve(G, np.eye(rank)), W)
        worst = float(lev.max())
        if worst <= bound:
            break
        j = int(np.argmax(lev))
        step = (worst / rank - 1.0) / (worst - 1.0)
        weights *= (1.0 - step)
        weights[j] += step
    else:
        raise DesignNotConvergedError(float(lev.max()), bound)
    out = np.zeros(n)
    for u, w_val in enumerate(weights):
        if w_val > 0:
            out[first[u]] += w_val
    design = DesignWeights(Z, out, float(lev.max()), C * d_amb)
    # Certificate re-checked in ambient coordinates, independent of the loop.
    assert float(design.leverages().max()) <= C * d_amb + 1e-9, \
        "leverage certificate violated"
    return design
