"""Numerical evaluation of graph forms on planar configurations.

Angle forms are evaluated exactly; fiber integrals over internal vertex positions
use importance-sampled Monte Carlo with planar Cauchy proposals. All estimates are
deterministic given (seed, samples): sampling is chunked with per-chunk derived
seeds and a fixed reduction order, so thread count can never change a result.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .braids import EnvElt, TnElt, grouplike_check, tn_to_env
from .cohomology import class_in_t, ic_graphs
from .graphs import CanonicalGraph, GraphVector

CHUNK = 65536
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MCEstimate:
    """A Monte-Carlo value with its standard error and provenance."""

    value: float
    stderr: float
    samples: int
    seed: int


def as_config(points, eps_sep: float = 1e-9) -> np.ndarray:
    """Validate a planar configuration: shape (n, 2), pairwise separated."""
    cfg = np.asarray(points, dtype=float)
    if cfg.ndim != 2 or cfg.shape[1] != 2:
        raise ValueError("configuration must be n points in the plane")
    if not np.all(np.isfinite(cfg)):
        raise ValueError("configuration has non-finite entries")
    n = cfg.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            if math.hypot(*(cfg[i] - cfg[j])) <= eps_sep:
                raise ValueError(f"points {i + 1} and {j + 1} coincide")
    return cfg


def _diameter(cfg: np.ndarray) -> float:
    n = cfg.shape[0]
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            best = max(best, math.hypot(*(cfg[i] - cfg[j])))
    return best


def angle_form_eval(cfg, a: int, b: int, v) -> float:
    """Value of dArg(z_a - z_b)/2pi on the velocity v."""
    cfg = as_config(cfg)
    v = np.asarray(v, dtype=float)
    if v.shape != cfg.shape:
        raise ValueError("velocity shape must match the configuration")
    if a == b:
        raise ValueError("angle form needs two distinct points")
    w = cfg[a - 1] - cfg[b - 1]
    u = v[a - 1] - v[b - 1]
    r2 = float(w[0] * w[0] + w[1] * w[1])
    return float(w[0] * u[1] - w[1] * u[0]) / (TWO_PI * r2)


def _column_velocities(g: CanonicalGraph, args) -> np.ndarray:
    """Constant per-column velocity differences, shape (E, C, 2).

    Columns are the 2m fiber directions (internal vertex ascending, x before y)
    followed by the supplied tangent arguments lifted with zero fiber velocity.
    """
    n, m = g.n_ext, g.n_int
    edges = g.edges
    ncols = 2 * m + len(args)
    u = np.zeros((len(edges), ncols, 2))
    for e, (x, y) in enumerate(edges):
        for t in range(m):
            vtx = n + 1 + t
            s = (1.0 if x == vtx else 0.0) - (1.0 if y == vtx else 0.0)
            if s:
                u[e, 2 * t, 0] = s
                u[e, 2 * t + 1, 1] = s
        for k, arg in enumerate(args):
            va = arg[x - 1] if x <= n else np.zeros(2)
            vb = arg[y - 1] if y <= n else np.zeros(2)
            u[e, 2 * m + k] = va - vb
    return u


def _batch_det(mat: np.ndarray) -> np.ndarray:
    """Determinants of a (k, E, E) stack; explicit cofactors for tiny E."""
    e = mat.shape[1]
    if e == 1:
        return mat[:, 0, 0]
    if e == 2:
        return mat[:, 0, 0] * mat[:, 1, 1] - mat[:, 0, 1] * mat[:, 1, 0]
    if e == 3:
        return (
            mat[:, 0, 0] * (mat[:, 1, 1] * mat[:, 2, 2] - mat[:, 1, 2] * mat[:, 2, 1])
            - mat[:, 0, 1] * (mat[:, 1, 0] * mat[:, 2, 2] - mat[:, 1, 2] * mat[:, 2, 0])
            + mat[:, 0, 2] * (mat[:, 1, 0] * mat[:, 2, 1] - mat[:, 1, 1] * mat[:, 2, 0])
        )
    return np.linalg.det(mat)


def _cauchy_chunk(rng, k: int, m: int, center, scale: float):
    """Sample k positions for each of m internal vertices; returns (points, density)."""
    upt = rng.random((k, m))
    theta = rng.random((k, m)) * TWO_PI
    r = scale * np.sqrt(1.0 / (1.0 - upt) ** 2 - 1.0)
    pts = np.empty((k, m, 2))
    pts[:, :, 0] = center[0] + r * np.cos(theta)
    pts[:, :, 1] = center[1] + r * np.sin(theta)
    dens = scale / (TWO_PI * (r * r + scale * scale) ** 1.5)
    return pts, np.prod(dens, axis=1)


def graph_form_eval(
    g: CanonicalGraph,
    cfg,
    args,
    samples: int = 100_000,
    seed: int = 0,
    return_chunks: bool = False,
):
    """Monte-Carlo estimate of the fiber-integrated graph form on the arguments.

    Rows of the determinant follow the canonical edge order; columns are fiber
    directions then arguments, with the fiber oriented so that the structure
    equation dA + [A, A]/2 = 0 holds for the assembled connection (a factor
    (-1)^m relative to the per-vertex dx dy order). If the number of arguments
    does not match the form degree the result is identically zero and no
    sampling happens.
    """
    cfg = as_config(cfg)
    if g.n_ext != cfg.shape[0]:
        raise ValueError("configuration size does not match the graph")
    args = [np.asarray(a, dtype=float) for a in args]
    for a in args:
        if a.shape != cfg.shape:
            raise ValueError("argument shape must match the configuration")
    if len(args) != g.star_degree:
        est = MCEstimate(0.0, 0.0, 0, seed)
        return (est, np.zeros(0)) if return_chunks else est

    m = g.n_int
    ucols = _column_velocities(g, args)
    if m == 0:
        w = cfg[g.edges[0][0] - 1] - cfg[g.edges[0][1] - 1]
        r2 = w[0] * w[0] + w[1] * w[1]
        val = (w[0] * ucols[0, 0, 1] - w[1] * ucols[0, 0, 0]) / (TWO_PI * r2)
        est = MCEstimate(float(val), 0.0, 0, seed)
        return (est, np.zeros(0)) if return_chunks else est

    center = cfg.mean(axis=0)
    scale = _diameter(cfg)
    if scale < 1e-12:
        scale = 1.0
    orient = -1.0 if m % 2 else 1.0

    n = g.n_ext
    edges = np.array(g.edges) - 1
    sums, sqsums, chunk_means = [], [], []
    done = 0
    chunk_index = 0
    while done < samples:
        k = min(CHUNK, samples - done)
        rng = np.random.default_rng(np.random.SeedSequence([seed, chunk_index]))
        pts, dens = _cauchy_chunk(rng, k, m, center, scale)
        pos = np.empty((k, n + m, 2))
        pos[:, :n] = cfg
        pos[:, n:] = pts
        w = pos[:, edges[:, 0]] - pos[:, edges[:, 1]]
        r2 = w[:, :, 0] ** 2 + w[:, :, 1] ** 2
        mat = (
            w[:, :, 0, None] * ucols[None, :, :, 1]
            - w[:, :, 1, None] * ucols[None, :, :, 0]
        ) / (TWO_PI * r2[:, :, None])
        vals = orient * _batch_det(mat) / dens
        sums.append(float(vals.sum()))
        sqsums.append(float((vals * vals).sum()))
        chunk_means.append(float(vals.mean()))
        done += k
        chunk_index += 1
    total = math.fsum(sums)
    total_sq = math.fsum(sqsums)
    mean = total / samples
    var = max(total_sq - total * total / samples, 0.0)
    stderr = math.sqrt(var / (samples - 1) / samples) if samples > 1 else float("inf")
    est = MCEstimate(mean, stderr, samples, seed)
    return (est, np.array(chunk_means)) if return_chunks else est


# ---------------------------------------------------------------------------
# the connection

@lru_cache(maxsize=None)
def _weight2_classes(n: int):
    """Star-degree-1 weight-2 graphs with their degree-0 coordinates."""
    out = []
    for gs in ic_graphs(n, 2).values():
        for g in gs:
            if g.star_degree == 1:
                cls = class_in_t(GraphVector.single(g))
                out.append((g, dict(cls.coeffs)))
    return tuple(out)


def connection_eval(n: int, trunc: int, cfg, v, samples: int = 100_000, seed: int = 0):
    """Evaluate the flat connection on one tangent vector, truncated by weight.

    Returns {1: {key: float}, 2: {key: MCEstimate}} in the tower basis; the
    weight-1 part is exact, the weight-2 part is one fiber integral per graph.
    """
    if not 1 <= trunc <= 2:
        raise ValueError("supported truncation is weight 1 or 2")
    cfg = as_config(cfg)
    v = np.asarray(v, dtype=float)
    out: dict[int, dict] = {1: {}}
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            key = (b, (a,))
            out[1][key] = angle_form_eval(cfg, a, b, v)
    if trunc >= 2:
        out[2] = {}
        for i, (g, coords) in enumerate(_weight2_classes(n)):
            est = graph_form_eval(g, cfg, [v], samples=samples, seed=seed + 7919 * i)
            for key, c in coords.items():
                prev = out[2].get(key)
                add = est.value * float(c)
                err = abs(float(c)) * est.stderr
                if prev is None:
                    out[2][key] = MCEstimate(add, err, est.samples, seed)
                else:
                    out[2][key] = MCEstimate(
                        prev.value + add,
                        math.hypot(prev.stderr, err),
                        prev.samples + est.samples,
                        seed,
                    )
    return out


def _fd_weight2_coeffs(n, cfg, direction, arg, h, samples, seed):
    """Central difference of the weight-2 coefficients along one coordinate move.

    Common random numbers: both displaced evaluations reuse the same seed, so the
    correlated noise cancels in the difference; the spread comes from the chunk
    means of the differences. The step must stay large enough that samples near
    a moving external are a routine part of every chunk rather than rare huge
    outliers; h around 1e-2 of the diameter keeps the difference variance finite.
    """
    plus = cfg + h * direction
    minus = cfg - h * direction
    diff: dict = {}
    err: dict = {}
    for i, (g, coords) in enumerate(_weight2_classes(n)):
        ep, chp = graph_form_eval(g, plus, [arg], samples, seed + 7919 * i, True)
        em, chm = graph_form_eval(g, minus, [arg], samples, seed + 7919 * i, True)
        if len(chp) > 1:
            per_chunk = (chp - chm) / (2 * h)
            d = float(np.mean(per_chunk))
            spread = float(np.std(per_chunk, ddof=1)) / math.sqrt(len(per_chunk))
        else:
            d = (ep.value - em.value) / (2 * h)
            spread = (ep.stderr + em.stderr) / (2 * h)
        for key, c in coords.items():
            diff[key] = diff.get(key, 0.0) + d * float(c)
            err[key] = math.hypot(err.get(key, 0.0), spread * abs(float(c)))
    return diff, err


def flatness_residual(
    cfgs,
    n: int = 3,
    h_rel: float = 1e-2,
    samples: int = 100_000,
    seed: int = 0,
    budget_cap: float = 5e-2,
):
    """Residual of dA + [A, A]/2 = 0 on coordinate bivectors, with error budget.

    The weight-1 identity is exact up to finite-difference error; the weight-2
    residual combines the differenced weight-2 form with the exact weight-1
    bracket term. The budget is propagated MC error plus a step-doubling gap.
    """
    from .braids import tn_bracket

    reports = []
    for cfg in cfgs:
        cfg = as_config(cfg)
        h = h_rel * max(_diameter(cfg), 1.0)
        coords = [(p, ax) for p in range(n) for ax in (0, 1)]
        res1 = 0.0
        res2 = 0.0
        noise = 0.0
        gap = 0.0
        for ii in range(len(coords)):
            for jj in range(ii + 1, len(coords)):
                e_i = np.zeros((n, 2))
                e_i[coords[ii]] = 1.0
                e_j = np.zeros((n, 2))
                e_j[coords[jj]] = 1.0

                # weight 1: d of the exact angle coefficients, no bracket term
                def a1(c, arg):
                    return connection_eval(n, 1, c, arg, 0, seed)[1]

                da1 = {}
                for key in a1(cfg, e_j):
                    pp = a1(cfg + h * e_i, e_j)[key] - a1(cfg - h * e_i, e_j)[key]
                    qq = a1(cfg + h * e_j, e_i)[key] - a1(cfg - h * e_j, e_i)[key]
                    da1[key] = (pp - qq) / (2 * h)
                res1 = max(res1, max(abs(x) for x in da1.values()))

                # weight 2: differenced form plus the exact weight-1 bracket
                for step in (h, 2 * h):
                    d_i, err_i = _fd_weight2_coeffs(n, cfg, e_i, e_j, step, samples, seed)
                    d_j, err_j = _fd_weight2_coeffs(n, cfg, e_j, e_i, step, samples, seed)
                    x = TnElt(n, {k: Fraction(v) for k, v in a1(cfg, e_i).items() if v})
                    y = TnElt(n, {k: Fraction(v) for k, v in a1(cfg, e_j).items() if v})
                    br = tn_bracket(x, y)
                    keys = set(d_i) | set(d_j) | set(br.coeffs)
                    worst = 0.0
                    worst_err = 0.0
                    for key in keys:
                        r = (
                            d_i.get(key, 0.0)
                            - d_j.get(key, 0.0)
                            + float(br.coeffs.get(key, 0))
                        )
                        worst = max(worst, abs(r))
                        worst_err = max(
                            worst_err,
                            math.hypot(err_i.get(key, 0.0), err_j.get(key, 0.0)),
                        )
                    if step == h:
                        first = worst
                        res2 = max(res2, worst)
                        noise = max(noise, worst_err)
                    else:
                        gap = max(gap, abs(worst - first))
        budget = noise + gap
        if noise > budget_cap:
            warnings.warn("finite-difference step is small relative to MC noise")
        reports.append(
            {
                "weight1_residual": res1,
                "weight2_residual": res2,
                "noise": noise,
                "refinement_gap": gap,
                "budget": budget,
                "pass": res1 <= h * h and res2 < 3 * budget and budget <= budget_cap,
            }
        )
    return reports


# ---------------------------------------------------------------------------
# holonomy and the associator

def _gauss_legendre(nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def holonomy(
    path,
    velocity,
    n: int,
    trunc: int = 2,
    panels: int = 64,
    nodes: int = 8,
    samples: int = 0,
    seed: int = 0,
) -> EnvElt:
    """Path-ordered exponential of the connection, truncated by weight.

    Per panel the first integral and the leading commutator correction are read
    off Gauss-Legendre nodes; panel factors multiply in path order (earlier
    factors on the left). Weight-2 connection terms are included when a sampling
    budget is given; otherwise only the exact weight-1 part is integrated.
    """
    xg, wg = _gauss_legendre(nodes)
    out = EnvElt.unit(n, trunc)
    for p in range(panels):
        s0, s1 = p / panels, (p + 1) / panels
        width = s1 - s0
        vals = []
        for xi, wi in zip(xg, wg):
            s = s0 + width * xi
            cfg = np.asarray(path(s), dtype=float)
            vel = np.asarray(velocity(s), dtype=float)
            a = connection_eval(n, trunc if samples else 1, cfg, vel, samples, seed)
            coeffs = {k: Fraction(v) for k, v in a[1].items() if v}
            if samples and trunc >= 2:
                for k, est in a[2].items():
                    if est.value:
                        coeffs[k] = coeffs.get(k, Fraction(0)) + Fraction(est.value)
            vals.append((wi * width, TnElt(n, coeffs)))
        i1 = TnElt.zero(n)
        for wq, a in vals:
            i1 = i1 + a.scaled(Fraction(wq))
        e1 = tn_to_env(i1, trunc)
        factor = EnvElt.unit(n, trunc) + e1 + (e1 * e1).scaled(Fraction(1, 2))
        if trunc >= 2:
            comm = TnElt.zero(n)
            for i in range(len(vals)):
                for j in range(i + 1, len(vals)):
                    wi, ai = vals[i]
                    wj, aj = vals[j]
                    comm = comm + ai.bracket(aj).scaled(Fraction(wi * wj))
            factor = factor + tn_to_env(comm, trunc).scaled(Fraction(1, 2))
        out = out * factor
    return out


def at_associator(samples: int = 4_000_000, seed: int = 0, nodes: int = 12) -> dict:
    """Holonomy along the collinear pinch path, reported at truncation weight 2.

    The weight-1 pullback vanishes exactly on collinear motion, so the result is
    1 + c [t13,t23]. The endpoint substitution x = (1 - cos(pi s))/2 clusters
    quadrature nodes at both degenerations; two refinement levels are compared
    and their gap reported alongside the propagated MC error.
    """
    tripod = CanonicalGraph(3, 1, ((1, 4), (2, 4), (3, 4)))
    key = (3, (1, 2))

    def coefficient(nnodes: int, budget: int, tag: int):
        xg, wg = _gauss_legendre(nnodes)
        per_node = max(budget // nnodes, CHUNK)
        total = 0.0
        err2 = 0.0
        used = 0
        for i, (xi, wi) in enumerate(zip(xg, wg)):
            x = (1.0 - math.cos(math.pi * xi)) / 2.0
            dx = math.pi * math.sin(math.pi * xi) / 2.0
            cfg = np.array([[0.0, 0.0], [x, 0.0], [1.0, 0.0]])
            vel = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
            est = graph_form_eval(tripod, cfg, [vel], per_node, seed + 104729 * (tag * 64 + i))
            total += wi * dx * est.value
            err2 += (wi * dx * est.stderr) ** 2
            used += est.samples
        return total, math.sqrt(err2), used

    coarse, err_c, used_c = coefficient(nodes, samples // 3, 1)
    fine, err_f, used_f = coefficient(2 * nodes, 2 * samples // 3, 2)
    cls = class_in_t(GraphVector.single(tripod))
    sign = int(cls.coeffs[key])
    c = fine * sign
    series = TnElt(3, {key: Fraction(c)}) if c else TnElt.zero(3)
    phi = EnvElt.unit(3, 2) + tn_to_env(series, 2)
    weight1 = [0.0, 0.0, 0.0]
    return {
        "weights": {
            "1": weight1,
            "2": {"basis": "[t13,t23]", "coeff": c, "stderr": err_f * abs(sign)},
        },
        "refinement_gap": abs(fine - coarse),
        "grouplike": all(grouplike_check(phi).values()),
        "seed": seed,
        "samples": used_c + used_f,
        "nodes": [nodes, 2 * nodes],
    }


def arnold_numeric_check(configs: int = 100, seed: int = 0) -> dict:
    """Three-term wedge identity at random configurations and bivectors.

    The identity w_ab w_bc + w_bc w_ca + w_ca w_ab = 0 holds pointwise for the
    logarithmic forms dlog(z_a - z_b)/2pi i; that residual is max_residual. For
    their imaginary parts alone (the angle forms) the sum does not vanish
    pointwise: it equals the corresponding real-part sum, so the difference of
    the two is identically zero but each one separately is an honest nonzero
    2-form. Both are reported; only the logarithmic identity is a theorem.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    worst = 0.0
    worst_angle = 0.0
    for _ in range(configs):
        while True:
            cfg = rng.standard_normal((3, 2)) * rng.uniform(0.5, 2.0)
            if _diameter(cfg) > 0 and min(
                np.hypot(*(cfg[i] - cfg[j])) for i in range(3) for j in range(i + 1, 3)
            ) > 0.05:
                break
        v = rng.standard_normal((3, 2))
        w = rng.standard_normal((3, 2))
        z = cfg[:, 0] + 1j * cfg[:, 1]
        vv = v[:, 0] + 1j * v[:, 1]
        ww = w[:, 0] + 1j * w[:, 1]

        def logform(a, b, u):
            return (u[a] - u[b]) / (z[a] - z[b]) / (2j * math.pi)

        def cwedge(p1, p2):
            return logform(*p1, vv) * logform(*p2, ww) - logform(*p1, ww) * logform(*p2, vv)

        def awedge(p1, p2):
            a = angle_form_eval(cfg, p1[0] + 1, p1[1] + 1, v) * angle_form_eval(cfg, p2[0] + 1, p2[1] + 1, w)
            b = angle_form_eval(cfg, p1[0] + 1, p1[1] + 1, w) * angle_form_eval(cfg, p2[0] + 1, p2[1] + 1, v)
            return a - b

        pairs = [((0, 1), (1, 2)), ((1, 2), (2, 0)), ((2, 0), (0, 1))]
        worst = max(worst, abs(sum(cwedge(p, q) for p, q in pairs)))
        worst_angle = max(worst_angle, abs(sum(awedge(p, q) for p, q in pairs)))
    return {
        "configs": configs,
        "max_residual": worst,
        "max_angle_residual": worst_angle,
    }
