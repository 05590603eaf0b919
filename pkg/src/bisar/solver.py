"""Barrier-Newton interior-point solver for the planner's convex subproblems.

Handles a smooth convex objective (constant + linear + diagonal quadratic +
nonnegative cubic + smoothed-norm terms) over four constraint families:

- linear rows a.z <= b
- balls (z_i + dx)^2 + (z_j + dy)^2 <= rho^2
- second-order cones ||delta q|| <= d*V, via the barrier -log(d^2 V^2 - ||.||^2)
- inverse-square rows 1/z_q^2 <= a0 + aq z_q + av z_v

plus variable box bounds.  The Newton systems are solved densely for small
problems and through a symmetric banded Cholesky otherwise; phase-one adds
one relaxation variable handled as a bordered (arrow) column.

All arithmetic is plain float64 numpy in a fixed order, so repeated solves
are bit-identical.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

_DENSE_MAX = 64
_ALPHA_MIN = 1e-14
_ARMIJO = 0.25
_BACKTRACK = 0.5


class SolverError(ValueError):
    pass


@dataclass
class SolveOutcome:
    status: str  # optimal | max-iter | infeasible-detected
    z: np.ndarray
    objective: float
    kkt: dict
    newton_iters: int
    barrier_stages: int
    diagnostics: dict = field(default_factory=dict)


@dataclass
class PhaseOneOutcome:
    z: np.ndarray
    min_slack: float
    feasible: bool
    status: str
    newton_iters: int


class ConvexSubproblem:
    """Container for one convex subproblem; build, finalize, then solve."""

    def __init__(self, n, lo=None, hi=None, var_names=None):
        self.n = int(n)
        self.lo = np.full(self.n, -np.inf) if lo is None else np.asarray(lo, float).copy()
        self.hi = np.full(self.n, np.inf) if hi is None else np.asarray(hi, float).copy()
        self.var_names = var_names
        self.obj_const = 0.0
        self.obj_lin = np.zeros(self.n)
        self.obj_quad = np.zeros(self.n)
        self.obj_cubic = np.zeros(self.n)
        self._norm_terms = []
        self._lin_rows = []
        self._balls = []
        self._socs = []
        self._invsqs = []
        self._final = False

    # -- construction ----------------------------------------------------
    def set_objective(self, const=0.0, lin=None, quad=None, cubic=None):
        self.obj_const = float(const)
        for arr, src in ((self.obj_lin, lin), (self.obj_quad, quad),
                         (self.obj_cubic, cubic)):
            arr[:] = 0.0
            if src is None:
                continue
            if isinstance(src, dict):
                for k, v in src.items():
                    arr[k] = float(v)
            else:
                arr[:] = np.asarray(src, float)

    def add_norm_term(self, ix, iy, cx=0.0, cy=0.0, weight=1.0, eps=1e-3):
        """Adds weight * sqrt((z_ix+cx)^2 + (z_iy+cy)^2 + eps^2) to the objective."""
        self._norm_terms.append((int(ix), int(iy), float(cx), float(cy),
                                 float(weight), float(eps)))

    def add_linear(self, idx, coef, b):
        """Row sum(coef_k * z_idx_k) <= b."""
        self._lin_rows.append((tuple(int(i) for i in idx),
                               tuple(float(c) for c in coef), float(b)))

    def add_ball(self, ix, iy, dx, dy, rho):
        if rho <= 0:
            raise SolverError("ball radius must be positive")
        self._balls.append((int(ix), int(iy), float(dx), float(dy), float(rho)))

    def add_soc(self, ix, iy, iv, jx=None, jy=None, cx=0.0, cy=0.0, dcoef=1.0):
        """||(z_ix - z_jx + cx, z_iy - z_jy + cy)|| <= dcoef * z_iv."""
        if dcoef <= 0:
            raise SolverError("soc speed coefficient must be positive")
        self._socs.append((int(ix), int(iy), int(iv),
                           -1 if jx is None else int(jx),
                           -1 if jy is None else int(jy),
                           float(cx), float(cy), float(dcoef)))

    def add_invsq(self, iq, a0, aq, iv=None, av=0.0):
        """1/z_iq^2 <= a0 + aq*z_iq + av*z_iv; requires lo[iq] > 0."""
        self._invsqs.append((int(iq), float(a0), float(aq),
                             -1 if iv is None else int(iv), float(av)))

    # -- finalization ----------------------------------------------------
    def finalize(self):
        if self._final:
            return self
        if np.any(self.lo > self.hi):
            raise SolverError("inconsistent bounds: lo > hi")
        bad = (self.obj_cubic > 0) & (self.lo < 0)
        if np.any(self.obj_cubic < 0) or np.any(bad):
            raise SolverError("cubic objective terms need coef >= 0 and lo >= 0")
        for iq, *_ in self._invsqs:
            if not (self.lo[iq] > 0):
                raise SolverError(f"inverse-square variable {iq} needs a positive lower bound")

        width = max((len(i) for i, _, _ in self._lin_rows), default=1)
        m_l = len(self._lin_rows)
        self.lin_idx = np.zeros((m_l, width), dtype=int)
        self.lin_coef = np.zeros((m_l, width))
        self.lin_b = np.zeros(m_l)
        for r, (idx, coef, b) in enumerate(self._lin_rows):
            # pad short rows by repeating their first index with coef 0 so
            # padded pairs stay inside the band
            self.lin_idx[r, :] = idx[0] if idx else 0
            self.lin_idx[r, :len(idx)] = idx
            self.lin_coef[r, :len(coef)] = coef
            self.lin_b[r] = b

        def cols(rows, k):
            return np.array([r[k] for r in rows], dtype=float) if rows else np.zeros(0)

        def icols(rows, k):
            return np.array([r[k] for r in rows], dtype=int) if rows else np.zeros(0, int)

        self.ball_ix, self.ball_iy = icols(self._balls, 0), icols(self._balls, 1)
        self.ball_dx, self.ball_dy = cols(self._balls, 2), cols(self._balls, 3)
        self.ball_rho = cols(self._balls, 4)
        self.soc_ix, self.soc_iy, self.soc_iv = (icols(self._socs, 0),
                                                 icols(self._socs, 1),
                                                 icols(self._socs, 2))
        self.soc_jx, self.soc_jy = icols(self._socs, 3), icols(self._socs, 4)
        self.soc_cx, self.soc_cy, self.soc_d = (cols(self._socs, 5),
                                                cols(self._socs, 6),
                                                cols(self._socs, 7))
        self.isq_iq = icols(self._invsqs, 0)
        self.isq_a0, self.isq_aq = cols(self._invsqs, 1), cols(self._invsqs, 2)
        self.isq_iv = icols(self._invsqs, 3)
        self.isq_av = cols(self._invsqs, 4)

        bw = 0
        for idx, _, _ in self._lin_rows:
            if len(idx) > 1:
                bw = max(bw, max(idx) - min(idx))
        for b in self._balls:
            bw = max(bw, abs(b[0] - b[1]))
        for s in self._socs:
            ids = [s[0], s[1], s[2]] + [k for k in (s[3], s[4]) if k >= 0]
            bw = max(bw, max(ids) - min(ids))
        for q in self._invsqs:
            if q[3] >= 0:
                bw = max(bw, abs(q[0] - q[3]))
        for t in self._norm_terms:
            bw = max(bw, abs(t[0] - t[1]))
        self.bandwidth = bw
        self._final = True
        return self

    @property
    def m(self):
        """Number of inequality constraints including finite bounds."""
        self.finalize()
        return (len(self.lin_b) + len(self.ball_rho) + len(self.soc_d)
                + len(self.isq_iq) + int(np.isfinite(self.lo).sum())
                + int(np.isfinite(self.hi).sum()))

    # -- evaluation ------------------------------------------------------
    def constraint_values(self, z):
        """Slack of every constraint at z (positive = satisfied strictly).

        Order: linear rows, balls, socs, inverse-squares, lower bounds,
        upper bounds (finite ones only).
        """
        self.finalize()
        z = np.asarray(z, float)
        parts = []
        if len(self.lin_b):
            parts.append(self.lin_b - np.einsum("rk,rk->r", self.lin_coef, z[self.lin_idx]))
        if len(self.ball_rho):
            p1 = z[self.ball_ix] + self.ball_dx
            p2 = z[self.ball_iy] + self.ball_dy
            parts.append(self.ball_rho**2 - p1 * p1 - p2 * p2)
        if len(self.soc_d):
            dx = z[self.soc_ix] - np.where(self.soc_jx >= 0, z[self.soc_jx], 0.0) + self.soc_cx
            dy = z[self.soc_iy] - np.where(self.soc_jy >= 0, z[self.soc_jy], 0.0) + self.soc_cy
            a = self.soc_d * z[self.soc_iv]
            parts.append(a * a - dx * dx - dy * dy)
        if len(self.isq_iq):
            q = z[self.isq_iq]
            aff = self.isq_a0 + self.isq_aq * q \
                + self.isq_av * np.where(self.isq_iv >= 0, z[self.isq_iv], 0.0)
            parts.append(aff - 1.0 / (q * q))
        flo = np.isfinite(self.lo)
        fhi = np.isfinite(self.hi)
        parts.append(z[flo] - self.lo[flo])
        parts.append(self.hi[fhi] - z[fhi])
        return np.concatenate(parts) if parts else np.zeros(0)

    def max_violation(self, z):
        vals = self.constraint_values(z)
        return float(max(0.0, -vals.min())) if len(vals) else 0.0

    def dump(self, fh):
        """Plain-text reproduction record of the subproblem."""
        self.finalize()
        w = fh.write
        w(f"n {self.n}\n")
        if self.var_names:
            w("vars " + " ".join(self.var_names) + "\n")
        w("lo " + " ".join(repr(v) for v in self.lo) + "\n")
        w("hi " + " ".join(repr(v) for v in self.hi) + "\n")
        w(f"obj_const {self.obj_const!r}\n")
        for name, arr in (("obj_lin", self.obj_lin), ("obj_quad", self.obj_quad),
                          ("obj_cubic", self.obj_cubic)):
            nz = np.nonzero(arr)[0]
            for i in nz:
                w(f"{name} {i} {arr[i]!r}\n")
        for t in self._norm_terms:
            w("norm " + " ".join(repr(v) for v in t) + "\n")
        for idx, coef, b in self._lin_rows:
            w("linear " + " ".join(f"{i}:{c!r}" for i, c in zip(idx, coef)) + f" <= {b!r}\n")
        for bl in self._balls:
            w("ball " + " ".join(repr(v) for v in bl) + "\n")
        for s in self._socs:
            w("soc " + " ".join(repr(v) for v in s) + "\n")
        for q in self._invsqs:
            w("invsq " + " ".join(repr(v) for v in q) + "\n")


# -- working problem (plain or phase-one extended) -----------------------

class _Work:
    """Barrier evaluation of a (possibly slack-extended) subproblem."""

    def __init__(self, prob: ConvexSubproblem, s_mode=False, s_lo=-np.inf,
                 prox=None):
        prob.finalize()
        self.p = prob
        self.s_mode = s_mode
        self.n = prob.n + (1 if s_mode else 0)
        self.s_idx = prob.n if s_mode else None
        self.lo = np.concatenate([prob.lo, [s_lo]]) if s_mode else prob.lo
        self.hi = np.concatenate([prob.hi, [np.inf]]) if s_mode else prob.hi
        self.lin = np.concatenate([np.zeros(prob.n), [1.0]]) if s_mode \
            else prob.obj_lin
        self.quad = np.concatenate([prob.obj_quad * 0, [0.0]]) if s_mode \
            else prob.obj_quad
        self.cubic = np.concatenate([prob.obj_cubic * 0, [0.0]]) if s_mode \
            else prob.obj_cubic
        self.has_cubic = bool(np.any(self.cubic))
        self.const = 0.0 if s_mode else prob.obj_const
        self.norm_terms = [] if s_mode else prob._norm_terms
        if s_mode and prox is not None:
            terms = prox if isinstance(prox, list) else [prox]
            for idxs, targets, wgt in terms:
                for i, tg in zip(idxs, targets):
                    self.quad[i] += wgt
                    self.lin[i] += -2.0 * wgt * tg
                    self.const += wgt * tg * tg
        # relaxation scales (sigma); zero disables relaxation of a family row
        self.sg_lin = np.ones(len(prob.lin_b)) if s_mode else np.zeros(len(prob.lin_b))
        self.sg_ball = np.ones(len(prob.ball_rho)) if s_mode else np.zeros(len(prob.ball_rho))
        self.sg_soc = np.ones(len(prob.soc_d)) if s_mode else np.zeros(len(prob.soc_d))
        self.sg_isq = np.ones(len(prob.isq_iq)) if s_mode else np.zeros(len(prob.isq_iq))
        self.flo = np.isfinite(self.lo)
        self.fhi = np.isfinite(self.hi)
        self.m = (len(prob.lin_b) + len(prob.ball_rho) + len(prob.soc_d)
                  + len(prob.isq_iq) + int(self.flo.sum()) + int(self.fhi.sum()))
        self.bandwidth = max(prob.bandwidth, 1)
        self.dense = prob.n <= _DENSE_MAX or self.bandwidth >= prob.n

    # objective on the extended variable vector
    def f(self, z):
        v = self.const + self.lin @ z + self.quad @ (z * z)
        if self.has_cubic:
            v += self.cubic @ (z**3)
        for ix, iy, cx, cy, wgt, eps in self.norm_terms:
            v += wgt * math.sqrt((z[ix] + cx)**2 + (z[iy] + cy)**2 + eps * eps)
        return v

    def _family_state(self, z):
        p = self.p
        s = z[self.s_idx] if self.s_mode else 0.0
        st = {}
        if len(p.lin_b):
            st["lin_F"] = p.lin_b + self.sg_lin * s \
                - np.einsum("rk,rk->r", p.lin_coef, z[p.lin_idx])
        if len(p.ball_rho):
            a = p.ball_rho + self.sg_ball * s
            p1 = z[p.ball_ix] + p.ball_dx
            p2 = z[p.ball_iy] + p.ball_dy
            st["ball_a"], st["ball_p1"], st["ball_p2"] = a, p1, p2
            st["ball_F"] = a * a - p1 * p1 - p2 * p2
        if len(p.soc_d):
            dx = z[p.soc_ix] - np.where(p.soc_jx >= 0, z[p.soc_jx], 0.0) + p.soc_cx
            dy = z[p.soc_iy] - np.where(p.soc_jy >= 0, z[p.soc_jy], 0.0) + p.soc_cy
            a = p.soc_d * z[p.soc_iv] + self.sg_soc * s
            st["soc_a"], st["soc_dx"], st["soc_dy"] = a, dx, dy
            st["soc_F"] = a * a - dx * dx - dy * dy
        if len(p.isq_iq):
            q = z[p.isq_iq]
            aff = p.isq_a0 + p.isq_aq * q + self.sg_isq * s \
                + p.isq_av * np.where(p.isq_iv >= 0, z[p.isq_iv], 0.0)
            st["isq_q"] = q
            st["isq_F"] = aff - 1.0 / (q * q)
        return st

    def interior(self, z, margin=0.0):
        """True when z is strictly inside every barrier domain."""
        if np.any(z[self.flo] - self.lo[self.flo] <= margin):
            return False
        if np.any(self.hi[self.fhi] - z[self.fhi] <= margin):
            return False
        st = self._family_state(z)
        for key in ("lin_F", "ball_F", "soc_F", "isq_F"):
            if key in st and np.any(st[key] <= margin):
                return False
        for key in ("ball_a", "soc_a"):
            if key in st and np.any(st[key] <= 0.0):
                return False
        if "isq_q" in st and np.any(st["isq_q"] <= 0.0):
            return False
        return True

    def merit(self, z, mu):
        """mu * f + barrier, or +inf outside the domain."""
        lo_s = z[self.flo] - self.lo[self.flo]
        hi_s = self.hi[self.fhi] - z[self.fhi]
        if np.any(lo_s <= 0) or np.any(hi_s <= 0):
            return np.inf
        st = self._family_state(z)
        tot = 0.0
        for key in ("lin_F", "ball_F", "soc_F", "isq_F"):
            if key in st:
                F = st[key]
                if np.any(F <= 0):
                    return np.inf
                tot -= np.log(F).sum()
        for key in ("ball_a", "soc_a"):
            if key in st and np.any(st[key] <= 0):
                return np.inf
        if "isq_q" in st and np.any(st["isq_q"] <= 0):
            return np.inf
        tot -= np.log(lo_s).sum() + np.log(hi_s).sum()
        v = mu * self.f(z) + tot
        return v if np.isfinite(v) else np.inf

    def grad_hess(self, z, mu):
        """Gradient of mu*f + barrier, plus the assembled Newton matrix."""
        p = self.p
        n = self.n
        g = self.lin + 2.0 * self.quad * z + 3.0 * self.cubic * z * z
        hd = 2.0 * self.quad + 6.0 * self.cubic * z
        g = mu * g
        acc = _Accum(n, self.bandwidth, self.s_idx, self.dense)
        acc.add_diag(np.arange(n), mu * hd)
        for ix, iy, cx, cy, wgt, eps in self.norm_terms:
            p1, p2 = z[ix] + cx, z[iy] + cy
            r = math.sqrt(p1 * p1 + p2 * p2 + eps * eps)
            g[ix] += mu * wgt * p1 / r
            g[iy] += mu * wgt * p2 / r
            r3 = r * r * r
            acc.add_pair(ix, ix, mu * wgt * (1.0 / r - p1 * p1 / r3))
            acc.add_pair(iy, iy, mu * wgt * (1.0 / r - p2 * p2 / r3))
            acc.add_pair(ix, iy, mu * wgt * (-p1 * p2 / r3))

        st = self._family_state(z)
        s_col = np.full(1, self.s_idx if self.s_mode else 0)

        def outer(components, F):
            iF = 1.0 / F
            iF2 = iF * iF
            for a in range(len(components)):
                ia, va = components[a]
                np.add.at(g, ia, -va * iF)
                for b in range(a, len(components)):
                    ib, vb = components[b]
                    acc.add_pairs(ia, ib, va * vb * iF2)
            return iF

        if "lin_F" in st:
            F = st["lin_F"]
            comps = [(p.lin_idx[:, k], -p.lin_coef[:, k])
                     for k in range(p.lin_idx.shape[1])]
            if self.s_mode:
                comps.append((np.broadcast_to(s_col, F.shape), self.sg_lin))
            outer(comps, F)
        if "ball_F" in st:
            F, a = st["ball_F"], st["ball_a"]
            comps = [(p.ball_ix, -2.0 * st["ball_p1"]),
                     (p.ball_iy, -2.0 * st["ball_p2"])]
            if self.s_mode:
                comps.append((np.broadcast_to(s_col, F.shape), 2.0 * a * self.sg_ball))
            iF = outer(comps, F)
            acc.add_pairs(p.ball_ix, p.ball_ix, 2.0 * iF)
            acc.add_pairs(p.ball_iy, p.ball_iy, 2.0 * iF)
            if self.s_mode:
                sarr = np.broadcast_to(s_col, F.shape)
                acc.add_pairs(sarr, sarr, -2.0 * self.sg_ball**2 * iF)
        if "soc_F" in st:
            F, a = st["soc_F"], st["soc_a"]
            dx, dy = st["soc_dx"], st["soc_dy"]
            has_jx = p.soc_jx >= 0
            has_jy = p.soc_jy >= 0
            jx = np.where(has_jx, p.soc_jx, p.soc_ix)
            jy = np.where(has_jy, p.soc_jy, p.soc_iy)
            comps = [(p.soc_ix, -2.0 * dx), (p.soc_iy, -2.0 * dy),
                     (jx, np.where(has_jx, 2.0 * dx, 0.0)),
                     (jy, np.where(has_jy, 2.0 * dy, 0.0)),
                     (p.soc_iv, 2.0 * p.soc_d * a)]
            if self.s_mode:
                comps.append((np.broadcast_to(s_col, F.shape), 2.0 * a * self.sg_soc))
            iF = outer(comps, F)
            acc.add_pairs(p.soc_ix, p.soc_ix, 2.0 * iF)
            acc.add_pairs(p.soc_iy, p.soc_iy, 2.0 * iF)
            acc.add_pairs(jx, jx, np.where(has_jx, 2.0 * iF, 0.0))
            acc.add_pairs(jy, jy, np.where(has_jy, 2.0 * iF, 0.0))
            acc.add_pairs(p.soc_ix, jx, np.where(has_jx, -2.0 * iF, 0.0))
            acc.add_pairs(p.soc_iy, jy, np.where(has_jy, -2.0 * iF, 0.0))
            acc.add_pairs(p.soc_iv, p.soc_iv, -2.0 * p.soc_d**2 * iF)
            if self.s_mode:
                sarr = np.broadcast_to(s_col, F.shape)
                acc.add_pairs(p.soc_iv, sarr, -2.0 * p.soc_d * self.sg_soc * iF)
                acc.add_pairs(sarr, sarr, -2.0 * self.sg_soc**2 * iF)
        if "isq_F" in st:
            F, q = st["isq_F"], st["isq_q"]
            comps = [(p.isq_iq, p.isq_aq + 2.0 / q**3)]
            has_iv = p.isq_iv >= 0
            iv = np.where(has_iv, p.isq_iv, p.isq_iq)
            comps.append((iv, np.where(has_iv, p.isq_av, 0.0)))
            if self.s_mode:
                comps.append((np.broadcast_to(s_col, F.shape), self.sg_isq))
            iF = outer(comps, F)
            acc.add_pairs(p.isq_iq, p.isq_iq, 6.0 / q**4 * iF)

        lo_s = z[self.flo] - self.lo[self.flo]
        hi_s = self.hi[self.fhi] - z[self.fhi]
        idx_lo = np.nonzero(self.flo)[0]
        idx_hi = np.nonzero(self.fhi)[0]
        np.add.at(g, idx_lo, -1.0 / lo_s)
        np.add.at(g, idx_hi, 1.0 / hi_s)
        acc.add_diag(idx_lo, 1.0 / lo_s**2)
        acc.add_diag(idx_hi, 1.0 / hi_s**2)
        return g, acc


class _Accum:
    """Symmetric Newton-matrix accumulator: dense, or banded plus arrow."""

    def __init__(self, n, bw, s_idx, dense):
        self.n = n
        self.bw = bw
        self.s_idx = s_idx
        self.dense = dense
        if dense:
            self.H = np.zeros((n, n))
        else:
            nz = n if s_idx is None else n - 1
            self.nz = nz
            self.BU = np.zeros((bw + 1, nz))
            self.c = np.zeros(nz)
            self.d = 0.0

    def add_diag(self, idx, vals):
        self.add_pairs(idx, idx, vals)

    def add_pair(self, i, j, v):
        self.add_pairs(np.array([i]), np.array([j]), np.array([v]))

    def add_pairs(self, i, j, v):
        i = np.asarray(i)
        j = np.asarray(j)
        v = np.broadcast_to(np.asarray(v, float), np.broadcast_shapes(i.shape, j.shape))
        i, j = np.broadcast_arrays(i, j)
        if self.dense:
            r = np.minimum(i, j)
            c = np.maximum(i, j)
            np.add.at(self.H, (r, c), v)
            return
        if self.s_idx is None:
            r = np.minimum(i, j)
            c = np.maximum(i, j)
            np.add.at(self.BU, (self.bw + r - c, c), v)
            return
        s = self.s_idx
        is_s = (i == s) | (j == s)
        if np.any(~is_s):
            r = np.minimum(i[~is_s], j[~is_s])
            c = np.maximum(i[~is_s], j[~is_s])
            np.add.at(self.BU, (self.bw + r - c, c), v[~is_s])
        if np.any(is_s):
            ii, jj, vv = i[is_s], j[is_s], v[is_s]
            both = (ii == s) & (jj == s)
            self.d += vv[both].sum()
            one = ~both
            other = np.where(ii[one] == s, jj[one], ii[one])
            np.add.at(self.c, other, vv[one])

    def solve(self, g):
        """Newton direction: solve H d = -g, with PD jitter retries."""
        if self.dense:
            dscale = float(np.max(np.abs(np.diag(self.H)), initial=1.0))
        else:
            dscale = float(np.max(np.abs(self.BU[self.bw]), initial=1.0))
        dscale = max(dscale, 1.0)
        for attempt in range(6):
            jit = 0.0 if attempt == 0 else dscale * 10.0**(attempt - 13)
            try:
                if self.dense:
                    H = self.H + np.triu(self.H, 1).T
                    if jit:
                        H = H + jit * np.eye(self.n)
                    cf = sla.cho_factor(H, lower=False, check_finite=False)
                    return -sla.cho_solve(cf, g, check_finite=False)
                BU = self.BU if not jit else self.BU + jit * _band_eye(self.bw, self.nz)
                cb = sla.cholesky_banded(BU, lower=False, check_finite=False)
                if self.s_idx is None:
                    return -sla.cho_solve_banded((cb, False), g, check_finite=False)
                y1 = sla.cho_solve_banded((cb, False), g[:-1], check_finite=False)
                y2 = sla.cho_solve_banded((cb, False), self.c, check_finite=False)
                schur = self.d - self.c @ y2
                if schur <= 0:
                    raise np.linalg.LinAlgError("nonpositive Schur complement")
                ds = (g[-1] - self.c @ y1) / schur
                dz = y1 - y2 * ds
                return -np.concatenate([dz, [ds]])
            except np.linalg.LinAlgError:
                continue
        raise SolverError("Newton system not positive definite")


def _band_eye(bw, n):
    e = np.zeros((bw + 1, n))
    e[bw, :] = 1.0
    return e


def _center(work, z, mu, tol_dec, max_inner, budget):
    """Newton-center mu*f + barrier from a strictly interior z.

    Exits "centered" at decrement tolerance, or once inside the quadratic
    zone (decrement <= 1/4) when the decrement and the merit both stop
    improving: at large mu the factored Newton system cannot resolve the
    residual any further, and the remaining merit error is below float
    resolution while the duality-gap certificate is unaffected.
    """
    iters = 0
    best = np.inf
    last_base = None
    stall = 0
    for _ in range(max_inner):
        if budget[0] <= 0:
            return z, iters, "budget"
        g, acc = work.grad_hess(z, mu)
        step = acc.solve(g)
        budget[0] -= 1
        iters += 1
        lam2 = float(-g @ step)
        if lam2 < 0:
            lam2 = 0.0
        if lam2 / 2.0 <= tol_dec:
            return z, iters, "centered"
        base = work.merit(z, mu)
        quad_zone = lam2 <= 0.25
        if (quad_zone and lam2 > 0.5 * best and last_base is not None
                and last_base - base <= 1e-10 * (1.0 + abs(base))):
            stall += 1
            if stall >= 3:
                return z, iters, "centered"
        else:
            stall = 0
        best = min(best, lam2)
        last_base = base
        alpha = 1.0
        gdot = float(g @ step)
        while alpha >= _ALPHA_MIN:
            cand = z + alpha * step
            mv = work.merit(cand, mu)
            if np.isfinite(mv) and mv <= base + _ARMIJO * alpha * gdot:
                z = cand
                break
            alpha *= _BACKTRACK
        else:
            if quad_zone:
                return z, iters, "centered"
            return z, iters, "step-underflow"
    return z, iters, "inner-limit"


def _clip_into_box(z0, lo, hi):
    with np.errstate(invalid="ignore"):
        lo_adj = np.where(np.isfinite(lo), lo + 1e-9 * (1.0 + np.abs(lo)), -np.inf)
        hi_adj = np.where(np.isfinite(hi), hi - 1e-9 * (1.0 + np.abs(hi)), np.inf)
    return np.clip(z0, lo_adj, hi_adj)


def _default_start(prob):
    lo, hi = prob.lo, prob.hi
    z = np.zeros(prob.n)
    both = np.isfinite(lo) & np.isfinite(hi)
    z[both] = 0.5 * (lo[both] + hi[both])
    only_lo = np.isfinite(lo) & ~np.isfinite(hi)
    z[only_lo] = lo[only_lo] + 1.0
    only_hi = ~np.isfinite(lo) & np.isfinite(hi)
    z[only_hi] = hi[only_hi] - 1.0
    return z


def phase_one(prob, z0=None, s_floor=None, stop_below=None, prox=None,
              kkt_tol=1e-6, max_newton=2000):
    """Minimize one relaxation slack s over all family constraints.

    Returns the relaxed optimum (or an early interior point when
    `stop_below` is crossed).  min_slack > 0 certifies infeasibility of the
    family constraints within the box; bounds themselves are never relaxed.
    """
    prob.finalize()
    if z0 is None:
        z0 = _default_start(prob)
    s_lo_given = s_floor is not None
    z0 = _clip_into_box(np.asarray(z0, float), prob.lo, prob.hi)
    # a whisper of regularization toward z0 keeps directions the slack
    # objective does not see (barrier-rewarded but unbounded) from diverging
    anchor = (list(range(prob.n)), list(z0), 1e-14)
    prox_terms = [anchor] if prox is None else [prox, anchor]
    work0 = _Work(prob, s_mode=True, s_lo=-np.inf, prox=prox_terms)

    # required slack at z0, in each family's sigma units
    need = 0.0
    st = work0._family_state(np.concatenate([z0, [0.0]]))
    if "lin_F" in st and len(st["lin_F"]):
        need = max(need, float(np.max(-st["lin_F"])))
    if "ball_F" in st and len(st["ball_F"]):
        d = np.sqrt(st["ball_p1"]**2 + st["ball_p2"]**2)
        need = max(need, float(np.max(d - prob.ball_rho)))
    if "soc_F" in st and len(st["soc_F"]):
        d = np.sqrt(st["soc_dx"]**2 + st["soc_dy"]**2)
        need = max(need, float(np.max(d - st["soc_a"])))
    if "isq_F" in st and len(st["isq_F"]):
        need = max(need, float(np.max(-st["isq_F"])))
    s0 = need + 0.1 * max(1.0, abs(need))
    if s_lo_given:
        s0 = max(s0, s_floor + 1.0)
    s_lo = s_floor if s_lo_given else -(abs(s0) + 10.0)
    work = _Work(prob, s_mode=True, s_lo=s_lo, prox=prox_terms)
    z = np.concatenate([z0, [s0]])
    if not work.interior(z):
        raise SolverError("phase-one start not interior (inconsistent bounds?)")

    budget = [max_newton]
    mu = 1.0
    iters = 0
    stages = 0
    while True:
        z, it, note = _center(work, z, mu, kkt_tol**2 / 4.0, 200, budget)
        iters += it
        stages += 1
        s_val = float(z[-1])
        if stop_below is not None and s_val < stop_below:
            return PhaseOneOutcome(z[:-1].copy(), s_val, True, "optimal", iters)
        if work.m / mu <= kkt_tol or note in ("budget", "step-underflow"):
            status = "optimal" if note in ("centered",) or work.m / mu <= kkt_tol \
                else "max-iter"
            tol = max(1e-9, kkt_tol)
            return PhaseOneOutcome(z[:-1].copy(), s_val, s_val < -tol, status, iters)
        mu *= 10.0


def solve(prob, warm_start=None, kkt_tol=1e-6, max_newton=4000, mu0=1.0,
          mu_factor=10.0):
    """Central-path barrier solve of a finalized ConvexSubproblem.

    The barrier parameter grows geometrically from mu0 until the duality-gap
    estimate m/mu and the Newton decrement both drop below kkt_tol.  A warm
    start that is not strictly interior is repaired through phase-one.
    """
    prob.finalize()
    work = _Work(prob, s_mode=False)
    diagnostics = {}
    z = None
    if warm_start is not None:
        zc = _clip_into_box(np.asarray(warm_start, float), prob.lo, prob.hi)
        if work.interior(zc, margin=1e-10):
            z = zc
    if z is None:
        seed = warm_start if warm_start is not None else _default_start(prob)
        po = phase_one(prob, z0=seed, stop_below=-1e-6, max_newton=max_newton // 2)
        diagnostics["phase_one_slack"] = po.min_slack
        diagnostics["phase_one_iters"] = po.newton_iters
        if not po.feasible and not work.interior(po.z, margin=0.0):
            return SolveOutcome("infeasible-detected", po.z, float(work.f(po.z)),
                                {"gap": np.inf}, po.newton_iters, 0, diagnostics)
        z = po.z

    budget = [max_newton]
    mu = mu0
    total = 0
    stages = 0
    m = work.m
    status = "max-iter"
    z_done = None
    mu_done = None
    while True:
        z, it, note = _center(work, z, mu, kkt_tol**2 / 4.0, 200, budget)
        total += it
        stages += 1
        gap = m / mu
        if note == "centered":
            z_done = z.copy()
            mu_done = mu
        if gap <= kkt_tol and note == "centered":
            status = "optimal"
            break
        if note in ("budget", "step-underflow") or (note == "inner-limit"
                                                    and gap <= kkt_tol):
            status = "max-iter"
            diagnostics["note"] = note
            # an aborted stage leaves z part-way toward that stage's center;
            # the end of the last completed stage is the better-certified point
            if z_done is not None and note != "inner-limit":
                z = z_done
                mu = mu_done
            break
        mu *= mu_factor

    g, acc = work.grad_hess(z, mu)
    step = acc.solve(g)
    lam2 = max(0.0, float(-g @ step))
    kkt = {
        "stationarity": float(np.max(np.abs(g)) / mu),
        "primal_feasibility": prob.max_violation(z),
        "dual_feasibility": 0.0,
        "complementarity": 1.0 / mu,
        "gap": m / mu,
        "newton_decrement": math.sqrt(lam2),
    }
    if status == "optimal" and lam2 > 0.25:
        # outside the quadratic zone the gap estimate is not a certificate
        status = "max-iter"
        diagnostics["note"] = "final decrement above quadratic zone"
    return SolveOutcome(status, z.copy(), float(work.f(z)), kkt, total, stages,
                        diagnostics)
