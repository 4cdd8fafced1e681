"""Tensor-product Cartesian grid cut by the domain boundary.

The grid may be graded toward the origin with a ``sinh`` stretching so that
the near-origin region is resolved on many more nodes than the far field;
``grading=0`` gives a uniform grid. The x1 coordinates are exactly mirror
symmetric about 0 and contain the node x1 = 0.

Nodes strictly inside the domain are the unknowns. Exterior nodes within a
band of ``pad`` cells carry extrapolated ("ghost") values so that cubic
interpolation stencils near the boundary see smooth data.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage, sparse

from ..errors import ParameterError
from ..geometry import Domain


def stretch(xi: np.ndarray, beta: float) -> np.ndarray:
    if beta <= 0:
        return xi
    return np.sinh(beta * xi) / math.sinh(beta)


def _extend(nodes: np.ndarray, pad: int) -> np.ndarray:
    h = nodes[-1] - nodes[-2]
    return np.concatenate([nodes, nodes[-1] + h * np.arange(1, pad + 1)])


def _control_widths(x: np.ndarray) -> np.ndarray:
    mid = 0.5 * (x[1:] + x[:-1])
    lo = np.concatenate([[x[0]], mid])
    hi = np.concatenate([mid, [x[-1]]])
    return hi - lo


class Grid:
    """Grid geometry, boundary arms and ghost-extension operators for one domain."""

    def __init__(self, domain: Domain, n: int, grading: float = 0.0, pad: int = 3):
        if n < 8 or n % 2:
            raise ParameterError("grid size n must be an even integer >= 8")
        x1min, x1max, x2min, x2max = domain.bbox()
        if x2min < -1e-14:
            raise ParameterError("domain must lie in x2 >= 0")
        self.domain = domain
        self.n = int(n)
        self.grading = float(grading)
        self.pad = int(pad)

        half = max(abs(x1min), x1max)
        pos = half * stretch(np.arange(n // 2 + 1) / (n // 2), grading)
        pos = _extend(pos, pad)
        self.x1 = np.concatenate([-pos[:0:-1], pos])
        eta = np.arange(-pad, n + 1) / n
        x2 = x2max * stretch(eta, grading)
        self.x2 = _extend(x2, pad)
        self.shape = (len(self.x1), len(self.x2))
        self.i0 = len(pos) - 1  # index of x1 = 0
        self.mirror = np.arange(self.shape[0])[::-1].copy()

        X1, X2 = np.meshgrid(self.x1, self.x2, indexing="ij")
        self.points = np.stack([X1, X2], axis=-1)
        self.inside = domain.contains(self.points)
        self.unknowns = np.flatnonzero(self.inside.ravel())
        self.index = np.full(self.inside.size, -1, dtype=np.int64)
        self.index[self.unknowns] = np.arange(len(self.unknowns))

        self.w1 = _control_widths(self.x1)
        self.w2 = _control_widths(self.x2)
        self.dx1 = np.diff(self.x1)
        self.dx2 = np.diff(self.x2)
        self.h_local = np.minimum(self.w1[:, None], self.w2[None, :])
        self.h_min = float(min(self.dx1.min(), self.dx2.min()))
        self.h_max = float(max(self.dx1.max(), self.dx2.max()))

        self._build_arms()
        self._build_area()
        self._build_ghosts()

    # ------------------------------------------------------------------
    @property
    def n_unknowns(self) -> int:
        return len(self.unknowns)

    def coords(self, flat_idx: np.ndarray) -> np.ndarray:
        return self.points.reshape(-1, 2)[flat_idx]

    def spacing_near_origin(self) -> float:
        return float(min(self.dx1[self.i0], self.x2[self.pad + 1] - self.x2[self.pad]))

    def _build_arms(self) -> None:
        """Arm lengths of the 5-point stencil, cut at the boundary where needed."""
        n1, n2 = self.shape
        I, J = np.unravel_index(self.unknowns, self.shape)
        arms = np.empty((len(I), 4))
        nbr = np.full((len(I), 4), -1, dtype=np.int64)
        steps = [(1, 0), (-1, 0), (0, 1), (0, -1)]
        P = self.points[I, J]
        for k, (di, dj) in enumerate(steps):
            In = I + di
            Jn = J + dj
            full = np.abs(self.x1[In] - self.x1[I]) + np.abs(self.x2[Jn] - self.x2[J])
            inn = self.inside[In, Jn]
            arms[:, k] = full
            nbr[inn, k] = self.index[np.ravel_multi_index((In[inn], Jn[inn]), self.shape)]
            cut = ~inn
            if cut.any():
                Q = self.points[In[cut], Jn[cut]]
                t = self.domain.line_crossing(P[cut], Q)
                arms[cut, k] = np.maximum(t, 1e-10) * full[cut]
        self.arms = arms
        self.neighbors = nbr

    def _build_area(self, sub: int = 6) -> None:
        area = self.w1[:, None] * self.w2[None, :] * self.inside
        sd = self.domain.signed_distance(self.points)
        diag = np.hypot(self.w1[:, None], self.w2[None, :])
        near = np.flatnonzero((np.abs(sd) < diag).ravel())
        if len(near):
            I, J = np.unravel_index(near, self.shape)
            u = (np.arange(sub) + 0.5) / sub - 0.5
            mid1 = np.concatenate([[self.x1[0]], 0.5 * (self.x1[1:] + self.x1[:-1])])
            mid2 = np.concatenate([[self.x2[0]], 0.5 * (self.x2[1:] + self.x2[:-1])])
            lo1 = mid1[I]
            lo2 = mid2[J]
            frac = np.zeros(len(near))
            for a in u:
                for b in u:
                    p = np.stack([lo1 + (a + 0.5) * self.w1[I], lo2 + (b + 0.5) * self.w2[J]], -1)
                    frac += self.domain.contains(p)
            frac /= sub * sub
            area[I, J] = frac * self.w1[I] * self.w2[J]
        self.area = area

    def _build_ghosts(self) -> None:
        n1, n2 = self.shape
        band = ndimage.binary_dilation(self.inside, np.ones((2 * self.pad + 1,) * 2, bool))
        ghost = band & ~self.inside
        gi, gj = np.nonzero(ghost)
        G = self.points[gi, gj]
        normal = self.domain.outward_normal(G)
        order = np.argsort(-np.abs(normal), axis=1)  # preferred axis first

        rows_q, cols_q, vals_q = [], [], []
        rows_c, cols_c = [], []
        rows_x, cols_x, vals_x = [], [], []
        done = np.zeros(len(gi), bool)
        for attempt in range(2):
            todo = np.flatnonzero(~done)
            if not len(todo):
                break
            axis = order[todo, attempt]
            sgn = -np.sign(normal[todo, axis]).astype(int)
            sgn[sgn == 0] = 1
            di = np.where(axis == 0, sgn, 0)
            dj = np.where(axis == 1, sgn, 0)
            first = np.full(len(todo), -1)
            for m in range(1, 3 * self.pad + 3):
                ii = gi[todo] + m * di
                jj = gj[todo] + m * dj
                ok = (ii >= 0) & (ii < n1) & (jj >= 0) & (jj < n2)
                hit = np.zeros(len(todo), bool)
                hit[ok] = self.inside[ii[ok], jj[ok]]
                first = np.where((first < 0) & hit, m, first)
            found = first > 0
            sel = todo[found]
            if not len(sel):
                continue
            m1 = first[found]
            dI, dJ = di[found], dj[found]
            ax = axis[found]
            i1, j1 = gi[sel] + m1 * dI, gj[sel] + m1 * dJ
            ip, jp = i1 - dI, j1 - dJ
            i2, j2 = i1 + dI, j1 + dJ
            ok2 = (i2 >= 0) & (i2 < n1) & (j2 >= 0) & (j2 < n2)
            ok2[ok2] = self.inside[i2[ok2], j2[ok2]]
            t = self.domain.line_crossing(self.points[ip, jp], self.points[i1, j1])

            def c(ii, jj):
                return np.where(ax == 0, self.x1[np.clip(ii, 0, n1 - 1)],
                                self.x2[np.clip(jj, 0, n2 - 1)])

            cG, cp, c1, c2 = c(gi[sel], gj[sel]), c(ip, jp), c(i1, j1), c(i2, j2)
            b = cp + t * (c1 - cp)
            # quadratic through (b, 0), (c1, v1), (c2, v2); linear if c2 unusable
            w1q = (cG - b) * (cG - c2) / ((c1 - b) * (c1 - c2))
            w2q = (cG - b) * (cG - c1) / ((c2 - b) * (c2 - c1))
            w1l = (cG - b) / (c1 - b)
            w1 = np.where(ok2, w1q, w1l)
            w2 = np.where(ok2, w2q, 0.0)
            k1 = self.index[np.ravel_multi_index((i1, j1), self.shape)]
            k2 = np.where(ok2, self.index[np.ravel_multi_index(
                (np.clip(i2, 0, n1 - 1), np.clip(j2, 0, n2 - 1)), self.shape)], k1)
            rows_q += [sel, sel]
            cols_q += [k1, k2]
            vals_q += [w1, w2]
            rows_c.append(sel)
            cols_c.append(k1)
            # polynomial extrapolation through up to three interior nodes
            i3, j3 = i1 + 2 * dI, j1 + 2 * dJ
            ok3 = ok2 & (i3 >= 0) & (i3 < n1) & (j3 >= 0) & (j3 < n2)
            ok3[ok3] = self.inside[i3[ok3], j3[ok3]]
            c3 = c(i3, j3)
            one = np.ones_like(cG)
            d12 = np.where(ok2, c1 - c2, 1.0)
            d13 = np.where(ok3, c1 - c3, 1.0)
            d23 = np.where(ok3, c2 - c3, 1.0)
            q1 = (cG - c2) * (cG - c3) / (d12 * d13)
            q2 = -(cG - c1) * (cG - c3) / (d12 * d23)
            q3 = (cG - c1) * (cG - c2) / (d13 * d23)
            l1 = (cG - c2) / d12
            e1 = np.where(ok3, q1, np.where(ok2, l1, one))
            e2 = np.where(ok3, q2, np.where(ok2, 1.0 - l1, 0.0))
            e3 = np.where(ok3, q3, 0.0)
            k3 = np.where(ok3, self.index[np.ravel_multi_index(
                (np.clip(i3, 0, n1 - 1), np.clip(j3, 0, n2 - 1)), self.shape)], k1)
            rows_x += [sel, sel, sel]
            cols_x += [k1, k2, k3]
            vals_x += [e1, e2, e3]
            done[sel] = True

        self.ghost_flat = np.ravel_multi_index((gi, gj), self.shape)
        ng, nu = len(gi), self.n_unknowns
        if rows_q:
            r = np.concatenate(rows_q)
            cc = np.concatenate(cols_q)
            v = np.concatenate(vals_q)
            self.ext_linear = sparse.csr_matrix((v, (r, cc)), shape=(ng, nu))
            r = np.concatenate(rows_c)
            cc = np.concatenate(cols_c)
            self.ext_const = sparse.csr_matrix((np.ones(len(r)), (r, cc)), shape=(ng, nu))
            self.ext_extrap = sparse.csr_matrix(
                (np.concatenate(vals_x), (np.concatenate(rows_x), np.concatenate(cols_x))),
                shape=(ng, nu))
        else:
            self.ext_linear = sparse.csr_matrix((ng, nu))
            self.ext_const = sparse.csr_matrix((ng, nu))
            self.ext_extrap = sparse.csr_matrix((ng, nu))

    # ------------------------------------------------------------------
    def full_from_unknowns(self, vals: np.ndarray, extension: str = "none") -> np.ndarray:
        """Scatter unknown values into a full array, optionally filling ghosts.

        ``extension`` is ``"dirichlet"`` (quadratic extrapolation through the
        zero boundary value), ``"constant"`` (copy of the nearest interior
        node along the chosen grid line), ``"extrapolate"`` (polynomial through
        up to three interior nodes on that line, clipped to the range of
        ``vals``) or ``"none"``.
        """
        out = np.zeros(self.inside.size)
        out[self.unknowns] = vals
        if extension == "dirichlet":
            out[self.ghost_flat] = self.ext_linear @ vals
        elif extension == "constant":
            out[self.ghost_flat] = self.ext_const @ vals
        elif extension == "extrapolate":
            lo, hi = (vals.min(), vals.max()) if len(vals) else (0.0, 0.0)
            out[self.ghost_flat] = np.clip(self.ext_extrap @ vals, lo, hi)
        return out.reshape(self.shape)

    def unknown_values(self, full: np.ndarray) -> np.ndarray:
        return np.asarray(full).ravel()[self.unknowns]

    def sample_inside(self, fn) -> np.ndarray:
        """Full array with ``fn`` evaluated at interior nodes, zero elsewhere."""
        vals = np.asarray(fn(self.coords(self.unknowns)), dtype=float)
        return self.full_from_unknowns(vals)

    def describe(self) -> dict:
        return {"n": self.n, "grading": self.grading, "shape": list(self.shape),
                "h_min": self.h_min, "h_max": self.h_max, "unknowns": self.n_unknowns}
