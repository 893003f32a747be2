"""Uniform-grid spatial index over a fixed batch of points.

Points are bucketed once into hypercube cells of a fixed edge length; cell
codes are sorted so each query resolves its candidate buckets with two binary
searches. All query methods are vectorized over query batches and use closed
Euclidean balls. The cell size is a tuning knob: pick it near the query
radius so each lookup touches a bounded number of neighbor cells.
"""

from __future__ import annotations

import itertools

import numpy as np

_MAX_CODES = 2**62


class GridIndex:
    def __init__(self, points: np.ndarray, cell_size: float):
        points = np.asarray(points, dtype=float)
        if points.ndim != 2:
            raise ValueError("points must be an (N, dim) array")
        if not (cell_size > 0.0):
            raise ValueError("cell_size must be positive")
        self.points = points
        self.cell = float(cell_size)
        self.dim = points.shape[1]
        n = points.shape[0]
        if n == 0:
            self._mins = np.zeros(self.dim, dtype=np.int64)
            self._extents = np.ones(self.dim, dtype=np.int64)
            self._strides = np.ones(self.dim, dtype=np.int64)
            self._order = np.empty(0, dtype=np.int64)
            self._codes = np.empty(0, dtype=np.int64)
            return
        cells = np.floor(points / self.cell).astype(np.int64)
        self._mins = cells.min(axis=0)
        self._extents = cells.max(axis=0) - self._mins + 1
        if np.prod(self._extents.astype(object)) >= _MAX_CODES:
            raise ValueError("grid too fine for the point extent; increase cell_size")
        strides = np.ones(self.dim, dtype=np.int64)
        for i in range(self.dim - 2, -1, -1):
            strides[i] = strides[i + 1] * self._extents[i + 1]
        self._strides = strides
        codes = (cells - self._mins) @ strides
        self._order = np.argsort(codes, kind="stable")
        self._codes = codes[self._order]

    def _bucket(self, qcells: np.ndarray):
        """Candidate (query_row, point_row) pairs for exact cell coords."""
        if self._order.size == 0:
            e = np.empty(0, dtype=np.int64)
            return e, e
        valid = np.all((qcells >= self._mins) & (qcells < self._mins + self._extents),
                       axis=1)
        vrows = np.nonzero(valid)[0]
        if vrows.size == 0:
            e = np.empty(0, dtype=np.int64)
            return e, e
        codes = (qcells[vrows] - self._mins) @ self._strides
        left = np.searchsorted(self._codes, codes, side="left")
        right = np.searchsorted(self._codes, codes, side="right")
        lens = right - left
        total = int(lens.sum())
        if total == 0:
            e = np.empty(0, dtype=np.int64)
            return e, e
        # flat[i] walks each [left, right) run in sequence
        starts = np.repeat(left, lens)
        offsets = np.arange(total) - np.repeat(np.cumsum(lens) - lens, lens)
        prows = self._order[starts + offsets]
        qrows = np.repeat(vrows, lens)
        return qrows, prows

    def _offsets(self, radius: float):
        k = int(np.ceil(radius / self.cell))
        return itertools.product(range(-k, k + 1), repeat=self.dim)

    def pairs_within(self, queries: np.ndarray, radius: float):
        """All (query_row, point_row) with Euclidean distance <= radius."""
        queries = np.atleast_2d(np.asarray(queries, dtype=float))
        qcells = np.floor(queries / self.cell).astype(np.int64)
        out_q, out_p = [], []
        r2 = radius * radius
        for off in self._offsets(radius):
            qrows, prows = self._bucket(qcells + np.asarray(off, dtype=np.int64))
            if qrows.size == 0:
                continue
            d2 = np.sum((self.points[prows] - queries[qrows]) ** 2, axis=1)
            keep = d2 <= r2
            out_q.append(qrows[keep])
            out_p.append(prows[keep])
        if not out_q:
            e = np.empty(0, dtype=np.int64)
            return e, e
        return np.concatenate(out_q), np.concatenate(out_p)

    def count_within(self, queries: np.ndarray, radius: float) -> np.ndarray:
        queries = np.atleast_2d(np.asarray(queries, dtype=float))
        counts = np.zeros(queries.shape[0], dtype=np.int64)
        qrows, _ = self.pairs_within(queries, radius)
        np.add.at(counts, qrows, 1)
        return counts

    def any_within(self, queries: np.ndarray, radius: float) -> np.ndarray:
        return self.count_within(queries, radius) > 0

    def nn_dist(self, queries: np.ndarray, r_max: float = np.inf) -> np.ndarray:
        """Distance to the nearest indexed point, inf if none within r_max.

        Expands Chebyshev cell shells; a query stops once its best distance
        is certified (points in farther shells are strictly farther).
        """
        queries = np.atleast_2d(np.asarray(queries, dtype=float))
        nq = queries.shape[0]
        best = np.full(nq, np.inf)
        if self._order.size == 0:
            return best
        qcells = np.floor(queries / self.cell).astype(np.int64)
        # the farthest shell that can still contain indexed cells
        lo_gap = qcells - self._mins
        hi_gap = (self._mins + self._extents - 1) - qcells
        k_grid = int(np.max(np.maximum(np.abs(lo_gap), np.abs(hi_gap))))
        k_limit = k_grid
        if np.isfinite(r_max):
            k_limit = min(k_grid, int(np.ceil(r_max / self.cell)) + 1)
        pending = np.arange(nq)
        for k in range(0, k_limit + 1):
            if pending.size == 0:
                break
            for off in itertools.product(range(-k, k + 1), repeat=self.dim):
                if max(abs(o) for o in off) != k:
                    continue
                qrows, prows = self._bucket(qcells[pending] + np.asarray(off, dtype=np.int64))
                if qrows.size == 0:
                    continue
                d = np.sqrt(np.sum((self.points[prows] - queries[pending[qrows]]) ** 2,
                                   axis=1))
                np.minimum.at(best, pending[qrows], d)
            # shells beyond k sit at distance > k*cell from any query point
            pending = pending[best[pending] > k * self.cell]
        best[best > r_max] = np.inf
        return best
