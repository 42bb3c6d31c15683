"""Periodic graphs, their momentum-space fibers, and band structure.

A periodic graph is given by a fundamental cell: a list of vertex ids, a
per-vertex on-site potential, and a list of directed edges (tail, head,
integer offset in Z^d).  An edge with tail == head and nonzero offset is the
standard encoding of a translation bond (this is how the hypercubic lattices
are built from a single fundamental vertex); a zero-offset self-edge
contributes nothing to the fiber beyond its degree terms and is tolerated.

The fiber at quasi-momentum theta is the nu x nu Hermitian matrix

    M(theta) = degree + onsite - A(theta),
    A(theta)[tail, head] += exp(i theta . offset)   (plus the conjugate
    transpose entry), accumulated over edges.

Eigenvalues are computed batched over momentum grids; the top of the grid
maximum is polished by a local pattern search so that the reported spectrum
top never falls below the grid value.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import coo_array
from scipy.sparse.csgraph import connected_components

from .errors import EigensolveError

VertexId = str | int

_DEFAULT_GRIDS = {1: 128, 2: 64, 3: 32, 4: 16}
_EIG_CHUNK = 4096


@dataclass(frozen=True)
class PeriodicGraph:
    """Fundamental cell of a Z^d-periodic graph.

    Parameters
    ----------
    dim : int
        Lattice dimension d >= 1.
    vertices : tuple of vertex ids
        Ids may be strings or integers; order fixes the fiber row order.
    edges : tuple of (tail, head, offset)
        offset is a length-d integer tuple.
    site_potential : mapping id -> float
        Missing vertices default to 0.
    """

    dim: int
    vertices: tuple[VertexId, ...]
    edges: tuple[tuple[VertexId, VertexId, tuple[int, ...]], ...]
    site_potential: Mapping[VertexId, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"invalid dimension {self.dim}, need dim >= 1")
        if not self.vertices:
            raise ValueError("fundamental cell has no vertices")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        index = {v: i for i, v in enumerate(self.vertices)}
        for tail, head, offset in self.edges:
            if tail not in index or head not in index:
                raise ValueError(f"edge ({tail}, {head}) references unknown vertex")
            if len(offset) != self.dim or not all(
                isinstance(c, (int, np.integer)) for c in offset
            ):
                raise ValueError(
                    f"edge offset {offset} must be {self.dim} integers"
                )
        degree = [0] * len(self.vertices)
        for tail, head, _ in self.edges:
            degree[index[tail]] += 1
            degree[index[head]] += 1
        if any(d == 0 for d in degree):
            isolated = [v for v, i in index.items() if degree[i] == 0]
            raise ValueError(f"isolated vertices (degree 0): {isolated}")
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_degree", tuple(degree))
        self._check_connected()

    @property
    def nu(self) -> int:
        """Number of vertices in the fundamental cell."""
        return len(self.vertices)

    @property
    def degree(self) -> tuple[int, ...]:
        return self._degree

    @property
    def max_degree(self) -> int:
        return max(self._degree)

    def vertex_index(self, v: VertexId) -> int:
        return self._index[v]

    def potential_vector(self) -> np.ndarray:
        return np.array(
            [float(self.site_potential.get(v, 0.0)) for v in self.vertices]
        )

    def _check_connected(self):
        # Connectivity is decided on a finite block of cells wide enough to
        # contain every edge offset (3^d for nearest-neighbor graphs).
        w = max([1] + [abs(c) for _, _, off in self.edges for c in off])
        cells = list(itertools.product(range(-w, w + 1), repeat=self.dim))
        cell_index = {c: i for i, c in enumerate(cells)}
        n = len(cells) * self.nu
        rows, cols = [], []
        for tail, head, offset in self.edges:
            ti, hi = self._index[tail], self._index[head]
            for c in cells:
                c2 = tuple(a + b for a, b in zip(c, offset))
                if c2 in cell_index:
                    rows.append(cell_index[c] * self.nu + ti)
                    cols.append(cell_index[c2] * self.nu + hi)
        adj = coo_array(
            (np.ones(len(rows)), (rows, cols)), shape=(n, n)
        ).tocsr()
        ncomp, _ = connected_components(adj, directed=False)
        if ncomp != 1:
            raise ValueError(
                f"periodic graph is disconnected ({ncomp} components on a "
                f"{2 * w + 1}^{self.dim} block)"
            )


def build_hypercubic(dim: int, site_potential: float = 0.0) -> PeriodicGraph:
    """Hypercubic lattice Z^d as a one-vertex cell with d translation bonds.

    Supported for 1 <= dim <= 4 (the desk-scale range everything else in the
    package is sized for).
    """
    if not 1 <= dim <= 4:
        raise ValueError(f"invalid dimension {dim}, supported range is 1..4")
    edges = []
    for j in range(dim):
        offset = tuple(1 if i == j else 0 for i in range(dim))
        edges.append((0, 0, offset))
    return PeriodicGraph(
        dim=dim,
        vertices=(0,),
        edges=tuple(edges),
        site_potential={0: site_potential},
    )


def build_honeycomb() -> PeriodicGraph:
    """Honeycomb lattice: two sublattice vertices, three bonds per cell."""
    return PeriodicGraph(
        dim=2,
        vertices=("a", "b"),
        edges=(
            ("a", "b", (0, 0)),
            ("b", "a", (1, 0)),
            ("b", "a", (0, 1)),
        ),
    )


def fiber_matrix(graph: PeriodicGraph, theta: Sequence[float]) -> np.ndarray:
    """Hermitian fiber M(theta), shape (nu, nu), complex.

    Hermiticity is exact by construction: conjugate pairs of entries are
    written together, and self-edge contributions are folded to a real cosine.
    """
    th = np.asarray(theta, dtype=float)
    if th.shape != (graph.dim,):
        raise ValueError(f"theta must have length {graph.dim}, got shape {th.shape}")
    nu = graph.nu
    m = np.zeros((nu, nu), dtype=complex)
    np.fill_diagonal(m, np.asarray(graph.degree, dtype=float) + graph.potential_vector())
    for tail, head, offset in graph.edges:
        ti = graph.vertex_index(tail)
        hi = graph.vertex_index(head)
        phase_angle = float(np.dot(th, offset))
        if ti == hi:
            m[ti, ti] -= 2.0 * math.cos(phase_angle)
        else:
            ph = complex(math.cos(phase_angle), math.sin(phase_angle))
            m[ti, hi] -= ph
            m[hi, ti] -= ph.conjugate()
    return m


def _fiber_batch(graph: PeriodicGraph, thetas: np.ndarray) -> np.ndarray:
    """Fibers for a (p, d) array of momenta, returned as (p, nu, nu)."""
    p = thetas.shape[0]
    nu = graph.nu
    out = np.zeros((p, nu, nu), dtype=complex)
    diag = np.asarray(graph.degree, dtype=float) + graph.potential_vector()
    out[:, np.arange(nu), np.arange(nu)] = diag
    for tail, head, offset in graph.edges:
        ti = graph.vertex_index(tail)
        hi = graph.vertex_index(head)
        ang = thetas @ np.asarray(offset, dtype=float)
        if ti == hi:
            out[:, ti, ti] -= 2.0 * np.cos(ang)
        else:
            ph = np.exp(1j * ang)
            out[:, ti, hi] -= ph
            out[:, hi, ti] -= np.conj(ph)
    return out


@dataclass(frozen=True)
class BandStructure:
    """Band functions sampled on a uniform momentum grid.

    bands has shape (grid points, nu) with rows sorted ascending, so
    bands[:, j] is the j-th band function beta_{j+1}.  s_top is the reported
    spectrum top: the grid maximum of the last band, polished by a local
    pattern search (never below the grid value).
    """

    graph: PeriodicGraph
    grid: tuple[int, ...]
    bands: np.ndarray
    band_intervals: tuple[tuple[float, float], ...]
    flat: tuple[bool, ...]
    s_top: float
    argmax_theta: tuple[float, ...]

    @property
    def n_points(self) -> int:
        return self.bands.shape[0]

    def theta_at(self, flat_index: int) -> np.ndarray:
        idx = np.unravel_index(flat_index, self.grid)
        return np.array(
            [2.0 * math.pi * k / g for k, g in zip(idx, self.grid)]
        )


def _grid_thetas(grid: tuple[int, ...]) -> np.ndarray:
    axes = [2.0 * math.pi * np.arange(g) / g for g in grid]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _top_band_value(graph: PeriodicGraph, theta: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(fiber_matrix(graph, theta))[-1])


def _polish_top(
    graph: PeriodicGraph, theta0: np.ndarray, step: float
) -> tuple[float, np.ndarray]:
    """Pattern search for the top band maximum starting from a grid point."""
    best_theta = np.array(theta0, dtype=float)
    best = _top_band_value(graph, best_theta)
    h = step
    for _ in range(60):
        moved = False
        for j in range(graph.dim):
            for s in (+1.0, -1.0):
                trial = best_theta.copy()
                trial[j] += s * h
                val = _top_band_value(graph, trial)
                if val > best + 1e-15:
                    best, best_theta, moved = val, trial, True
        if not moved:
            h *= 0.5
            if h < 1e-9:
                break
    return best, best_theta


def band_structure(
    graph: PeriodicGraph, grid_per_dim: int | None = None
) -> BandStructure:
    """Sample all band functions on a uniform grid over [0, 2pi)^d.

    Parameters
    ----------
    grid_per_dim : int, optional
        Points per momentum axis.  Defaults per dimension to 128/64/32/16
        for d = 1/2/3/4.  Even values hit theta = pi exactly, which is where
        hypercubic tops sit.
    """
    if grid_per_dim is None:
        grid_per_dim = _DEFAULT_GRIDS[min(graph.dim, 4)]
    if grid_per_dim < 2:
        raise ValueError("need at least 2 grid points per dimension")
    grid = (grid_per_dim,) * graph.dim
    thetas = _grid_thetas(grid)
    p = thetas.shape[0]
    bands = np.empty((p, graph.nu))
    for start in range(0, p, _EIG_CHUNK):
        chunk = thetas[start : start + _EIG_CHUNK]
        try:
            bands[start : start + chunk.shape[0]] = np.linalg.eigvalsh(
                _fiber_batch(graph, chunk)
            )
        except np.linalg.LinAlgError:
            # Re-run pointwise to name the momentum that failed.
            for i, th in enumerate(chunk):
                try:
                    bands[start + i] = np.linalg.eigvalsh(fiber_matrix(graph, th))
                except np.linalg.LinAlgError as exc:
                    raise EigensolveError(
                        f"fiber eigensolve failed at theta={tuple(th)}"
                    ) from exc

    intervals = tuple(
        (float(bands[:, j].min()), float(bands[:, j].max()))
        for j in range(graph.nu)
    )
    grid_top = intervals[-1][1]
    flat_tol = 1e-10 * max(1.0, abs(grid_top))
    flat = tuple((hi - lo) <= flat_tol for lo, hi in intervals)

    argmax_flat = int(np.argmax(bands[:, -1]))
    theta0 = np.array(
        [2.0 * math.pi * k / g for k, g in
         zip(np.unravel_index(argmax_flat, grid), grid)]
    )
    polished, arg_theta = _polish_top(graph, theta0, 2.0 * math.pi / grid_per_dim)
    s_top = max(grid_top, polished)

    return BandStructure(
        graph=graph,
        grid=grid,
        bands=bands,
        band_intervals=intervals,
        flat=flat,
        s_top=s_top,
        argmax_theta=tuple(float(t) for t in arg_theta),
    )


@dataclass(frozen=True)
class TopRegularityReport:
    """Outcome of the curvature probe at the top band's maximizers.

    regular is True when every maximizer cluster has a negative-definite
    Hessian (all eigenvalues of -Hessian above the tolerance), False when
    some eigenvalue is decisively negative, and None when the probe is
    inconclusive (near-flat top, too many clusters, or a near-singular
    Hessian).  diagnostic carries the reason in the None cases.
    """

    maximizers: tuple[tuple[float, ...], ...]
    neg_hessian_eigs: tuple[tuple[float, ...], ...]
    regular: bool | None
    diagnostic: str | None


def _cluster_grid_points(
    candidates: list[tuple[int, ...]], grid: tuple[int, ...]
) -> list[list[tuple[int, ...]]]:
    """Group candidate grid indices that touch (periodically, Chebyshev-1)."""
    cand = set(candidates)
    seen: set[tuple[int, ...]] = set()
    clusters = []
    dim = len(grid)
    nbrs = [off for off in itertools.product((-1, 0, 1), repeat=dim)
            if any(off)]
    for c in candidates:
        if c in seen:
            continue
        stack, cluster = [c], []
        seen.add(c)
        while stack:
            cur = stack.pop()
            cluster.append(cur)
            for off in nbrs:
                nb = tuple((a + b) % g for a, b, g in zip(cur, off, grid))
                if nb in cand and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        clusters.append(cluster)
    return clusters


def top_regularity_diagnostic(
    bs: BandStructure,
    regularity_tolerance: float = 1e-6,
    max_clusters: int = 8,
) -> TopRegularityReport:
    """Probe whether the top band has a nondegenerate quadratic maximum.

    Works entirely from the sampled grid: maximizer candidates are clustered,
    and the Hessian at each cluster representative is estimated by central
    differences with the grid spacing as step (all stencil points are grid
    points, wrapped periodically).
    """
    top = bs.bands[:, -1]
    grid = bs.grid
    s_grid = float(top.max())
    ctol = 1e-9 * max(1.0, abs(s_grid))
    cand_flat = np.nonzero(top >= s_grid - ctol)[0]
    if cand_flat.size > 0.1 * top.size:
        return TopRegularityReport(
            maximizers=(),
            neg_hessian_eigs=(),
            regular=None,
            diagnostic="top band is nearly constant at its maximum "
            "(possibly a dispersionless top); curvature probe not applicable",
        )
    cand_idx = [tuple(int(i) for i in np.unravel_index(f, grid))
                for f in cand_flat]
    clusters = _cluster_grid_points(cand_idx, grid)
    if len(clusters) > max_clusters:
        return TopRegularityReport(
            maximizers=(),
            neg_hessian_eigs=(),
            regular=None,
            diagnostic=f"maximum attained on {len(clusters)} separated "
            f"clusters (limit {max_clusters}); curvature probe skipped",
        )

    dim = bs.graph.dim
    steps = [2.0 * math.pi / g for g in grid]

    def val(idx: tuple[int, ...]) -> float:
        flat = int(np.ravel_multi_index([i % g for i, g in zip(idx, grid)], grid))
        return float(top[flat])

    maximizers = []
    all_eigs = []
    verdicts = []
    for cluster in clusters:
        rep = max(cluster, key=val)
        maximizers.append(
            tuple(2.0 * math.pi * k / g for k, g in zip(rep, grid))
        )
        hess = np.empty((dim, dim))
        f0 = val(rep)
        for i in range(dim):
            ei = tuple(1 if t == i else 0 for t in range(dim))
            up = tuple(a + b for a, b in zip(rep, ei))
            dn = tuple(a - b for a, b in zip(rep, ei))
            hess[i, i] = (val(up) - 2.0 * f0 + val(dn)) / steps[i] ** 2
            for j in range(i + 1, dim):
                ej = tuple(1 if t == j else 0 for t in range(dim))
                pp = tuple(a + b + c for a, b, c in zip(rep, ei, ej))
                pm = tuple(a + b - c for a, b, c in zip(rep, ei, ej))
                mp = tuple(a - b + c for a, b, c in zip(rep, ei, ej))
                mm = tuple(a - b - c for a, b, c in zip(rep, ei, ej))
                hij = (val(pp) - val(pm) - val(mp) + val(mm)) / (
                    4.0 * steps[i] * steps[j]
                )
                hess[i, j] = hess[j, i] = hij
        eigs = np.linalg.eigvalsh(-hess)
        all_eigs.append(tuple(float(e) for e in eigs))
        lo = float(eigs[0])
        if lo > regularity_tolerance:
            verdicts.append(True)
        elif lo < -regularity_tolerance:
            verdicts.append(False)
        else:
            verdicts.append(None)

    if any(v is None for v in verdicts):
        regular: bool | None = None
        diagnostic = "Hessian nearly singular at a maximizer; inconclusive"
    elif all(verdicts):
        regular, diagnostic = True, None
    else:
        regular, diagnostic = False, None
    return TopRegularityReport(
        maximizers=tuple(maximizers),
        neg_hessian_eigs=tuple(all_eigs),
        regular=regular,
        diagnostic=diagnostic,
    )


# ---------------------------------------------------------------------------
# JSON interchange

def graph_to_dict(graph: PeriodicGraph) -> dict:
    return {
        "dim": graph.dim,
        "vertices": [
            {"id": v, "potential": float(graph.site_potential.get(v, 0.0))}
            for v in graph.vertices
        ],
        "edges": [
            {"tail": t, "head": h, "offset": list(off)}
            for t, h, off in graph.edges
        ],
    }


def graph_from_dict(data: dict) -> PeriodicGraph:
    try:
        dim = int(data["dim"])
        vertices = tuple(v["id"] for v in data["vertices"])
        potential = {v["id"]: float(v.get("potential", 0.0))
                     for v in data["vertices"]}
        edges = tuple(
            (e["tail"], e["head"], tuple(int(c) for c in e["offset"]))
            for e in data["edges"]
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed graph description: {exc}") from exc
    return PeriodicGraph(
        dim=dim, vertices=vertices, edges=edges, site_potential=potential
    )


def load_graph(path) -> PeriodicGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return graph_from_dict(json.load(fh))


def save_graph(graph: PeriodicGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_dict(graph), fh, indent=2)
        fh.write("\n")
