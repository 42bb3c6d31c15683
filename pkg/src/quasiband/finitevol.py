"""Finite-volume restriction of periodic graph operators, and exact counting.

Truncation is Dirichlet throughout: the operator on a finite box is the
compression P H P of the full-lattice operator, so diagonal entries keep the
full-graph degree even on the boundary.  Compression can only push
eigenvalues up at the bottom and down at the top, which is the safe direction
when the counts are later compared against upper bounds.

Two box geometries are supported: the centered box of cells with
sup-norm <= radius (any dimension), and the half-line chain on sites
n = 1..radius with a wall at n = 0 (diagonal 2, off-diagonal +1).

Site keys
---------
Canonical keys are (cell, vertex_id) pairs, with shorthands accepted where
unambiguous: a bare cell tuple when the fundamental cell has one vertex, a
bare int in one dimension, and a bare int site index n >= 1 on the
half-line.

Counting
--------
count_below is an exact inertia count (see ldlt).  The kernel is chosen from
the matrix structure: tridiagonal recurrence, banded elimination after
reverse Cuthill-McKee reordering, or dense Bunch-Kaufman.  If a pivot ties
with the shift the computation is retried at slightly smaller shifts
(1e-10, 1e-9, 1e-8 below the requested one), keeping strict "below"
semantics; after three retries a FactorizationError carries the attempted
shifts.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee

from . import ldlt
from .errors import FactorizationError
from .lattice import PeriodicGraph
from .windows import as_window

SHIFT_RETRY_OFFSETS = (0.0, -1e-10, -1e-9, -1e-8)
PIVOT_TOL_FACTOR = 1e-12
COUNT_EDGE_EPS = 1e-10

_DENSE_SMALL = 600
_DENSE_MAX = 9000
_BAND_STORAGE_LIMIT = 2 * 10**8  # entries of band storage, ~1.6 GB


class TruncationWarning(UserWarning):
    """Potential support fell partly outside the box and was dropped."""


@dataclass(frozen=True)
class TruncationSpec:
    """How to cut the infinite lattice down to a finite matrix.

    boundary is "dirichlet" (the only supported mode); half_line selects the
    one-dimensional chain on sites 1..radius instead of a centered box.
    """

    radius: int
    boundary: str = "dirichlet"
    half_line: bool = False

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if self.boundary != "dirichlet":
            raise ValueError(
                f"unsupported boundary {self.boundary!r}; only 'dirichlet'"
            )

    def scaled(self, factor: int) -> "TruncationSpec":
        return TruncationSpec(
            radius=self.radius * factor,
            boundary=self.boundary,
            half_line=self.half_line,
        )


def normalize_site_key(key, graph: PeriodicGraph, half_line: bool):
    """Reduce a user-facing site key to its canonical form."""
    if half_line:
        if isinstance(key, tuple) and len(key) == 1:
            key = key[0]
        if not isinstance(key, (int, np.integer)):
            raise ValueError(f"half-line site key must be an integer, got {key!r}")
        n = int(key)
        if n < 1:
            raise ValueError(f"half-line sites are n >= 1, got {n}")
        return n
    if isinstance(key, (int, np.integer)):
        if graph.dim != 1:
            raise ValueError(f"bare integer site key {key} needs a 1d graph")
        key = ((int(key),),)
        if graph.nu == 1:
            return (key[0], graph.vertices[0])
        raise ValueError("bare cell key is ambiguous for a multi-vertex cell")
    if isinstance(key, tuple) and len(key) == 2 and isinstance(key[0], tuple):
        cell, vid = key
        if len(cell) != graph.dim:
            raise ValueError(f"cell {cell} has wrong dimension")
        if vid not in graph.vertices:
            raise ValueError(f"unknown vertex {vid!r} in site key")
        return (tuple(int(c) for c in cell), vid)
    if isinstance(key, tuple) and len(key) == graph.dim and all(
        isinstance(c, (int, np.integer)) for c in key
    ):
        if graph.nu != 1:
            raise ValueError("bare cell key is ambiguous for a multi-vertex cell")
        return (tuple(int(c) for c in key), graph.vertices[0])
    raise ValueError(f"unrecognized site key {key!r}")


def site_cell(key) -> tuple[int, ...]:
    """Cell coordinates of a site key (canonical, bare cell, or bare int)."""
    if isinstance(key, int):
        return (key,)
    if isinstance(key[0], int):
        return tuple(key)
    return tuple(key[0])


@dataclass(eq=False)
class SymmetricOperator:
    """A finite Hermitian matrix together with its site bookkeeping."""

    matrix: sp.csr_array
    sites: tuple
    graph: PeriodicGraph
    spec: TruncationSpec
    index: dict = field(repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def half_line(self) -> bool:
        return self.spec.half_line

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def box_sites(graph: PeriodicGraph, spec: TruncationSpec) -> tuple:
    """Canonical site keys in row order (cell-major, vertex-minor)."""
    if spec.half_line:
        return tuple(range(1, spec.radius + 1))
    cells = itertools.product(
        range(-spec.radius, spec.radius + 1), repeat=graph.dim
    )
    return tuple((cell, v) for cell in cells for v in graph.vertices)


def assemble_static(
    graph: PeriodicGraph,
    spec: TruncationSpec,
    q: Mapping | None = None,
) -> SymmetricOperator:
    """Dirichlet restriction of the static operator, plus a potential q.

    q maps site keys to real values added on the diagonal.  Support falling
    outside the box is dropped with a TruncationWarning reporting the lost
    absolute mass.
    """
    if spec.half_line and graph.dim != 1:
        raise ValueError("half-line truncation needs a 1d graph")
    if spec.half_line and graph.nu != 1:
        raise ValueError("half-line truncation needs a one-vertex cell")
    sites = box_sites(graph, spec)
    index = {s: i for i, s in enumerate(sites)}
    n = len(sites)

    q_norm: dict = {}
    dropped = 0.0
    if q:
        for key, val in q.items():
            ck = normalize_site_key(key, graph, spec.half_line)
            if ck in index:
                q_norm[ck] = q_norm.get(ck, 0.0) + float(val)
            else:
                dropped += abs(float(val))
    if dropped > 0.0:
        warnings.warn(
            f"potential support outside the box: dropped absolute mass "
            f"{dropped:.6g}",
            TruncationWarning,
            stacklevel=2,
        )

    if spec.half_line:
        pot = float(graph.potential_vector()[0])
        diag = np.full(n, 2.0 + pot)
        for key, val in q_norm.items():
            diag[index[key]] += val
        off = np.ones(n - 1)
        matrix = sp.diags_array(
            [off, diag, off], offsets=[-1, 0, 1], format="csr"
        )
        return SymmetricOperator(
            matrix=matrix, sites=sites, graph=graph, spec=spec, index=index
        )

    nu = graph.nu
    pot = graph.potential_vector()
    deg = np.asarray(graph.degree, dtype=float)
    diag = np.tile(deg + pot, n // nu)
    for key, val in q_norm.items():
        diag[index[key]] += val

    cells = list(
        itertools.product(range(-spec.radius, spec.radius + 1), repeat=graph.dim)
    )
    cell_index = {c: i for i, c in enumerate(cells)}
    rows: list[int] = []
    cols: list[int] = []
    for tail, head, offset in graph.edges:
        ti = graph.vertex_index(tail)
        hi = graph.vertex_index(head)
        for ci, cell in enumerate(cells):
            c2 = tuple(a + b for a, b in zip(cell, offset))
            cj = cell_index.get(c2)
            if cj is None:
                continue
            i = ci * nu + ti
            j = cj * nu + hi
            rows += [i, j]
            cols += [j, i]
    vals = -np.ones(len(rows))
    matrix = sp.coo_array(
        (np.concatenate([vals, diag]),
         (np.array(rows + list(range(n)), dtype=np.int64),
          np.array(cols + list(range(n)), dtype=np.int64))),
        shape=(n, n),
    ).tocsr()
    return SymmetricOperator(
        matrix=matrix, sites=sites, graph=graph, spec=spec, index=index
    )


def export_matrix(op: SymmetricOperator | sp.sparray, path) -> None:
    """Write the matrix in Matrix Market format for external inspection."""
    m = op.matrix if isinstance(op, SymmetricOperator) else op
    scipy.io.mmwrite(path, sp.coo_matrix(m))


# ---------------------------------------------------------------------------
# counting

def _as_sparse(matrix):
    if isinstance(matrix, SymmetricOperator):
        return matrix.matrix
    if isinstance(matrix, np.ndarray):
        return matrix
    return sp.csr_array(matrix)


def _bandwidth(m: sp.csr_array) -> int:
    coo = m.tocoo()
    if coo.nnz == 0:
        return 0
    return int(np.abs(coo.row - coo.col).max())


def _counting_plan(matrix):
    """Inspect the matrix once and pick a kernel; reused across retries."""
    m = _as_sparse(matrix)
    if isinstance(m, np.ndarray):
        if m.shape[0] > _DENSE_MAX + 4000:
            raise ValueError(
                f"dense input of dimension {m.shape[0]} is beyond the "
                f"supported counting size"
            )
        return ("dense", m)
    n = m.shape[0]
    b = _bandwidth(m)
    mp = m
    if b > 1 and n > _DENSE_SMALL:
        perm = reverse_cuthill_mckee(sp.csr_matrix(m), symmetric_mode=True)
        permuted = m[perm][:, perm].tocsr()
        b_rcm = _bandwidth(permuted)
        if b_rcm < b:
            mp, b = permuted, b_rcm
    if b <= 1:
        diag = mp.diagonal().astype(complex).real
        off = mp.diagonal(-1) if n > 1 else np.zeros(0)
        return ("sturm", diag, off)
    if n <= _DENSE_SMALL:
        return ("dense", mp.toarray())
    if (b + 1) * n <= _BAND_STORAGE_LIMIT and b < n // 3:
        return ("banded", mp, b)
    if n <= _DENSE_MAX:
        return ("dense", mp.toarray())
    raise ValueError(
        f"no feasible counting kernel: dimension {n}, bandwidth {b} "
        f"after reordering"
    )


def _norm_inf(matrix) -> float:
    m = _as_sparse(matrix)
    if isinstance(m, np.ndarray):
        if m.size == 0:
            return 0.0
        return float(np.abs(m).sum(axis=1).max())
    if m.nnz == 0:
        return 0.0
    return float(np.abs(m).sum(axis=1).max())


def _attempt(plan, shift: float, tol: float) -> int:
    kind = plan[0]
    if kind == "sturm":
        _, diag, off = plan
        return ldlt.tridiagonal_negative_count(diag, off, shift, tol)
    if kind == "banded":
        _, mp, b = plan
        band = ldlt.lower_band_array(mp, b)
        band[:, 0] -= shift
        return ldlt.banded_negative_count(band, tol)
    _, dense = plan
    work = np.array(dense, copy=True)
    idx = np.arange(work.shape[0])
    work[idx, idx] -= shift
    return ldlt.dense_negative_count(work, tol)


def count_below(matrix, mu: float) -> int:
    """Number of eigenvalues strictly below mu, by exact inertia.

    Ties between mu and an eigenvalue are broken by nudging mu down through
    the retry ladder, never by rounding a pivot.
    """
    plan = _counting_plan(matrix)
    tol = PIVOT_TOL_FACTOR * _norm_inf(matrix)
    attempted = []
    for off in SHIFT_RETRY_OFFSETS:
        shift = float(mu) + off
        attempted.append(shift)
        try:
            return _attempt(plan, shift, tol)
        except ldlt.PivotBreakdown:
            continue
    raise FactorizationError(
        "inertia count failed: factorization broke down at every shift",
        shifts=attempted,
    )


def count_above(matrix, mu: float) -> int:
    """Number of eigenvalues at or above mu (complement of count_below)."""
    m = _as_sparse(matrix)
    return m.shape[0] - count_below(matrix, mu)


def count_in(matrix, window) -> int:
    """Eigenvalues in the half-open window (lo, hi].

    Both endpoint counts are taken a fixed epsilon above the endpoint, so a
    window endpoint that coincides with an eigenvalue to within 1e-10 is
    resolved in favor of "inside" at hi and "outside" at lo.
    """
    w = as_window(window)
    hi_count = count_below(matrix, w.hi + COUNT_EDGE_EPS)
    lo_count = count_below(matrix, w.lo + COUNT_EDGE_EPS)
    return max(hi_count - lo_count, 0)


def nu_minus(
    graph: PeriodicGraph,
    spec: TruncationSpec,
    q: Mapping,
    mu: float,
    sign_of_q: int = +1,
    relaxed: bool = False,
) -> int:
    """Count eigenvalues of the static operator with potential below mu < 0.

    sign_of_q = +1 adds q as given; -1 enters q as a well profile (the
    operator gets -q).  relaxed lifts the mu < 0 requirement.
    """
    if not relaxed and mu >= 0:
        raise ValueError(f"nu_minus expects mu < 0, got {mu} (use relaxed=True)")
    q_eff = {k: sign_of_q * float(v) for k, v in q.items()}
    op = assemble_static(graph, spec, q_eff)
    return count_below(op, mu)


def nu_plus(
    graph: PeriodicGraph,
    spec: TruncationSpec,
    q: Mapping,
    mu: float,
    s_plus: float | None = None,
    sign_of_q: int = +1,
    relaxed: bool = False,
) -> int:
    """Count eigenvalues of the static operator with potential at or above mu.

    When s_plus is supplied (the unperturbed spectrum top) the requirement
    mu > s_plus is enforced unless relaxed.
    """
    if not relaxed and s_plus is not None and mu <= s_plus:
        raise ValueError(
            f"nu_plus expects mu > s_plus = {s_plus}, got {mu} (use relaxed=True)"
        )
    q_eff = {k: sign_of_q * float(v) for k, v in q.items()}
    op = assemble_static(graph, spec, q_eff)
    return count_above(op, mu)
