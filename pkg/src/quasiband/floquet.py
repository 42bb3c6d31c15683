"""Time-periodic potentials and the quasi-energy ladder matrix.

A potential V_x(t) = sum_k c_k(x) exp(i k omega t) with finitely many
harmonics turns the static box operator into a block matrix over Fourier
modes n: diagonal blocks h_box + n omega, and coupling blocks diag(c_{n-m})
between modes n and m.  Realness of V (c_{-k} = conj(c_k)) makes the ladder
Hermitian; it is validated at construction.

Counting in a window of the fundamental interval (-omega, 0] proceeds in two
stages: an exact inertia count on the ladder matrix (raw), then an
eigenvector pass that discards states leaking onto the outermost mode shells
or the outermost spatial shell (filtered).  Raw and filtered counts are both
reported; verdicts downstream use the filtered one.

The shifted-window check rebuilds the ladder over modes -N+1..N+1.  In exact
arithmetic that matrix is the original plus omega, so comparing spectra
within a fixed interior window isolates pure mode-truncation error; the
spatial restriction drops out of the comparison entirely.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh, ArpackError

from .errors import EigensolveError
from .finitevol import (
    COUNT_EDGE_EPS,
    SymmetricOperator,
    TruncationSpec,
    TruncationWarning,
    assemble_static,
    count_in,
    normalize_site_key,
    site_cell,
)
from .lattice import PeriodicGraph
from .windows import SpectralFrame, SpectralWindow, as_window

DENSE_EIG_CUTOFF = 6000
_DENSE_FALLBACK_MAX = 12000
_REALITY_RTOL = 1e-12


@dataclass
class TimePeriodicPotential:
    """Finitely supported potential with finitely many Fourier harmonics.

    coeffs maps a site key to {harmonic k: complex amplitude}.  Realness
    c_{-k} = conj(c_k) is required and checked.  cuboid, when given, declares
    that the support lies in the cell box 0 <= x_j <= cuboid[j]; the claim is
    verified against the keys that carry cell coordinates.
    """

    omega: float
    coeffs: dict
    cuboid: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        clean: dict = {}
        for site, cdict in self.coeffs.items():
            cc = {int(k): complex(v) for k, v in cdict.items() if v != 0}
            if not cc:
                continue
            scale = max(abs(v) for v in cc.values())
            for k, v in cc.items():
                mirror = cc.get(-k)
                if mirror is None or abs(mirror - v.conjugate()) > _REALITY_RTOL * scale:
                    raise ValueError(
                        f"potential at site {site!r} is not real: harmonic "
                        f"{-k} must be the conjugate of harmonic {k}"
                    )
            clean[site] = cc
        self.coeffs = clean
        if self.cuboid is not None:
            self.cuboid = tuple(int(m) for m in self.cuboid)
            if any(m < 0 for m in self.cuboid):
                raise ValueError(f"cuboid bounds must be >= 0: {self.cuboid}")
            for site in clean:
                cell = site_cell(site) if not isinstance(site, int) else (site,)
                if len(cell) != len(self.cuboid):
                    raise ValueError(
                        f"site {site!r} and cuboid {self.cuboid} disagree on "
                        f"dimension"
                    )
                if not all(0 <= c <= m for c, m in zip(cell, self.cuboid)):
                    raise ValueError(
                        f"site {site!r} lies outside the declared cuboid "
                        f"{self.cuboid}"
                    )

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def max_harmonic(self) -> int:
        k = 0
        for cdict in self.coeffs.values():
            for kk in cdict:
                k = max(k, abs(kk))
        return k

    @property
    def support(self) -> tuple:
        return tuple(self.coeffs.keys())

    def value(self, site, t: float) -> float:
        cdict = self.coeffs.get(site)
        if not cdict:
            return 0.0
        z = sum(v * np.exp(1j * k * self.omega * t) for k, v in cdict.items())
        return float(z.real)

    def scaled(self, amplitude: float) -> "TimePeriodicPotential":
        return TimePeriodicPotential(
            omega=self.omega,
            coeffs={s: {k: amplitude * v for k, v in c.items()}
                    for s, c in self.coeffs.items()},
            cuboid=self.cuboid,
        )

    def with_omega(self, omega: float) -> "TimePeriodicPotential":
        return TimePeriodicPotential(
            omega=omega,
            coeffs={s: dict(c) for s, c in self.coeffs.items()},
            cuboid=self.cuboid,
        )


def cosine_potential(
    omega: float,
    sites,
    amplitude: float = 1.0,
    cuboid: tuple[int, ...] | None = None,
) -> TimePeriodicPotential:
    """A cos(omega t) drive of equal amplitude on the given sites."""
    half = amplitude / 2.0
    return TimePeriodicPotential(
        omega=omega,
        coeffs={s: {1: half, -1: half} for s in sites},
        cuboid=cuboid,
    )


# ---------------------------------------------------------------------------
# envelopes

@dataclass(frozen=True)
class Envelopes:
    """Per-site magnitude and one-sided suprema of a periodic potential.

    u bounds sup_t |V_x(t)|; v_plus and v_minus bound the suprema of the
    positive and negative parts.  delta_plus / delta_minus are the global
    maxima of v_plus / v_minus.  In sampled mode the values can undershoot
    the true suprema by O(grid^-2); rigorous mode overestimates instead
    (sums of coefficient magnitudes).
    """

    u: dict
    v_plus: dict
    v_minus: dict
    delta_plus: float
    delta_minus: float
    time_grid: int
    rigorous: bool

    @property
    def support(self) -> tuple:
        return tuple(self.u.keys())

    def is_zero(self) -> bool:
        return all(val == 0.0 for val in self.u.values())


def sample_envelopes(
    potential: TimePeriodicPotential,
    time_grid: int = 256,
    rigorous: bool = False,
) -> Envelopes:
    """Envelope profiles of V, by dense time sampling or coefficient sums."""
    if time_grid < 4:
        raise ValueError("time_grid must be at least 4")
    u: dict = {}
    vp: dict = {}
    vm: dict = {}
    ts = potential.period * np.arange(time_grid) / time_grid
    for site, cdict in potential.coeffs.items():
        if rigorous:
            c0 = cdict.get(0, 0j).real
            rest = sum(abs(v) for k, v in cdict.items() if k != 0)
            u[site] = abs(c0) + rest
            vp[site] = max(c0 + rest, 0.0)
            vm[site] = max(rest - c0, 0.0)
            continue
        vals = np.zeros(time_grid, dtype=complex)
        for k, v in cdict.items():
            vals += v * np.exp(1j * k * potential.omega * ts)
        re = vals.real
        u[site] = float(np.abs(re).max())
        vp[site] = float(max(re.max(), 0.0))
        vm[site] = float(max(-re.min(), 0.0))
    return Envelopes(
        u=u,
        v_plus=vp,
        v_minus=vm,
        delta_plus=max(vp.values(), default=0.0),
        delta_minus=max(vm.values(), default=0.0),
        time_grid=time_grid,
        rigorous=rigorous,
    )


# ---------------------------------------------------------------------------
# ladder assembly

@dataclass(eq=False)
class QuasiEnergyMatrix:
    """Hermitian ladder matrix over (site, Fourier mode) with bookkeeping.

    Row ordering is site-major: row = site_row * n_modes + mode_column.
    """

    matrix: sp.csr_array
    box: SymmetricOperator
    modes: tuple[int, ...]
    omega: float
    potential: TimePeriodicPotential
    _mode_shell: np.ndarray = field(repr=False, default=None)
    _space_shell: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        m = len(self.modes)
        shell = {0, min(1, m - 1), max(m - 2, 0), m - 1}
        self._mode_shell = np.array(sorted(shell), dtype=np.int64)
        radius = self.box.spec.radius
        rows = [
            i for i, s in enumerate(self.box.sites)
            if max(abs(c) for c in site_cell(s)) == radius
        ]
        self._space_shell = np.array(rows, dtype=np.int64)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def n_sites(self) -> int:
        return self.box.n

    def reshape(self, vector: np.ndarray) -> np.ndarray:
        return np.asarray(vector).reshape(self.n_sites, self.n_modes)

    def mode_masses(self, vector: np.ndarray) -> np.ndarray:
        psi = self.reshape(vector)
        return np.sum(np.abs(psi) ** 2, axis=0)

    def leak(self, vector: np.ndarray) -> float:
        """Mass fraction on the outermost two mode shells + spatial shell."""
        psi = self.reshape(vector)
        total = float(np.sum(np.abs(psi) ** 2))
        if total == 0.0:
            return 0.0
        mode_mass = float(np.sum(np.abs(psi[:, self._mode_shell]) ** 2))
        space_mass = float(np.sum(np.abs(psi[self._space_shell, :]) ** 2))
        return (mode_mass + space_mass) / total


def _assemble_mode_window(
    graph: PeriodicGraph,
    potential: TimePeriodicPotential,
    spec: TruncationSpec,
    n_lo: int,
    n_hi: int,
) -> QuasiEnergyMatrix:
    box = assemble_static(graph, spec, None)
    modes = tuple(range(n_lo, n_hi + 1))
    m = len(modes)
    kmax = potential.max_harmonic

    if potential.cuboid is not None:
        limit = spec.radius
        if any(mm > limit for mm in potential.cuboid):
            raise ValueError(
                f"box radius {spec.radius} does not cover the declared "
                f"cuboid {potential.cuboid}"
            )

    coef = np.zeros((kmax + 1, box.n), dtype=complex)
    dropped = 0.0
    for site, cdict in potential.coeffs.items():
        ck = normalize_site_key(site, graph, spec.half_line)
        row = box.index.get(ck)
        if row is None:
            dropped += sum(abs(v) for v in cdict.values())
            continue
        for k, v in cdict.items():
            if k >= 0:
                coef[k, row] += v
    if dropped > 0.0:
        warnings.warn(
            f"potential support outside the box: dropped coefficient mass "
            f"{dropped:.6g}",
            TruncationWarning,
            stacklevel=3,
        )

    real = bool(np.all(coef.imag == 0.0))
    omega = potential.omega
    eye_modes = sp.eye_array(m, format="csr")
    ladder = sp.kron(box.matrix, eye_modes)
    shifts = omega * np.asarray(modes, dtype=float)
    ladder = ladder + sp.kron(
        sp.eye_array(box.n, format="csr"), sp.diags_array(shifts)
    )
    if np.any(coef[0] != 0):
        v0 = coef[0].real if real else coef[0]
        ladder = ladder + sp.kron(sp.diags_array(v0), eye_modes)
    for k in range(1, kmax + 1):
        if not np.any(coef[k] != 0):
            continue
        vk = coef[k].real if real else coef[k]
        down = sp.eye_array(m, k=-k, format="csr")
        ladder = ladder + sp.kron(sp.diags_array(vk), down)
        ladder = ladder + sp.kron(sp.diags_array(np.conj(vk)), down.T)
    return QuasiEnergyMatrix(
        matrix=sp.csr_array(ladder),
        box=box,
        modes=modes,
        omega=omega,
        potential=potential,
    )


def assemble_quasienergy(
    graph: PeriodicGraph,
    potential: TimePeriodicPotential,
    spec: TruncationSpec,
    n_half: int,
) -> QuasiEnergyMatrix:
    """Ladder matrix over the symmetric mode window -n_half..n_half.

    Requires n_half >= the highest harmonic present, so every coupling block
    fits inside the window.
    """
    kmax = potential.max_harmonic
    if n_half < kmax:
        raise ValueError(
            f"mode window half-width {n_half} is smaller than the highest "
            f"harmonic {kmax}"
        )
    return _assemble_mode_window(graph, potential, spec, -n_half, n_half)


# ---------------------------------------------------------------------------
# counting with leak filtering

@dataclass(frozen=True)
class QuasiCountResult:
    """Raw and leak-filtered counts in one window, with the evidence."""

    window: tuple[float, float]
    window_name: str
    guarded: tuple[float, float]
    raw: int
    filtered: int
    eigenvalues: tuple[float, ...]
    leaks: tuple[float, ...]
    leak_tolerance: float
    edge_guard: float

    def to_dict(self) -> dict:
        return {
            "window": list(self.window),
            "name": self.window_name,
            "guarded": list(self.guarded),
            "raw": self.raw,
            "filtered": self.filtered,
            "eigenvalues": list(self.eigenvalues),
            "leaks": list(self.leaks),
            "leak_tolerance": self.leak_tolerance,
            "edge_guard": self.edge_guard,
        }


def eigenpairs_in_window(
    ladder: QuasiEnergyMatrix,
    lo: float,
    hi: float,
    expected: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs with eigenvalue in (lo, hi], consistent with count_in.

    Dense solve below DENSE_EIG_CUTOFF, shift-invert above it with the
    subspace size escalated until at least `expected` eigenvalues land in
    the window (falling back to a dense solve when escalation stalls).
    """
    a = lo + COUNT_EDGE_EPS
    b = hi + COUNT_EDGE_EPS
    dim = ladder.dim
    if dim <= DENSE_EIG_CUTOFF:
        vals, vecs = scipy.linalg.eigh(
            ladder.matrix.toarray(), subset_by_value=(a, b)
        )
        return vals, vecs

    sigma = 0.5 * (lo + hi)
    k = min(expected + 4, dim - 2)
    for _ in range(4):
        try:
            vals, vecs = eigsh(ladder.matrix, k=k, sigma=sigma, which="LM")
        except (RuntimeError, ArpackError):
            sigma += 0.37 * (hi - lo) * 1e-3 + 1e-9
            continue
        sel = (vals > a) & (vals <= b)
        if int(sel.sum()) >= expected:
            order = np.argsort(vals[sel])
            return vals[sel][order], vecs[:, sel][:, order]
        k = min(2 * k + 8, dim - 2)
    if dim <= _DENSE_FALLBACK_MAX:
        vals, vecs = scipy.linalg.eigh(
            ladder.matrix.toarray(), subset_by_value=(a, b)
        )
        return vals, vecs
    raise EigensolveError(
        f"shift-invert failed to recover {expected} eigenvalues in "
        f"({lo}, {hi}] at dimension {dim}"
    )


def quasi_count(
    ladder: QuasiEnergyMatrix,
    window,
    leak_tolerance: float = 1e-6,
    edge_guard: float = 1e-8,
) -> QuasiCountResult:
    """Count ladder eigenvalues in a window of (-omega, 0].

    The window is shrunk by edge_guard at both ends before counting, so
    states riding exactly on a window edge are excluded rather than counted
    on rounding luck.  filtered counts only eigenvectors whose leak onto the
    truncation boundary stays below leak_tolerance.
    """
    w = as_window(window)
    if w.lo < -ladder.omega - 1e-12 or w.hi > 1e-12:
        raise ValueError(
            f"window ({w.lo}, {w.hi}] must sit inside (-omega, 0] with "
            f"omega = {ladder.omega}"
        )
    lo_g, hi_g = w.lo + edge_guard, w.hi - edge_guard
    base = dict(
        window=w.as_tuple(),
        window_name=w.name,
        guarded=(lo_g, hi_g),
        leak_tolerance=leak_tolerance,
        edge_guard=edge_guard,
    )
    if lo_g >= hi_g:
        return QuasiCountResult(
            raw=0, filtered=0, eigenvalues=(), leaks=(), **base
        )
    raw = count_in(ladder.matrix, (lo_g, hi_g))
    if raw == 0:
        return QuasiCountResult(
            raw=0, filtered=0, eigenvalues=(), leaks=(), **base
        )
    vals, vecs = eigenpairs_in_window(ladder, lo_g, hi_g, expected=raw)
    leaks = tuple(ladder.leak(vecs[:, i]) for i in range(vals.shape[0]))
    filtered = sum(1 for leak in leaks if leak < leak_tolerance)
    return QuasiCountResult(
        raw=raw,
        filtered=filtered,
        eigenvalues=tuple(float(v) for v in vals),
        leaks=leaks,
        **base,
    )


def fold_modulo(value: float, omega: float) -> float:
    """Translate by an integer multiple of omega into (-omega, 0]."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    r = value - omega * math.ceil(value / omega)
    if r > 0.0:
        r -= omega
    if r <= -omega:
        r += omega
    return r


# ---------------------------------------------------------------------------
# shifted-window consistency

@dataclass(frozen=True)
class PeriodicityReport:
    """Spectral deviation between the ladder and its mode-shifted rebuild."""

    n_half: int
    window: tuple[float, float]
    checked: tuple[tuple[float, float, float], ...]  # (value, leak, deviation)
    unmatched: tuple[float, ...]
    skipped_leaky: int
    max_deviation: float | None

    def to_dict(self) -> dict:
        return {
            "n_half": self.n_half,
            "window": list(self.window),
            "checked": [list(c) for c in self.checked],
            "unmatched": list(self.unmatched),
            "skipped_leaky": self.skipped_leaky,
            "max_deviation": self.max_deviation,
        }


def periodicity_check(
    graph: PeriodicGraph,
    potential: TimePeriodicPotential,
    spec: TruncationSpec,
    n_half: int,
    interior_margin: float = 1e-6,
    leak_tolerance: float = 1e-10,
) -> PeriodicityReport:
    """Compare ladder spectra between mode windows -N..N and -N+1..N+1.

    Exactly, the shifted-window matrix is the original plus omega, so any
    deviation seen inside a fixed interior window is mode-truncation error.
    Only eigenvectors of the original ladder with leak below leak_tolerance
    participate; an eigenvalue with no partner within the comparison window
    is reported as unmatched rather than folded into the deviation.
    """
    kmax = potential.max_harmonic
    if n_half < kmax + 2:
        raise ValueError(
            f"shifted-window check needs n_half >= max harmonic + 2 "
            f"(= {kmax + 2}), got {n_half}"
        )
    ladder = _assemble_mode_window(graph, potential, spec, -n_half, n_half)
    shifted = _assemble_mode_window(
        graph, potential, spec, -n_half + 1, n_half + 1
    )
    if ladder.dim > DENSE_EIG_CUTOFF:
        raise ValueError(
            f"shifted-window check is dense-only; dimension {ladder.dim} "
            f"exceeds {DENSE_EIG_CUTOFF} (reduce the spatial radius)"
        )
    omega = potential.omega
    a, b = -omega + interior_margin, -interior_margin
    vals, vecs = scipy.linalg.eigh(
        ladder.matrix.toarray(), subset_by_value=(a, b)
    )
    ref = scipy.linalg.eigvalsh(
        shifted.matrix.toarray(),
        subset_by_value=(a - interior_margin / 2, b + interior_margin / 2),
    )
    checked = []
    unmatched = []
    skipped = 0
    for i, val in enumerate(vals):
        leak = ladder.leak(vecs[:, i])
        if leak >= leak_tolerance:
            skipped += 1
            continue
        if ref.size == 0:
            unmatched.append(float(val))
            continue
        deviation = float(np.min(np.abs(ref - val)))
        checked.append((float(val), float(leak), deviation))
    max_dev = max((c[2] for c in checked), default=None)
    return PeriodicityReport(
        n_half=n_half,
        window=(a, b),
        checked=tuple(checked),
        unmatched=tuple(unmatched),
        skipped_leaky=skipped,
        max_deviation=max_dev,
    )


# ---------------------------------------------------------------------------
# spatial support diagnostics

def in_cuboid(cell: tuple[int, ...], bounds: tuple[int, ...]) -> bool:
    """Membership in the cell box 0 <= x_j <= bounds[j]."""
    if len(cell) != len(bounds):
        raise ValueError(f"cell {cell} vs bounds {bounds}: dimension mismatch")
    return all(0 <= c <= m for c, m in zip(cell, bounds))


def in_half_space(cell: tuple[int, ...], axis: int, z: int, side: int = +1) -> bool:
    """Membership in {x : side * (x_axis - z) >= 0}."""
    return side * (cell[axis] - z) >= 0


def in_cone(cell: tuple[int, ...], apex: tuple[int, ...]) -> bool:
    """Membership in the axis-aligned cone opening along the last axis."""
    if len(cell) != len(apex):
        raise ValueError(f"cell {cell} vs apex {apex}: dimension mismatch")
    slack = cell[-1] - apex[-1]
    taper = sum(abs(c - m) for c, m in zip(cell[:-1], apex[:-1]))
    return taper <= slack


@dataclass(frozen=True)
class ModeSupportEntry:
    mode: int
    mass_fraction: float
    outside_ratio: float | None
    ok: bool | None
    note: str = ""


@dataclass(frozen=True)
class ModeSupportReport:
    """Where the designated Fourier components of an eigenvector live.

    For an eigenvalue folded into the edge window the components at modes
    -1..-rho are expected to concentrate on the potential's cuboid; in the
    band window the expectation extends to mode -(rho+1).  passed is None
    when the eigenvalue sits in neither window or no designated mode exists.
    """

    value: float
    folded: float
    interval: str | None
    entries: tuple[ModeSupportEntry, ...]
    passed: bool | None
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "folded": self.folded,
            "interval": self.interval,
            "entries": [
                {
                    "mode": e.mode,
                    "mass_fraction": e.mass_fraction,
                    "outside_ratio": e.outside_ratio,
                    "ok": e.ok,
                    "note": e.note,
                }
                for e in self.entries
            ],
            "passed": self.passed,
            "tolerance": self.tolerance,
        }


def mode_support_check(
    ladder: QuasiEnergyMatrix,
    value: float,
    vector: np.ndarray,
    frame: SpectralFrame,
    cuboid: tuple[int, ...] | None = None,
    region: Callable[[tuple[int, ...]], bool] | None = None,
    tolerance: float = 0.25,
) -> ModeSupportReport:
    """Check concentration of designated mode components on a region.

    The region is the potential cuboid by default; a custom membership
    predicate over cells may be supplied instead (half-spaces, cones).
    """
    if region is None:
        if cuboid is None:
            cuboid = ladder.potential.cuboid
        if cuboid is None:
            raise ValueError("no region: supply a cuboid or a predicate")
        bounds = tuple(cuboid)
        region = lambda cell: in_cuboid(cell, bounds)  # noqa: E731

    folded = fold_modulo(value, ladder.omega)
    rho = frame.rho
    s_e = frame.s_e
    if -s_e < folded < 0.0:
        interval = "edge"
        designated = range(-1, -rho - 1, -1)
    elif -ladder.omega < folded < -s_e:
        interval = "band"
        designated = range(-1, -rho - 2, -1)
    else:
        return ModeSupportReport(
            value=float(value),
            folded=folded,
            interval=None,
            entries=(),
            passed=None,
            tolerance=tolerance,
        )

    psi = ladder.reshape(vector)
    total = float(np.sum(np.abs(psi) ** 2))
    inside = np.array(
        [region(site_cell(s)) for s in ladder.box.sites], dtype=bool
    )
    entries = []
    verdicts = []
    for n in designated:
        if n not in ladder.modes:
            entries.append(
                ModeSupportEntry(n, 0.0, None, None, "mode outside window")
            )
            continue
        col = ladder.modes.index(n)
        comp = psi[:, col]
        mass = float(np.sum(np.abs(comp) ** 2))
        frac = mass / total if total > 0 else 0.0
        if frac < 1e-12:
            entries.append(
                ModeSupportEntry(n, frac, None, True, "negligible component")
            )
            verdicts.append(True)
            continue
        outside = float(np.sum(np.abs(comp[~inside]) ** 2)) / mass
        ok = outside <= tolerance
        entries.append(ModeSupportEntry(n, frac, outside, ok))
        verdicts.append(ok)
    passed = all(verdicts) if verdicts else None
    return ModeSupportReport(
        value=float(value),
        folded=folded,
        interval=interval,
        entries=tuple(entries),
        passed=passed,
        tolerance=tolerance,
    )


# ---------------------------------------------------------------------------
# JSON interchange

def potential_to_dict(potential: TimePeriodicPotential) -> dict:
    sites = []
    for site, cdict in potential.coeffs.items():
        if isinstance(site, int):
            entry: dict = {"index": [site]}
        elif isinstance(site, tuple) and site and isinstance(site[0], tuple):
            entry = {"index": list(site[0]), "vertex": site[1]}
        else:
            entry = {"index": list(site)}
        entry["coeffs"] = [
            {"k": k, "re": v.real, "im": v.imag}
            for k, v in sorted(cdict.items())
        ]
        sites.append(entry)
    out = {"omega": potential.omega, "sites": sites}
    if potential.cuboid is not None:
        out["cuboid"] = list(potential.cuboid)
    return out


def potential_from_dict(data: dict) -> TimePeriodicPotential:
    try:
        omega = float(data["omega"])
        coeffs: dict = {}
        for entry in data["sites"]:
            cell = tuple(int(c) for c in entry["index"])
            key = (cell, entry["vertex"]) if "vertex" in entry else cell
            cdict = {
                int(c["k"]): complex(float(c.get("re", 0.0)),
                                     float(c.get("im", 0.0)))
                for c in entry["coeffs"]
            }
            coeffs[key] = cdict
        cuboid = data.get("cuboid")
        if cuboid is not None:
            cuboid = tuple(int(m) for m in cuboid)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed potential description: {exc}") from exc
    return TimePeriodicPotential(omega=omega, coeffs=coeffs, cuboid=cuboid)


def load_potential(path) -> TimePeriodicPotential:
    import json

    with open(path, "r", encoding="utf-8") as fh:
        return potential_from_dict(json.load(fh))


def save_potential(potential: TimePeriodicPotential, path) -> None:
    import json

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(potential_to_dict(potential), fh, indent=2)
        fh.write("\n")
