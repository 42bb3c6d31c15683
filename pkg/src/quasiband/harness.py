"""Experiment orchestration: configs, pipelines, reports.

A config (TOML or JSON, detected by extension) describes one experiment
family: which graph, which drive, truncation sizes, requested bound
variants, and output paths.  The pipelines here turn that into report
dictionaries with a fixed, deterministic layout:

* verify / count: one instance end to end (band structure, frame,
  envelopes, ladder assembly, window counts, bounds, verdicts, convergence
  rechecks, shifted-window deviation);
* sweep: the same pipeline over a frequency x amplitude grid, instances
  executed concurrently and merged in index order so the output does not
  depend on scheduling;
* bargmann: the seeded random half-line counting suite against the weighted
  first-moment norm;
* calibrate: empirical counting-constant ratios from single-site wells.

Reports serialize through a small canonical JSON writer (17 significant
digit floats, stable key order) so that identical configs and seeds produce
byte-identical files modulo the timestamp.  Verdicts compare leak-filtered
counts against bound values scaled by `bound_scale`; the scale exists so a
deliberately broken run (scale 0) can prove the violation path works.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

try:
    import tomllib  # Python 3.11+
except ImportError:
    import tomli as tomllib

from . import bounds as bnd
from .errors import ConfigError, QuasibandError
from .finitevol import (
    TruncationSpec,
    assemble_static,
    count_above,
    count_below,
    normalize_site_key,
)
from .floquet import (
    QuasiEnergyMatrix,
    TimePeriodicPotential,
    assemble_quasienergy,
    cosine_potential,
    eigenpairs_in_window,
    load_potential,
    mode_support_check,
    periodicity_check,
    potential_from_dict,
    sample_envelopes,
)
from .lattice import (
    BandStructure,
    PeriodicGraph,
    band_structure,
    build_honeycomb,
    build_hypercubic,
    load_graph,
    top_regularity_diagnostic,
)
from .windows import SpectralFrame, SpectralWindow

SCHEMA_VERSION = 1
WORKERS_ENV_VAR = "QUASIBAND_WORKERS"
_COUNT_EPS = 1e-10  # endpoint shift, matches the counting layer

_MODES = ("verify", "count", "sweep", "bargmann", "calibrate", "bands")
_VARIANTS = ("T1", "T2", "T3", "cor42", "cor43", "cor44")
_BUILTIN_GRAPHS = {
    "z1": lambda: build_hypercubic(1),
    "z2": lambda: build_hypercubic(2),
    "z3": lambda: build_hypercubic(3),
    "z4": lambda: build_hypercubic(4),
    "honeycomb": build_honeycomb,
}


# ---------------------------------------------------------------------------
# configuration

@dataclass
class ExperimentConfig:
    mode: str
    name: str
    raw: dict
    graph: dict
    potential: dict
    radius: int
    modes_half: int
    half_line: bool
    time_grid: int
    band_grid: int | None
    lp_exponent: float
    leak_tolerance: float
    edge_guard: float
    bound_variants: tuple[str, ...]
    cks_minus: float
    cks_plus: float
    coupling_c: float | None
    extra_windows: tuple[str, ...]
    convergence: bool
    periodicity_enabled: bool
    periodicity_radius: int | None
    periodicity_margin: float
    periodicity_leak_tol: float
    omega: float | None
    amplitude: float
    sweep_omega: tuple[float, ...]
    sweep_amplitude: tuple[float, ...]
    mode_support_enabled: bool
    mode_support_tolerance: float
    output_json: str | None
    output_csv: str | None
    seed: int
    workers: int
    bound_scale: float
    bargmann: dict
    calibrate: dict
    bands: dict


def _get(data: dict, section: str) -> dict:
    val = data.get(section, {})
    if not isinstance(val, dict):
        raise ConfigError(f"section [{section}] must be a table, got {val!r}")
    return val


def _resolve_file_field(section: dict, base_dir: Path | None) -> dict:
    if "file" not in section:
        return section
    out = dict(section)
    path = Path(out["file"])
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    if not path.exists():
        raise ConfigError(f"referenced file does not exist: {path}")
    out["file"] = str(path)
    return out


def config_from_dict(
    data: dict, name: str = "", base_dir: Path | None = None
) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table")
    mode = data.get("mode")
    if mode not in _MODES:
        raise ConfigError(f"mode must be one of {_MODES}, got {mode!r}")

    graph = data.get("graph", {})
    if isinstance(graph, str):
        graph = {"builtin": graph}
    graph = _resolve_file_field(graph, base_dir)
    potential = _resolve_file_field(_get(data, "potential"), base_dir)
    trunc = _get(data, "truncation")
    counting = _get(data, "counting")
    bounds_sec = _get(data, "bounds")
    windows_sec = _get(data, "windows")
    conv = _get(data, "convergence")
    peri = _get(data, "periodicity")
    sweep = _get(data, "sweep")
    verify = _get(data, "verify")
    msup = _get(data, "mode_support")
    out = _get(data, "output")
    runtime = _get(data, "runtime")
    frame_sec = _get(data, "frame")

    variants = tuple(bounds_sec.get("variants", ()))
    for v in variants:
        if v not in _VARIANTS:
            raise ConfigError(f"unknown bound variant {v!r}")
    coupling_c = bounds_sec.get("coupling_c")
    if coupling_c is not None:
        coupling_c = float(coupling_c)
    if any(v in ("T2", "cor43") for v in variants) and coupling_c is None:
        raise ConfigError("variants T2/cor43 need bounds.coupling_c")

    cfg = ExperimentConfig(
        mode=mode,
        name=data.get("name", name),
        raw=data,
        graph=graph,
        potential=potential,
        radius=int(trunc.get("radius", 100)),
        modes_half=int(trunc.get("modes", 8)),
        half_line=bool(trunc.get("half_line", False)),
        time_grid=int(trunc.get("time_grid", 256)),
        band_grid=(int(frame_sec["band_grid"])
                   if "band_grid" in frame_sec else None),
        lp_exponent=float(bounds_sec.get("p", 1.0)),
        leak_tolerance=float(counting.get("leak_tolerance", 1e-6)),
        edge_guard=float(counting.get("edge_guard", 1e-8)),
        bound_variants=variants,
        cks_minus=float(bounds_sec.get("cks_minus", 1.0)),
        cks_plus=float(bounds_sec.get("cks_plus", 1.0)),
        coupling_c=coupling_c,
        extra_windows=tuple(windows_sec.get("names", ())),
        convergence=bool(conv.get("enabled", True)),
        periodicity_enabled=bool(peri.get("enabled", True)),
        periodicity_radius=(int(peri["radius"]) if "radius" in peri else None),
        periodicity_margin=float(peri.get("margin", 1e-6)),
        periodicity_leak_tol=float(peri.get("leak_tolerance", 1e-10)),
        omega=(float(verify["omega"]) if "omega" in verify else None),
        amplitude=float(verify.get("amplitude", 1.0)),
        sweep_omega=tuple(float(w) for w in sweep.get("omega", ())),
        sweep_amplitude=tuple(float(a) for a in sweep.get("amplitude", ())),
        mode_support_enabled=bool(msup.get("enabled", False)),
        mode_support_tolerance=float(msup.get("tolerance", 0.25)),
        output_json=out.get("json"),
        output_csv=out.get("csv"),
        seed=int(runtime.get("seed", 0)),
        workers=int(runtime.get("workers", 0)),
        bound_scale=float(runtime.get("bound_scale", 1.0)),
        bargmann=_get(data, "bargmann"),
        calibrate=_get(data, "calibrate"),
        bands=_get(data, "bands"),
    )
    if cfg.radius < 1:
        raise ConfigError(f"truncation.radius must be >= 1, got {cfg.radius}")
    if cfg.modes_half < 0:
        raise ConfigError(f"truncation.modes must be >= 0, got {cfg.modes_half}")
    if cfg.mode == "sweep" and not (cfg.sweep_omega and cfg.sweep_amplitude):
        raise ConfigError("sweep mode needs sweep.omega and sweep.amplitude")
    if cfg.mode in ("verify", "count", "sweep") and not cfg.graph:
        raise ConfigError(f"{cfg.mode} mode needs a [graph] section")
    if cfg.mode in ("verify", "count", "sweep") and not cfg.potential:
        raise ConfigError(f"{cfg.mode} mode needs a [potential] section")
    return cfg


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        if p.suffix == ".toml":
            with open(p, "rb") as fh:
                data = tomllib.load(fh)
        elif p.suffix == ".json":
            with open(p, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        else:
            raise ConfigError(
                f"config must be .toml or .json, got {p.suffix!r}"
            )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"failed to parse {p}: {exc}") from exc
    return config_from_dict(data, name=p.stem, base_dir=p.parent)


def resolve_graph(cfg: ExperimentConfig) -> PeriodicGraph:
    g = cfg.graph
    try:
        if "builtin" in g:
            key = g["builtin"]
            if key not in _BUILTIN_GRAPHS:
                raise ConfigError(
                    f"unknown builtin graph {key!r}; have "
                    f"{sorted(_BUILTIN_GRAPHS)}"
                )
            return _BUILTIN_GRAPHS[key]()
        if "file" in g:
            return load_graph(g["file"])
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"failed to build graph: {exc}") from exc
    raise ConfigError("graph section needs 'builtin' or 'file'")


def resolve_potential(
    cfg: ExperimentConfig, omega: float | None, amplitude: float
) -> TimePeriodicPotential:
    spec = cfg.potential
    try:
        if "file" in spec:
            pot = load_potential(spec["file"])
        elif "inline" in spec:
            pot = potential_from_dict(spec["inline"])
        elif spec.get("kind") == "cosine":
            if omega is None:
                raise ConfigError(
                    "cosine potential needs an omega (verify.omega or a "
                    "sweep axis)"
                )
            sites = [
                tuple(s) if isinstance(s, list) else s
                for s in spec.get("sites", ())
            ]
            if not sites:
                raise ConfigError("cosine potential needs a site list")
            cuboid = spec.get("cuboid")
            pot = cosine_potential(
                omega,
                sites,
                float(spec.get("amplitude", 1.0)),
                cuboid=tuple(cuboid) if cuboid else None,
            )
        else:
            raise ConfigError(
                "potential section needs 'file', 'inline', or kind='cosine'"
            )
        if omega is not None and pot.omega != omega:
            pot = pot.with_omega(omega)
        if amplitude != 1.0:
            pot = pot.scaled(amplitude)
        return pot
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"failed to build potential: {exc}") from exc


def _resolve_workers(cfg: ExperimentConfig, override: int | None = None) -> int:
    if override is not None and override > 0:
        return override
    if cfg.workers > 0:
        return cfg.workers
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        try:
            val = int(env)
            if val > 0:
                return val
        except ValueError:
            raise ConfigError(
                f"{WORKERS_ENV_VAR} must be a positive integer, got {env!r}"
            )
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# canonical serialization

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(float(x), ".17g")
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def _ser(obj, out: list, level: int, indent: int | None):
    nl = "" if indent is None else "\n" + " " * (indent * (level + 1))
    nl_close = "" if indent is None else "\n" + " " * (indent * level)
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if not isinstance(k, str):
                raise TypeError(f"report keys must be strings, got {k!r}")
            out.append(("," if i else "") + nl + json.dumps(k) + ": ")
            _ser(v, out, level + 1, indent)
        out.append(nl_close + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[")
        for i, v in enumerate(obj):
            out.append(("," if i else "") + nl)
            _ser(v, out, level + 1, indent)
        out.append(nl_close + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} in a report")


def dumps_canonical(obj, indent: int | None = 2) -> str:
    """Deterministic JSON text with 17-significant-digit floats."""
    out: list[str] = []
    _ser(obj, out, 0, indent)
    return "".join(out)


def report_signature(report: dict) -> str:
    """Canonical text of a report with the timestamp removed."""
    body = {k: v for k, v in report.items() if k != "created"}
    return dumps_canonical(body)


def write_report_json(report: dict, path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(dumps_canonical(report) + "\n", encoding="utf-8")


def _flatten(prefix: str, value, row: dict):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, row)
    elif isinstance(value, (list, tuple)):
        row[prefix] = dumps_canonical(list(value), indent=None)
    else:
        row[prefix] = value


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, (float, np.floating)):
        return _fmt_float(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_report_csv(report: dict, path) -> None:
    """Flatten the report's record list into one CSV row per record."""
    records = None
    for key in ("instances", "records", "entries"):
        if isinstance(report.get(key), list):
            records = report[key]
            break
    if records is None:
        records = [report]
    rows = []
    columns: list[str] = []
    for rec in records:
        row: dict = {}
        _flatten("", rec, row)
        for col in row:
            if col not in columns:
                columns.append(col)
        rows.append(row)
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_csv_cell(row.get(c)) for c in columns])


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# expressions deliberately left unevaluated, flagged so report consumers
# know their absence is a decision rather than an omission
_NOT_COMPUTED = (
    "(q_minus - omega*|n| + mu)_plus: no defined role in any bound "
    "computed here; recorded as unused and never evaluated",
)


def _base_report(kind: str, cfg: ExperimentConfig | None) -> dict:
    report = {
        "schema": SCHEMA_VERSION,
        "kind": kind,
        "created": _timestamp(),
        "config": cfg.raw if cfg is not None else {},
    }
    if kind in ("verify", "count", "sweep"):
        report["not_computed"] = list(_NOT_COMPUTED)
    return report


# ---------------------------------------------------------------------------
# instance pipeline

def _support_outside_box(
    potential: TimePeriodicPotential,
    graph: PeriodicGraph,
    spec: TruncationSpec,
) -> float:
    from .finitevol import box_sites

    index = set(box_sites(graph, spec))
    dropped = 0.0
    for site, cdict in potential.coeffs.items():
        key = normalize_site_key(site, graph, spec.half_line)
        if key not in index:
            dropped += sum(abs(v) for v in cdict.values())
    return dropped


def _collect_windows(
    frame: SpectralFrame,
    results: dict[str, bnd.BoundResult],
    extra_names: tuple[str, ...],
    omega: float,
) -> tuple[dict[str, SpectralWindow], dict[str, str]]:
    canonical = {}
    # earlier names win when windows coincide (gap == edge window at rho 0)
    for name in (
        "gap", "gap_minus", "gap_plus", "band_window", "edge_window",
        "fundamental",
    ):
        w = frame.window_by_name(name)
        if w is not None:
            canonical.setdefault((w.lo, w.hi), name)
    registry: dict[str, SpectralWindow] = {}
    assign: dict[str, str] = {}

    def register(lo: float, hi: float) -> str:
        name = canonical.get((lo, hi))
        lo_c = max(lo, -omega)
        hi_c = min(hi, 0.0)
        if hi_c < lo_c:
            hi_c = lo_c
        if name is None:
            name = f"({lo_c:.9g},{hi_c:.9g}]"
        if name not in registry:
            registry[name] = SpectralWindow(lo_c, hi_c, name)
        return name

    for res in results.values():
        if res.window is not None:
            assign[res.bound_id] = register(*res.window)
    for name in extra_names:
        w = frame.window_by_name(name)  # unknown names raise ValueError
        if w is not None and name not in registry:
            registry[name] = w
    return registry, assign


def _count_windows(
    ladder: QuasiEnergyMatrix,
    registry: dict[str, SpectralWindow],
    leak_tolerance: float,
    edge_guard: float,
) -> dict[str, dict]:
    """Counts for every window, sharing one eigenvector pass over the hull.

    Raw counts come from inertia at the guarded window endpoints; the
    leak-filtered counts reuse a single eigenpair extraction over the hull
    of all nonempty guarded windows, which keeps the sparse path to one
    shift-invert solve per ladder.
    """
    out: dict[str, dict] = {}
    guarded = {}
    for name, w in registry.items():
        if w.lo < -ladder.omega - 1e-12 or w.hi > 1e-12:
            raise ValueError(
                f"window {name} = ({w.lo}, {w.hi}] outside (-omega, 0]"
            )
        lo_g, hi_g = w.lo + edge_guard, w.hi - edge_guard
        if lo_g < hi_g:
            guarded[name] = (lo_g, hi_g)
        else:
            out[name] = {
                "window": [w.lo, w.hi], "name": name,
                "guarded": [lo_g, hi_g], "raw": 0, "filtered": 0,
                "eigenvalues": [], "leaks": [],
                "leak_tolerance": leak_tolerance, "edge_guard": edge_guard,
            }
    if not guarded:
        return out

    # one inertia evaluation per distinct endpoint
    points = sorted({p for pair in guarded.values() for p in pair})
    below = {p: count_below(ladder.matrix, p + _COUNT_EPS) for p in points}

    hull_lo = min(p[0] for p in guarded.values())
    hull_hi = max(p[1] for p in guarded.values())
    hull_raw = max(below[hull_hi] - below[hull_lo], 0)
    if hull_raw > 0:
        vals, vecs = eigenpairs_in_window(
            ladder, hull_lo, hull_hi, expected=hull_raw
        )
        leaks = np.array(
            [ladder.leak(vecs[:, i]) for i in range(vals.shape[0])]
        )
    else:
        vals = np.zeros(0)
        leaks = np.zeros(0)

    for name, (lo_g, hi_g) in guarded.items():
        w = registry[name]
        raw = max(below[hi_g] - below[lo_g], 0)
        sel = (vals > lo_g + _COUNT_EPS) & (vals <= hi_g + _COUNT_EPS)
        sub_vals = vals[sel]
        sub_leaks = leaks[sel]
        filtered = int(np.sum(sub_leaks < leak_tolerance))
        out[name] = {
            "window": [w.lo, w.hi], "name": name,
            "guarded": [lo_g, hi_g], "raw": int(raw), "filtered": filtered,
            "eigenvalues": [float(v) for v in sub_vals],
            "leaks": [float(x) for x in sub_leaks],
            "leak_tolerance": leak_tolerance, "edge_guard": edge_guard,
        }
    return out


def _compute_bounds(
    cfg: ExperimentConfig,
    frame: SpectralFrame,
    env,
    potential: TimePeriodicPotential,
) -> dict[str, bnd.BoundResult]:
    results: dict[str, bnd.BoundResult] = {}
    for variant in cfg.bound_variants:
        if variant == "T1":
            group = bnd.bound_T1(
                frame, env, cfg.cks_minus, cfg.cks_plus, p=cfg.lp_exponent
            )
        elif variant == "T2":
            group = bnd.bound_T2(
                frame, env, cfg.coupling_c, cfg.cks_minus, cfg.cks_plus,
                p=cfg.lp_exponent,
            )
        elif variant == "T3":
            if potential.cuboid is None:
                raise ConfigError(
                    "variant T3 needs a potential with a declared cuboid"
                )
            group = bnd.bound_T3(
                frame, env, cfg.cks_minus, cfg.cks_plus, p=cfg.lp_exponent,
                cuboid=potential.cuboid,
            )
        elif variant == "cor44":
            if potential.cuboid is None:
                raise ConfigError(
                    "variant cor44 needs a potential with a declared cuboid"
                )
            group = bnd.bound_1d(frame, env, "cor44", cuboid=potential.cuboid)
        else:  # cor42 / cor43
            group = bnd.bound_1d(
                frame, env, variant, coupling_c=cfg.coupling_c
            )
        for res in group.values():
            results[res.bound_id] = res
    return results


def _verdicts(
    results: dict[str, bnd.BoundResult],
    assign: dict[str, str],
    counts: dict[str, dict],
    bound_scale: float,
) -> list[dict]:
    verdicts = []
    for bid, res in results.items():
        window_name = assign.get(bid)
        if window_name is None or res.value is None:
            continue
        cnt = counts[window_name]
        scaled = bound_scale * res.value
        if res.ok:
            satisfied = cnt["filtered"] <= scaled
            slack = scaled - cnt["filtered"]
        else:
            satisfied = None
            slack = None
        verdicts.append({
            "bound_id": bid,
            "window_name": window_name,
            "window": cnt["window"],
            "count_raw": cnt["raw"],
            "count_filtered": cnt["filtered"],
            "value": res.value,
            "bound_scale": bound_scale,
            "scaled_value": scaled,
            "satisfied": satisfied,
            "slack": slack,
            "status": res.status,
        })
    return verdicts


def _auto_periodicity_radius(cfg: ExperimentConfig, nu: int) -> int:
    m = 2 * cfg.modes_half + 1
    budget = 800
    if cfg.half_line:
        r = budget // m
    else:
        r = ((budget // (m * nu)) - 1) // 2
    return max(4, min(cfg.radius, r))


def run_instance(
    cfg: ExperimentConfig,
    graph: PeriodicGraph,
    bands: BandStructure,
    omega: float,
    amplitude: float,
    index: int,
    with_bounds: bool = True,
) -> dict:
    """One full pipeline pass at a fixed frequency and amplitude."""
    potential = resolve_potential(cfg, omega, amplitude)
    frame = SpectralFrame(s_plus=bands.s_top, omega=potential.omega)
    env = sample_envelopes(potential, time_grid=cfg.time_grid)
    spec = TruncationSpec(radius=cfg.radius, half_line=cfg.half_line)

    record: dict = {
        "index": index,
        "omega": potential.omega,
        "amplitude": amplitude,
        "frame": frame.to_dict(),
        "envelopes": {
            "delta_plus": env.delta_plus,
            "delta_minus": env.delta_minus,
            "support_size": len(env.support),
            "u_max": max(env.u.values(), default=0.0),
        },
        "warnings": [],
    }
    dropped = _support_outside_box(potential, graph, spec)
    if dropped > 0:
        record["warnings"].append(
            f"potential support outside the box; dropped mass {dropped:.6g}"
        )

    results = _compute_bounds(cfg, frame, env, potential) if with_bounds else {}
    registry, assign = _collect_windows(
        frame, results, cfg.extra_windows, potential.omega
    )
    if not registry:
        # nothing requested: fall back to the natural windows of the frame
        for name in (("gap",) if frame.has_gap else ("band_window", "edge_window")):
            w = frame.window_by_name(name)
            if w is not None:
                registry[name] = w

    ladder = assemble_quasienergy(graph, potential, spec, cfg.modes_half)
    counts = _count_windows(
        ladder, registry, cfg.leak_tolerance, cfg.edge_guard
    )
    record["ladder_dim"] = ladder.dim
    record["windows"] = counts
    record["bounds"] = {bid: res.to_dict() for bid, res in results.items()}
    record["verdicts"] = _verdicts(results, assign, counts, cfg.bound_scale)

    ratios = {}
    for bid, res in results.items():
        window_name = assign.get(bid)
        norm_term = res.inputs.get("norm_term")
        if window_name is None or not norm_term:
            ratios[bid] = None
        else:
            ratios[bid] = counts[window_name]["filtered"] / norm_term
    record["empirical_ratios"] = ratios

    if cfg.convergence:
        checks = {}
        consistent = True
        for label, spec2, modes2 in (
            ("radius_doubled", spec.scaled(2), cfg.modes_half),
            ("modes_doubled", spec, 2 * cfg.modes_half),
        ):
            ladder2 = assemble_quasienergy(graph, potential, spec2, modes2)
            counts2 = _count_windows(
                ladder2, registry, cfg.leak_tolerance, cfg.edge_guard
            )
            deltas = {
                name: counts2[name]["filtered"] - counts[name]["filtered"]
                for name in registry
            }
            checks[label] = {
                "filtered": {n: counts2[n]["filtered"] for n in registry},
                "deltas": deltas,
            }
            if any(d != 0 for d in deltas.values()):
                consistent = False
        record["convergence"] = {"converged": consistent, **checks}
    else:
        record["convergence"] = None

    if cfg.periodicity_enabled and cfg.modes_half >= potential.max_harmonic + 2:
        r_p = cfg.periodicity_radius or _auto_periodicity_radius(cfg, graph.nu)
        spec_p = TruncationSpec(radius=r_p, half_line=cfg.half_line)
        peri = periodicity_check(
            graph, potential, spec_p, cfg.modes_half,
            interior_margin=cfg.periodicity_margin,
            leak_tolerance=cfg.periodicity_leak_tol,
        )
        pd = peri.to_dict()
        pd["radius"] = r_p
        record["periodicity"] = pd
    else:
        record["periodicity"] = None

    if cfg.mode_support_enabled and potential.cuboid is not None:
        reports = []
        for name in ("edge_window", "band_window"):
            cnt = counts.get(name)
            if not cnt or cnt["raw"] == 0:
                continue
            lo_g, hi_g = cnt["guarded"]
            vals, vecs = eigenpairs_in_window(
                ladder, lo_g, hi_g, expected=cnt["raw"]
            )
            for i in range(vals.shape[0]):
                if ladder.leak(vecs[:, i]) >= cfg.leak_tolerance:
                    continue
                rep = mode_support_check(
                    ladder, float(vals[i]), vecs[:, i], frame,
                    cuboid=potential.cuboid,
                    tolerance=cfg.mode_support_tolerance,
                )
                reports.append(rep.to_dict())
        record["mode_support"] = reports
    else:
        record["mode_support"] = None

    return record


def _summarize(instances: list[dict]) -> dict:
    violations = []
    unconverged = 0
    errors = 0
    max_dev = None
    for rec in instances:
        if "error" in rec:
            errors += 1
            continue
        conv = rec.get("convergence")
        converged = conv["converged"] if conv else None
        if converged is False:
            unconverged += 1
        peri = rec.get("periodicity")
        if peri and peri.get("max_deviation") is not None:
            dev = peri["max_deviation"]
            max_dev = dev if max_dev is None else max(max_dev, dev)
        for v in rec.get("verdicts", ()):
            if v["satisfied"] is False and converged is not False:
                violations.append({
                    "index": rec["index"],
                    "bound_id": v["bound_id"],
                    "window_name": v["window_name"],
                    "count_filtered": v["count_filtered"],
                    "scaled_value": v["scaled_value"],
                })
    return {
        "n_instances": len(instances),
        "n_errors": errors,
        "n_unconverged": unconverged,
        "n_violations": len(violations),
        "violations": violations,
        "max_periodicity_deviation": max_dev,
    }


def run_verify(cfg: ExperimentConfig, with_bounds: bool = True) -> dict:
    graph = resolve_graph(cfg)
    bands = band_structure(graph, cfg.band_grid)
    omega = cfg.omega
    if omega is None:
        probe = resolve_potential(cfg, None, 1.0)
        omega = probe.omega
    instance = run_instance(
        cfg, graph, bands, omega, cfg.amplitude, index=0,
        with_bounds=with_bounds,
    )
    report = _base_report("verify" if with_bounds else "count", cfg)
    report["s_top"] = bands.s_top
    report["instances"] = [instance]
    report["summary"] = _summarize(report["instances"])
    return report


def run_sweep(cfg: ExperimentConfig, workers: int | None = None) -> dict:
    graph = resolve_graph(cfg)
    bands = band_structure(graph, cfg.band_grid)
    axes = list(itertools.product(cfg.sweep_omega, cfg.sweep_amplitude))
    n_workers = _resolve_workers(cfg, workers)

    def safe(task):
        index, (omega, amplitude) = task
        try:
            return run_instance(cfg, graph, bands, omega, amplitude, index)
        except QuasibandError as exc:
            return {
                "index": index, "omega": omega, "amplitude": amplitude,
                "error": str(exc),
            }

    tasks = list(enumerate(axes))
    if n_workers == 1:
        instances = [safe(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            instances = list(pool.map(safe, tasks))
    instances.sort(key=lambda rec: rec["index"])
    report = _base_report("sweep", cfg)
    report["s_top"] = bands.s_top
    report["axes"] = {
        "omega": list(cfg.sweep_omega),
        "amplitude": list(cfg.sweep_amplitude),
    }
    report["workers"] = n_workers
    report["instances"] = instances
    report["summary"] = _summarize(instances)
    return report


# ---------------------------------------------------------------------------
# half-line random counting suite

def run_bargmann(cfg: ExperimentConfig) -> dict:
    sec = cfg.bargmann
    n_instances = int(sec.get("instances", 200))
    radius = int(sec.get("radius", 3000))
    max_site = int(sec.get("max_site", 30))
    amp_lo, amp_hi = (float(x) for x in sec.get("amplitude_range", (-3.0, 3.0)))
    mu_below = float(sec.get("mu_below", -1e-6))
    mu_above = 4.0 + float(sec.get("mu_above_offset", 1e-6))
    seed = int(sec.get("seed", cfg.seed))

    graph = build_hypercubic(1)
    spec = TruncationSpec(radius=radius, half_line=True)
    rng = np.random.default_rng(seed)
    records = []
    n_viol = 0
    for i in range(n_instances):
        k = int(rng.integers(1, max_site + 1))
        sites = np.sort(rng.choice(np.arange(1, max_site + 1), size=k,
                                   replace=False))
        vals = rng.uniform(amp_lo, amp_hi, size=k)
        q = {int(n): float(v) for n, v in zip(sites, vals)}
        op = assemble_static(graph, spec, q)
        below = count_below(op, mu_below)
        above = count_above(op, mu_above)
        bound_total = bnd.bargmann_norm(q)
        bound_minus = bnd.bargmann_norm(
            {n: max(-v, 0.0) for n, v in q.items()}
        )
        bound_plus = bnd.bargmann_norm(
            {n: max(v, 0.0) for n, v in q.items()}
        )
        ok = (
            below + above <= bound_total
            and below <= bound_minus
            and above <= bound_plus
        )
        if not ok:
            n_viol += 1
        records.append({
            "index": i,
            "support": [int(n) for n in sites],
            "values": [float(v) for v in vals],
            "count_below": below,
            "count_above": above,
            "count_total": below + above,
            "bound_minus": bound_minus,
            "bound_plus": bound_plus,
            "bound_total": bound_total,
            "ok": ok,
        })
    report = _base_report("bargmann", cfg)
    report["parameters"] = {
        "instances": n_instances, "radius": radius, "max_site": max_site,
        "amplitude_range": [amp_lo, amp_hi], "mu_below": mu_below,
        "mu_above": mu_above, "seed": seed,
    }
    report["notes"] = [
        "counts are eigenvalues of the Dirichlet box truncation outside "
        f"[{mu_below:.6g}, {mu_above:.6g}], the undriven half-line operator's "
        "spectrum being [0, 4]",
        "Dirichlet truncation can only undercount spectrum outside [0, 4] "
        "(min-max over zero-extended test vectors), so each truncated-count "
        "inequality is implied by the untruncated one; a pass here is "
        "conservative",
        "an alternative normalization counts outside [-2, 2] for the "
        "diagonal-shifted operator; this suite counts outside [0, 4] for "
        "the operator as assembled",
    ]
    report["instances"] = records
    report["summary"] = {
        "n_instances": n_instances,
        "n_violations": n_viol,
        "violations": [r["index"] for r in records if not r["ok"]],
        "max_count": max((r["count_total"] for r in records), default=0),
    }
    return report


# ---------------------------------------------------------------------------
# empirical counting-constant calibration

def run_calibrate(cfg: ExperimentConfig) -> dict:
    sec = cfg.calibrate
    dim = int(sec.get("dim", 3))
    radii = [int(r) for r in sec.get("radii", (8, 12))]
    wells = [float(w) for w in sec.get("wells", (-2.0, -5.0, -10.0))]
    sign = sec.get("sign", "minus")
    if sign not in ("minus", "plus"):
        raise ConfigError(f"calibrate.sign must be 'minus' or 'plus', got {sign!r}")
    mu = float(sec.get("mu", -1e-6 if sign == "minus" else 4.0 * dim + 1e-6))
    p = float(sec.get("p", dim / 2.0))
    if sign == "minus" and mu >= 0:
        raise ConfigError(f"calibrate.mu must be negative for sign='minus', got {mu}")
    if sign == "plus" and mu <= 4.0 * dim:
        raise ConfigError(
            f"calibrate.mu must exceed the spectrum top {4.0 * dim} for "
            f"sign='plus', got {mu}"
        )
    if not radii or not wells:
        raise ConfigError("calibrate needs nonempty radii and wells")

    graph = build_hypercubic(dim)
    origin = (0,) * dim
    records = []
    per_radius: dict[str, float] = {}
    any_count = False
    for radius in radii:
        spec = TruncationSpec(radius=radius)
        best = 0.0
        for well in wells:
            op = assemble_static(graph, spec, {origin: well})
            if sign == "minus":
                count = count_below(op, mu)
                denom = max(-(well - mu), 0.0) ** p
            else:
                count = count_above(op, mu)
                denom = max(well - mu, 0.0) ** p
            ratio = count / denom if denom > 0 else None
            if count > 0:
                any_count = True
            if ratio is not None:
                best = max(best, ratio)
            records.append({
                "radius": radius, "well": well, "mu": mu, "p": p,
                "count": count, "denominator": denom, "ratio": ratio,
            })
        per_radius[str(radius)] = best

    values = list(per_radius.values())
    if not any_count:
        stable = None
        note = "no instance produced a nonzero count; calibration carries no information"
    else:
        vmax = max(values)
        vmin = min(values)
        stable = vmax > 0 and (vmax - vmin) <= 0.05 * vmax
        note = ""
    report = _base_report("calibrate", cfg)
    report["parameters"] = {
        "dim": dim, "radii": radii, "wells": wells, "mu": mu, "p": p,
        "sign": sign,
    }
    report["records"] = records
    report["summary"] = {
        "per_radius": per_radius,
        "empirical_ratio": max(values) if values else 0.0,
        "stable_5pct": stable,
        "note": note,
    }
    return report


# ---------------------------------------------------------------------------
# band structure survey

def run_bands(cfg: ExperimentConfig) -> dict:
    sec = cfg.bands
    names = sec.get("graphs", [])
    if not names:
        raise ConfigError("bands mode needs bands.graphs")
    grid = sec.get("grid")
    entries = []
    for name in names:
        if name in _BUILTIN_GRAPHS:
            graph = _BUILTIN_GRAPHS[name]()
        else:
            graph = load_graph(name)
        entries.append(bands_entry(name, graph, grid))
    report = _base_report("bands", cfg)
    report["entries"] = entries
    return report


def bands_entry(name: str, graph: PeriodicGraph, grid: int | None) -> dict:
    bs = band_structure(graph, grid)
    reg = top_regularity_diagnostic(bs)
    return {
        "graph": name,
        "dim": graph.dim,
        "n_vertices": graph.nu,
        "grid": list(bs.grid),
        "s_top": bs.s_top,
        "band_intervals": [list(iv) for iv in bs.band_intervals],
        "flat": list(bs.flat),
        "regular_top": reg.regular,
        "diagnostic": reg.diagnostic,
        "n_maximizers": len(reg.maximizers),
        "neg_hessian_eigs": [list(e) for e in reg.neg_hessian_eigs],
    }


def write_outputs(report: dict, cfg: ExperimentConfig,
                  json_override=None, csv_override=None) -> list[str]:
    written = []
    jpath = json_override or cfg.output_json
    cpath = csv_override or cfg.output_csv
    if jpath:
        write_report_json(report, jpath)
        written.append(str(jpath))
    if cpath:
        write_report_csv(report, cpath)
        written.append(str(cpath))
    return written
