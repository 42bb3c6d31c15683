"""Closed-form eigenvalue-count bounds driven by envelope profiles.

Every bound here consumes a spectral frame (omega vs the static spectrum
top) and envelope profiles (u, v_plus, v_minus) and produces BoundResult
records: a numeric value, the window it counts on, echoed inputs, and a list
of precondition checks.  Preconditions are recorded, never silently
enforced; a failed check leaves the value computed (where it is computable)
and marks the result as not usable for verdicts.

Strict inequalities among the preconditions are decided in exact rational
arithmetic on the binary values of the inputs (every float is a rational);
conditions involving square roots are squared first, so no floating-point
tolerance enters the verdicts.  The reported margins are floats for display
only.

Two norms appear: the p-th power sum of an envelope profile, and a weighted
first-moment sum over half-line sites (site index times magnitude).  The
`weighted` switch on each bound selects the latter with unit constants,
which is the one-dimensional specialization used by the cor42/cor43/cor44
variants.

The unknown counting constants enter as user parameters cks_minus/cks_plus;
nothing here claims values for them.  The calibrate harness estimates
empirical ratios, which is a different and clearly labeled quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .windows import SpectralFrame, SpectralWindow


@dataclass(frozen=True)
class PreconditionCheck:
    name: str
    satisfied: bool
    margin: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "satisfied": self.satisfied,
            "margin": self.margin,
            "note": self.note,
        }


@dataclass(frozen=True)
class BoundResult:
    """One bound value with its window, inputs, and precondition record."""

    bound_id: str
    value: float | None
    window: tuple[float, float] | None
    preconditions: tuple[PreconditionCheck, ...]
    inputs: dict
    notes: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.value is not None and all(
            c.satisfied for c in self.preconditions
        )

    @property
    def status(self) -> str:
        if self.value is None:
            return "not-applicable"
        if not all(c.satisfied for c in self.preconditions):
            return "preconditions-failed"
        return "ok"

    def to_dict(self) -> dict:
        return {
            "bound_id": self.bound_id,
            "value": self.value,
            "window": list(self.window) if self.window else None,
            "status": self.status,
            "preconditions": [c.to_dict() for c in self.preconditions],
            "inputs": self.inputs,
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# norms and effective profiles

def lp_power_norm(q: Mapping, p: float) -> float:
    """Sum of |q_x|^p over the support."""
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    return float(sum(abs(v) ** p for v in q.values()))


def sup_norm(q: Mapping) -> float:
    return float(max((abs(v) for v in q.values()), default=0.0))


def _site_integer(key) -> int:
    if isinstance(key, int):
        n = key
    elif isinstance(key, tuple) and len(key) == 1:
        n = int(key[0])
    elif (
        isinstance(key, tuple)
        and len(key) == 2
        and isinstance(key[0], tuple)
        and len(key[0]) == 1
    ):
        n = int(key[0][0])
    else:
        raise ValueError(
            f"weighted norm needs integer half-line site keys, got {key!r}"
        )
    if n < 1:
        raise ValueError(f"weighted norm needs sites n >= 1, got {n}")
    return n


def bargmann_norm(q: Mapping) -> float:
    """Weighted first-moment norm sum_n n |q_n| over half-line sites."""
    return float(sum(_site_integer(k) * abs(v) for k, v in q.items()))


@dataclass(frozen=True)
class EffectivePotentials:
    """Static comparison profiles q_pm = coupling * u^2 + v_pm."""

    plus: dict
    minus: dict
    coupling: float


def effective_potentials(env, coupling: float) -> EffectivePotentials:
    keys = set(env.u) | set(env.v_plus) | set(env.v_minus)
    plus = {}
    minus = {}
    for x in keys:
        base = coupling * env.u.get(x, 0.0) ** 2
        plus[x] = base + env.v_plus.get(x, 0.0)
        minus[x] = base + env.v_minus.get(x, 0.0)
    return EffectivePotentials(plus=plus, minus=minus, coupling=coupling)


def _norm(q: Mapping, p: float, weighted: bool) -> float:
    return bargmann_norm(q) if weighted else lp_power_norm(q, p)


# ---------------------------------------------------------------------------
# precondition checks (exact rational comparisons)

def _check_gap(omega: float, s_plus: float) -> PreconditionCheck:
    ok = Fraction(omega) > Fraction(s_plus)
    return PreconditionCheck("gap_exists", bool(ok), omega - s_plus)


def _check_coupling(c: float, omega: float, s_gamma: float) -> PreconditionCheck:
    # c > 4 omega / s_gamma^2, decided as c s_gamma^2 > 4 omega
    if s_gamma <= 0:
        return PreconditionCheck(
            "coupling_large_enough", False, -math.inf, "no gap"
        )
    ok = Fraction(c) * Fraction(s_gamma) ** 2 > 4 * Fraction(omega)
    margin = c - 4.0 * omega / s_gamma**2
    return PreconditionCheck("coupling_large_enough", bool(ok), margin)


def _check_product(name: str, delta: float, c: float) -> PreconditionCheck:
    # delta * c <= sqrt(3), decided as (delta c)^2 <= 3 for nonnegative input
    lhs = Fraction(delta) * Fraction(c)
    ok = lhs >= 0 and lhs * lhs <= 3
    return PreconditionCheck(name, bool(ok), math.sqrt(3.0) - delta * c)


def _check_frequency(
    name: str, omega: float, s_plus: float, delta: float
) -> PreconditionCheck:
    # omega >= s_plus + delta + sqrt(delta (2 s_plus + delta))
    head = Fraction(omega) - Fraction(s_plus) - Fraction(delta)
    rad = Fraction(delta) * (2 * Fraction(s_plus) + Fraction(delta))
    ok = head >= 0 and head * head >= rad
    margin = (omega - s_plus - delta) - math.sqrt(max(float(rad), 0.0))
    return PreconditionCheck(name, bool(ok), margin)


def _check_small_delta(
    name: str, delta: float, s_gamma: float
) -> PreconditionCheck:
    ok = 2 * Fraction(delta) < Fraction(s_gamma)
    return PreconditionCheck(name, bool(ok), s_gamma / 2.0 - delta)


def _check_support_declared(cuboid) -> PreconditionCheck:
    return PreconditionCheck(
        "support_cuboid_declared",
        cuboid is not None,
        None,
        "" if cuboid is not None else "band/edge bounds need a declared cuboid",
    )


# ---------------------------------------------------------------------------
# gap bounds

def bound_T1(
    frame: SpectralFrame,
    env,
    cks_minus: float = 1.0,
    cks_plus: float = 1.0,
    p: float = 1.0,
    weighted: bool = False,
) -> dict[str, BoundResult]:
    """Gap-window bounds: halves of the gap plus their sum.

    The minus/plus labels pair each half-window with the envelope sign that
    controls it: the upper half (touching zero) with v_minus, the lower half
    with v_plus.  Values scale linearly in the respective counting constant.
    """
    omega = frame.omega
    s_gamma = frame.s_gamma
    pre = (_check_gap(omega, frame.s_plus),)
    zero = env.is_zero()

    if not frame.has_gap:
        value_m = value_p = 0.0 if zero else math.inf
        coupling = None
        q = EffectivePotentials({}, {}, 0.0)
        norm_m = norm_p = sup_m = sup_p = 0.0
        win_m = win_p = win_t = None
    else:
        coupling = 16.0 * omega / s_gamma**2
        q = effective_potentials(env, coupling)
        norm_m = _norm(q.minus, p, weighted)
        norm_p = _norm(q.plus, p, weighted)
        sup_m = sup_norm(q.minus)
        sup_p = sup_norm(q.plus)
        lead = 9.0 * omega / s_gamma
        value_m = lead * cks_minus * (1.0 + 2.0 * sup_m / omega) * norm_m
        value_p = lead * cks_plus * (1.0 + 2.0 * sup_p / omega) * norm_p
        win_m = frame.gap_minus().as_tuple()
        win_p = frame.gap_plus().as_tuple()
        win_t = frame.gap().as_tuple()

    def inputs(sign: str, norm: float, sup: float, cks: float) -> dict:
        return {
            "omega": omega,
            "s_plus": frame.s_plus,
            "s_gamma": s_gamma,
            "coupling": coupling,
            "cks": cks,
            "weighted": weighted,
            "p": None if weighted else p,
            "envelope_sign": sign,
            "norm_term": norm,
            "sup_term": sup,
        }

    return {
        "minus": BoundResult(
            "T1.minus", value_m, win_m, pre, inputs("minus", norm_m, sup_m, cks_minus)
        ),
        "plus": BoundResult(
            "T1.plus", value_p, win_p, pre, inputs("plus", norm_p, sup_p, cks_plus)
        ),
        "total": BoundResult(
            "T1.total",
            value_m + value_p,
            win_t,
            pre,
            {
                "omega": omega,
                "s_plus": frame.s_plus,
                "s_gamma": s_gamma,
                "coupling": coupling,
                "weighted": weighted,
                "p": None if weighted else p,
                "norm_term": norm_m + norm_p,
            },
            notes=("sum of the minus and plus half-window bounds",),
        ),
    }


def bound_T2(
    frame: SpectralFrame,
    env,
    coupling_c: float,
    cks_minus: float = 1.0,
    cks_plus: float = 1.0,
    p: float = 1.0,
    weighted: bool = False,
) -> dict[str, BoundResult]:
    """Sharper gap bounds with a user-chosen coupling constant.

    Valid only under recorded smallness/frequency conditions; the windows
    shrink to a strip of width delta_minus at each gap end.  All conditions
    are recorded as precondition checks, never enforced.
    """
    if coupling_c is None or coupling_c <= 0:
        raise ValueError(f"coupling_c must be positive, got {coupling_c}")
    omega = frame.omega
    s_gamma = frame.s_gamma
    dp, dm = env.delta_plus, env.delta_minus
    q = effective_potentials(env, coupling_c)
    norm_m = _norm(q.minus, p, weighted)
    norm_p = _norm(q.plus, p, weighted)
    value_m = cks_minus * norm_m
    value_p = cks_plus * norm_p

    gap = _check_gap(omega, frame.s_plus)
    coupling_ok = _check_coupling(coupling_c, omega, s_gamma)
    pre_minus = (
        gap,
        coupling_ok,
        _check_product("envelope_plus_times_coupling", dp, coupling_c),
        _check_frequency("frequency_vs_envelope_minus", omega, frame.s_plus, dm),
        _check_small_delta("delta_minus_below_half_gap", dm, s_gamma),
    )
    pre_plus = (
        gap,
        coupling_ok,
        _check_product("envelope_minus_times_coupling", dm, coupling_c),
        _check_frequency("frequency_vs_envelope_plus", omega, frame.s_plus, dp),
        _check_small_delta("delta_plus_below_half_gap", dp, s_gamma),
    )
    pre_total = tuple(
        sorted(set(pre_minus) | set(pre_plus), key=lambda c: c.name)
    )

    win_m = (-dm, 0.0) if frame.has_gap else None
    win_p = (-s_gamma, dm - s_gamma) if frame.has_gap else None
    win_t = frame.gap().as_tuple() if frame.has_gap else None

    def inputs(sign, norm, cks):
        return {
            "omega": omega,
            "s_plus": frame.s_plus,
            "s_gamma": s_gamma,
            "coupling": coupling_c,
            "cks": cks,
            "weighted": weighted,
            "p": None if weighted else p,
            "envelope_sign": sign,
            "norm_term": norm,
            "delta_plus": dp,
            "delta_minus": dm,
        }

    notes_minus = (
        "window recorded as (-delta_minus, 0]; the mirrored literal reading "
        "[delta_minus, 0) is echoed in inputs as window_minus_literal",
    )
    in_m = inputs("minus", norm_m, cks_minus)
    in_m["window_minus_literal"] = [dm, 0.0]
    return {
        "minus": BoundResult(
            "T2.minus", value_m, win_m, pre_minus, in_m, notes=notes_minus
        ),
        "plus": BoundResult(
            "T2.plus", value_p, win_p, pre_plus, inputs("plus", norm_p, cks_plus)
        ),
        "total": BoundResult(
            "T2.total",
            value_m + value_p,
            win_t,
            pre_total,
            inputs("both", norm_m + norm_p, None),
            notes=("sum of the minus and plus strip bounds",),
        ),
    }


# ---------------------------------------------------------------------------
# band / edge bounds (low-frequency regime)

def bound_T3(
    frame: SpectralFrame,
    env,
    cks_minus: float = 1.0,
    cks_plus: float = 1.0,
    p: float = 1.0,
    cuboid: tuple[int, ...] | None = None,
    weighted: bool = False,
    edge_coupling_rule: str = "rho_plus_1",
) -> dict[str, BoundResult]:
    """Band-window and edge-window bounds for any frequency.

    Needs the potential's support declared as a cuboid (raises otherwise).
    Both sign branches of the band bound are emitted; the minus branch is
    the proven one and verdicts downstream treat each branch separately.
    The edge bound exists only when the folded spectrum wraps at least once
    (rho >= 1); at rho = 0 it degenerates to the gap bounds and is returned
    as not-applicable.

    edge_coupling_rule selects the coupling in the edge profiles:
    "rho_plus_1" uses 16 omega (rho+1)/s_e^2, "four_gamma_b" uses four times
    the band coupling (the rule the half-line cor44 variant is built on).
    """
    if cuboid is None:
        raise ValueError(
            "band/edge bounds require the potential support cuboid"
        )
    if edge_coupling_rule not in ("rho_plus_1", "four_gamma_b"):
        raise ValueError(f"unknown edge_coupling_rule {edge_coupling_rule!r}")
    omega = frame.omega
    rho = frame.rho
    s_e = frame.s_e
    gamma_b = 4.0 * omega * (rho + 2) / s_e**2
    if edge_coupling_rule == "rho_plus_1":
        gamma_e = 16.0 * omega * (rho + 1) / s_e**2
    else:
        gamma_e = 4.0 * gamma_b
    c_b = 1.0 + 4.0 * omega * (omega - s_e) * (rho + 2) / s_e**2

    qb = effective_potentials(env, gamma_b)
    norm_bm = _norm(qb.minus, p, weighted)
    norm_bp = _norm(qb.plus, p, weighted)
    sup_bm = sup_norm(qb.minus)
    sup_bp = sup_norm(qb.plus)
    band_m = c_b * (rho + 2 + 2.0 * sup_bm / omega) * cks_minus * norm_bm
    band_p = c_b * (rho + 2 + 2.0 * sup_bp / omega) * cks_plus * norm_bp

    pre = (_check_support_declared(cuboid),)
    win_band = frame.band_window().as_tuple()

    def binputs(sign, norm, sup, cks):
        return {
            "omega": omega,
            "s_plus": frame.s_plus,
            "rho": rho,
            "s_e": s_e,
            "coupling": gamma_b,
            "prefactor": c_b,
            "cks": cks,
            "weighted": weighted,
            "p": None if weighted else p,
            "envelope_sign": sign,
            "norm_term": norm,
            "sup_term": sup,
        }

    results = {
        "band_minus": BoundResult(
            "T3.band.minus",
            band_m,
            win_band,
            pre,
            binputs("minus", norm_bm, sup_bm, cks_minus),
            notes=("proven sign branch",),
        ),
        "band_plus": BoundResult(
            "T3.band.plus",
            band_p,
            win_band,
            pre,
            binputs("plus", norm_bp, sup_bp, cks_plus),
            notes=("mirror sign branch, emitted for comparison",),
        ),
    }

    if rho < 1:
        results["edge"] = BoundResult(
            "T3.edge",
            None,
            frame.edge_window().as_tuple(),
            pre + (PreconditionCheck(
                "folded_edge_exists", False, float(rho - 1),
                "edge window separates from the gap only when rho >= 1",
            ),),
            {"omega": omega, "rho": rho, "s_e": s_e},
            notes=("use the gap bounds when the spectrum does not fold",),
        )
        return results

    qe = effective_potentials(env, gamma_e)
    norm_em = _norm(qe.minus, p, weighted)
    norm_ep = _norm(qe.plus, p, weighted)
    sup_em = sup_norm(qe.minus)
    sup_ep = sup_norm(qe.plus)
    c_e = 1.0 + 8.0 * omega * (rho + 1) / s_e
    edge_val = c_e * (
        cks_plus * (rho + 1 + 2.0 * sup_ep / omega) * norm_ep
        + cks_minus * (rho + 1 + 2.0 * sup_em / omega) * norm_em
    )
    results["edge"] = BoundResult(
        "T3.edge",
        edge_val,
        frame.edge_window().as_tuple(),
        pre + (PreconditionCheck("folded_edge_exists", True, float(rho - 1)),),
        {
            "omega": omega,
            "s_plus": frame.s_plus,
            "rho": rho,
            "s_e": s_e,
            "coupling": gamma_e,
            "coupling_rule": edge_coupling_rule,
            "prefactor": c_e,
            "cks_minus": cks_minus,
            "cks_plus": cks_plus,
            "weighted": weighted,
            "p": None if weighted else p,
            "norm_term": norm_em + norm_ep,
            "norm_term_minus": norm_em,
            "norm_term_plus": norm_ep,
        },
    )
    return results


# ---------------------------------------------------------------------------
# one-dimensional specializations (half-line chain, weighted norm)

_HALF_LINE_TOP = 4.0


def _halfline_check(frame: SpectralFrame) -> PreconditionCheck:
    dev = abs(frame.s_plus - _HALF_LINE_TOP)
    return PreconditionCheck(
        "half_line_spectrum_top",
        dev <= 1e-6,
        1e-6 - dev,
        "one-dimensional variants assume the chain spectrum [0, 4]",
    )


def _rewrap(result: BoundResult, bound_id: str, extra: PreconditionCheck) -> BoundResult:
    return BoundResult(
        bound_id=bound_id,
        value=result.value,
        window=result.window,
        preconditions=result.preconditions + (extra,),
        inputs=result.inputs,
        notes=result.notes,
    )


def bound_1d(
    frame: SpectralFrame,
    env,
    variant: str,
    coupling_c: float | None = None,
    cuboid: tuple[int, ...] | None = None,
) -> dict[str, BoundResult]:
    """Half-line variants with unit constants and the weighted norm.

    cor42 is the gap bound chain verbatim (same arithmetic, unit constants,
    weighted norm); cor43 the strip bounds, needing coupling_c; cor44 the
    band/edge bounds with the edge coupling tied to four times the band
    coupling, needing the support cuboid.
    """
    hl = _halfline_check(frame)
    if variant == "cor42":
        base = bound_T1(frame, env, 1.0, 1.0, p=1.0, weighted=True)
        return {
            key: _rewrap(res, f"cor42.{key}", hl) for key, res in base.items()
        }
    if variant == "cor43":
        if coupling_c is None:
            raise ValueError("cor43 needs coupling_c")
        base = bound_T2(frame, env, coupling_c, 1.0, 1.0, p=1.0, weighted=True)
        return {
            key: _rewrap(res, f"cor43.{key}", hl) for key, res in base.items()
        }
    if variant == "cor44":
        base = bound_T3(
            frame,
            env,
            1.0,
            1.0,
            p=1.0,
            cuboid=cuboid,
            weighted=True,
            edge_coupling_rule="four_gamma_b",
        )
        out = {}
        for key, res in base.items():
            mapped = f"cor44.{key.replace('_', '.')}" if "_" in key else f"cor44.{key}"
            out[key] = _rewrap(res, mapped, hl)
        return out
    raise ValueError(f"unknown one-dimensional variant {variant!r}")
