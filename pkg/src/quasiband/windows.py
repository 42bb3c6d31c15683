"""Spectral windows and the frequency-vs-bandwidth frame.

All counting in this package is over half-open windows (lo, hi].  Endpoint
ties are resolved by epsilon guards in the counting layer, never here.

The frame captures the arithmetic relating a driving frequency omega to the
static spectrum top s_plus: the gap width s_gamma = omega - s_plus (positive
only in the high-frequency regime), the number of whole periods rho the
static spectrum folds over, and the distance s_e from the folded spectrum
edge to zero.  Window factories hand out the canonical subwindows of the
fundamental interval (-omega, 0].
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class SpectralWindow:
    """Half-open interval (lo, hi] with an optional display name."""

    lo: float
    hi: float
    name: str = ""

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"window ({self.lo}, {self.hi}] is inverted")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo < x <= self.hi

    def as_tuple(self) -> tuple[float, float]:
        return (self.lo, self.hi)


def as_window(w) -> SpectralWindow:
    """Coerce a SpectralWindow or a (lo, hi) pair."""
    if isinstance(w, SpectralWindow):
        return w
    lo, hi = w
    return SpectralWindow(float(lo), float(hi))


@dataclass(frozen=True)
class SpectralFrame:
    """Derived quantities tying omega to the static spectrum top.

    Attributes
    ----------
    s_plus : float
        Top of the static spectrum, >= 0.
    omega : float
        Driving angular frequency, > 0.

    Derived: s_gamma = omega - s_plus (gap width; may be <= 0),
    rho = floor(s_plus / omega), s_e = (rho + 1) * omega - s_plus, which
    always lies in (0, omega].  When omega > s_plus one has rho = 0 and
    s_e = s_gamma.
    """

    s_plus: float
    omega: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.s_plus < 0:
            raise ValueError(f"s_plus must be >= 0, got {self.s_plus}")

    @property
    def s_gamma(self) -> float:
        return self.omega - self.s_plus

    @property
    def rho(self) -> int:
        return int(math.floor(self.s_plus / self.omega))

    @property
    def s_e(self) -> float:
        return (self.rho + 1) * self.omega - self.s_plus

    @property
    def has_gap(self) -> bool:
        return self.omega > self.s_plus

    # -- canonical windows inside the fundamental interval (-omega, 0] --

    def fundamental(self) -> SpectralWindow:
        return SpectralWindow(-self.omega, 0.0, "fundamental")

    def gap(self) -> SpectralWindow | None:
        """Whole gap (-s_gamma, 0]; None when the spectrum fills the period."""
        if not self.has_gap:
            return None
        return SpectralWindow(-self.s_gamma, 0.0, "gap")

    def gap_minus(self) -> SpectralWindow | None:
        """Upper half of the gap, paired with the v_minus envelope."""
        if not self.has_gap:
            return None
        return SpectralWindow(-self.s_gamma / 2.0, 0.0, "gap_minus")

    def gap_plus(self) -> SpectralWindow | None:
        """Lower half of the gap, paired with the v_plus envelope."""
        if not self.has_gap:
            return None
        return SpectralWindow(-self.s_gamma, -self.s_gamma / 2.0, "gap_plus")

    def edge_window(self) -> SpectralWindow:
        """(-s_e, 0]: between the folded spectrum edge and zero."""
        return SpectralWindow(-self.s_e, 0.0, "edge_window")

    def band_window(self) -> SpectralWindow:
        """(-omega, -s_e]: the rest of the fundamental interval."""
        return SpectralWindow(-self.omega, -self.s_e, "band_window")

    def window_by_name(self, name: str) -> SpectralWindow | None:
        factories = {
            "fundamental": self.fundamental,
            "gap": self.gap,
            "gap_minus": self.gap_minus,
            "gap_plus": self.gap_plus,
            "edge_window": self.edge_window,
            "band_window": self.band_window,
        }
        if name not in factories:
            raise ValueError(f"unknown window name {name!r}")
        return factories[name]()

    def to_dict(self) -> dict:
        return {
            "s_plus": self.s_plus,
            "omega": self.omega,
            "s_gamma": self.s_gamma,
            "rho": self.rho,
            "s_e": self.s_e,
            "has_gap": self.has_gap,
        }
