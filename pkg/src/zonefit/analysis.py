"""Gray-zone bands and the ratio analyses built on them.

Bands are 0.25 ft strips along each edge of the rule-book zone; band 1 lies
just inside the zone and band 2 just outside. In/Out are relative to the
batter: under this package's convention a right-handed batter stands on the
negative-x side, so their inside edge is at ``-x_half``. Left-handed batters
are mirrored (``x -> -x``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import beta as beta_dist
from scipy.stats import norm

from .data import (
    HANDS,
    HIT_ATTEMPTS,
    PITCH_TYPES,
    BatterHand,
    Dataset,
    FilterSpec,
    Outcome,
    PitchType,
    filter_dataset,
    outcome_code,
)
from .errors import EmptyCellError, InvalidCountsError, ZonefitError
from .fit import FitConfig, FitResult, fit
from .zone import KBO_ZONE, RulebookZone

BAND_WIDTH = 0.25


class ZoneBand(Enum):
    HIGH1 = "High1"
    HIGH2 = "High2"
    LOW1 = "Low1"
    LOW2 = "Low2"
    IN1 = "In1"
    IN2 = "In2"
    OUT1 = "Out1"
    OUT2 = "Out2"

    @property
    def inside(self) -> bool:
        return self.value.endswith("1")

    @property
    def side(self) -> str:
        return self.value[:-1]


SIDES = {
    "High": (ZoneBand.HIGH1, ZoneBand.HIGH2),
    "Low": (ZoneBand.LOW1, ZoneBand.LOW2),
    "In": (ZoneBand.IN1, ZoneBand.IN2),
    "Out": (ZoneBand.OUT1, ZoneBand.OUT2),
}


def classify_band(
    x: float, y: float, hand: BatterHand, z: RulebookZone = KBO_ZONE, w: float = BAND_WIDTH
) -> frozenset[ZoneBand]:
    """Bands containing the pitch at ``(x, y)``.

    A corner pitch can sit in one vertical and one horizontal band at once.
    """
    if not w > 0:
        raise ValueError("band width must be positive")
    if hand is BatterHand.LEFT:
        x = -x
    xh, lo, hi = z.x_half, z.y_low, z.y_high
    bands = set()
    if -xh < x < xh:
        if hi - w <= y < hi:
            bands.add(ZoneBand.HIGH1)
        if hi <= y < hi + w:
            bands.add(ZoneBand.HIGH2)
        if lo < y <= lo + w:
            bands.add(ZoneBand.LOW1)
        if lo - w < y <= lo:
            bands.add(ZoneBand.LOW2)
    if lo < y < hi:
        if -xh < x <= -xh + w:
            bands.add(ZoneBand.IN1)
        if -xh - w < x <= -xh:
            bands.add(ZoneBand.IN2)
        if xh - w <= x < xh:
            bands.add(ZoneBand.OUT1)
        if xh <= x < xh + w:
            bands.add(ZoneBand.OUT2)
    return frozenset(bands)


def band_mask(
    band: ZoneBand,
    x: np.ndarray,
    y: np.ndarray,
    is_left: np.ndarray,
    z: RulebookZone = KBO_ZONE,
    w: float = BAND_WIDTH,
) -> np.ndarray:
    """Vectorized membership test for one band."""
    x = np.where(is_left, -np.asarray(x, dtype=float), x)
    y = np.asarray(y, dtype=float)
    xh, lo, hi = z.x_half, z.y_low, z.y_high
    across = (x > -xh) & (x < xh)
    upright = (y > lo) & (y < hi)
    if band is ZoneBand.HIGH1:
        return across & (y >= hi - w) & (y < hi)
    if band is ZoneBand.HIGH2:
        return across & (y >= hi) & (y < hi + w)
    if band is ZoneBand.LOW1:
        return across & (y > lo) & (y <= lo + w)
    if band is ZoneBand.LOW2:
        return across & (y > lo - w) & (y <= lo)
    if band is ZoneBand.IN1:
        return upright & (x > -xh) & (x <= -xh + w)
    if band is ZoneBand.IN2:
        return upright & (x > -xh - w) & (x <= -xh)
    if band is ZoneBand.OUT1:
        return upright & (x >= xh - w) & (x < xh)
    return upright & (x >= xh) & (x < xh + w)


BandSelector = ZoneBand | Sequence[ZoneBand]


def _bands(selector: BandSelector) -> tuple[ZoneBand, ...]:
    return (selector,) if isinstance(selector, ZoneBand) else tuple(selector)


def band_label(selector: BandSelector) -> str:
    return "+".join(b.value for b in _bands(selector))


def dataset_band_mask(
    d: Dataset, selector: BandSelector, z: RulebookZone = KBO_ZONE, w: float = BAND_WIDTH
) -> np.ndarray:
    """Pitches in any of the selected bands (a pooled selector is a union)."""
    mask = np.zeros(d.row_count, dtype=bool)
    for band in _bands(selector):
        mask |= band_mask(band, d.x, d.y, d.is_left, z, w)
    return mask


# -- binomial inference ------------------------------------------------------------


def jeffreys_interval(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Equal-tailed interval of the Beta(k + 1/2, n - k + 1/2) posterior.

    The lower end is pinned to 0 when ``k == 0`` and the upper end to 1 when
    ``k == n``.
    """
    if n < 1 or not 0 <= k <= n:
        raise InvalidCountsError(f"need 0 <= k <= n and n >= 1, got k={k}, n={n}")
    tail = (1.0 - level) / 2.0
    a, b = k + 0.5, n - k + 0.5
    lo = 0.0 if k == 0 else float(beta_dist.ppf(tail, a, b))
    hi = 1.0 if k == n else float(beta_dist.isf(tail, a, b))
    return lo, hi


@dataclass(frozen=True)
class ZTest:
    z: float
    p_value: float
    degenerate: bool = False


def two_proportion_test(k1: int, n1: int, k2: int, n2: int) -> ZTest:
    """Pooled two-proportion z-test, two-sided.

    When the pooled proportion is 0 or 1 the statistic is undefined; the
    result is ``z=0, p=1`` with ``degenerate=True``.
    """
    if n1 < 1 or n2 < 1 or not (0 <= k1 <= n1 and 0 <= k2 <= n2):
        raise InvalidCountsError(f"invalid counts ({k1}/{n1}, {k2}/{n2})")
    pooled = (k1 + k2) / (n1 + n2)
    if pooled <= 0.0 or pooled >= 1.0:
        return ZTest(0.0, 1.0, degenerate=True)
    se = np.sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    z = (k1 / n1 - k2 / n2) / se
    return ZTest(float(z), float(2.0 * norm.sf(abs(z))))


# -- ratio reports -----------------------------------------------------------------------

GROUP_KEYS = ("season", "pitch_type", "batter_hand", "umpire_id")


@dataclass(frozen=True)
class RatioReport:
    band: ZoneBand | tuple[ZoneBand, ...]
    group_key: tuple[tuple[str, object], ...]
    n: int
    k: int
    ratio: float
    interval: tuple[float, float]

    @property
    def label(self) -> str:
        return band_label(self.band)

    def key(self, name: str):
        return dict(self.group_key)[name]


def _group_codes(d: Dataset, group_by: Sequence[str]) -> list[np.ndarray]:
    cols = []
    for name in group_by:
        if name not in GROUP_KEYS:
            raise ValueError(f"unknown group key {name!r}; choose from {GROUP_KEYS}")
        cols.append(getattr(d, name))
    return cols


def _key_value(name: str, raw):
    if name == "season":
        return int(raw)
    if name == "pitch_type":
        return PITCH_TYPES[int(raw)]
    if name == "batter_hand":
        return HANDS[int(raw)]
    return str(raw)


def _sort_token(value):
    return value.value if isinstance(value, Enum) else value


def _ratio_reports(
    d: Dataset,
    selector: BandSelector,
    group_by: Sequence[str],
    population: np.ndarray,
    success: np.ndarray,
) -> list[RatioReport]:
    group_by = tuple(group_by)
    cols = _group_codes(d, group_by)
    idx = np.flatnonzero(population)
    if idx.size == 0:
        return []
    if group_by:
        inverses = []
        uniques = []
        for col in cols:
            u, inv = np.unique(col[idx], return_inverse=True)
            uniques.append(u)
            inverses.append(inv.ravel())
        combo, cell = np.unique(np.column_stack(inverses), axis=0, return_inverse=True)
        cell = cell.ravel()
    else:
        combo = np.zeros((1, 0), dtype=int)
        uniques = []
        cell = np.zeros(idx.size, dtype=int)
    n = np.bincount(cell, minlength=len(combo))
    k = np.bincount(cell, weights=success[idx].astype(float), minlength=len(combo))
    band = selector if isinstance(selector, ZoneBand) else tuple(selector)
    reports = []
    for c, row in enumerate(combo):
        key = tuple(
            (name, _key_value(name, uniques[j][row[j]])) for j, name in enumerate(group_by)
        )
        kc, nc = int(round(k[c])), int(n[c])
        reports.append(RatioReport(band, key, nc, kc, kc / nc, jeffreys_interval(kc, nc)))
    reports.sort(key=lambda r: tuple(_sort_token(v) for _, v in r.group_key))
    return reports


def strike_ratio(
    d: Dataset,
    band: BandSelector,
    group_by: Sequence[str] = (),
    z: RulebookZone = KBO_ZONE,
    w: float = BAND_WIDTH,
) -> list[RatioReport]:
    """Called-strike share among called pitches in ``band``, per group cell.

    Cells without called pitches are omitted.
    """
    in_band = dataset_band_mask(d, band, z, w) & d.called_mask
    success = d.outcome == outcome_code(Outcome.CALLED_STRIKE)
    return _ratio_reports(d, band, group_by, in_band, success)


def hit_attempt_ratio(
    d: Dataset,
    band: BandSelector,
    group_by: Sequence[str] = (),
    z: RulebookZone = KBO_ZONE,
    w: float = BAND_WIDTH,
) -> list[RatioReport]:
    """Share of pitches in ``band`` the batter offered at (swing, foul, bunt, in play)."""
    in_band = dataset_band_mask(d, band, z, w)
    return _ratio_reports(d, band, group_by, in_band, d.outcome_mask(HIT_ATTEMPTS))


def season_significance(reports: Iterable[RatioReport]) -> list[dict]:
    """Pairwise z-tests between seasons within each (band, other keys) cell."""
    cells: dict[tuple, list[RatioReport]] = {}
    for r in reports:
        if "season" not in dict(r.group_key):
            raise ValueError("reports must be grouped by season")
        rest = tuple((k, v) for k, v in r.group_key if k != "season")
        cells.setdefault((r.label, rest), []).append(r)
    rows = []
    for (label, rest), group in cells.items():
        group = sorted(group, key=lambda r: r.key("season"))
        for a, b in itertools.combinations(group, 2):
            t = two_proportion_test(a.k, a.n, b.k, b.n)
            rows.append(
                {
                    "band": label,
                    "cell": rest,
                    "season_a": a.key("season"),
                    "season_b": b.key("season"),
                    "ratio_a": a.ratio,
                    "ratio_b": b.ratio,
                    "z": t.z,
                    "p_value": t.p_value,
                    "degenerate": t.degenerate,
                }
            )
    return rows


# -- decision-pitch mix ------------------------------------------------------------------


@dataclass(frozen=True)
class PitchMix:
    band: ZoneBand | tuple[ZoneBand, ...]
    n: int
    counts: dict[PitchType, int]
    frequencies: dict[PitchType, float]


DECISION_COUNT = (2, 2)


def decision_pitch_mix(
    d: Dataset, band: BandSelector, z: RulebookZone = KBO_ZONE, w: float = BAND_WIDTH
) -> PitchMix:
    """Pitch-type shares among 2-2 count pitches that reach ``band``."""
    two_two = filter_dataset(d, FilterSpec(count=DECISION_COUNT))
    mask = dataset_band_mask(two_two, band, z, w)
    n = int(mask.sum())
    if n == 0:
        raise EmptyCellError(f"no 2-2 pitches in {band_label(band)}")
    tally = np.bincount(two_two.pitch_type[mask], minlength=len(PITCH_TYPES))
    counts = {t: int(tally[i]) for i, t in enumerate(PITCH_TYPES)}
    frequencies = {t: c / n for t, c in counts.items()}
    selector = band if isinstance(band, ZoneBand) else tuple(band)
    return PitchMix(selector, n, counts, frequencies)


# -- per-umpire fits ---------------------------------------------------------------------


@dataclass
class UmpireFits:
    fits: dict[tuple[str, int], FitResult] = field(default_factory=dict)
    skipped: list[tuple[str, int, int]] = field(default_factory=list)
    failed: dict[tuple[str, int], str] = field(default_factory=dict)


def per_umpire_fits(
    d: Dataset, min_called: int = 50, cfg: FitConfig = FitConfig(), on_error: str = "raise"
) -> UmpireFits:
    """Fit each (umpire, season) group with at least ``min_called`` called pitches.

    Smaller groups are listed in ``skipped`` with their called-pitch count.
    With ``on_error="collect"`` fit errors are recorded per group in
    ``failed`` instead of raised.
    """
    if min_called < 50:
        raise ValueError("min_called must be at least 50")
    if on_error not in ("raise", "collect"):
        raise ValueError("on_error must be 'raise' or 'collect'")
    out = UmpireFits()
    called = d.called_mask
    keys = sorted({(str(u), int(s)) for u, s in zip(d.umpire_id, d.season)})
    for umpire, season in keys:
        mask = (d.umpire_id == umpire) & (d.season == season)
        n_called = int((mask & called).sum())
        if n_called < min_called:
            out.skipped.append((umpire, season, n_called))
            continue
        try:
            out.fits[(umpire, season)] = fit(d.take(mask), cfg, label=f"{umpire}-{season}")
        except ZonefitError as exc:
            if on_error == "raise":
                raise
            out.failed[(umpire, season)] = f"{type(exc).__name__}: {exc}"
    return out
