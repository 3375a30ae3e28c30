"""Synthetic pitch generator used to verify fitting and the band analyses.

Locations, call labels and metadata draw from independent child streams of
one seed, so changing the metadata mixes never moves a location or flips a
call for a fixed seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .data import (
    HANDS,
    PITCH_TYPES,
    X_LIMIT,
    Y_LIMIT,
    BatterHand,
    Dataset,
    Outcome,
    PitchType,
    outcome_code,
)
from .errors import InputError
from .zone import KBO_ZONE, Extent, RulebookZone, ZoneParams, rulebook_strike_mask, strike_probability


class LabelMode(Enum):
    PROBABILISTIC = "probabilistic"
    RULEBOOK = "rulebook"


@dataclass(frozen=True)
class UniformLocations:
    extent: Extent = Extent(-2.0, 2.0, 0.5, 4.5)


@dataclass(frozen=True)
class GaussianLocations:
    mean: tuple[float, float] = (0.0, 2.5)
    sd: tuple[float, float] = (0.8, 0.8)


_SWING_OUTCOMES = (Outcome.SWINGING_STRIKE, Outcome.FOUL, Outcome.IN_PLAY)
_ALL_COUNTS = tuple((b, s) for b in range(4) for s in range(3))


@dataclass(frozen=True)
class SynthMetadata:
    season: int = 2024
    umpire_id: str = "U01"
    pitch_type_mix: dict[PitchType, float] = field(
        default_factory=lambda: {PitchType.FOUR_SEAM: 1.0}
    )
    hand_mix: dict[BatterHand, float] = field(
        default_factory=lambda: {BatterHand.RIGHT: 0.5, BatterHand.LEFT: 0.5}
    )
    # Probability a pitch is swung at instead of taken; swings get a swing outcome.
    swing_prob: float = 0.0
    n_games: int = 10
    n_pitchers: int = 20
    n_batters: int = 30
    count_mix: dict[tuple[int, int], float] | None = None


@dataclass(frozen=True)
class SynthConfig:
    true_params: ZoneParams
    n: int
    seed: int = 0
    location: UniformLocations | GaussianLocations = UniformLocations()
    label_mode: LabelMode = LabelMode.PROBABILISTIC
    metadata: SynthMetadata = SynthMetadata()
    zone: RulebookZone = KBO_ZONE

    def __post_init__(self):
        if self.n < 1:
            raise InputError("n must be at least 1")
        loc = self.location
        if isinstance(loc, UniformLocations):
            e = loc.extent
            if not (e.x_max > e.x_min and e.y_max > e.y_min):
                raise InputError(f"degenerate location extent {e}")
            if e.x_min < -X_LIMIT or e.x_max > X_LIMIT or e.y_min < 0 or e.y_max > Y_LIMIT:
                raise InputError(f"location extent {e} leaves the physical window")
        elif not all(s > 0 for s in loc.sd):
            raise InputError("gaussian sd must be positive")
        meta = self.metadata
        mixes = [meta.pitch_type_mix, meta.hand_mix]
        if meta.count_mix is not None:
            mixes.append(meta.count_mix)
        for mix in mixes:
            weights = list(mix.values())
            if not weights or min(weights) < 0 or not math.isclose(sum(weights), 1.0, abs_tol=1e-9):
                raise InputError(f"mix {mix} must be non-negative and sum to 1")
        if not 0.0 <= meta.swing_prob <= 1.0:
            raise InputError("swing_prob must be in [0, 1]")
        if min(meta.n_games, meta.n_pitchers, meta.n_batters) < 1:
            raise InputError("identifier pool sizes must be positive")

    # -- JSON ---------------------------------------------------------------

    @classmethod
    def from_dict(cls, raw: dict) -> "SynthConfig":
        try:
            raw = dict(raw)
            params = ZoneParams.from_dict(raw.pop("true_params"))
            loc_raw = raw.pop("location", {"kind": "uniform"})
            kind = loc_raw.get("kind", "uniform")
            if kind == "uniform":
                location = UniformLocations(Extent(*loc_raw.get("extent", [-2.0, 2.0, 0.5, 4.5])))
            elif kind == "gaussian":
                location = GaussianLocations(
                    tuple(loc_raw.get("mean", (0.0, 2.5))), tuple(loc_raw.get("sd", (0.8, 0.8)))
                )
            else:
                raise InputError(f"unknown location kind {kind!r}")
            meta_raw = dict(raw.pop("metadata", {}))
            if "pitch_type_mix" in meta_raw:
                meta_raw["pitch_type_mix"] = {
                    PitchType(k): float(v) for k, v in meta_raw["pitch_type_mix"].items()
                }
            if "hand_mix" in meta_raw:
                meta_raw["hand_mix"] = {
                    BatterHand(k): float(v) for k, v in meta_raw["hand_mix"].items()
                }
            if meta_raw.get("count_mix") is not None:
                meta_raw["count_mix"] = {
                    tuple(int(c) for c in k.split("-")): float(v)
                    for k, v in meta_raw["count_mix"].items()
                }
            zone = RulebookZone(**raw.pop("zone", {}))
            label_mode = LabelMode(raw.pop("label_mode", "probabilistic"))
            n = int(raw.pop("n"))
            seed = int(raw.pop("seed", 0))
            if raw:
                raise InputError(f"unknown synth config keys: {sorted(raw)}")
            return cls(
                true_params=params,
                n=n,
                seed=seed,
                location=location,
                label_mode=label_mode,
                metadata=SynthMetadata(**meta_raw),
                zone=zone,
            )
        except InputError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"invalid synth config: {exc!r}") from exc

    @classmethod
    def from_json(cls, path) -> "SynthConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        loc = self.location
        if isinstance(loc, UniformLocations):
            e = loc.extent
            loc_d = {"kind": "uniform", "extent": [e.x_min, e.x_max, e.y_min, e.y_max]}
        else:
            loc_d = {"kind": "gaussian", "mean": list(loc.mean), "sd": list(loc.sd)}
        m = self.metadata
        meta = {
            "season": m.season,
            "umpire_id": m.umpire_id,
            "pitch_type_mix": {k.value: v for k, v in m.pitch_type_mix.items()},
            "hand_mix": {k.value: v for k, v in m.hand_mix.items()},
            "swing_prob": m.swing_prob,
            "n_games": m.n_games,
            "n_pitchers": m.n_pitchers,
            "n_batters": m.n_batters,
            "count_mix": None
            if m.count_mix is None
            else {f"{b}-{s}": v for (b, s), v in m.count_mix.items()},
        }
        return {
            "true_params": self.true_params.to_dict(),
            "n": self.n,
            "seed": self.seed,
            "location": loc_d,
            "label_mode": self.label_mode.value,
            "metadata": meta,
            "zone": {"x_half": self.zone.x_half, "y_low": self.zone.y_low, "y_high": self.zone.y_high},
        }


def _draw_locations(cfg: SynthConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    loc = cfg.location
    if isinstance(loc, UniformLocations):
        e = loc.extent
        return rng.uniform(e.x_min, e.x_max, cfg.n), rng.uniform(e.y_min, e.y_max, cfg.n)
    x = np.empty(cfg.n)
    y = np.empty(cfg.n)
    todo = np.arange(cfg.n)
    # Redraw anything outside the physical window (a truncated normal).
    while todo.size:
        x[todo] = rng.normal(loc.mean[0], loc.sd[0], todo.size)
        y[todo] = rng.normal(loc.mean[1], loc.sd[1], todo.size)
        bad = (np.abs(x[todo]) > X_LIMIT) | (y[todo] < 0) | (y[todo] > Y_LIMIT)
        todo = todo[bad]
    return x, y


def _choice(rng, mix: dict, size: int) -> list:
    keys = list(mix)
    probs = np.array([mix[k] for k in keys], dtype=float)
    idx = rng.choice(len(keys), size=size, p=probs / probs.sum())
    return [keys[i] for i in idx]


def generate(cfg: SynthConfig) -> Dataset:
    """Draw ``cfg.n`` pitches; deterministic given ``cfg.seed``."""
    loc_seq, label_seq, meta_seq = np.random.SeedSequence(cfg.seed & 0xFFFFFFFFFFFFFFFF).spawn(3)
    x, y = _draw_locations(cfg, np.random.default_rng(loc_seq))

    label_rng = np.random.default_rng(label_seq)
    u = label_rng.random(cfg.n)
    if cfg.label_mode is LabelMode.RULEBOOK:
        strike = rulebook_strike_mask(cfg.zone, x, y)
    else:
        strike = u < strike_probability(cfg.true_params, x, y)

    m = cfg.metadata
    rng = np.random.default_rng(meta_seq)
    types = _choice(rng, m.pitch_type_mix, cfg.n)
    hands = _choice(rng, m.hand_mix, cfg.n)
    count_mix = m.count_mix or {c: 1.0 / len(_ALL_COUNTS) for c in _ALL_COUNTS}
    counts = _choice(rng, count_mix, cfg.n)
    swung = rng.random(cfg.n) < m.swing_prob
    swing_kind = rng.integers(0, len(_SWING_OUTCOMES), cfg.n)
    games = rng.integers(0, m.n_games, cfg.n)
    pitchers = rng.integers(0, m.n_pitchers, cfg.n)
    batters = rng.integers(0, m.n_batters, cfg.n)

    called = np.where(
        strike, outcome_code(Outcome.CALLED_STRIKE), outcome_code(Outcome.CALLED_BALL)
    )
    swing_codes = np.array([outcome_code(o) for o in _SWING_OUTCOMES])
    outcome = np.where(swung, swing_codes[swing_kind], called)

    return Dataset(
        season=np.full(cfg.n, m.season),
        game_id=[f"G{m.season}-{g:04d}" for g in games],
        umpire_id=[m.umpire_id] * cfg.n,
        pitcher_id=[f"P{p:04d}" for p in pitchers],
        batter_id=[f"B{b:04d}" for b in batters],
        batter_hand=[HANDS.index(h) for h in hands],
        pitch_type=[PITCH_TYPES.index(t) for t in types],
        x=x,
        y=y,
        balls=[c[0] for c in counts],
        strikes=[c[1] for c in counts],
        outcome=outcome,
        source_label=f"synthetic-{m.season}-{m.umpire_id}-seed{cfg.seed}",
    )
