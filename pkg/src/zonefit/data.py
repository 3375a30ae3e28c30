"""Pitch records, CSV ingestion/emission, filtering and dataset summaries.

A :class:`Dataset` is stored column-wise (one numpy array per field) so the
fitter and the band analyses can work on whole columns; :class:`Pitch` is the
row view used for iteration and for brute-force checks.

Coordinates are in feet: ``x`` from the plate centre, positive toward the
umpire's right, ``y`` above the ground.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import EmptyFileError, InputError, MissingColumnError, ParseError

X_LIMIT = 5.0
Y_LIMIT = 8.0
MIN_SEASON = 1900


class BatterHand(Enum):
    LEFT = "L"
    RIGHT = "R"


class PitchType(Enum):
    FOUR_SEAM = "four_seam"
    TWO_SEAM = "two_seam"
    SLIDER = "slider"
    CHANGEUP = "changeup"
    CURVEBALL = "curveball"
    FORKBALL = "forkball"
    OTHER = "other"


class Outcome(Enum):
    CALLED_STRIKE = "called_strike"
    CALLED_BALL = "called_ball"
    SWINGING_STRIKE = "swinging_strike"
    FOUL = "foul"
    IN_PLAY = "in_play"
    BUNT = "bunt"
    BUNT_FOUL = "bunt_foul"
    HIT_BY_PITCH = "hbp"
    OTHER = "other"


HANDS: tuple[BatterHand, ...] = tuple(BatterHand)
PITCH_TYPES: tuple[PitchType, ...] = tuple(PitchType)
OUTCOMES: tuple[Outcome, ...] = tuple(Outcome)

CALLED = frozenset({Outcome.CALLED_STRIKE, Outcome.CALLED_BALL})
HIT_ATTEMPTS = frozenset(
    {Outcome.SWINGING_STRIKE, Outcome.IN_PLAY, Outcome.FOUL, Outcome.BUNT, Outcome.BUNT_FOUL}
)

_HAND_CODE = {h: i for i, h in enumerate(HANDS)}
_TYPE_CODE = {t: i for i, t in enumerate(PITCH_TYPES)}
_OUTCOME_CODE = {o: i for i, o in enumerate(OUTCOMES)}

CSV_COLUMNS = (
    "season",
    "game_id",
    "umpire_id",
    "pitcher_id",
    "batter_id",
    "batter_hand",
    "pitch_type",
    "x_ft",
    "y_ft",
    "balls",
    "strikes",
    "outcome",
)

# Common spellings from tracking exports, matched case-insensitively.
PITCH_TYPE_ALIASES = {
    "ff": PitchType.FOUR_SEAM,
    "fa": PitchType.FOUR_SEAM,
    "4-seam": PitchType.FOUR_SEAM,
    "fourseam": PitchType.FOUR_SEAM,
    "four-seam fastball": PitchType.FOUR_SEAM,
    "si": PitchType.TWO_SEAM,
    "ft": PitchType.TWO_SEAM,
    "2-seam": PitchType.TWO_SEAM,
    "twoseam": PitchType.TWO_SEAM,
    "sinker": PitchType.TWO_SEAM,
    "sl": PitchType.SLIDER,
    "ch": PitchType.CHANGEUP,
    "change-up": PitchType.CHANGEUP,
    "cu": PitchType.CURVEBALL,
    "kc": PitchType.CURVEBALL,
    "curve": PitchType.CURVEBALL,
    "fs": PitchType.FORKBALL,
    "fo": PitchType.FORKBALL,
    "splitter": PitchType.FORKBALL,
    "fork": PitchType.FORKBALL,
}


@dataclass(frozen=True)
class Pitch:
    season: int
    game_id: str
    umpire_id: str
    pitcher_id: str
    batter_id: str
    batter_hand: BatterHand
    pitch_type: PitchType
    x: float
    y: float
    balls: int
    strikes: int
    outcome: Outcome

    def violations(self) -> list[tuple[str, str]]:
        """Return ``(column, message)`` pairs for every broken invariant."""
        out = []
        if not math.isfinite(self.x) or abs(self.x) > X_LIMIT:
            out.append(("x_ft", f"x={self.x} outside [-{X_LIMIT}, {X_LIMIT}] ft"))
        if not math.isfinite(self.y) or not 0.0 <= self.y <= Y_LIMIT:
            out.append(("y_ft", f"y={self.y} outside [0, {Y_LIMIT}] ft"))
        if not 0 <= self.balls <= 3:
            out.append(("balls", f"balls={self.balls} outside [0, 3]"))
        if not 0 <= self.strikes <= 2:
            out.append(("strikes", f"strikes={self.strikes} outside [0, 2]"))
        if self.season < MIN_SEASON:
            out.append(("season", f"season={self.season} before {MIN_SEASON}"))
        return out


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable, ordered, column-oriented collection of pitches.

    Categorical columns hold integer codes into :data:`HANDS`,
    :data:`PITCH_TYPES` and :data:`OUTCOMES`.
    """

    season: np.ndarray
    game_id: np.ndarray
    umpire_id: np.ndarray
    pitcher_id: np.ndarray
    batter_id: np.ndarray
    batter_hand: np.ndarray
    pitch_type: np.ndarray
    x: np.ndarray
    y: np.ndarray
    balls: np.ndarray
    strikes: np.ndarray
    outcome: np.ndarray
    source_label: str = ""

    _DTYPES = {
        "season": np.int64,
        "game_id": object,
        "umpire_id": object,
        "pitcher_id": object,
        "batter_id": object,
        "batter_hand": np.int8,
        "pitch_type": np.int8,
        "x": np.float64,
        "y": np.float64,
        "balls": np.int8,
        "strikes": np.int8,
        "outcome": np.int8,
    }

    def __post_init__(self):
        n = None
        for name, dtype in self._DTYPES.items():
            arr = _frozen(getattr(self, name), dtype)
            if arr.ndim != 1:
                raise InputError(f"column {name} must be one-dimensional")
            if n is None:
                n = arr.shape[0]
            elif arr.shape[0] != n:
                raise InputError(f"column {name} has length {arr.shape[0]}, expected {n}")
            object.__setattr__(self, name, arr)
        bad = ~self._valid_mask()
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            problems = self[i].violations() or [("?", "invalid categorical code")]
            col, msg = problems[0]
            raise InputError(f"pitch {i} violates invariants ({col}: {msg})")

    def _valid_mask(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            ok = np.isfinite(self.x) & (np.abs(self.x) <= X_LIMIT)
            ok &= np.isfinite(self.y) & (self.y >= 0.0) & (self.y <= Y_LIMIT)
        ok &= (self.balls >= 0) & (self.balls <= 3)
        ok &= (self.strikes >= 0) & (self.strikes <= 2)
        ok &= self.season >= MIN_SEASON
        ok &= (self.batter_hand >= 0) & (self.batter_hand < len(HANDS))
        ok &= (self.pitch_type >= 0) & (self.pitch_type < len(PITCH_TYPES))
        ok &= (self.outcome >= 0) & (self.outcome < len(OUTCOMES))
        return ok

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_pitches(cls, pitches: Iterable[Pitch], source_label: str = "") -> "Dataset":
        pitches = list(pitches)
        return cls(
            season=[p.season for p in pitches],
            game_id=[p.game_id for p in pitches],
            umpire_id=[p.umpire_id for p in pitches],
            pitcher_id=[p.pitcher_id for p in pitches],
            batter_id=[p.batter_id for p in pitches],
            batter_hand=[_HAND_CODE[p.batter_hand] for p in pitches],
            pitch_type=[_TYPE_CODE[p.pitch_type] for p in pitches],
            x=[p.x for p in pitches],
            y=[p.y for p in pitches],
            balls=[p.balls for p in pitches],
            strikes=[p.strikes for p in pitches],
            outcome=[_OUTCOME_CODE[p.outcome] for p in pitches],
            source_label=source_label,
        )

    @classmethod
    def empty(cls, source_label: str = "") -> "Dataset":
        return cls.from_pitches([], source_label)

    def take(self, index, source_label: str | None = None) -> "Dataset":
        """Subset by boolean mask or integer index array, keeping order."""
        cols = {name: getattr(self, name)[index] for name in self._DTYPES}
        label = self.source_label if source_label is None else source_label
        return Dataset(**cols, source_label=label)

    @classmethod
    def concat(cls, parts: Sequence["Dataset"], source_label: str = "") -> "Dataset":
        if not parts:
            return cls.empty(source_label)
        cols = {
            name: np.concatenate([getattr(p, name) for p in parts]) for name in cls._DTYPES
        }
        return cls(**cols, source_label=source_label)

    # -- access ---------------------------------------------------------------

    @property
    def row_count(self) -> int:
        return int(self.x.shape[0])

    def __len__(self) -> int:
        return self.row_count

    def __getitem__(self, i: int) -> Pitch:
        return Pitch(
            season=int(self.season[i]),
            game_id=str(self.game_id[i]),
            umpire_id=str(self.umpire_id[i]),
            pitcher_id=str(self.pitcher_id[i]),
            batter_id=str(self.batter_id[i]),
            batter_hand=HANDS[self.batter_hand[i]],
            pitch_type=PITCH_TYPES[self.pitch_type[i]],
            x=float(self.x[i]),
            y=float(self.y[i]),
            balls=int(self.balls[i]),
            strikes=int(self.strikes[i]),
            outcome=OUTCOMES[self.outcome[i]],
        )

    def __iter__(self) -> Iterator[Pitch]:
        for i in range(self.row_count):
            yield self[i]

    @property
    def pitches(self) -> tuple[Pitch, ...]:
        return tuple(self)

    def outcome_mask(self, outcomes: Iterable[Outcome]) -> np.ndarray:
        codes = [_OUTCOME_CODE[o] for o in outcomes]
        return np.isin(self.outcome, codes)

    @property
    def called_mask(self) -> np.ndarray:
        return self.outcome_mask(CALLED)

    @property
    def is_left(self) -> np.ndarray:
        return self.batter_hand == _HAND_CODE[BatterHand.LEFT]

    def called_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(x, y, is_strike)`` restricted to called pitches."""
        m = self.called_mask
        strike = self.outcome[m] == _OUTCOME_CODE[Outcome.CALLED_STRIKE]
        return self.x[m], self.y[m], strike


# -- CSV ------------------------------------------------------------------------


@dataclass(frozen=True)
class CsvSchema:
    """Column mapping from canonical field names to the names in a foreign file.

    ``columns`` maps canonical CSV column names (see :data:`CSV_COLUMNS`) to
    the header used by the file; unmapped columns are looked up under their
    canonical name. The ``*_values`` maps add extra spellings for enum fields.
    """

    columns: Mapping[str, str] = field(default_factory=dict)
    hand_values: Mapping[str, str] = field(default_factory=dict)
    outcome_values: Mapping[str, str] = field(default_factory=dict)
    pitch_type_values: Mapping[str, str] = field(default_factory=dict)

    def source(self, column: str) -> str:
        return self.columns.get(column, column)

    @classmethod
    def from_json(cls, path: str | os.PathLike) -> "CsvSchema":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        unknown = set(raw) - {"columns", "hand_values", "outcome_values", "pitch_type_values"}
        if unknown:
            raise InputError(f"unknown schema keys: {sorted(unknown)}")
        bad = set(raw.get("columns", {})) - set(CSV_COLUMNS)
        if bad:
            raise InputError(f"schema maps unknown canonical columns: {sorted(bad)}")
        return cls(**raw)


DEFAULT_SCHEMA = CsvSchema()


def _parse_int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _parse_hand(text: str, schema: CsvSchema) -> BatterHand:
    key = schema.hand_values.get(text, text).strip().upper()
    if key in ("L", "LEFT"):
        return BatterHand.LEFT
    if key in ("R", "RIGHT"):
        return BatterHand.RIGHT
    raise ValueError(f"unknown batter hand {text!r}")


def _parse_pitch_type(text: str, schema: CsvSchema) -> PitchType:
    key = schema.pitch_type_values.get(text, text).strip().lower()
    try:
        return PitchType(key)
    except ValueError:
        return PITCH_TYPE_ALIASES.get(key, PitchType.OTHER)


def _parse_outcome(text: str, schema: CsvSchema) -> Outcome:
    key = schema.outcome_values.get(text, text).strip().lower()
    try:
        return Outcome(key)
    except ValueError:
        raise ValueError(f"unknown outcome {text!r}") from None


def _parse_row(row: Mapping[str, str], schema: CsvSchema, lineno: int) -> Pitch:
    values = {}
    parsers = {
        "season": _parse_int,
        "game_id": str,
        "umpire_id": str,
        "pitcher_id": str,
        "batter_id": str,
        "batter_hand": lambda s: _parse_hand(s, schema),
        "pitch_type": lambda s: _parse_pitch_type(s, schema),
        "x_ft": float,
        "y_ft": float,
        "balls": _parse_int,
        "strikes": _parse_int,
        "outcome": lambda s: _parse_outcome(s, schema),
    }
    for column, parse in parsers.items():
        raw = row.get(schema.source(column))
        if raw is None:
            raise ParseError(lineno, column, "missing value")
        try:
            values[column] = parse(raw.strip())
        except ValueError as exc:
            raise ParseError(lineno, column, str(exc)) from None
    return Pitch(
        season=values["season"],
        game_id=values["game_id"],
        umpire_id=values["umpire_id"],
        pitcher_id=values["pitcher_id"],
        batter_id=values["batter_id"],
        batter_hand=values["batter_hand"],
        pitch_type=values["pitch_type"],
        x=values["x_ft"],
        y=values["y_ft"],
        balls=values["balls"],
        strikes=values["strikes"],
        outcome=values["outcome"],
    )


@dataclass(frozen=True)
class Violation:
    row: int
    column: str
    message: str

    def __str__(self) -> str:
        return f"row {self.row}: {self.column}: {self.message}"


def _read_rows(path, schema):
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyFileError(f"{path}: no header row")
        header = set(reader.fieldnames)
        for column in CSV_COLUMNS:
            if schema.source(column) not in header:
                raise MissingColumnError(schema.source(column))
        # Line 1 is the header, so data rows start at line 2.
        for lineno, row in enumerate(reader, start=2):
            yield lineno, row


def scan_csv(
    path: str | os.PathLike, schema: CsvSchema = DEFAULT_SCHEMA, source_label: str | None = None
) -> tuple[Dataset, list[Violation]]:
    """Parse every row, collecting violations instead of stopping at the first.

    Returns the dataset of clean rows and the list of rejected rows.
    Header problems still raise.
    """
    pitches = []
    violations = []
    for lineno, row in _read_rows(path, schema):
        try:
            pitch = _parse_row(row, schema, lineno)
        except ParseError as exc:
            violations.append(Violation(exc.row, exc.column, exc.message))
            continue
        problems = pitch.violations()
        if problems:
            violations.extend(Violation(lineno, c, m) for c, m in problems)
            continue
        pitches.append(pitch)
    label = Path(path).stem if source_label is None else source_label
    return Dataset.from_pitches(pitches, label), violations


def load_csv(
    path: str | os.PathLike, schema: CsvSchema = DEFAULT_SCHEMA, source_label: str | None = None
) -> Dataset:
    """Load a pitch CSV, raising on the first rejected row.

    Raises :class:`EmptyFileError` when the file has no data rows.
    """
    dataset, violations = scan_csv(path, schema, source_label)
    if violations:
        v = violations[0]
        raise ParseError(v.row, v.column, v.message)
    if dataset.row_count == 0:
        raise EmptyFileError(f"{path}: no data rows")
    return dataset


def _format_float(value: float) -> str:
    return repr(float(value))


def dataset_rows(d: Dataset) -> Iterator[list[str]]:
    for p in d:
        yield [
            str(p.season),
            p.game_id,
            p.umpire_id,
            p.pitcher_id,
            p.batter_id,
            p.batter_hand.value,
            p.pitch_type.value,
            _format_float(p.x),
            _format_float(p.y),
            str(p.balls),
            str(p.strikes),
            p.outcome.value,
        ]


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(d: Dataset, path: str | os.PathLike) -> None:
    """Write ``d`` in the canonical schema. Floats use shortest round-trip repr."""
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(dataset_rows(d))
    atomic_write_text(path, buf.getvalue())


# -- filtering / summaries -------------------------------------------------------


@dataclass(frozen=True)
class FilterSpec:
    """Conjunctive row predicate; ``None`` fields do not constrain."""

    seasons: frozenset[int] | None = None
    umpire_ids: frozenset[str] | None = None
    pitch_types: frozenset[PitchType] | None = None
    batter_hand: BatterHand | None = None
    count: tuple[int, int] | None = None
    called_only: bool = False

    def __post_init__(self):
        for name in ("seasons", "umpire_ids", "pitch_types"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, frozenset):
                object.__setattr__(self, name, frozenset(value))

    def __and__(self, other: "FilterSpec") -> "FilterSpec":
        def both_sets(a, b):
            if a is None:
                return b
            if b is None:
                return a
            return a & b

        def both_scalar(name):
            a, b = getattr(self, name), getattr(other, name)
            if a is not None and b is not None and a != b:
                raise ValueError(f"cannot conjoin filters with different {name}: {a} vs {b}")
            return a if a is not None else b

        return FilterSpec(
            seasons=both_sets(self.seasons, other.seasons),
            umpire_ids=both_sets(self.umpire_ids, other.umpire_ids),
            pitch_types=both_sets(self.pitch_types, other.pitch_types),
            batter_hand=both_scalar("batter_hand"),
            count=both_scalar("count"),
            called_only=self.called_only or other.called_only,
        )

    def mask(self, d: Dataset) -> np.ndarray:
        keep = np.ones(d.row_count, dtype=bool)
        if self.seasons is not None:
            keep &= np.isin(d.season, sorted(self.seasons))
        if self.umpire_ids is not None:
            keep &= np.isin(d.umpire_id, sorted(self.umpire_ids))
        if self.pitch_types is not None:
            keep &= np.isin(d.pitch_type, sorted(_TYPE_CODE[t] for t in self.pitch_types))
        if self.batter_hand is not None:
            keep &= d.batter_hand == _HAND_CODE[self.batter_hand]
        if self.count is not None:
            balls, strikes = self.count
            keep &= (d.balls == balls) & (d.strikes == strikes)
        if self.called_only:
            keep &= d.called_mask
        return keep


def filter_dataset(d: Dataset, spec: FilterSpec = FilterSpec()) -> Dataset:
    return d.take(spec.mask(d))


@dataclass(frozen=True)
class DatasetSummary:
    n_pitches: int
    n_games: int
    n_pitchers: int
    n_batters: int
    per_season: dict[int, int]


def summary(d: Dataset) -> DatasetSummary:
    seasons, counts = np.unique(d.season, return_counts=True)
    return DatasetSummary(
        n_pitches=d.row_count,
        n_games=len(set(d.game_id.tolist())),
        n_pitchers=len(set(d.pitcher_id.tolist())),
        n_batters=len(set(d.batter_id.tolist())),
        per_season={int(s): int(c) for s, c in zip(seasons, counts)},
    )


def hand_code(hand: BatterHand) -> int:
    return _HAND_CODE[hand]


def pitch_type_code(pitch_type: PitchType) -> int:
    return _TYPE_CODE[pitch_type]


def outcome_code(outcome: Outcome) -> int:
    return _OUTCOME_CODE[outcome]
