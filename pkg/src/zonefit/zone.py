"""Superellipse logistic strike-zone model.

The call probability at ``(x, y)`` is ``expit(-beta * (d - alpha))`` where
``d`` is the superellipse radius

    d = (|x - x0|**r + |(y - y0) / lam|**r) ** (1 / r)

so the 50% boundary is a superellipse of half-width ``alpha`` and half-height
``alpha * lam``; ``beta`` sets how sharp the boundary is and ``r`` how
rectangular.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit, logit

from .errors import EmptyContourError, GridMismatchError, InvalidExtentError, InvalidParamsError

R_CAP = 64.0


@dataclass(frozen=True)
class ZoneParams:
    x0: float
    y0: float
    alpha: float
    lam: float
    beta: float
    r: float

    NAMES = ("x0", "y0", "alpha", "lambda", "beta", "r")

    def __post_init__(self):
        values = self.as_tuple()
        if not all(math.isfinite(v) for v in values):
            raise InvalidParamsError(f"non-finite parameter in {values}")
        if self.alpha <= 0 or self.lam <= 0 or self.beta <= 0:
            raise InvalidParamsError("alpha, lambda and beta must be positive")
        if not 1.0 <= self.r <= R_CAP:
            raise InvalidParamsError(f"r={self.r} outside [1, {R_CAP}]")

    def as_tuple(self) -> tuple[float, ...]:
        return (self.x0, self.y0, self.alpha, self.lam, self.beta, self.r)

    def to_dict(self) -> dict[str, float]:
        return dict(zip(self.NAMES, self.as_tuple()))

    @classmethod
    def from_dict(cls, raw) -> "ZoneParams":
        lam = raw["lambda"] if "lambda" in raw else raw["lam"]
        return cls(
            float(raw["x0"]),
            float(raw["y0"]),
            float(raw["alpha"]),
            float(lam),
            float(raw["beta"]),
            float(raw["r"]),
        )


@dataclass(frozen=True)
class RulebookZone:
    """Fixed rectangular zone with the ball radius already folded in."""

    x_half: float = 0.9
    y_low: float = 1.5
    y_high: float = 3.5

    def __post_init__(self):
        if not self.x_half > 0:
            raise InvalidParamsError("x_half must be positive")
        if not self.y_low < self.y_high:
            raise InvalidParamsError("y_low must be below y_high")


KBO_ZONE = RulebookZone()


class Call(Enum):
    STRIKE = "strike"
    BALL = "ball"


def superellipse_distance(p: ZoneParams, x, y):
    """Superellipse radius of ``(x, y)`` about the zone centre.

    The larger axis term is factored out before exponentiation so that
    ``r`` up to :data:`R_CAP` cannot overflow.
    """
    tx = np.abs(np.asarray(x, dtype=float) - p.x0)
    ty = np.abs((np.asarray(y, dtype=float) - p.y0) / p.lam)
    m = np.maximum(tx, ty)
    q = np.minimum(tx, ty)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(m > 0, q / np.where(m > 0, m, 1.0), 0.0)
    d = m * (1.0 + ratio**p.r) ** (1.0 / p.r)
    return d if d.ndim else float(d)


def strike_probability(p: ZoneParams, x, y):
    prob = expit(-p.beta * (np.asarray(superellipse_distance(p, x, y)) - p.alpha))
    return prob if prob.ndim else float(prob)


def contour_radius(p: ZoneParams, prob: float) -> float:
    if not 0.0 < prob < 1.0:
        raise ValueError(f"probability level must be in (0, 1), got {prob}")
    return p.alpha - float(logit(prob)) / p.beta


def contour(p: ZoneParams, prob: float, n: int = 256) -> np.ndarray:
    """``n`` vertices of the closed level curve ``strike_probability == prob``.

    Vertices are returned counter-clockwise starting on the +x axis; the
    polyline closes implicitly (the first vertex is not repeated).
    """
    if n < 8:
        raise ValueError("contour needs at least 8 points")
    radius = contour_radius(p, prob)
    if radius <= 0:
        raise EmptyContourError(
            f"level {prob} is unreachable: radius {radius:.4g} <= 0 for beta={p.beta}"
        )
    theta = 2.0 * np.pi * np.arange(n) / n
    c, s = np.cos(theta), np.sin(theta)
    e = 2.0 / p.r
    xs = p.x0 + radius * np.sign(c) * np.abs(c) ** e
    ys = p.y0 + p.lam * radius * np.sign(s) * np.abs(s) ** e
    return np.column_stack([xs, ys])


def rulebook_call(z: RulebookZone, x: float, y: float) -> Call:
    inside = -z.x_half < x < z.x_half and z.y_low < y < z.y_high
    return Call.STRIKE if inside else Call.BALL


def rulebook_strike_mask(z: RulebookZone, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (x > -z.x_half) & (x < z.x_half) & (y > z.y_low) & (y < z.y_high)


@dataclass(frozen=True)
class ZoneMetrics:
    width: float
    height: float
    center: tuple[float, float]


def derived_metrics(p: ZoneParams) -> ZoneMetrics:
    return ZoneMetrics(width=2.0 * p.alpha, height=2.0 * p.alpha * p.lam, center=(p.x0, p.y0))


# -- probability grids ----------------------------------------------------------


@dataclass(frozen=True)
class Extent:
    x_min: float = -1.5
    x_max: float = 1.5
    y_min: float = 1.0
    y_max: float = 4.0

    @classmethod
    def parse(cls, text: str) -> "Extent":
        parts = [float(v) for v in text.split(",")]
        if len(parts) != 4:
            raise InvalidExtentError("extent must be x_min,x_max,y_min,y_max")
        return cls(*parts)


DEFAULT_EXTENT = Extent()
DEFAULT_STEP = 0.05
_GRID_TOL = 1e-9


def _cells(lo: float, hi: float, step: float) -> int:
    count = (hi - lo) / step
    k = round(count)
    if k < 1 or abs(count - k) > _GRID_TOL * max(1.0, count):
        raise InvalidExtentError(f"span {hi - lo} is not a positive multiple of step {step}")
    return k


@dataclass(frozen=True, eq=False)
class ProbabilityGrid:
    """Values sampled at cell centres; row ``i`` is the ``i``-th y from the bottom."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    step: float
    values: np.ndarray

    def __post_init__(self):
        if not (self.step > 0 and self.x_max > self.x_min and self.y_max > self.y_min):
            raise InvalidExtentError("degenerate grid extent or non-positive step")
        shape = (_cells(self.y_min, self.y_max, self.step), _cells(self.x_min, self.x_max, self.step))
        values = np.array(self.values, dtype=float)
        if values.shape != shape:
            raise InvalidExtentError(f"values shape {values.shape} does not match extent {shape}")
        if not np.isfinite(values).all():
            raise InvalidExtentError("grid values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def x_centers(self) -> np.ndarray:
        return self.x_min + self.step * (np.arange(self.shape[1]) + 0.5)

    @property
    def y_centers(self) -> np.ndarray:
        return self.y_min + self.step * (np.arange(self.shape[0]) + 0.5)

    def same_frame(self, other: "ProbabilityGrid") -> bool:
        a = (self.x_min, self.x_max, self.y_min, self.y_max, self.step)
        b = (other.x_min, other.x_max, other.y_min, other.y_max, other.step)
        return self.shape == other.shape and all(
            abs(u - v) <= _GRID_TOL * max(1.0, abs(u)) for u, v in zip(a, b)
        )

    def to_csv(self) -> str:
        """Header row ``y\\x, x_1, ...``; each row ``y_i, v_i1, ...``.

        The extent and step go in a leading ``#`` comment so the file can be
        read back exactly.
        """
        buf = io.StringIO()
        buf.write(
            f"# extent={self.x_min!r},{self.x_max!r},{self.y_min!r},{self.y_max!r} step={self.step!r}\n"
        )
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["y\\x"] + [f"{v:.6f}" for v in self.x_centers])
        for yc, row in zip(self.y_centers, self.values):
            w.writerow([f"{yc:.6f}"] + [f"{v:.12g}" for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ProbabilityGrid":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# extent="):
            raise InvalidExtentError("grid CSV lacks the '# extent=' header line")
        meta = lines[0][2:].split()
        extent = [float(v) for v in meta[0].split("=", 1)[1].split(",")]
        step = float(meta[1].split("=", 1)[1])
        rows = list(csv.reader(lines[1:]))
        values = [[float(v) for v in row[1:]] for row in rows[1:]]
        return cls(*extent, step=step, values=np.array(values).reshape(len(values), -1))


def probability_grid(
    p: ZoneParams, extent: Extent = DEFAULT_EXTENT, step: float = DEFAULT_STEP
) -> ProbabilityGrid:
    if not step > 0 or not (extent.x_max > extent.x_min and extent.y_max > extent.y_min):
        raise InvalidExtentError(f"invalid extent {extent} / step {step}")
    nx = _cells(extent.x_min, extent.x_max, step)
    ny = _cells(extent.y_min, extent.y_max, step)
    xs = extent.x_min + step * (np.arange(nx) + 0.5)
    ys = extent.y_min + step * (np.arange(ny) + 0.5)
    gx, gy = np.meshgrid(xs, ys)
    return ProbabilityGrid(
        extent.x_min, extent.x_max, extent.y_min, extent.y_max, step, strike_probability(p, gx, gy)
    )


def grid_difference(a: ProbabilityGrid, b: ProbabilityGrid) -> ProbabilityGrid:
    if not a.same_frame(b):
        raise GridMismatchError(
            f"grids differ: {a.shape}@{a.step} over ({a.x_min},{a.x_max},{a.y_min},{a.y_max}) vs "
            f"{b.shape}@{b.step} over ({b.x_min},{b.x_max},{b.y_min},{b.y_max})"
        )
    return ProbabilityGrid(a.x_min, a.x_max, a.y_min, a.y_max, a.step, a.values - b.values)
