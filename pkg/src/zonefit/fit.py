"""Maximum-likelihood fitting of :class:`ZoneParams` with bootstrap intervals.

Only called pitches (called strike / called ball) enter the likelihood. The
optimizer works on an unconstrained vector

    (x0, y0, log alpha, log lambda, log beta, log(r - 1))

which is clipped to a box before evaluation: ``beta`` cannot exceed
``FitConfig.beta_cap`` and ``r`` cannot exceed :data:`R_CAP`.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import kernels
from .data import Dataset
from .errors import (
    BootstrapError,
    InputError,
    NoCalledPitchesError,
    PerfectSeparationError,
    PerfectSeparationWarning,
    TooFewPitchesError,
    ZonefitError,
)
from .optimize import nelder_mead
from .zone import R_CAP, ZoneParams, derived_metrics, strike_probability

MIN_CALLED = 50
INTERVAL_METHOD = "bootstrap percentile, 95% (frequentist stand-in for credible intervals)"
NLL_CONVENTION = "sum over called pitches"
TRANSFORMED_NAMES = ("x0", "y0", "log_alpha", "log_lambda", "log_beta", "log_r_minus_1")
DERIVED_NAMES = ("width", "height", "center_x", "center_y")

# Initial simplex edge per transformed coordinate.
_STEP = np.array([0.05, 0.05, 0.1, 0.1, 0.5, 0.5])
_POLISH_STEP = np.array([0.02, 0.02, 0.02, 0.02, 0.1, 0.1])
_LOG_BOUND = 20.0
# Bootstrap replicates tolerate this fraction of failed refits.
_MAX_FAILURE_RATE = 0.10

_STREAM_STARTS = 1
_STREAM_BOOTSTRAP = 2

RULEBOOK_START = ZoneParams(x0=0.0, y0=2.5, alpha=0.9, lam=10.0 / 9.0, beta=10.0, r=2.0)


@dataclass(frozen=True)
class FitConfig:
    n_starts: int = 8
    max_iters: int = 5000
    tol: float = 1e-8
    seed: int = 0
    n_bootstrap: int = 200
    beta_cap: float = 1e4

    def __post_init__(self):
        if self.n_starts < 1 or self.max_iters < 1:
            raise InputError("n_starts and max_iters must be at least 1")
        if self.n_bootstrap < 0:
            raise InputError("n_bootstrap must be non-negative")
        if not (self.tol > 0 and self.beta_cap > 0):
            raise InputError("tol and beta_cap must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "FitConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise InputError(f"unknown fit config keys: {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def from_json(cls, path) -> "FitConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def replace(self, **changes) -> "FitConfig":
        return FitConfig(**{**self.to_dict(), **changes})


# -- parameter transform -----------------------------------------------------------


def to_transformed(p: ZoneParams) -> np.ndarray:
    return np.array(
        [p.x0, p.y0, math.log(p.alpha), math.log(p.lam), math.log(p.beta), math.log(p.r - 1.0)]
    )


def _clip(t: np.ndarray, beta_cap: float) -> np.ndarray:
    lo = [-np.inf, -np.inf, -_LOG_BOUND, -_LOG_BOUND, -_LOG_BOUND, -_LOG_BOUND]
    hi = [np.inf, np.inf, _LOG_BOUND, _LOG_BOUND, math.log(beta_cap), math.log(R_CAP - 1.0)]
    return np.clip(t, lo, hi)


def _unpack(t) -> tuple[float, ...]:
    x0, y0, a, l, b, rho = (float(v) for v in t)
    return x0, y0, math.exp(a), math.exp(l), math.exp(b), 1.0 + math.exp(rho)


def from_transformed(t, beta_cap: float = math.inf) -> ZoneParams:
    """Inverse of :func:`to_transformed`, after clipping to the search box."""
    t = np.asarray(t, dtype=float)
    if math.isfinite(beta_cap):
        t = _clip(t, beta_cap)
    return ZoneParams(*_unpack(t))


# -- likelihood -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CalledPitches:
    """Called-pitch columns as the kernel wants them; ``sign`` is +1 strike / -1 ball."""

    x: np.ndarray
    y: np.ndarray
    sign: np.ndarray
    weight: np.ndarray | None = None

    @classmethod
    def from_dataset(cls, d: Dataset) -> "CalledPitches":
        x, y, strike = d.called_arrays()
        return cls(
            np.ascontiguousarray(x, dtype=np.float64),
            np.ascontiguousarray(y, dtype=np.float64),
            np.where(strike, 1.0, -1.0),
        )

    def __len__(self) -> int:
        return int(self.x.shape[0])

    @property
    def n_strikes(self) -> float:
        w = np.ones(len(self)) if self.weight is None else self.weight
        return float(w[self.sign > 0].sum())

    def nll(self, p_tuple) -> float:
        return kernels.nll(self.x, self.y, self.sign, self.weight, *p_tuple)


def negative_log_likelihood(p: ZoneParams, d: Dataset) -> float:
    """Summed Bernoulli NLL of the called pitches in ``d`` under ``p``.

    Swings and other outcomes are ignored.
    """
    data = CalledPitches.from_dataset(d)
    if len(data) == 0:
        raise NoCalledPitchesError("dataset has no called pitches")
    return data.nll(p.as_tuple())


# -- results ----------------------------------------------------------------------------


@dataclass
class FitResult:
    params: ZoneParams
    nll: float
    converged: bool
    capped_beta: bool
    n_pitches_used: int
    config: FitConfig
    intervals: dict[str, tuple[float, float]] | None = None
    derived_intervals: dict[str, tuple[float, float]] | None = None
    n_evals: int = 0
    perfectly_separated: bool = False
    bootstrap_failures: int = 0
    label: str = ""

    @property
    def transformed_params(self) -> np.ndarray:
        return to_transformed(self.params)

    @property
    def derived(self) -> dict[str, float]:
        m = derived_metrics(self.params)
        return {
            "width": m.width,
            "height": m.height,
            "center_x": m.center[0],
            "center_y": m.center[1],
        }

    def to_dict(self) -> dict:
        def pair(v):
            return None if v is None else [float(v[0]), float(v[1])]

        derived = {
            name: {
                "estimate": value,
                "interval": pair((self.derived_intervals or {}).get(name)),
            }
            for name, value in self.derived.items()
        }
        return {
            "label": self.label,
            "params": self.params.to_dict(),
            "transformed_params": dict(zip(TRANSFORMED_NAMES, self.transformed_params.tolist())),
            "nll": self.nll,
            "nll_convention": NLL_CONVENTION,
            "converged": self.converged,
            "capped_beta": self.capped_beta,
            "perfectly_separated": self.perfectly_separated,
            "n_pitches_used": self.n_pitches_used,
            "n_evals": self.n_evals,
            "intervals": None
            if self.intervals is None
            else {k: pair(v) for k, v in self.intervals.items()},
            "interval_method": None if self.intervals is None else INTERVAL_METHOD,
            "bootstrap_failures": self.bootstrap_failures,
            "derived": derived,
            "config_echo": self.config.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, raw: dict) -> "FitResult":
        try:
            intervals = raw.get("intervals")
            derived = raw.get("derived") or {}
            derived_intervals = {
                k: tuple(v["interval"]) for k, v in derived.items() if v.get("interval") is not None
            }
            return cls(
                params=ZoneParams.from_dict(raw["params"]),
                nll=float(raw["nll"]),
                converged=bool(raw["converged"]),
                capped_beta=bool(raw["capped_beta"]),
                n_pitches_used=int(raw["n_pitches_used"]),
                config=FitConfig.from_dict(raw.get("config_echo", {})),
                intervals=None
                if intervals is None
                else {k: tuple(v) for k, v in intervals.items()},
                derived_intervals=derived_intervals or None,
                n_evals=int(raw.get("n_evals", 0)),
                perfectly_separated=bool(raw.get("perfectly_separated", False)),
                bootstrap_failures=int(raw.get("bootstrap_failures", 0)),
                label=str(raw.get("label", "")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"not a fit result document: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> "FitResult":
        with open(path, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(raw)


# -- fitting -------------------------------------------------------------------------------


@dataclass(frozen=True)
class _Optimum:
    t: np.ndarray
    nll: float
    converged: bool
    n_evals: int


def _seed_sequence(seed: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, stream])


def _check_fittable(data: CalledPitches) -> None:
    n = len(data)
    if n == 0:
        raise NoCalledPitchesError("dataset has no called pitches")
    if n < MIN_CALLED:
        raise TooFewPitchesError(f"{n} called pitches; at least {MIN_CALLED} needed")
    strikes = int(np.count_nonzero(data.sign > 0))
    if strikes == 0 or strikes == n:
        kind = "strikes" if strikes else "balls"
        raise PerfectSeparationError(f"all {n} called pitches are {kind}; zone is not identifiable")


def _minimize(data: CalledPitches, starts: list[np.ndarray], cfg: FitConfig, step) -> _Optimum:
    def objective(t):
        return data.nll(_unpack(_clip(t, cfg.beta_cap)))

    best = None
    any_converged = False
    n_evals = 0
    for start in starts:
        res = nelder_mead(objective, start, step=step, tol=cfg.tol, max_iter=cfg.max_iters)
        n_evals += res.n_evals
        any_converged |= res.converged
        if best is None or res.fun < best.fun:
            best = res
    # One restart from the winner guards against a collapsed simplex.
    polish = nelder_mead(objective, best.x, step=_POLISH_STEP, tol=cfg.tol, max_iter=cfg.max_iters)
    n_evals += polish.n_evals
    if polish.fun <= best.fun:
        best = polish
        any_converged |= polish.converged
    return _Optimum(_clip(best.x, cfg.beta_cap), float(best.fun), bool(any_converged), n_evals)


def _starts(cfg: FitConfig) -> list[np.ndarray]:
    base = to_transformed(RULEBOOK_START)
    rng = np.random.default_rng(_seed_sequence(cfg.seed, _STREAM_STARTS))
    starts = [base]
    for _ in range(cfg.n_starts - 1):
        starts.append(base + rng.uniform(-0.3, 0.3, size=base.size))
    return starts


def _is_capped(t: np.ndarray, beta_cap: float) -> bool:
    return bool(t[4] >= math.log(beta_cap) - 1e-12)


def _separates(p: ZoneParams, data: CalledPitches) -> bool:
    predicted = strike_probability(p, data.x, data.y) > 0.5
    return bool(np.array_equal(predicted, data.sign > 0))


def fit_point(data: CalledPitches, cfg: FitConfig) -> FitResult:
    """Point estimate only (no bootstrap) on pre-extracted called pitches."""
    _check_fittable(data)
    opt = _minimize(data, _starts(cfg), cfg, _STEP)
    params = ZoneParams(*_unpack(opt.t))
    capped = _is_capped(opt.t, cfg.beta_cap)
    separated = capped and _separates(params, data)
    if separated:
        warnings.warn(
            f"calls are perfectly separated; beta held at its cap {cfg.beta_cap:g}",
            PerfectSeparationWarning,
            stacklevel=3,
        )
    return FitResult(
        params=params,
        nll=opt.nll,
        converged=opt.converged,
        capped_beta=capped,
        n_pitches_used=len(data),
        config=cfg,
        n_evals=opt.n_evals,
        perfectly_separated=separated,
    )


def fit(d: Dataset, cfg: FitConfig = FitConfig(), label: str = "") -> FitResult:
    """Fit the zone model to the called pitches of ``d``.

    Runs ``cfg.n_starts`` Nelder-Mead searches (the rule-book start plus
    jittered copies), keeps the best, and attaches bootstrap intervals when
    ``cfg.n_bootstrap > 0``. Deterministic given ``cfg.seed``.
    """
    data = CalledPitches.from_dataset(d)
    result = fit_point(data, cfg)
    result.label = label
    if cfg.n_bootstrap > 0:
        boot = _bootstrap(data, cfg, result)
        result.intervals = boot.intervals
        result.derived_intervals = boot.derived_intervals
        result.bootstrap_failures = boot.failures
    return result


@dataclass(frozen=True)
class BootstrapIntervals:
    intervals: dict[str, tuple[float, float]]
    derived_intervals: dict[str, tuple[float, float]]
    replicates: np.ndarray
    failures: int


def _percentile_interval(values: np.ndarray, estimate: float) -> tuple[float, float]:
    lo, hi = np.percentile(values, [2.5, 97.5])
    # Percentile intervals can exclude the estimate under skew; widen to keep it inside.
    return float(min(lo, estimate)), float(max(hi, estimate))


def _derived_row(p: ZoneParams) -> list[float]:
    m = derived_metrics(p)
    return [m.width, m.height, m.center[0], m.center[1]]


def _bootstrap(data: CalledPitches, cfg: FitConfig, point: FitResult) -> BootstrapIntervals:
    n = len(data)
    children = _seed_sequence(cfg.seed, _STREAM_BOOTSTRAP).spawn(cfg.n_bootstrap)
    warm = to_transformed(point.params)
    rows = []
    failures = 0
    for child in children:
        rng = np.random.default_rng(child)
        counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
        keep = np.flatnonzero(counts)
        resample = CalledPitches(
            data.x[keep], data.y[keep], data.sign[keep], counts[keep].astype(np.float64)
        )
        try:
            strikes = resample.n_strikes
            if strikes == 0 or strikes == n:
                raise PerfectSeparationError("one-class resample")
            opt = _minimize(resample, [warm], cfg, _POLISH_STEP)
        except ZonefitError:
            failures += 1
            continue
        if not opt.converged:
            failures += 1
            continue
        p = ZoneParams(*_unpack(opt.t))
        rows.append(list(p.as_tuple()) + _derived_row(p))
    if failures > _MAX_FAILURE_RATE * cfg.n_bootstrap:
        raise BootstrapError(f"{failures} of {cfg.n_bootstrap} bootstrap refits failed")
    reps = np.array(rows)
    est = list(point.params.as_tuple()) + _derived_row(point.params)
    names = ZoneParams.NAMES + DERIVED_NAMES
    ivals = {name: _percentile_interval(reps[:, j], est[j]) for j, name in enumerate(names)}
    return BootstrapIntervals(
        intervals={k: ivals[k] for k in ZoneParams.NAMES},
        derived_intervals={k: ivals[k] for k in DERIVED_NAMES},
        replicates=reps,
        failures=failures,
    )


def bootstrap_intervals(
    d: Dataset, cfg: FitConfig, point: FitResult | None = None
) -> BootstrapIntervals | None:
    """Percentile intervals from ``cfg.n_bootstrap`` resample-and-refit replicates.

    Each replicate draws the called pitches with replacement (seeded from
    ``cfg.seed`` and the replicate index) and refits from the point estimate.
    Returns ``None`` when ``cfg.n_bootstrap == 0``.
    """
    if cfg.n_bootstrap == 0:
        return None
    data = CalledPitches.from_dataset(d)
    if point is None:
        point = fit_point(data, cfg)
    return _bootstrap(data, cfg, point)
