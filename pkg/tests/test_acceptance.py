"""Acceptance criteria, each run at its stated tolerance.

A PASS/FAIL line per criterion is printed in the pytest terminal summary.
Criterion 8 needs the released league dataset; point ``ZONEFIT_KBO_DATA`` at
its CSV to run it.
"""

import os
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from zonefit.analysis import (
    ZoneBand,
    band_mask,
    classify_band,
    decision_pitch_mix,
    hit_attempt_ratio,
    jeffreys_interval,
    strike_ratio,
)
from zonefit.cli import main
from zonefit.data import BatterHand, Dataset, FilterSpec, PitchType, filter_dataset, load_csv, write_csv
from zonefit.fit import FitConfig, fit
from zonefit.synth import LabelMode, SynthConfig, SynthMetadata, generate
from zonefit.zone import (
    KBO_ZONE,
    Call,
    ZoneParams,
    contour,
    contour_radius,
    grid_difference,
    probability_grid,
    rulebook_call,
    strike_probability,
)

from oracles import brute_attempt_ratio, brute_mix, brute_strike_ratio, jeffreys_oracle, oracle_bands

TRUE = ZoneParams(x0=0.0, y0=2.5, alpha=0.9, lam=1.11, beta=20.0, r=8.0)
LEVELS = (0.1, 0.25, 0.5, 0.75, 0.9)


# -- 1. parameter recovery ----------------------------------------------------------------


def _within_tolerance(p: ZoneParams) -> dict[str, bool]:
    return {
        "x0": abs(p.x0 - TRUE.x0) <= 0.02,
        "y0": abs(p.y0 - TRUE.y0) <= 0.02,
        "alpha": abs(p.alpha - TRUE.alpha) <= 0.02,
        "lambda": abs(p.lam / TRUE.lam - 1) <= 0.02,
        "beta": abs(p.beta / TRUE.beta - 1) <= 0.15,
        "r": abs(p.r / TRUE.r - 1) <= 0.25,
    }


@pytest.mark.acceptance(1, "parameter recovery on 50k synthetic pitches, >= 9/10 seeds, < 60 s per fit")
def test_parameter_recovery(record_property):
    ok_seeds = 0
    slowest = 0.0
    misses = []
    for seed in range(10):
        d = generate(SynthConfig(TRUE, n=50000, seed=seed))
        start = time.perf_counter()
        res = fit(d, FitConfig(n_bootstrap=0, seed=seed))
        elapsed = time.perf_counter() - start
        slowest = max(slowest, elapsed)
        checks = _within_tolerance(res.params)
        if all(checks.values()) and elapsed < 60:
            ok_seeds += 1
        else:
            misses.append((seed, [k for k, v in checks.items() if not v], round(elapsed, 1)))
    record_property("detail", f"{ok_seeds}/10 seeds within tolerance, slowest fit {slowest:.1f} s")
    assert ok_seeds >= 9, misses
    assert slowest < 60


# -- 2. rectilinearity ordering ------------------------------------------------------------


@pytest.mark.acceptance(2, "rule-book fits have larger beta and r than beta_true=5 fits, 10/10 seeds")
def test_rectilinearity_ordering(record_property):
    human = ZoneParams(0.0, 2.5, 0.9, 1.11, 5.0, 8.0)
    wins = 0
    worst = []
    for seed in range(10):
        cfg = FitConfig(n_bootstrap=0, seed=seed)
        robot_d = generate(SynthConfig(TRUE, n=20000, seed=100 + seed, label_mode=LabelMode.RULEBOOK))
        human_d = generate(SynthConfig(human, n=20000, seed=200 + seed))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            robot = fit(robot_d, cfg).params
        person = fit(human_d, cfg).params
        if robot.beta > person.beta and robot.r > person.r:
            wins += 1
        worst.append((robot.beta / person.beta, robot.r / person.r))
    ratios = np.array(worst)
    record_property(
        "detail",
        f"{wins}/10 seeds; min beta ratio {ratios[:, 0].min():.1f}, min r ratio {ratios[:, 1].min():.2f}",
    )
    assert wins == 10


# -- 3. contour consistency ----------------------------------------------------------------


def _inside_polygon(px, py, poly):
    """Even-odd ray casting, vectorized over query points."""
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    inside = np.zeros(px.shape, dtype=bool)
    for x1, y1, x2, y2 in zip(x, y, xn, yn):
        crosses = (y1 > py) != (y2 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (px < xc)
    return inside


def _random_params(rng) -> ZoneParams:
    return ZoneParams(
        x0=rng.uniform(-0.5, 0.5),
        y0=rng.uniform(2.0, 3.0),
        alpha=rng.uniform(0.3, 1.5),
        lam=rng.uniform(0.6, 1.8),
        beta=float(np.exp(rng.uniform(np.log(2.0), np.log(1e4)))),
        r=float(np.exp(rng.uniform(0.0, np.log(64.0)))),
    )


@pytest.mark.acceptance(3, "contour vertices within 1e-9 of their level; nested for every level pair")
def test_contour_consistency(record_property):
    rng = np.random.default_rng(2024)
    worst = 0.0
    n_curves = 0
    n_empty = 0
    for _ in range(100):
        p = _random_params(rng)
        curves = {}
        for level in LEVELS:
            if contour_radius(p, level) <= 0:
                n_empty += 1
                continue
            pts = contour(p, level)
            vals = strike_probability(p, pts[:, 0], pts[:, 1])
            worst = max(worst, float(np.max(np.abs(vals - level))))
            curves[level] = pts
            n_curves += 1
        present = sorted(curves)
        for i, lo in enumerate(present):
            for hi in present[i + 1:]:
                inner = curves[hi]
                # every vertex of the higher level lies strictly inside the lower one
                assert np.all(strike_probability(p, inner[:, 0], inner[:, 1]) > lo)
                assert np.all(_inside_polygon(inner[:, 0], inner[:, 1], curves[lo]))
                assert contour_radius(p, hi) < contour_radius(p, lo)
    record_property("detail", f"{n_curves} curves, {n_empty} unreachable levels, max error {worst:.2e}")
    assert worst < 1e-9


# -- 4. interval oracles -------------------------------------------------------------------


@pytest.mark.acceptance("4a", "Jeffreys interval matches a Beta bisection oracle within 1e-8 for all n <= 200")
def test_jeffreys_exhaustive(record_property):
    ks, ns = zip(*[(k, n) for n in range(1, 201) for k in range(n + 1)])
    lo_o, hi_o = jeffreys_oracle(ks, ns)
    got = np.array([jeffreys_interval(k, n) for k, n in zip(ks, ns)])
    err = max(np.max(np.abs(got[:, 0] - lo_o)), np.max(np.abs(got[:, 1] - hi_o)))
    record_property("detail", f"{len(ks)} (k, n) pairs, max error {err:.2e}")
    assert err < 1e-8


@pytest.mark.slow
@pytest.mark.acceptance("4b", "bootstrap intervals cover the true parameters in >= 90% of 50 trials at n=20k")
def test_bootstrap_coverage(record_property):
    truth = TRUE.to_dict()
    hits = {k: 0 for k in truth}
    trials = 50
    for trial in range(trials):
        d = generate(SynthConfig(TRUE, n=20000, seed=5000 + trial))
        res = fit(d, FitConfig(seed=trial))
        for name, value in truth.items():
            lo, hi = res.intervals[name]
            hits[name] += lo <= value <= hi
    coverage = {k: v / trials for k, v in hits.items()}
    record_property("detail", ", ".join(f"{k} {v:.0%}" for k, v in coverage.items()))
    assert all(c >= 0.90 for c in coverage.values()), coverage


# -- 5. band correctness -------------------------------------------------------------------


@pytest.mark.acceptance(5, "0.01 ft grid scan: band 1 strikes, band 2 balls, mirror symmetry, 0.25 ft widths")
def test_band_grid_scan(record_property):
    xs = np.arange(-300, 301) / 100.0
    ys = np.arange(0, 501) / 100.0
    gx, gy = np.meshgrid(xs, ys)
    gx, gy = gx.ravel(), gy.ravel()
    right = np.zeros(gx.size, dtype=bool)
    strike = np.array([rulebook_call(KBO_ZONE, a, b) is Call.STRIKE for a, b in zip(gx, gy)])
    scalar_r = [classify_band(a, b, BatterHand.RIGHT) for a, b in zip(gx, gy)]
    scalar_l = [classify_band(a, b, BatterHand.LEFT) for a, b in zip(gx, gy)]
    mirrored = {(a, b): s for a, b, s in zip(gx, gy, scalar_r)}
    for a, b, s in zip(gx, gy, scalar_l):
        assert s == mirrored[(-a if a != 0 else 0.0, b)]
    widths = {}
    for band in ZoneBand:
        mask = band_mask(band, gx, gy, right)
        assert np.array_equal(mask, [band in s for s in scalar_r])
        assert np.array_equal(mask, [band.value in oracle_bands(a, b, False) for a, b in zip(gx, gy)])
        assert np.all(strike[mask]) if band.inside else not np.any(strike[mask])
        # width across the strip: along x=0 for horizontal bands, y=2.5 for vertical ones
        if band.side in ("High", "Low"):
            line = gy[mask & (gx == 0.0)]
        else:
            line = gx[mask & (gy == 2.5)]
        widths[band.value] = round((line.max() - line.min()) + 0.01, 10)
    record_property("detail", f"{gx.size} grid points per hand; widths {sorted(set(float(v) for v in widths.values()))}")
    assert set(widths.values()) == {0.25}, widths


# -- 6. analysis oracles -------------------------------------------------------------------


def _random_dataset(seed: int) -> Dataset:
    types = {t: 1 / len(PitchType) for t in PitchType}
    parts = []
    for i, season in enumerate((2023, 2024)):
        meta = SynthMetadata(season=season, pitch_type_mix=types, swing_prob=0.45)
        params = ZoneParams(0.0, 2.5, 0.9, 1.11, 8.0 + 10 * i, 4.0)
        parts.append(generate(SynthConfig(params, n=500, seed=seed * 10 + i, metadata=meta)))
    return Dataset.concat(parts)


@pytest.mark.acceptance(6, "strike_ratio, hit_attempt_ratio and decision_pitch_mix equal brute-force recounts")
def test_analysis_oracles(record_property):
    selectors = list(ZoneBand) + [(ZoneBand.HIGH1, ZoneBand.HIGH2), (ZoneBand.IN1, ZoneBand.IN2)]
    groupings = [(), ("season",), ("season", "pitch_type"), ("batter_hand",)]
    checked = 0
    for seed in range(5):
        d = _random_dataset(seed)
        assert d.row_count == 1000
        pitches = d.pitches
        for sel in selectors:
            names = {sel.value} if isinstance(sel, ZoneBand) else {b.value for b in sel}
            for keys in groupings:
                def group(p, keys=keys):
                    return tuple(getattr(p, k) for k in keys)

                for op, brute in ((strike_ratio, brute_strike_ratio), (hit_attempt_ratio, brute_attempt_ratio)):
                    n, k = brute(pitches, names, group)
                    got = {tuple(v for _, v in r.group_key): (r.n, r.k) for r in op(d, sel, keys)}
                    assert got == {key: (n[key], k[key]) for key in n}
                    checked += 1
            tally = brute_mix(pitches, names)
            if tally:
                mix = decision_pitch_mix(d, sel)
                assert {t.value: c for t, c in mix.counts.items() if c} == dict(tally)
                assert mix.n == sum(tally.values())
                checked += 1
    record_property("detail", f"{checked} tables compared exactly over 5 datasets of 1000 pitches")


# -- 7. determinism ------------------------------------------------------------------------


def _run_twice(tmp_path: Path, name: str, argv: list[str]) -> list[str]:
    outputs = []
    for copy in ("a", "b"):
        out = tmp_path / name / copy
        assert main(argv + ["--out", str(out)]) == 0, argv
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outputs[0] == outputs[1], name
    return sorted(outputs[0])


@pytest.mark.acceptance(7, "every CLI command run twice with the same manifest gives byte-identical outputs")
def test_cli_determinism(tmp_path, record_property, capsys):
    import json

    cfg = {"true_params": TRUE.to_dict(), "n": 3000, "metadata": {"swing_prob": 0.3}}
    (tmp_path / "synth.json").write_text(json.dumps(cfg))
    files = {}
    files["simulate"] = _run_twice(tmp_path, "simulate", ["simulate", str(tmp_path / "synth.json"), "--seed", "7"])
    data = tmp_path / "simulate" / "a" / "synthetic.csv"
    files["fit"] = _run_twice(tmp_path, "fit", ["fit", str(data), "--seed", "3", "--n-bootstrap", "20"])
    fit_json = tmp_path / "fit" / "a" / "fit_2024.json"
    files["contour"] = _run_twice(tmp_path, "contour", ["contour", str(fit_json)])
    files["compare"] = _run_twice(tmp_path, "compare", ["compare", str(fit_json), str(data), "--seed", "3", "--n-bootstrap", "0"])
    for cmd in ("zones", "attempts"):
        files[cmd] = _run_twice(tmp_path, cmd, [cmd, str(data), "--group-by", "season,type"])
    files["mix"] = _run_twice(tmp_path, "mix", ["mix", str(data)])
    stdout = []
    for _ in range(2):
        capsys.readouterr()
        assert main(["validate", str(data)]) == 0
        stdout.append(capsys.readouterr().out)
    assert stdout[0] == stdout[1]
    n_files = sum(len(v) for v in files.values())
    record_property("detail", f"8 commands, {n_files} output files compared byte for byte")


# -- 8. dataset-conditional ------------------------------------------------------------------

KBO_DATA = os.environ.get("ZONEFIT_KBO_DATA")


def _pct(d, band, season, pitch_type=None):
    spec = FilterSpec(seasons={season}, pitch_types=None if pitch_type is None else {pitch_type})
    reports = strike_ratio(filter_dataset(d, spec), band)
    return 100.0 * reports[0].ratio


@pytest.mark.skipif(not KBO_DATA, reason="set ZONEFIT_KBO_DATA to the released league CSV")
@pytest.mark.acceptance(8, "published league figures (needs the released dataset)")
def test_published_figures(record_property):
    d = load_csv(KBO_DATA)
    targets = [
        (ZoneBand.LOW1, None, 2023, 54.43),
        (ZoneBand.LOW1, None, 2024, 68.83),
        (ZoneBand.LOW2, None, 2023, 10.49),
        (ZoneBand.LOW2, None, 2024, 0.58),
        (ZoneBand.LOW2, PitchType.FOUR_SEAM, 2023, 13.71),
        (ZoneBand.LOW2, PitchType.FOUR_SEAM, 2024, 1.08),
    ]
    errors = []
    for band, ptype, season, want in targets:
        got = _pct(d, band, season, ptype)
        errors.append(abs(got - want))
        assert abs(got - want) <= 0.5, (band, ptype, season, got, want)
    fits = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for season in sorted(set(d.season.tolist())):
            fits[season] = fit(filter_dataset(d, FilterSpec(seasons={season})), FitConfig(n_bootstrap=0)).params
    others = [p for s, p in fits.items() if s != 2024]
    assert all(fits[2024].beta > p.beta and fits[2024].r > p.r for p in others)
    diff = grid_difference(probability_grid(fits[2024]), probability_grid(fits[2023]))
    xs, ys = diff.x_centers, diff.y_centers
    above = diff.values[np.ix_((ys > 3.4) & (ys < 3.8), np.abs(xs) < 0.6)]
    flanks = diff.values[np.ix_((ys > 2.0) & (ys < 3.0), (np.abs(xs) > 0.9) & (np.abs(xs) < 1.3))]
    assert above.mean() > 0 and flanks.mean() < 0
    record_property("detail", f"max ratio error {max(errors):.2f} pp; 2024 has the largest beta and r")
