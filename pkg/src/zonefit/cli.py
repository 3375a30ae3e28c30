"""``zonefit`` command line.

Exit codes: 0 success, 1 internal error, 2 input or validation error.
Every command that writes files also writes ``manifest.json`` holding the
effective configuration, seed and input hashes.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import re
import sys
import warnings
from importlib import metadata
from pathlib import Path

from .analysis import (
    SIDES,
    RatioReport,
    ZoneBand,
    band_label,
    decision_pitch_mix,
    hit_attempt_ratio,
    per_umpire_fits,
    season_significance,
    strike_ratio,
)
from .data import (
    PITCH_TYPES,
    CsvSchema,
    DEFAULT_SCHEMA,
    FilterSpec,
    atomic_write_text,
    filter_dataset,
    load_csv,
    scan_csv,
    write_csv,
)
from .errors import EmptyCellError, EmptyContourError, InputError, ZonefitError
from .fit import DERIVED_NAMES, FitConfig, FitResult, fit
from .svg import contour_svg, heatmap_svg
from .synth import SynthConfig, generate
from .zone import (
    DEFAULT_EXTENT,
    DEFAULT_STEP,
    KBO_ZONE,
    Extent,
    ProbabilityGrid,
    contour,
    grid_difference,
    probability_grid,
)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "value"):
        return str(v.value)
    return str(v)


def _write_manifest(out: Path, command: str, config: dict, seed: int, inputs, outputs) -> None:
    manifest = {
        "tool": "zonefit",
        "version": _version(),
        "command": command,
        "seed": seed,
        "config": config,
        "inputs": {Path(p).name: _sha256(p) for p in inputs},
        "outputs": sorted(outputs),
    }
    atomic_write_text(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_schema(path) -> CsvSchema:
    return CsvSchema.from_json(path) if path else DEFAULT_SCHEMA


def _fit_config(args) -> FitConfig:
    cfg = FitConfig.from_json(args.config) if args.config else FitConfig()
    overrides = {"seed": args.seed}
    for name in ("n_starts", "n_bootstrap", "max_iters"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return cfg.replace(**overrides)


def _safe(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label) or "all"


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


# -- validate ------------------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        dataset, violations = scan_csv(args.input, _load_schema(args.schema))
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}")
        return EXIT_INPUT
    for v in violations:
        print(v)
    print(f"{len(violations)} violations ({dataset.row_count} clean rows)")
    if dataset.row_count == 0 and not violations:
        print("error: EmptyFileError: no data rows")
        return EXIT_INPUT
    return EXIT_INPUT if violations else EXIT_OK


# -- fit -----------------------------------------------------------------------------------

TREND_HEADER = ["group", "param", "estimate", "lo", "hi"]


def _trend_rows(result: FitResult):
    rows = []
    for name, value in result.params.to_dict().items():
        iv = (result.intervals or {}).get(name)
        rows.append([result.label, name, repr(value)] + ([repr(iv[0]), repr(iv[1])] if iv else ["", ""]))
    for name in DERIVED_NAMES:
        iv = (result.derived_intervals or {}).get(name)
        rows.append(
            [result.label, name, repr(result.derived[name])]
            + ([repr(iv[0]), repr(iv[1])] if iv else ["", ""])
        )
    return rows


def cmd_fit(args) -> int:
    cfg = _fit_config(args)
    dataset = load_csv(args.input, _load_schema(args.schema))
    out = Path(args.out)
    results: list[FitResult] = []
    errors: dict[str, str] = {}
    skipped = []
    if args.group_by == "umpire":
        fits = per_umpire_fits(dataset, args.min_called, cfg, on_error="collect")
        results = [fits.fits[k] for k in sorted(fits.fits)]
        errors = {f"{u}-{s}": msg for (u, s), msg in sorted(fits.failed.items())}
        skipped = fits.skipped
    else:
        if args.group_by == "season":
            groups = [
                (str(s), filter_dataset(dataset, FilterSpec(seasons={int(s)})))
                for s in sorted(set(dataset.season.tolist()))
            ]
        else:
            groups = [("all", dataset)]
        for label, part in groups:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    results.append(fit(part, cfg, label=label))
            except ZonefitError as exc:
                errors[label] = f"{type(exc).__name__}: {exc}"

    outputs = []
    trend = []
    for result in results:
        name = f"fit_{_safe(result.label)}.json"
        atomic_write_text(out / name, result.to_json())
        outputs.append(name)
        trend.extend(_trend_rows(result))
        if result.capped_beta:
            _warn(f"group {result.label}: beta reached its cap {cfg.beta_cap:g}")
    atomic_write_text(out / "params_trend.csv", _csv_text(TREND_HEADER, trend))
    outputs.append("params_trend.csv")
    if args.group_by == "umpire":
        atomic_write_text(
            out / "skipped.csv",
            _csv_text(["umpire_id", "season", "n_called"], [list(map(str, s)) for s in skipped]),
        )
        outputs.append("skipped.csv")
        for u, s, n in skipped:
            _warn(f"skipped umpire {u} season {s}: {n} called pitches < {args.min_called}")
    for label, msg in errors.items():
        _warn(f"group {label} failed: {msg}")
    config = {
        "group_by": args.group_by,
        "min_called": args.min_called,
        "fit": cfg.to_dict(),
        "errors": errors,
    }
    _write_manifest(out, "fit", config, args.seed, [args.input], outputs)
    print(f"fitted {len(results)} group(s), {len(errors)} failed, {len(skipped)} skipped")
    return EXIT_INPUT if errors or not results else EXIT_OK


# -- contour -------------------------------------------------------------------------------


def _levels(text: str) -> list[float]:
    try:
        levels = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"bad --levels {text!r}") from None
    if not levels or not all(0 < v < 1 for v in levels):
        raise InputError("levels must lie in (0, 1)")
    return levels


def cmd_contour(args) -> int:
    result = FitResult.from_json(args.fit)
    levels = _levels(args.levels)
    extent = Extent.parse(args.extent) if args.extent else DEFAULT_EXTENT
    curves = []
    rows = []
    skipped = []
    for level in levels:
        try:
            pts = contour(result.params, level, args.n)
        except EmptyContourError as exc:
            _warn(f"level {level} skipped: {exc}")
            skipped.append(level)
            continue
        curves.append((f"p = {level:g}", pts))
        rows.extend([repr(level), str(i), repr(float(x)), repr(float(y))] for i, (x, y) in enumerate(pts))
    out = Path(args.out)
    title = f"Strike-zone contours {result.label}".strip()
    atomic_write_text(out / "contour.svg", contour_svg(curves, KBO_ZONE, extent, title))
    atomic_write_text(out / "contour.csv", _csv_text(["level", "vertex", "x", "y"], rows))
    config = {"levels": levels, "n": args.n, "skipped_levels": skipped, "extent": vars(extent)}
    _write_manifest(out, "contour", config, args.seed, [args.fit], ["contour.svg", "contour.csv"])
    print(f"{len(curves)} contour(s) written, {len(skipped)} skipped")
    return EXIT_OK


# -- compare -------------------------------------------------------------------------------


def _grid_for(path, args, extent, step) -> tuple[ProbabilityGrid, str]:
    path = Path(path)
    if path.suffix == ".json":
        result = FitResult.from_json(path)
        return probability_grid(result.params, extent, step), result.label or path.stem
    text = path.read_text(encoding="utf-8")
    if text.startswith("# extent="):
        return ProbabilityGrid.from_csv(text), path.stem
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = fit(load_csv(path, _load_schema(args.schema)), _fit_config(args), label=path.stem)
    return probability_grid(result.params, extent, step), path.stem


def cmd_compare(args) -> int:
    extent = Extent.parse(args.extent) if args.extent else DEFAULT_EXTENT
    grid_a, label_a = _grid_for(args.a, args, extent, args.step)
    grid_b, label_b = _grid_for(args.b, args, extent, args.step)
    diff = grid_difference(grid_a, grid_b)
    out = Path(args.out)
    atomic_write_text(out / "grid_a.csv", grid_a.to_csv())
    atomic_write_text(out / "grid_b.csv", grid_b.to_csv())
    atomic_write_text(out / "difference.csv", diff.to_csv())
    title = f"P(strike): {label_a} minus {label_b}"
    atomic_write_text(out / "difference.svg", heatmap_svg(diff, KBO_ZONE, title))
    config = {"extent": vars(extent), "step": args.step, "a": label_a, "b": label_b}
    outputs = ["grid_a.csv", "grid_b.csv", "difference.csv", "difference.svg"]
    _write_manifest(out, "compare", config, args.seed, [args.a, args.b], outputs)
    print(f"difference range [{diff.values.min():.4f}, {diff.values.max():.4f}]")
    return EXIT_OK


# -- zones / attempts / mix -------------------------------------------------------------


def _band_selectors(text: str):
    if text == "all":
        return [*ZoneBand] + list(SIDES.values())
    selectors = []
    for token in text.split(","):
        token = token.strip()
        if token in SIDES:
            selectors.append(SIDES[token])
            continue
        try:
            selectors.append(ZoneBand(token))
        except ValueError:
            raise InputError(f"unknown band {token!r}") from None
    return selectors


def _group_by(text: str) -> list[str]:
    aliases = {"hand": "batter_hand", "umpire": "umpire_id", "type": "pitch_type"}
    keys = [aliases.get(k.strip(), k.strip()) for k in text.split(",") if k.strip()]
    for k in keys:
        if k not in ("season", "pitch_type", "batter_hand", "umpire_id"):
            raise InputError(f"unknown group key {k!r}")
    return keys


def _ratio_rows(reports: list[RatioReport], keys: list[str]):
    for r in reports:
        yield [r.label] + [_fmt(r.key(k)) for k in keys] + [
            str(r.n),
            str(r.k),
            repr(r.ratio),
            repr(r.interval[0]),
            repr(r.interval[1]),
        ]


def _ratio_command(args, command: str, op) -> int:
    dataset = load_csv(args.input, _load_schema(args.schema))
    keys = _group_by(args.group_by)
    reports = []
    for selector in _band_selectors(args.band):
        reports.extend(op(dataset, selector, keys))
    out = Path(args.out)
    header = ["band"] + keys + ["n", "k", "ratio", "lo", "hi"]
    atomic_write_text(out / f"{command}.csv", _csv_text(header, _ratio_rows(reports, keys)))
    outputs = [f"{command}.csv"]
    if "season" in keys:
        sig = season_significance(reports)
        rest = [k for k in keys if k != "season"]
        sig_rows = [
            [row["band"]]
            + [_fmt(dict(row["cell"])[k]) for k in rest]
            + [
                str(row["season_a"]),
                str(row["season_b"]),
                repr(row["ratio_a"]),
                repr(row["ratio_b"]),
                repr(row["z"]),
                repr(row["p_value"]),
                str(row["degenerate"]).lower(),
            ]
            for row in sig
        ]
        sig_header = ["band"] + rest + ["season_a", "season_b", "ratio_a", "ratio_b", "z", "p_value", "degenerate"]
        atomic_write_text(out / f"{command}_significance.csv", _csv_text(sig_header, sig_rows))
        outputs.append(f"{command}_significance.csv")
    config = {"band": args.band, "group_by": keys}
    _write_manifest(out, command, config, args.seed, [args.input], outputs)
    print(f"{len(reports)} non-empty cell(s)")
    return EXIT_OK


def cmd_zones(args) -> int:
    return _ratio_command(args, "zones", strike_ratio)


def cmd_attempts(args) -> int:
    return _ratio_command(args, "attempts", hit_attempt_ratio)


def cmd_mix(args) -> int:
    dataset = load_csv(args.input, _load_schema(args.schema))
    seasons = sorted(set(dataset.season.tolist())) if args.by_season else [None]
    rows = []
    empty = []
    for selector in _band_selectors(args.band):
        for season in seasons:
            part = dataset if season is None else filter_dataset(dataset, FilterSpec(seasons={season}))
            label = band_label(selector)
            try:
                mix = decision_pitch_mix(part, selector)
            except EmptyCellError:
                empty.append(f"{label}/{season if season is not None else 'all'}")
                continue
            for t in PITCH_TYPES:
                rows.append(
                    [label, "all" if season is None else str(season), t.value, str(mix.counts[t]), str(mix.n), repr(mix.frequencies[t])]
                )
    for cell in empty:
        _warn(f"no 2-2 pitches in {cell}")
    out = Path(args.out)
    header = ["band", "season", "pitch_type", "count", "n", "frequency"]
    atomic_write_text(out / "mix.csv", _csv_text(header, rows))
    config = {"band": args.band, "by_season": args.by_season, "empty_cells": empty}
    _write_manifest(out, "mix", config, args.seed, [args.input], ["mix.csv"])
    print(f"{len(rows) // len(PITCH_TYPES)} mix table(s), {len(empty)} empty")
    return EXIT_OK


# -- simulate ------------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    raw["seed"] = args.seed
    if args.n is not None:
        raw["n"] = args.n
    cfg = SynthConfig.from_dict(raw)
    dataset = generate(cfg)
    out = Path(args.out)
    write_csv(dataset, out / "synthetic.csv")
    _write_manifest(out, "simulate", cfg.to_dict(), cfg.seed, [args.config], ["synthetic.csv"])
    print(f"{dataset.row_count} pitches written")
    return EXIT_OK


# -- parser --------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness (default 0)")
    common.add_argument("--schema", help="JSON column/enum mapping for foreign CSV exports")

    parser = argparse.ArgumentParser(
        prog="zonefit", description="Superellipse strike-zone fitting and gray-zone analysis"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a pitch CSV")
    p.add_argument("input")
    p.set_defaults(func=cmd_validate)

    def fit_options(p):
        p.add_argument("--config", help="FitConfig JSON; flags override it")
        p.add_argument("--n-starts", dest="n_starts", type=int)
        p.add_argument("--n-bootstrap", dest="n_bootstrap", type=int)
        p.add_argument("--max-iters", dest="max_iters", type=int)

    p = sub.add_parser("fit", parents=[common], help="fit zone parameters per group")
    p.add_argument("input")
    p.add_argument("--group-by", choices=["season", "umpire", "none"], default="season")
    p.add_argument("--min-called", type=int, default=50)
    p.add_argument("--out", required=True)
    fit_options(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("contour", parents=[common], help="contours of a fitted zone")
    p.add_argument("fit")
    p.add_argument("--levels", default="0.1,0.25,0.5,0.75,0.9")
    p.add_argument("--n", type=int, default=256, help="vertices per contour")
    p.add_argument("--extent", help="x_min,x_max,y_min,y_max in ft")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_contour)

    p = sub.add_parser("compare", parents=[common], help="probability difference A - B")
    p.add_argument("a", help="fit JSON, grid CSV or pitch CSV")
    p.add_argument("b", help="fit JSON, grid CSV or pitch CSV")
    p.add_argument("--extent", help="x_min,x_max,y_min,y_max in ft")
    p.add_argument("--step", type=float, default=DEFAULT_STEP)
    p.add_argument("--out", required=True)
    fit_options(p)
    p.set_defaults(func=cmd_compare)

    for name, func, help_text in (
        ("zones", cmd_zones, "strike ratios per band and group"),
        ("attempts", cmd_attempts, "hit-attempt ratios per band and group"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("input")
        p.add_argument("--band", default="all")
        p.add_argument("--group-by", default="season")
        p.add_argument("--out", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("mix", parents=[common], help="pitch-type mix of 2-2 pitches per band")
    p.add_argument("input")
    p.add_argument("--band", default="all")
    p.add_argument("--by-season", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic pitch CSV")
    p.add_argument("config", help="SynthConfig JSON")
    p.add_argument("--n", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
