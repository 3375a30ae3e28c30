from __future__ import annotations

import pytest

from zonefit.data import BatterHand, Dataset, Outcome, Pitch, PitchType
from zonefit.synth import LabelMode, SynthConfig, SynthMetadata, generate
from zonefit.zone import ZoneParams

TRUE_PARAMS = ZoneParams(x0=0.0, y0=2.5, alpha=0.9, lam=1.11, beta=20.0, r=8.0)


def make_pitch(**overrides) -> Pitch:
    fields = dict(
        season=2023,
        game_id="G1",
        umpire_id="U1",
        pitcher_id="P1",
        batter_id="B1",
        batter_hand=BatterHand.RIGHT,
        pitch_type=PitchType.FOUR_SEAM,
        x=0.0,
        y=2.5,
        balls=0,
        strikes=0,
        outcome=Outcome.CALLED_STRIKE,
    )
    fields.update(overrides)
    return Pitch(**fields)


@pytest.fixture
def pitch_factory():
    return make_pitch


@pytest.fixture(scope="session")
def mixed_dataset() -> Dataset:
    """2,000 pitches with swings, several types, both hands and all counts."""
    meta = SynthMetadata(
        season=2023,
        pitch_type_mix={
            PitchType.FOUR_SEAM: 0.3,
            PitchType.SLIDER: 0.2,
            PitchType.CHANGEUP: 0.15,
            PitchType.CURVEBALL: 0.15,
            PitchType.FORKBALL: 0.1,
            PitchType.TWO_SEAM: 0.05,
            PitchType.OTHER: 0.05,
        },
        swing_prob=0.4,
    )
    cfg = SynthConfig(TRUE_PARAMS, n=2000, seed=11, metadata=meta)
    return generate(cfg)


@pytest.fixture(scope="session")
def synthetic_20k() -> Dataset:
    return generate(SynthConfig(TRUE_PARAMS, n=20000, seed=3))


@pytest.fixture(scope="session")
def rulebook_5k() -> Dataset:
    return generate(
        SynthConfig(TRUE_PARAMS, n=5000, seed=5, label_mode=LabelMode.RULEBOOK)
    )


# -- acceptance reporting -----------------------------------------------------------
# Tests marked ``acceptance(n, title)`` get one PASS/FAIL line each in the
# terminal summary, with whatever detail they recorded via ``record_property``.

_ACCEPTANCE: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        number, title = marker.args
        if call.excinfo is None:
            status = "PASS"
        elif call.excinfo.errisinstance(pytest.skip.Exception):
            status = "SKIP"
        else:
            status = "FAIL"
        detail = "; ".join(f"{v}" for k, v in item.user_properties if k == "detail")
        _ACCEPTANCE[item.nodeid] = [number, title, status, detail]


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, detail in sorted(_ACCEPTANCE.values(), key=lambda r: str(r[0])):
        line = f"[{status}] criterion {number}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
