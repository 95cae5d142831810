from __future__ import annotations

from dataclasses import replace

import pytest
from hypothesis import HealthCheck, settings

from qubitsynth.config import EnvelopeParams, RenderConfig

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def make_render_config(**overrides) -> RenderConfig:
    """Defaults tuned for tests: sustained notes so buffers stay analyzable."""
    config = RenderConfig(envelope=EnvelopeParams(infinite_sustain=True))
    if overrides:
        config = replace(config, **overrides)
    return config


MINIMAL_CONFIG_TEXT = """\
# minimal valid session config
sample_rate = 48000
block_size = 256
rotation_cc_a = 11
rotation_cc_b = 1
axis_switch_cc = 80
measure_cc = 82
classical_gain_cc = 7
quantum_gain_cc = 8
"""


@pytest.fixture
def minimal_config_text() -> str:
    return MINIMAL_CONFIG_TEXT
