import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from neuroassist import signals

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def make_recording(n_trials=4, n_channels=3, n_times=50, fs=250.0, n_classes=2, seed=0,
                   onset_s=0.0):
    rng = np.random.default_rng(seed)
    trials = [signals.Trial(rng.normal(size=(n_channels, n_times)), i % n_classes, onset_s)
              for i in range(n_trials)]
    return signals.EegRecording(fs, [f"ch{i}" for i in range(n_channels)], trials,
                                [f"class{c}" for c in range(n_classes)])


@pytest.fixture
def small_recording():
    return make_recording()


@pytest.fixture(scope="session")
def synthetic_4class():
    """Default 8-channel, 4-class planted-source recording with ground truth."""
    spec = signals.default_synthetic_spec(trials_per_class=30, seed=3)
    return signals.generate_synthetic(spec)


def pytest_configure(config):
    config.acceptance_lines = {}


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "acceptance_lines", {})
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
