import pytest


@pytest.fixture
def state_dir(tmp_path, monkeypatch):
    """Isolated calibration-state directory for CLI tests."""
    d = tmp_path / "state"
    monkeypatch.setenv("BBECHO_STATE_DIR", str(d))
    return d
