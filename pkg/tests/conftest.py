import pytest

from videotexture.pipeline import CACHE_ENV_VAR


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    """Keep the analysis cache inside each test's tmp directory."""
    cache = tmp_path / "cache"
    monkeypatch.setenv(CACHE_ENV_VAR, str(cache))
    return cache
