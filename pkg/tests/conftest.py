import hypothesis
import pytest

from levyspde.studies import preset_studies, run_study

hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.load_profile("ci")

_RESULTS: dict = {}


@pytest.fixture(scope="session")
def preset_result():
    """Run a shipped preset once per session and cache the result."""

    def get(name: str):
        if name not in _RESULTS:
            _RESULTS[name] = run_study(preset_studies()[name])
        return _RESULTS[name]

    return get
