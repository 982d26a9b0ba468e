import warnings

import pytest

from sswm.acceptance import AcceptanceContext


@pytest.fixture(scope="session")
def ctx():
    """Shared heavy artifacts (2048^2 oracle grids) for the whole session."""
    return AcceptanceContext()


@pytest.fixture(autouse=True)
def _quiet_regime_warnings():
    # regime-mismatch warnings are intentional advisories; tests that care
    # assert them explicitly with pytest.warns
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="parameters classify as")
        yield
