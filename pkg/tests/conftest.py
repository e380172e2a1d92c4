import pytest

from glocal import OracleAnalyst, make_toy, run_session, start_session

# the acceptance tests append their verdict lines here; printing happens
# in the terminal summary, outside pytest's output capture
acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if not acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_lines:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def toy_ds():
    return make_toy(seed=0)


@pytest.fixture(scope="session")
def primed_toy(toy_ds):
    """Primed toy session, no feedback yet. Shared read-only; tests that
    label or retrain must build their own."""
    return start_session(toy_ds, n_members=4, budget=30, seed=0)


@pytest.fixture(scope="session")
def trained_toy(toy_ds):
    """Toy session after the full 30-label oracle run. Read-only."""
    state = start_session(toy_ds, n_members=4, budget=30, seed=0)
    return run_session(state, OracleAnalyst(toy_ds))
