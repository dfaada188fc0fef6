import clubcascade


def pytest_configure(config):
    clubcascade.set_warnings_enabled(False)
