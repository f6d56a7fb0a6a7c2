def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 256x256 runs and large randomized suites")
