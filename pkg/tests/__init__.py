# Test configuration
pytest_plugins = []
