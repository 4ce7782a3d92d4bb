class ConfigurationError(ValueError):
    """Invalid run configuration or scenario description.

    The message names the offending field; the CLI maps this to exit code 1.
    """
