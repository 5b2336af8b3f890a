class KagomeLabError(Exception):
    pass


class ConfigError(KagomeLabError, ValueError):
    """Bad configuration, lattice, layout or run-config file."""


class UnsupportedHamiltonianError(KagomeLabError, ValueError):
    pass


class CalibrationError(KagomeLabError, RuntimeError):
    pass
