"""Exception types shared across the package."""


class TopologyError(Exception):
    """No usable feature: empty barcode, failed lift, broken cocycle condition."""


class NumericalError(Exception):
    """Non-finite state or a violated runtime guard during optimization."""
