class PlotDataError(ValueError):
    """A CSV artifact is missing, malformed, or lacks a required column."""
