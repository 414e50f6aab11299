"""Process tomography with imperfect, possibly correlated preparators."""

__version__ = "0.1.0"
