"""Page ranking for e-commerce catalogs from mined web logs."""

__version__ = "0.1.0"
