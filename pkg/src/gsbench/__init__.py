"""Interactive geosteering decision benchmark."""

__version__ = "0.1.0"
