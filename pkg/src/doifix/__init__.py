"""Invalid DOI detection, cleaning and publisher attribution."""

__version__ = "0.1.0"
