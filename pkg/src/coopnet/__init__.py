"""Critical benefit-to-cost ratios for cooperation on graphs."""

__version__ = "0.1.0"
