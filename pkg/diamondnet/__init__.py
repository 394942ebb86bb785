"""diamondnet - Capacity bounds and bursty amplify-and-forward rates for diamond networks."""

__version__ = "0.1.0"
