"""Laws of Bessel processes and hyperbolic Brownian motion run on random clocks."""

__version__ = "0.1.0"
