"""Monte Carlo toolkit for the contact process on random regular graphs
and on the infinite regular tree."""

__version__ = "0.1.0"
