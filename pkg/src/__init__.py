"""MFEA-RL - multifactorial neuroevolution of classic-control policies."""

__version__ = "0.1.0"
