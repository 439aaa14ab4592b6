"""Simulation and analysis toolkit for an electrically injected AlGaAs photon-pair source."""

__version__ = "0.1.0"
