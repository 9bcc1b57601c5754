"""Bearing-only visual SLAM on SE(3) via a dynamic extension, DREM-based
landmark estimation and a gradient-flow pose observer, with a robocentric
Kalman filter baseline and a deterministic simulation harness."""

__version__ = "0.1.0"
