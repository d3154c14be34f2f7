"""Optimal T-count synthesis for Clifford+T circuits.

Decides the minimum number of T gates needed to implement a given Clifford+T
circuit and produces a witness decomposition, either by exhaustive
meet-in-the-middle enumeration or by a parallel distinguished-point claw
search over the space of pi/4 Pauli-rotation sequences.
"""

__version__ = "0.1.0"
