"""Classical simulation of ancilla-qubit vibronic spectroscopy on a bosonic mode."""

__version__ = "0.1.0"
