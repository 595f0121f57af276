"""
SLA Reconciliation Simulator
Polar-code information reconciliation for QKD with an LDPC acknowledgment phase.
"""

__version__ = "1.0.0"
__author__ = "SLA Reconciliation Team"
