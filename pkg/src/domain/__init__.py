"""
Domain Layer - Core Reconciliation Logic
Polar transform, code construction, CRC, list decoding, LDPC and the protocol exchange.
"""
