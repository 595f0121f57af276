"""
Infrastructure Layer - Files, settings and randomness.
Frozen libraries, alist registries, transcripts and result tables live here.
"""
