"""
Application Layer - Provisioning and Monte-Carlo campaigns.
"""
