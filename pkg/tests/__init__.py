"""
Test suite for the generalized Hermite subdivision toolkit.
"""
