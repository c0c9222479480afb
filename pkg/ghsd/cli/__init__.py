"""
Command-line front end for the subdivision toolkit.
"""
