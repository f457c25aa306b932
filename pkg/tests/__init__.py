"""
Tests package for coreforge
"""
