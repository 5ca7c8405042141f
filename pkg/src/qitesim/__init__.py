"""Quantum imaginary-time evolution with local and nonlocal unitarization pools."""
