"""Hamiltonians, dynamics, observables, experiments and configuration."""
