"""Parameter, basis and result data models."""
