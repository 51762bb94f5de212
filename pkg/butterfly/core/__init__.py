"""Configuration, errors and result models."""
