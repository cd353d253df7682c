"""Shared domain types, container I/O, errors, configuration and logging for the imagery BCI system."""
