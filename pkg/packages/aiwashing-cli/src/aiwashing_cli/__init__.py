"""Command-line interface for aiwashing."""
