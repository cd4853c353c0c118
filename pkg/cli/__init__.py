"""Command-line surface for building, checking and exercising monotone erasure codes."""
