"""Verifiable information dispersal over monotone erasure codes, with a deterministic simulator."""
