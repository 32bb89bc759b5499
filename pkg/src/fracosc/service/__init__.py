"""HTTP service exposing the oscillator computations."""
