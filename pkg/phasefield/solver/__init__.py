"""Energy evaluation, Newton, min-max and spectral solvers."""
