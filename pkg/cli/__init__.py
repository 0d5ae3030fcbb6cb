"""Command-line front end: configuration, orchestration and reports."""
