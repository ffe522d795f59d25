"""Command-line surface: configuration, kernel grammar and commands."""
