"""Configuration, scenario runs, metrics and report output."""
