"""Acceptance lines collected during the run and printed in the terminal summary."""

LINES: list = []
