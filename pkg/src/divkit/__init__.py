"""Diverse subset selection over ultrametrics and conjunctive query answers."""
