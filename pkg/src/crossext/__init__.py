"""Desk-scale toolkit for separately holomorphic extension on the unit bidisc."""
