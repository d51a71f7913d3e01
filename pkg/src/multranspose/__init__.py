"""Bit-packed matrix transposition driven by big-integer multiplication."""
