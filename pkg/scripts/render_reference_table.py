#!/usr/bin/env python3
"""Print the stored results table across all four experiments."""

from cocomposer.evalharness import render_reference_table

if __name__ == "__main__":
    print(render_reference_table(), end="")
