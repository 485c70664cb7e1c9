"""
A phase diagram in p
====================

A sweep classifies each cell of a ``p`` grid at fixed amplitude.  A quiet
horizon below ``p_fuj`` is reported as inconclusive, since positive data
there blow up eventually.
"""

from fujita_lab import parse_config, sweep

CONFIG = """
version = 1
seed = 3

[equation]
alpha = 0.5
p_grid = [2, 3, 4, 5, 6.5, 8, 10]

[grid]
box_length = 64.0
points = 256

[initial]
amplitude = 0.3

[solver]
t_end = 50.0
"""

diagram, _ = sweep(parse_config(CONFIG), workers=2, write=False)
for cell in diagram.cells:
    t = "" if cell.t_blowup is None else f"  T* = {cell.t_blowup:.4g}"
    print(f"p = {cell.p:5.2f}  {cell.classification:<13}{t}  {cell.reason}")
print()
print(diagram.summary(), end="")
