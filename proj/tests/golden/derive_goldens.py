#!/usr/bin/env python3
"""Writes the stage tables and the conjugated patterns of the two-move
strategy as cell grids, expanded by hand from their block forms:

  stage 1:  H1 = [E(n-1) R^(n-1); 0 1]        H2 = [E(n-1) 0; R^(n-1) 1]
  stage 2:  H1 = H2 = G
  w H2^(1) w^-1 = [1 R^(n-1); 0 E(n-1)]    w H1^(1) w^-1 = [1 0; R^(n-1) E(n-1)]
"""
import pathlib

HERE = pathlib.Path(__file__).resolve().parent


def blocks(n, top_left, top_right, bottom_left, bottom_right, split):
    """2x2 block matrix; `split` is the size of the top-left block."""
    grid = []
    for i in range(n):
        row = []
        for j in range(n):
            top, left = i < split, j < split
            tag = {(True, True): top_left, (True, False): top_right,
                   (False, True): bottom_left, (False, False): bottom_right}[(top, left)]
            if tag == "I":
                tag = "1" if i == j else "0"
            row.append(tag)
        grid.append(row)
    return grid


def table(stage, h1, h2):
    lines = [f"stage {stage}", f"H1^({stage}) | H2^({stage})"]
    for a, b in zip(h1, h2):
        lines.append(" ".join(a) + " | " + " ".join(b))
    return "\n".join(lines) + "\n"


def grid_text(g):
    return "\n".join(" ".join(r) for r in g) + "\n"


for n in range(3, 7):
    h1 = blocks(n, "E", "R", "0", "1", n - 1)
    h2 = blocks(n, "E", "0", "R", "1", n - 1)
    full = [["*"] * n for _ in range(n)]
    (HERE / f"stage1_n{n}.txt").write_text(table(1, h1, h2))
    (HERE / f"stage2_n{n}.txt").write_text(table(2, full, full))
    (HERE / f"wH2w_inv_n{n}.txt").write_text(grid_text(blocks(n, "1", "R", "0", "E", 1)))
    (HERE / f"wH1w_inv_n{n}.txt").write_text(grid_text(blocks(n, "1", "0", "R", "E", 1)))
