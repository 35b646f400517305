"""Smoothing gain for mKdV and KdV at s = 1, N = 256, T = 0.1."""
import sys

from gkdv_lab.cli import main

if __name__ == "__main__":
    codes = [main(["smoothing", "--config", f"configs/{name}.ini", *sys.argv[1:]])
             for name in ("mkdv_smoothing", "kdv_smoothing")]
    sys.exit(max(codes))
