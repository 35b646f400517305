"""Long mKdV run with the growth-exponent fit (a few minutes)."""
import sys

from gkdv_lab.cli import main

if __name__ == "__main__":
    sys.exit(main(["growth", "--config", "configs/mkdv_growth.ini", *sys.argv[1:]]))
