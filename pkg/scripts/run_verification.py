"""Run the exact verification suite (cases, identities, cancellations)."""
import sys

from gkdv_lab.cli import main

if __name__ == "__main__":
    sys.exit(main(["verify", "--config", "configs/verify.ini", *sys.argv[1:]]))
