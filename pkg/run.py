#!/usr/bin/env python3
"""
Main entry point for opspectra
"""

import logging
import sys

from config import LOG_LEVEL, LOG_FORMAT
from opctl import run

EXPERIMENT_GROUPS = [
    ("🔭 Old quantum theory", ["balmer", "planck", "debroglie", "bohr"]),
    ("🧮 Bounded obstructions", ["ccr-obstruction", "spectrum-symmetry", "wielandt", "oscillator-truncation",
                                "truncation-identity", "preclosed-demo"]),
    ("🌊 Grid operators", ["grid-heisenberg", "jump-profile", "domain-diagnostic", "volterra", "d3-skew",
                           "averaging"]),
    ("📈 Bernstein approximation", ["bernstein-approx", "bernstein-identities"]),
    ("🔬 Spectral theory", ["spectral-decompose", "polar"]),
    ("🧱 Finite von Neumann algebras", ["vn-lattice", "vn-trace"]),
]


def show_menu():
    """List the experiments, grouped by topic."""
    print("\n" + "=" * 60)
    print("🔢 opspectra - operator-theory numerics workbench")
    print("=" * 60)
    for title, names in EXPERIMENT_GROUPS:
        print(f"\n{title}")
        for name in names:
            print(f"  • {name}")
    print("-" * 60)
    print("Usage: python run.py <experiment> [options]   (python run.py <experiment> --help)")


def main():
    """Show the experiment list, or run one experiment."""
    if len(sys.argv) == 1:
        show_menu()
        return 0
    logging.basicConfig(level=getattr(logging, LOG_LEVEL), format=LOG_FORMAT)
    return run(sys.argv[1:])


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\n👋 Cancelled!")
        sys.exit(130)
