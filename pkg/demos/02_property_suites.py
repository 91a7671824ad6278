"""Randomised checks of the welfare guarantees on small instances.

Each suite samples instances and multiplier profiles inside Theta and reports
the smallest slack between the observed ratio and its guaranteed bound.
"""
from boostauction.suites import run_suites

for res in run_suites(["fixtures", "value_boost", "benchmark_boost", "sandwich"], 300, seed=0):
    print(res.line(), f"({res.seconds:.2f}s)")
