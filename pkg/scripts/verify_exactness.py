#!/usr/bin/env python3
"""Manual verification script for the exact schemes against their baselines."""

import asyncio
from pathlib import Path

from oscex.config import load_settings
from oscex.runconfig import load_run_config
from oscex.runner import compare, run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SWEEP = [0.1, 0.05, 0.025, 0.0125]


async def main():
    """Show exact steppers next to the schemes they are usually compared with."""
    settings = load_settings()
    ok = True

    print("=== Exact Discretization Demonstration ===\n")

    print("1. Forced oscillator: exponential Euler vs explicit Lawson")
    table = await compare(
        [
            load_run_config(CONFIGS / "osc1d_exponential_euler.json"),
            load_run_config(CONFIGS / "osc1d_lawson.json"),
        ],
        sweep=SWEEP,
        settings=settings,
    )
    for row in table.rows:
        order = "exact" if row.observed_order is None else f"{row.observed_order:.2f}"
        print(f"   {row.label:<22} error = {row.global_error:.3e}   order = {order}")
    euler, lawson = table.rows
    ok &= euler.global_error < 1e-12 and lawson.global_error > 1e-6
    print()

    print("2. Energy drift over 100 steps at eps = 0.1")
    for name in ("osc1d_exact.json", "osc1d_symmetric_euler.json"):
        summary = run(load_run_config(CONFIGS / name), settings).summary
        print(f"   {summary.stepper:<22} max drift = {summary.max_drift:.3e}")
    print()

    print("3. Kepler orbit, one full revolution in 100 angle steps")
    result = run(load_run_config(CONFIGS / "kepler.json"), settings)
    u = result.trajectory.column("x0")
    closure = abs(u[-1] - u[0])
    print(f"   |u(2π) - u(0)| = {closure:.3e}")
    ok &= closure < 1e-9
    print()

    print("4. Pendulum: local δ at the midpoint vs the standard discrete gradient")
    table = await compare(
        [
            load_run_config(CONFIGS / "pendulum_standard.json"),
            load_run_config(CONFIGS / "pendulum_midpoint.json"),
        ],
        settings=settings,
    )
    for row in table.rows:
        print(f"   {row.label:<36} error = {row.global_error:.3e}   drift = {row.energy_drift:.1e}")
    standard, midpoint = table.rows
    ok &= midpoint.global_error < standard.global_error
    print()

    if ok:
        print("=== Exact schemes behaving as expected! ===")
    else:
        print("=== Unexpected result, see above ===")
        raise SystemExit(1)


if __name__ == "__main__":
    asyncio.run(main())
