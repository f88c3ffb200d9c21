#!/usr/bin/env python3
"""Desk-scale demo: last-iterate behavior of self-play update rules.

Runs MWU, OMWU, and the exploit-weighted update on one seeded random game
and prints the duality gap of the last iterate at a few checkpoints;
finishes with the equilibrium of the game and its spectral certificates.
"""
import argparse

from zerosum.engine import (
    AdversarySpec,
    AgentSpec,
    GameSpec,
    SimulationConfig,
    run_self_play,
)
from zerosum.nash import solve_zero_sum, spectral_radius_at_ne


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=12)
    parser.add_argument("--size", type=int, default=20)
    parser.add_argument("--horizon", type=int, default=20_000)
    args = parser.parse_args()

    checkpoints = [100, 1000, args.horizon // 2, args.horizon]
    agents = [
        ("MWU", AgentSpec(kind="MWU", eta=0.01)),
        ("OMWU", AgentSpec(kind="OMWU", eta=0.01)),
        ("AMWU(alpha=100)", AgentSpec(kind="AMWU", eta=0.01, alpha=100.0)),
    ]
    game_spec = GameSpec(kind="random", n=args.size, m=args.size, seed=args.seed)

    print(f"random {args.size}x{args.size} game, seed {args.seed}, T={args.horizon}")
    print(f"{'agent':>18} " + " ".join(f"t={c:<8d}" for c in checkpoints))
    unit = None
    for label, spec in agents:
        cfg = SimulationConfig(
            game=game_spec,
            horizon=args.horizon,
            agent=spec,
            adversary=AdversarySpec(kind="self_play"),
            metrics=("exploitability",),
        )
        _, _, series, unit = run_self_play(cfg)
        gaps = " ".join(f"{series['exploitability'][c - 1]:<10.5f}" for c in checkpoints)
        print(f"{label:>18} {gaps}")

    ne = solve_zero_sum(unit)
    print(f"\nequilibrium value {ne.value:.6f} (duality gap {ne.gap:.2e})")
    for alpha, label in ((10.0, "exploit rate 10"), (0.0, "plain")):
        rho = spectral_radius_at_ne(unit, ne, 0.1, alpha)
        print(f"spectral radius at the equilibrium, {label}: {rho:.6f}")


if __name__ == "__main__":
    main()
