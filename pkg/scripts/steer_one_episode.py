"""Run one full-scale episode with the planning agent and print the story.

Shows each committed decision, the final score, the optimum on the hidden
truth, and percent-of-optimal.

    python3 scripts/steer_one_episode.py --seed 7
"""

import argparse

from gsbench.dss_agent import AgentConfig, run_episode
from gsbench.engine import EpisodeConfig, LocalEpisodeHandle
from gsbench.geomodel import PriorConfig


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--members", type=int, default=120)
    ap.add_argument("--decisions", type=int, default=14)
    args = ap.parse_args()

    cfg = EpisodeConfig(
        max_decisions=args.decisions,
        ensemble_size=args.members,
        prior=PriorConfig(seed=args.seed),
        truth_seed=10_000 + args.seed,
    )
    handle = LocalEpisodeHandle(cfg, episode_id=f"demo-{args.seed}")
    run = run_episode(handle, AgentConfig.from_prior(cfg.prior, y_spacing=cfg.y_grid_spacing))

    for k, ((x, y), dt) in enumerate(zip(run.points[1:], run.decide_seconds)):
        print(f"stand {k + 1:>2}: x={x:6.1f} m  y={y:6.2f} m  ({dt * 1e3:.0f} ms to decide)")
    final = run.final
    print(f"score     {final['score']:.2f}")
    print(f"optimal   {final['optimal_score']:.2f}")
    pct = final["percent_of_optimal"]
    print(f"percent   {'n/a' if pct is None else f'{pct:.1f}%'}")
    print(f"stopped early: {final['stopped_early']}")


if __name__ == "__main__":
    main()
