"""Head-to-head agent comparison on seeded episodes.

Runs the planning agent against the greedy and random baselines on the
same seeds and prints mean/median percent-of-optimal plus the gaps.

    python3 scripts/run_campaign.py --episodes 50 --seed 0 --out results/
"""

import argparse

from gsbench.cli import CampaignSpec, campaign
from gsbench.engine import EpisodeConfig
from gsbench.geomodel import PriorConfig


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--episodes", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=None, help="log/summary directory")
    ap.add_argument("--full-scale", action="store_true",
                    help="benchmark defaults (120 members, 14 decisions); slow")
    args = ap.parse_args()

    if args.full_scale:
        template = EpisodeConfig()
    else:
        template = EpisodeConfig(
            max_decisions=6,
            ensemble_size=16,
            prior=PriorConfig(mean_depths=(6.0, 8.5, 14.0, 16.5), variogram_sill=1.0),
        )
    seeds = [args.seed + i for i in range(args.episodes)]

    summaries = {}
    for agent in ("dss", "greedy", "random"):
        spec = CampaignSpec(args.episodes, agent, seeds, template)
        summaries[agent] = campaign(spec, workers=args.workers, out=args.out)
        s = summaries[agent]
        print(
            f"{agent:>7}: mean {s['mean_percent']:.1f}%  median "
            f"{s['median_percent']:.1f}%  mean decide "
            f"{s['latency']['mean_decide_seconds'] * 1e3:.0f} ms"
        )
    dss = summaries["dss"]["mean_percent"]
    print(f"gap vs greedy: {dss - summaries['greedy']['mean_percent']:+.1f} points")
    print(f"gap vs random: {dss - summaries['random']['mean_percent']:+.1f} points")


if __name__ == "__main__":
    main()
