"""Headless entry points.

serve    -- host configured rounds over HTTP
campaign -- run a scripted agent across seeded episodes, log and summarize
rank     -- rankings over a directory of episode logs
replay   -- integrity-check one log and print per-episode results

Exit codes: 0 success, 1 integrity or assertion failure, 2 usage or
configuration error. Every flag falls back to a GSB_<NAME> environment
variable; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .analysis import IntegrityError, load_results, playback, simple_ranking, trajectory_series
from .baselines import run_greedy_episode, run_random_episode
from .dss_agent import AgentConfig, run_episode
from .engine import (
    EpisodeConfig,
    LocalEpisodeHandle,
    config_from_payload,
    config_to_payload,
)

AGENTS = ("dss", "greedy", "random")


def _env(name: str) -> str | None:
    return os.environ.get(f"GSB_{name.upper()}")


def _env_or(name: str, default, cast=str):
    raw = _env(name)
    return cast(raw) if raw is not None else default


@dataclass
class CampaignSpec:
    episodes: int
    agent: str
    seeds: list[int]
    template: EpisodeConfig = field(default_factory=EpisodeConfig)

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError("campaign needs at least one episode")
        if self.agent not in AGENTS:
            raise ValueError(f"unknown agent {self.agent!r}; expected one of {AGENTS}")
        if len(self.seeds) != self.episodes:
            raise ValueError("one seed per episode required")


def _episode_config(template: EpisodeConfig, seed: int) -> EpisodeConfig:
    """Re-seed every stochastic stream from one episode seed. Streams stay
    independent by their per-purpose sub-keys."""
    return replace(
        template,
        prior=replace(template.prior, seed=seed),
        tool=replace(template.tool, seed=seed),
        enkf=replace(template.enkf, seed=seed),
        truth_seed=seed,
    )


def _run_campaign_episode(agent: str, template: EpisodeConfig, seed: int) -> dict:
    cfg = _episode_config(template, seed)
    handle = LocalEpisodeHandle(cfg, episode_id=f"{agent}-{seed:06d}")
    if agent == "dss":
        run = run_episode(
            handle, AgentConfig.from_prior(cfg.prior, y_spacing=cfg.y_grid_spacing)
        )
    elif agent == "greedy":
        run = run_greedy_episode(handle, spacing=cfg.y_grid_spacing)
    else:
        run = run_random_episode(handle, seed, spacing=cfg.y_grid_spacing)
    return {
        "seed": seed,
        "episode_id": handle.episode_id,
        "final": run.final,
        "decide_seconds": run.decide_seconds,
        "records": handle.records(),
        "points": [[float(x), float(y)] for x, y in run.points],
    }


def campaign(spec: CampaignSpec, workers: int = 1, out: str | Path | None = None) -> dict:
    """Run the scripted agent over every seed; merge by seed order so the
    summary is identical no matter how episodes interleave."""
    jobs = [(spec.agent, spec.template, s) for s in spec.seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_run_campaign_episode, *zip(*jobs)))
    else:
        raw = [_run_campaign_episode(*j) for j in jobs]
    by_seed = {r["seed"]: r for r in raw}
    results = [by_seed[s] for s in spec.seeds]

    percents = [
        r["final"]["percent_of_optimal"]
        for r in results
        if r["final"]["percent_of_optimal"] is not None
    ]
    all_times = [t for r in results for t in r["decide_seconds"]]
    summary = {
        "agent": spec.agent,
        "episodes": spec.episodes,
        "seeds": list(spec.seeds),
        "results": [
            {
                "seed": r["seed"],
                "episode_id": r["episode_id"],
                "score": r["final"]["score"],
                "percent_of_optimal": r["final"]["percent_of_optimal"],
                "decisions": len(r["decide_seconds"]),
                "stopped_early": r["final"]["stopped_early"],
            }
            for r in results
        ],
        "mean_percent": statistics.fmean(percents) if percents else None,
        "median_percent": statistics.median(percents) if percents else None,
        "degenerate_episodes": sum(
            1 for r in results if r["final"]["percent_of_optimal"] is None
        ),
        "latency": {
            "mean_decide_seconds": statistics.fmean(all_times) if all_times else 0.0,
            "max_decide_seconds": max(all_times, default=0.0),
        },
    }

    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / f"campaign-{spec.agent}.jsonl", "w", encoding="utf-8") as fh:
            for r in results:
                for rec in r["records"]:
                    fh.write(json.dumps(rec) + "\n")
        with open(out / f"summary-{spec.agent}.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
        with open(out / f"trajectories-{spec.agent}.csv", "w", encoding="utf-8") as fh:
            fh.write("episode_id\tx\ty\n")
            for r in results:
                for x, y in r["points"]:
                    fh.write(f"{r['episode_id']}\t{x!r}\t{y!r}\n")
    return summary


def _load_config_file(path: str) -> EpisodeConfig:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    merged = {**config_to_payload(EpisodeConfig()), **payload}
    for key in ("prior", "scoring", "tool", "enkf"):
        if key in payload:
            merged[key] = {**config_to_payload(EpisodeConfig())[key], **payload[key]}
    return config_from_payload(merged)


# ---------------------------------------------------------------------------
# subcommands


def cmd_serve(args) -> int:
    from .api_server import create_app, load_round_file

    if args.config is None:
        print("serve requires --config (or GSB_CONFIG)", file=sys.stderr)
        return 2
    if not Path(args.config).is_file():
        print(f"config file not found: {args.config}", file=sys.stderr)
        return 2
    rounds = load_round_file(args.config)
    host, _, port = args.listen.rpartition(":")
    if not host or not port.isdigit():
        print(f"bad listen address {args.listen!r}; expected host:port", file=sys.stderr)
        return 2
    # GSB_STATIC points at a built browser-client directory to host alongside
    # the API; the JSON endpoints stay exactly the same with or without it
    app = create_app(rounds, log_dir=args.out, static_dir=_env("STATIC"))

    import uvicorn

    uvicorn.run(app, host=host, port=int(port))
    return 0


def _print_table(rows: list[dict], columns: list[str]) -> None:
    print("\t".join(columns))
    for row in rows:
        print("\t".join(str(row[c]) for c in columns))


def cmd_campaign(args) -> int:
    template = _load_config_file(args.config) if args.config else EpisodeConfig()
    spec = CampaignSpec(
        episodes=args.episodes,
        agent=args.agent,
        seeds=[args.seed + i for i in range(args.episodes)],
        template=template,
    )
    summary = campaign(spec, workers=args.workers, out=args.out)
    _print_table(
        summary["results"],
        ["seed", "episode_id", "score", "percent_of_optimal", "decisions", "stopped_early"],
    )
    print(f"mean_percent\t{summary['mean_percent']}")
    print(f"median_percent\t{summary['median_percent']}")
    print(f"mean_decide_seconds\t{summary['latency']['mean_decide_seconds']:.4f}")
    return 0


def cmd_rank(args) -> int:
    log_dir = Path(args.logs)
    if not log_dir.is_dir():
        print(f"log directory not found: {log_dir}", file=sys.stderr)
        return 2
    results, round_ids = load_results(log_dir)
    rows, excluded = simple_ranking(results, round_ids)
    _print_table(rows, ["rank", "id", "participant_id", "mean_percent", "tied"])
    for pid in excluded:
        print(f"excluded\t{pid}", file=sys.stderr)
    if args.out:
        Path(args.out).write_text(
            json.dumps({"rounds": round_ids, "ranking": rows, "excluded": excluded}, indent=2),
            encoding="utf-8",
        )
    return 0


def cmd_replay(args) -> int:
    log = Path(args.log)
    if not log.is_file():
        print(f"log file not found: {log}", file=sys.stderr)
        return 2
    replays = playback(log)
    _print_table(
        [
            {
                "episode_id": r.episode_id,
                "participant_id": r.participant_id,
                "round_id": r.round_id,
                "score": r.score,
                "percent_of_optimal": r.percent_of_optimal,
                "reached_sand": r.reached_sand,
            }
            for r in replays
        ],
        ["episode_id", "participant_id", "round_id", "score", "percent_of_optimal", "reached_sand"],
    )
    if args.out:
        Path(args.out).write_text(
            json.dumps(trajectory_series(replays), indent=2), encoding="utf-8"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gsbench", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="host configured rounds over HTTP")
    serve.add_argument("--config", default=_env("CONFIG"), help="rounds JSON file")
    serve.add_argument("--listen", default=_env_or("LISTEN", "127.0.0.1:8000"))
    serve.add_argument("--out", default=_env_or("OUT", "logs"), help="decision log directory")
    serve.set_defaults(func=cmd_serve)

    camp = sub.add_parser("campaign", help="run a scripted agent over seeded episodes")
    camp.add_argument("--config", default=_env("CONFIG"), help="episode config JSON template")
    camp.add_argument("--episodes", type=int, default=_env_or("EPISODES", 1, int))
    camp.add_argument("--agent", choices=AGENTS, default=_env_or("AGENT", "dss"))
    camp.add_argument("--seed", type=int, default=_env_or("SEED", 0, int))
    camp.add_argument("--workers", type=int, default=_env_or("WORKERS", 1, int))
    camp.add_argument("--out", default=_env("OUT"), help="log/summary output directory")
    camp.set_defaults(func=cmd_campaign)

    rank = sub.add_parser("rank", help="rankings from a directory of logs")
    rank.add_argument("logs", help="directory of .jsonl episode logs")
    rank.add_argument("--out", default=_env("OUT"), help="machine-readable summary path")
    rank.set_defaults(func=cmd_rank)

    rep = sub.add_parser("replay", help="integrity-check one episode log")
    rep.add_argument("log", help=".jsonl episode log")
    rep.add_argument("--out", default=_env("OUT"), help="plot-ready trajectory series path")
    rep.set_defaults(func=cmd_replay)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IntegrityError, AssertionError) as exc:
        print(f"integrity failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
