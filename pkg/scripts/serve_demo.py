"""Serve a three-round demo over HTTP.

Rounds two and three share one config (same truth) so post-hoc analysis
can measure participant consistency. Writes the round file next to the
log directory and starts the server.

    python3 scripts/serve_demo.py --listen 127.0.0.1:8000 --out demo_logs/
"""

import argparse
import json
from pathlib import Path

from gsbench.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--listen", default="127.0.0.1:8000")
    ap.add_argument("--out", default="demo_logs")
    args = ap.parse_args()

    shared = {"truth_seed": 2202}
    rounds = {
        "rounds": [
            {"round_id": "round1", "config": {"truth_seed": 1101}},
            {"round_id": "round2", "config": dict(shared)},
            {"round_id": "round3", "config": dict(shared)},
        ]
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg_path = out / "rounds.json"
    cfg_path.write_text(json.dumps(rounds, indent=2), encoding="utf-8")
    print(f"round file: {cfg_path}")
    return cli_main(["serve", "--config", str(cfg_path), "--listen", args.listen, "--out", str(out)])


if __name__ == "__main__":
    raise SystemExit(main())
