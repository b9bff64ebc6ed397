"""Regenerate the committed golden ST/ES1/ES2 ratios from the example configs."""

import json
import sys
from pathlib import Path

from gratingtd import diagnostics as diag
from gratingtd.config import parse_config
from gratingtd.pipeline import simulate

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = {"homogeneous": "homogeneous.ini", "layered": "two_layer.ini", "lamellar": "lamellar.ini"}


def main() -> int:
    out = {}
    for key, name in CONFIGS.items():
        cfg = parse_config(ROOT / "configs" / name)
        res = simulate(cfg)
        reps = diag.stability_report(res.series, res.pulse, res.medium, res.plan.T, None, ops=res.ops)
        out[key] = {r.name: r.lhs for r in reps}
        print(key, out[key], file=sys.stderr)
    target = ROOT / "src" / "gratingtd" / "data" / "golden_baselines.json"
    target.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
