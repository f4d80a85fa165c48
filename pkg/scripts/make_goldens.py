"""Regenerate golden CSVs for every bundled configuration.

    python3 scripts/make_goldens.py
"""

import json
import shutil
import sys
from pathlib import Path

from threearm.cli import main

ROOT = Path(__file__).resolve().parents[1]


def command_for(stem: str, cfg: dict) -> str:
    if stem.startswith(("table1_", "table4_", "example_hida")):
        return "optimize"
    if stem.startswith(("table2", "table3")):
        return "power"
    if stem == "fig3":
        return "sweep"
    if "higuchi" in stem:
        return "analyze"
    if stem == "check_condition":
        return "check-condition"
    if stem.startswith("simulate"):
        return "simulate"
    raise ValueError(stem)


def jobs():
    for path in sorted((ROOT / "configs").glob("*.json")):
        cfg = json.loads(path.read_text())
        yield path, command_for(path.stem, cfg)


def run(out_root: Path):
    for path, cmd in jobs():
        out = out_root / path.stem
        shutil.rmtree(out, ignore_errors=True)
        code = main([cmd, "--config", str(path), "--out", str(out)])
        if code:
            sys.exit(f"{path.name}: exit {code}")
        (out / "manifest.json").unlink()


if __name__ == "__main__":
    run(ROOT / "golden")
