"""Regenerate tests/golden from tests/fixtures (run after an intentional output change)."""
from pathlib import Path

from wkbwigner.cli import main

ROOT = Path(__file__).resolve().parents[1]


def command_for(name: str) -> str:
    return name.split("_", 1)[0]


if __name__ == "__main__":
    out_dir = ROOT / "tests" / "golden"
    out_dir.mkdir(exist_ok=True)
    for cfg in sorted((ROOT / "tests" / "fixtures").glob("*.json")):
        target = out_dir / (cfg.stem + ".out")
        code = main([command_for(cfg.stem), "--config", str(cfg), "--out", str(target)])
        print(f"{cfg.stem}: exit {code}")
