"""Drive every CLI subcommand programmatically against the shipped configs."""

import os

from smrlab.cli import main

here = os.path.dirname(os.path.abspath(__file__))
configs = os.path.join(here, "..", "configs")
out = os.path.join(here, "out", "cli")

for name in ("parabolicity", "norms", "multiplication", "solve", "smoke", "budget"):
    cfg = os.path.join(configs, f"{name}.json")
    code = main(["--config", cfg, "--out-dir", out, "--reproducible"])
    print(f"config {name}.json -> exit {code}")
    assert code == 0

print()
print("artifacts in", out)
for f in sorted(os.listdir(out)):
    print(" ", f, os.path.getsize(os.path.join(out, f)), "bytes")
