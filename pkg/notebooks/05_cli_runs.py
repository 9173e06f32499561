# %% [markdown]
# # Reproducible runs from a config file
#
# The `bianchi-lab` command reads a TOML run description. It writes a CSV time
# series and a JSON summary, and its exit status says whether every check passed.

# %%
import json
import tempfile
from pathlib import Path

from bianchi_lab.cli import main

# %%
work = Path(tempfile.mkdtemp())
(work / "run.toml").write_text(
    'class = "e2"\n'
    "initial = [1.5, 1.0, 0.8]\n"
    "t_end = 20.0\n"
    "seed = 3\n"
    "\n[controls]\n"
    "sample_spacing = 0.05\n"
)
status = main(["report", "--config", str(work / "run.toml"), "--out-dir", str(work)])
print("exit status", status)

# %%
summary = json.loads((work / "report.json").read_text())
print("tau", summary["tau"], "| volume drift", summary["volume_drift"])
for name, ok in sorted(summary["checks"].items()):
    print(f"  {name:22s} {'ok' if ok else 'FAILED'}")
print((work / "report.csv").read_text().splitlines()[0])
