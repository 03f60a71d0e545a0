"""
Checkpointed runs and figure data
==================================

``gane.runkit`` wraps the generation loop with periodic evaluation,
checkpoints, resumption and CSV export. The same functions back the
``gane`` command.
"""

import csv
import tempfile
from pathlib import Path

from gane.runkit import RunConfig, load_checkpoint, resume, run
from gane.runkit.recipes import summarize

out_root = Path(tempfile.mkdtemp())
config = RunConfig(env="MountainCarContinuous", population_size=16, generations=20,
                   eval_every=5, checkpoint_every=5, output_dir=str(out_root / "mcc"))

# %%
# Stop half way, then resume from the checkpoint on disk: the result is the
# same, byte for byte, as an uninterrupted run.
out = run(config, workers=1, stop_after=10)
print("interrupted at generation", load_checkpoint(out / "checkpoint.bin").state.generation)
resume(out / "checkpoint.bin", workers=1)

# %%
# ``scores.csv`` holds the elite and population-mean held-out scores;
# ``trajectories.csv`` holds per-step cumulative rewards of the expert and
# of elites captured at 1, 25, 50, 75 and 100% of the run.
with open(out / "scores.csv") as fh:
    for row in csv.DictReader(fh):
        print(row)
with open(out / "trajectories.csv") as fh:
    labels = list(dict.fromkeys(row["agent_label"] for row in csv.DictReader(fh)))
print("trajectory curves:", labels)

# %%
print(summarize(out / "checkpoint.bin"))
