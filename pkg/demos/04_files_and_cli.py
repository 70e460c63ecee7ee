"""
From files to an evaluated profile
==================================

The command-line tool chains four steps: ``simulate`` writes two view
tables, ``match`` pairs probes across views by genomic position,
``scan`` writes a dependency profile and ``evaluate`` scores it against a
list of known genes.  This script runs the same chain from Python.
"""

# %%
import tempfile
from pathlib import Path

from simcca import load_view, match_probes
from simcca.cli import main

work = Path(tempfile.mkdtemp(prefix="simcca-demo-"))
x, y, pos = work / "x.tsv", work / "y.tsv", work / "positives.txt"

main(["simulate", "--n", "51", "--p", "100", "--planted", "40:50", "--seed", "7",
      "--out-x", str(x), "--out-y", str(y), "--out-positives", str(pos)])
print(x.read_text().splitlines()[0][:60], "...")

# %%
# A view table: probe id, chromosome, position, then one column per sample.
view = load_view(x)
print(f"{len(view.features)} probes x {view.values.shape[0]} samples")

# %%
# Probe matching.  Here both views share positions, so every pair is exact.
paired = match_probes(view, load_view(y), max_distance_bp=5000)
print(f"{len(paired.pairs)} matched pairs, max distance "
      f"{max(d for _, _, d in paired.pairs)} bp")

# %%
# Scan and evaluate.  ``--no-log2`` because the simulated values can be
# negative; real expression intensities would use the default log2 step.
profile = work / "profile.tsv"
main(["scan", "--x", str(x), "--y", str(y), "--method", "simcca", "--window", "15",
      "--seed", "7", "--no-log2", "--out", str(profile)])
print(profile.read_text().splitlines()[:3])
main(["evaluate", "--profile", str(profile), "--positives", str(pos),
      "--out", str(work / "roc.tsv"), "--top-k", "10"])
