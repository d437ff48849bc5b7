"""
An experiment end to end
========================

``run_experiment`` simulates, compares against theory, fits, and writes the
per-trial values, a JSON summary and plot-ready CSVs.  The same thing is
available from the shell as ``ppm-traceback run``.
"""
import json
import tempfile
from pathlib import Path

from ppm_traceback.experiment import ExperimentConfig, run_experiment

out = Path(tempfile.mkdtemp(prefix="ppm-demo-"))
config = ExperimentConfig(n=1000, lam=1.0, M=5000, model="discrete-coupled", seed=42, workers=1,
                          out=str(out), plot_data=True)
report = run_experiment(config)

print()
for path in sorted(out.rglob("*.csv")):
    print(path.relative_to(out), "-", path.read_text().splitlines()[1])
print(json.dumps(report["band_containment"], indent=2))
