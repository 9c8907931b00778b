"""A reduced PSO versus MPSO comparison with statistics.

Five seeds at 10 particles and 30 iterations keep this to a few minutes.
The command-line ``campaign`` and ``stats`` subcommands do the same at any
scale and write every table as CSV.
"""
from pathlib import Path

from heliopt import SwarmConfig
from heliopt.campaign import compare, emit_plot_data, run_campaign

cfg = SwarmConfig(population=10, iterations=30)


def progress(r):
    print(f"{r.algorithm:>4s} seed {r.seed}: best {r.best_cost:.4f} ({r.elapsed:.0f} s)")


result = run_campaign(["pso", "mpso"], range(5), cfg, progress=progress)

for row in result.summary_rows():
    print("{} runs={} best={:.4f} mean={:.4f} median={:.4f}".format(*row[:5]))

for pairing in ("seed", "iteration"):
    res = compare(result, pairing=pairing)
    print(f"Wilcoxon ({pairing} pairs, n={res['n']}, {res['method']}): "
          f"T = {res['statistic']:g}, p = {res['pvalue']:.3g}")
print("Friedman mean ranks:", res["friedman"])

out = Path("out/campaign")
emit_plot_data(result, out)
result.save(out / "campaign.json")
