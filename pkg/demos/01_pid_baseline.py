"""PID baseline on the nominal tracking task.

Roll and yaw follow the same sigmoid reference; the pitch loop chases the
pitch angle that the decoupling layer asks for.  Writes the run to
``out/`` as CSV.
"""
from pathlib import Path

import numpy as np

from heliopt import NOMINAL, PidController, simulate
from heliopt.campaign import emit_plot_data
from heliopt.experiments import summary_text

out = Path("out")

run = simulate(NOMINAL, PidController())
print(summary_text(run))

# steady state over the last five seconds
tail = run.window(15.0)
print("max |e_roll| last 5 s:", np.abs(run.errors[tail, 0]).max())
print("max |e_yaw|  last 5 s:", np.abs(run.errors[tail, 2]).max())

# first time roll stays inside a 0.02 rad band for good
outside = np.abs(run.errors[:, 0]) >= 0.02
settle = run.t[np.nonzero(outside)[0][-1] + 1] if outside.any() else 0.0
print(f"roll settles (0.02 rad) at t = {settle:.2f} s")

for f in emit_plot_data(run, out, algorithm="pid"):
    print("wrote", f)
