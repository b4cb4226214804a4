"""A masking attack hides a bolted internal fault from the relay.

Generates the same fault twice: once with the authentic remote current
(the relay trips at inception) and once with the interceptor replaying
``-i1 + I_d^n`` on the channel (the relay never sees it).
"""

from pathlib import Path

import numpy as np

from fmaguard import FaultSpec, RelaySettings, default_scenario, generate_stream, healthy_reference
from fmaguard.attack import AttackSpec, BasicFMA, apply_fma
from fmaguard.relay import trip_eval_stream
from fmaguard.scenario import write_stream_csv

OUT = Path("demo_out/02_masking")
OUT.mkdir(parents=True, exist_ok=True)

scenario = default_scenario(duration_s=0.45, fault=FaultSpec("AG", 0.1, 0.001, 0.25))
healthy = healthy_reference(scenario)
print(f"healthy differential current: {healthy.i_d} kA (charging only)")

clean = generate_stream(scenario)
trip, i_d, _, i_op = trip_eval_stream(clean.i1, clean.i2, RelaySettings())
k = int(np.argmax(trip.any(axis=1)))
print(f"authentic channel: relay trips at t = {clean.t[k]:.3f} s "
      f"(|I_d| = {i_d[k].max():.2f} kA vs I_op = {i_op[k].max():.2f} kA)")

attacked = apply_fma(clean, AttackSpec(BasicFMA(c_a=healthy.i_d), t_start=0.0))
trip_m, i_d_m, _, i_op_m = trip_eval_stream(attacked.i1, attacked.i2, RelaySettings())
print(f"manipulated channel: relay trips on {int(trip_m.any(axis=1).sum())} of "
      f"{len(attacked)} frames; delivered |I_d| stays at "
      f"{np.abs(attacked.i1[300] + attacked.i2[300]).max():.4f} kA")

write_stream_csv(attacked, OUT / "masked_stream.csv")
print(f"wrote {OUT / 'masked_stream.csv'} (true vs delivered remote current per frame)")
print("\nThe fault keeps burning while the relay reads a healthy line; this")
print("is the gap the two-stage detector closes.")
