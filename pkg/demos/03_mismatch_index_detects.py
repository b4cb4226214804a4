"""The mismatch index catches what the relay cannot.

Runs the stage-1 detector over the masked bolted fault of the previous
demo and over a run of masked fault flavors, printing the latch latency
for each and writing a plot-ready trace for the first case.
"""

from pathlib import Path

from fmaguard import FaultSpec, default_scenario, generate_stream, healthy_reference
from fmaguard.attack import AttackSpec, BasicFMA, apply_fma
from fmaguard.mismatch import compute_p_stream, mi_config_for, mi_trace, write_mi_trace_csv

OUT = Path("demo_out/03_mismatch")
OUT.mkdir(parents=True, exist_ok=True)

CASES = [
    ("AG bolted at 10%", "AG", 0.1, 0.001),
    ("AG bolted at 50%", "AG", 0.5, 0.001),
    ("AG bolted at 90%", "AG", 0.9, 0.001),
    ("CG bolted at 10%", "CG", 0.1, 0.001),
    ("BC bolted at 10%", "BC", 0.1, 0.001),
    ("ABCG bolted at 10%", "ABCG", 0.1, 0.001),
    ("ABG 300 ohm at 80%", "ABG", 0.8, 300.0),
    ("ABG 300 ohm at 90%", "ABG", 0.9, 300.0),
    ("AG 300 ohm at 90%", "AG", 0.9, 300.0),
]

for label, kind, x, r_f in CASES:
    scenario = default_scenario(duration_s=0.45, fault=FaultSpec(kind, x, r_f, 0.25))
    stream = apply_fma(generate_stream(scenario),
                       AttackSpec(BasicFMA(c_a=healthy_reference(scenario).i_d)))
    cfg = mi_config_for(scenario)
    trace = mi_trace(compute_p_stream(stream, scenario.line, cfg).norms, cfg)
    if trace.latch_index is None:
        print(f"{label:22s} not detected (short mean never reaches the limit)")
    else:
        ms = trace.latch_index - 250
        print(f"{label:22s} detected {ms} ms after inception")
    if label.startswith("AG bolted at 10"):
        norms = compute_p_stream(stream, scenario.line, cfg).norms
        write_mi_trace_csv(OUT / "ag10_trace.csv", stream.t, norms,
                           trace.m, trace.l_u, trace.o)

print(f"\nwrote {OUT / 'ag10_trace.csv'}: plot m and l_u over t to see the")
print("short mean punch through the adaptive healthy limit at inception.")
print("Distant high-resistance single-phase faults are the known blind spot;")
print("everything closer or stiffer latches within a power cycle.")
