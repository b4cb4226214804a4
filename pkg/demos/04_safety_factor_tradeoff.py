"""Choosing the safety factor: sensitivity vs false alarms.

The 150-ohm mid-line masked fault sits right at the tuning boundary:
small factors catch it quickly, 15% misses it entirely, and under
measurement noise a factor at or below 1% starts firing on a healthy
line.
"""

from fmaguard import FaultSpec, default_scenario, generate_stream, healthy_reference
from fmaguard.attack import AttackSpec, BasicFMA, DistortionSpec, apply_distortions, apply_fma
from fmaguard.mismatch import compute_p_stream, mi_config_for, mi_trace

scenario = default_scenario(duration_s=0.45, fault=FaultSpec("AG", 0.5, 150.0, 0.25))
stream = apply_fma(generate_stream(scenario),
                   AttackSpec(BasicFMA(c_a=healthy_reference(scenario).i_d)))
norms = compute_p_stream(stream, scenario.line, mi_config_for(scenario)).norms

print("150-ohm mid-line masked fault, clean measurements:")
for f in (0.01, 0.03, 0.05, 0.10, 0.15):
    trace = mi_trace(norms, mi_config_for(scenario, f=f))
    verdict = ("missed" if trace.latch_index is None
               else f"detected after {trace.latch_index - 250} ms")
    print(f"  f = {f:4.0%}: {verdict}")

print("\nhealthy line, 35 dB measurement noise, 10 s, 20 seeds:")
healthy = default_scenario(duration_s=10.0)
for f in (0.01, 0.05):
    fires = 0
    for seed in range(20):
        noisy = apply_distortions(generate_stream(healthy), DistortionSpec(snr_db=35.0), seed)
        cfg = mi_config_for(healthy, f=f)
        if mi_trace(compute_p_stream(noisy, healthy.line, cfg).norms, cfg).latch_index is not None:
            fires += 1
    print(f"  f = {f:4.0%}: false latches in {fires}/20 seeds")

print("\n5% buys noise immunity while keeping the high-resistance cases;")
print("that is the study default carried by MIConfig.")
