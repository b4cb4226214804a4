"""The stronger adversary: bypassing the voltage-consistency check.

An attacker who knows the fault position and resistance can shape the
injected remote current so the local voltage reconstructed from the
healthy model agrees with the measurement.  The differential current it
must deliver then obeys a fixed identity: expressed on the complex
shunt-impedance base it equals ``(2x - 1) * z_se`` for a bolted fault.
"""

import numpy as np

from fmaguard import FaultSpec, default_scenario, generate_stream
from fmaguard.attack import AttackSpec, StealthyFMA, apply_stealthy_fma, stealthy_differential_ratio
from fmaguard.mismatch import compute_p_stream, mi_config_for, mi_trace

line = default_scenario().line
z_se = line.z_se.positive
print(f"half-line series impedance: {abs(z_se):.2f} ohm at {np.degrees(np.angle(z_se)):.1f} deg\n")

for x in (0.2, 0.5, 0.9):
    scenario = default_scenario(duration_s=0.45, fault=FaultSpec("ABC", x, 0.0, 0.25))
    stream = apply_stealthy_fma(generate_stream(scenario),
                                AttackSpec(StealthyFMA(x=x, r_f=0.0), t_start=0.25),
                                scenario.line)
    ratio = stealthy_differential_ratio(stream, scenario.line)[300]
    expect = (2 * x - 1) * z_se
    cfg = mi_config_for(scenario)
    trace = mi_trace(compute_p_stream(stream, scenario.line, cfg).norms, cfg)
    latch = "latched" if trace.latch_index is not None else "quiet"
    print(f"x = {x:.1f}: delivered ratio {abs(ratio):7.3f} ohm at "
          f"{np.degrees(np.angle(ratio)) if abs(ratio) > 1e-9 else 0.0:7.1f} deg, "
          f"identity {abs(expect):7.3f} ohm  -> detector {latch}")

print("\nAt midline the delivered differential vanishes entirely. The")
print("voltage-check residuals are zero by construction, so stage 1 sees")
print("far less than under the basic attack; the identity above is what a")
print("countermeasure can monitor, and the attack needs fault parameters")
print("the basic variant does not.")
