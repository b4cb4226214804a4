"""Interceptor on the remote-current channel plus measurement distortions.

The adversary owns the channel carrying ``i2``: it can read every frame
and replace the delivered value at will, while the local measurements
``v1`` and ``i1`` stay authentic.  Two manipulations are provided:

* the basic fault-masking injection ``i2 = -i1 + c_a``, which pins the
  relay's differential current to the constant ``c_a``,
* the stealthy variant that additionally matches the local voltage
  calculated from the healthy line model, which requires the attacker to
  know the fault position and resistance.

Distortions (noise, CT saturation) model the measurement chain at the
relay and are applied after the attack, to whatever the relay receives.

Transform order used by the harness: attack, then CT saturation, then
noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .phasors import ALPHA, ALPHA2, Phasor, positive_sequence
from .scenario import LineModel, Stream


class InvalidAttackParams(Exception):
    """Attack parameters outside their valid domain."""


@dataclass(frozen=True)
class BasicFMA:
    """Replace i2 with ``-i1 + c_a``; ``c_a`` is the phase-a injection
    constant, replayed to phases b and c with balanced rotation."""

    c_a: Phasor = Phasor()


@dataclass(frozen=True)
class StealthyFMA:
    """Voltage-check-bypassing injection; ``x`` and ``r_f`` are the true
    fault position and resistance, known to this stronger attacker."""

    x: float
    r_f: float


@dataclass(frozen=True)
class AttackSpec:
    """What the interceptor does and when it starts."""

    mode: BasicFMA | StealthyFMA | None
    t_start: float = 0.0


@dataclass(frozen=True)
class CTSaturationSpec:
    """Local CT saturation: phases above the knee current lose magnitude
    and gain a leading angle.  The default knee sits a little above the
    healthy load current, an under-sized CT."""

    mag_scale: float = 0.85
    angle_advance_rad: float = 0.15
    knee_ka: float = 0.4

    def __post_init__(self) -> None:
        if not (0.0 < self.mag_scale <= 1.0):
            raise ValueError("mag_scale must be in (0, 1]")
        if self.angle_advance_rad < 0:
            raise ValueError("angle_advance_rad must be non-negative")


@dataclass(frozen=True)
class DistortionSpec:
    """Measurement-chain distortions applied to the delivered stream.

    ``snr_db`` is quoted at the waveform level, as measurement noise
    usually is; the relay's one-cycle phasor estimation improves it by
    ``phasor_estimation_gain_db`` before the phasor samples are formed.
    """

    snr_db: float | None = None
    ct_saturation: CTSaturationSpec | None = None

    def __post_init__(self) -> None:
        if self.snr_db is not None and self.snr_db < 0:
            raise ValueError("snr_db must be non-negative")


#: Length of the relay's phasor-estimation window in power cycles.
PHASOR_WINDOW_CYCLES = 1.5


def phasor_estimation_gain_db(stream: Stream) -> float:
    """SNR gain of the relay's phasor estimate over the raw waveform.

    Averaging W waveform samples into one phasor improves the SNR by
    ``10*log10(W)``; protection-class estimation uses about 1.5 cycles.
    """
    return 10.0 * math.log10(PHASOR_WINDOW_CYCLES * stream.samples_per_cycle)


def _start_index(stream: Stream, t_start: float) -> int:
    return int(np.searchsorted(stream.t, t_start - 1e-12))


def _balanced(c_a: Phasor) -> np.ndarray:
    z = c_a.as_complex
    return np.array([z, z * ALPHA2, z * ALPHA])


def apply_fma(stream: Stream, spec: AttackSpec) -> Stream:
    """Basic fault-masking injection on the delivered i2.

    From ``t_start`` on, each phase receives ``-i1 + c_a``; earlier frames
    pass through untouched.  The true i2 is retained for ground truth.
    """
    if not isinstance(spec.mode, BasicFMA):
        raise InvalidAttackParams("apply_fma requires BasicFMA mode")
    out = stream.copy()
    k0 = _start_index(stream, spec.t_start)
    out.i2[k0:] = -stream.i1[k0:] + _balanced(spec.mode.c_a)
    out.attack_active[k0:] = True
    out.meta["attack"] = spec
    return out


def stealthy_i2(i1: np.ndarray, i_d: np.ndarray, line: LineModel, x: float, r_f: float) -> np.ndarray:
    """Injected i2 that makes the healthy-model voltage check pass.

    Solves the healthy local-loop equation for the i2 that reproduces the
    faulted local voltage ``i1*(2x*z_se) + i_d*r_f``, using the true-fault
    ``i1`` and ``i_d``.  Applied per phase with positive-sequence line
    constants (the attacker's single-circuit model).
    """
    z_se = line.z_se.positive
    z_sh = line.z_sh.positive
    return (i1 * (2.0 * x) * z_se + i_d * r_f - i1 * (z_se + z_sh)) / z_sh


def apply_stealthy_fma(stream: Stream, spec: AttackSpec, line: LineModel) -> Stream:
    """Stealthy fault-masking injection (voltage-check bypassing)."""
    if not isinstance(spec.mode, StealthyFMA):
        raise InvalidAttackParams("apply_stealthy_fma requires StealthyFMA mode")
    x, r_f = spec.mode.x, spec.mode.r_f
    if not (0.0 < x < 1.0):
        raise InvalidAttackParams("stealthy attack position x must lie inside the line")
    if r_f < 0:
        raise InvalidAttackParams("stealthy attack fault resistance must be non-negative")
    out = stream.copy()
    k0 = _start_index(stream, spec.t_start)
    i1 = stream.i1[k0:]
    i_d = stream.i1[k0:] + stream.i2_true[k0:]
    out.i2[k0:] = stealthy_i2(i1, i_d, line, x, r_f)
    out.attack_active[k0:] = True
    out.meta["attack"] = spec
    return out


def stealthy_differential_ratio(stream: Stream, line: LineModel) -> np.ndarray:
    """Delivered differential over local current, on the shunt-impedance base.

    Expressing the ratio with the complex midpoint shunt as the unit
    impedance turns the stealthy-attack identity into
    ``(2x - 1) * z_se + (i_d/i1) * r_f`` exactly; for a bolted fault the
    angle equals the series-impedance angle (shifted by 180 degrees when
    the fault sits in the near half, zero at midline).
    """
    i1 = positive_sequence(stream.i1)
    i2 = positive_sequence(stream.i2)
    return (i1 + i2) / i1 * line.z_sh.positive


def add_awgn(stream: Stream, snr_db: float, rng_seed: int) -> Stream:
    """Additive white Gaussian noise on every delivered channel.

    Each real/imaginary component of each per-phase channel gets
    independent noise sized so the channel's signal power over the
    pre-fault window divided by the noise power equals ``10**(snr/10)``.
    Deterministic for a given seed.
    """
    if not np.isfinite(snr_db):
        return stream.copy()
    out = stream.copy()
    rng = np.random.default_rng(rng_seed)
    ratio = 10.0 ** (snr_db / 10.0)
    pre = ~stream.fault_active
    if not pre.any():
        pre = np.ones(len(stream), dtype=bool)
    n = len(stream)
    for name in ("v1", "i1", "i2"):
        arr = getattr(out, name)
        power = np.mean(np.abs(arr[pre]) ** 2, axis=0)  # per-phase signal power
        sigma = np.sqrt(power / (2.0 * ratio))
        noise = rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))
        arr += noise * sigma
    out.meta["noise"] = {"snr_db": snr_db, "seed": rng_seed}
    return out


def apply_ct_saturation(stream: Stream, params: CTSaturationSpec) -> Stream:
    """Distort i1 phases whose magnitude exceeds the CT knee."""
    out = stream.copy()
    mag = np.abs(out.i1)
    hot = mag > params.knee_ka
    factor = params.mag_scale * np.exp(1j * params.angle_advance_rad)
    out.i1[hot] = out.i1[hot] * factor
    out.meta["ct_saturation"] = params
    return out


def apply_distortions(stream: Stream, spec: DistortionSpec, rng_seed: int) -> Stream:
    """CT saturation then noise, with the documented phasor-level SNR."""
    out = stream
    if spec.ct_saturation is not None:
        out = apply_ct_saturation(out, spec.ct_saturation)
    if spec.snr_db is not None:
        out = add_awgn(out, spec.snr_db + phasor_estimation_gain_db(stream), rng_seed)
    return out
