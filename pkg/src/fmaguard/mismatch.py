"""Stage-1 detector: model-consistency residuals with a dynamic threshold.

Each frame is reduced to a four-component consistency vector per phase,
built from the healthy single-circuit line model (local voltage check,
series voltage drop, differential-current ratio).  The per-frame value
fed to the trailing means is the Euclidean norm over all elements of the
consistency vector, i.e. over the four components of all three phases,
mirroring how the relay itself evaluates every phase.  A short trailing
mean follows disturbances; a longer one, inflated by a safety factor,
acts as the adaptive healthy upper limit.  The detector latches when the
short mean reaches the limit.

Within each phase the phasors are rotated so the local current has zero
angle before the angle residual is formed; the angle residual divides by
the rotated measured voltage angle, which is guarded against near-zero
references.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .phasors import Phasor
from .scenario import LineModel, LineScenario, MeasurementFrame, Stream, healthy_reference


class DegenerateMeasurement(Exception):
    """Raised when degenerate-measurement substitutions exceed a burst limit."""


@dataclass(frozen=True)
class MIConfig:
    """Detector tuning: safety factor, window depths and the healthy
    differential-current reference."""

    i_d_n: Phasor
    f: float = 0.05
    t1: int = 9
    t2: int = 99
    eps_angle_rad: float = 1e-3
    eps_mag_kv: float = 1e-6
    eps_current_ka: float = 1e-9

    def __post_init__(self) -> None:
        if not (0.0 < self.f < 1.0):
            raise ValueError("safety factor must lie in (0, 1)")
        if self.t2 < 5 * self.t1:
            raise ValueError("t2 must be at least five times t1")
        if self.i_d_n.magnitude <= 0:
            raise ValueError("healthy differential reference must be nonzero")


def mi_config_for(scenario: LineScenario, **kwargs) -> MIConfig:
    """MIConfig with the healthy differential reference of a scenario."""
    return MIConfig(i_d_n=healthy_reference(scenario).i_d, **kwargs)


@dataclass(frozen=True)
class PVector:
    """One frame's consistency components."""

    delta_vm: float
    delta_va: float
    v_drop_mag: float
    id_ratio: float

    def as_array(self) -> np.ndarray:
        return np.array([self.delta_vm, self.delta_va, self.v_drop_mag, self.id_ratio])


def p_norm(p: PVector) -> float:
    """Euclidean norm of the consistency vector."""
    return float(np.sqrt(np.sum(p.as_array() ** 2)))


def calculated_local_voltage(i1: Phasor, i2: Phasor, line: LineModel) -> Phasor:
    """Local voltage reconstructed from both currents on the healthy model
    (positive-sequence quantities)."""
    z_se = line.z_se.positive
    z_sh = line.z_sh.positive
    z = i1.as_complex * z_se + (i1.as_complex + i2.as_complex) * z_sh
    return Phasor.from_complex(z)


def _wrap(a: np.ndarray) -> np.ndarray:
    w = np.mod(a + np.pi, 2.0 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


@dataclass
class PTrace:
    """Vectorized consistency components for a whole stream."""

    components: np.ndarray  # (N, 3, 4) per phase
    phase_norms: np.ndarray  # (N, 3)
    norms: np.ndarray  # (N,) norm over all per-phase components
    degenerate: np.ndarray  # (N,) bool, any substitution in that frame
    substitutions: int


def _ffill(values: np.ndarray, valid: np.ndarray, fallback) -> np.ndarray:
    """Replace invalid entries with the last valid one along axis 0."""
    if valid.all():
        return values
    idx = np.where(valid, np.arange(len(values))[:, None], -1)
    idx = np.maximum.accumulate(idx, axis=0)
    cols = np.arange(values.shape[1])[None, :]
    out = values[np.maximum(idx, 0), cols]
    return np.where(idx >= 0, out, fallback)


def compute_p_components(v1: np.ndarray, i1: np.ndarray, i2: np.ndarray,
                         line: LineModel, cfg: MIConfig,
                         prev=None) -> PTrace:
    """Consistency components from (N, 3) per-phase measurement arrays.

    Each phase is checked against the healthy single-circuit model (its
    positive-sequence constants); a healthy balanced line satisfies the
    model exactly on every phase.  Guard violations (tiny local current,
    voltage magnitude or reference angle) substitute the affected
    component with its last valid value and are tallied in the result.
    """
    z_se = line.z_se.positive
    z_sh = line.z_sh.positive
    i_d = i1 + i2
    v1c = i1 * z_se + i_d * z_sh

    ok_current = np.abs(i1) >= cfg.eps_current_ka
    mag_m = np.abs(v1)
    ok_mag = (mag_m >= cfg.eps_mag_kv) & ok_current
    with np.errstate(divide="ignore", invalid="ignore"):
        delta_vm = (np.abs(v1c) - mag_m) / mag_m

    # rotate each phase so its local current is the angle reference
    ref = np.where(ok_current, np.exp(-1j * np.angle(np.where(ok_current, i1, 1.0))), 1.0)
    ang_m = _wrap(np.angle(v1 * ref))
    ang_c = _wrap(np.angle(v1c * ref))
    ok_ang = (np.abs(ang_m) >= cfg.eps_angle_rad) & ok_current & (mag_m > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        delta_va = _wrap(ang_c - ang_m) / ang_m

    v_drop = np.abs(i_d * z_se)
    id_ratio = np.abs(i_d) / cfg.i_d_n.magnitude

    prev_vm = prev[0] if prev is not None else 0.0
    prev_va = prev[1] if prev is not None else 0.0
    delta_vm = _ffill(np.where(ok_mag, delta_vm, 0.0), ok_mag, prev_vm)
    delta_va = _ffill(np.where(ok_ang, delta_va, 0.0), ok_ang, prev_va)

    comps = np.stack([delta_vm, delta_va, v_drop, id_ratio], axis=-1)  # (N, 3, 4)
    phase_norms = np.sqrt(np.sum(comps**2, axis=-1))
    degenerate = ~(ok_mag & ok_ang).all(axis=1)
    return PTrace(
        components=comps,
        phase_norms=phase_norms,
        norms=np.sqrt(np.sum(comps**2, axis=(1, 2))),
        degenerate=degenerate,
        substitutions=int((~ok_mag).sum() + (~ok_ang).sum()),
    )


def compute_p_stream(stream: Stream, line: LineModel, cfg: MIConfig) -> PTrace:
    """Consistency components for every frame of a stream."""
    return compute_p_components(stream.v1, stream.i1, stream.i2, line, cfg)


def compute_p(frame: MeasurementFrame, line: LineModel, cfg: MIConfig,
              prev: PVector | None = None) -> tuple:
    """Worst-phase consistency vector of a single frame.

    Returns ``(PVector, degenerate)`` where ``degenerate`` reports whether
    any component of any phase was substituted.
    """
    prev_vals = (prev.delta_vm, prev.delta_va) if prev is not None else None
    trace = compute_p_components(
        frame.v1.as_array()[None, :],
        frame.i1.as_array()[None, :],
        frame.i2.as_array()[None, :],
        line, cfg, prev=prev_vals,
    )
    worst = int(np.argmax(trace.phase_norms[0]))
    c = trace.components[0, worst]
    return PVector(float(c[0]), float(c[1]), float(c[2]), float(c[3])), bool(trace.degenerate[0])


@dataclass
class MIState:
    """Ring buffers and latch of one monitored stream.

    Buffers are pre-filled with the first norm so both means are defined
    from the first sample; the latch is suppressed for the first ``t2+1``
    samples after a cold start.
    """

    t1: int
    t2: int
    long_buf: np.ndarray = field(default_factory=lambda: np.zeros(0))
    short_buf: np.ndarray = field(default_factory=lambda: np.zeros(0))
    pos_long: int = 0
    pos_short: int = 0
    sum_long: float = 0.0
    sum_short: float = 0.0
    samples_seen: int = 0
    suppress_until: int = 0
    latched: bool = False
    m: float = 0.0
    l_u: float = 0.0
    baseline: float = 0.0

    @classmethod
    def for_config(cls, cfg: MIConfig) -> "MIState":
        state = cls(t1=cfg.t1, t2=cfg.t2)
        state.suppress_until = cfg.t2 + 1
        return state

    def _prime(self, value: float) -> None:
        self.long_buf = np.full(self.t2 + 1, value)
        self.short_buf = np.full(self.t1 + 1, value)
        self.sum_long = value * (self.t2 + 1)
        self.sum_short = value * (self.t1 + 1)
        self.pos_long = 0
        self.pos_short = 0
        self.baseline = value

    def push(self, value: float) -> None:
        if self.samples_seen == 0:
            self._prime(value)
        else:
            self.sum_long += value - self.long_buf[self.pos_long]
            self.long_buf[self.pos_long] = value
            self.pos_long = (self.pos_long + 1) % (self.t2 + 1)
            self.sum_short += value - self.short_buf[self.pos_short]
            self.short_buf[self.pos_short] = value
            self.pos_short = (self.pos_short + 1) % (self.t1 + 1)
        self.samples_seen += 1


def update(state: MIState, p_norm_value: float, cfg: MIConfig) -> tuple:
    """Feed one norm; returns ``(m, l_u, o)`` and latches on ``m >= l_u``."""
    state.push(p_norm_value)
    state.m = state.sum_short / (cfg.t1 + 1)
    long_mean = state.sum_long / (cfg.t2 + 1)
    state.l_u = (1.0 + cfg.f) * long_mean
    if not state.latched and state.samples_seen > state.suppress_until:
        if state.m >= state.l_u:
            state.latched = True
        else:
            # healthy operating level remembered for re-priming after reset
            state.baseline = long_mean
    return state.m, state.l_u, state.latched


def reset(state: MIState, healthy_norm: float | None = None) -> MIState:
    """Clear the latch and re-prime buffers from a healthy operating level."""
    value = state.baseline if healthy_norm is None else healthy_norm
    state._prime(value)
    state.samples_seen = max(state.samples_seen, 1)
    state.suppress_until = 0
    state.latched = False
    state.m = value
    state.l_u = (1.0 + 0.0) * value  # recomputed properly on next update
    return state


@dataclass
class MITrace:
    """Vectorized detector trace over a stream of norms."""

    m: np.ndarray
    l_u: np.ndarray
    o: np.ndarray  # latched output per sample
    latch_index: int | None
    baseline: float


def mi_trace(norms: np.ndarray, cfg: MIConfig, prime: float | None = None,
             suppress: int | None = None) -> MITrace:
    """Trailing means, threshold and latch over a whole norm sequence.

    Equivalent to feeding ``update`` sample by sample: buffers pre-filled
    with ``prime`` (default: the first norm) and the latch suppressed for
    the first ``suppress`` samples (default ``t2+1`` for a cold start).
    """
    n = len(norms)
    if n == 0:
        return MITrace(np.zeros(0), np.zeros(0), np.zeros(0, dtype=bool), None, prime or 0.0)
    fill = norms[0] if prime is None else prime
    if suppress is None:
        suppress = cfg.t2 + 1
    padded = np.concatenate([np.full(cfg.t2, fill), norms])
    csum = np.concatenate([[0.0], np.cumsum(padded)])
    k = np.arange(n)
    m = (csum[k + cfg.t2 + 1] - csum[k + cfg.t2 - cfg.t1]) / (cfg.t1 + 1)
    long_mean = (csum[k + cfg.t2 + 1] - csum[k]) / (cfg.t2 + 1)
    l_u = (1.0 + cfg.f) * long_mean

    fires = (m >= l_u) & (k >= suppress)
    latch_index = int(np.argmax(fires)) if fires.any() else None
    o = np.zeros(n, dtype=bool)
    if latch_index is not None:
        o[latch_index:] = True
        baseline = long_mean[latch_index - 1] if latch_index > 0 else fill
    else:
        baseline = long_mean[-1]
    return MITrace(m=m, l_u=l_u, o=o, latch_index=latch_index, baseline=float(baseline))


MI_TRACE_CSV_SCHEMA = "fmaguard-mi-trace-v1"


def write_mi_trace_csv(path, t: np.ndarray, norms: np.ndarray, m: np.ndarray,
                       l_u: np.ndarray, o: np.ndarray) -> None:
    """Plot-ready detector trace: t, norm, short mean, threshold, latch."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema={MI_TRACE_CSV_SCHEMA}\n")
        writer = csv.writer(fh)
        writer.writerow(["t", "p_norm", "m", "l_u", "o"])
        for k in range(len(t)):
            writer.writerow([
                repr(float(t[k])),
                repr(float(norms[k])),
                repr(float(m[k])),
                repr(float(l_u[k])),
                int(o[k]),
            ])
