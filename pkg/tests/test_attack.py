import numpy as np
import pytest

from fmaguard.attack import (
    AttackSpec,
    BasicFMA,
    CTSaturationSpec,
    DistortionSpec,
    InvalidAttackParams,
    StealthyFMA,
    add_awgn,
    apply_ct_saturation,
    apply_distortions,
    apply_fma,
    apply_stealthy_fma,
    phasor_estimation_gain_db,
    stealthy_differential_ratio,
)
from fmaguard.phasors import Phasor, positive_sequence
from fmaguard.relay import RelaySettings, trip_eval_stream
from fmaguard.scenario import FaultSpec, default_scenario, generate_stream, healthy_reference


def fma_stream(kind="AG", x=0.1, r_f=0.001, c_a=None, t_start=0.0):
    scenario = default_scenario(duration_s=0.4, fault=FaultSpec(kind, x, r_f, 0.2))
    stream = generate_stream(scenario)
    if c_a is None:
        c_a = healthy_reference(scenario).i_d
    attacked = apply_fma(stream, AttackSpec(BasicFMA(c_a=c_a), t_start=t_start))
    return scenario, stream, attacked


class TestBasicFMA:
    def test_negation_with_zero_constant(self):
        scenario = default_scenario(duration_s=0.1)
        stream = generate_stream(scenario)
        out = apply_fma(stream, AttackSpec(BasicFMA(c_a=Phasor()), t_start=0.0))
        assert np.abs(out.i2 + out.i1).max() < 1e-12

    def test_replay_constant_pins_differential(self):
        scenario, _, attacked = fma_stream()
        c_a = healthy_reference(scenario).i_d
        i_d = attacked.i1 + attacked.i2
        assert np.abs(np.abs(i_d) - c_a.magnitude).max() < 1e-12

    def test_prefault_stream_unchanged_when_attack_starts_at_inception(self):
        _, clean, attacked = fma_stream(t_start=0.2)
        assert np.abs(attacked.i2[:200] - clean.i2[:200]).max() < 1e-15
        assert attacked.attack_active[200:].all()
        assert not attacked.attack_active[:200].any()

    def test_true_i2_retained(self):
        _, clean, attacked = fma_stream()
        assert np.abs(attacked.i2_true - clean.i2_true).max() == 0.0

    def test_local_channels_untouched(self):
        _, clean, attacked = fma_stream()
        assert np.abs(attacked.v1 - clean.v1).max() == 0.0
        assert np.abs(attacked.i1 - clean.i1).max() == 0.0

    def test_masks_the_relay_for_internal_fault(self):
        _, _, attacked = fma_stream(kind="ABCG", x=0.2, r_f=0.001)
        trip, *_ = trip_eval_stream(attacked.i1, attacked.i2, RelaySettings())
        assert not trip.any()

    def test_mode_check(self):
        scenario = default_scenario(duration_s=0.1)
        stream = generate_stream(scenario)
        with pytest.raises(InvalidAttackParams):
            apply_fma(stream, AttackSpec(StealthyFMA(x=0.5, r_f=0.0)))


class TestStealthyFMA:
    def setup_method(self):
        self.scenario = default_scenario(duration_s=0.4, fault=FaultSpec("ABC", 0.7, 0.0, 0.2))
        self.stream = generate_stream(self.scenario)

    def attack(self, x, r_f=0.0):
        return apply_stealthy_fma(
            self.stream, AttackSpec(StealthyFMA(x=x, r_f=r_f), t_start=0.2), self.scenario.line)

    def test_injection_equation_self_consistency(self):
        """The delivered remote current satisfies the voltage-check-bypass
        equation rebuilt from the true fault quantities."""
        out = self.attack(0.7)
        z_se = self.scenario.line.z_se.positive
        z_sh = self.scenario.line.z_sh.positive
        k = 250
        i1 = out.i1[k]
        i_d_true = out.i1[k] + out.i2_true[k]
        expect = (i1 * 1.4 * z_se + i_d_true * 0.0 - i1 * (z_se + z_sh)) / z_sh
        assert np.abs(out.i2[k] - expect).max() / np.abs(expect).max() < 1e-10

    def test_midline_attack_zeroes_differential(self):
        out = self.attack(0.5)
        i_d = positive_sequence(out.i1[250:] + out.i2[250:])
        i1 = positive_sequence(out.i1[250:])
        assert np.abs(i_d / i1).max() < 1e-12

    @pytest.mark.parametrize("x", [0.2, 0.9])
    def test_ratio_identity_on_shunt_base(self, x):
        """(i_d/i1) * z_sh equals (2x-1) * z_se for a bolted fault; the
        angle picks the series-impedance angle, plus a half turn when the
        fault sits in the near half."""
        out = self.attack(x)
        z_se = self.scenario.line.z_se.positive
        ratio = stealthy_differential_ratio(out, self.scenario.line)[250:]
        expect = (2 * x - 1) * z_se
        assert np.abs(ratio - expect).max() / abs(expect) < 1e-9
        ang = np.angle(ratio / positive_sequence(out.i1[250:]) * positive_sequence(out.i1[250:]))
        if x > 0.5:
            assert np.allclose(np.angle(ratio), np.angle(z_se), atol=1e-9)
        else:
            target = np.angle(z_se) + np.pi
            diff = np.angle(np.exp(1j * (np.angle(ratio) - target)))
            assert np.abs(diff).max() < 1e-9

    def test_resistive_fault_ratio(self):
        x, r_f = 0.7, 10.0
        scenario = default_scenario(duration_s=0.4, fault=FaultSpec("ABC", x, r_f, 0.2))
        stream = generate_stream(scenario)
        out = apply_stealthy_fma(stream, AttackSpec(StealthyFMA(x=x, r_f=r_f), t_start=0.2),
                                 scenario.line)
        z_se = scenario.line.z_se.positive
        k = 260
        i1 = positive_sequence(out.i1[k][None, :])[0]
        i_d_true = positive_sequence((out.i1[k] + out.i2_true[k])[None, :])[0]
        ratio = stealthy_differential_ratio(out, scenario.line)[k]
        expect = (2 * x - 1) * z_se + (i_d_true / i1) * r_f
        assert abs(ratio - expect) / abs(expect) < 1e-9

    def test_invalid_position(self):
        with pytest.raises(InvalidAttackParams):
            self.attack(1.5)


class TestNoise:
    def test_disabled_noise_is_identity(self):
        stream = generate_stream(default_scenario(duration_s=0.2))
        out = add_awgn(stream, np.inf, 7)
        assert np.abs(out.v1 - stream.v1).max() == 0.0

    def test_empirical_snr(self):
        scenario = default_scenario(duration_s=0.2)
        base = generate_stream(scenario)
        # tile to get a long estimation window
        reps = 500  # 100k samples
        import dataclasses

        long = dataclasses.replace(
            base,
            t=np.arange(len(base) * reps) / base.sample_rate_hz,
            v1=np.tile(base.v1, (reps, 1)),
            i1=np.tile(base.i1, (reps, 1)),
            i2=np.tile(base.i2, (reps, 1)),
            i2_true=np.tile(base.i2_true, (reps, 1)),
            fault_active=np.tile(base.fault_active, reps),
            fault_internal=np.tile(base.fault_internal, reps),
            attack_active=np.tile(base.attack_active, reps),
        )
        noisy = add_awgn(long, 35.0, 42)
        for name in ("v1", "i1", "i2"):
            clean = getattr(long, name)
            delivered = getattr(noisy, name)
            p_sig = np.mean(np.abs(clean) ** 2)
            p_noise = np.mean(np.abs(delivered - clean) ** 2)
            snr_db = 10 * np.log10(p_sig / p_noise)
            assert snr_db == pytest.approx(35.0, abs=0.5)

    def test_deterministic_given_seed(self):
        stream = generate_stream(default_scenario(duration_s=0.2))
        a = add_awgn(stream, 35.0, 9)
        b = add_awgn(stream, 35.0, 9)
        c = add_awgn(stream, 35.0, 10)
        assert np.array_equal(a.v1, b.v1)
        assert not np.array_equal(a.v1, c.v1)

    def test_estimation_gain(self):
        stream = generate_stream(default_scenario(duration_s=0.05))
        # 1.5 cycles at 1 kHz / 60 Hz = 25 samples -> 10 log10(25)
        assert phasor_estimation_gain_db(stream) == pytest.approx(13.979, abs=1e-3)


class TestCTSaturation:
    def test_identity_parameters(self):
        stream = generate_stream(default_scenario(
            duration_s=0.3, fault=FaultSpec("ABC", 0.5, 0.0, 0.15)))
        out = apply_ct_saturation(stream, CTSaturationSpec(mag_scale=1.0, angle_advance_rad=0.0))
        assert np.abs(out.i1 - stream.i1).max() < 1e-15

    def test_distortion_above_knee(self):
        stream = generate_stream(default_scenario(duration_s=0.1))
        stream.i1[:, 0] = 2.0 + 0j  # force one hot phase
        out = apply_ct_saturation(stream, CTSaturationSpec(mag_scale=0.7, angle_advance_rad=0.2,
                                                           knee_ka=1.0))
        z = out.i1[0, 0]
        assert abs(z) == pytest.approx(1.4)
        assert np.angle(z) == pytest.approx(0.2)

    def test_healthy_currents_below_knee_unchanged(self):
        stream = generate_stream(default_scenario(duration_s=0.1))
        out = apply_ct_saturation(stream, CTSaturationSpec())
        assert np.abs(out.i1 - stream.i1).max() == 0.0

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            CTSaturationSpec(mag_scale=0.0)
        with pytest.raises(ValueError):
            CTSaturationSpec(angle_advance_rad=-1.0)


class TestMaskingSweep:
    def test_masking_holds_across_fault_kinds(self):
        """The replayed healthy differential keeps the relay blocked for
        every masked internal fault."""
        settings = RelaySettings()
        for kind in ("AG", "BC", "ABG", "ABCG"):
            for x in (0.1, 0.5, 0.9):
                for r_f in (0.001, 100.0):
                    _, _, attacked = fma_stream(kind=kind, x=x, r_f=r_f)
                    trip, i_d, _, i_op = trip_eval_stream(attacked.i1, attacked.i2, settings)
                    assert not trip.any(), (kind, x, r_f)

    def test_distortion_order(self):
        """apply_distortions saturates first, then adds noise."""
        scenario, _, attacked = fma_stream(kind="ABC", x=0.3, r_f=0.001)
        spec = DistortionSpec(snr_db=35.0, ct_saturation=CTSaturationSpec())
        out = apply_distortions(attacked, spec, rng_seed=3)
        manual = apply_ct_saturation(attacked, spec.ct_saturation)
        manual = add_awgn(manual, 35.0 + phasor_estimation_gain_db(attacked), 3)
        assert np.array_equal(out.i1, manual.i1)
        assert np.array_equal(out.v1, manual.v1)
