import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import relay_trip_oracle

from fmaguard.phasors import Phasor, ThreePhaseSet
from fmaguard.relay import (
    RelaySettings,
    differential_current,
    operating_current,
    operating_current_array,
    restraining_current,
    trip_decision,
    trip_eval_stream,
)

SETTINGS = RelaySettings()  # study values: 0.05, 0.585, 0.2, 0.4


def balanced(mag, deg):
    return ThreePhaseSet.balanced(Phasor.from_polar_deg(mag, deg))


class TestQuantities:
    def test_differential_through_current_cancels(self):
        d = differential_current(Phasor.from_polar_deg(1, 0), Phasor.from_polar_deg(1, 180))
        assert d.magnitude < 1e-12

    def test_differential_zero(self):
        assert differential_current(Phasor(), Phasor()).magnitude == 0.0

    def test_differential_internal_infeed(self):
        d = differential_current(Phasor.from_polar_deg(1, 0), Phasor.from_polar_deg(1, 0))
        assert d.as_complex == pytest.approx(2.0 + 0j)

    def test_restraining_examples(self):
        assert restraining_current(Phasor.from_polar_deg(1, 0), Phasor.from_polar_deg(1, 180)) == pytest.approx(2.0)
        assert restraining_current(Phasor(), Phasor()) == 0.0
        # study's normal flows: the restraint is the sum of magnitudes
        r = restraining_current(Phasor.from_polar_deg(0.273, 97.8),
                                Phasor.from_polar_deg(0.29, -73.56))
        assert r == pytest.approx(0.563, abs=1e-12)

    def test_operating_current_first_branch(self):
        # 0.05 + 0.2 * 0.4
        assert operating_current(0.4, SETTINGS) == pytest.approx(0.13)

    def test_operating_current_second_branch(self):
        # 0.05 + 0.2 * 0.585 + 0.4 * (1 - 0.585)
        assert operating_current(1.0, SETTINGS) == pytest.approx(0.333)

    def test_operating_current_at_zero(self):
        assert operating_current(0.0, SETTINGS) == SETTINGS.i_d0

    def test_continuity_at_breakpoint(self):
        below = operating_current(SETTINGS.i_b - 1e-12, SETTINGS)
        above = operating_current(SETTINGS.i_b + 1e-12, SETTINGS)
        assert above == pytest.approx(below, abs=1e-9)

    def test_monotone_non_decreasing(self):
        grid = np.linspace(0, 3, 1001)
        vals = operating_current_array(grid, SETTINGS)
        assert (np.diff(vals) >= -1e-15).all()


class TestTripDecision:
    def test_internal_infeed_trips(self):
        i1 = balanced(1.0, 0.0)
        verdict = trip_decision(i1, i1, SETTINGS)
        assert verdict.any_trip
        assert verdict.i_d[0] == pytest.approx(2.0)
        assert verdict.i_op[0] == pytest.approx(0.733)

    def test_healthy_calibrated_flow_blocks(self):
        i1 = balanced(0.29, -73.56)
        i2 = balanced(0.273, 97.8)
        verdict = trip_decision(i1, i2, SETTINGS)
        assert not verdict.any_trip
        assert verdict.i_op[0] == pytest.approx(0.163, abs=5e-4)
        assert verdict.i_d[0] == pytest.approx(0.046, abs=1e-3)

    def test_perfectly_masked_blocks(self):
        i1 = balanced(1.0, 0.0)
        i2 = ThreePhaseSet.from_array(-i1.as_array())
        verdict = trip_decision(i1, i2, SETTINGS)
        assert not verdict.any_trip
        assert verdict.i_d == (0.0, 0.0, 0.0)

    def test_any_trip_is_or_of_phases(self):
        i1 = ThreePhaseSet(Phasor.from_polar_deg(2, 0), Phasor(0.01, 0), Phasor(0.01, 0))
        i2 = ThreePhaseSet(Phasor.from_polar_deg(2, 0), Phasor(-0.01, 0), Phasor(-0.01, 0))
        verdict = trip_decision(i1, i2, SETTINGS)
        assert verdict.trips == (True, False, False)
        assert verdict.any_trip

    def test_invalid_settings(self):
        with pytest.raises(ValueError):
            RelaySettings(i_d0=-1)
        with pytest.raises(ValueError):
            RelaySettings(k1=0.5, k2=0.3)


class TestOracleGrid:
    def test_brute_force_grid_equivalence(self):
        """200x200 grid over (|I_d|, I_r): exact boolean match with an
        independently coded characteristic."""
        i_d = np.linspace(0, 2, 200)
        i_r = np.linspace(0, 2, 200)
        dd, rr = np.meshgrid(i_d, i_r, indexing="ij")
        ours = dd >= operating_current_array(rr, SETTINGS)
        for a in range(200):
            for b in range(200):
                ref = relay_trip_oracle(dd[a, b], rr[a, b], SETTINGS.i_d0,
                                        SETTINGS.i_b, SETTINGS.k1, SETTINGS.k2)
                assert ours[a, b] == ref

    @given(
        mag1=st.floats(min_value=0, max_value=5),
        mag2=st.floats(min_value=0, max_value=5),
        ang1=st.floats(min_value=-180, max_value=180),
        ang2=st.floats(min_value=-180, max_value=180),
        scale=st.floats(min_value=0.01, max_value=100.0),
    )
    @settings(max_examples=200)
    def test_scale_covariance(self, mag1, mag2, ang1, ang2, scale):
        i1 = balanced(mag1, ang1)
        i2 = balanced(mag2, ang2)
        base = trip_decision(i1, i2, SETTINGS)
        scaled_settings = RelaySettings(i_d0=SETTINGS.i_d0 * scale, i_b=SETTINGS.i_b * scale,
                                        k1=SETTINGS.k1, k2=SETTINGS.k2)
        scaled = trip_decision(balanced(mag1 * scale, ang1), balanced(mag2 * scale, ang2),
                               scaled_settings)
        assert base.trips == scaled.trips


class TestVectorized:
    def test_stream_eval_matches_scalar(self, rng):
        i1 = rng.normal(size=(50, 3)) + 1j * rng.normal(size=(50, 3))
        i2 = rng.normal(size=(50, 3)) + 1j * rng.normal(size=(50, 3))
        trip, i_d, i_r, i_op = trip_eval_stream(i1, i2, SETTINGS)
        for k in range(50):
            verdict = trip_decision(ThreePhaseSet.from_array(i1[k]),
                                    ThreePhaseSet.from_array(i2[k]), SETTINGS)
            assert tuple(trip[k]) == verdict.trips
            assert i_d[k] == pytest.approx(verdict.i_d)
            assert i_op[k] == pytest.approx(verdict.i_op)
