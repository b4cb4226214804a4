"""YAML run configurations with a strict, documented schema.

Every mapping rejects unknown keys so typos fail loudly.  Complex
quantities are written either as ``[re, im]`` pairs or as
``{mag: , deg: }`` polar mappings; angles at this boundary are degrees.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import yaml

from .attack import AttackSpec, BasicFMA, CTSaturationSpec, DistortionSpec, StealthyFMA
from .classifier import DEFAULT_HIDDEN, DEFAULT_L2, TrainConfig
from .harness import SweepSpec
from .mismatch import MIConfig
from .phasors import Phasor
from .relay import RelaySettings
from .scenario import (
    ExternalFaultSpec,
    FaultSpec,
    LineModel,
    LineScenario,
    LoadScale,
    ShuntSwitch,
    SourceEquivalent,
    SourceStep,
    default_line,
    default_scenario,
    healthy_reference,
)
from .sequence_network import SequenceImpedance


class ConfigError(Exception):
    """Malformed or invalid run configuration."""


def load_yaml(path) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be a mapping")
    return data


def _expect_mapping(value, allowed, context: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{context} must be a mapping")
    unknown = set(value) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {context}: {sorted(unknown)}")
    return value


def _complex(value, context: str) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, dict):
        m = _expect_mapping(value, {"mag", "deg"}, context)
        return Phasor.from_polar_deg(float(m.get("mag", 0.0)), float(m.get("deg", 0.0))).as_complex
    raise ConfigError(f"{context} must be [re, im] or {{mag, deg}}")


def _phasor(value, context: str) -> Phasor:
    return Phasor.from_complex(_complex(value, context))


# --- scenario block ----------------------------------------------------------

_FAULT_KEYS = {"kind", "x", "r_f", "t_inception", "t_clear"}


def _fault(block, context: str) -> FaultSpec:
    m = _expect_mapping(block, _FAULT_KEYS, context)
    try:
        return FaultSpec(
            kind=str(m["kind"]),
            x=float(m["x"]),
            r_f=float(m["r_f"]),
            t_inception=float(m["t_inception"]),
            t_clear=None if m.get("t_clear") is None else float(m["t_clear"]),
        )
    except KeyError as exc:
        raise ConfigError(f"{context} is missing {exc}") from exc
    except (ValueError, Exception) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid {context}: {exc}") from exc


def _event(block, index: int):
    m = _expect_mapping(block, {"type", "t", "terminal", "factor", "z_shunt"},
                        f"events[{index}]")
    etype = m.get("type")
    t = float(m.get("t", 0.0))
    if etype == "shunt_switch":
        return ShuntSwitch(t=t, terminal=int(m.get("terminal", 2)),
                           z_shunt=SequenceImpedance.symmetric(
                               _complex(m["z_shunt"], f"events[{index}].z_shunt")))
    if etype == "source_step":
        return SourceStep(t=t, terminal=int(m.get("terminal", 2)),
                          factor=float(m.get("factor", 1.0)))
    if etype == "load_scale":
        return LoadScale(t=t, factor=float(m.get("factor", 1.0)))
    raise ConfigError(f"events[{index}].type must be one of shunt_switch, source_step, load_scale")


_LINE_KEYS = {"z_se", "z_sh", "k0_series", "k0_shunt", "length_km"}
_SOURCE_KEYS = {"emf", "z_th", "z_th_zero"}
_SCENARIO_KEYS = {"duration_s", "sample_rate_hz", "system_freq_hz", "fault",
                  "external_fault", "events", "line", "sources"}


def _line(block) -> LineModel:
    m = _expect_mapping(block, _LINE_KEYS, "line")
    base = default_line()
    z_se = _complex(m["z_se"], "line.z_se") if "z_se" in m else base.z_se.positive
    z_sh = _complex(m["z_sh"], "line.z_sh") if "z_sh" in m else base.z_sh.positive
    return LineModel(
        z_se=SequenceImpedance.from_positive(z_se, k0=float(m.get("k0_series", 3.0))),
        z_sh=SequenceImpedance.from_positive(z_sh, k0=float(m.get("k0_shunt", 1.6))),
        length_km=float(m.get("length_km", base.length_km)),
    )


def _source(block, index: int, fallback: SourceEquivalent) -> SourceEquivalent:
    m = _expect_mapping(block, _SOURCE_KEYS, f"sources[{index}]")
    emf = _phasor(m["emf"], f"sources[{index}].emf") if "emf" in m else fallback.emf
    z_th = _complex(m["z_th"], f"sources[{index}].z_th") if "z_th" in m else fallback.z_th.positive
    z_th0 = (_complex(m["z_th_zero"], f"sources[{index}].z_th_zero")
             if "z_th_zero" in m else fallback.z_th.zero)
    return SourceEquivalent(emf=emf, z_th=SequenceImpedance(z_th0, z_th, z_th))


def parse_scenario(block) -> LineScenario:
    m = _expect_mapping(block, _SCENARIO_KEYS, "scenario")
    base = default_scenario()
    line = _line(m["line"]) if "line" in m else base.line
    s1, s2 = base.source1, base.source2
    if "sources" in m:
        if not isinstance(m["sources"], list) or len(m["sources"]) != 2:
            raise ConfigError("sources must be a list of two mappings")
        s1 = _source(m["sources"][0], 0, base.source1)
        s2 = _source(m["sources"][1], 1, base.source2)
    fault = _fault(m["fault"], "fault") if m.get("fault") else None
    external = None
    if m.get("external_fault"):
        em = _expect_mapping(m["external_fault"], _FAULT_KEYS | {"terminal"}, "external_fault")
        terminal = int(em.get("terminal", 2))
        inner = {k: v for k, v in em.items() if k != "terminal"}
        external = ExternalFaultSpec(terminal=terminal, fault=_fault(inner, "external_fault"))
    events = tuple(_event(e, i) for i, e in enumerate(m.get("events") or []))
    try:
        return LineScenario(
            line=line,
            source1=s1,
            source2=s2,
            fault=fault,
            external_fault=external,
            events=events,
            duration_s=float(m.get("duration_s", 0.45)),
            sample_rate_hz=float(m.get("sample_rate_hz", 1000.0)),
            system_freq_hz=float(m.get("system_freq_hz", 60.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def parse_attack(block, scenario: LineScenario) -> AttackSpec | None:
    m = _expect_mapping(block, {"mode", "c_a", "x", "r_f", "t_start"}, "attack")
    mode = m.get("mode", "none")
    t_start = float(m.get("t_start", 0.0))
    if mode in (None, "none"):
        return None
    if mode == "basic":
        if "c_a" in m and m["c_a"] != "eavesdropped":
            c_a = _phasor(m["c_a"], "attack.c_a")
        else:
            # the stealthier constant: the eavesdropped healthy differential
            c_a = healthy_reference(scenario).i_d
        return AttackSpec(BasicFMA(c_a=c_a), t_start=t_start)
    if mode == "stealthy":
        try:
            return AttackSpec(StealthyFMA(x=float(m["x"]), r_f=float(m["r_f"])),
                              t_start=t_start)
        except KeyError as exc:
            raise ConfigError(f"stealthy attack requires {exc}") from exc
    raise ConfigError("attack.mode must be one of none, basic, stealthy")


def parse_distortion(block) -> DistortionSpec:
    m = _expect_mapping(block, {"snr_db", "ct_saturation"}, "distortion")
    ct = None
    if m.get("ct_saturation"):
        cm = _expect_mapping(m["ct_saturation"],
                             {"mag_scale", "angle_advance_rad", "knee_ka"},
                             "distortion.ct_saturation")
        ct = CTSaturationSpec(
            mag_scale=float(cm.get("mag_scale", 0.85)),
            angle_advance_rad=float(cm.get("angle_advance_rad", 0.15)),
            knee_ka=float(cm.get("knee_ka", 1.0)),
        )
    snr = m.get("snr_db")
    try:
        return DistortionSpec(snr_db=None if snr is None else float(snr), ct_saturation=ct)
    except ValueError as exc:
        raise ConfigError(f"invalid distortion: {exc}") from exc


def parse_relay(block) -> RelaySettings:
    m = _expect_mapping(block, {"i_d0", "i_b", "k1", "k2"}, "relay")
    try:
        return RelaySettings(
            i_d0=float(m.get("i_d0", 0.05)),
            i_b=float(m.get("i_b", 0.585)),
            k1=float(m.get("k1", 0.2)),
            k2=float(m.get("k2", 0.4)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid relay settings: {exc}") from exc


def parse_mi(block, scenario: LineScenario) -> MIConfig:
    m = _expect_mapping(block, {"f", "t1", "t2", "i_d_n"}, "mi")
    i_d_n = (_phasor(m["i_d_n"], "mi.i_d_n") if "i_d_n" in m
             else healthy_reference(scenario).i_d)
    try:
        return MIConfig(
            i_d_n=i_d_n,
            f=float(m.get("f", 0.05)),
            t1=int(m.get("t1", 9)),
            t2=int(m.get("t2", 99)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid mi settings: {exc}") from exc


def parse_sweep(block) -> SweepSpec:
    m = _expect_mapping(block, {"kinds", "locations", "resistances", "snr_db",
                                "positives", "negatives", "negative_external_fraction",
                                "saturate_externals", "external_terminals",
                                "both_directions"}, "sweep")
    kwargs = {}
    if "kinds" in m:
        kwargs["kinds"] = tuple(str(k) for k in m["kinds"])
    if "locations" in m:
        kwargs["locations"] = tuple(float(v) for v in m["locations"])
    if "resistances" in m:
        kwargs["resistances"] = tuple(float(v) for v in m["resistances"])
    if "snr_db" in m and m["snr_db"] is not None:
        kwargs["snr_db"] = float(m["snr_db"])
    if "positives" in m and m["positives"] is not None:
        kwargs["positives"] = int(m["positives"])
    if "negatives" in m:
        kwargs["negatives"] = int(m["negatives"])
    if "negative_external_fraction" in m:
        kwargs["negative_external_fraction"] = float(m["negative_external_fraction"])
    if "saturate_externals" in m:
        kwargs["saturate_externals"] = bool(m["saturate_externals"])
    if "external_terminals" in m:
        kwargs["external_terminals"] = tuple(int(v) for v in m["external_terminals"])
    if "both_directions" in m:
        kwargs["both_directions"] = bool(m["both_directions"])
    try:
        return SweepSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid sweep: {exc}") from exc


def parse_train(block) -> TrainConfig:
    m = _expect_mapping(block, {"learning_rate", "epochs", "batch_size", "seed",
                                "fp_cost", "fn_cost", "l2_lambda", "hidden",
                                "val_fraction", "k_folds"}, "train")
    try:
        return TrainConfig(
            learning_rate=float(m.get("learning_rate", 1e-3)),
            epochs=int(m.get("epochs", 150)),
            batch_size=int(m.get("batch_size", 64)),
            seed=int(m.get("seed", 0)),
            fp_cost=float(m.get("fp_cost", 10.0)),
            fn_cost=float(m.get("fn_cost", 1.0)),
            l2_lambda=float(m.get("l2_lambda", DEFAULT_L2)),
            hidden=tuple(int(h) for h in m.get("hidden", DEFAULT_HIDDEN)),
            val_fraction=float(m.get("val_fraction", 0.15)),
            k_folds=int(m.get("k_folds", 10)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid train settings: {exc}") from exc


# --- per-command configs -------------------------------------------------------

@dataclass(frozen=True)
class SimulateConfig:
    scenario: LineScenario
    attack: AttackSpec | None
    distortion: DistortionSpec
    relay: RelaySettings
    mi: MIConfig
    model_path: str | None
    zcc_threshold: float
    seed: int


def parse_simulate_config(data: dict) -> SimulateConfig:
    m = _expect_mapping(data, {"scenario", "attack", "distortion", "relay", "mi",
                               "zcc", "seed"}, "config")
    scenario = parse_scenario(m.get("scenario"))
    zm = _expect_mapping(m.get("zcc"), {"model", "threshold"}, "zcc")
    return SimulateConfig(
        scenario=scenario,
        attack=parse_attack(m.get("attack"), scenario),
        distortion=parse_distortion(m.get("distortion")),
        relay=parse_relay(m.get("relay")),
        mi=parse_mi(m.get("mi"), scenario),
        model_path=zm.get("model"),
        zcc_threshold=float(zm.get("threshold", 0.5)),
        seed=int(m.get("seed", 0)),
    )


@dataclass(frozen=True)
class DatasetConfig:
    sweep: SweepSpec
    f: float
    seed: int


def parse_dataset_config(data: dict) -> DatasetConfig:
    m = _expect_mapping(data, {"sweep", "f", "seed"}, "config")
    return DatasetConfig(
        sweep=parse_sweep(m.get("sweep")),
        f=float(m.get("f", 0.05)),
        seed=int(m.get("seed", 0)),
    )


@dataclass(frozen=True)
class TrainRunConfig:
    dataset_path: str
    train: TrainConfig
    run_kfold: bool


def parse_train_config(data: dict) -> TrainRunConfig:
    m = _expect_mapping(data, {"dataset", "train", "kfold"}, "config")
    if "dataset" not in m:
        raise ConfigError("train config requires a dataset path")
    return TrainRunConfig(
        dataset_path=str(m["dataset"]),
        train=parse_train(m.get("train")),
        run_kfold=bool(m.get("kfold", False)),
    )


@dataclass(frozen=True)
class EvalConfig:
    model_path: str
    sweep: SweepSpec
    f: float
    threshold: float
    seed: int


def parse_eval_config(data: dict) -> EvalConfig:
    m = _expect_mapping(data, {"model", "sweep", "f", "threshold", "seed"}, "config")
    if "model" not in m:
        raise ConfigError("eval config requires a model path")
    return EvalConfig(
        model_path=str(m["model"]),
        sweep=parse_sweep(m.get("sweep")),
        f=float(m.get("f", 0.05)),
        threshold=float(m.get("threshold", 0.5)),
        seed=int(m.get("seed", 0)),
    )


@dataclass(frozen=True)
class RocConfig:
    sweep: SweepSpec
    f_list: tuple
    thresholds: tuple
    model_path: str | None
    seed: int


def parse_roc_config(data: dict) -> RocConfig:
    m = _expect_mapping(data, {"sweep", "f_list", "thresholds", "model", "seed"}, "config")
    f_list = tuple(float(v) for v in m.get("f_list") or
                   (0.001, 0.002, 0.005, 0.01, 0.02, 0.03, 0.05, 0.07, 0.10))
    thresholds = tuple(float(v) for v in m.get("thresholds") or (0.5,))
    return RocConfig(
        sweep=parse_sweep(m.get("sweep")),
        f_list=f_list,
        thresholds=thresholds,
        model_path=m.get("model"),
        seed=int(m.get("seed", 0)),
    )


def with_seed(cfg, seed: int | None):
    """Root-seed override from the command line."""
    if seed is None:
        return cfg
    return replace(cfg, seed=seed)
