"""Scenario configuration files: INI sections, strict schema, clear errors.

A config file uses the sections [scenario], [stbc], [apf], [channel], [codec]
and [sweep]; every key has a default, unknown sections or keys are rejected.
See README.md for a complete annotated example.
"""

from __future__ import annotations

import configparser

from .channel import ChannelConfig
from .harness import ScenarioConfig
from .stbc import StbcConfig
from .vchan import ApfConfig


class ConfigError(ValueError):
    """Raised when a config file cannot be parsed or validated."""


def _parse_float_list(text: str) -> tuple[float, ...]:
    parts = [p for chunk in text.split(",") for p in chunk.split()]
    if not parts:
        raise ConfigError("expected at least one value")
    return tuple(float(p) for p in parts)


_SCHEMA: dict[str, dict[str, type]] = {
    "scenario": {
        "uavs": int,
        "scheme": str,
        "estimator": str,
        "master_seed": int,
        "ser_point": str,
        "vchan_redraw": str,
    },
    "stbc": {
        "subcarriers": int,
        "group_size": int,
        "code_dims": int,
        "cp_len": int,
        "block_symbols": int,
        "pilot_symbols": int,
        "pilot_seed": int,
    },
    "apf": {
        "order": int,
        "pole_modulus": float,
        "taps": int,
    },
    "channel": {
        "taps": int,
        "k_rice_db": float,
        "pdp_decay": float,
        "los_phase": str,
    },
    "codec": {
        "interleaver_seed": int,
    },
    "sweep": {
        "esn0_db": tuple,
        "blocks_per_point": int,
        "min_symbol_errors": int,
    },
}


def parse_config(path: str) -> ScenarioConfig:
    """Read and validate a scenario config file.

    Raises ConfigError on unreadable files, unknown sections or keys, values
    of the wrong type, and configurations that violate scenario invariants.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file: {exc}") from exc

    values: dict[str, dict[str, object]] = {}
    problems: list[str] = []
    for section in parser.sections():
        if section not in _SCHEMA:
            problems.append(f"unknown section [{section}]")
            continue
        values[section] = {}
        for key, raw in parser.items(section):
            expected = _SCHEMA[section].get(key)
            if expected is None:
                problems.append(f"unknown key {key} in [{section}]")
                continue
            try:
                if expected is tuple:
                    values[section][key] = _parse_float_list(raw)
                elif expected is int:
                    values[section][key] = int(raw)
                elif expected is float:
                    values[section][key] = float(raw)
                else:
                    values[section][key] = raw.strip()
            except (ValueError, ConfigError):
                problems.append(f"bad value for {key} in [{section}]: {raw!r}")
    if problems:
        raise ConfigError("; ".join(problems))

    def section(name: str) -> dict:
        return values.get(name, {})

    apf = ApfConfig(
        order=section("apf").get("order", 4),
        pole_modulus=section("apf").get("pole_modulus", 0.7),
        num_taps=section("apf").get("taps", 12),
    )
    stbc_kwargs = dict(section("stbc"))
    stbc_cfg = StbcConfig(vchan_taps=apf.num_taps, **stbc_kwargs)
    channel_cfg = ChannelConfig(
        num_taps=section("channel").get("taps", 3),
        k_rice_db=section("channel").get("k_rice_db", 20.0),
        pdp_decay=section("channel").get("pdp_decay", 1.0),
        los_phase=section("channel").get("los_phase", "random"),
    )
    scenario = section("scenario")
    sweep = section("sweep")
    cfg = ScenarioConfig(
        uavs=scenario.get("uavs", 2),
        scheme=scenario.get("scheme", "apf"),
        estimator=scenario.get("estimator", "cyclic-delay"),
        master_seed=scenario.get("master_seed", 12345),
        ser_point=scenario.get("ser_point", "post-decoder"),
        vchan_redraw=scenario.get("vchan_redraw", "per-block"),
        interleaver_seed=section("codec").get("interleaver_seed", 7),
        stbc=stbc_cfg,
        apf=apf,
        channel=channel_cfg,
        esn0_grid_db=sweep.get("esn0_db", (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)),
        blocks_per_point=sweep.get("blocks_per_point", 20000),
        min_symbol_errors=sweep.get("min_symbol_errors", 100),
    )
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg
