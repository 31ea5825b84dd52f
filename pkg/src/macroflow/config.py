"""Config-file schema, override merging, and validation for the CLI.

A run is fully described by one YAML document. Precedence, lowest to
highest: built-in defaults < config file < repeated ``--set key=value``
overrides < dedicated flags (``--seed``, ``--replications``). Keys are the
dotted paths documented in :data:`DEFAULT_TEMPLATE`.
"""

from __future__ import annotations

from dataclasses import asdict

import yaml

from .agents import ARCHETYPE_NAMES, TraderArchetype
from .allocation import AllocationConfig
from .choice import ChoiceCoefficients, SizeCoefficients
from .engine import SimConfig
from .market import CapmParams, ReturnModel
from .shocks import ShockConfig


class ConfigError(ValueError):
    """Invalid configuration; message names the offending key."""


def config_to_dict(cfg: SimConfig) -> dict:
    shock = asdict(cfg.shock)
    shock.pop("horizon")  # always driven by n_events
    market = asdict(cfg.market)
    market["capm"].pop("market_premium")  # redrawn per event from market_mean/std
    return {
        "seed": cfg.seed,
        "n_traders_per_type": cfg.n_traders_per_type,
        "n_events": cfg.n_events,
        "replications": cfg.replications,
        "shock": shock,
        "market": market,
        "allocation": {
            "grid_step": cfg.allocation.grid_step,
            "n_draws": cfg.allocation.n_draws,
            "crn": cfg.allocation.use_common_random_numbers,
        },
        "choice": {size: asdict(getattr(cfg.choice, size))
                   for size in ("small", "medium", "large")},
        "agents": {a.name: {"risk_aversion": a.risk_aversion, "info_level": a.info_level,
                            "max_risk": a.max_risk, "base_txn_cost": a.base_txn_cost}
                   for a in cfg.agents},
        "engine": {
            "surprise_in_beliefs": cfg.surprise_in_beliefs,
            "initial_wealth": cfg.initial_wealth,
        },
    }


def _take(section: dict, path: str, key: str, kind, default):
    """Pop section[key], type-checked; dotted `path` used in error messages."""
    if key not in section:
        return default
    value = section.pop(key)
    full = f"{path}.{key}" if path else key
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{full}: expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{full}: expected an integer, got {value!r}")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{full}: expected true/false, got {value!r}")
        return value
    raise AssertionError(kind)


def _reject_unknown(section: dict, path: str):
    if section:
        key = sorted(section)[0]
        full = f"{path}.{key}" if path else key
        raise ConfigError(f"unknown config key: {full}")


def _subsection(data: dict, key: str) -> dict:
    sub = data.pop(key, {})
    if sub is None:
        sub = {}
    if not isinstance(sub, dict):
        raise ConfigError(f"{key}: expected a mapping, got {sub!r}")
    return dict(sub)


def config_from_dict(data: dict) -> SimConfig:
    """Build a validated SimConfig; raises ConfigError naming any bad key."""
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a mapping, got {data!r}")
    data = dict(data)
    defaults = SimConfig()
    try:
        shock_d = _subsection(data, "shock")
        shock = ShockConfig(
            temp_scale=_take(shock_d, "shock", "temp_scale", float, defaults.shock.temp_scale),
            perm_scale=_take(shock_d, "shock", "perm_scale", float, defaults.shock.perm_scale),
            temp_ar=_take(shock_d, "shock", "temp_ar", float, defaults.shock.temp_ar),
            liq_mean=_take(shock_d, "shock", "liq_mean", float, defaults.shock.liq_mean),
            liq_scale=_take(shock_d, "shock", "liq_scale", float, defaults.shock.liq_scale),
            liquidity_floor=_take(shock_d, "shock", "liquidity_floor", float,
                                  defaults.shock.liquidity_floor),
        )
        _reject_unknown(shock_d, "shock")

        market_d = _subsection(data, "market")
        capm_d = _subsection(market_d, "capm")
        dc = defaults.market.capm
        capm = CapmParams(
            alpha=_take(capm_d, "market.capm", "alpha", float, dc.alpha),
            beta=_take(capm_d, "market.capm", "beta", float, dc.beta),
            surprise_loading=_take(capm_d, "market.capm", "surprise_loading", float,
                                   dc.surprise_loading),
            perm_loading=_take(capm_d, "market.capm", "perm_loading", float, dc.perm_loading),
            eps_std=_take(capm_d, "market.capm", "eps_std", float, dc.eps_std),
        )
        _reject_unknown(capm_d, "market.capm")
        dm = defaults.market
        market = ReturnModel(
            rf=_take(market_d, "market", "rf", float, dm.rf),
            risky_mean=_take(market_d, "market", "risky_mean", float, dm.risky_mean),
            risky_std_base=_take(market_d, "market", "risky_std_base", float, dm.risky_std_base),
            noise_mult=_take(market_d, "market", "noise_mult", float, dm.noise_mult),
            market_mean=_take(market_d, "market", "market_mean", float, dm.market_mean),
            market_std=_take(market_d, "market", "market_std", float, dm.market_std),
            return_floor=_take(market_d, "market", "return_floor", float, dm.return_floor),
            capm=capm,
        )
        _reject_unknown(market_d, "market")

        alloc_d = _subsection(data, "allocation")
        da = defaults.allocation
        allocation = AllocationConfig(
            grid_step=_take(alloc_d, "allocation", "grid_step", float, da.grid_step),
            n_draws=_take(alloc_d, "allocation", "n_draws", int, da.n_draws),
            use_common_random_numbers=_take(alloc_d, "allocation", "crn", bool,
                                            da.use_common_random_numbers),
        )
        _reject_unknown(alloc_d, "allocation")

        choice_d = _subsection(data, "choice")
        sizes = {}
        for size in ("small", "medium", "large"):
            size_d = _subsection(choice_d, size)
            path = f"choice.{size}"
            ds = getattr(defaults.choice, size)
            sizes[size] = SizeCoefficients(
                c0=_take(size_d, path, "c0", float, ds.c0),
                c_ra=_take(size_d, path, "c_ra", float, ds.c_ra),
                c_sur=_take(size_d, path, "c_sur", float, ds.c_sur),
                c_liq=_take(size_d, path, "c_liq", float, ds.c_liq),
                multiplier=_take(size_d, path, "multiplier", float, ds.multiplier),
            )
            _reject_unknown(size_d, path)
        choice = ChoiceCoefficients(**sizes)
        _reject_unknown(choice_d, "choice")

        agents_d = _subsection(data, "agents")
        agents = []
        for default_arch in defaults.agents:
            arch_d = _subsection(agents_d, default_arch.name)
            path = f"agents.{default_arch.name}"
            agents.append(TraderArchetype(
                name=default_arch.name,
                risk_aversion=_take(arch_d, path, "risk_aversion", float,
                                    default_arch.risk_aversion),
                info_level=_take(arch_d, path, "info_level", float, default_arch.info_level),
                max_risk=_take(arch_d, path, "max_risk", float, default_arch.max_risk),
                base_txn_cost=_take(arch_d, path, "base_txn_cost", float,
                                    default_arch.base_txn_cost),
            ))
            _reject_unknown(arch_d, path)
        unknown_agents = set(agents_d) - set(ARCHETYPE_NAMES)
        if unknown_agents:
            raise ConfigError(f"unknown config key: agents.{sorted(unknown_agents)[0]}")

        engine_d = _subsection(data, "engine")
        surprise_in_beliefs = _take(engine_d, "engine", "surprise_in_beliefs", bool,
                                    defaults.surprise_in_beliefs)
        initial_wealth = _take(engine_d, "engine", "initial_wealth", float,
                               defaults.initial_wealth)
        _reject_unknown(engine_d, "engine")

        cfg = SimConfig(
            n_traders_per_type=_take(data, "", "n_traders_per_type", int,
                                     defaults.n_traders_per_type),
            n_events=_take(data, "", "n_events", int, defaults.n_events),
            seed=_take(data, "", "seed", int, defaults.seed),
            replications=_take(data, "", "replications", int, defaults.replications),
            shock=shock,
            market=market,
            allocation=allocation,
            choice=choice,
            agents=tuple(agents),
            initial_wealth=initial_wealth,
            surprise_in_beliefs=surprise_in_beliefs,
        )
        _reject_unknown(data, "")
        return cfg
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config_file(path: str) -> dict:
    """Parse a YAML config file; parse errors carry file:line anchors."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{path}: config file not found")
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f":{mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"{path}{line}: unparsable config: {exc}")
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config root must be a mapping")
    return data


def apply_override(data: dict, assignment: str) -> None:
    """Apply one ``dotted.key=value`` override (value parsed as YAML)."""
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError:
        value = raw
    node = data
    parts = key.split(".")
    for part in parts[:-1]:
        nxt = node.get(part)
        if not isinstance(nxt, dict):
            nxt = {}
            node[part] = nxt
        node = nxt
    node[parts[-1]] = value


def build_config(config_path: str | None, overrides: list[str],
                 seed: int | None = None, replications: int | None = None) -> SimConfig:
    """Merge defaults, file, --set overrides and dedicated flags."""
    data = load_config_file(config_path) if config_path else {}
    for assignment in overrides:
        apply_override(data, assignment)
    if seed is not None:
        data["seed"] = seed
    if replications is not None:
        data["replications"] = replications
    return config_from_dict(data)


_SECTION_COMMENTS = {
    "shock": "CPI surprise and liquidity processes",
    "market": "two-asset return model (rates are per event)",
    "allocation": "Monte Carlo grid search over the risky weight",
    "choice": "order-size utility coefficients and notional multipliers",
    "agents": "trader archetype calibration",
    "engine": "orchestration switches",
}


def dump_config_yaml(cfg: SimConfig) -> str:
    """Render the full effective config as commented YAML."""
    data = config_to_dict(cfg)
    chunks = ["# macroflow simulation config (all keys shown with their effective values)"]
    scalars = {k: data[k] for k in ("seed", "n_traders_per_type", "n_events", "replications")}
    chunks.append(yaml.safe_dump(scalars, sort_keys=False).rstrip())
    for section in ("shock", "market", "allocation", "choice", "agents", "engine"):
        chunks.append(f"\n# {_SECTION_COMMENTS[section]}")
        chunks.append(yaml.safe_dump({section: data[section]}, sort_keys=False).rstrip())
    return "\n".join(chunks) + "\n"
