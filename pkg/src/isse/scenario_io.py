"""Scenario files and exploration reports.

A scenario is a JSON document::

    {
      "schema_version": 1,
      "name": "tiny",
      "modules": [{"id": "M1", "standby_power": 20.0,
                   "machine_configs": [{"name": "std", "services": [
                       {"kind": "drill", "base_duration": 10.0, "processing_power": 800.0,
                        "cost_rate": 40.0, "parameter_bounds": {"speed_factor": [0.5, 1.5]}}]}]}],
      "order": {"steps": ["drill", "mill"], "quantity": 3},
      "grid": {"width": 2, "height": 2},
      "current_layout": {"M1": [0, 0]},
      "filters": {"standby_module_threshold": null, "standby_config_threshold": null,
                  "layout_mode": "GA", "layout_objective": "transport", "alpha": 0.5},
      "ga": {"population_size": 16, ...},
      "sa": {"max_iterations": 200, ..., "param_grid_levels": 3},
      "weights": {"time": 0.4, "cost": 0.3, "energy": 0.3,
                  "ref_time": 60.0, "ref_cost": 1.0, "ref_energy": 0.05},
      "costs": {"transport_unit_time": 2.0, "energy_price": 0.3}
    }

Only ``modules``, ``order`` and ``grid`` are required.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import IO, Any, Sequence

from .cpps import (LAYOUT_MODES, LAYOUT_OBJECTIVES, SPEED, Cppm, GridLayout, MachineConfig,
                   ProductionOrder, Scenario, Service)
from .errors import InvalidWeights, ParseError, ValidationError
from .metaheuristics import GaConfig, ObjectiveWeights, SaConfig

SCHEMA_VERSION = 1
YEAR = 365 * 86400

_MISSING = object()


def _field(obj: dict, key: str, path: str, kind=None, default: Any = _MISSING):
    where = f"{path}.{key}" if path else key
    if not isinstance(obj, dict):
        raise ParseError(path or "<root>", "expected an object")
    if key not in obj or (obj[key] is None and default is not _MISSING):
        if default is _MISSING:
            raise ParseError(where, "missing required field")
        return default
    value = obj[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(where, f"expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(where, f"expected an integer, got {value!r}")
        return value
    if kind is not None and not isinstance(value, kind):
        raise ParseError(where, f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def _pair(value, where: str, kind=float) -> tuple:
    if not isinstance(value, list) or len(value) != 2:
        raise ParseError(where, "expected a two-element list")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind is int and not isinstance(v, int)):
            raise ParseError(where, f"expected {kind.__name__} values, got {v!r}")
        out.append(kind(v))
    return tuple(out)


def _parse_service(obj: dict, path: str) -> Service:
    bounds_obj = _field(obj, "parameter_bounds", path, dict, {SPEED: [0.5, 1.5]})
    bounds = tuple((name, *_pair(v, f"{path}.parameter_bounds.{name}")) for name, v in bounds_obj.items())
    return Service(
        kind=_field(obj, "kind", path, str),
        base_duration=_field(obj, "base_duration", path, float),
        processing_power=_field(obj, "processing_power", path, float, 0.0),
        cost_rate=_field(obj, "cost_rate", path, float, 0.0),
        parameter_bounds=bounds,
    )


def _parse_module(obj: dict, path: str) -> Cppm:
    configs = []
    for i, mc in enumerate(_field(obj, "machine_configs", path, list)):
        mpath = f"{path}.machine_configs[{i}]"
        services = tuple(_parse_service(s, f"{mpath}.services[{j}]")
                         for j, s in enumerate(_field(mc, "services", mpath, list)))
        configs.append(MachineConfig(_field(mc, "name", mpath, str), services))
    return Cppm(_field(obj, "id", path, str), tuple(configs), _field(obj, "standby_power", path, float, 0.0))


def _dataclass_from(cls, obj: dict, path: str, extra: Sequence[str] = ()):
    if not isinstance(obj, dict):
        raise ParseError(path, "expected an object")
    kinds = {f.name: (int if f.type in ("int", int) else float) for f in dataclasses.fields(cls)}
    unknown = set(obj) - set(kinds) - set(extra)
    if unknown:
        raise ParseError(f"{path}.{sorted(unknown)[0]}", "unknown field")
    values = {k: _field(obj, k, path, kinds[k]) for k in kinds if k in obj}
    try:
        return cls(**values)
    except (ValueError, InvalidWeights) as exc:
        raise ValidationError(f"{path} config valid", str(exc)) from None


def parse_scenario(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError("<root>", "expected an object")
    version = _field(doc, "schema_version", "", int, SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ParseError("schema_version", f"unsupported version {version}")
    modules = tuple(_parse_module(m, f"modules[{i}]") for i, m in enumerate(_field(doc, "modules", "", list)))
    order_obj = _field(doc, "order", "", dict)
    steps = _field(order_obj, "steps", "order", list)
    if not all(isinstance(s, str) for s in steps):
        raise ParseError("order.steps", "expected a list of service kinds")
    order = ProductionOrder(tuple(steps), _field(order_obj, "quantity", "order", int, 1))
    grid = _field(doc, "grid", "", dict)
    width, height = _field(grid, "width", "grid", int), _field(grid, "height", "grid", int)

    current = None
    cur_obj = _field(doc, "current_layout", "", dict, None)
    if cur_obj is not None:
        current = GridLayout.from_mapping(
            width, height, {m: _pair(c, f"current_layout.{m}", int) for m, c in cur_obj.items()})

    filters = _field(doc, "filters", "", dict, {})
    ga = _dataclass_from(GaConfig, _field(doc, "ga", "", dict, {}), "ga")
    sa_obj = dict(_field(doc, "sa", "", dict, {}))
    levels = _field(sa_obj, "param_grid_levels", "sa", int, 3)
    sa_obj.pop("param_grid_levels", None)
    sa = _dataclass_from(SaConfig, sa_obj, "sa")
    w = _field(doc, "weights", "", dict, {})
    weights_obj = {
        "w_time": w.get("time", 1 / 3), "w_cost": w.get("cost", 1 / 3), "w_energy": w.get("energy", 1 / 3),
        **{k: v for k, v in w.items() if k.startswith("ref_")},
    }
    unknown = set(w) - {"time", "cost", "energy", "ref_time", "ref_cost", "ref_energy"}
    if unknown:
        raise ParseError(f"weights.{sorted(unknown)[0]}", "unknown field")
    weights = _dataclass_from(ObjectiveWeights, weights_obj, "weights")
    costs = _field(doc, "costs", "", dict, {})

    scenario = Scenario(
        modules=modules, order=order, grid_width=width, grid_height=height, current_layout=current,
        standby_module_threshold=_field(filters, "standby_module_threshold", "filters", float, None),
        standby_config_threshold=_field(filters, "standby_config_threshold", "filters", float, None),
        layout_mode=_field(filters, "layout_mode", "filters", str, "GA"),
        layout_objective=_field(filters, "layout_objective", "filters", str, "transport"),
        alpha=_field(filters, "alpha", "filters", float, 0.5),
        ga=ga, sa=sa, param_grid_levels=levels, weights=weights,
        transport_unit_time=_field(costs, "transport_unit_time", "costs", float, 1.0),
        energy_price=_field(costs, "energy_price", "costs", float, 0.0),
        name=_field(doc, "name", "", str, ""),
    )
    validate_scenario(scenario)
    return scenario


def _check(ok: bool, invariant: str, detail: str = "") -> None:
    if not ok:
        raise ValidationError(invariant, detail)


def validate_scenario(s: Scenario) -> None:
    _check(s.grid_width > 0 and s.grid_height > 0, "grid dimensions positive",
           f"got {s.grid_width}x{s.grid_height}")
    ids = [m.id for m in s.modules]
    _check(len(ids) > 0, "at least one module")
    _check(len(set(ids)) == len(ids), "module ids unique")
    for m in s.modules:
        _check(m.standby_power >= 0, "standby power non-negative", m.id)
        _check(len(m.machine_configs) > 0, "module has machine config", m.id)
        names = [mc.name for mc in m.machine_configs]
        _check(len(set(names)) == len(names), "machine config names unique", m.id)
        for mc in m.machine_configs:
            _check(len(mc.services) > 0, "machine config offers service", f"{m.id}/{mc.name}")
            kinds = [svc.kind for svc in mc.services]
            _check(len(set(kinds)) == len(kinds), "service kinds unique per machine config", f"{m.id}/{mc.name}")
            for svc in mc.services:
                where = f"{m.id}/{mc.name}/{svc.kind}"
                _check(svc.base_duration > 0, "base duration positive", where)
                _check(svc.processing_power >= 0 and svc.cost_rate >= 0, "service rates non-negative", where)
                _check(len(svc.parameter_bounds) > 0, "parameter bounds non-empty", where)
                _check(all(lo <= hi for _, lo, hi in svc.parameter_bounds), "parameter bounds ordered", where)
                names = [n for n, _, _ in svc.parameter_bounds]
                _check(SPEED in names, "speed factor bounds present", where)
                _check(svc.bounds(SPEED)[0] > 0, "speed factor bounds positive", where)
    _check(len(s.order.steps) > 0, "order steps non-empty")
    _check(s.order.quantity > 0, "order quantity positive")
    for t in (s.standby_module_threshold, s.standby_config_threshold):
        _check(t is None or t > 0, "thresholds positive")
    _check(s.layout_mode in LAYOUT_MODES, "layout mode known", s.layout_mode)
    _check(s.layout_objective in LAYOUT_OBJECTIVES, "layout objective known", s.layout_objective)
    _check(0.0 <= s.alpha <= 1.0, "alpha in [0, 1]")
    _check(s.param_grid_levels >= 1, "parameter grid levels positive")
    _check(s.transport_unit_time >= 0 and s.energy_price >= 0, "costs non-negative")
    capable = {m.id for m in s.modules for mc in m.machine_configs
               for svc in mc.services if svc.kind in s.order.steps}
    needed = min(len(set(capable)), len(s.order.steps))
    _check(s.grid_width * s.grid_height >= needed, "grid fits modules",
           f"{s.grid_width * s.grid_height} cells for up to {needed} modules")
    if s.current_layout is not None:
        cur = s.current_layout
        _check(cur.is_valid(), "current layout valid", "cells must be in range and distinct")
        _check(set(cur.as_dict()) <= set(ids), "current layout modules known")


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}", exc.msg) from None
    return parse_scenario(doc)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return loads_scenario(path.read_text(), str(path))


def bundled_scenario(name: str) -> Path:
    """Path of a scenario shipped with the package, e.g. ``"tiny"``."""
    return Path(str(resources.files("isse") / "scenarios" / f"{name}.scenario"))


def scenario_to_dict(s: Scenario) -> dict:
    def service(svc: Service) -> dict:
        return {"kind": svc.kind, "base_duration": svc.base_duration,
                "processing_power": svc.processing_power, "cost_rate": svc.cost_rate,
                "parameter_bounds": {n: [lo, hi] for n, lo, hi in svc.parameter_bounds}}

    w = s.weights
    return {
        "schema_version": SCHEMA_VERSION,
        "name": s.name,
        "modules": [{"id": m.id, "standby_power": m.standby_power,
                     "machine_configs": [{"name": mc.name, "services": [service(x) for x in mc.services]}
                                         for mc in m.machine_configs]} for m in s.modules],
        "order": {"steps": list(s.order.steps), "quantity": s.order.quantity},
        "grid": {"width": s.grid_width, "height": s.grid_height},
        "current_layout": None if s.current_layout is None
        else {m: list(c) for m, c in s.current_layout.placement},
        "filters": {"standby_module_threshold": s.standby_module_threshold,
                    "standby_config_threshold": s.standby_config_threshold,
                    "layout_mode": s.layout_mode, "layout_objective": s.layout_objective, "alpha": s.alpha},
        "ga": dataclasses.asdict(s.ga),
        "sa": {**dataclasses.asdict(s.sa), "param_grid_levels": s.param_grid_levels},
        "weights": {"time": w.w_time, "cost": w.w_cost, "energy": w.w_energy,
                    "ref_time": w.ref_time, "ref_cost": w.ref_cost, "ref_energy": w.ref_energy},
        "costs": {"transport_unit_time": s.transport_unit_time, "energy_price": s.energy_price},
    }


def dumps_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2)


# -- reports -------------------------------------------------------------------

METHODS = ("BruteForce", "ISSEv1", "ISSEv2")


@dataclass(frozen=True)
class ReportRow:
    method: str
    p: int | None = None
    l: int | None = None  # noqa: E741 - matches the table column
    n: int | None = None
    t_p: float | None = None
    t_l: float | None = None
    t_n_min: float | None = None
    t_n_max: float | None = None
    t_tot_min: float = 0.0
    t_tot_max: float = 0.0
    estimated: bool = False
    saturated: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.t_tot_min > self.t_tot_max:
            raise ValueError("t_tot_min must not exceed t_tot_max")


def row_from_stats(method: str, stats) -> ReportRow:
    """Table row of a three-layer exploration (configs, layouts, parameters)."""
    c, t = stats.per_layer_counts, stats.per_layer_times
    return ReportRow(method, p=c[0], l=c[1], n=c[2], t_p=t[0], t_l=t[1],
                     t_n_min=stats.per_layer_max_times[2], t_n_max=t[2],
                     t_tot_min=stats.t_min, t_tot_max=stats.t_max)


def bruteforce_row(count: int, seconds: float, estimated: bool, saturated: bool = False) -> ReportRow:
    return ReportRow("BruteForce", n=count, t_tot_min=seconds, t_tot_max=seconds,
                     estimated=estimated, saturated=saturated)


def format_duration(seconds: float) -> str:
    """Render like ``60,248a 220d 17h 47m 7s`` or ``214h 10m 12s``.

    Years (365 days) and days appear only from one year up; below that
    hours absorb days. Leading and trailing zero units are dropped.
    """
    total = int(round(seconds))
    if total <= 0:
        return "0s"
    if total >= YEAR:
        years, rest = divmod(total, YEAR)
        days, rest = divmod(rest, 86400)
        parts = [(years, "a"), (days, "d")]
    else:
        parts, rest = [], total
    hours, rest = divmod(rest, 3600)
    minutes, secs = divmod(rest, 60)
    parts += [(hours, "h"), (minutes, "m"), (secs, "s")]
    while parts[0][0] == 0:
        parts.pop(0)
    while parts[-1][0] == 0:
        parts.pop()
    return " ".join(f"{v:,}{u}" for v, u in parts)


def _count(v: int | None, saturated: bool = False) -> str:
    if v is None:
        return "-"
    return f">={v:,}" if saturated else f"{v:,}"


def _dur(v: float | None) -> str:
    return "-" if v is None else format_duration(v)


TABLE_HEADER = ("method", "p", "t_p", "l", "t_l", "n", "t_n,min", "t_n,max", "t_tot,min", "t_tot,max")
CSV_HEADER = ("method", "estimated", "p", "l", "n", "t_p", "t_l", "t_n_min", "t_n_max", "t_tot_min", "t_tot_max")


def render_table(rows: Sequence[ReportRow]) -> str:
    body = []
    for r in rows:
        name = r.method + (" (estimated)" if r.estimated else "")
        body.append((name, _count(r.p), _dur(r.t_p), _count(r.l), _dur(r.t_l), _count(r.n, r.saturated),
                     _dur(r.t_n_min), _dur(r.t_n_max), _dur(r.t_tot_min), _dur(r.t_tot_max)))
    widths = [max(len(x) for x in col) for col in zip(TABLE_HEADER, *body)]
    lines = ["  ".join(x.ljust(w) for x, w in zip(line, widths)).rstrip() for line in (TABLE_HEADER, *body)]
    return "\n".join(lines) + "\n"


def render_csv(rows: Sequence[ReportRow]) -> str:
    def secs(v):
        return "" if v is None else int(round(v))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow((r.method, int(r.estimated), "" if r.p is None else r.p, "" if r.l is None else r.l,
                         "" if r.n is None else r.n, secs(r.t_p), secs(r.t_l), secs(r.t_n_min),
                         secs(r.t_n_max), secs(r.t_tot_min), secs(r.t_tot_max)))
    return buf.getvalue()


def write_report(rows: Sequence[ReportRow], fmt: str = "table", out: str | Path | IO[str] | None = None) -> None:
    if fmt not in ("table", "csv"):
        raise ValueError(f"unknown report format {fmt!r}")
    text = render_table(rows) if fmt == "table" else render_csv(rows)
    if out is None:
        sys.stdout.write(text)
    elif hasattr(out, "write"):
        out.write(text)
    else:
        Path(out).write_text(text)


def solution_to_dict(sol) -> dict:
    return {
        "configuration": [[a.module, a.machine_config, a.service.kind] for a in sol.config.assignments],
        "layout": None if sol.layout is None else {m: list(c) for m, c in sol.layout.placement},
        "speed_factors": None if sol.params is None else list(sol.params.speed_factors()),
        "makespan": None if sol.result is None else sol.result.makespan,
        "cost": None if sol.result is None else sol.result.cost,
        "energy": None if sol.result is None else sol.result.energy,
    }
