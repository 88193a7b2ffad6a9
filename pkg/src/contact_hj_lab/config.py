"""TOML experiment configuration.

One file describes a whole experiment family; each subcommand reads the
sections it needs and ignores the rest. Unknown keys inside a known section
are rejected (they are almost always typos), unknown sections as well.
Relative input paths (initial data files) resolve against the directory
containing the config file; a relative output directory resolves against
the invoking directory. A fixed (config, seed) pair pins every downstream
artifact byte for byte.

Section sketch:

    seed = 0
    [model]      name = "quad"        [model.params] lambda = 1.0
    [grid]       n = 128
    [scheme]     name = "lax_friedrichs"  dt = 1e-3
    [initial]    kind = "constant"    c = 1.0
    [snapshots]  times = [0.5, 1.0]
    [stationary] method = "discounted"  tol = 1e-7
    [rates]      sup_window = [0.5, 6.0]  sup_kind = "exponential"
    [properties] pairs = 200
    [critical]   bracket = [-1.5, 1.5]
    [output]     dir = "out/quad"
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

import numpy as np

from .errors import ConfigError
from .evolve import LF, SL, EvolveConfig
from .fields import GridFn, TorusGrid
from .models import MODEL_NAMES, ContactModel, make_model

INITIAL_KINDS = ("constant", "sine", "file")
STATIONARY_METHODS = ("longtime", "discounted", "given")
RATE_SERIES = ("sup", "hausdorff", "residual")
RATE_KINDS = ("exponential", "power", "auto")


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError("missing %r in [%s]" % (key, where))
    return table[key]


def _reject_unknown(table: dict, allowed, where: str) -> None:
    extra = sorted(set(table) - set(allowed))
    if extra:
        raise ConfigError(
            "unknown key(s) %s in [%s]; allowed: %s"
            % (", ".join(map(repr, extra)), where, ", ".join(sorted(allowed)))
        )


def _as_float(value, key: str):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("%s must be a number, got %r" % (key, value))
    return float(value)


def _as_int(value, key: str):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("%s must be an integer, got %r" % (key, value))
    return int(value)


def _as_pair(value, key: str):
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError("%s must be a two-element array" % key)
    return (_as_float(value[0], key), _as_float(value[1], key))


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; build_* methods create live objects."""

    seed: int
    model_name: str
    model_params: dict = field(repr=False)
    n: int = 128
    scheme: str = LF
    dt: float = 1e-3
    cfl_safety: float = 0.5
    theta: float | None = None
    v_box: float = 4.0
    v_samples: int = 129
    inner_fixpoint_iters: int = 0
    initial: dict = field(default_factory=lambda: {"kind": "constant", "c": 0.0})
    snapshot_times: tuple = ()
    stationary: dict = field(default_factory=lambda: {"method": "longtime", "tol": 1e-6})
    rates: dict = field(default_factory=dict)
    properties: dict = field(default_factory=dict)
    critical: dict = field(default_factory=dict)
    out_dir: str = "out"
    base_dir: str = "."

    def build_model(self) -> ContactModel:
        return make_model(self.model_name, dict(self.model_params))

    def build_grid(self) -> TorusGrid:
        try:
            return TorusGrid(self.n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def build_initial(self, grid: TorusGrid) -> GridFn:
        spec = self.initial
        kind = spec["kind"]
        if kind == "constant":
            return GridFn.constant(grid, spec["c"])
        if kind == "sine":
            amp, freq, off = spec["amplitude"], spec["frequency"], spec["offset"]
            return GridFn.from_callable(
                grid, lambda x: off + amp * np.sin(2.0 * np.pi * freq * x))
        path = os.path.join(self.base_dir, spec["path"])
        try:
            f = GridFn.from_csv(path)
        except ValueError as exc:
            raise ConfigError("bad initial-data file %s: %s" % (path, exc)) from exc
        if f.grid.n != grid.n:
            raise ConfigError(
                "initial-data file has n=%d but [grid] n=%d" % (f.grid.n, grid.n))
        return f

    def evolve_config(self, snapshot_times=None) -> EvolveConfig:
        times = self.snapshot_times if snapshot_times is None else tuple(snapshot_times)
        try:
            return EvolveConfig(
                scheme=self.scheme,
                dt=self.dt,
                cfl_safety=self.cfl_safety,
                theta=self.theta,
                v_box=self.v_box,
                v_samples=self.v_samples,
                inner_fixpoint_iters=self.inner_fixpoint_iters,
                snapshot_times=times,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def resolved_out_dir(self) -> str:
        # outputs land relative to the invoking directory (or wherever --out
        # points); only input files resolve against the config's own directory,
        # so shipped presets never write into the installed package
        return self.out_dir


def _parse_scheme(table: dict) -> dict:
    _reject_unknown(table, ("name", "dt", "cfl_safety", "theta", "v_box",
                            "v_samples", "inner_fixpoint_iters"), "scheme")
    name = _require(table, "name", "scheme")
    if name not in (LF, SL):
        raise ConfigError("scheme name must be %r or %r, got %r" % (LF, SL, name))
    out = {"scheme": name, "dt": _as_float(_require(table, "dt", "scheme"), "scheme.dt")}
    if "cfl_safety" in table:
        out["cfl_safety"] = _as_float(table["cfl_safety"], "scheme.cfl_safety")
    if "theta" in table:
        out["theta"] = _as_float(table["theta"], "scheme.theta")
    if "v_box" in table:
        out["v_box"] = _as_float(table["v_box"], "scheme.v_box")
    if "v_samples" in table:
        out["v_samples"] = _as_int(table["v_samples"], "scheme.v_samples")
    if "inner_fixpoint_iters" in table:
        out["inner_fixpoint_iters"] = _as_int(
            table["inner_fixpoint_iters"], "scheme.inner_fixpoint_iters")
    return out


def _parse_initial(table: dict) -> dict:
    kind = _require(table, "kind", "initial")
    if kind not in INITIAL_KINDS:
        raise ConfigError("initial kind must be one of %s" % (INITIAL_KINDS,))
    if kind == "constant":
        _reject_unknown(table, ("kind", "c"), "initial")
        return {"kind": kind, "c": _as_float(_require(table, "c", "initial"), "initial.c")}
    if kind == "sine":
        _reject_unknown(table, ("kind", "amplitude", "frequency", "offset"), "initial")
        return {
            "kind": kind,
            "amplitude": _as_float(table.get("amplitude", 1.0), "initial.amplitude"),
            "frequency": _as_int(table.get("frequency", 1), "initial.frequency"),
            "offset": _as_float(table.get("offset", 0.0), "initial.offset"),
        }
    _reject_unknown(table, ("kind", "path"), "initial")
    return {"kind": kind, "path": str(_require(table, "path", "initial"))}


def _parse_stationary(table: dict) -> dict:
    _reject_unknown(table, ("method", "tol", "t_max", "constant"), "stationary")
    method = table.get("method", "longtime")
    if method not in STATIONARY_METHODS:
        raise ConfigError("stationary method must be one of %s" % (STATIONARY_METHODS,))
    out = {"method": method, "tol": _as_float(table.get("tol", 1e-6), "stationary.tol")}
    out["t_max"] = _as_float(table.get("t_max", 60.0), "stationary.t_max")
    out["constant"] = _as_float(table.get("constant", 0.0), "stationary.constant")
    return out


def _parse_rates(table: dict) -> dict:
    allowed = tuple("%s_window" % s for s in RATE_SERIES) + tuple(
        "%s_kind" % s for s in RATE_SERIES) + ("slab_u", "slab_bound")
    _reject_unknown(table, allowed, "rates")
    out = {}
    for series in RATE_SERIES:
        wkey, kkey = "%s_window" % series, "%s_kind" % series
        if wkey in table:
            window = _as_pair(table[wkey], "rates.%s" % wkey)
            if not window[0] < window[1]:
                raise ConfigError("rates.%s must be increasing" % wkey)
            kind = table.get(kkey, "auto")
            if kind not in RATE_KINDS:
                raise ConfigError("rates.%s must be one of %s" % (kkey, (RATE_KINDS,)))
            out[series] = {"window": window, "kind": None if kind == "auto" else kind}
        elif kkey in table:
            raise ConfigError("rates.%s given without rates.%s" % (kkey, wkey))
    if "slab_u" in table:
        lo, hi = _as_pair(table["slab_u"], "rates.slab_u")
        if not lo < hi:
            raise ConfigError("rates.slab_u must be increasing")
        out["slab_u"] = (lo, hi)
    if "slab_bound" in table:
        out["slab_bound"] = _as_float(table["slab_bound"], "rates.slab_bound")
    return out


def _parse_properties(table: dict) -> dict:
    _reject_unknown(table, ("n", "t", "dt", "pairs", "sandwich_samples"), "properties")
    out = {}
    for key, conv in (("n", _as_int), ("t", _as_float), ("dt", _as_float),
                      ("pairs", _as_int), ("sandwich_samples", _as_int)):
        if key in table:
            out[key] = conv(table[key], "properties.%s" % key)
    return out


def _parse_critical(table: dict) -> dict:
    _reject_unknown(table, ("bracket", "ladder", "tol", "n", "dt",
                            "v_box", "v_samples"), "critical")
    out = {}
    if "bracket" in table:
        out["bracket"] = _as_pair(table["bracket"], "critical.bracket")
    if "ladder" in table:
        ladder = table["ladder"]
        if not isinstance(ladder, (list, tuple)) or len(ladder) < 2:
            raise ConfigError("critical.ladder needs at least two rates")
        out["ladder"] = tuple(_as_float(v, "critical.ladder") for v in ladder)
    for key, conv in (("tol", _as_float), ("n", _as_int), ("dt", _as_float),
                      ("v_box", _as_float), ("v_samples", _as_int)):
        if key in table:
            out[key] = conv(table[key], "critical.%s" % key)
    return out


def load_config(path) -> ExperimentConfig:
    """Parse and validate a TOML experiment file; every defect is ConfigError."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise ConfigError("config file not found: %s" % path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config file %s is not valid TOML: %s" % (path, exc)) from exc

    _reject_unknown(raw, ("seed", "model", "grid", "scheme", "initial", "snapshots",
                          "stationary", "rates", "properties", "critical", "output"),
                    "<root>")

    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")

    model_tbl = raw.get("model")
    if not isinstance(model_tbl, dict):
        raise ConfigError("missing [model] section")
    _reject_unknown(model_tbl, ("name", "params"), "model")
    model_name = _require(model_tbl, "name", "model")
    if model_name not in MODEL_NAMES:
        raise ConfigError("unknown model %r (known: %s)" % (model_name, ", ".join(MODEL_NAMES)))
    model_params = model_tbl.get("params", {})
    if not isinstance(model_params, dict):
        raise ConfigError("[model.params] must be a table")

    grid_tbl = raw.get("grid", {})
    _reject_unknown(grid_tbl, ("n",), "grid")
    n = _as_int(grid_tbl.get("n", 128), "grid.n")
    if n < 16:
        raise ConfigError("grid.n must be >= 16, got %d" % n)

    scheme_tbl = raw.get("scheme")
    if not isinstance(scheme_tbl, dict):
        raise ConfigError("missing [scheme] section")
    scheme_kw = _parse_scheme(scheme_tbl)

    initial = _parse_initial(raw.get("initial", {"kind": "constant", "c": 0.0}))

    snaps_tbl = raw.get("snapshots", {})
    _reject_unknown(snaps_tbl, ("times",), "snapshots")
    times = snaps_tbl.get("times", ())
    if not isinstance(times, (list, tuple)):
        raise ConfigError("snapshots.times must be an array")
    times = tuple(_as_float(t, "snapshots.times") for t in times)
    if any(t < 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigError("snapshots.times must be nonnegative and strictly increasing")

    stationary = _parse_stationary(raw.get("stationary", {}))
    rates = _parse_rates(raw.get("rates", {}))
    properties = _parse_properties(raw.get("properties", {}))
    critical = _parse_critical(raw.get("critical", {}))

    output_tbl = raw.get("output", {})
    _reject_unknown(output_tbl, ("dir",), "output")
    out_dir = str(output_tbl.get("dir", "out"))

    cfg = ExperimentConfig(
        seed=seed,
        model_name=model_name,
        model_params=dict(model_params),
        n=n,
        initial=initial,
        snapshot_times=times,
        stationary=stationary,
        rates=rates,
        properties=properties,
        critical=critical,
        out_dir=out_dir,
        base_dir=os.path.dirname(os.path.abspath(path)),
        **scheme_kw,
    )
    if initial["kind"] == "file":
        full = os.path.join(cfg.base_dir, initial["path"])
        if not os.path.isfile(full):
            raise ConfigError("initial-data file not found: %s" % full)
    return cfg
