import os

import numpy as np
import pytest

from contact_hj_lab.config import ExperimentConfig, load_config
from contact_hj_lab.errors import ConfigError
from contact_hj_lab.fields import GridFn, TorusGrid

MINIMAL = """
[model]
name = "quad"

[scheme]
name = "lax_friedrichs"
dt = 1e-3
"""


def write(tmp_path, body, name="exp.toml"):
    p = tmp_path / name
    p.write_text(body)
    return str(p)


def test_minimal_config_defaults(tmp_path):
    cfg = load_config(write(tmp_path, MINIMAL))
    assert cfg.model_name == "quad"
    assert cfg.seed == 0
    assert cfg.n == 128
    assert cfg.scheme == "lax_friedrichs"
    assert cfg.dt == 1e-3
    assert cfg.initial == {"kind": "constant", "c": 0.0}
    assert cfg.snapshot_times == ()
    assert cfg.stationary["method"] == "longtime"
    assert cfg.out_dir == "out"


def test_full_config_round_trip(tmp_path):
    body = """
seed = 7

[model]
name = "mechanical"
[model.params]
lambda = 1.0
amplitude = 0.3

[grid]
n = 64

[scheme]
name = "semi_lagrangian"
dt = 0.0078125
v_box = 3.0
v_samples = 65

[initial]
kind = "sine"
amplitude = 0.5
frequency = 2
offset = -0.25

[snapshots]
times = [1.0, 2.0, 4.0]

[stationary]
method = "discounted"
tol = 1e-7

[rates]
sup_window = [1.0, 4.0]
sup_kind = "exponential"
hausdorff_window = [1.0, 4.0]
slab_u = [-1.0, 1.0]
slab_bound = 2.0

[properties]
pairs = 10

[critical]
bracket = [-2.0, 0.0]
ladder = [0.4, 0.2]
n = 32

[output]
dir = "artifacts"
"""
    cfg = load_config(write(tmp_path, body))
    assert cfg.seed == 7
    assert cfg.model_params["amplitude"] == 0.3
    assert cfg.n == 64
    assert cfg.scheme == "semi_lagrangian"
    assert cfg.v_samples == 65
    assert cfg.snapshot_times == (1.0, 2.0, 4.0)
    assert cfg.rates["sup"] == {"window": (1.0, 4.0), "kind": "exponential"}
    assert cfg.rates["hausdorff"]["kind"] is None  # auto
    assert cfg.rates["slab_u"] == (-1.0, 1.0)
    assert cfg.critical["bracket"] == (-2.0, 0.0)
    assert cfg.critical["ladder"] == (0.4, 0.2)
    assert cfg.out_dir == "artifacts"
    model = cfg.build_model()
    grid = cfg.build_grid()
    phi = cfg.build_initial(grid)
    assert grid.n == 64
    x = grid.nodes
    assert np.allclose(phi.values, -0.25 + 0.5 * np.sin(4 * np.pi * x))
    ecfg = cfg.evolve_config()
    assert ecfg.snapshot_times == (1.0, 2.0, 4.0)
    assert cfg.evolve_config(snapshot_times=()).snapshot_times == ()
    assert model.H(0.0, 0.0, 0.0) == pytest.approx(0.3)


def test_initial_from_file(tmp_path):
    grid = TorusGrid(32)
    f = GridFn.from_callable(grid, lambda x: np.cos(2 * np.pi * x))
    data = tmp_path / "phi.csv"
    f.to_csv(str(data))
    body = MINIMAL + """
[grid]
n = 32

[initial]
kind = "file"
path = "phi.csv"
"""
    cfg = load_config(write(tmp_path, body))
    phi = cfg.build_initial(cfg.build_grid())
    assert np.array_equal(phi.values, f.values)


def test_initial_file_grid_mismatch(tmp_path):
    grid = TorusGrid(16)
    GridFn.constant(grid, 1.0).to_csv(str(tmp_path / "phi.csv"))
    body = MINIMAL + """
[grid]
n = 32

[initial]
kind = "file"
path = "phi.csv"
"""
    cfg = load_config(write(tmp_path, body))
    with pytest.raises(ConfigError, match="n=16"):
        cfg.build_initial(cfg.build_grid())


def test_initial_file_missing(tmp_path):
    body = MINIMAL + """
[initial]
kind = "file"
path = "nope.csv"
"""
    with pytest.raises(ConfigError, match="not found"):
        load_config(write(tmp_path, body))


@pytest.mark.parametrize("body,needle", [
    ("[scheme]\nname = \"lax_friedrichs\"\ndt = 1e-3\n", "missing \\[model\\]"),
    ("[model]\nname = \"quad\"\n", "missing \\[scheme\\]"),
    ("[model]\nname = \"nope\"\n[scheme]\nname = \"lax_friedrichs\"\ndt = 1e-3\n",
     "unknown model"),
    (MINIMAL + "[bogus]\nx = 1\n", "unknown key"),
    (MINIMAL + "[rates]\nmystery_window = [1.0, 2.0]\n", "unknown key"),
    (MINIMAL + "[grid]\nn = 8\n", "n must be >= 16"),
    ("seed = -1\n" + MINIMAL, "seed"),
    ("seed = true\n" + MINIMAL, "seed"),
    ("[model]\nname = \"quad\"\n[scheme]\nname = \"upwind\"\ndt = 1e-3\n",
     "scheme name"),
    ("[model]\nname = \"quad\"\n[scheme]\nname = \"lax_friedrichs\"\n",
     "missing 'dt'"),
    (MINIMAL + "[snapshots]\ntimes = [2.0, 1.0]\n", "strictly increasing"),
    (MINIMAL + "[snapshots]\ntimes = [-1.0, 1.0]\n", "nonnegative"),
    (MINIMAL + "[stationary]\nmethod = \"magic\"\n", "stationary method"),
    (MINIMAL + "[rates]\nsup_kind = \"exponential\"\n", "without"),
    (MINIMAL + "[rates]\nsup_window = [4.0, 1.0]\n", "increasing"),
    (MINIMAL + "[rates]\nsup_window = [1.0, 4.0]\nsup_kind = \"cubic\"\n",
     "sup_kind"),
    (MINIMAL + "[critical]\nladder = [0.4]\n", "at least two"),
    (MINIMAL + "[critical]\nbracket = [1.0, 2.0, 3.0]\n", "two-element"),
    (MINIMAL + "[initial]\nkind = \"wavelet\"\n", "initial kind"),
    (MINIMAL + "[initial]\nkind = \"constant\"\n", "missing 'c'"),
])
def test_config_defects(tmp_path, body, needle):
    with pytest.raises(ConfigError, match=needle):
        load_config(write(tmp_path, body))


def test_not_toml(tmp_path):
    with pytest.raises(ConfigError, match="not valid TOML"):
        load_config(write(tmp_path, "this is { not toml"))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "absent.toml"))


def test_bool_rejected_as_number(tmp_path):
    body = "[model]\nname = \"quad\"\n[scheme]\nname = \"lax_friedrichs\"\ndt = true\n"
    with pytest.raises(ConfigError, match="must be a number"):
        load_config(write(tmp_path, body))


def test_evolve_config_propagates_validation(tmp_path):
    body = "[model]\nname = \"quad\"\n[scheme]\nname = \"lax_friedrichs\"\ndt = -1.0\n"
    cfg = load_config(write(tmp_path, body))
    with pytest.raises(ConfigError, match="dt must be positive"):
        cfg.evolve_config()


def test_relative_paths_resolve_against_config_dir(tmp_path):
    sub = tmp_path / "deep"
    sub.mkdir()
    GridFn.constant(TorusGrid(128), 0.5).to_csv(str(sub / "ic.csv"))
    body = MINIMAL + "\n[initial]\nkind = \"file\"\npath = \"ic.csv\"\n"
    cfg = load_config(write(sub, body))
    assert cfg.base_dir == str(sub)
    phi = cfg.build_initial(cfg.build_grid())
    assert float(phi.values[0]) == 0.5
    # output dir stays relative to the invoker, not the config file
    assert cfg.resolved_out_dir() == "out"
