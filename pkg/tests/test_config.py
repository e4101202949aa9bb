from pathlib import Path

import pytest

from mongeampere.config import ConfigError, KEYS, parse_config
from mongeampere.optimizer import BetaRule, Metric


def test_full_config(tmp_path):
    cfg = parse_config("""
# comment
problem = test1
h = 1/32
g0 = 0.3
beta_rule = FR
metric = euclidean
armijo.s = 2
armijo.rho = 0.25
armijo.mu = 1e-3
armijo.max_backtracks = 10
stop_J = 1e-8
stop_grad = 0
max_iters = 50
restart_on_nondescent = no
project_nonnegative = yes
out_dir = runs/a
export_formats = csv-points
""", base_dir=tmp_path)
    assert cfg.problem == "test1" and cfg.h == 1 / 32 and cfg.g0 == 0.3
    opt = cfg.optimizer
    assert opt.beta_rule is BetaRule.FR and opt.metric is Metric.EUCLIDEAN
    assert (opt.armijo.s, opt.armijo.rho, opt.armijo.mu, opt.armijo.max_backtracks) == (2, 0.25, 1e-3, 10)
    assert opt.stop_J == 1e-8 and opt.max_iters == 50
    assert not opt.restart_on_nondescent and opt.project_nonnegative
    assert cfg.out_dir == tmp_path / "runs/a"
    assert cfg.export_formats == ("csv-points",)


def test_defaults():
    cfg = parse_config("h = 0.1")
    assert cfg.problem == "test1" and cfg.g0 == 0.0
    assert cfg.optimizer.stop_J == 1e-6 and cfg.optimizer.max_iters == 500


def test_g0_path(tmp_path):
    cfg = parse_config("h = 0.1\ng0 = start.csv", base_dir=tmp_path)
    assert cfg.g0 == tmp_path / "start.csv"


@pytest.mark.parametrize("text, key", [
    ("h = 2", "h"),
    ("h = 0", "h"),
    ("h = abc", "h"),
    ("h = 1/0", "h"),
    ("problem = test7\nh = 0.1", "problem"),
    ("h = 0.1\nbeta_rule = hs", "beta_rule"),
    ("h = 0.1\nmetric = l1", "metric"),
    ("h = 0.1\nmax_iters = 0", "max_iters"),
    ("h = 0.1\nmax_iters = 2.5", "max_iters"),
    ("h = 0.1\narmijo.rho = 1.5", "armijo.rho"),
    ("h = 0.1\narmijo.mu = 0", "armijo.mu"),
    ("h = 0.1\narmijo.s = -1", "armijo.s"),
    ("h = 0.1\nproject_nonnegative = maybe", "project_nonnegative"),
    ("h = 0.1\nexport_formats = png", "export_formats"),
    ("h = 0.1\ncolour = red", "colour"),
    ("h = 0.1\nh = 0.2", "h"),
    ("problem = custom\nh = 0.1", "f"),
    ("h = 0.1\nf = 1", "f"),
    ("g0 = 0.1", "h"),
    ("h = 0.1\ng0 = -0.1\nproject_nonnegative = true", "g0"),
])
def test_errors_name_the_key(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key
    assert key in str(info.value)


def test_error_reports_line():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config("problem = test1\n\nh = 7\n")


def test_missing_equals():
    with pytest.raises(ConfigError, match="key = value"):
        parse_config("h 0.1")


def test_spec_keys_accepted():
    for key in ("problem", "h", "g0", "beta_rule", "armijo.s", "armijo.rho", "armijo.mu",
                "stop_J", "max_iters", "project_nonnegative", "out_dir"):
        assert key in KEYS


def test_mesh_file_makes_h_optional(tmp_path):
    cfg = parse_config("mesh = m.txt\nproblem = custom\nf = 1 + r2", base_dir=tmp_path)
    assert cfg.mesh == tmp_path / "m.txt" and cfg.h is None
