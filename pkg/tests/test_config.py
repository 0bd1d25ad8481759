import json

import pytest

from fracmix.config import DEFAULTS, ExperimentConfig, parse_orders
from fracmix.errors import ParameterDomainError


def test_defaults_build():
    cfg = ExperimentConfig.from_dict({})
    assert cfg.t2 == DEFAULTS["T"] / 2
    assert cfg.times == [-50.0, -25.0, 0.0, 1.0, 10.0]
    setup = cfg.build()
    assert setup.K == 3 and setup.audit.passed


def test_nested_override_keeps_siblings(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"box": {"beta2": 1.7}, "phi": {"name": "parabola"}}))
    cfg = ExperimentConfig.load(path)
    assert (cfg.box.alpha1, cfg.box.beta1, cfg.box.beta2) == (0.1, 1.1, 1.7)
    assert "params" not in cfg.raw["phi"]


@pytest.mark.parametrize(
    "bad",
    [{"T": -1}, {"t2": 80.0}, {"phi": {"name": "sine", "coefficients": [1]}}, {"extra": 1}],
)
def test_invalid_configs(bad):
    with pytest.raises(ParameterDomainError):
        ExperimentConfig.from_dict(bad)


def test_parse_orders():
    assert parse_orders("0.3,1.4") == (0.3, 1.4)
    with pytest.raises(ParameterDomainError):
        parse_orders("0.3")
    with pytest.raises(ParameterDomainError):
        parse_orders("nan,1.5")
