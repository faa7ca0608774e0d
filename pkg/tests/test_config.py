from __future__ import annotations

import numpy as np
import pytest

from solsurf import config
from solsurf.errors import ConfigError
from solsurf.jets import Jet
from solsurf.presets import PRESETS, preset_text


def test_template_round_trips_to_defaults():
    cfg = config.parse(config.template())
    for sec, keys in config.SCHEMA.items():
        for key, (_, default, _) in keys.items():
            assert cfg[sec][key] == default


def test_every_preset_parses():
    for name in PRESETS:
        cfg = config.parse(preset_text(name), name)
        assert cfg.grid.n_t >= 2
    fig2 = config.parse(preset_text("fig2_p3_F6"))
    assert fig2["run"]["verified"] is False
    assert (fig2.params.alpha, fig2.params.beta, fig2.params.gamma, fig2.params.delta) == (0, 1, 0.4, 0)


@pytest.mark.parametrize("text,needle", [
    ("[equation]\nname = P7\n", "[equation] name"),
    ("[equation]\nname = P1\ncolour = red\n", "[equation] colour"),
    ("[nonsense]\na = 1\n", "[nonsense]"),
    ("[grid]\nn_t = many\n", "[grid] n_t"),
    ("[grid]\nt_exclude = 1:0\n", "[grid] t_exclude"),
    ("[solution]\nkind = rational\nn = 2\n", "[equation] alpha"),
    ("[symmetry]\nr = t + lam\n", "[symmetry] r"),
    ("[symmetry]\nA = 1; 2; 3\n", "[symmetry] A"),
    ("[symmetry]\nalpha2 = 0\n", "alpha1..alpha6"),
])
def test_bad_configs_name_the_key(text, needle):
    with pytest.raises(ConfigError) as err:
        cfg = config.parse(text)
        cfg.grid, cfg.choice, cfg.custom  # noqa: B018 - lazily validated parts
    assert needle in str(err.value)


def test_float_expressions_and_bands():
    cfg = config.parse("[equation]\nname = P3\ngamma = 2/5\n[solution]\nkind = ivp\n"
                       "[grid]\nt_exclude = -0.01:0.01, 1:2\n")
    assert cfg.params.gamma == pytest.approx(0.4)
    assert cfg.grid.t_bands == ((-0.01, 0.01), (1.0, 2.0))


def test_compiled_expressions_work_on_arrays_and_jets():
    f = config.compile_expr("exp(t) + 2", ("t",), "test")
    np.testing.assert_allclose(f(np.array([0.0, 1.0])), [3.0, np.e + 2])
    J = f(Jet.var(0.0, 0, (2, 0, 0)))
    assert J.deriv(2) == pytest.approx(1.0)
    c = config.compile_expr("3", ("t",), "test")
    np.testing.assert_array_equal(c(np.zeros(3)), [3.0, 3.0, 3.0])
