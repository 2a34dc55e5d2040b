import pytest
import yaml

from hyperscatter.config import load_config, parse_config
from hyperscatter.errors import ConfigError


def base():
    return yaml.safe_load(
        """
        name: t
        group: {kind: symmetric, radius: 0.1}
        spectral: {N: 8, Q: 64}
        cohomology:
          table: [[1, 1, 3]]
          presentations:
            "1,1":
              - ["1/6", "-7/12", "7/6", "23/12"]
              - ["238/367", "125/1101", "-50/367", "3343/2202"]
        """)


def test_bundled_configs_load():
    thin = load_config("thin-schottky")
    assert thin.group.kind == "symmetric" and thin.group.radius == 0.1
    assert thin.spectral.eis_lambda == 0.8
    coh = load_config("cohomology-table")
    assert set(coh.cohomology.presentations) == {(0, 2), (0, 3), (1, 1), (1, 2), (2, 1)}


def test_minimal_document():
    cfg = parse_config(base())
    assert cfg.spectral.Q == 64 and cfg.cohomology.table == [(1, 1, 3)]
    assert cfg.group.build().n == 2


def test_zero_denominator_names_field():
    doc = base()
    doc["cohomology"]["presentations"]["1,1"][0][1] = "3/0"
    with pytest.raises(ConfigError, match=r'cohomology\.presentations\.1,1\[0\]\[1\]'):
        parse_config(doc)


def test_unknown_field():
    doc = base()
    doc["spectral"]["Nq"] = 3
    with pytest.raises(ConfigError, match=r"spectral.*Nq"):
        parse_config(doc)


def test_lambda_near_pole_rejected():
    doc = base()
    doc["spectral"]["lambdas"] = [0.3, 1.0004]
    with pytest.raises(ConfigError, match=r"spectral\.lambdas\[1\]"):
        parse_config(doc)


def test_complex_lambda_forms():
    doc = base()
    doc["spectral"]["lambdas"] = ["0.4+0.5j", [0.2, -1], "1/3"]
    lams = parse_config(doc).spectral.lambdas
    assert lams == [0.4 + 0.5j, 0.2 - 1j, pytest.approx(1 / 3)]


def test_truncation_cap():
    doc = base()
    doc["spectral"]["N"] = 40
    with pytest.raises(ConfigError, match=r"spectral\.N"):
        parse_config(doc)


def test_even_k_in_table():
    doc = base()
    doc["cohomology"]["table"] = [[1, 1, 2]]
    with pytest.raises(ConfigError, match=r"cohomology\.table\[0\]\[2\]"):
        parse_config(doc)


def test_radius_without_gaps():
    doc = base()
    doc["group"]["radius"] = 0.9
    with pytest.raises(ConfigError, match=r"group\.radius"):
        parse_config(doc)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="--config"):
        load_config(tmp_path / "nope.yaml")


def test_yaml_syntax_error(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("group: [unclosed\n")
    with pytest.raises(ConfigError, match="YAML"):
        load_config(p)
