import json
from fractions import Fraction

import pytest

from solitary.amenability import folner_check
from solitary.chabauty import SubgroupHandle, isolation_certificate, verify_certificate
from solitary.config import ConfigError, RunConfig, load, read_config_file
from solitary.cosets import low_index, todd_coxeter
from solitary.errors import UnsupportedFormat
from solitary.permrep import quasiregular
from solitary.serialize import emit_dot, emit_report, table_hash, to_jsonable
from solitary.words import parse_presentation

Z = parse_presentation("<a|>")


def test_defaults():
    cfg = RunConfig()
    assert cfg.epsilon_value == Fraction(1, 4) and cfg.format == "json"


@pytest.mark.parametrize("bad", [{"copies": 0}, {"epsilon": "abc"}, {"epsilon": "-1/2"}, {"format": "xml"},
                                 {"radius": -1}])
def test_invalid_values(bad):
    with pytest.raises(ConfigError):
        RunConfig(**bad)


def test_precedence(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# comment\ncopies = 5\nradius=2\nmax-index = 6\n")
    assert read_config_file(f)["max_index"] == 6
    cfg = load(str(f), {"radius": 4}, environ={"SOLITARY_COPIES": "7"})
    assert (cfg.copies, cfg.radius, cfg.max_index) == (7, 4, 6)


def test_unknown_key(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("colour = red\n")
    with pytest.raises(ConfigError):
        read_config_file(f)


def test_folner_report_schema():
    r = quasiregular(SubgroupHandle.finite_index(todd_coxeter(Z, [Z.word("a^3")])))
    data = json.loads(emit_report(folner_check(r, [0, 1, 2], [Z.word("a")], "1/2")))
    assert set(data) == {"F", "ratios", "max_ratio", "epsilon", "pass"}
    assert data["ratios"] == {"a": "0/1"} and data["epsilon"] == "1/2"


def test_csv_one_row_per_table():
    tables = low_index(Z, 4)
    rows = emit_report(tables, "csv").strip().splitlines()
    assert rows[0] == "index,hash"
    assert rows[1:] == [f"{t.index},{table_hash(t)}" for t in tables]


def test_text_certificate():
    h = SubgroupHandle.finite_index(todd_coxeter(Z, [Z.word("a^2")]))
    universe = [SubgroupHandle.finite_index(t) for t in low_index(Z, 4)]
    text = emit_report(verify_certificate(isolation_certificate(h), h, universe), "text")
    assert text.splitlines()[0] == "PASS"


def test_bit_stable_output():
    tables = low_index(Z, 5)
    assert emit_report(tables) == emit_report(low_index(Z, 5))


def test_unsupported():
    with pytest.raises(UnsupportedFormat):
        emit_report(Z, "yaml")
    with pytest.raises(UnsupportedFormat):
        emit_dot(Z)
    with pytest.raises(UnsupportedFormat):
        to_jsonable(object())
