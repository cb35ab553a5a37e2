import json
import subprocess
import sys

import pytest

from solitary.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_cosets(capsys):
    code, data = run_json(capsys, "cosets", "--group", "<a|>", "--subgroup", "a^3")
    assert code == 0 and data["index"] == 3


def test_separate(capsys):
    code, data = run_json(capsys, "separate", "--group", "<a,b|>", "--subgroup", "a^2,b", "--element", "a")
    assert code == 0
    assert data["subgroup"]["index"] == 2
    assert data["verified"] and all(data["verified"].values())


def test_separate_impossible(capsys):
    code, data = run_json(capsys, "separate", "--group", "<a,b|>", "--subgroup", "a^2,b", "--element", "b")
    assert code == 1 and data["error"] == "SeparationImpossible"


def test_syntax_error_is_structured(capsys):
    code, data = run_json(capsys, "parse", "--group", "<a,b")
    assert code == 1 and data["error"] == "PresentationSyntaxError"


def test_usage_error_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        main(["cosets", "--group", "<a|>", "--epsilon", "-1"])
    assert info.value.code == 2


def test_low_index_csv(capsys):
    code, out = run(capsys, "low-index", "--group", "<a,b|>", "--max-index", "2", "--format", "csv")
    rows = out.strip().splitlines()
    assert code == 0 and rows[0] == "index,hash" and len(rows) == 5


def test_export_dot(capsys):
    code, out = run(capsys, "export", "--group", "<a,b|>", "--subgroup", "a^2,b", "--format", "dot")
    assert code == 0
    assert out.count('label="a"') == 2 and out.count('label="b"') == 1
    assert out.count("shape=") == 2


def test_export_three_cycle(capsys):
    code, out = run(capsys, "export", "--group", "<a|>", "--subgroup", "a^3", "--format", "dot")
    assert out.count('label="a"') == 3 and out.count("shape=") == 3


def test_verify_cert_text(capsys):
    code, out = run(capsys, "verify-cert", "--group", "<a|>", "--subgroup", "a^2", "--max-index", "8",
                    "--format", "text")
    assert code == 0 and out.startswith("PASS")


def test_tau_star(capsys):
    code, data = run_json(capsys, "tau-star", "--group", "<a|>", "--max-index", "3", "--copies", "2")
    assert code == 0
    assert sorted(data["window"]["a"]) == list(range(12))


def test_apply_and_window_exhausted(capsys):
    code, out = run(capsys, "apply", "--group", "<a|>", "--rep", "a^2;a^3", "--point", "2", "--word", "a")
    assert code == 0 and json.loads(out)["image"] == 3
    code, data = run_json(capsys, "apply", "--group", "<a,b|>", "--rep", "a", "--radius", "0",
                          "--point", "0", "--word", "b")
    assert code == 1 and data["error"] == "WindowExhausted"


def test_folner_search_with_figure(capsys, tmp_path):
    fig = tmp_path / "ratios.png"
    code, data = run_json(capsys, "folner-search", "--group", "<a|>", "--rep", "1", "--radius", "20",
                          "--omega", "a", "--epsilon", "1/2", "--figure", str(fig))
    assert code == 0 and data["result"] == "Found" and data["size"] == 5
    assert fig.stat().st_size > 0


def test_bs_probe(capsys, tmp_path):
    fig = tmp_path / "bs.png"
    code, data = run_json(capsys, "bs-probe", "--n", "2", "--max-index", "5", "--figure", str(fig))
    assert code == 0 and data["status"] == "pass"
    assert fig.exists()


def test_free_product_folner_desk(capsys):
    code, data = run_json(capsys, "free-product-folner", "--desk", "200", "--epsilon", "1/4")
    assert code == 0 and data["case"] == 2 and data["report"]["pass"]


def test_bad_config_file(capsys, tmp_path):
    bad = tmp_path / "run.cfg"
    bad.write_text("copies = many\n")
    with pytest.raises(SystemExit) as info:
        main(["cosets", "--group", "<a|>", "--config", str(bad)])
    assert info.value.code == 2


def test_output_file(capsys, tmp_path):
    out = tmp_path / "t.json"
    code, _ = run(capsys, "cosets", "--group", "<a|>", "--subgroup", "a^2", "--output", str(out))
    assert code == 0 and json.loads(out.read_text())["index"] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "solitary", "cosets", "--group", "<a|>", "--subgroup", "a^4"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["index"] == 4
