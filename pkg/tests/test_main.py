import json

from src.main import EXIT_CONFIG_ERROR, EXIT_DATA_ERROR, EXIT_IO_ERROR, EXIT_OK, build_parser, main


def test_scenario_command(tmp_path, capsys):
    out = tmp_path / "traces.jsonl"
    assert main(["scenario", "--out", str(out)]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "KNORA-E: удалены [E, D, C], выбраны [c2]" in printed
    records = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]
    assert records


def test_gen_then_run(tmp_path):
    data_dir = tmp_path / "data"
    assert main(["gen", "--out", str(data_dir), "--count", "2", "--samples", "150", "--ir-max", "10", "--seed", "1"]) == EXIT_OK
    generated = sorted(data_dir.glob("*.dat"))
    assert len(generated) == 2

    config_path = tmp_path / "experiment.env"
    config_path.write_text(
        "DATASETS=" + ",".join(f"data/{p.name}" for p in generated) + "\nPOOL_SIZE=5\nEPOCHS=5\n",
        encoding="utf-8",
    )
    out = tmp_path / "results"
    code = main(["run", str(config_path), "--techniques", "KNORA-E,KNORA-B", "--out", str(out), "--workers", "1"])
    assert code == EXIT_OK
    assert (out / "report.md").exists()
    assert (out / "aucs.csv").exists()
    assert (out / "report.json").exists()


def test_run_missing_dataset(tmp_path):
    config_path = tmp_path / "experiment.env"
    config_path.write_text("DATASETS=nowhere.dat\n", encoding="utf-8")
    assert main(["run", str(config_path), "--out", str(tmp_path / "out")]) == EXIT_DATA_ERROR


def test_run_bad_config(tmp_path):
    config_path = tmp_path / "experiment.env"
    config_path.write_text("DATASETS=a.dat\nK=0\n", encoding="utf-8")
    assert main(["run", str(config_path)]) == EXIT_CONFIG_ERROR


def test_run_without_datasets(tmp_path):
    assert main(["run", "--out", str(tmp_path)]) == EXIT_CONFIG_ERROR


def test_scenario_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    assert main(["scenario", "--out", str(blocker / "traces.jsonl")]) == EXIT_IO_ERROR


def test_exit_codes_documented_in_help():
    epilog = build_parser().epilog
    for code in (EXIT_OK, EXIT_CONFIG_ERROR, EXIT_DATA_ERROR, EXIT_IO_ERROR):
        assert f"{code} - " in epilog
