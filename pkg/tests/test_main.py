"""Tests for the command-line interface."""

from pathlib import Path

import pytest

from schurlab.core.reports import load_report, read_csv_rows
from schurlab.main import (
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VIOLATIONS,
    get_default_config_path,
    main,
)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    for name in ("SCHURLAB_CONFIG", "SCHURLAB_SEED", "SCHURLAB_K_GLOBAL", "SCHURLAB_SAMPLES", "SCHURLAB_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)


class TestRun:
    """Tests for `schurlab run`."""

    def test_writes_csv(self, tmp_path: Path) -> None:
        out = tmp_path / "out" / "pyth.csv"

        code = main(["run", "--suite", "pythagoras", "--n", "3", "--trials", "2", "--out", str(out)])

        assert code == EXIT_OK
        header, rows = read_csv_rows(out)
        assert header == ["trial", "n", "d", "residual", "violation"]
        assert [r["violation"] for r in rows] == ["false", "false"]

    def test_default_output_path(self, tmp_path: Path) -> None:
        code = main(["run", "--suite", "lp-blocks", "--n", "4", "--trials", "1"])

        assert code == EXIT_OK
        assert (tmp_path / "reports" / "lp-blocks.csv").exists()

    def test_reruns_are_byte_identical(self, tmp_path: Path) -> None:
        args = ["run", "--suite", "duality", "--n", "3", "--p", "3", "--trials", "2", "--format", "json"]

        assert main([*args, "--out", "r.json"]) == EXIT_OK
        first = (tmp_path / "r.json").read_bytes()
        assert main([*args, "--out", "r.json"]) == EXIT_OK
        assert (tmp_path / "r.json").read_bytes() == first

    def test_violations_exit_code(self) -> None:
        code = main(["run", "--suite", "rs1", "--n", "3", "--p", "3", "--trials", "1", "--k-global", "1e-9"])

        assert code == EXIT_VIOLATIONS

    def test_unknown_suite(self) -> None:
        assert main(["run", "--suite", "nope"]) == EXIT_USAGE

    def test_endpoint_rejected(self) -> None:
        assert main(["run", "--suite", "rs1", "--p", "inf"]) == EXIT_USAGE

    def test_missing_config(self) -> None:
        assert main(["run", "--config", "missing.yaml"]) == EXIT_USAGE

    def test_config_file_and_flags(self, tmp_path: Path) -> None:
        (tmp_path / "run.yaml").write_text("suite: pythagoras\nn: [3]\ntrials: 1\nformat: json\n")

        code = main(["run", "--config", "run.yaml", "--seed", "11", "--out", "r.json"])

        assert code == EXIT_OK
        report = load_report(tmp_path / "r.json")
        assert report.config["seed"] == 11
        assert report.config["trials"] == 1

    def test_environment_seed(self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("SCHURLAB_SEED", "23")

        main(["run", "--suite", "pythagoras", "--n", "3", "--trials", "1", "--format", "json", "--out", "r.json"])

        assert load_report(tmp_path / "r.json").config["seed"] == 23

    def test_unwritable_output(self, tmp_path: Path) -> None:
        (tmp_path / "blocker").write_text("")

        code = main(["run", "--suite", "pythagoras", "--n", "3", "--trials", "1", "--out", "blocker/r.csv"])

        assert code == EXIT_IO


class TestOtherCommands:
    """Tests for suites, show and init-config."""

    def test_list_suites(self) -> None:
        assert main(["--list-suites"]) == EXIT_OK
        assert main(["suites"]) == EXIT_OK

    def test_show(self, tmp_path: Path) -> None:
        main(["run", "--suite", "pythagoras", "--n", "3", "--trials", "1", "--format", "json", "--out", "r.json"])

        assert main(["show", "r.json"]) == EXIT_OK

    def test_show_missing(self) -> None:
        assert main(["show", "missing.json"]) == EXIT_IO

    def test_init_config(self, tmp_path: Path) -> None:
        assert main(["init-config", "my.yaml"]) == EXIT_OK
        assert (tmp_path / "my.yaml").read_text() == get_default_config_path().read_text()
        assert main(["init-config", "my.yaml"]) == EXIT_USAGE
        assert main(["init-config", "my.yaml", "--force"]) == EXIT_OK

    def test_no_command(self) -> None:
        assert main([]) == EXIT_USAGE

    def test_version(self) -> None:
        with pytest.raises(SystemExit) as exc:
            main(["--version"])

        assert exc.value.code == 0
