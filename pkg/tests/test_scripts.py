from app.config import API_HOST, API_PORT
from app.services.verification_pipeline import SUITES
from scripts import run_server, run_verification
import setup


def test_server_arguments_default_to_config():
    """Host and port come from the environment settings; reload is opt-in"""
    args = run_server.parse_args([])
    assert args.host == API_HOST
    assert args.port == API_PORT
    assert args.reload is False

    args = run_server.parse_args(["--host", "127.0.0.1", "--port", "9001", "--reload"])
    assert (args.host, args.port, args.reload) == ("127.0.0.1", 9001, True)


def test_verification_runner_selects_suites():
    """All suites run by default and each one has a task count"""
    args = run_verification.parse_args([])
    assert args.suites == list(SUITES)
    assert args.no_archive is False
    assert set(run_verification.DEFAULT_TASKS) == set(SUITES)

    args = run_verification.parse_args(["--suites", "psh", "--seed", "4", "--no-archive"])
    assert args.suites == ["psh"] and args.seed == 4 and args.no_archive is True


def test_setup_writes_env_once(tmp_path):
    """The .env file gets every default key and an existing file is left alone"""
    path = tmp_path / ".env"
    setup.write_env(path)
    lines = path.read_text().splitlines()
    assert [line.split("=", 1)[0] for line in lines] == list(setup.ENV_DEFAULTS)
    assert "TETRA_SEED=0" in lines

    path.write_text("TETRA_SEED=9\n")
    setup.write_env(path)
    assert path.read_text() == "TETRA_SEED=9\n"


def test_setup_smoke_steps_use_the_cli():
    """Smoke steps are module invocations of the command-line front end"""
    for args, description in setup.SMOKE_STEPS:
        assert args[:2] == ["-m", "app.cli"]
        assert description
