"""Тесты логирования команд и настройки логгеров."""

import logging
import logging.handlers

import pytest

from swarm_scheduler.core.exceptions import ConfigurationError
from swarm_scheduler.decorators import log_action
from swarm_scheduler.experiments.config import RunConfig
from swarm_scheduler.logging_config import (
    ACTION_LOGGER_NAME,
    get_action_logger,
    setup_action_logger,
    setup_logging,
)


@pytest.fixture
def action_records(monkeypatch, caplog):
    """Записи логгера команд, перехваченные caplog."""
    monkeypatch.setattr(get_action_logger(), "propagate", True)
    caplog.set_level(logging.INFO, logger=ACTION_LOGGER_NAME)
    return caplog


@log_action("RUN")
def _run(config, *, out_dir):
    return {"policy": "PCP_STATIC", "zeta": 0.5, "files": ["a", "b"], "brownouts": 3}


@log_action(verbose=True)
def _sweep(config, *, out_dir):
    return {"rows": 4, "brownouts": 3}


@log_action("REPORT")
def _fail(*, results_dir):
    raise ConfigurationError(str(results_dir), "нет compare.csv или sweep.csv")


class TestLogAction:
    def test_success_line(self, action_records):
        _run(RunConfig(), out_dir="results")
        message = action_records.records[-1].getMessage()
        assert message.startswith("RUN policy='PCP' seed=0 out_dir='results'")
        assert "policy='PCP_STATIC'" in message
        assert "zeta=0.5000" in message
        assert "files=2" in message
        assert "brownouts" not in message
        assert message.endswith("result=OK")

    def test_default_action_name_and_verbose(self, action_records):
        _sweep(RunConfig(), out_dir="out")
        message = action_records.records[-1].getMessage()
        assert message.startswith("_SWEEP")
        assert "brownouts=3" in message

    def test_errors_are_logged_and_reraised(self, action_records):
        with pytest.raises(ConfigurationError):
            _fail(results_dir="empty")
        record = action_records.records[-1]
        assert record.levelno == logging.ERROR
        assert "result=ERROR" in record.getMessage()
        assert "error_type=ConfigurationError" in record.getMessage()


class TestSetup:
    @pytest.fixture(autouse=True)
    def _restore(self):
        root, action = logging.getLogger(), get_action_logger()
        saved = (root.level, action.level, action.propagate)
        yield
        for logger in (root, action):
            for handler in list(logger.handlers):
                if isinstance(handler, logging.handlers.RotatingFileHandler):
                    logger.removeHandler(handler)
                    handler.close()
        root.setLevel(saved[0])
        action.setLevel(saved[1])
        action.propagate = saved[2]

    def test_main_log_file(self, tmp_path):
        setup_logging(logs_dir=tmp_path)
        logging.getLogger("swarm_scheduler.core.engine").info("Run done")
        for handler in logging.getLogger().handlers:
            handler.flush()
        text = (tmp_path / "swarmsim.log").read_text(encoding="utf-8")
        assert "| swarm_scheduler.core.engine | Run done" in text

    def test_action_log_does_not_propagate(self, tmp_path):
        logger = setup_action_logger(logs_dir=tmp_path)
        assert logger.propagate is False
        logger.info("RUN result=OK")
        for handler in logger.handlers:
            handler.flush()
        assert "RUN result=OK" in (tmp_path / "actions.log").read_text(encoding="utf-8")
