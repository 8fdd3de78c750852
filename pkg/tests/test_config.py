"""
测试 RunConfig 的环境变量加载与严格 JSON 回放。
"""

import os

import pytest

from otmap.core.config import RunConfig
from otmap.core.errors import ConfigError


class TestFromEnv:
    """RunConfig.from_env 测试。"""

    def test_defaults(self, isolated_env):
        cfg = RunConfig.from_env()
        assert cfg.seed == 0
        assert cfg.threads == 1
        assert cfg.log_level == "INFO"
        assert not cfg.debug

    def test_variables(self, isolated_env, monkeypatch):
        monkeypatch.setenv("OTMAP_SEED", "42")
        monkeypatch.setenv("OTMAP_THREADS", "4")
        monkeypatch.setenv("OTMAP_LOG_LEVEL", "debug")
        monkeypatch.setenv("OTMAP_DEBUG", "yes")
        monkeypatch.setenv("OTMAP_TRACE", "on")
        cfg = RunConfig.from_env()
        assert cfg.seed == 42
        assert cfg.log_level == "DEBUG"
        assert cfg.debug
        assert cfg.trace
        assert cfg.conjugate.seed == 42 and cfg.conjugate.threads == 4
        assert cfg.neural.seed == 42
        assert cfg.study.threads == 4

    def test_dotenv_file(self, isolated_env):
        (isolated_env / ".env").write_text("OTMAP_SEED=7\n", encoding="utf-8")
        try:
            assert RunConfig.from_env().seed == 7
        finally:
            os.environ.pop("OTMAP_SEED", None)

    def test_bad_integer(self, isolated_env, monkeypatch):
        monkeypatch.setenv("OTMAP_SEED", "seven")
        with pytest.raises(ConfigError) as exc:
            RunConfig.from_env()
        assert exc.value.key == "OTMAP_SEED"

    def test_threads_at_least_one(self, isolated_env, monkeypatch):
        monkeypatch.setenv("OTMAP_THREADS", "0")
        assert RunConfig.from_env().threads == 1


class TestFromDict:
    """RunConfig 严格回放测试。"""

    def test_round_trip(self):
        cfg = RunConfig(seed=3)
        cfg.study.ns = (10, 20)
        cfg.neural.width = 32
        cfg.semidual.J = 9.0
        back = RunConfig.from_dict(cfg.to_dict())
        assert back == cfg

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError) as exc:
            RunConfig.from_dict({"sed": 1})
        assert exc.value.key == "sed"

    def test_unknown_nested_key(self):
        with pytest.raises(ConfigError) as exc:
            RunConfig.from_dict({"conjugate": {"tolerance": 1e-6}})
        assert exc.value.key == "conjugate.tolerance"

    def test_wrong_type(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"seed": "zero"})
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"study": {"ns": [10, "x"]}})

    def test_int_accepted_for_float(self):
        assert RunConfig.from_dict({"conjugate": {"tol": 1}}).conjugate.tol == 1.0

    def test_summary(self):
        assert "Seed: 0" in RunConfig().summary()
