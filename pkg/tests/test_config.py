"""Tests for configuration loading."""

import json
import logging

import pytest

from linkshadows.config import ToolkitConfig, load_config
from linkshadows.errors import FormatError


class TestLoadConfig:
    """Tests for load_config."""

    def test_defaults_without_file(self, tmp_path, monkeypatch):
        """Test the built-in defaults apply when no config file exists."""
        monkeypatch.chdir(tmp_path)
        config = load_config()
        assert config == ToolkitConfig()
        assert config.source is None
        assert config.search_caps()["depth_cap"] == 64

    def test_default_path_is_picked_up(self, tmp_path, monkeypatch):
        """Test ./linkshadows.json is read when present."""
        monkeypatch.chdir(tmp_path)
        (tmp_path / "linkshadows.json").write_text(json.dumps({"search": {"depth_cap": 5}}))
        config = load_config()
        assert config.depth_cap == 5
        assert config.state_cap == 20000

    def test_explicit_file(self, tmp_path):
        """Test every section is read from an explicit path."""
        path = tmp_path / "c.json"
        path.write_text(
            json.dumps(
                {
                    "log_level": "DEBUG",
                    "orbit": {"depth_limit": 3, "reflection_fold": False},
                    "brute_force": {"max_n": 6},
                }
            )
        )
        config = load_config(path)
        assert config.log_level == "DEBUG"
        assert config.orbit_depth_limit == 3
        assert config.reflection_fold is False
        assert config.brute_force_max_n == 6
        assert config.source == path

    def test_unknown_keys_warn(self, tmp_path, caplog):
        """Test unknown keys are ignored with a warning."""
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"colour": "blue", "search": {"depth": 3}}))
        with caplog.at_level(logging.WARNING):
            config = load_config(path, logging.getLogger("test"))
        assert "Ignoring unknown config key 'colour'" in caplog.text
        assert "Ignoring unknown config key 'search.depth'" in caplog.text
        assert config.depth_cap == 64

    def test_missing_explicit_path(self, tmp_path):
        """Test an explicit path that does not exist raises."""
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "missing.json")

    def test_not_an_object(self, tmp_path):
        """Test a JSON array is rejected."""
        path = tmp_path / "c.json"
        path.write_text("[1, 2]")
        with pytest.raises(FormatError):
            load_config(path)

    def test_invalid_json(self, tmp_path):
        """Test malformed JSON is rejected."""
        path = tmp_path / "c.json"
        path.write_text("{")
        with pytest.raises(FormatError):
            load_config(path)
