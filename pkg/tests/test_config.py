import json

import pytest

from core.config import ConfigManager, RunConfig
from core.errors import PreconditionError, SchemaError


def write(path, data):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f)


def test_defaults_without_file(config_file):
    config = ConfigManager(config_file, environ={}).resolve()
    assert config.seed == 42
    assert (config.r_cut, config.delta) == ("8", "1/40")
    assert config.enumeration_cap == 10_000
    assert config.trial_count("transference") == 200
    assert config.validate() == (True, None)


def test_file_merges_over_defaults(config_file):
    write(config_file, {"seed": 7, "metric": {"delta": "1/20"}, "unknown": 1})
    config = ConfigManager(config_file, environ={}).resolve()
    assert config.seed == 7
    assert (config.r_cut, config.delta) == ("8", "1/20")


def test_corrupt_file_falls_back_to_defaults(config_file):
    with open(config_file, "w", encoding="utf-8") as f:
        f.write("{not json")
    assert ConfigManager(config_file, environ={}).resolve().seed == 42


def test_precedence_flags_over_environment_over_file(config_file):
    write(config_file, {"seed": 7, "workers": 2})
    manager = ConfigManager(config_file, environ={"CHABAUTY_SEED": "9", "CHABAUTY_R_CUT": "12"})
    assert manager.resolve().seed == 9
    assert manager.resolve().r_cut == "12"
    assert manager.resolve().workers == 2
    assert manager.resolve({"seed": 11, "workers": None}).seed == 11


def test_debug_environment_switch(config_file):
    assert ConfigManager(config_file, environ={"CHABAUTY_DEBUG": "1"}).resolve().debug_log
    assert not ConfigManager(config_file, environ={"CHABAUTY_DEBUG": "0"}).resolve().debug_log


def test_bad_environment_value(config_file):
    with pytest.raises(SchemaError, match="CHABAUTY_SEED"):
        ConfigManager(config_file, environ={"CHABAUTY_SEED": "many"})


def test_overrides_map_onto_sections(config_file):
    config = ConfigManager(config_file, environ={}).resolve(
        {"delta": "1/80", "cap": 50, "net_cap": 1000, "trials": {"paths": 3}})
    assert config.delta == "1/80"
    assert (config.enumeration_cap, config.net_cap) == (50, 1000)
    assert config.trial_count("paths") == 3


@pytest.mark.parametrize("config, message", [
    (RunConfig(format="xml"), "unknown output format: xml"),
    (RunConfig(r_cut="1/2"), "r_cut must be at least 1"),
    (RunConfig(delta="0"), "delta must lie in (0, 1]"),
    (RunConfig(cd="0"), "transference constant must be positive"),
    (RunConfig(seed=-1), "seed must be an unsigned 64-bit integer"),
    (RunConfig(workers=0), "workers must be at least 1"),
    (RunConfig(trials={"paths": 0}), "trial counts must be positive"),
])
def test_validation_messages(config, message):
    assert config.validate() == (False, message)


def test_metric_params_and_echo():
    config = RunConfig(r_cut="15/2", delta="1/20", seed=3)
    params = config.metric_params()
    assert str(params.r_cut) == "15/2"
    echo = config.echo()
    assert echo["seed"] == 3
    assert echo["metric"] == {"r_cut": "15/2", "delta": "1/20"}


def test_set_caps_validates_and_persists(config_file):
    manager = ConfigManager(config_file, environ={})
    with pytest.raises(PreconditionError):
        manager.set_caps(0, 100)
    manager.set_caps(50, 1000)
    assert ConfigManager(config_file, environ={}).get_caps() == {"enumeration": 50, "net_size": 1000}


def test_resolve_reads_through_the_getters(config_file):
    write(config_file, {"caps": {"net_size": 777}, "suites": {"paths": 4}})
    manager = ConfigManager(config_file, environ={})
    config = manager.resolve()
    assert config.net_cap == manager.get_caps()["net_size"] == 777
    assert config.trial_count("paths") == manager.get_trials("paths") == 4
    assert config.trial_count("duality") == 20


def test_persist_keeps_unset_values(config_file):
    manager = ConfigManager(config_file, environ={})
    manager.persist({"delta": "1/80", "cap": None, "net_cap": 900, "seed": 3})
    reloaded = ConfigManager(config_file, environ={})
    assert reloaded.get_metric() == {"r_cut": "8", "delta": "1/80"}
    assert reloaded.get_caps() == {"enumeration": 10000, "net_size": 900}
    assert reloaded.get_setting("seed") == 3


def test_set_metric_validates(config_file):
    manager = ConfigManager(config_file, environ={})
    with pytest.raises(PreconditionError):
        manager.set_metric("1/2", "1/40")
    manager.set_metric("10", "1/50")
    assert ConfigManager(config_file, environ={}).get_metric() == {"r_cut": "10", "delta": "1/50"}


def test_export_and_import(config_file, tmp_path):
    manager = ConfigManager(config_file, environ={})
    manager.set_setting("seed", 123)
    exported = tmp_path / "exported.json"
    assert manager.export_config(str(exported), {"workers": 4})

    other = ConfigManager(str(tmp_path / "other.json"), environ={})
    assert other.import_config(str(exported))
    assert other.get_setting("seed") == 123
    assert other.get_setting("workers") == 4
    assert not other.import_config(str(tmp_path / "missing.json"))
