"""Pipeline directories, custom function scaffolding, hot reload."""

import os
import textwrap

import numpy as np
import pytest

from lidarpipe import ConfigError, PipelineConfig
from lidarpipe.engine import (
    CONFIG_NAME,
    PipelineEngine,
    build_default_registry,
    new_pipeline,
    scaffold_custom_function,
)
from lidarpipe.frame import PROCESS_CATEGORIES, Frame, PointCloud
from lidarpipe.io import write_pcd


class TestNewPipeline:
    def test_default_config_roundtrips(self, tmp_path):
        target = tmp_path / "pipe"
        config_path = new_pipeline(target, build_default_registry())
        config = PipelineConfig.load(config_path)
        assert list(config.proc.keys()) == list(PROCESS_CATEGORIES)
        assert PipelineConfig.from_yaml(config.to_yaml()).to_dict() == config.to_dict()

    def test_builtins_present_but_disabled(self, tmp_path):
        config = PipelineConfig.load(new_pipeline(tmp_path / "p", build_default_registry()))
        entries = [e for cat in PROCESS_CATEGORIES for e in config.proc[cat]]
        assert entries and all(not e.enabled for e in entries)
        assert config.find("lidar", "crop") is not None

    def test_algo_subdirectories_created(self, tmp_path):
        new_pipeline(tmp_path / "p", build_default_registry())
        for category in PROCESS_CATEGORIES:
            assert (tmp_path / "p" / "algo" / category).is_dir()

    def test_nonempty_dir_refused(self, tmp_path):
        (tmp_path / "junk.txt").write_text("x")
        with pytest.raises(ConfigError, match="not empty"):
            new_pipeline(tmp_path, build_default_registry())


class TestScaffold:
    def test_creates_stub_and_fragment(self, tmp_path):
        paths = scaffold_custom_function(tmp_path, "lidar", "my_filter")
        assert [p.name for p in paths] == ["my_filter.py", "my_filter.yml"]
        stub = paths[0].read_text()
        assert "def my_filter(frame, params, config):" in stub
        assert "enabled: false" in paths[1].read_text()
        assert "priority: 100" in paths[1].read_text()

    def test_collision_refused(self, tmp_path):
        scaffold_custom_function(tmp_path, "lidar", "my_filter")
        with pytest.raises(ConfigError, match="already exists"):
            scaffold_custom_function(tmp_path, "lidar", "my_filter")

    def test_builtin_collision_refused(self, tmp_path):
        with pytest.raises(ConfigError, match="already exists"):
            scaffold_custom_function(tmp_path, "lidar", "crop", registry=build_default_registry())

    def test_invalid_category_lists_valid_ones(self, tmp_path):
        with pytest.raises(ConfigError, match="pre.*lidar.*camera.*calib.*label.*post"):
            scaffold_custom_function(tmp_path, "bogus", "fn")

    def test_invalid_identifier_refused(self, tmp_path):
        with pytest.raises(ConfigError, match="identifier"):
            scaffold_custom_function(tmp_path, "lidar", "my-filter")


def make_pipeline_with_data(tmp_path, n_frames=3):
    pipeline = tmp_path / "pipe"
    new_pipeline(pipeline, build_default_registry())
    data = pipeline / "data" / "lidar"
    data.mkdir(parents=True)
    for i in range(n_frames):
        pts = np.full((4, 4), float(i))
        data.joinpath(f"{i:06d}.pcd").write_bytes(write_pcd(PointCloud(pts)))
    config = PipelineConfig.load(pipeline / CONFIG_NAME)
    config.data.main_dir = str(pipeline / "data")
    config.data.pcd_type = ".pcd"
    config.save(pipeline / CONFIG_NAME)
    return pipeline


class TestCustomFunctions:
    def test_engine_scaffold_adds_config_entry(self, tmp_path):
        pipeline = make_pipeline_with_data(tmp_path)
        engine = PipelineEngine(pipeline)
        engine.scaffold("lidar", "tagger")
        entry = engine.config.find("lidar", "tagger")
        assert entry is not None
        assert entry.enabled is False
        assert entry.priority == 100
        assert engine.registry.has("lidar", "tagger")

    def test_custom_function_executes(self, tmp_path):
        pipeline = make_pipeline_with_data(tmp_path)
        engine = PipelineEngine(pipeline)
        engine.scaffold("lidar", "tagger")
        py = pipeline / "algo" / "lidar" / "tagger.py"
        py.write_text(textwrap.dedent("""
            def tagger(frame, params, config):
                frame.put("tag", "v1")
        """))
        os.utime(py, (os.stat(py).st_atime, os.stat(py).st_mtime + 2))
        engine.patch("proc.lidar.tagger.enabled", True)
        frame = engine.step()
        assert frame.get("tag") == "v1"

    def test_hot_reload_without_restart(self, tmp_path):
        pipeline = make_pipeline_with_data(tmp_path)
        engine = PipelineEngine(pipeline)
        engine.scaffold("lidar", "tagger")
        py = pipeline / "algo" / "lidar" / "tagger.py"

        py.write_text("def tagger(frame, params, config):\n    frame.put('tag', 'v1')\n")
        os.utime(py, (os.stat(py).st_atime, os.stat(py).st_mtime + 2))
        engine.patch("proc.lidar.tagger.enabled", True)
        assert engine.step().get("tag") == "v1"

        # Edit the file; the very next frame picks the new code up.
        py.write_text("def tagger(frame, params, config):\n    frame.put('tag', 'v2')\n")
        os.utime(py, (os.stat(py).st_atime, os.stat(py).st_mtime + 4))
        assert engine.step().get("tag") == "v2"

    def test_custom_function_params_from_fragment(self, tmp_path):
        pipeline = make_pipeline_with_data(tmp_path)
        (pipeline / "algo" / "post" / "scaler.py").write_text(
            "def scaler(frame, params, config):\n"
            "    frame.put('scaled', params['factor'] * 2)\n"
        )
        (pipeline / "algo" / "post" / "scaler.yml").write_text(
            "enabled: true\npriority: 5\nfactor: 21\n"
        )
        engine = PipelineEngine(pipeline)
        frame = engine.step()
        assert frame.get("scaled") == 42
        entry = engine.config.find("post", "scaler")
        assert entry.enabled and entry.params["factor"] == 21

    def test_broken_custom_function_does_not_kill_engine(self, tmp_path):
        pipeline = make_pipeline_with_data(tmp_path)
        (pipeline / "algo" / "pre" / "broken.py").write_text("this is not python (\n")
        engine = PipelineEngine(pipeline)
        assert engine.step() is not None  # load failure logged, engine alive
        assert not engine.registry.has("pre", "broken")
